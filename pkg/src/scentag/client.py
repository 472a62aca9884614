"""HTTP client for the scentag service.

The CLI talks to the service through this client. With no server URL the
requests run against an in-process application over httpx's ASGI
transport, so the CLI works standalone while still exercising the full
HTTP surface; with `--server` the same requests go over the network.
"""

from __future__ import annotations

import asyncio
from typing import Any

import httpx


class ClientError(Exception):
    """Error response from the service, with its kind and location."""

    def __init__(self, kind: str, message: str, line: int | None = None, col: int | None = None):
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col
        super().__init__(message)

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


class ServiceClient:
    def __init__(self, server: str | None = None):
        self.server = server
        self._app = None

    def _get_app(self):
        if self._app is None:
            from .service import create_app

            self._app = create_app()
        return self._app

    def call(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        if self.server is not None:
            try:
                with httpx.Client(base_url=self.server, timeout=120.0) as client:
                    response = client.post(path, json=payload)
            except httpx.HTTPError as e:
                raise ClientError("io", f"cannot reach server {self.server}: {e}") from e
        else:

            async def go() -> httpx.Response:
                transport = httpx.ASGITransport(app=self._get_app())
                async with httpx.AsyncClient(
                    transport=transport, base_url="http://scentag.local"
                ) as client:
                    return await client.post(path, json=payload)

            response = asyncio.run(go())
        if response.status_code >= 400:
            raise _to_error(response)
        return response.json()


def _to_error(response: httpx.Response) -> ClientError:
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict) and "message" in detail:
        return ClientError(
            detail.get("kind", "usage"),
            detail["message"],
            detail.get("line"),
            detail.get("col"),
        )
    return ClientError("usage", f"service error {response.status_code}: {detail}")
