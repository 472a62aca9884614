"""Command-line interface: a thin client over the HTTP service.

Exit codes: 0 success / positive answer, 1 negative answer (no match,
NOT_INCLUDES or UNKNOWN, empty result set), 2 usage or validation error,
3 I/O error. Diagnostics go to stderr; stdout carries only the answer
and is byte-identical across runs on identical inputs.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .client import ClientError, ServiceClient

EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_IO = 3


class Context:
    def __init__(self, registry_file: str | None, library: str | None, server: str | None):
        self.registry_file = registry_file
        self.library_file = library
        self.client = ServiceClient(server)
        self._registry_text: str | None = None

    def registry_text(self) -> str | None:
        if self.registry_file is None:
            return None
        if self._registry_text is None:
            self._registry_text = read_file(self.registry_file)
        return self._registry_text

    def call(self, path: str, payload: dict) -> dict:
        body = dict(payload)
        text = self.registry_text()
        if text is not None:
            body.setdefault("registry", text)
        try:
            return self.client.call(path, body)
        except ClientError as e:
            fail(str(e), EXIT_IO if e.kind == "io" else EXIT_USAGE)
            raise AssertionError  # unreachable


def fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        fail(f"cannot read {path}: {e}", EXIT_IO)
        raise AssertionError


@click.group()
@click.option("--registry", "registry_file", metavar="FILE", default=None,
              help="Registry document overriding the built-in tag trees.")
@click.option("--library", "library_file", metavar="FILE", default=None,
              help="Default category library for includes/testcases.")
@click.option("--server", metavar="URL", default=None,
              help="Remote service URL; default runs the service in-process.")
@click.pass_context
def main(ctx: click.Context, registry_file: str | None, library_file: str | None,
         server: str | None) -> None:
    """Tag-based scenario categories for AV assessment."""
    ctx.obj = Context(registry_file, library_file, server)


# --- trees -------------------------------------------------------------------


@main.group()
def trees() -> None:
    """Inspect the tag trees of the active registry."""


@trees.command("list")
@click.pass_obj
def trees_list(ctx: Context) -> None:
    data = ctx.call("/registry/trees", {})
    for tree in data["trees"]:
        click.echo(f"{tree['tree_id']}\t{tree['scope']}\t{tree['nodes']}")


def _render_node(node: dict, depth: int, lines: list[str]) -> None:
    annot = f"  # {node['annotation']}" if node.get("annotation") else ""
    lines.append(f"{'  ' * depth}{node['label']} \"{node['display_name']}\"{annot}")
    for child in node["children"]:
        _render_node(child, depth + 1, lines)


@trees.command("show")
@click.argument("tree_id")
@click.option("--format", "fmt", type=click.Choice(["text", "dot"]), default="text")
@click.pass_obj
def trees_show(ctx: Context, tree_id: str, fmt: str) -> None:
    if fmt == "dot":
        data = ctx.call("/registry/dot", {"tree_id": tree_id})
        click.echo(data["dot"], nl=False)
        return
    data = ctx.call("/registry/tree", {"tree_id": tree_id})
    lines = [f"{data['tree_id']} [{data['scope']}] \"{data['root']['display_name']}\""]
    for child in data["root"]["children"]:
        _render_node(child, 1, lines)
    click.echo("\n".join(lines))


@trees.command("export-dot")
@click.argument("tree_id")
@click.pass_obj
def trees_export_dot(ctx: Context, tree_id: str) -> None:
    data = ctx.call("/registry/dot", {"tree_id": tree_id})
    click.echo(data["dot"], nl=False)


@trees.command("doc")
@click.pass_obj
def trees_doc(ctx: Context) -> None:
    """Dump the active registry as a registry document."""
    data = ctx.call("/registry/document", {})
    click.echo(data["document"], nl=False)


# --- category / scenario -------------------------------------------------------


@main.group()
def category() -> None:
    """Work with category definition files."""


@category.command("lint")
@click.argument("file")
@click.pass_obj
def category_lint(ctx: Context, file: str) -> None:
    data = ctx.call("/categories/lint", {"source": read_file(file)})
    for diag in data["diagnostics"]:
        where = f"{diag['line']}:{diag['col']}: " if diag.get("line") else ""
        click.echo(
            f"{diag['category']}: {where}{diag['severity']}: {diag['message']} "
            f"[{diag['code']}]"
        )


@main.group()
def scenario() -> None:
    """Work with scenario record files."""


@scenario.command("validate")
@click.argument("file")
@click.pass_obj
def scenario_validate(ctx: Context, file: str) -> None:
    data = ctx.call("/scenarios/validate", {"source": read_file(file)})
    click.echo(f"OK {data['scenario_id']}")


# --- match ---------------------------------------------------------------------


@main.command()
@click.argument("category_file")
@click.argument("category_name")
@click.argument("scenario_file")
@click.pass_obj
def match(ctx: Context, category_file: str, category_name: str, scenario_file: str) -> None:
    """Check whether CATEGORY_NAME comprises the scenario; print the witness."""
    data = ctx.call(
        "/match",
        {
            "categories": read_file(category_file),
            "category_name": category_name,
            "scenario": read_file(scenario_file),
        },
    )
    if not data["matched"]:
        click.echo("NO MATCH")
        sys.exit(EXIT_NEGATIVE)
    click.echo(data["witness"]["report"], nl=False)


# --- includes --------------------------------------------------------------------


@main.command()
@click.argument("names", nargs=-1, metavar="[LIBRARY_FILE] LARGER SMALLER")
@click.option("--semantic", is_flag=True,
              help="Fall back to bounded exhaustive search when the syntactic check "
                   "is inconclusive.")
@click.option("--max-actors", default=2, show_default=True)
@click.option("--max-phases", default=2, show_default=True)
@click.option("--tag-pool", "tag_pool_file", metavar="FILE", default=None,
              help="File with one tag path per line bounding the search universe.")
@click.pass_obj
def includes(ctx: Context, names: tuple[str, ...], semantic: bool, max_actors: int,
             max_phases: int, tag_pool_file: str | None) -> None:
    """Decide whether LARGER includes SMALLER (both named in the library)."""
    if len(names) == 3:
        library_file, larger, smaller = names
    elif len(names) == 2:
        library_file, (larger, smaller) = None, names
    else:
        fail("expected [LIBRARY_FILE] LARGER SMALLER", EXIT_USAGE)
    lib = library_file or ctx.library_file
    if lib is None:
        fail("no category library given (positional argument or --library)", EXIT_USAGE)
    payload = {
        "categories": read_file(lib),
        "larger": larger,
        "smaller": smaller,
        "semantic": semantic,
        "max_actors": max_actors,
        "max_phases": max_phases,
    }
    if tag_pool_file is not None:
        pool = [ln.strip() for ln in read_file(tag_pool_file).splitlines() if ln.strip()]
        payload["tag_pool"] = pool
    data = ctx.call("/includes", payload)
    click.echo(data["status"])
    click.echo(f"note: {data['note']}")
    proof = data.get("proof")
    if proof and proof["kind"] == "mapping":
        for pair in proof["group_map"]:
            click.echo(f"  group {pair[0]} => {pair[1]}")
        for pair in proof["snapshot_map"]:
            click.echo(f"  snapshot {pair[0]} => {pair[1]}")
        for pair in proof["requirement_map"]:
            click.echo(f"  {pair[0]} => {pair[1]}")
    elif proof and proof["kind"] == "exhaustion":
        click.echo(
            f"  checked {proof['records_checked']} records, "
            f"{proof['comprised_checked']} comprised by the smaller category"
        )
    if data.get("counterexample"):
        click.echo("counterexample:")
        click.echo(data["counterexample"], nl=False)
    if data["status"] != "INCLUDES":
        if data["status"] == "UNKNOWN" and not semantic:
            click.echo("hint: the syntactic check is inconclusive; retry with "
                       "--semantic", err=True)
        sys.exit(EXIT_NEGATIVE)


# --- store -----------------------------------------------------------------------


@main.group()
def store() -> None:
    """Manage a scenario store file."""


_store_option = click.option(
    "--store", "store_path", metavar="PATH", default="scentag.store", show_default=True
)


@store.command("init")
@_store_option
@click.pass_obj
def store_init(ctx: Context, store_path: str) -> None:
    data = ctx.call("/store/init", {"path": store_path})
    click.echo(f"initialized {data['path']}")


@store.command("add")
@click.argument("scenario_file")
@_store_option
@click.pass_obj
def store_add(ctx: Context, scenario_file: str, store_path: str) -> None:
    source = sys.stdin.read() if scenario_file == "-" else read_file(scenario_file)
    data = ctx.call("/store/add", {"path": store_path, "scenario": source})
    click.echo(f"added {data['scenario_id']} ({data['records']} records)")


@store.command("query")
@click.argument("expr")
@_store_option
@click.pass_obj
def store_query(ctx: Context, expr: str, store_path: str) -> None:
    data = ctx.call("/store/query", {"path": store_path, "query": expr})
    for rid in data["ids"]:
        click.echo(rid)
    if not data["ids"]:
        sys.exit(EXIT_NEGATIVE)


# --- test cases --------------------------------------------------------------------


@main.group()
def testcases() -> None:
    """Select test cases from a store using an ODD."""


@testcases.command("select")
@click.option("--library", "library_file", metavar="FILE", default=None)
@click.option("--odd", "odd_names", metavar="NAME[,NAME...]", multiple=True, required=True)
@click.option("--store", "store_path", metavar="PATH", required=True)
@click.pass_obj
def testcases_select(ctx: Context, library_file: str | None, odd_names: tuple[str, ...],
                     store_path: str) -> None:
    lib = library_file or ctx.library_file
    if lib is None:
        fail("no category library given (--library)", EXIT_USAGE)
    names = [n.strip() for chunk in odd_names for n in chunk.split(",") if n.strip()]
    data = ctx.call(
        "/testcases/select",
        {"store_path": store_path, "library": read_file(lib), "odd": names},
    )
    for sel in data["selections"]:
        click.echo(f"{sel['scenario_id']}\t{','.join(sel['categories'])}")
    if not data["selections"]:
        sys.exit(EXIT_NEGATIVE)


# --- serve ------------------------------------------------------------------------


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_obj
def serve(ctx: Context, host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app
    from .taxonomy import parse_registry

    registry = None
    text = ctx.registry_text()
    if text is not None:
        registry = parse_registry(text)
    uvicorn.run(create_app(registry), host=host, port=port)


if __name__ == "__main__":
    main()
