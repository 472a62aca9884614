"""Tag-indexed scenario store with a boolean query language.

One store is one append-only text file: a `scentag-store/1` header line,
then one scenario per line in the single-line form. Opening a store
rebuilds the full index - every tag of every record is posted under
itself and under every ancestor, so a query atom finds all records
carrying a tag it subsumes, matching the matcher's semantics exactly.

Queries combine tag-path atoms with NOT > AND > OR and parentheses::

    (road_layout:junction OR road_layout:roundabout) AND traffic_light:red

NOT is complement relative to the store's record set. Writers take an
exclusive advisory lock on the file; readers work on the snapshot loaded
at open.
"""

from __future__ import annotations

import fcntl
import os
from dataclasses import dataclass
from pathlib import Path

from .category import Requirement, ScenarioCategory
from .errors import ParseError, StoreError, ValidationError
from .lexer import TokenStream
from .matcher import comprising_categories, requirement_satisfied
from .scenario import ScenarioRecord, from_line, to_line, validate_scenario
from .taxonomy import Registry, TagPath

STORE_VERSION = "scentag-store/1"


# --- query expressions ------------------------------------------------------


@dataclass(frozen=True)
class TagAtom:
    path: TagPath


@dataclass(frozen=True)
class Not:
    expr: "QueryExpr"


@dataclass(frozen=True)
class And:
    items: tuple["QueryExpr", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["QueryExpr", ...]


QueryExpr = TagAtom | Not | And | Or


def parse_query(registry: Registry, text: str) -> QueryExpr:
    """Parse a boolean tag query; atoms are resolved against the registry."""
    ts = TokenStream(text)
    expr = _parse_or(registry, ts)
    if not ts.at_end():
        raise ParseError(f"unexpected {ts.peek().text!r} after expression", ts.peek().loc)
    return expr


def _parse_or(registry: Registry, ts: TokenStream) -> QueryExpr:
    items = [_parse_and(registry, ts)]
    while ts.accept_ident("OR"):
        items.append(_parse_and(registry, ts))
    return items[0] if len(items) == 1 else Or(tuple(items))


def _parse_and(registry: Registry, ts: TokenStream) -> QueryExpr:
    items = [_parse_not(registry, ts)]
    while ts.accept_ident("AND"):
        items.append(_parse_not(registry, ts))
    return items[0] if len(items) == 1 else And(tuple(items))


def _parse_not(registry: Registry, ts: TokenStream) -> QueryExpr:
    if ts.accept_ident("NOT"):
        return Not(_parse_not(registry, ts))
    if ts.accept_punct("("):
        expr = _parse_or(registry, ts)
        ts.expect_punct(")")
        return expr
    tok = ts.expect_path()
    path = registry.resolve_path(TagPath(tok.tree_id, tok.segments), tok.loc)
    return TagAtom(path)


def render_query(expr: QueryExpr) -> str:
    if isinstance(expr, TagAtom):
        return expr.path.canonical()
    if isinstance(expr, Not):
        return f"NOT {render_query(expr.expr)}"
    if isinstance(expr, And):
        return "(" + " AND ".join(render_query(e) for e in expr.items) + ")"
    return "(" + " OR ".join(render_query(e) for e in expr.items) + ")"


# --- the store --------------------------------------------------------------


def record_tags(record: ScenarioRecord) -> frozenset[TagPath]:
    return record.all_tags()


class TagIndex:
    """Inverted index with ancestor closure, rebuilt deterministically."""

    def __init__(self) -> None:
        self.postings: dict[TagPath, set[str]] = {}

    def add(self, record: ScenarioRecord) -> None:
        for tag in record_tags(record):
            for ancestor in tag.ancestors():
                self.postings.setdefault(ancestor, set()).add(record.scenario_id)

    def lookup(self, path: TagPath) -> set[str]:
        return self.postings.get(path, set())


class StoreFile:
    """A store opened from disk; `records` is the consistent snapshot."""

    def __init__(self, path: str | os.PathLike[str], registry: Registry):
        self.path = Path(path)
        self.registry = registry
        self.records: dict[str, ScenarioRecord] = {}
        self.index = TagIndex()
        self._load()

    @staticmethod
    def init(path: str | os.PathLike[str]) -> None:
        """Create an empty store; refuses to clobber an existing file."""
        p = Path(path)
        if p.exists():
            raise ValidationError(f"store {p} already exists")
        try:
            p.write_text(STORE_VERSION + "\n", encoding="utf-8")
        except OSError as e:
            raise StoreError(f"cannot create store {p}: {e}") from e

    def _load(self) -> None:
        try:
            with open(self.path, encoding="utf-8") as f:
                fcntl.flock(f.fileno(), fcntl.LOCK_SH)
                try:
                    lines = f.read().splitlines()
                finally:
                    fcntl.flock(f.fileno(), fcntl.LOCK_UN)
        except FileNotFoundError as e:
            raise StoreError(f"store {self.path} does not exist") from e
        except OSError as e:
            raise StoreError(f"cannot read store {self.path}: {e}") from e
        if not lines or lines[0] != STORE_VERSION:
            raise StoreError(
                f"store {self.path} has a bad header (expected {STORE_VERSION!r})"
            )
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                record = from_line(self.registry, line)
            except Exception as e:
                raise StoreError(f"store {self.path} line {lineno}: {e}") from e
            if record.scenario_id in self.records:
                raise StoreError(
                    f"store {self.path} line {lineno}: duplicate scenario id "
                    f"{record.scenario_id!r}"
                )
            self.records[record.scenario_id] = record
            self.index.add(record)

    def ids(self) -> list[str]:
        return sorted(self.records)

    def add(self, record: ScenarioRecord) -> None:
        """Durably append one record and update the index."""
        if record.scenario_id in self.records:
            raise ValidationError(f"duplicate scenario id {record.scenario_id!r}")
        validate_scenario(self.registry, record)  # never write what won't re-load
        line = to_line(record)
        try:
            with open(self.path, "a", encoding="utf-8") as f:
                fcntl.flock(f.fileno(), fcntl.LOCK_EX)
                try:
                    f.write(line + "\n")
                    f.flush()
                    os.fsync(f.fileno())
                finally:
                    fcntl.flock(f.fileno(), fcntl.LOCK_UN)
        except OSError as e:
            raise StoreError(f"cannot append to store {self.path}: {e}") from e
        self.records[record.scenario_id] = record
        self.index.add(record)

    # query evaluation: indexed, and the linear-scan reference semantics

    def query(self, expr: QueryExpr) -> list[str]:
        """Matching ids in ascending order, via the inverted index."""
        return sorted(self._eval(expr))

    def _eval(self, expr: QueryExpr) -> set[str]:
        if isinstance(expr, TagAtom):
            return set(self.index.lookup(expr.path))
        if isinstance(expr, Not):
            return set(self.records) - self._eval(expr.expr)
        if isinstance(expr, And):
            out = self._eval(expr.items[0])
            for item in expr.items[1:]:
                out &= self._eval(item)
            return out
        out = self._eval(expr.items[0])
        for item in expr.items[1:]:
            out |= self._eval(item)
        return out

    def query_scan(self, expr: QueryExpr) -> list[str]:
        """Same semantics by scanning records; the index must agree."""

        def holds(e: QueryExpr, record: ScenarioRecord) -> bool:
            if isinstance(e, TagAtom):
                return (
                    requirement_satisfied(
                        self.registry, Requirement(e.path), record_tags(record)
                    )
                    is not None
                )
            if isinstance(e, Not):
                return not holds(e.expr, record)
            if isinstance(e, And):
                return all(holds(item, record) for item in e.items)
            return any(holds(item, record) for item in e.items)

        return sorted(rid for rid, rec in self.records.items() if holds(expr, rec))


# --- ODD-based test-case selection -------------------------------------------


@dataclass(frozen=True)
class OddSpec:
    """An operational design domain as a set of category names."""

    categories: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.categories:
            raise ValidationError("ODD category list must be nonempty")
        deduped = tuple(dict.fromkeys(self.categories))
        object.__setattr__(self, "categories", deduped)


def select_test_cases(
    store: StoreFile, library: list[ScenarioCategory], odd: OddSpec
) -> list[tuple[str, list[str]]]:
    """Records comprised by at least one ODD category, with all their
    comprising ODD categories; test cases are the intersection of the
    scenario set and the ODD, so the output is always a subset of the
    store."""
    by_name = {c.name: c for c in library}
    selected: list[ScenarioCategory] = []
    for name in odd.categories:
        if name not in by_name:
            raise ValidationError(f"ODD references unknown category {name!r}")
        selected.append(by_name[name])
    out: list[tuple[str, list[str]]] = []
    for rid in store.ids():
        names = [
            name
            for name, _ in comprising_categories(
                store.registry, selected, store.records[rid]
            )
        ]
        if names:
            out.append((rid, names))
    return out
