"""Hierarchical tag trees and the subsumption order over tag paths.

A registry holds named tag trees, each scoped to one of three aspects of
a traffic scenario: the actors (`actor`), the static environment
(`static`), or the ambient conditions (`condition`). A tag path selects
a node in one tree; an ancestor path stands for the union of everything
below it, which is what makes generic and specific category definitions
interoperate.

Registry documents are line-oriented text::

    tree lead_vehicle scope=actor "Lead vehicle"
      leader "Leader"
      no_leader "No leader"

Two spaces of indentation per level; a `# text` tail on a node line is a
free-form annotation; a line whose first character is `#` is a comment.
The root display name on the `tree` line is optional.
"""

from __future__ import annotations

import enum
import functools
import importlib.resources
import re
from dataclasses import dataclass, field

from .errors import ParseError, ResolutionError, SourceLoc, ValidationError

LABEL_RE = re.compile(r"^[a-z][a-z0-9_]*$")
MAX_DEPTH = 8


class Scope(str, enum.Enum):
    ACTOR = "actor"
    STATIC = "static"
    CONDITION = "condition"


@functools.total_ordering
@dataclass(frozen=True)
class TagPath:
    """A node address: tree id plus the labels from root-child downward.

    `segments == ()` addresses the tree root, i.e. "any value in this
    tree". The canonical text form is `tree_id:seg1/seg2/...`.
    """

    tree_id: str
    segments: tuple[str, ...] = ()

    def canonical(self) -> str:
        return f"{self.tree_id}:{'/'.join(self.segments)}"

    def ancestors(self) -> list["TagPath"]:
        """Self plus every proper ancestor, root included."""
        return [TagPath(self.tree_id, self.segments[:k]) for k in range(len(self.segments) + 1)]

    def __lt__(self, other: "TagPath") -> bool:
        return self.canonical() < other.canonical()

    def __str__(self) -> str:
        return self.canonical()


@dataclass(frozen=True)
class TagNode:
    label: str
    display_name: str
    children: tuple["TagNode", ...] = ()
    annotation: str | None = None


@dataclass(frozen=True)
class TagTree:
    tree_id: str
    scope: Scope
    root: TagNode

    def node_count(self) -> int:
        def count(node: TagNode) -> int:
            return 1 + sum(count(c) for c in node.children)

        return count(self.root)


@dataclass(frozen=True)
class Registry:
    """Immutable collection of tag trees; safe for concurrent reads."""

    trees: dict[str, TagTree] = field(default_factory=dict)

    @property
    def scope(self) -> dict[str, Scope]:
        return {tree_id: tree.scope for tree_id, tree in self.trees.items()}

    def scope_of(self, path: TagPath) -> Scope:
        tree = self.trees.get(path.tree_id)
        if tree is None:
            raise ResolutionError(f"unknown tag tree {path.tree_id!r}")
        return tree.scope

    def resolve(self, path_text: str) -> TagPath:
        return resolve(self, path_text)

    def resolve_path(self, path: TagPath, loc: SourceLoc | None = None) -> TagPath:
        """Check that `path` addresses a node; returns it unchanged."""
        tree = self.trees.get(path.tree_id)
        if tree is None:
            raise ResolutionError(f"unknown tag tree {path.tree_id!r}", loc)
        node = tree.root
        for depth, seg in enumerate(path.segments):
            for child in node.children:
                if child.label == seg:
                    node = child
                    break
            else:
                prefix = TagPath(path.tree_id, path.segments[:depth])
                raise ResolutionError(
                    f"unknown tag segment {seg!r} under {prefix.canonical()!r}", loc
                )
        return path

    def iter_paths(self) -> list[TagPath]:
        """All valid paths, tree by tree in document order."""
        out: list[TagPath] = []
        for tree_id in self.trees:
            def walk(node: TagNode, prefix: tuple[str, ...]) -> None:
                out.append(TagPath(tree_id, prefix))
                for child in node.children:
                    walk(child, prefix + (child.label,))

            walk(self.trees[tree_id].root, ())
        return out


def resolve(registry: Registry, path_text: str) -> TagPath:
    """Parse canonical path text and check it against the registry."""
    text = path_text.strip()
    m = re.match(r"^([A-Za-z_][A-Za-z0-9_]*):((?:[A-Za-z0-9_]+)(?:/[A-Za-z0-9_]+)*)?$", text)
    if m is None:
        raise ParseError(f"malformed tag path {path_text!r}")
    segments = tuple(m.group(2).split("/")) if m.group(2) else ()
    return registry.resolve_path(TagPath(m.group(1), segments))


def subsumes(registry: Registry, general: TagPath, specific: TagPath) -> bool:
    """Ancestor-or-equal within one tree; paths in different trees are
    incomparable."""
    registry.resolve_path(general)
    registry.resolve_path(specific)
    if general.tree_id != specific.tree_id:
        return False
    k = len(general.segments)
    return specific.segments[:k] == general.segments


# --- registry document parsing ------------------------------------------

_TREE_LINE = re.compile(
    r"^tree\s+(?P<id>\S+)\s+scope=(?P<scope>\S+)(?:\s+\"(?P<display>[^\"]*)\")?\s*$"
)
_NODE_LINE = re.compile(
    r"^(?P<indent> *)(?P<label>\S+)\s+\"(?P<display>[^\"]*)\"(?:\s*#\s*(?P<annot>.*\S))?\s*$"
)


def _check_label(label: str, what: str, loc: SourceLoc) -> None:
    if not LABEL_RE.match(label):
        raise ValidationError(f"{what} {label!r} must match [a-z][a-z0-9_]*", loc)


def parse_registry(source: str) -> Registry:
    """Parse a registry document; empty input yields an empty registry."""
    trees: dict[str, TagTree] = {}
    lines = source.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i]
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            i += 1
            continue
        loc = SourceLoc(i + 1, 1)
        m = _TREE_LINE.match(stripped)
        if m is None:
            raise ParseError(f"expected 'tree <id> scope=<scope>' line, got {stripped!r}", loc)
        tree_id = m.group("id")
        _check_label(tree_id, "tree id", loc)
        if tree_id in trees:
            raise ValidationError(f"duplicate tree id {tree_id!r}", loc)
        try:
            scope = Scope(m.group("scope"))
        except ValueError:
            raise ParseError(
                f"scope must be one of actor/static/condition, got {m.group('scope')!r}", loc
            ) from None
        display = m.group("display") or tree_id
        i += 1

        # (node, depth) stack; children collected bottom-up on dedent
        stack: list[tuple[str, str, str | None, SourceLoc, list[TagNode]]] = [
            (tree_id, display, None, loc, [])
        ]
        depths = [0]

        def close_to(depth: int) -> None:
            while len(depths) > depth:
                label, disp, annot, nloc, kids = stack.pop()
                depths.pop()
                node = TagNode(label, disp, tuple(kids), annot)
                stack[-1][4].append(node)

        while i < len(lines):
            raw = lines[i]
            if not raw.strip():
                break  # blank line closes the tree
            if raw.strip().startswith("#"):
                i += 1
                continue
            nm = _NODE_LINE.match(raw)
            nloc = SourceLoc(i + 1, 1)
            if nm is None:
                if not raw.startswith(" "):
                    break  # next 'tree' header without blank separator
                raise ParseError(f"malformed node line {raw.strip()!r}", nloc)
            if not raw.startswith(" "):
                break
            indent = len(nm.group("indent"))
            if indent % 2 != 0:
                raise ParseError("indentation must be 2 spaces per level", nloc)
            depth = indent // 2
            if depth > len(depths):
                raise ParseError("node skips an indentation level", nloc)
            if depth > MAX_DEPTH:
                raise ValidationError(
                    f"tree {tree_id!r} exceeds maximum depth {MAX_DEPTH}", nloc
                )
            label = nm.group("label")
            _check_label(label, "tag label", nloc)
            if not nm.group("display"):
                raise ValidationError(f"empty display name for {label!r}", nloc)
            close_to(depth)
            if any(k.label == label for k in stack[-1][4]):
                parent = stack[-1][0]
                raise ValidationError(
                    f"duplicate sibling label {label!r} under {parent!r} in tree {tree_id!r}",
                    nloc,
                )
            stack.append((label, nm.group("display"), nm.group("annot"), nloc, []))
            depths.append(depth)
            i += 1

        close_to(1)
        label, disp, annot, _, kids = stack.pop()
        trees[tree_id] = TagTree(tree_id, scope, TagNode(label, disp, tuple(kids), annot))
    return Registry(trees)


def serialize_registry(registry: Registry) -> str:
    """Inverse of parse_registry, in document order."""
    chunks: list[str] = []
    for tree in registry.trees.values():
        head = f"tree {tree.tree_id} scope={tree.scope.value}"
        if tree.root.display_name != tree.tree_id:
            head += f' "{tree.root.display_name}"'
        lines = [head]

        def emit(node: TagNode, depth: int) -> None:
            line = f"{'  ' * depth}{node.label} \"{node.display_name}\""
            if node.annotation:
                line += f"  # {node.annotation}"
            lines.append(line)
            for child in node.children:
                emit(child, depth + 1)

        for child in tree.root.children:
            emit(child, 1)
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def load_registry(source: str | None = None) -> Registry:
    """Parse `source`, or return the built-in registry when None."""
    if source is None:
        return builtin_registry()
    return parse_registry(source)


@functools.lru_cache(maxsize=1)
def builtin_registry() -> Registry:
    text = builtin_registry_document()
    return parse_registry(text)


def builtin_registry_document() -> str:
    return (
        importlib.resources.files("scentag").joinpath("data/builtin_registry.txt").read_text("utf-8")
    )


def export_dot(registry: Registry, tree_id: str) -> str:
    """Render one tree as a DOT digraph, nodes in document order."""
    tree = registry.trees.get(tree_id)
    if tree is None:
        raise ResolutionError(f"unknown tag tree {tree_id!r}")
    lines = [f"digraph {tree_id} {{"]
    edges: list[str] = []
    counter = 0

    def walk(node: TagNode) -> int:
        nonlocal counter
        ident = counter
        counter += 1
        label = node.display_name.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  n{ident} [label="{label}"];')
        for child in node.children:
            edges.append(f"  n{ident} -> n{walk(child)};")
        return ident

    walk(tree.root)
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"
