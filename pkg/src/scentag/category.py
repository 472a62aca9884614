"""Scenario categories: the qualitative descriptions that comprise scenarios.

A category is written in a small block language supporting the three
composition styles: a flat tag list, per-actor groups, and an ordered
snapshot sequence::

    category "cut-in at merging lanes" {
      actor ego { longitudinal_activity:driving_forward }
      actor other {
        actor_type:vehicle
        lateral_activity:changing_lane
      }
      sequence {
        step { other: lead_vehicle:no_leader }
        step { other: lead_vehicle:leader }
      }
    }

Flat-style requirements (in a `tags { ... }` block) are existential over
actors independently; grouping is the mechanism that forces tags onto the
same actor; the sequence constrains the order in which states hold.

Parsed values are immutable and canonically ordered, so structurally
equal categories compare equal regardless of source formatting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, SourceLoc, ValidationError
from .lexer import TokenStream
from .taxonomy import Registry, Scope, TagPath, subsumes

EGO_GROUP_ID = "ego"
STATIC_TARGET = "static"  # pseudo-target for snapshot entries on the environment

_RESERVED_GROUP_IDS = {STATIC_TARGET, "tags", "sequence", "step", "actor", "category"}


@dataclass(frozen=True)
class Requirement:
    """One qualitative predicate: "a tag subsumed by `tag` applies"."""

    tag: TagPath
    loc: SourceLoc | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.tag.canonical()


@dataclass(frozen=True)
class ActorGroup:
    group_id: str
    is_ego: bool
    requirements: frozenset[Requirement]
    loc: SourceLoc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Snapshot:
    """One step of an ordered sequence: entries that must hold together.

    Entries pair a target (a declared group id, or `static` for
    environment tags) with a requirement.
    """

    entries: frozenset[tuple[str, Requirement]]
    loc: SourceLoc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ScenarioCategory:
    name: str
    ungrouped: frozenset[Requirement] = frozenset()
    groups: tuple[ActorGroup, ...] = ()
    sequence: tuple[Snapshot, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ungrouped", frozenset(self.ungrouped))
        object.__setattr__(
            self, "groups", tuple(sorted(self.groups, key=lambda g: g.group_id))
        )
        object.__setattr__(self, "sequence", tuple(self.sequence))

    @property
    def is_universal(self) -> bool:
        return not self.ungrouped and not self.groups and not self.sequence

    def group(self, group_id: str) -> ActorGroup:
        for g in self.groups:
            if g.group_id == group_id:
                return g
        raise KeyError(group_id)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" (lint never errors)
    code: str
    message: str
    loc: SourceLoc | None = None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        return f"{where}{self.severity}: {self.message} [{self.code}]"


# --- parsing --------------------------------------------------------------


def parse_category(registry: Registry, source: str) -> list[ScenarioCategory]:
    """Parse every category in the document; empty input yields []."""
    ts = TokenStream(source)
    categories: list[ScenarioCategory] = []
    names: set[str] = set()
    while not ts.at_end():
        cat = _parse_one(registry, ts)
        if cat.name in names:
            raise ValidationError(f"duplicate category name {cat.name!r}")
        names.add(cat.name)
        categories.append(cat)
    return categories


def _require_scope(
    registry: Registry, path: TagPath, allowed: set[Scope], where: str, loc: SourceLoc
) -> None:
    scope = registry.scope_of(path)
    if scope not in allowed:
        raise ValidationError(
            f"{scope.value}-scoped tag {path.canonical()!r} not allowed in {where}", loc
        )


def _parse_paths(registry: Registry, ts: TokenStream) -> list[Requirement]:
    """Requirements up to the closing brace (brace not consumed)."""
    out = []
    while ts.peek().kind == "path":
        tok = ts.expect_path()
        path = registry.resolve_path(TagPath(tok.tree_id, tok.segments), tok.loc)
        out.append(Requirement(path, tok.loc))
    return out


def _parse_one(registry: Registry, ts: TokenStream) -> ScenarioCategory:
    ts.expect_ident("category")
    name = ts.expect_string().text
    if not name:
        raise ValidationError("category name must be nonempty", ts.peek().loc)
    ts.expect_punct("{")

    ungrouped: list[Requirement] = []
    groups: list[ActorGroup] = []
    sequence: list[Snapshot] = []
    seen_blocks: set[str] = set()

    while not ts.accept_punct("}"):
        tok = ts.peek()
        if tok.kind != "ident":
            raise ParseError(
                "expected 'tags', 'actor', 'static', or 'sequence' block", tok.loc
            )
        if tok.text == "tags":
            ts.next()
            _once(seen_blocks, "tags", tok.loc)
            ts.expect_punct("{")
            ungrouped.extend(_parse_paths(registry, ts))
            ts.expect_punct("}")
        elif tok.text == "static":
            ts.next()
            _once(seen_blocks, "static", tok.loc)
            ts.expect_punct("{")
            for req in _parse_paths(registry, ts):
                _require_scope(
                    registry,
                    req.tag,
                    {Scope.STATIC, Scope.CONDITION},
                    "a static block",
                    req.loc or tok.loc,
                )
                ungrouped.append(req)
            ts.expect_punct("}")
        elif tok.text == "actor":
            ts.next()
            gid_tok = ts.expect_ident()
            gid = gid_tok.text
            if gid in _RESERVED_GROUP_IDS:
                raise ValidationError(f"group id {gid!r} is reserved", gid_tok.loc)
            if gid in registry.trees:
                raise ValidationError(
                    f"group id {gid!r} collides with a tag tree id", gid_tok.loc
                )
            if any(g.group_id == gid for g in groups):
                raise ValidationError(f"duplicate group id {gid!r}", gid_tok.loc)
            ts.expect_punct("{")
            reqs = _parse_paths(registry, ts)
            for req in reqs:
                _require_scope(
                    registry, req.tag, {Scope.ACTOR}, f"actor group {gid!r}",
                    req.loc or gid_tok.loc,
                )
            ts.expect_punct("}")
            groups.append(
                ActorGroup(gid, gid == EGO_GROUP_ID, frozenset(reqs), gid_tok.loc)
            )
        elif tok.text == "sequence":
            ts.next()
            _once(seen_blocks, "sequence", tok.loc)
            ts.expect_punct("{")
            while not ts.accept_punct("}"):
                step_tok = ts.expect_ident("step")
                sequence.append(_parse_step(registry, ts, groups, step_tok.loc))
        else:
            raise ParseError(f"unknown block {tok.text!r}", tok.loc)

    category = ScenarioCategory(name, frozenset(ungrouped), tuple(groups), tuple(sequence))
    validate_category(registry, category)
    return category


def _once(seen: set[str], block: str, loc: SourceLoc) -> None:
    if block in seen:
        raise ParseError(f"duplicate {block!r} block", loc)
    seen.add(block)


def _parse_step(
    registry: Registry, ts: TokenStream, groups: list[ActorGroup], loc: SourceLoc
) -> Snapshot:
    ts.expect_punct("{")
    entries: list[tuple[str, Requirement]] = []
    target: str | None = None
    declared = {g.group_id for g in groups}
    while not ts.accept_punct("}"):
        if ts.accept_punct(";"):
            target = None
            continue
        tok = ts.expect_path()
        if not tok.segments and (tok.tree_id in declared or tok.tree_id == STATIC_TARGET):
            target = tok.tree_id
            continue
        if target is None:
            if not tok.segments and tok.tree_id not in registry.trees:
                raise ValidationError(
                    f"sequence references undeclared group {tok.tree_id!r}", tok.loc
                )
            raise ParseError(
                "snapshot entry must start with '<group_id>:' or 'static:'", tok.loc
            )
        path = registry.resolve_path(TagPath(tok.tree_id, tok.segments), tok.loc)
        if target == STATIC_TARGET:
            _require_scope(
                registry, path, {Scope.STATIC, Scope.CONDITION}, "a static entry", tok.loc
            )
        else:
            _require_scope(
                registry, path, {Scope.ACTOR}, f"snapshot entry for group {target!r}", tok.loc
            )
        entries.append((target, Requirement(path, tok.loc)))
    if not entries:
        raise ValidationError("snapshot has no entries", loc)
    return Snapshot(frozenset(entries), loc)


def validate_category(registry: Registry, category: ScenarioCategory) -> None:
    """Check the invariants the parser guarantees, for values built in code."""
    ego_count = sum(1 for g in category.groups if g.is_ego)
    if ego_count > 1:
        raise ValidationError(f"category {category.name!r} has {ego_count} ego groups")
    seen: set[str] = set()
    referenced = {t for snap in category.sequence for t, _ in snap.entries}
    for g in category.groups:
        if g.group_id in seen:
            raise ValidationError(f"duplicate group id {g.group_id!r}")
        seen.add(g.group_id)
        if g.group_id in _RESERVED_GROUP_IDS or g.group_id in registry.trees:
            raise ValidationError(f"group id {g.group_id!r} is reserved or collides "
                                  f"with a tag tree id")
        if g.is_ego != (g.group_id == EGO_GROUP_ID):
            raise ValidationError(f"ego flag on group {g.group_id!r} must follow its id")
        if not g.requirements and g.group_id not in referenced:
            raise ValidationError(
                f"group {g.group_id!r} has no requirements and is not in the sequence"
            )
        for req in g.requirements:
            registry.resolve_path(req.tag, req.loc)
            if registry.scope_of(req.tag) is not Scope.ACTOR:
                raise ValidationError(
                    f"non-actor tag {req.tag.canonical()!r} in group {g.group_id!r}", req.loc
                )
    for req in category.ungrouped:
        registry.resolve_path(req.tag, req.loc)
    for snap in category.sequence:
        if not snap.entries:
            raise ValidationError("snapshot has no entries")
        for target, req in snap.entries:
            registry.resolve_path(req.tag, req.loc)
            scope = registry.scope_of(req.tag)
            if target == STATIC_TARGET:
                if scope is Scope.ACTOR:
                    raise ValidationError(
                        f"actor tag {req.tag.canonical()!r} in a static snapshot entry",
                        req.loc,
                    )
            elif target not in seen:
                raise ValidationError(f"sequence references undeclared group {target!r}")
            elif scope is not Scope.ACTOR:
                raise ValidationError(
                    f"{scope.value} tag {req.tag.canonical()!r} in entry for group {target!r}",
                    req.loc,
                )


# --- serialization --------------------------------------------------------


def _sorted_paths(reqs: frozenset[Requirement]) -> list[str]:
    return sorted(r.tag.canonical() for r in reqs)


def serialize_category(category: ScenarioCategory, registry: Registry | None = None) -> str:
    """Canonical text: tags block, groups by id, static block, sequence.

    Without a registry the actor/static split of ungrouped requirements
    falls back to tree-scope lookup in the built-in registry.
    """
    from .taxonomy import builtin_registry

    reg = registry or builtin_registry()
    lines = [f'category "{_escape(category.name)}" {{']
    actor_reqs = [r for r in category.ungrouped if reg.scope_of(r.tag) is Scope.ACTOR]
    env_reqs = [r for r in category.ungrouped if reg.scope_of(r.tag) is not Scope.ACTOR]
    if actor_reqs:
        lines.append("  tags {")
        lines.extend(f"    {p}" for p in _sorted_paths(frozenset(actor_reqs)))
        lines.append("  }")
    for g in category.groups:
        lines.append(f"  actor {g.group_id} {{")
        lines.extend(f"    {p}" for p in _sorted_paths(g.requirements))
        lines.append("  }")
    if env_reqs:
        lines.append("  static {")
        lines.extend(f"    {p}" for p in _sorted_paths(frozenset(env_reqs)))
        lines.append("  }")
    if category.sequence:
        lines.append("  sequence {")
        for snap in category.sequence:
            lines.append(f"    step {{ {_render_step(snap)} }}")
        lines.append("  }")
    if len(lines) == 1:
        return lines[0][:-1] + "{}\n"
    lines.append("}")
    return "\n".join(lines) + "\n"


def _render_step(snap: Snapshot) -> str:
    by_target: dict[str, list[str]] = {}
    for target, req in snap.entries:
        by_target.setdefault(target, []).append(req.tag.canonical())
    order = sorted(by_target, key=lambda t: (t == STATIC_TARGET, t))
    sections = [f"{t}: {' '.join(sorted(by_target[t]))}" for t in order]
    return "; ".join(sections)


def serialize_library(categories: list[ScenarioCategory], registry: Registry | None = None) -> str:
    return "\n".join(serialize_category(c, registry) for c in categories)


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


# --- lint -----------------------------------------------------------------


def lint_category(registry: Registry, category: ScenarioCategory) -> list[Diagnostic]:
    """Style warnings; never fails. Parsed categories carry locations."""
    out: list[Diagnostic] = []

    def check_redundant(reqs: frozenset[Requirement], where: str) -> None:
        ordered = sorted(reqs, key=lambda r: r.tag.canonical())
        for general in ordered:
            for specific in ordered:
                if general is specific:
                    continue
                if subsumes(registry, general.tag, specific.tag):
                    out.append(
                        Diagnostic(
                            "warning",
                            "redundant-requirement",
                            f"{general.tag.canonical()!r} is implied by the more "
                            f"specific {specific.tag.canonical()!r} in {where}",
                            general.loc,
                        )
                    )

    by_scope: dict[Scope, list[Requirement]] = {}
    for req in category.ungrouped:
        by_scope.setdefault(registry.scope_of(req.tag), []).append(req)
    for scope, reqs in sorted(by_scope.items(), key=lambda kv: kv[0].value):
        check_redundant(frozenset(reqs), f"ungrouped {scope.value} requirements")
    referenced = {t for snap in category.sequence for t, _ in snap.entries}
    for g in category.groups:
        check_redundant(g.requirements, f"group {g.group_id!r}")
        if not g.requirements and g.group_id not in referenced:
            out.append(
                Diagnostic(
                    "warning",
                    "unconstrained-group",
                    f"group {g.group_id!r} is declared but never constrained",
                    g.loc,
                )
            )
    for prev, cur in zip(category.sequence, category.sequence[1:]):
        if prev.entries == cur.entries:
            out.append(
                Diagnostic(
                    "warning",
                    "no-state-change",
                    "snapshot repeats the previous snapshot's entries exactly",
                    cur.loc,
                )
            )
    return out
