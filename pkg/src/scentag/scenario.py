"""Qualitative scenario records: the tagged projection of a concrete scenario.

A record lists actors with persistent tags and a timeline of phases,
plus static-environment and condition tags. Time is a bare integer step
counter - ordered matching needs only the order of state changes, not
durations. A phase's tags hold from its start step until the actor's
next phase; the last phase holds forever.

Document form::

    scenario "cutin_merge" {
      actor ego {
        tags { actor_type:vehicle/category_m }
        phase 0 { longitudinal_activity:driving_forward/cruising }
      }
      actor v1 {
        phase 0 { lateral_activity:changing_lane lead_vehicle:no_leader }
        phase 1 { lead_vehicle:leader }
      }
      static { road_layout:straight }
      conditions { weather:clear }
    }

An actor named `ego`, or any actor carrying the `ego` marker after its
id, is the ego vehicle. The single-line form used by the scenario store
is the same text with backslashes and newlines escaped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError, SourceLoc, ValidationError
from .lexer import TokenStream
from .taxonomy import LABEL_RE, Registry, Scope, TagPath

MAX_STEP = 10**6

EGO_ACTOR_ID = "ego"


@dataclass(frozen=True)
class Phase:
    start_step: int
    tags: frozenset[TagPath]


@dataclass(frozen=True)
class ActorRecord:
    actor_id: str
    is_ego: bool
    persistent_tags: frozenset[TagPath]
    phases: tuple[Phase, ...]
    loc: SourceLoc | None = field(default=None, compare=False)

    def all_tags(self) -> frozenset[TagPath]:
        """Union of persistent tags and every phase's tags."""
        tags = set(self.persistent_tags)
        for phase in self.phases:
            tags |= phase.tags
        return frozenset(tags)


@dataclass(frozen=True)
class ScenarioRecord:
    scenario_id: str
    actors: tuple[ActorRecord, ...] = ()
    static_tags: frozenset[TagPath] = frozenset()
    condition_tags: frozenset[TagPath] = frozenset()
    source: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "actors", tuple(sorted(self.actors, key=lambda a: a.actor_id))
        )
        object.__setattr__(self, "static_tags", frozenset(self.static_tags))
        object.__setattr__(self, "condition_tags", frozenset(self.condition_tags))

    def ego_actor(self) -> ActorRecord | None:
        for actor in self.actors:
            if actor.is_ego:
                return actor
        return None

    def actor(self, actor_id: str) -> ActorRecord:
        for a in self.actors:
            if a.actor_id == actor_id:
                return a
        raise KeyError(actor_id)

    def all_tags(self) -> frozenset[TagPath]:
        tags = set(self.static_tags) | set(self.condition_tags)
        for actor in self.actors:
            tags |= actor.all_tags()
        return frozenset(tags)


def tags_active_at(actor: ActorRecord, step: int) -> frozenset[TagPath]:
    """Persistent tags plus the tags of the phase covering `step`.

    Before the first phase only the persistent tags apply; after the last
    phase the final phase's tags are held.
    """
    active = None
    for phase in actor.phases:
        if phase.start_step <= step:
            active = phase
        else:
            break
    if active is None:
        return actor.persistent_tags
    return actor.persistent_tags | active.tags


# --- parsing --------------------------------------------------------------


def parse_scenario(registry: Registry, source: str) -> ScenarioRecord:
    """Parse exactly one scenario document."""
    ts = TokenStream(source)
    record = _parse_record(registry, ts)
    if not ts.at_end():
        raise ParseError("trailing input after scenario", ts.peek().loc)
    return record


def _parse_tag_set(
    registry: Registry, ts: TokenStream, allowed: set[Scope], where: str
) -> set[TagPath]:
    ts.expect_punct("{")
    tags: set[TagPath] = set()
    while ts.peek().kind == "path":
        tok = ts.expect_path()
        path = registry.resolve_path(TagPath(tok.tree_id, tok.segments), tok.loc)
        scope = registry.scope_of(path)
        if scope not in allowed:
            raise ValidationError(
                f"{scope.value}-scoped tag {path.canonical()!r} not allowed in {where}",
                tok.loc,
            )
        tags.add(path)
    ts.expect_punct("}")
    return tags


def _check_identifier(text: str, what: str, loc: SourceLoc) -> None:
    if not LABEL_RE.match(text):
        raise ValidationError(f"{what} {text!r} must match [a-z][a-z0-9_]*", loc)


def _parse_record(registry: Registry, ts: TokenStream) -> ScenarioRecord:
    ts.expect_ident("scenario")
    id_tok = ts.expect_string()
    _check_identifier(id_tok.text, "scenario id", id_tok.loc)
    ts.expect_punct("{")

    actors: list[ActorRecord] = []
    static_tags: set[TagPath] = set()
    condition_tags: set[TagPath] = set()
    source_note: str | None = None
    seen: set[str] = set()

    while not ts.accept_punct("}"):
        tok = ts.peek()
        if tok.kind != "ident":
            raise ParseError("expected 'actor', 'static', 'conditions', or 'source'", tok.loc)
        if tok.text == "actor":
            ts.next()
            actors.append(_parse_actor(registry, ts))
        elif tok.text == "static":
            ts.next()
            _once(seen, "static", tok.loc)
            static_tags = _parse_tag_set(registry, ts, {Scope.STATIC}, "a static block")
        elif tok.text == "conditions":
            ts.next()
            _once(seen, "conditions", tok.loc)
            condition_tags = _parse_tag_set(
                registry, ts, {Scope.CONDITION}, "a conditions block"
            )
        elif tok.text == "source":
            ts.next()
            _once(seen, "source", tok.loc)
            source_note = ts.expect_string().text
        else:
            raise ParseError(f"unknown clause {tok.text!r}", tok.loc)

    ids = [a.actor_id for a in actors]
    for aid in ids:
        if ids.count(aid) > 1:
            raise ValidationError(f"duplicate actor id {aid!r}")
    egos = [a for a in actors if a.is_ego]
    if len(egos) > 1:
        raise ValidationError(
            f"scenario has {len(egos)} ego actors ({', '.join(a.actor_id for a in egos)})"
        )
    return ScenarioRecord(
        id_tok.text, tuple(actors), frozenset(static_tags), frozenset(condition_tags),
        source_note,
    )


def _once(seen: set[str], block: str, loc: SourceLoc) -> None:
    if block in seen:
        raise ParseError(f"duplicate {block!r} block", loc)
    seen.add(block)


def _parse_actor(registry: Registry, ts: TokenStream) -> ActorRecord:
    id_tok = ts.expect_ident()
    _check_identifier(id_tok.text, "actor id", id_tok.loc)
    is_ego = ts.accept_ident("ego") or id_tok.text == EGO_ACTOR_ID
    ts.expect_punct("{")
    persistent: set[TagPath] = set()
    phases: list[Phase] = []
    seen_tags = False
    while not ts.accept_punct("}"):
        tok = ts.peek()
        if tok.kind == "ident" and tok.text == "tags":
            ts.next()
            if seen_tags:
                raise ParseError("duplicate 'tags' block", tok.loc)
            seen_tags = True
            persistent = _parse_tag_set(
                registry, ts, {Scope.ACTOR}, f"actor {id_tok.text!r}"
            )
        elif tok.kind == "ident" and tok.text == "phase":
            ts.next()
            step_tok = ts.expect_int()
            step = int(step_tok.text)
            if step >= MAX_STEP:
                raise ValidationError(f"step {step} out of range [0, {MAX_STEP})", step_tok.loc)
            if phases and phases[-1].start_step >= step:
                raise ValidationError(
                    f"phase at step {step} does not increase on previous step "
                    f"{phases[-1].start_step}",
                    step_tok.loc,
                )
            tags = _parse_tag_set(
                registry, ts, {Scope.ACTOR}, f"phase {step} of actor {id_tok.text!r}"
            )
            if not tags:
                raise ValidationError(f"phase {step} has no tags", step_tok.loc)
            phases.append(Phase(step, frozenset(tags)))
        else:
            raise ParseError("expected 'tags' or 'phase' in actor body", tok.loc)
    if not phases:
        raise ValidationError(f"actor {id_tok.text!r} has no phases", id_tok.loc)
    return ActorRecord(id_tok.text, is_ego, frozenset(persistent), tuple(phases), id_tok.loc)


def validate_scenario(registry: Registry, record: ScenarioRecord) -> None:
    """Invariant checks for records built in code rather than parsed."""
    _check_identifier(record.scenario_id, "scenario id", SourceLoc(1, 1))
    if sum(1 for a in record.actors if a.is_ego) > 1:
        raise ValidationError("scenario has more than one ego actor")
    ids = [a.actor_id for a in record.actors]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate actor id")
    for actor in record.actors:
        if not actor.phases:
            raise ValidationError(f"actor {actor.actor_id!r} has no phases")
        prev = -1
        for phase in actor.phases:
            if not (prev < phase.start_step < MAX_STEP) or phase.start_step < 0:
                raise ValidationError(
                    f"bad phase step {phase.start_step} for actor {actor.actor_id!r}"
                )
            prev = phase.start_step
            if not phase.tags:
                raise ValidationError("phase has no tags")
            for tag in phase.tags:
                registry.resolve_path(tag)
                if registry.scope_of(tag) is not Scope.ACTOR:
                    raise ValidationError(f"non-actor tag {tag.canonical()!r} in a phase")
        for tag in actor.persistent_tags:
            registry.resolve_path(tag)
            if registry.scope_of(tag) is not Scope.ACTOR:
                raise ValidationError(f"non-actor tag {tag.canonical()!r} on an actor")
    for tag in record.static_tags:
        registry.resolve_path(tag)
        if registry.scope_of(tag) is not Scope.STATIC:
            raise ValidationError(f"{tag.canonical()!r} is not static-scoped")
    for tag in record.condition_tags:
        registry.resolve_path(tag)
        if registry.scope_of(tag) is not Scope.CONDITION:
            raise ValidationError(f"{tag.canonical()!r} is not condition-scoped")


# --- serialization --------------------------------------------------------


def serialize_scenario(record: ScenarioRecord) -> str:
    """Canonical text form: actors by id, tag sets sorted, phases in order."""
    lines = [f'scenario "{record.scenario_id}" {{']
    for actor in record.actors:
        marker = " ego" if actor.is_ego and actor.actor_id != EGO_ACTOR_ID else ""
        lines.append(f"  actor {actor.actor_id}{marker} {{")
        if actor.persistent_tags:
            lines.append(f"    tags {{ {_tagline(actor.persistent_tags)} }}")
        for phase in actor.phases:
            lines.append(f"    phase {phase.start_step} {{ {_tagline(phase.tags)} }}")
        lines.append("  }")
    if record.static_tags:
        lines.append(f"  static {{ {_tagline(record.static_tags)} }}")
    if record.condition_tags:
        lines.append(f"  conditions {{ {_tagline(record.condition_tags)} }}")
    if record.source is not None:
        escaped = (
            record.source.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        )
        lines.append(f'  source "{escaped}"')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _tagline(tags: frozenset[TagPath]) -> str:
    return " ".join(sorted(t.canonical() for t in tags))


# --- single-line form (scenario store encoding) ---------------------------


def to_line(record: ScenarioRecord) -> str:
    return escape_line(serialize_scenario(record))


def from_line(registry: Registry, line: str) -> ScenarioRecord:
    return parse_scenario(registry, unescape_line(line))


def escape_line(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n")


_UNESCAPE_RE = re.compile(r"\\(.)")


def unescape_line(line: str) -> str:
    def sub(m: re.Match[str]) -> str:
        c = m.group(1)
        if c == "n":
            return "\n"
        if c == "\\":
            return "\\"
        raise ParseError(f"bad escape \\{c} in single-line form")

    return _UNESCAPE_RE.sub(sub, line)
