"""Decides whether a category comprises a scenario, with an explicit witness.

The decision follows the three composition styles:

* ungrouped environment requirements check against the record's static
  and condition tag sets;
* ungrouped actor requirements are existential over actors,
  independently per requirement;
* each group binds to one actor (injectively, ego group to the ego
  actor) whose all-time tags satisfy the group's requirements;
* sequence snapshots must hold at strictly increasing steps under that
  binding.

Bindings are searched by backtracking in sorted order (groups by id,
candidate actors by id) and snapshot steps greedily earliest-first, so
identical inputs always produce the identical witness. Greedy step
assignment is complete for a fixed binding: a snapshot satisfiable at
some step past the previous one is satisfiable at the earliest such
step, since actor states are piecewise constant between phase starts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .category import STATIC_TARGET, Requirement, ScenarioCategory, Snapshot
from .scenario import ActorRecord, ScenarioRecord, tags_active_at
from .taxonomy import Registry, Scope, TagPath

STATIC_SOURCE = "static"
CONDITION_SOURCE = "condition"


@dataclass(frozen=True)
class WitnessEntry:
    """How one requirement occurrence was discharged.

    `context` names the occurrence: "ungrouped", "group <id>", or
    "snapshot <i> <target>". `source` is an actor id, "static", or
    "condition"; `matched` is the scenario tag that satisfied it.
    """

    context: str
    requirement: TagPath
    source: str
    matched: TagPath


@dataclass(frozen=True)
class MatchWitness:
    binding: tuple[tuple[str, str], ...]  # (group_id, actor_id), sorted by group
    snapshot_steps: tuple[int, ...]
    satisfied_by: tuple[WitnessEntry, ...]

    def binding_map(self) -> dict[str, str]:
        return dict(self.binding)


def requirement_satisfied(
    registry: Registry, req: Requirement, available: frozenset[TagPath] | set[TagPath]
) -> TagPath | None:
    """Lexicographically smallest available tag subsumed by the requirement."""
    k = len(req.tag.segments)
    best = None
    for tag in available:
        if tag.tree_id != req.tag.tree_id:
            continue
        if tag.segments[:k] != req.tag.segments:
            continue
        if best is None or tag.canonical() < best.canonical():
            best = tag
    return best


def _satisfy_env(
    registry: Registry, req: Requirement, record: ScenarioRecord
) -> tuple[str, TagPath] | None:
    if registry.scope_of(req.tag) is Scope.STATIC:
        tag = requirement_satisfied(registry, req, record.static_tags)
        return (STATIC_SOURCE, tag) if tag is not None else None
    tag = requirement_satisfied(registry, req, record.condition_tags)
    return (CONDITION_SOURCE, tag) if tag is not None else None


def comprises(
    registry: Registry, category: ScenarioCategory, scenario: ScenarioRecord
) -> MatchWitness | None:
    """Witness iff the category comprises the scenario, else None."""
    entries: list[WitnessEntry] = []

    # ungrouped requirements, environment and actor scope
    ungrouped = sorted(category.ungrouped, key=lambda r: r.tag.canonical())
    actors = list(scenario.actors)  # already sorted by id
    all_time = {a.actor_id: a.all_tags() for a in actors}
    for req in ungrouped:
        if registry.scope_of(req.tag) is Scope.ACTOR:
            for actor in actors:
                tag = requirement_satisfied(registry, req, all_time[actor.actor_id])
                if tag is not None:
                    entries.append(WitnessEntry("ungrouped", req.tag, actor.actor_id, tag))
                    break
            else:
                return None
        else:
            hit = _satisfy_env(registry, req, scenario)
            if hit is None:
                return None
            entries.append(WitnessEntry("ungrouped", req.tag, hit[0], hit[1]))

    # per-group candidate actors (feasibility pruning before the search)
    candidates: list[list[ActorRecord]] = []
    for group in category.groups:
        if group.is_ego:
            ego = scenario.ego_actor()
            pool = [ego] if ego is not None else []
        else:
            pool = actors
        feasible = [
            a
            for a in pool
            if all(
                requirement_satisfied(registry, req, all_time[a.actor_id]) is not None
                for req in group.requirements
            )
        ]
        if not feasible:
            return None
        candidates.append(feasible)

    chosen: dict[str, str] = {}
    taken: set[str] = set()

    def assign(idx: int) -> tuple[int, ...] | None:
        if idx == len(category.groups):
            return _assign_steps(registry, category.sequence, chosen, scenario)
        group = category.groups[idx]
        for actor in candidates[idx]:
            if actor.actor_id in taken:
                continue
            chosen[group.group_id] = actor.actor_id
            taken.add(actor.actor_id)
            steps = assign(idx + 1)
            if steps is not None:
                return steps
            taken.discard(actor.actor_id)
            del chosen[group.group_id]
        return None

    steps = assign(0)
    if steps is None:
        return None

    # group requirement entries under the final binding
    for group in category.groups:
        actor_id = chosen[group.group_id]
        for req in sorted(group.requirements, key=lambda r: r.tag.canonical()):
            tag = requirement_satisfied(registry, req, all_time[actor_id])
            assert tag is not None
            entries.append(WitnessEntry(f"group {group.group_id}", req.tag, actor_id, tag))

    # snapshot entries at the assigned steps
    for i, (snap, step) in enumerate(zip(category.sequence, steps), start=1):
        for target, req in sorted(
            snap.entries, key=lambda e: (e[0], e[1].tag.canonical())
        ):
            if target == STATIC_TARGET:
                hit = _satisfy_env(registry, req, scenario)
                assert hit is not None
                entries.append(
                    WitnessEntry(f"snapshot {i} static", req.tag, hit[0], hit[1])
                )
            else:
                actor = scenario.actor(chosen[target])
                tag = requirement_satisfied(registry, req, tags_active_at(actor, step))
                assert tag is not None
                entries.append(
                    WitnessEntry(f"snapshot {i} {target}", req.tag, actor.actor_id, tag)
                )

    binding = tuple(sorted(chosen.items()))
    return MatchWitness(binding, steps, tuple(entries))


def _snapshot_holds(
    registry: Registry,
    snap: Snapshot,
    step: int,
    binding: dict[str, str],
    scenario: ScenarioRecord,
) -> bool:
    for target, req in snap.entries:
        if target == STATIC_TARGET:
            if _satisfy_env(registry, req, scenario) is None:
                return False
        else:
            actor = scenario.actor(binding[target])
            if requirement_satisfied(registry, req, tags_active_at(actor, step)) is None:
                return False
    return True


def _assign_steps(
    registry: Registry,
    sequence: tuple[Snapshot, ...],
    binding: dict[str, str],
    scenario: ScenarioRecord,
) -> tuple[int, ...] | None:
    """Earliest strictly increasing steps satisfying each snapshot."""
    if not sequence:
        return ()
    breakpoints = sorted(
        {ph.start_step for actor in scenario.actors for ph in actor.phases}
    )
    steps: list[int] = []
    prev = -1
    for snap in sequence:
        cands = [prev + 1] + [b for b in breakpoints if b > prev + 1]
        for t in cands:
            if _snapshot_holds(registry, snap, t, binding, scenario):
                steps.append(t)
                prev = t
                break
        else:
            return None
    return tuple(steps)


def comprising_categories(
    registry: Registry,
    categories: list[ScenarioCategory],
    scenario: ScenarioRecord,
) -> list[tuple[str, MatchWitness]]:
    """All comprising categories, in input order (membership is not exclusive)."""
    out = []
    for category in categories:
        witness = comprises(registry, category, scenario)
        if witness is not None:
            out.append((category.name, witness))
    return out


def verify_witness(
    registry: Registry,
    category: ScenarioCategory,
    scenario: ScenarioRecord,
    witness: MatchWitness,
) -> bool:
    """Re-evaluate a witness without searching; True iff it proves the match."""
    binding = witness.binding_map()
    actor_ids = {a.actor_id for a in scenario.actors}
    if set(binding) != {g.group_id for g in category.groups}:
        return False
    if len(set(binding.values())) != len(binding):
        return False  # not injective
    for group in category.groups:
        actor_id = binding[group.group_id]
        if actor_id not in actor_ids:
            return False
        if group.is_ego and not scenario.actor(actor_id).is_ego:
            return False
    steps = witness.snapshot_steps
    if len(steps) != len(category.sequence):
        return False
    if any(b <= a for a, b in zip(steps, steps[1:])):
        return False

    by_context: dict[tuple[str, TagPath], WitnessEntry] = {
        (e.context, e.requirement): e for e in witness.satisfied_by
    }
    consumed: set[tuple[str, TagPath]] = set()

    def entry_ok(context: str, req: Requirement, available: frozenset[TagPath], source: str) -> bool:
        entry = by_context.get((context, req.tag))
        if entry is None or entry.source != source:
            return False
        consumed.add((context, req.tag))
        if entry.matched not in available:
            return False
        k = len(req.tag.segments)
        return (
            entry.matched.tree_id == req.tag.tree_id
            and entry.matched.segments[:k] == req.tag.segments
        )

    def env_ok(context: str, req: Requirement) -> bool:
        if registry.scope_of(req.tag) is Scope.STATIC:
            return entry_ok(context, req, scenario.static_tags, STATIC_SOURCE)
        return entry_ok(context, req, scenario.condition_tags, CONDITION_SOURCE)

    for req in category.ungrouped:
        if registry.scope_of(req.tag) is Scope.ACTOR:
            entry = by_context.get(("ungrouped", req.tag))
            if entry is None or entry.source not in actor_ids:
                return False
            if not entry_ok(
                "ungrouped", req, scenario.actor(entry.source).all_tags(), entry.source
            ):
                return False
        elif not env_ok("ungrouped", req):
            return False
    for group in category.groups:
        actor = scenario.actor(binding[group.group_id])
        for req in group.requirements:
            if not entry_ok(
                f"group {group.group_id}", req, actor.all_tags(), actor.actor_id
            ):
                return False
    for i, (snap, step) in enumerate(zip(category.sequence, steps), start=1):
        for target, req in snap.entries:
            if target == STATIC_TARGET:
                if not env_ok(f"snapshot {i} static", req):
                    return False
            else:
                actor = scenario.actor(binding[target])
                if not entry_ok(
                    f"snapshot {i} {target}",
                    req,
                    tags_active_at(actor, step),
                    actor.actor_id,
                ):
                    return False
    # no stray entries: everything claimed must belong to some occurrence
    return consumed == set(by_context)


# --- rendering -------------------------------------------------------------


def render_witness(witness: MatchWitness) -> str:
    """Deterministic text report, used verbatim by the CLI."""
    lines = ["MATCH"]
    if witness.binding:
        lines.append("binding:")
        lines.extend(f"  {g} -> {a}" for g, a in witness.binding)
    if witness.snapshot_steps:
        lines.append("snapshot steps: " + ", ".join(str(s) for s in witness.snapshot_steps))
    if witness.satisfied_by:
        lines.append("requirements:")
        lines.extend(
            f"  [{e.context}] {e.requirement.canonical()} <- "
            f"{e.matched.canonical()} ({e.source})"
            for e in witness.satisfied_by
        )
    return "\n".join(lines) + "\n"


def witness_line(witness: MatchWitness) -> str:
    """Single-line machine form, escaped like the scenario store encoding."""
    from .scenario import escape_line

    return escape_line(render_witness(witness))
