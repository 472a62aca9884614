"""Exhaustive reference implementation of the comprise decision.

Transcribed directly from the definition: try every injective
group-to-actor binding (ego group to the ego actor) and every strictly
increasing snapshot step assignment over a finite step domain. Kept
deliberately independent of the matcher's search strategy.

The step domain {s + j : s in starts or 0, 0 <= j <= k} is sufficient:
actor states are piecewise constant between phase starts, so any
satisfying assignment can be shifted interval-by-interval onto
breakpoints plus small offsets without changing any evaluated state.
"""

from __future__ import annotations

import itertools

from scentag.category import ScenarioCategory, Snapshot
from scentag.scenario import ActorRecord, ScenarioRecord
from scentag.taxonomy import Registry, Scope, TagPath


def _subsumed(general: TagPath, tags: frozenset[TagPath]) -> bool:
    k = len(general.segments)
    return any(
        t.tree_id == general.tree_id and t.segments[:k] == general.segments
        for t in tags
    )


def _active(actor: ActorRecord, step: int) -> frozenset[TagPath]:
    tags = set(actor.persistent_tags)
    current = None
    for phase in actor.phases:
        if phase.start_step <= step:
            current = phase
    if current is not None:
        tags |= current.tags
    return frozenset(tags)


def _union(actor: ActorRecord) -> frozenset[TagPath]:
    tags = set(actor.persistent_tags)
    for phase in actor.phases:
        tags |= phase.tags
    return frozenset(tags)


def _snapshot_holds(
    registry: Registry,
    snap: Snapshot,
    step: int,
    binding: dict[str, ActorRecord],
    scenario: ScenarioRecord,
) -> bool:
    for target, req in snap.entries:
        if target == "static":
            pool = (
                scenario.static_tags
                if registry.scope_of(req.tag) is Scope.STATIC
                else scenario.condition_tags
            )
            if not _subsumed(req.tag, pool):
                return False
        elif not _subsumed(req.tag, _active(binding[target], step)):
            return False
    return True


def oracle_comprises(
    registry: Registry, category: ScenarioCategory, scenario: ScenarioRecord
) -> bool:
    for req in category.ungrouped:
        scope = registry.scope_of(req.tag)
        if scope is Scope.STATIC:
            if not _subsumed(req.tag, scenario.static_tags):
                return False
        elif scope is Scope.CONDITION:
            if not _subsumed(req.tag, scenario.condition_tags):
                return False
        else:
            if not any(_subsumed(req.tag, _union(a)) for a in scenario.actors):
                return False

    groups = list(category.groups)
    k = len(category.sequence)
    starts = {ph.start_step for a in scenario.actors for ph in a.phases}
    domain = sorted({s + j for s in starts | {0} for j in range(k + 1)})

    for combo in itertools.permutations(scenario.actors, len(groups)):
        binding = dict(zip((g.group_id for g in groups), combo))
        if any(g.is_ego and not binding[g.group_id].is_ego for g in groups):
            continue
        if not all(
            all(_subsumed(r.tag, _union(binding[g.group_id])) for r in g.requirements)
            for g in groups
        ):
            continue
        if not category.sequence:
            return True

        def search(idx: int, min_step_index: int) -> bool:
            if idx == k:
                return True
            for pos in range(min_step_index, len(domain)):
                if _snapshot_holds(
                    registry, category.sequence[idx], domain[pos], binding, scenario
                ):
                    if search(idx + 1, pos + 1):
                        return True
            return False

        if search(0, 0):
            return True
    return False
