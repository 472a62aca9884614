"""Category-to-category reasoning: inclusion, conjunction, satisfiability.

The includes relation ("the larger category comprises every scenario the
smaller one comprises") is decided two ways:

* `includes_syntactic` finds a requirement-by-requirement subsumption
  mapping. It is sound but not complete: it answers INCLUDES or UNKNOWN,
  never NOT_INCLUDES.
* `includes_semantic` enumerates every scenario record in a bounded
  universe and searches for a counterexample. Its answer is exact
  relative to the bounds, which are recorded in the verdict.

The bounded universe is the set of records built from per-scope tag
pools: up to `max_actors` actors (optionally one of them ego), each with
1..`max_phases` phases of nonempty tag subsets holding consecutive steps
0,1,..., plus arbitrary static and condition tag subsets. Persistent
tags are not enumerated separately: with phases starting at step 0 a
record with persistent tags matches exactly like one with those tags
unioned into every phase, and those records are already in the universe.
Non-ego actors are enumerated as unordered multisets since actor
identity does not affect matching. Enumeration order is fixed: actor
count ascending, records with an ego before those without at each count
(scenarios in this domain are ego-centric), tag subsets in bit order
over the sorted pool, so the first counterexample is reproducible.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator

from .category import (
    EGO_GROUP_ID,
    STATIC_TARGET,
    ActorGroup,
    Requirement,
    ScenarioCategory,
    Snapshot,
    validate_category,
)
from .errors import BoundsTooLargeError, ValidationError
from .matcher import comprises
from .scenario import ActorRecord, Phase, ScenarioRecord
from .taxonomy import Registry, Scope, TagPath, subsumes

MAX_UNIVERSE = 10**7
MAX_ACTOR_CONFIGS = 500_000
MAX_POOL = 16


class InclusionStatus(str, enum.Enum):
    INCLUDES = "INCLUDES"
    NOT_INCLUDES = "NOT_INCLUDES"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class MappingProof:
    """Syntactic proof: where each requirement of the larger category maps."""

    requirement_map: tuple[tuple[str, str], ...]
    group_map: tuple[tuple[str, str], ...]
    snapshot_map: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ExhaustionProof:
    """Semantic proof: no counterexample among the enumerated records."""

    records_checked: int
    comprised_checked: int


@dataclass(frozen=True)
class InclusionVerdict:
    status: InclusionStatus
    proof: MappingProof | ExhaustionProof | None = None
    counterexample: ScenarioRecord | None = None
    note: str = ""


@dataclass(frozen=True)
class UniverseBounds:
    max_actors: int
    max_phases: int
    actor_pool: tuple[TagPath, ...] = ()
    static_pool: tuple[TagPath, ...] = ()
    condition_pool: tuple[TagPath, ...] = ()
    exclusive_actor_states: bool = False

    def __post_init__(self) -> None:
        if self.max_actors < 1:
            raise ValidationError("max_actors must be >= 1")
        if self.max_phases < 1:
            raise ValidationError("max_phases must be >= 1")
        object.__setattr__(self, "actor_pool", _canon_pool(self.actor_pool))
        object.__setattr__(self, "static_pool", _canon_pool(self.static_pool))
        object.__setattr__(self, "condition_pool", _canon_pool(self.condition_pool))

    def describe(self) -> str:
        return (
            f"max_actors={self.max_actors} max_phases={self.max_phases} "
            f"pool={len(self.actor_pool)}a/{len(self.static_pool)}s/"
            f"{len(self.condition_pool)}c"
        )


def _canon_pool(pool: tuple[TagPath, ...]) -> tuple[TagPath, ...]:
    return tuple(sorted(set(pool)))


def bounds_from_categories(
    registry: Registry,
    categories: list[ScenarioCategory],
    max_actors: int = 2,
    max_phases: int = 2,
    exclusive_actor_states: bool = False,
) -> UniverseBounds:
    """Pools from every requirement tag of the given categories.

    Restricting the pools to the categories' own tags loses nothing: a
    scenario tag satisfies a requirement exactly when some requirement
    tag it is subsumed by would.
    """
    pools: dict[Scope, set[TagPath]] = {s: set() for s in Scope}
    for category in categories:
        reqs = list(category.ungrouped)
        for g in category.groups:
            reqs.extend(g.requirements)
        for snap in category.sequence:
            reqs.extend(req for _, req in snap.entries)
        for req in reqs:
            pools[registry.scope_of(req.tag)].add(req.tag)
    return UniverseBounds(
        max_actors,
        max_phases,
        tuple(pools[Scope.ACTOR]),
        tuple(pools[Scope.STATIC]),
        tuple(pools[Scope.CONDITION]),
        exclusive_actor_states,
    )


# --- bounded universe -------------------------------------------------------


def _subsets(pool: tuple[TagPath, ...]) -> list[tuple[TagPath, ...]]:
    """All subsets in bit order over the sorted pool (empty set first)."""
    out = []
    for mask in range(1 << len(pool)):
        out.append(tuple(pool[i] for i in range(len(pool)) if mask >> i & 1))
    return out


def _conflict_free(tags: tuple[TagPath, ...]) -> bool:
    for a, b in itertools.combinations(tags, 2):
        if a.tree_id != b.tree_id:
            continue
        k = min(len(a.segments), len(b.segments))
        if a.segments[:k] != b.segments[:k]:
            return False
    return True


def _actor_configs(bounds: UniverseBounds) -> list[tuple[tuple[TagPath, ...], ...]]:
    """Phase-tag tuples in canonical order (phase count, then bit order)."""
    nonempty = [s for s in _subsets(bounds.actor_pool) if s]
    if bounds.exclusive_actor_states:
        nonempty = [s for s in nonempty if _conflict_free(s)]
    configs = []
    for p in range(1, bounds.max_phases + 1):
        configs.extend(itertools.product(nonempty, repeat=p))
    return configs


def _cwr_count(options: int, k: int) -> int:
    if k == 0:
        return 1
    if options == 0:
        return 0
    return math.comb(options + k - 1, k)


def universe_size(bounds: UniverseBounds) -> int:
    """Exact number of records the enumeration will yield."""
    for pool in (bounds.actor_pool, bounds.static_pool, bounds.condition_pool):
        if len(pool) > MAX_POOL:
            raise BoundsTooLargeError(
                f"tag pool of {len(pool)} exceeds the {MAX_POOL}-tag limit"
            )
    if bounds.exclusive_actor_states:
        m = sum(1 for s in _subsets(bounds.actor_pool) if s and _conflict_free(s))
    else:
        m = (1 << len(bounds.actor_pool)) - 1
    c = sum(m**p for p in range(1, bounds.max_phases + 1))
    env = (1 << len(bounds.static_pool)) * (1 << len(bounds.condition_pool))
    total = 0
    for n in range(0, bounds.max_actors + 1):
        total += _cwr_count(c, n) * env  # no ego
        if n >= 1:
            total += c * _cwr_count(c, n - 1) * env  # first actor is ego
    return total


def validate_bounds(registry: Registry, bounds: UniverseBounds) -> None:
    """Pool tags must resolve, with the scope their pool claims."""
    for pool, scope in (
        (bounds.actor_pool, Scope.ACTOR),
        (bounds.static_pool, Scope.STATIC),
        (bounds.condition_pool, Scope.CONDITION),
    ):
        for path in pool:
            registry.resolve_path(path)
            if registry.scope_of(path) is not scope:
                raise ValidationError(
                    f"{path.canonical()!r} is not {scope.value}-scoped"
                )


def _guard(bounds: UniverseBounds) -> None:
    size = universe_size(bounds)
    if size > MAX_UNIVERSE:
        raise BoundsTooLargeError(
            f"bounded universe has {size} records, over the {MAX_UNIVERSE} guard"
        )
    m = (1 << len(bounds.actor_pool)) - 1
    c = sum(m**p for p in range(1, bounds.max_phases + 1))
    if c > MAX_ACTOR_CONFIGS:
        raise BoundsTooLargeError(
            f"{c} actor configurations, over the {MAX_ACTOR_CONFIGS} guard"
        )


def enumerate_universe(bounds: UniverseBounds) -> Iterator[ScenarioRecord]:
    """Deterministic enumeration of the bounded universe."""
    _guard(bounds)
    configs = _actor_configs(bounds)
    static_sets = _subsets(bounds.static_pool)
    condition_sets = _subsets(bounds.condition_pool)
    index = 0

    def build(phases, actor_id: str, ego: bool) -> ActorRecord:
        return ActorRecord(
            actor_id,
            ego,
            frozenset(),
            tuple(Phase(step, frozenset(tags)) for step, tags in enumerate(phases)),
        )

    for n in range(0, bounds.max_actors + 1):
        ego_options = [False] if n == 0 else [True, False]
        for with_ego in ego_options:
            rest = n - 1 if with_ego else n
            ego_choices = configs if with_ego else [None]
            for ego_cfg in ego_choices:
                for combo in itertools.combinations_with_replacement(configs, rest):
                    actors = []
                    if with_ego:
                        actors.append(build(ego_cfg, "ego", True))
                    actors.extend(
                        build(cfg, f"v{i + 1}", False) for i, cfg in enumerate(combo)
                    )
                    for static in static_sets:
                        for cond in condition_sets:
                            yield ScenarioRecord(
                                f"u{index}",
                                tuple(actors),
                                frozenset(static),
                                frozenset(cond),
                            )
                            index += 1


# --- includes ----------------------------------------------------------------


def _req_pool(category: ScenarioCategory) -> list[tuple[str, Requirement]]:
    """Every requirement occurrence with a printable context."""
    pool = [("ungrouped", r) for r in sorted(category.ungrouped, key=str)]
    for g in category.groups:
        pool.extend((f"group {g.group_id}", r) for r in sorted(g.requirements, key=str))
    for i, snap in enumerate(category.sequence, start=1):
        pool.extend(
            (f"snapshot {i} {t}", r)
            for t, r in sorted(snap.entries, key=lambda e: (e[0], str(e[1])))
        )
    return pool


def _group_targets(category: ScenarioCategory, group_id: str) -> list[tuple[str, Requirement]]:
    """Requirements pinned to one group: its own plus its snapshot entries."""
    out = [(f"group {group_id}", r) for r in sorted(category.group(group_id).requirements, key=str)]
    for i, snap in enumerate(category.sequence, start=1):
        out.extend(
            (f"snapshot {i} {t}", r)
            for t, r in sorted(snap.entries, key=lambda e: (e[0], str(e[1])))
            if t == group_id
        )
    return out


def _sub(registry: Registry, general: Requirement, specific: Requirement) -> bool:
    return subsumes(registry, general.tag, specific.tag)


def _embed_snapshots(
    registry: Registry,
    larger: tuple[Snapshot, ...],
    smaller: tuple[Snapshot, ...],
    group_map: dict[str, str],
) -> list[tuple[int, int]] | None:
    """Greedy order-preserving injection with entry-wise subsumption."""

    def fits(lsnap: Snapshot, ssnap: Snapshot) -> bool:
        for target, req in lsnap.entries:
            mapped = STATIC_TARGET if target == STATIC_TARGET else group_map[target]
            if not any(
                t == mapped and _sub(registry, req, r) for t, r in ssnap.entries
            ):
                return False
        return True

    pairs: list[tuple[int, int]] = []
    j = 0
    for i, lsnap in enumerate(larger):
        while j < len(smaller) and not fits(lsnap, smaller[j]):
            j += 1
        if j == len(smaller):
            return None
        pairs.append((i + 1, j + 1))
        j += 1
    return pairs


def includes_syntactic(
    registry: Registry, larger: ScenarioCategory, smaller: ScenarioCategory
) -> InclusionVerdict:
    """Sound, incomplete check: INCLUDES with a mapping proof, or UNKNOWN."""
    smaller_pool = _req_pool(smaller)

    req_map: list[tuple[str, str]] = []
    for req in sorted(larger.ungrouped, key=str):
        for ctx, target in smaller_pool:
            if _sub(registry, req, target):
                req_map.append((f"ungrouped {req}", f"{ctx} {target}"))
                break
        else:
            return InclusionVerdict(
                InclusionStatus.UNKNOWN,
                note=f"no syntactic target for ungrouped {req}",
            )

    larger_groups = list(larger.groups)
    smaller_groups = list(smaller.groups)
    larger_has_ego = any(g.is_ego for g in larger_groups)

    def candidates(lg: ActorGroup) -> list[ActorGroup]:
        if lg.is_ego:
            return [sg for sg in smaller_groups if sg.is_ego]
        return [sg for sg in smaller_groups if not sg.is_ego or not larger_has_ego]

    def group_fits(lg: ActorGroup, sg: ActorGroup) -> bool:
        targets = _group_targets(smaller, sg.group_id)
        return all(
            any(_sub(registry, req, t) for _, t in targets) for req in lg.requirements
        )

    assignment: dict[str, str] = {}
    used: set[str] = set()

    def search(idx: int) -> list[tuple[int, int]] | None:
        if idx == len(larger_groups):
            return _embed_snapshots(registry, larger.sequence, smaller.sequence, assignment)
        lg = larger_groups[idx]
        for sg in candidates(lg):
            if sg.group_id in used or not group_fits(lg, sg):
                continue
            assignment[lg.group_id] = sg.group_id
            used.add(sg.group_id)
            result = search(idx + 1)
            if result is not None:
                return result
            used.discard(sg.group_id)
            del assignment[lg.group_id]
        return None

    snapshot_pairs = search(0)
    if snapshot_pairs is None:
        return InclusionVerdict(
            InclusionStatus.UNKNOWN, note="no group mapping with snapshot embedding"
        )
    group_req_map: list[tuple[str, str]] = []
    for lg in larger_groups:
        targets = _group_targets(smaller, assignment[lg.group_id])
        for req in sorted(lg.requirements, key=str):
            ctx, target = next(
                (c, t) for c, t in targets if _sub(registry, req, t)
            )
            group_req_map.append((f"group {lg.group_id} {req}", f"{ctx} {target}"))
    proof = MappingProof(
        tuple(req_map + group_req_map),
        tuple(sorted(assignment.items())),
        tuple(snapshot_pairs),
    )
    return InclusionVerdict(InclusionStatus.INCLUDES, proof=proof, note="syntactic")


def includes_semantic(
    registry: Registry,
    larger: ScenarioCategory,
    smaller: ScenarioCategory,
    bounds: UniverseBounds,
) -> InclusionVerdict:
    """Exhaustive decision over the bounded universe."""
    validate_bounds(registry, bounds)
    _guard(bounds)
    note = f"semantic within bounds ({bounds.describe()})"
    checked = 0
    comprised = 0
    for record in enumerate_universe(bounds):
        checked += 1
        if comprises(registry, smaller, record) is None:
            continue
        comprised += 1
        if comprises(registry, larger, record) is None:
            # re-verify both sides before reporting, per the verdict contract
            assert comprises(registry, smaller, record) is not None
            assert comprises(registry, larger, record) is None
            return InclusionVerdict(
                InclusionStatus.NOT_INCLUDES, counterexample=record, note=note
            )
    return InclusionVerdict(
        InclusionStatus.INCLUDES,
        proof=ExhaustionProof(checked, comprised),
        note=note,
    )


# --- conjunction and satisfiability ------------------------------------------


def conjoin(
    registry: Registry, a: ScenarioCategory, b: ScenarioCategory
) -> ScenarioCategory:
    """Category comprising the intersection of the two inputs' scenario sets.

    Ungrouped requirements are unioned, ego groups merged, non-ego groups
    concatenated (b's renamed on collision). Conjoining two categories
    that both carry sequences is refused: no interleaving semantics is
    defined for that case.
    """
    if a.sequence and b.sequence:
        raise ValidationError(
            "cannot conjoin two categories that both have sequences"
        )
    groups: list[ActorGroup] = [g for g in a.groups if not g.is_ego]
    taken = {g.group_id for g in groups}
    rename: dict[str, str] = {}
    for g in b.groups:
        if g.is_ego:
            continue
        gid = g.group_id
        if gid in taken or gid in registry.trees:
            stem, n = f"{gid}_b", 2
            gid = stem
            while gid in taken or gid in registry.trees:
                gid = f"{stem}{n}"
                n += 1
            rename[g.group_id] = gid
        taken.add(gid)
        groups.append(ActorGroup(gid, False, g.requirements))

    a_ego = next((g for g in a.groups if g.is_ego), None)
    b_ego = next((g for g in b.groups if g.is_ego), None)
    if a_ego or b_ego:
        merged = frozenset(
            (a_ego.requirements if a_ego else frozenset())
            | (b_ego.requirements if b_ego else frozenset())
        )
        groups.append(ActorGroup(EGO_GROUP_ID, True, merged))

    sequence = a.sequence
    if b.sequence:
        sequence = tuple(
            Snapshot(
                frozenset(
                    (rename.get(t, t), req) for t, req in snap.entries
                )
            )
            for snap in b.sequence
        )
    result = ScenarioCategory(
        f"({a.name}) and ({b.name})",
        frozenset(a.ungrouped | b.ungrouped),
        tuple(groups),
        sequence,
    )
    validate_category(registry, result)
    return result


def is_satisfiable(
    registry: Registry, category: ScenarioCategory, bounds: UniverseBounds
) -> ScenarioRecord | None:
    """First enumerated record the category comprises, or None within bounds."""
    validate_bounds(registry, bounds)
    _guard(bounds)
    for record in enumerate_universe(bounds):
        if comprises(registry, category, record) is not None:
            return record
    return None
