"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings. Every tolerance and runtime bound is asserted here.
"""

import random
import time
from contextlib import contextmanager

import scentag as st
from scentag.algebra import (
    InclusionStatus,
    bounds_from_categories,
    includes_semantic,
    includes_syntactic,
    universe_size,
)
from scentag.category import parse_category, serialize_category
from scentag.matcher import comprises, verify_witness
from scentag.scenario import parse_scenario, serialize_scenario
from scentag.store import OddSpec, StoreFile, parse_query, select_test_cases

import generators
from oracle import oracle_comprises


@contextmanager
def criterion(number: int, description: str, budget_s: float):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < budget_s, f"criterion {number} took {elapsed:.2f}s (budget {budget_s}s)"
    print(f"PASS criterion {number}: {description} ({elapsed:.2f}s)")


def test_criterion_1_paper_fixtures(registry):
    with criterion(1, "paper fixtures parse, lint clean, and match", 1.0):
        categories = parse_category(registry, st.fixture_text("paper_categories.cat"))
        assert [c.name for c in categories] == [
            "driving on a straight road",
            "oncoming vehicle turns right at signalized junction",
            "cut-in at merging lanes",
        ]
        for cat in categories:
            assert st.lint_category(registry, cat) == []

        records = [
            parse_scenario(registry, st.fixture_text(name))
            for name in ("straight_road.scn", "oncoming_turn.scn", "cutin.scn")
        ]
        for cat, record in zip(categories, records):
            witness = comprises(registry, cat, record)
            assert witness is not None, cat.name
            assert verify_witness(registry, cat, record, witness)
            assert dict(witness.binding)["ego"] == "ego"

        cutin_witness = comprises(registry, categories[2], records[2])
        t1, t2 = cutin_witness.snapshot_steps
        assert t1 < t2
        by_context = {e.context: e for e in cutin_witness.satisfied_by}
        assert by_context["snapshot 1 other"].requirement.canonical() == "lead_vehicle:no_leader"
        assert by_context["snapshot 2 other"].requirement.canonical() == "lead_vehicle:leader"


def test_criterion_2_fig2_relational_fixture(registry):
    with criterion(2, "Fig. 2 comprise/include fixture under (2,2) bounds", 10.0):
        cb, cc = parse_category(
            registry,
            'category "daylight" { static { lighting:day } }\n'
            'category "rain" { static { weather:rain } }',
        )
        ca = st.conjoin(registry, cb, cc)
        s1 = parse_scenario(
            registry, 'scenario "s1" { conditions { lighting:day/bright weather:clear } }'
        )
        s2 = parse_scenario(
            registry,
            'scenario "s2" { conditions { lighting:day/overcast weather:rain/moderate } }',
        )
        s3 = parse_scenario(
            registry,
            'scenario "s3" { conditions { lighting:dark/street_lights weather:rain/heavy } }',
        )

        def comprised(cat, rec):
            return comprises(registry, cat, rec) is not None

        assert comprised(cb, s1) and comprised(cb, s2)  # {S1, S2} subset of C_B
        assert comprised(ca, s2) and comprised(cb, s2)  # S2 in C_A and C_B
        assert comprised(cc, s3) and not comprised(ca, s3) and not comprised(cb, s3)
        assert not comprised(cc, s1) and not comprised(ca, s1)

        bounds = bounds_from_categories(registry, [ca, cb], max_actors=2, max_phases=2)
        assert includes_semantic(registry, cb, ca, bounds).status is InclusionStatus.INCLUDES
        verdict = includes_semantic(registry, ca, cb, bounds)
        assert verdict.status is InclusionStatus.NOT_INCLUDES
        cex = verdict.counterexample
        assert cex is not None
        assert comprises(registry, cb, cex) is not None
        assert comprises(registry, ca, cex) is None


def test_criterion_3_subsumption_order_laws(registry):
    with criterion(3, "subsumption laws exhaustive over all built-in path pairs", 1.0):
        paths = registry.iter_paths()
        assert len(paths) * len(paths) > 2000  # low thousands of pairs
        matrix = {}
        for a in paths:
            for b in paths:
                matrix[(a, b)] = st.subsumes(registry, a, b)
        for a in paths:
            assert matrix[(a, a)]  # reflexive
        for a in paths:
            for b in paths:
                if matrix[(a, b)] and matrix[(b, a)]:
                    assert a == b  # antisymmetric
                if a.tree_id != b.tree_id:
                    assert not matrix[(a, b)]  # cross-tree incomparable
        by_tree = {}
        for p in paths:
            by_tree.setdefault(p.tree_id, []).append(p)
        # premises force all three paths into one tree, so same-tree
        # triples exhaust transitivity
        for tree_paths in by_tree.values():
            for a in tree_paths:
                for b in tree_paths:
                    if not matrix[(a, b)]:
                        continue
                    for c in tree_paths:
                        if matrix[(b, c)]:
                            assert matrix[(a, c)]


def test_criterion_4_matcher_oracle_equivalence(registry):
    with criterion(4, "matcher agrees with exhaustive oracle on 10000 random pairs", 60.0):
        rng = random.Random(20240811)
        vocab = generators.Vocab(registry)
        matches = 0
        for i in range(10_000):
            category = generators.random_category(rng, vocab, name=f"c{i}")
            record = generators.random_scenario(
                rng, vocab, max_actors=3, max_phases=3, scenario_id=f"s{i}"
            )
            witness = comprises(registry, category, record)
            expected = oracle_comprises(registry, category, record)
            assert (witness is not None) == expected, (
                serialize_category(category, registry),
                serialize_scenario(record),
            )
            if witness is not None:
                matches += 1
        assert matches > 500  # the sample exercises the match path


def test_criterion_5_inclusion_soundness(registry):
    with criterion(5, "syntactic INCLUDES confirmed semantically on 1000 pairs", 60.0):
        rng = random.Random(31337)
        vocab = generators.Vocab(registry, small=True)
        syntactic_includes = 0
        confirmed_nonvacuous = 0
        for i in range(1_000):
            smaller = generators.random_category(rng, vocab, name="s")
            if rng.random() < 0.7:
                larger = generators.generalize_category(rng, vocab, smaller, name="l")
            else:
                larger = generators.random_category(rng, vocab, name="l")
            verdict = includes_syntactic(registry, larger, smaller)
            if verdict.status is not InclusionStatus.INCLUDES:
                continue
            syntactic_includes += 1
            max_actors = max(len(larger.groups), len(smaller.groups), 1)
            bounds = bounds_from_categories(
                registry, [larger, smaller], max_actors, max_phases=1
            )
            if universe_size(bounds) > 250_000:
                bounds = bounds_from_categories(registry, [larger, smaller], 1, 1)
            semantic = includes_semantic(registry, larger, smaller, bounds)
            assert semantic.status is InclusionStatus.INCLUDES, (
                serialize_category(larger, registry),
                serialize_category(smaller, registry),
                serialize_scenario(semantic.counterexample),
            )
            if semantic.proof.comprised_checked > 0:
                confirmed_nonvacuous += 1
        assert syntactic_includes >= 300
        assert confirmed_nonvacuous >= 100


def test_criterion_6_store_differential(registry, tmp_path):
    with criterion(6, "index equals linear scan on 1000 records / 100 queries", 30.0):
        rng = random.Random(271828)
        vocab = generators.Vocab(registry)
        path = tmp_path / "acceptance.store"
        StoreFile.init(path)
        store = StoreFile(path, registry)
        for i in range(1_000):
            store.add(generators.random_scenario(rng, vocab, scenario_id=f"r{i:05d}"))
        atoms = [p.canonical() for p in registry.iter_paths()]
        nonempty_results = 0
        for q in range(100):
            expr = parse_query(registry, _random_query(rng, atoms))
            indexed = store.query(expr)
            assert indexed == store.query_scan(expr)
            if indexed:
                nonempty_results += 1
        assert nonempty_results > 20

        paths = registry.iter_paths()
        for _ in range(100):
            specific = rng.choice(paths)
            cut = rng.randrange(0, len(specific.segments) + 1)
            ancestor = st.TagPath(specific.tree_id, specific.segments[:cut])
            below = set(store.query(parse_query(registry, specific.canonical())))
            above = set(store.query(parse_query(registry, ancestor.canonical())))
            assert below <= above


def _random_query(rng: random.Random, atoms: list[str]) -> str:
    def term(depth: int) -> str:
        roll = rng.random()
        if depth > 2 or roll < 0.5:
            return rng.choice(atoms)
        if roll < 0.65:
            return f"NOT {term(depth + 1)}"
        op = rng.choice(["AND", "OR"])
        return f"({term(depth + 1)} {op} {term(depth + 1)})"

    return term(0)


def test_criterion_7_round_trips(registry, tmp_path):
    with criterion(7, "parse/serialize fixpoints and store reopen stability", 60.0):
        rng = random.Random(1618)
        vocab = generators.Vocab(registry)
        for i in range(1_000):
            category = generators.random_category(rng, vocab, name=f"c{i}")
            text = serialize_category(category, registry)
            (parsed,) = parse_category(registry, text)
            assert parsed == category
            assert serialize_category(parsed, registry) == text
        for i in range(1_000):
            record = generators.random_scenario(rng, vocab, scenario_id=f"s{i}")
            text = serialize_scenario(record)
            parsed = parse_scenario(registry, text)
            assert parsed == record
            assert serialize_scenario(parsed) == text

        path = tmp_path / "reopen.store"
        StoreFile.init(path)
        store = StoreFile(path, registry)
        for i in range(100):
            store.add(generators.random_scenario(rng, vocab, scenario_id=f"d{i:03d}"))
        queries = [
            parse_query(registry, q)
            for q in (
                "actor_type:vehicle",
                "weather: AND NOT lighting:dark",
                "(road_layout:straight OR road_layout:junction) AND actor_type:",
            )
        ]
        before = [store.query(q) for q in queries]
        reopened = StoreFile(path, registry)
        assert [reopened.query(q) for q in queries] == before


def test_criterion_8_test_case_selection(registry, tmp_path):
    with criterion(8, "ODD selection equals brute-force intersection", 60.0):
        rng = random.Random(424242)
        vocab = generators.Vocab(registry)
        for round_no in range(5):
            records = [
                generators.random_scenario(rng, vocab, scenario_id=f"t{round_no}_{i:03d}")
                for i in range(60)
            ]
            library = []
            for i in range(4):
                library.append(
                    generators.random_category(rng, vocab, name=f"cat {round_no}.{i}")
                )
            odd = OddSpec(tuple(c.name for c in library[: rng.randint(1, 4)]))

            def build(order, tag):
                path = tmp_path / f"sel{round_no}_{tag}.store"
                StoreFile.init(path)
                s = StoreFile(path, registry)
                for idx in order:
                    s.add(records[idx])
                return s

            store = build(range(len(records)), "fwd")
            got = select_test_cases(store, library, odd)

            # brute-force definition via the independent oracle
            by_name = {c.name: c for c in library}
            want = []
            for record in sorted(records, key=lambda r: r.scenario_id):
                names = [
                    name
                    for name in odd.categories
                    if oracle_comprises(registry, by_name[name], record)
                ]
                if names:
                    want.append((record.scenario_id, names))
            assert got == want

            store_ids = set(store.ids())
            assert {rid for rid, _ in got} <= store_ids

            permuted = build(reversed(range(len(records))), "rev")
            assert select_test_cases(permuted, library, odd) == got
