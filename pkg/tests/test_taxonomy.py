import re

import pytest
from hypothesis import given, strategies as hyp

import scentag as st
from scentag.errors import ParseError, ResolutionError, ValidationError
from scentag.taxonomy import TagPath, parse_registry, serialize_registry

BUILTIN_TREES = {
    "actor_type": ("actor", 8),
    "lateral_activity": ("actor", 9),
    "longitudinal_activity": ("actor", 7),
    "initial_state": ("actor", 17),
    "lead_vehicle": ("actor", 3),
    "road_type": ("static", 14),
    "road_layout": ("static", 6),
    "static_object": ("static", 7),
    "traffic_light": ("static", 5),
    "weather": ("condition", 12),
    "lighting": ("condition", 11),
}


def test_builtin_registry_golden(registry):
    assert len(registry.trees) == 11
    got = {t.tree_id: (t.scope.value, t.node_count()) for t in registry.trees.values()}
    assert got == BUILTIN_TREES
    assert len(registry.iter_paths()) == 99


def test_empty_document_is_valid():
    assert parse_registry("").trees == {}


def test_duplicate_tree_id_rejected():
    doc = "tree weather scope=condition\n  clear \"Clear\"\n\ntree weather scope=condition\n  fog \"Fog\"\n"
    with pytest.raises(ValidationError, match="duplicate tree id"):
        parse_registry(doc)


def test_duplicate_sibling_label_rejected():
    doc = 'tree t scope=actor\n  a "A"\n  a "A again"\n'
    with pytest.raises(ValidationError, match="duplicate sibling label"):
        parse_registry(doc)


def test_missing_scope_rejected():
    with pytest.raises(ParseError):
        parse_registry('tree t\n  a "A"\n')


def test_depth_limit():
    lines = ["tree t scope=actor"]
    for depth in range(1, 10):
        lines.append("  " * depth + f'n{depth} "N{depth}"')
    with pytest.raises(ValidationError, match="maximum depth"):
        parse_registry("\n".join(lines) + "\n")


def test_registry_document_round_trip(registry):
    doc = serialize_registry(registry)
    again = parse_registry(doc)
    assert again == registry
    assert serialize_registry(again) == doc


def test_resolve_examples(registry):
    path = st.resolve(registry, "actor_type:vru/pedestrian")
    assert path == TagPath("actor_type", ("vru", "pedestrian"))
    assert st.resolve(registry, "actor_type:") == TagPath("actor_type", ())


def test_resolve_unknown_segment_names_deepest_prefix(registry):
    with pytest.raises(ResolutionError, match=r"'drifting' under 'lateral_activity:'"):
        st.resolve(registry, "lateral_activity:drifting")
    with pytest.raises(
        ResolutionError, match=r"'left' under 'lateral_activity:going_straight'"
    ):
        st.resolve(registry, "lateral_activity:going_straight/left")


def test_resolve_unknown_tree(registry):
    with pytest.raises(ResolutionError, match="unknown tag tree"):
        st.resolve(registry, "no_such_tree:x")


def test_resolve_is_case_sensitive(registry):
    with pytest.raises(ResolutionError):
        st.resolve(registry, "Actor_Type:vehicle")


def test_resolve_canonical_round_trip(registry):
    for path in registry.iter_paths():
        assert st.resolve(registry, path.canonical()) == path


def test_subsumes_examples(registry):
    vehicle = st.resolve(registry, "actor_type:vehicle")
    cat_m = st.resolve(registry, "actor_type:vehicle/category_m")
    assert st.subsumes(registry, vehicle, cat_m)
    assert not st.subsumes(registry, cat_m, vehicle)
    assert not st.subsumes(
        registry, st.resolve(registry, "weather:"), st.resolve(registry, "lighting:day")
    )


def test_root_subsumes_every_path(registry):
    for path in registry.iter_paths():
        assert st.subsumes(registry, TagPath(path.tree_id, ()), path)


@given(hyp.data())
def test_subsumption_is_a_partial_order(registry, data):
    paths = registry.iter_paths()
    a = data.draw(hyp.sampled_from(paths))
    b = data.draw(hyp.sampled_from(paths))
    c = data.draw(hyp.sampled_from(paths))
    assert st.subsumes(registry, a, a)
    if st.subsumes(registry, a, b) and st.subsumes(registry, b, a):
        assert a == b
    if st.subsumes(registry, a, b) and st.subsumes(registry, b, c):
        assert st.subsumes(registry, a, c)


def _parse_dot(dot: str) -> tuple[dict[str, str], list[tuple[str, str]]]:
    nodes = dict(re.findall(r'(n\d+) \[label="((?:[^"\\]|\\.)*)"\];', dot))
    edges = re.findall(r"(n\d+) -> (n\d+);", dot)
    return nodes, edges


@pytest.mark.parametrize(
    "tree_id,leaves",
    [("lead_vehicle", 2), ("traffic_light", 4)],
)
def test_export_dot_leaf_counts(registry, tree_id, leaves):
    nodes, edges = _parse_dot(st.export_dot(registry, tree_id))
    parents = {a for a, _ in edges}
    leaf_ids = set(nodes) - parents
    assert len(leaf_ids) == leaves


def test_export_dot_single_node_tree():
    reg = parse_registry("tree only scope=static\n")
    nodes, edges = _parse_dot(st.export_dot(reg, "only"))
    assert len(nodes) == 1 and edges == []


def test_export_dot_is_a_tree(registry):
    for tree in registry.trees.values():
        nodes, edges = _parse_dot(st.export_dot(registry, tree.tree_id))
        assert len(nodes) == tree.node_count()
        assert len(edges) == len(nodes) - 1
        # connected and acyclic: every non-root has exactly one parent
        children = [b for _, b in edges]
        assert len(set(children)) == len(children)
        assert set(children) == set(nodes) - {"n0"}


def test_export_dot_unknown_tree(registry):
    with pytest.raises(ResolutionError):
        st.export_dot(registry, "nope")


def test_registry_scope_map(registry):
    assert registry.scope["weather"] is st.Scope.CONDITION
    assert registry.scope["road_type"] is st.Scope.STATIC
    assert registry.scope["lead_vehicle"] is st.Scope.ACTOR
