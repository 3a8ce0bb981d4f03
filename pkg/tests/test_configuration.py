import itertools
from importlib import resources
import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from awareness.attention import MLAM, REGIONS, Region, Situation, all_situations, build_mlam
from awareness.configuration import (
    EMPTY, Candidate, ModuleDescriptor, Relation, build_forest, check_modules,
    load_fixture, optimize, parse_fixture, prune_forest, select,
)
from awareness.errors import ConfigurationError, InfeasibleError

from oracles import COVERAGE, brute_force_optimum, fixture_modules
from strategies import as_oracle, random_instance, random_mlam

IDS = ["FL", "FR", "RL", "RR"]


def cand(*ids):
    return Candidate(frozenset(ids))


def mlam_of(d, lat="none"):
    return build_mlam(Situation(d, lat))


def test_fixture_matches_coverage_table(fixture):
    assert fixture.module_ids == IDS
    for m in fixture.modules:
        assert {r.value for r in m.coverage} == COVERAGE[m.id]
        assert len(m.coverage) == 5
        assert m.cost == 1.0 and math.isinf(m.performance) and m.is_source and not m.relations


def test_fixture_forest_has_sixteen_roots(fixture):
    forest = build_forest(fixture.modules)
    assert len(forest.roots) == 16
    assert forest.n_children() == 0
    assert {r.members for r in forest.roots} == {
        frozenset(c) for k in range(5) for c in itertools.combinations(IDS, k)}


def test_empty_module_set_forest():
    forest = build_forest([])
    assert forest.roots == [EMPTY]


def test_forest_with_non_source_child():
    a = ModuleDescriptor("A", coverage={"f"})
    b = ModuleDescriptor("B", coverage={"b"})
    c = ModuleDescriptor("C", coverage={"l"}, is_source=False, relations=[Relation("dependency", "C", "A")])
    forest = build_forest([a, b, c])
    assert {r.members for r in forest.roots} == {frozenset(), frozenset("A"), frozenset("B"), frozenset("AB")}
    children = {t.candidate.members: [ch.candidate.members for ch in t.children] for t in forest.trees}
    assert children[frozenset("A")] == [frozenset("AC")]
    assert children[frozenset("AB")] == [frozenset("ABC")]
    assert children[frozenset()] == [] and children[frozenset("B")] == []


def test_forest_dependency_chain():
    a = ModuleDescriptor("A", coverage={"f"})
    c = ModuleDescriptor("C", is_source=False, relations=[Relation("dependency", "C", "A")])
    d = ModuleDescriptor("D", is_source=False, relations=[Relation("dependency", "D", "C")])
    forest = build_forest([a, c, d])
    nodes = {n.members for n in forest.candidates()}
    assert nodes == {frozenset(), frozenset("A"), frozenset("AC"), frozenset("ACD")}


@pytest.mark.parametrize("modules", [
    [ModuleDescriptor("A", coverage={"f"}, relations=[Relation("dependency", "A", "Z")])],
    [ModuleDescriptor("A", coverage={"f"}), ModuleDescriptor("A", coverage={"b"})],
    [ModuleDescriptor("C", is_source=False)],
    [ModuleDescriptor("A", coverage={"f"}),
     ModuleDescriptor("C", is_source=False, relations=[Relation("dependency", "C", "D")]),
     ModuleDescriptor("D", is_source=False, relations=[Relation("dependency", "D", "C")])],
    [ModuleDescriptor("A", coverage={"f"}), ModuleDescriptor("B", coverage={"b"},
                                                            relations=[Relation("dependency", "B", "A")])],
])
def test_bad_descriptor_sets(modules):
    with pytest.raises(ConfigurationError):
        build_forest(modules)


def test_descriptor_validation():
    with pytest.raises(ConfigurationError):
        ModuleDescriptor("A")  # source without coverage
    with pytest.raises(ConfigurationError):
        ModuleDescriptor("A", cost=-1, coverage={"f"})
    with pytest.raises(ConfigurationError):
        Relation("interaction", "A", "B")


def test_linkability_is_accepted_with_warning():
    a = ModuleDescriptor("A", coverage={"f"}, relations=[Relation("linkability", "A", "B")])
    b = ModuleDescriptor("B", coverage={"b"})
    with pytest.warns(UserWarning, match="linkability"):
        check_modules([a, b])


def test_prune_forward(fixture):
    forest = build_forest(fixture.modules)
    pruned = prune_forest(forest, mlam_of("forward"))
    assert len(pruned.roots) == 12
    assert all(r.members & {"FL", "FR"} for r in pruned.roots)


def test_prune_zero_map_keeps_everything(fixture):
    forest = build_forest(fixture.modules)
    assert prune_forest(forest, MLAM()).roots == forest.roots


def test_prune_full_map_removes_singletons(fixture):
    forest = build_forest(fixture.modules)
    kept = {r.members for r in prune_forest(forest, mlam_of("maneuvering")).roots}
    assert all(len(k) >= 2 for k in kept)
    # of the pairs only the diagonal ones cover all eight regions
    pairs = {k for k in kept if len(k) == 2}
    assert pairs == {frozenset({"FL", "RR"}), frozenset({"FR", "RL"})}
    assert len(kept) == 2 + 4 + 1


@pytest.mark.parametrize("situation, current, expected", [
    (("forward", "none"), (), {"FL"}),
    (("forward", "none"), ("FR",), {"FR"}),
    (("maneuvering", "none"), ("FL",), {"FL", "RR"}),
    (("maneuvering", "none"), ("FR",), {"FR", "RL"}),
    (("standby", "none"), ("FL", "RR"), set()),
    (("forward", "turn_left"), ("FR",), {"FL"}),
    (("forward", "turn_right"), ("FL",), {"FR"}),
    (("left", "none"), (), {"FL"}),
    (("right", "none"), ("FL",), {"FR"}),
])
def test_optimize_examples(fixture, situation, current, expected):
    assert optimize(mlam_of(*situation), fixture.modules, cand(*current)).members == expected


def test_infeasible_names_regions():
    mods = [ModuleDescriptor("A", coverage={"f", "fl"})]
    with pytest.raises(InfeasibleError) as err:
        optimize(MLAM.from_mapping({"f": 1, "b": 1, "l": 1}), mods)
    assert set(err.value.regions) == {Region.B, Region.L}
    assert "b" in str(err.value)


def test_infeasible_finite_performance():
    mods = [ModuleDescriptor("A", performance=1.0, coverage={"f"})]
    with pytest.raises(InfeasibleError) as err:
        optimize(MLAM.from_mapping({"f": 2}), mods)
    assert err.value.regions == (Region.F,)


def test_fixture_matches_brute_force_all_situations(fixture):
    oracle = fixture_modules()
    for s in all_situations():
        mlam = build_mlam(s)
        req = {r.value: v for r, v in mlam.items()}
        for k in range(5):
            for cur in itertools.combinations(IDS, k):
                expected = brute_force_optimum(oracle, req, cur, IDS)
                assert optimize(mlam, fixture.modules, cand(*cur)).members == expected, (s, cur)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_instances_match_brute_force(seed):
    rng = random.Random(seed)
    modules = random_instance(rng)
    mlam = random_mlam(rng)
    current = frozenset(rng.sample([m.id for m in modules], rng.randint(0, len(modules))))
    req = {r.value: v for r, v in mlam.items()}
    expected = brute_force_optimum(as_oracle(modules), req, current, [m.id for m in modules])
    if expected is None:
        with pytest.raises(InfeasibleError):
            optimize(mlam, modules, Candidate(current))
    else:
        assert optimize(mlam, modules, Candidate(current)).members == expected


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_finite_performance_feasibility(seed):
    rng = random.Random(seed)
    modules = random_instance(rng, finite=True, non_source=False)
    mlam = random_mlam(rng, max_req=2)
    by_id = {m.id: m for m in modules}
    try:
        best = optimize(mlam, modules)
    except InfeasibleError:
        best = None
    oracle = brute_force_optimum(as_oracle(modules), {r.value: v for r, v in mlam.items()}, ())
    assert (best is None) == (oracle is None)
    if best is not None:
        for region, req in mlam.items():
            got = sum(by_id[m].performance for m in best.members if region in by_id[m].coverage)
            assert got >= req


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cost_monotone_under_requirement_removal(seed):
    rng = random.Random(seed)
    modules = random_instance(rng)
    big = random_mlam(rng, density=0.7)
    small = MLAM(tuple(v if rng.random() < 0.5 else rng.randint(0, v) for v in big.requirements))
    assert small <= big
    by_id = {m.id: m for m in modules}
    try:
        c_big = sum(by_id[m].cost for m in optimize(big, modules).members)
    except InfeasibleError:
        return
    c_small = sum(by_id[m].cost for m in optimize(small, modules).members)
    assert c_small <= c_big + 1e-9


def test_pruning_never_removes_optimum():
    rng = random.Random(7)
    for _ in range(200):
        modules = random_instance(rng)
        mlam = random_mlam(rng)
        current = Candidate(frozenset(rng.sample([m.id for m in modules], rng.randint(0, len(modules)))))
        forest = build_forest(modules)
        full = select(forest.candidates(), mlam, modules, current)
        pruned = select(prune_forest(forest, mlam).candidates(), mlam, modules, current)
        assert full == pruned


def test_parse_fixture_rejects_mismatched_quadrants():
    data = json.loads(resources.files("awareness").joinpath("data/unicaragil.json").read_text())
    data["modules"][0]["quadrants"] = [["fl"], ["f", "fr"], ["l", "b"]]
    with pytest.raises(ConfigurationError, match="quadrant"):
        parse_fixture(data)


def test_load_fixture_from_path(tmp_path):
    path = tmp_path / "fx.json"
    path.write_text(json.dumps({"modules": [
        {"id": "A", "cost": 2, "performance": 3, "coverage": ["f"]},
        {"id": "B", "coverage": ["b"], "is_source": False, "relations": [{"kind": "dependency", "object": "A"}]},
    ]}))
    fx = load_fixture(path)
    assert fx.modules[0].performance == 3.0 and fx.modules[0].cost == 2.0
    assert fx.modules[1].dependencies == {"A"}
    assert fx.layouts == ()
    path.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_fixture(path)
