import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphflow.errors import (
    DisconnectedGraph,
    DuplicateEdge,
    MissingWeight,
    NonpositiveVelocity,
    SelfLoop,
    UnexpectedWeight,
    UnknownVertex,
    WeightOutOfRange,
)
from graphflow.graph import (
    Edge,
    MetricGraph,
    build_incidence,
    build_line_adjacency,
    constant_domain_check,
    validate_conservation,
    velocity_adjacency,
)
from graphflow.velocity import VelocityProfile

from conftest import three_cycle, two_cycle


def test_incidence_two_cycle():
    phi_out, phi_in = build_incidence(["v1", "v2"], [("v1", "v2"), ("v2", "v1")])
    np.testing.assert_array_equal(phi_in, [[1, 0], [0, 1]])
    np.testing.assert_array_equal(phi_out, [[0, 1], [1, 0]])


def test_line_adjacency_two_cycle(g2):
    np.testing.assert_array_equal(g2.line_adjacency, [[0, 1], [1, 0]])


def test_line_adjacency_three_cycle(g3):
    B = g3.line_adjacency
    expected = np.zeros((3, 3))
    expected[1, 0] = expected[2, 1] = expected[0, 2] = 1.0
    np.testing.assert_array_equal(B, expected)


def test_arrays_are_read_only(g2):
    with pytest.raises(ValueError):
        g2.line_adjacency[0, 0] = 2.0


def test_star_split():
    # v0 feeds two edges with weights 0.3 / 0.7; both return to v0 through a hub
    g = MetricGraph.build(
        ["v0", "a", "b"],
        [Edge("in_a", "v0", "a"), Edge("in_b", "v0", "b"), Edge("out_a", "a", "v0"), Edge("out_b", "b", "v0")],
        {("a", "in_a"): 1.0, ("b", "in_b"): 1.0, ("v0", "out_a"): 0.3, ("v0", "out_b"): 0.7},
    )
    B = g.line_adjacency
    # outflow of in_a (ends at v0) goes to out_a / out_b
    assert B[2, 0] == 0.3 and B[3, 0] == 0.7
    assert validate_conservation(g).ok


@pytest.mark.parametrize(
    "vertices, edges, weights, exc",
    [
        (["v1"], [Edge("e1", "v1", "v2")], {}, UnknownVertex),
        (["v1"], [Edge("e1", "v1", "v1")], {}, SelfLoop),
        (["v1", "v2"], [Edge("e1", "v1", "v2"), Edge("e2", "v1", "v2")], {}, DuplicateEdge),
        (["v1", "v2", "v3"], [Edge("e1", "v1", "v2")], {("v2", "e1"): 1.0}, DisconnectedGraph),
    ],
)
def test_structural_errors(vertices, edges, weights, exc):
    with pytest.raises(exc):
        MetricGraph.build(vertices, edges, weights)


def test_weight_errors_name_pair():
    edges = [Edge("e1", "v1", "v2"), Edge("e2", "v2", "v1")]
    with pytest.raises(MissingWeight) as info:
        build_line_adjacency(["v1", "v2"], edges, {("v2", "e1"): 1.0})
    assert info.value.pair == ("v1", "e2")
    with pytest.raises(WeightOutOfRange):
        build_line_adjacency(["v1", "v2"], edges, {("v2", "e1"): 1.5, ("v1", "e2"): 1.0})
    with pytest.raises(UnexpectedWeight):
        build_line_adjacency(
            ["v1", "v2"], edges, {("v2", "e1"): 1.0, ("v1", "e2"): 1.0, ("v1", "e1"): 0.5}
        )
    # an explicit zero for a non-incident pair is harmless
    build_line_adjacency(["v1", "v2"], edges, {("v2", "e1"): 1.0, ("v1", "e2"): 1.0, ("v1", "e1"): 0.0})


def test_conservation_ok(g2):
    rep = validate_conservation(g2)
    assert rep.ok and rep.lines() == ["stochasticity: ok"]


def test_conservation_violation_residual():
    g = three_cycle(perturb=(("v2", "e2"), 0.9))
    rep = validate_conservation(g)
    assert not rep.ok
    assert rep.vertex_residuals == pytest.approx({"v2": 0.1})
    assert any("v2" in line for line in rep.lines())


def test_sink_is_legitimate():
    g = MetricGraph.build(["v1", "v2"], [Edge("e1", "v1", "v2")], {("v2", "e1"): 1.0})
    rep = validate_conservation(g)
    assert not rep.ok
    assert g.line_adjacency.sum() == 0


def test_velocity_adjacency_entries(g2):
    bc = velocity_adjacency(g2.line_adjacency, np.array([1.0, 3.0]))
    np.testing.assert_allclose(bc, [[0, 3.0], [1 / 3, 0]])
    with pytest.raises(NonpositiveVelocity):
        velocity_adjacency(g2.line_adjacency, np.array([1.0, 0.0]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=2, max_size=2))
def test_boundary_matrix_similarity(speeds):
    # C^-1 B C is similar to B: same spectrum
    g = two_cycle()
    bc = velocity_adjacency(g.line_adjacency, np.array(speeds))
    ev = np.sort(np.linalg.eigvals(bc).real)
    np.testing.assert_allclose(ev, [-1.0, 1.0], atol=1e-12)


def test_constant_domain_proportional(g2):
    vel = [VelocityProfile.sinusoid(2.0, 1.0), VelocityProfile.sinusoid(4.0, 2.0)]
    assert constant_domain_check(g2.line_adjacency, vel, np.linspace(0, 6, 50)).constant


def test_constant_domain_coupled_nonproportional(g2):
    vel = [VelocityProfile.constant(1.0), VelocityProfile.sinusoid(2.0, 1.0)]
    res = constant_domain_check(g2.line_adjacency, vel, np.linspace(0, 6, 50))
    assert not res.constant
    i, j, ta, tb = res.witness
    assert g2.line_adjacency[i, j] != 0 and ta != tb


def test_constant_domain_decoupled_matrix():
    # B_12 = B_21 = 0: the ratio condition is vacuous
    vel = [VelocityProfile.constant(1.0), VelocityProfile.sinusoid(2.0, 1.0)]
    assert constant_domain_check(np.eye(2), vel, np.linspace(0, 6, 50)).constant


def test_domain_check_matches_boundary_matrix(g2):
    vel = [VelocityProfile.constant(1.0), VelocityProfile.sinusoid(2.0, 1.0)]
    for t1, t2, same in [(0.0, np.pi, True), (0.0, 1.0, False)]:
        equal = np.allclose(
            velocity_adjacency(g2.line_adjacency, vel, t1),
            velocity_adjacency(g2.line_adjacency, vel, t2),
            rtol=0,
            atol=1e-12,
        )
        assert equal == same == constant_domain_check(g2.line_adjacency, vel, [t1, t2]).constant


def test_constant_domain_decoupled_sink():
    # two edges never feeding each other: any ratio is fine
    g = MetricGraph.build(
        ["a", "b", "c"],
        [Edge("e1", "a", "b"), Edge("e2", "b", "a"), Edge("e3", "c", "b")],
        {("b", "e1"): 1.0, ("a", "e2"): 1.0, ("b", "e3"): 0.0},
    )
    B = g.line_adjacency
    assert B[:, 2].sum() == 0 and B[2, :].sum() == 0
    vel = [VelocityProfile.constant(1.0), VelocityProfile.constant(1.0), VelocityProfile.sinusoid(2.0, 1.0)]
    assert constant_domain_check(B, vel, np.linspace(0, 6, 50)).constant
