import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphflow.errors import StepTooLarge
from graphflow.transport import (
    AbsorptionProfile,
    CellData,
    NetworkState,
    PolynomialData,
    evolve,
    evolve_perturbed,
    oracle_cell_averages,
    oracle_perturbed_cell_averages,
    step_frozen,
    step_semilagrangian,
    total_mass,
    trace_value,
)
from graphflow.velocity import VelocityProfile

from conftest import sinusoids, three_cycle, two_cycle, unit

SCHEMES = ("semilagrangian", "frozen-product", "oracle")


def ramp():
    return PolynomialData([[0.0, 1.0], [1.0, -1.0]])  # f1 = x, f2 = 1 - x


def test_trace_value_examples(g2):
    assert trace_value(g2, unit(2), ramp(), 0, 0.5, 0.0, 0.3) == pytest.approx(0.8)
    # crossing at tau* = 0.2, continues on e2 from x = 1 to x = 0.9
    assert trace_value(g2, unit(2), ramp(), 0, 0.9, 0.0, 0.3) == pytest.approx(0.8)


def test_trace_time_change(g2):
    # edge-uniform speed: same as unit speed run for the elapsed displacement
    c = VelocityProfile.sinusoid(2.0, 1.0)
    f = PolynomialData([[0.2, 1.0, -0.5], [1.0, 0.3]])
    s, t = 0.4, 2.1
    tau = c.displacement(s, t)
    for j, x in [(0, 0.1), (0, 0.77), (1, 0.5), (1, 0.99)]:
        a = trace_value(g2, [c, c], f, j, x, s, t)
        b = trace_value(g2, unit(2), f, j, x, 0.0, tau)
        assert a == pytest.approx(b, abs=1e-10)


def test_total_mass_examples():
    st_ = NetworkState(np.ones((2, 7)))
    per, tot = total_mass(st_)
    np.testing.assert_allclose(per, [1.0, 1.0])
    assert tot == 2.0
    assert total_mass(NetworkState.zeros(2, 5))[1] == 0.0
    N = 1000
    s = NetworkState((np.arange(N)[None, :] + 0.5) / N)
    assert abs(total_mass(s)[1] - 0.5) <= 1 / (2 * N)


def test_unit_shift_rotates(g2):
    N = 10
    vals = np.arange(2 * N, dtype=float).reshape(2, N)
    out = step_semilagrangian(g2, unit(2), NetworkState(vals, 0.0), 0.1)
    # each cell moves one cell towards x=0; cell 0 of edge j feeds the last cell of the other edge
    np.testing.assert_allclose(out.values[:, :-1], vals[:, 1:], atol=1e-14)
    np.testing.assert_allclose(out.values[:, -1], vals[::-1, 0], atol=1e-14)
    assert abs(total_mass(out)[1] - total_mass(NetworkState(vals))[1]) <= 1e-14
    assert out.timestamp == pytest.approx(0.1)


def test_two_cell_shift_speed_two(g2):
    N = 8
    vals = np.arange(16, dtype=float).reshape(2, N)
    vel = [VelocityProfile.constant(2.0)] * 2
    out = step_frozen(g2, vel, NetworkState(vals, 0.0), 0.0, 0.25)
    # displacement 0.5 = four cells
    np.testing.assert_allclose(out.values[:, :4], vals[:, 4:], atol=1e-13)
    np.testing.assert_allclose(out.values[0, 4:], vals[1, :4], atol=1e-13)
    np.testing.assert_allclose(out.values[1, 4:], vals[0, :4], atol=1e-13)


def test_zero_state(g2):
    for scheme in SCHEMES:
        out, _ = evolve(g2, sinusoids(2), NetworkState.zeros(2, 16), 0.0, 1.0, 0.05, scheme)
        assert np.all(out.values == 0)


def test_step_too_large(g2):
    with pytest.raises(StepTooLarge):
        step_semilagrangian(g2, unit(2), NetworkState.zeros(2, 10), 1.5)


def test_frozen_equals_actual_for_constant_speeds(g3, rng):
    vel = [VelocityProfile.constant(v) for v in (1.0, 1.5, 0.7)]
    state = NetworkState(rng.normal(size=(3, 20)), 0.3)
    a = step_semilagrangian(g3, vel, state, 0.13)
    b = step_frozen(g3, vel, state, 0.3, 0.13)
    np.testing.assert_allclose(a.values, b.values, atol=1e-14)


def test_frozen_semigroup_law_grid_aligned(g2, rng):
    vel = sinusoids(2)
    N = 20
    # freeze at s where both speeds coincide with grid-aligned multiples is rare; use unit speed c(s)
    frozen = [VelocityProfile.constant(2.0)] * 2
    state = NetworkState(rng.uniform(size=(2, N)), 0.0)
    one = step_frozen(g2, frozen, step_frozen(g2, frozen, state, 0.0, 0.1), 0.0, 0.15)
    two = step_frozen(g2, frozen, state, 0.0, 0.25)
    np.testing.assert_allclose(one.values, two.values, atol=1e-10)
    del vel


def test_identity_horizon(g3, rng):
    state = NetworkState(rng.normal(size=(3, 12)), 1.0)
    for scheme in SCHEMES:
        out, rep = evolve(g3, sinusoids(3), state, 1.0, 1.0, 0.1, scheme)
        np.testing.assert_array_equal(out.values, state.values)
        assert rep.mass_drift == 0


def test_constant_equal_speed_schemes_agree(g3):
    f = PolynomialData([[1.0, -2.0, 3.0], [0.5], [0.0, 0.0, 1.0]])
    N, dt = 40, 0.025  # N * dt * c = 1
    outs = [evolve(g3, unit(3), f, 0.0, 1.7, dt, s, cells=N)[0].values for s in SCHEMES]
    np.testing.assert_allclose(outs[0], outs[2], atol=1e-12)
    np.testing.assert_allclose(outs[1], outs[2], atol=1e-12)


def test_oracle_cocycle_three_cycle(g3, rng):
    vel = sinusoids(3)
    f = CellData(rng.normal(size=(3, 16)))
    s, r, t = 0.2, 1.1, 2.9
    direct = oracle_cell_averages(g3, vel, f, s, t, 16)
    mid = oracle_cell_averages(g3, vel, f, s, r, 64)
    via = oracle_cell_averages(g3, vel, CellData(mid.values), r, t, 16)
    # intermediate projection on a finer grid does not commute exactly; check pointwise instead
    from graphflow.transport import EvolvedData

    u_r = EvolvedData(g3, vel, f, s, r)
    composed = oracle_cell_averages(g3, vel, u_r, r, t, 16)
    np.testing.assert_allclose(composed.values, direct.values, atol=1e-9)
    assert np.abs(via.values - direct.values).mean() < 0.5


def test_linearity(g2, rng):
    a, b = rng.normal(size=(2, 2, 24))
    for scheme in SCHEMES:
        ev = lambda v: evolve(g2, sinusoids(2), NetworkState(v, 0.0), 0.0, 1.3, 0.07, scheme)[0].values
        np.testing.assert_allclose(ev(2.0 * a - 3.0 * b), 2.0 * ev(a) - 3.0 * ev(b), atol=1e-10)


def test_batched_equals_single(g2, rng):
    batch = rng.normal(size=(2, 16, 3))
    out, _ = evolve(g2, sinusoids(2), NetworkState(batch), 0.0, 0.9, 0.1)
    for k in range(3):
        one, _ = evolve(g2, sinusoids(2), NetworkState(batch[..., k]), 0.0, 0.9, 0.1)
        np.testing.assert_allclose(out.values[..., k], one.values, atol=1e-14)


def compatible_ramp(vel, s):
    # continuous at the vertices at time s: f(1) = B_C(s) f(0)
    r = vel[1].eval(s) / vel[0].eval(s)
    return PolynomialData([[1.0, r - 1.0], [1.0, 1.0 / r - 1.0]])


@pytest.mark.parametrize("scheme", ["semilagrangian", "frozen-product"])
def test_grid_schemes_converge_to_oracle(g2, scheme):
    vel = sinusoids(2)
    f = compatible_ramp(vel, 0.0)
    errs = []
    for N in (50, 100, 200, 400):
        dt = 0.5 / N
        ref = oracle_cell_averages(g2, vel, f, 0.0, 1.0, N).values
        out, _ = evolve(g2, vel, f, 0.0, 1.0, dt, scheme, cells=N)
        errs.append(np.abs(out.values - ref).sum() / N)
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 0.9), (errs, orders)


def test_absorption_zero_is_bitwise_identity(g2, rng):
    state = NetworkState(rng.uniform(size=(2, 20)))
    zero = [AbsorptionProfile.zero()] * 2
    a, _ = evolve(g2, sinusoids(2), state, 0.0, 1.0, 0.05)
    b, _ = evolve_perturbed(g2, sinusoids(2), zero, state, 0.0, 1.0, 0.05)
    np.testing.assert_array_equal(a.values, b.values)


def test_uniform_absorption_scales(g3, rng):
    state = NetworkState(rng.uniform(size=(3, 20)))
    q = [AbsorptionProfile.uniform(-0.7)] * 3
    a, _ = evolve(g3, sinusoids(3), state, 0.0, 1.5, 0.05)
    b, _ = evolve_perturbed(g3, sinusoids(3), q, state, 0.0, 1.5, 0.05)
    np.testing.assert_allclose(b.values, np.exp(-0.7 * 1.5) * a.values, rtol=1e-12, atol=0)


def test_absorption_grid_profile():
    q = AbsorptionProfile.grid([0.0], [0.0, 1.0], [[0.0, -2.0]])
    assert q.time_independent
    np.testing.assert_allclose(q.eval(3.0, np.array([0.0, 0.5, 1.0])), [0.0, -1.0, -2.0])


def test_integrating_factor_oracle_matches_uniform(g2):
    f = ramp()
    q = [AbsorptionProfile.uniform(-1.0)] * 2
    a = trace_value(g2, unit(2), f, 0, 0.9, 0.0, 0.3, absorption=q)
    assert a == pytest.approx(0.8 * np.exp(-0.3))
    ref = oracle_cell_averages(g2, unit(2), f, 0.0, 0.7, 10).values
    per = oracle_perturbed_cell_averages(g2, unit(2), q, f, 0.0, 0.7, 10).values
    np.testing.assert_allclose(per, np.exp(-0.7) * ref, atol=1e-12)


def test_report_fields(g2):
    f = ramp()
    out, rep = evolve(g2, sinusoids(2), f, 0.0, 1.0, 0.1, cells=20)
    d = rep.to_dict()
    assert d["steps"] == 10 and d["scheme"] == "semilagrangian"
    assert rep.final_mass == pytest.approx(list(total_mass(out)[0]))
    assert rep.mass_drift <= 1e-13


def test_last_step_shortened(g2):
    _, rep = evolve(g2, unit(2), ramp(), 0.0, 1.05, 0.1, cells=10)
    assert rep.steps == 11


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    horizon=st.floats(0.01, 3.0),
    scheme=st.sampled_from(["semilagrangian", "frozen-product"]),
)
def test_contraction_and_positivity_property(seed, horizon, scheme):
    g = three_cycle()
    rng = np.random.default_rng(seed)
    signed = NetworkState(rng.normal(size=(3, 16)))
    out, _ = evolve(g, sinusoids(3), signed, 0.0, horizon, 0.05, scheme)
    assert out.l1_norm() <= signed.l1_norm() + 1e-10
    pos = NetworkState(rng.uniform(size=(3, 16)))
    out, rep = evolve(g, sinusoids(3), pos, 0.0, horizon, 0.05, scheme)
    assert out.values.min() >= -1e-12
    assert rep.mass_drift <= 1e-12
