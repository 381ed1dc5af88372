"""
Grid steppers and the evolve drivers.

Both steppers are conservative semi-Lagrangian remaps of a piecewise-constant
state. The new cell masses are differences of the primitive
``G_j(x) = int_0^x u_j(., t)``, computed exactly from the start-of-step state:

* for ``x <= 1 - d_j`` material has not crossed a vertex:
  ``G_j(x) = F_j(x + d_j) - F_j(d_j)``;
* otherwise the characteristic entered through x=1 at ``tau(x)`` and
  ``G_j(x) = F_j(1) - F_j(d_j) + sum_k B[j, k] F_k(D_k(s, tau(x)))``.

``F_k`` is the primitive of the old state on edge k and ``d_j = D_j(s, t)``.
Evaluating the boundary coupling at each characteristic's own crossing time
is built into the substitution; the speed ratios of ``B_C(tau)`` cancel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import BoundViolation, StepTooLarge
from ..graph import MetricGraph
from ..velocity import VelocityProfile
from .oracle import oracle_cell_averages
from .state import CellData, NetworkState, total_mass

SCHEMES = ("semilagrangian", "frozen-product", "oracle")
STEP_TOL = 1e-12


@dataclass
class EvolveReport:
    scheme: str
    steps: int
    initial_mass: list
    final_mass: list
    mass_drift: float
    max_positivity_violation: float
    s: float = 0.0
    t: float = 0.0
    dt: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _advect(graph: MetricGraph, profiles, values: np.ndarray, s: float, t: float) -> np.ndarray:
    m, N = values.shape[:2]
    d = np.array([p.displacement(s, t) for p in profiles])
    if np.any(d > 1.0 + STEP_TOL):
        j = int(np.argmax(d))
        raise StepTooLarge(
            f"edge {graph.edges[j].id!r} moves {d[j]:.6g} > 1 edge length in one step"
        )
    d = np.minimum(d, 1.0)
    old = CellData(values)
    B = graph.line_adjacency
    x = np.linspace(0.0, 1.0, N + 1)
    out = np.empty_like(values, dtype=np.result_type(values.dtype, float))
    for j in range(m):
        split = 1.0 - d[j]
        inner = x <= split
        G = np.empty((N + 1,) + values.shape[2:], dtype=out.dtype)
        base = old.primitive(j, d[j])
        G[inner] = old.primitive(j, x[inner] + d[j]) - base
        cross = ~inner
        if np.any(cross):
            xc = x[cross]
            tau = np.asarray(profiles[j].crossing_time(t, 1.0 - xc, "backward"), dtype=float)
            tau = np.where(xc == 1.0, t, tau)
            acc = old.primitive(j, 1.0) - base
            acc = np.broadcast_to(acc, (len(xc),) + acc.shape).copy()
            for k in np.flatnonzero(B[j]):
                y = np.asarray(profiles[k].displacement(np.full_like(tau, s), tau), dtype=float)
                y = np.where(xc == 1.0, d[k], y)
                acc += B[j, k] * old.primitive(k, np.clip(y, 0.0, 1.0))
            G[cross] = acc
        out[j] = np.diff(G, axis=0) * N
    return out


def step_semilagrangian(graph, velocities, state: NetworkState, dt: float) -> NetworkState:
    """Advance ``state`` from its timestamp by ``dt`` with the time-dependent speeds."""
    s = state.timestamp
    vals = _advect(graph, velocities, state.values, s, s + dt)
    return NetworkState(vals, s + dt)


def frozen_profiles(velocities, s: float) -> list[VelocityProfile]:
    return [VelocityProfile.constant(float(p.eval(s))) for p in velocities]


def step_frozen(graph, velocities, state: NetworkState, s: float, dt: float) -> NetworkState:
    """
    One factor of the frozen-coefficient product: the autonomous network
    semigroup with speeds and boundary matrix held at their values at ``s``,
    applied for duration ``dt``.
    """
    frozen = frozen_profiles(velocities, s)
    vals = _advect(graph, frozen, state.values, 0.0, dt)
    return NetworkState(vals, state.timestamp + dt)


def step_times(s: float, t: float, dt: float) -> np.ndarray:
    """Grid ``s, s+dt, ...`` ending exactly at ``t`` (last step shortened)."""
    if t < s:
        raise ValueError("need s <= t")
    if t == s:
        return np.array([s])
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = max(1, math.ceil((t - s) / dt - 1e-9))
    times = s + dt * np.arange(n + 1, dtype=float)
    times[-1] = t
    return times


def _to_state(graph, initial, s, cells):
    if isinstance(initial, NetworkState):
        return NetworkState(initial.values, s)
    if cells is None:
        raise ValueError("cells per edge required for non-grid initial data")
    return NetworkState.from_data(initial, graph.m, cells, s)


def _check_bounds(velocities, s, t):
    if t > s:
        for p in velocities:
            rep = p.validate_bounds((s, t), samples=2000)
            if rep.violations or rep.observed_min <= 0:
                raise BoundViolation(
                    f"speed range {rep.observed_min:.6g}..{rep.observed_max:.6g} "
                    f"outside declared [{p.lower}, {p.upper}]"
                )


def _report(scheme, first, last, steps, s, t, dt, worst):
    m0, tot0 = total_mass(first)
    m1, tot1 = total_mass(last)
    drift = np.max(np.abs(np.asarray(tot1) - np.asarray(tot0)))
    return EvolveReport(
        scheme=scheme,
        steps=steps,
        initial_mass=np.asarray(m0).tolist(),
        final_mass=np.asarray(m1).tolist(),
        mass_drift=float(drift),
        max_positivity_violation=float(worst),
        s=float(s),
        t=float(t),
        dt=None if dt is None else float(dt),
    )


def _negativity(state: NetworkState) -> float:
    if np.iscomplexobj(state.values):
        return 0.0
    return max(0.0, -float(state.values.min()))


def evolve(
    graph: MetricGraph,
    velocities,
    initial,
    s: float,
    t: float,
    dt: float | None = None,
    scheme: str = "semilagrangian",
    cells: int | None = None,
    absorption=None,
    callback=None,
):
    """
    Approximate ``U(t, s) f``.

    Parameters
    ----------
    initial : NetworkState or edge data
        Cell averages, or anything with ``integral(j, a, b)`` (projected to
        ``cells`` cells per edge, or traced exactly by the oracle).
    scheme : {"semilagrangian", "frozen-product", "oracle"}
    absorption : list of AbsorptionProfile, optional
        Adds ``q_j u_j`` via Lie splitting (grid schemes only).
    callback : callable(state), optional
        Called with the state after every step (grid schemes).

    Returns
    -------
    state : NetworkState
    report : EvolveReport
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if t < s:
        raise ValueError("need s <= t")
    velocities = list(velocities)
    _check_bounds(velocities, s, t)

    if scheme == "oracle":
        if absorption is not None and any(a.kind != "zero" for a in absorption):
            raise ValueError("the oracle scheme does not take absorption; use evolve_perturbed")
        N = initial.cells_per_edge if isinstance(initial, NetworkState) else cells
        first = _to_state(graph, initial, s, N)
        data = CellData.from_state(initial) if isinstance(initial, NetworkState) else initial
        if t == s:
            last = NetworkState(first.values.copy(), t)
        else:
            last = oracle_cell_averages(graph, velocities, data, s, t, N)
        if callback is not None:
            callback(last)
        worst = _negativity(last) if first.is_nonnegative() else 0.0
        return last, _report(scheme, first, last, 1 if t > s else 0, s, t, dt, worst)

    state = _to_state(graph, initial, s, cells)
    first = state
    nonneg = first.is_nonnegative()
    worst = 0.0
    times = step_times(s, t, dt if dt is not None else 1.0)
    if dt is None and t > s:
        raise ValueError("grid schemes need dt")
    for a, b in zip(times[:-1], times[1:]):
        if scheme == "semilagrangian":
            vals = _advect(graph, velocities, state.values, a, b)
        else:
            vals = _advect(graph, frozen_profiles(velocities, a), state.values, 0.0, b - a)
        if absorption is not None:
            vals = _absorb(absorption, vals, a, b - a)
        state = NetworkState(vals, b)
        if nonneg:
            worst = max(worst, _negativity(state))
        if callback is not None:
            callback(state)
    return state, _report(scheme, first, state, len(times) - 1, s, t, dt, worst)


def _absorb(absorption, vals, t_left: float, dt: float) -> np.ndarray:
    N = vals.shape[1]
    xc = (np.arange(N) + 0.5) / N
    out = vals.copy()
    for j, q in enumerate(absorption):
        if q.kind == "zero":
            continue
        factor = np.exp(q.eval(t_left, xc) * dt)
        out[j] = vals[j] * factor.reshape((N,) + (1,) * (vals.ndim - 2))
    return out


def evolve_perturbed(
    graph,
    velocities,
    absorption,
    initial,
    s: float,
    t: float,
    dt: float,
    scheme: str = "semilagrangian",
    cells: int | None = None,
    callback=None,
):
    """
    Mild solution with absorption ``q_j(t, x)`` by Lie splitting.

    Each step transports first, then multiplies cell k of edge j by
    ``exp(q_j(t_left, x_k) * dt)`` with ``x_k`` the cell midpoint and
    ``t_left`` the step's start time.
    """
    if scheme == "oracle":
        raise ValueError("evolve_perturbed supports the grid schemes only")
    return evolve(
        graph, velocities, initial, s, t, dt, scheme, cells, list(absorption), callback
    )
