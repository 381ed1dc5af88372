"""
Exact characteristic solution of the network transport problem.

Along edge j the solution is constant on characteristics
``x(tau) = x + D_j(tau, t)``. A characteristic that reaches the inflow end
x=1 at time ``tau*`` picks up the boundary value
``u_j(1, tau*) = sum_k B_C(tau*)[j, k] u_k(0, tau*)`` and continues on every
upstream edge k. Two tracers are provided:

* point plans: ``u_j(x, t) = sum w * f_k(y)`` for pointwise values;
* mass plans: ``int_a^b u_j(x, t) dx = sum w * int_{y0}^{y1} f_k``.

Mass plans are obtained by the change of variables ``x -> tau* -> y``, under
which the speed ratios in ``B_C`` cancel and only ``B`` remains. They give
exact cell averages for exactly integrable initial data, so the oracle is an
L1 contraction and conserves mass to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DepthExceeded
from ..graph import MetricGraph, velocity_adjacency
from .state import GAUSS4_NODES, GAUSS4_WEIGHTS, CellData, NetworkState, gauss_integral

PRUNE_WEIGHT = 1e-14
MAX_BRANCHES = 1_000_000
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass
class _Budget:
    count: int = 0

    def spend(self):
        self.count += 1
        if self.count > MAX_BRANCHES:
            raise DepthExceeded(f"characteristic tracing exceeded {MAX_BRANCHES} branches")


class CharacteristicTracer:
    """Backward characteristic tracing from time ``t`` to the initial time ``s``."""

    def __init__(self, graph: MetricGraph, velocities, s: float, absorption=None):
        self.graph = graph
        self.velocities = list(velocities)
        self.s = float(s)
        self.absorption = absorption
        self.B = np.asarray(graph.line_adjacency)
        self.upstream = [np.flatnonzero(self.B[j]) for j in range(graph.m)]

    # -- helpers ----------------------------------------------------------

    def _D(self, j, a, b):
        return float(self.velocities[j].displacement(a, b))

    def _tau_back(self, j, t, dist):
        if dist <= 0:
            return t
        return float(self.velocities[j].crossing_time(t, dist, "backward"))

    def _path_absorption(self, j, x_end, ta, tb):
        """``int_ta^tb q_j(tau, x_end + D_j(tau, tb)) dtau``."""
        if self.absorption is None or tb <= ta or self.absorption[j].kind == "zero":
            return 0.0
        tau = 0.5 * (tb + ta) + 0.5 * (tb - ta) * _GL_NODES
        pos = x_end + np.asarray(self.velocities[j].displacement(tau, np.full_like(tau, tb)))
        q = self.absorption[j].eval(tau, np.clip(pos, 0.0, 1.0))
        return float(0.5 * (tb - ta) * np.dot(_GL_WEIGHTS, q))

    # -- pointwise --------------------------------------------------------

    def point_plan(self, j: int, x: float, t: float):
        """List of ``(k, y, w)`` with ``u_j(x, t) = sum w * f_k(y)``."""
        out: list[tuple[int, float, float]] = []
        self._point(j, float(x), float(t), 1.0, out, _Budget())
        return out

    def _point(self, j, x, t, w, out, budget):
        budget.spend()
        if t <= self.s:
            out.append((j, x, w))
            return
        d = self._D(j, self.s, t)
        if x + d <= 1.0:
            w *= np.exp(self._path_absorption(j, x, self.s, t))
            out.append((j, min(x + d, 1.0), w))
            return
        tau = self._tau_back(j, t, 1.0 - x)
        w *= np.exp(self._path_absorption(j, x, tau, t))
        bc = velocity_adjacency(self.B, self.velocities, tau)
        for k in self.upstream[j]:
            wk = w * bc[j, k]
            if abs(wk) >= PRUNE_WEIGHT:
                self._point(k, 0.0, tau, wk, out, budget)

    # -- integrals --------------------------------------------------------

    def mass_plan(self, j: int, a: float, b: float, t: float):
        """List of ``(k, y0, y1, w)`` with ``int_a^b u_j(., t) = sum w int_y0^y1 f_k``."""
        out: list[tuple[int, float, float, float]] = []
        self._segment(j, float(a), float(b), float(t), 1.0, out, _Budget())
        return out

    def _segment(self, j, a, b, t, w, out, budget):
        budget.spend()
        if b <= a or abs(w) < PRUNE_WEIGHT:
            return
        if t <= self.s:
            out.append((j, a, b, w))
            return
        d = self._D(j, self.s, t)
        split = 1.0 - d
        if a < split:
            out.append((j, a + d, min(min(b, split) + d, 1.0), w))
        if b > split:
            lo = max(a, split)
            t_lo = self.s if lo == split else self._tau_back(j, t, 1.0 - lo)
            t_hi = self._tau_back(j, t, 1.0 - b)
            for k in self.upstream[j]:
                self._outflow(k, t_lo, t_hi, w * self.B[j, k], out, budget)

    def _outflow(self, k, t1, t2, w, out, budget):
        # mass leaving edge k through x=0 during [t1, t2]
        while t1 < t2:
            L = self._D(k, t1, t2)
            if L <= 1.0:
                self._segment(k, 0.0, L, t1, w, out, budget)
                return
            tm = float(self.velocities[k].crossing_time(t1, 1.0, "forward"))
            self._segment(k, 0.0, 1.0, t1, w, out, budget)
            t1 = tm


def _apply_mass_plans(plans, data, shape):
    """Evaluate a list of mass plans (one per output slot) against edge data."""
    rows, ks, lo, hi, w = [], [], [], [], []
    for r, plan in enumerate(plans):
        for k, y0, y1, wt in plan:
            rows.append(r)
            ks.append(k)
            lo.append(y0)
            hi.append(y1)
            w.append(wt)
    rows = np.asarray(rows, dtype=int)
    ks = np.asarray(ks, dtype=int)
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    w = np.asarray(w)
    out = np.zeros((len(plans),) + shape, dtype=np.result_type(float, _data_dtype(data)))
    for k in np.unique(ks):
        sel = ks == k
        vals = np.asarray(data.integral(int(k), lo[sel], hi[sel]))
        vals = vals * w[sel].reshape((-1,) + (1,) * (vals.ndim - 1))
        np.add.at(out, rows[sel], vals)
    return out


def _data_dtype(data):
    vals = getattr(data, "values", None)
    return vals.dtype if vals is not None else float


def _batch_shape(data):
    vals = getattr(data, "values", None)
    return tuple(vals.shape[2:]) if vals is not None else ()


class EvolvedData:
    """The exact solution ``U(t, s) f`` viewed as edge data, evaluated lazily."""

    def __init__(self, graph, velocities, initial, s, t, absorption=None):
        self.tracer = CharacteristicTracer(graph, velocities, s, absorption)
        self.initial = initial
        self.t = float(t)
        self.values = getattr(initial, "values", None)

    @property
    def m(self) -> int:
        return self.tracer.graph.m

    def value(self, j: int, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = []
        for xi in flat:
            acc = 0.0
            for k, y, w in self.tracer.point_plan(j, xi, self.t):
                acc = acc + w * self.initial.value(k, y)
            out.append(acc)
        res = np.asarray(out)
        return res.reshape(x.shape + res.shape[1:])

    def integral(self, j: int, a, b):
        if self.tracer.absorption is not None:
            return gauss_integral(lambda x: self.value(j, x), a, b, 4)
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        plans = [self.tracer.mass_plan(j, ai, bi, self.t) for ai, bi in zip(a.ravel(), b.ravel())]
        res = _apply_mass_plans(plans, self.initial, _batch_shape(self.initial))
        return res.reshape(a.shape + res.shape[1:])


def trace_value(graph, velocities, initial, j: int, x: float, s: float, t: float, absorption=None):
    """
    Exact value ``u_j(x, t)`` of the solution started from ``initial`` at time ``s``.

    With ``absorption`` the traced value is multiplied by ``exp(int q)`` along
    each characteristic branch (integrating-factor solution).
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if t < s:
        raise ValueError("need s <= t")
    tracer = CharacteristicTracer(graph, velocities, s, absorption)
    acc = 0.0
    for k, y, w in tracer.point_plan(j, x, t):
        acc = acc + w * initial.value(k, y)
    return acc


def oracle_cell_averages(graph, velocities, initial, s: float, t: float, N: int) -> NetworkState:
    """Exact cell averages of ``U(t, s) f`` for exactly integrable ``initial``."""
    if isinstance(initial, NetworkState):
        initial = CellData.from_state(initial)
    tracer = CharacteristicTracer(graph, velocities, s)
    x = np.linspace(0.0, 1.0, N + 1)
    plans = [tracer.mass_plan(j, x[i], x[i + 1], t) for j in range(graph.m) for i in range(N)]
    out = _apply_mass_plans(plans, initial, _batch_shape(initial)) * N
    return NetworkState(out.reshape((graph.m, N) + out.shape[1:]), t)


def oracle_perturbed_cell_averages(
    graph, velocities, absorption, initial, s: float, t: float, N: int
) -> NetworkState:
    """Cell averages of the integrating-factor solution, 4-point Gauss per cell."""
    if isinstance(initial, NetworkState):
        initial = CellData.from_state(initial)
    tracer = CharacteristicTracer(graph, velocities, s, absorption)
    x = np.linspace(0.0, 1.0, N + 1)
    half = 0.5 / N
    out = np.zeros((graph.m, N))
    for j in range(graph.m):
        for i in range(N):
            mid = 0.5 * (x[i] + x[i + 1])
            acc = 0.0
            for node, wq in zip(GAUSS4_NODES, GAUSS4_WEIGHTS):
                val = 0.0
                for k, y, w in tracer.point_plan(j, mid + half * node, t):
                    val += w * float(initial.value(k, y))
                acc += wq * val
            out[j, i] = 0.5 * acc
    return NetworkState(out, t)
