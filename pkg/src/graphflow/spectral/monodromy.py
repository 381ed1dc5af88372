"""Period maps of periodic networks and their stability diagnostics."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import NoConvergence, NotPeriodic
from ..transport.state import NetworkState
from ..transport.stepping import evolve

MAX_DENSE = 10_000
CHUNK = 512
# radii within this of 1 are treated as 1 when issuing the stability verdict
VERDICT_TOL = 1e-8


@dataclass
class MonodromyApprox:
    """
    Discretised period map ``U(t0 + T, t0)``.

    ``matrix`` acts on vectors of cell masses, ordered edge-major
    (index ``j * N + k``). Column ``c`` is the image of a unit-mass indicator
    of cell ``c``.
    """

    period: float
    t0: float
    cells_per_edge: int
    matrix: np.ndarray
    scheme: str
    dt: float

    def column_norms(self) -> np.ndarray:
        return np.abs(self.matrix).sum(axis=0)

    def to_csv_rows(self, threshold: float = 1e-14):
        rows, cols = np.nonzero(np.abs(self.matrix) > threshold)
        return [(int(r), int(c), float(self.matrix[r, c])) for r, c in zip(rows, cols)]


def default_workers() -> int:
    raw = os.environ.get("GRAPHFLOW_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def monodromy_assemble(
    graph,
    velocities,
    T: float,
    t0: float = 0.0,
    cells: int = 50,
    dt: float | None = None,
    scheme: str = "semilagrangian",
    absorption=None,
    workers: int | None = None,
) -> MonodromyApprox:
    """
    Assemble the period map column by column.

    Columns are computed in chunks, each chunk an independent batched
    evolution, so the result does not depend on the worker count.

    Raises
    ------
    NotPeriodic
        If a velocity (or absorption) profile is not T-periodic.
    """
    for e, p in zip(graph.edges, velocities):
        if not p.compatible_with_period(T):
            raise NotPeriodic(f"velocity on edge {e.id!r} is not {T}-periodic")
    if absorption is not None:
        for e, q in zip(graph.edges, absorption):
            if not q.compatible_with_period(T):
                raise NotPeriodic(f"absorption on edge {e.id!r} is not {T}-periodic")
    m, N = graph.m, cells
    size = m * N
    if size > MAX_DENSE:
        raise ValueError(f"dense assembly limited to m*N <= {MAX_DENSE}, got {size}")
    if scheme != "oracle" and dt is None:
        raise ValueError("grid schemes need dt")

    def run(cols: range) -> np.ndarray:
        basis = np.zeros((m, N, len(cols)))
        for b, c in enumerate(cols):
            basis[c // N, c % N, b] = N  # unit mass
        state = NetworkState(basis, t0)
        out, _ = evolve(graph, velocities, state, t0, t0 + T, dt, scheme, absorption=absorption)
        return out.values.reshape(size, len(cols)) / N

    chunks = [range(a, min(a + CHUNK, size)) for a in range(0, size, CHUNK)]
    workers = default_workers() if workers is None else max(1, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    M = np.concatenate(parts, axis=1)
    return MonodromyApprox(float(T), float(t0), N, M, scheme, float(dt) if dt else 0.0)


@dataclass
class StabilityReport:
    radius: float
    omega0: float  # math.inf when the radius vanishes
    iterations: int
    residual: float
    period: float

    @property
    def exponentially_stable(self) -> bool:
        return self.radius < 1.0 - VERDICT_TOL

    @property
    def verdict(self) -> str:
        return "exponentially stable" if self.exponentially_stable else "not exponentially stable"

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "omega0": None if math.isinf(self.omega0) else self.omega0,
            "omega0_infinite": math.isinf(self.omega0),
            "iterations": self.iterations,
            "residual": self.residual,
            "period": self.period,
            "verdict": self.verdict,
        }


def spectral_radius(
    M,
    period: float | None = None,
    max_iter: int = 500,
    tol: float = 1e-10,
    start=None,
    seed: int = 0,
) -> StabilityReport:
    """
    Perron root of a nonnegative matrix by power iteration.

    The growth factor is measured in the l1 norm, ``||M x||_1 / ||x||_1``
    for a positive iterate ``x``; for column-stochastic blocks this is exact
    from the first step, which keeps periodic (cyclic) structures from
    stalling the iteration.
    """
    if isinstance(M, MonodromyApprox):
        period = M.period if period is None else period
        M = M.matrix
    M = np.asarray(M, dtype=float)
    if period is None:
        raise ValueError("period required")
    x = np.random.default_rng(seed).uniform(0.5, 1.5, M.shape[0]) if start is None else np.asarray(start, float)
    if np.any(x <= 0):
        raise ValueError("start vector must be positive")
    x = x / x.sum()
    prev = None
    ratios = []
    for it in range(1, max_iter + 1):
        y = M @ x
        norm = np.abs(y).sum()
        if norm == 0.0:
            return StabilityReport(0.0, math.inf, it, 0.0, float(period))
        rho = float(norm)  # ||x||_1 = 1
        ratios.append(rho)
        residual = float(np.abs(y / rho - x).sum())
        x = y / norm
        if prev is not None and abs(rho - prev) <= tol * rho:
            return StabilityReport(rho, -math.log(rho) / period, it, residual, float(period))
        prev = rho
    spread = float(max(ratios[-10:]) - min(ratios[-10:]))
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps", spread)


def growth_rate_fit(horizons, norms) -> float:
    """Least-squares slope of ``log ||U(t, s) f||`` against ``t - s``."""
    h = np.asarray(horizons, dtype=float)
    y = np.log(np.asarray(norms, dtype=float))
    if len(h) < 10:
        raise ValueError("need at least 10 sample horizons")
    if np.any(~np.isfinite(y)):
        raise ValueError("norms must be positive")
    slope, _ = np.polyfit(h, y, 1)
    return float(slope)


def growth_bound_fit(
    graph,
    velocities,
    initial,
    s: float,
    horizons,
    dt: float,
    absorption=None,
    scheme: str = "semilagrangian",
    cells: int | None = None,
) -> float:
    """Evolve ``initial`` through increasing ``horizons`` and fit the exponential rate."""
    horizons = np.sort(np.asarray(horizons, dtype=float))
    if isinstance(initial, NetworkState):
        state = NetworkState(initial.values, s)
    else:
        state = NetworkState.from_data(initial, graph.m, cells, s)
    norms = []
    now = s
    for h in horizons:
        if s + h > now:
            state, _ = evolve(graph, velocities, state, now, s + h, dt, scheme, absorption=absorption)
            now = s + h
        norms.append(float(state.l1_norm()))
    return growth_rate_fit(horizons, norms)
