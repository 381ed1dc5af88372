"""Network states and exactly integrable initial data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

NONNEG_TOL = 1e-12

GAUSS4_NODES, GAUSS4_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass
class NetworkState:
    """
    Cell averages of ``u`` on every edge at one instant.

    ``values`` has shape ``(m, N)`` or ``(m, N, *batch)``; a trailing batch
    axis carries several independent states through the same linear
    evolution. Cell ``k`` covers ``[k/N, (k+1)/N)``.
    """

    values: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim < 2:
            raise ValueError("state values must have shape (m, N, ...)")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def cells_per_edge(self) -> int:
        return self.values.shape[1]

    @property
    def centers(self) -> np.ndarray:
        N = self.cells_per_edge
        return (np.arange(N) + 0.5) / N

    def l1_norm(self):
        return np.abs(self.values).sum(axis=(0, 1)) / self.cells_per_edge

    def is_nonnegative(self, tol: float = NONNEG_TOL) -> bool:
        return not np.iscomplexobj(self.values) and bool(np.all(self.values >= -tol))

    @classmethod
    def zeros(cls, m: int, N: int, timestamp: float = 0.0) -> NetworkState:
        return cls(np.zeros((m, N)), timestamp)

    @classmethod
    def from_data(cls, data, m: int, N: int, timestamp: float = 0.0) -> NetworkState:
        """Exact cell averages of edge data (anything with ``integral(j, a, b)``)."""
        x = np.linspace(0.0, 1.0, N + 1)
        vals = np.stack([np.asarray(data.integral(j, x[:-1], x[1:])) * N for j in range(m)])
        return cls(vals, timestamp)


def total_mass(state: NetworkState):
    """Per-edge masses ``(1/N) sum_k values[j, k]`` and their total."""
    per_edge = state.values.sum(axis=1) / state.cells_per_edge
    return per_edge, per_edge.sum(axis=0)


def l1_norm(state: NetworkState):
    return state.l1_norm()


# -- edge data ---------------------------------------------------------------
#
# Edge data objects describe a function on the network by two methods:
#   value(j, x)        pointwise values on edge j (vectorised in x)
#   integral(j, a, b)  exact integral over [a, b] on edge j (vectorised)
# Trailing batch axes, if any, follow the shape of x / a.


class PolynomialData:
    """One polynomial per edge, coefficients in increasing degree."""

    def __init__(self, coefficients):
        self.polys = [Polynomial(np.asarray(c, dtype=float)) for c in coefficients]
        self._antider = [p.integ() for p in self.polys]

    @property
    def m(self) -> int:
        return len(self.polys)

    def value(self, j: int, x):
        return self.polys[j](np.asarray(x, dtype=float))

    def integral(self, j: int, a, b):
        F = self._antider[j]
        return F(np.asarray(b, dtype=float)) - F(np.asarray(a, dtype=float))


class CellData:
    """Piecewise-constant function given by cell averages (possibly batched)."""

    def __init__(self, values):
        self.values = np.asarray(values)
        self.N = self.values.shape[1]
        z = np.zeros((self.values.shape[0], 1) + self.values.shape[2:], dtype=self.values.dtype)
        self.cum = np.concatenate([z, np.cumsum(self.values, axis=1)], axis=1) / self.N

    @classmethod
    def from_state(cls, state: NetworkState) -> CellData:
        return cls(state.values)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def _index(self, x):
        return np.clip(np.floor(x * self.N).astype(int), 0, self.N - 1)

    def value(self, j: int, x):
        x = np.asarray(x, dtype=float)
        return self.values[j][self._index(x)]

    def primitive(self, j: int, y):
        """``int_0^y`` on edge j, exact for the piecewise-constant function."""
        y = np.asarray(y, dtype=float)
        idx = self._index(y)
        frac = y - idx / self.N
        vals = self.values[j][idx]
        frac = frac.reshape(frac.shape + (1,) * (vals.ndim - frac.ndim))
        return self.cum[j][idx] + frac * vals

    def integral(self, j: int, a, b):
        return self.primitive(j, b) - self.primitive(j, a)


class FunctionData:
    """Wrap a callable ``f(j, x)``; integrals by composite 4-point Gauss."""

    def __init__(self, fn, m: int, panels: int = 64):
        self.fn = fn
        self._m = m
        self.panels = panels

    @property
    def m(self) -> int:
        return self._m

    def value(self, j: int, x):
        return self.fn(j, np.asarray(x, dtype=float))

    def integral(self, j: int, a, b):
        return gauss_integral(lambda x: self.value(j, x), a, b, self.panels)


def gauss_integral(fn, a, b, panels: int = 1):
    """Composite 4-point Gauss-Legendre on ``[a, b]`` (vectorised over a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    edges = a[..., None] + (b - a)[..., None] * np.linspace(0.0, 1.0, panels + 1)
    lo, hi = edges[..., :-1], edges[..., 1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[..., None] + half[..., None] * GAUSS4_NODES
    vals = fn(x)
    return np.sum(vals * (half[..., None] * GAUSS4_WEIGHTS), axis=(-1, -2))
