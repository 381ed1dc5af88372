"""Differentiable edge functions and the generator ``A(s) = diag(c_j(s) d/dx)``."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from ..graph import velocity_adjacency
from ..transport.state import gauss_integral


class SmoothEdgeFunction:
    """
    A W^{1,1} function on the network.

    Two representations:

    * ``poly``: one numpy polynomial series per edge (power or Chebyshev
      basis); derivatives are exact.
    * ``grid``: values at ``N + 1`` equispaced nodes, linear in between;
      derivatives by central differences with ``h = 1/N`` (second-order
      one-sided at the ends).
    """

    def __init__(self, kind: str, data):
        if kind not in ("poly", "grid"):
            raise ValueError(f"unknown kind {kind!r}")
        self.kind = kind
        if kind == "poly":
            self.series = list(data)
        else:
            self.nodes = np.asarray(data)
            if self.nodes.ndim != 2 or self.nodes.shape[1] < 3:
                raise ValueError("grid data must have shape (m, N+1) with N >= 2")

    @classmethod
    def polynomial(cls, coefficients) -> SmoothEdgeFunction:
        return cls("poly", [Polynomial(np.asarray(c)) for c in coefficients])

    @classmethod
    def from_callable(cls, fn, m: int, degree: int = 48) -> SmoothEdgeFunction:
        """Chebyshev interpolant of ``fn(j, x)`` on each edge."""
        series = []
        for j in range(m):
            series.append(Chebyshev.interpolate(lambda x, j=j: fn(j, x), degree, domain=[0, 1]))
        return cls("poly", series)

    @classmethod
    def from_grid(cls, values) -> SmoothEdgeFunction:
        return cls("grid", values)

    @property
    def m(self) -> int:
        return len(self.series) if self.kind == "poly" else self.nodes.shape[0]

    def value(self, j: int, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "poly":
            return self.series[j](x)
        N = self.nodes.shape[1] - 1
        grid = np.linspace(0.0, 1.0, N + 1)
        row = self.nodes[j]
        if np.iscomplexobj(row):
            return np.interp(x, grid, row.real) + 1j * np.interp(x, grid, row.imag)
        return np.interp(x, grid, row)

    def derivative(self, j: int, x=None):
        """Derivative on edge j at ``x`` (poly) or at the grid nodes (grid)."""
        if self.kind == "poly":
            return self.series[j].deriv()(np.asarray(x, dtype=float))
        N = self.nodes.shape[1] - 1
        d = np.gradient(self.nodes[j], 1.0 / N, edge_order=2)
        if x is None:
            return d
        grid = np.linspace(0.0, 1.0, N + 1)
        if np.iscomplexobj(d):
            return np.interp(x, grid, d.real) + 1j * np.interp(x, grid, d.imag)
        return np.interp(x, grid, d)

    def integral(self, j: int, a, b):
        if self.kind == "poly":
            F = self.series[j].integ()
            return F(np.asarray(b, float)) - F(np.asarray(a, float))
        return gauss_integral(lambda x: self.value(j, x), a, b, 8)

    def endpoints(self):
        """``(v(0), v(1))`` as length-m arrays."""
        v0 = np.array([self.value(j, 0.0) for j in range(self.m)])
        v1 = np.array([self.value(j, 1.0) for j in range(self.m)])
        return v0, v1

    def scaled(self, factors) -> SmoothEdgeFunction:
        if self.kind == "poly":
            return SmoothEdgeFunction("poly", [f * s for f, s in zip(factors, self.series)])
        return SmoothEdgeFunction("grid", self.nodes * np.asarray(factors)[:, None])


def boundary_residual(graph, velocities, v, s: float) -> float:
    """``max |v(1) - B_C(s) v(0)|``; zero exactly when ``v`` is in the domain of A(s)."""
    v0, v1 = v.endpoints()
    bc = velocity_adjacency(graph.line_adjacency, velocities, s)
    return float(np.max(np.abs(v1 - bc @ v0)))


def generator_apply(graph, velocities, v: SmoothEdgeFunction, s: float):
    """
    Apply ``A(s)`` to ``v``.

    Returns
    -------
    Av : SmoothEdgeFunction
        ``(c_j(s) v_j')_j`` in the representation of ``v``.
    residual : float
        Domain residual ``max |v(1) - B_C(s) v(0)|``.
    """
    c = np.array([float(p.eval(s)) for p in velocities])
    if v.kind == "poly":
        Av = SmoothEdgeFunction("poly", [c[j] * v.series[j].deriv() for j in range(v.m)])
    else:
        Av = SmoothEdgeFunction("grid", np.stack([c[j] * v.derivative(j) for j in range(v.m)]))
    return Av, boundary_residual(graph, velocities, v, s)


def l1_distance(u, v, m: int, panels: int = 256) -> float:
    """``sum_j int_0^1 |u_j - v_j|`` by composite Gauss quadrature."""
    total = 0.0
    for j in range(m):
        total += float(gauss_integral(lambda x: np.abs(u.value(j, x) - v.value(j, x)), 0.0, 1.0, panels))
    return total


def l1_norm(u, m: int, panels: int = 256) -> float:
    total = 0.0
    for j in range(m):
        total += float(gauss_integral(lambda x: np.abs(u.value(j, x)), 0.0, 1.0, panels))
    return total
