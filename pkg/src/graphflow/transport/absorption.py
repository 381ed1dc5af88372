"""Per-edge absorption (or source) rates ``q_j(t, x)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import BoundViolation

_KINDS = ("zero", "uniform", "grid", "function")


@dataclass(frozen=True)
class AbsorptionProfile:
    """
    Rate field for one edge.

    kinds
      zero      q = 0
      uniform   q(t) = base + amp * sin(omega * t + phase), constant in x
      grid      bilinear interpolation of samples on a (times, xs) grid,
                clamped outside; a single time row means time-independent
      function  any vectorised callable ``q(t, x)`` with a declared bound
    """

    kind: str
    params: dict = field(compare=False, default_factory=dict)
    bound: float = 0.0
    period: float | None = None

    @classmethod
    def zero(cls) -> AbsorptionProfile:
        return cls("zero")

    @classmethod
    def uniform(cls, base: float, amp: float = 0.0, omega: float = 0.0, phase: float = 0.0):
        base, amp, omega, phase = map(float, (base, amp, omega, phase))
        period = 2 * math.pi / abs(omega) if omega != 0 and amp != 0 else None
        params = {"base": base, "amp": amp, "omega": omega, "phase": phase}
        return cls("uniform", params, abs(base) + abs(amp), period)

    @classmethod
    def grid(cls, times, xs, values, period=None) -> AbsorptionProfile:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float).reshape(len(times), len(xs))
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(times) <= 0):
            raise ValueError("grid coordinates must be strictly increasing")
        params = {"times": times, "xs": xs, "values": values}
        return cls("grid", params, float(np.abs(values).max()), period)

    @classmethod
    def function(cls, fn, bound: float, period=None, time_independent=False):
        params = {"fn": fn, "time_independent": time_independent}
        return cls("function", params, float(bound), period)

    @property
    def time_independent(self) -> bool:
        p = self.params
        if self.kind == "zero":
            return True
        if self.kind == "uniform":
            return p["amp"] == 0 or p["omega"] == 0
        if self.kind == "grid":
            return len(p["times"]) == 1
        return bool(p["time_independent"])

    def compatible_with_period(self, T: float, tol: float = 1e-9) -> bool:
        if self.time_independent:
            return True
        if self.period is None:
            return False
        ratio = T / self.period
        return ratio >= 1 - tol and abs(ratio - round(ratio)) <= tol * max(1.0, ratio)

    def eval(self, t, x):
        """Vectorised ``q(t, x)``; ``t`` and ``x`` broadcast against each other."""
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        p = self.params
        if self.kind == "zero":
            return np.zeros(t.shape)
        if self.kind == "uniform":
            return p["base"] + p["amp"] * np.sin(p["omega"] * t + p["phase"])
        if self.kind == "function":
            out = np.asarray(p["fn"](t, x), dtype=float)
            if np.any(np.abs(out) > self.bound + 1e-12):
                raise BoundViolation(f"absorption exceeds declared bound {self.bound}")
            return np.broadcast_to(out, t.shape)
        times, xs, vals = p["times"], p["xs"], p["values"]
        if self.period is not None:
            t = times[0] + np.mod(t - times[0], self.period)
        if len(times) == 1:
            return np.interp(x, xs, vals[0])
        i = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2)
        wt = np.clip((t - times[i]) / (times[i + 1] - times[i]), 0.0, 1.0)
        k = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
        wx = np.clip((x - xs[k]) / (xs[k + 1] - xs[k]), 0.0, 1.0)
        lower = vals[i, k] * (1 - wx) + vals[i, k + 1] * wx
        upper = vals[i + 1, k] * (1 - wx) + vals[i + 1, k + 1] * wx
        return lower * (1 - wt) + upper * wt


def zero_absorption(m: int) -> list[AbsorptionProfile]:
    return [AbsorptionProfile.zero() for _ in range(m)]
