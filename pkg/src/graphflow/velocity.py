"""
Time-dependent edge velocities.

A :class:`VelocityProfile` is an immutable description of ``c(t)`` for one
edge. Everything the solvers need is derived from the antiderivative, so each
kind provides a closed-form primitive ``G`` and the displacement
``D(s, t) = G(t) - G(s)``. Piecewise-constant profiles are right-continuous
at their breakpoints.

All evaluation methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundViolation, ReversedInterval

BOUND_TOL = 1e-12
PERIOD_TOL = 1e-10
BOUNDS_SAMPLES = 10_000
_KINDS = ("constant", "piecewise", "sinusoid", "sampled")


@dataclass(frozen=True)
class VelocityProfile:
    kind: str
    params: dict = field(compare=False)
    lower: float
    upper: float
    period: float | None = None

    # constructors -----------------------------------------------------

    @classmethod
    def constant(cls, value: float, lower=None, upper=None) -> VelocityProfile:
        value = float(value)
        return cls._make("constant", {"value": value}, lower, upper, None, value, value)

    @classmethod
    def sinusoid(
        cls, base: float, amp: float, omega: float = 1.0, phase: float = 0.0, lower=None, upper=None
    ) -> VelocityProfile:
        """``c(t) = base + amp * sin(omega * t + phase)``; period ``2 pi / omega``."""
        base, amp, omega, phase = map(float, (base, amp, omega, phase))
        period = 2 * math.pi / abs(omega) if omega != 0 else None
        return cls._make(
            "sinusoid",
            {"base": base, "amp": amp, "omega": omega, "phase": phase},
            lower,
            upper,
            period,
            base - abs(amp),
            base + abs(amp),
        )

    @classmethod
    def piecewise(cls, times, values, period=None, lower=None, upper=None) -> VelocityProfile:
        """``values[i]`` on ``[times[i], times[i+1])``; the first value also covers
        ``t < times[0]``. With ``period`` the pattern on
        ``[times[0], times[0] + period)`` repeats."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) == 0:
            raise ValueError("piecewise profile needs matching 1-d times and values")
        if np.any(np.diff(times) <= 0):
            raise ValueError("piecewise breakpoints must be strictly increasing")
        if period is not None and times[-1] >= times[0] + period:
            raise ValueError("breakpoints must lie within one period")
        knots = np.append(times, times[0] + period) if period is not None else times
        cum = np.concatenate([[0.0], np.cumsum(values[: len(knots) - 1] * np.diff(knots))])
        params = {"times": times, "values": values, "knots": knots, "cum": cum}
        return cls._make("piecewise", params, lower, upper, period, values.min(), values.max())

    @classmethod
    def sampled(cls, times, values, period=None, lower=None, upper=None) -> VelocityProfile:
        """Linear interpolation between samples, constant beyond the ends.

        With ``period`` the samples must span less than one period; the
        interpolant wraps from the last sample back to the first.
        """
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("sampled profile needs at least two matching samples")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if period is not None:
            if times[-1] >= times[0] + period:
                raise ValueError("samples must lie within one period")
            times = np.append(times, times[0] + period)
            values = np.append(values, values[0])
        seg = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        params = {"times": times, "values": values, "cum": cum}
        return cls._make("sampled", params, lower, upper, period, values.min(), values.max())

    @classmethod
    def _make(cls, kind, params, lower, upper, period, lo, hi):
        lower = float(lo) if lower is None else float(lower)
        upper = float(hi) if upper is None else float(upper)
        if upper < lower:
            raise ValueError(f"upper bound {upper} below lower bound {lower}")
        if period is not None and period <= 0:
            raise ValueError("period must be positive")
        return cls(kind, params, lower, upper, None if period is None else float(period))

    @property
    def smooth(self) -> bool:
        """Whether the profile is C^1 in time (needed for the constant-domain route)."""
        return self.kind in ("constant", "sinusoid")

    # evaluation -------------------------------------------------------

    def _wrap(self, t):
        """Reduce ``t`` into the base period; returns (reduced t, number of periods)."""
        t0 = self.params["times"][0]
        k = np.floor((t - t0) / self.period)
        return t - k * self.period, k

    def raw(self, t):
        """``c(t)`` without the bounds check."""
        p = self.params
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full_like(t, p["value"])
        elif self.kind == "sinusoid":
            out = p["base"] + p["amp"] * np.sin(p["omega"] * t + p["phase"])
        elif self.kind == "piecewise":
            if self.period is not None:
                t, _ = self._wrap(t)
            idx = np.clip(np.searchsorted(p["times"], t, side="right") - 1, 0, None)
            out = p["values"][idx]
        else:
            if self.period is not None:
                t, _ = self._wrap(t)
            out = np.interp(t, p["times"], p["values"])
        return out if out.ndim else float(out)

    def eval(self, t):
        """Speed at time ``t``; raises BoundViolation outside ``[lower, upper]``."""
        c = self.raw(t)
        arr = np.asarray(c)
        if np.any(arr < self.lower - BOUND_TOL) or np.any(arr > self.upper + BOUND_TOL):
            raise BoundViolation(
                f"speed {arr.min():.6g}..{arr.max():.6g} outside [{self.lower}, {self.upper}]"
            )
        return c

    def primitive(self, t):
        """An antiderivative ``G`` with ``G' = c`` (reference point is kind-specific)."""
        p = self.params
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return p["value"] * t
        if self.kind == "sinusoid":
            if p["omega"] == 0:
                return (p["base"] + p["amp"] * math.sin(p["phase"])) * t
            return p["base"] * t - p["amp"] / p["omega"] * np.cos(p["omega"] * t + p["phase"])
        k = 0.0
        if self.period is not None:
            t, k = self._wrap(t)
        times, cum = p["times"] if self.kind == "sampled" else p["knots"], p["cum"]
        if self.kind == "piecewise":
            vals = p["values"]
            idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(vals) - 1)
            g = cum[idx] + vals[idx] * (t - times[idx])
        else:
            vals = p["values"]
            last = len(times) - 1
            idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, last - 1)
            tau = t - times[idx]
            h = times[idx + 1] - times[idx]
            slope = (vals[idx + 1] - vals[idx]) / h
            inside = cum[idx] + vals[idx] * tau + 0.5 * slope * tau**2
            before = vals[0] * (t - times[0])
            after = cum[last] + vals[last] * (t - times[last])
            g = np.where(t < times[0], before, np.where(t > times[last], after, inside))
        return g + k * cum[-1]

    def displacement(self, s, t):
        """Distance ``D(s, t) = int_s^t c`` travelled between times ``s <= t``."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(t < s):
            raise ReversedInterval(f"displacement needs s <= t (got s={s}, t={t})")
        p = self.params
        if self.kind == "constant":
            d = p["value"] * (t - s)
        elif self.kind == "sinusoid" and p["omega"] != 0:
            w, ph = p["omega"], p["phase"]
            # cos(a) - cos(b) written as a product to avoid cancellation
            d = p["base"] * (t - s) + 2 * p["amp"] / w * np.sin(
                0.5 * w * (t + s) + ph
            ) * np.sin(0.5 * w * (t - s))
        else:
            d = self.primitive(t) - self.primitive(s)
        d = np.where(t == s, 0.0, d)
        return d if d.ndim else float(d)

    def crossing_time(self, s, d, direction: str = "forward"):
        """
        Invert the displacement.

        forward: the ``t >= s`` with ``D(s, t) = d``; backward: the ``r <= s``
        with ``D(r, s) = d``. ``d = 0`` returns ``s`` exactly. Vectorised over
        ``s`` and ``d``.
        """
        s_arr, d_arr = np.broadcast_arrays(np.asarray(s, float), np.asarray(d, float))
        if np.any(d_arr < 0):
            raise ValueError("crossing distance must be nonnegative")
        sign = 1.0 if direction == "forward" else -1.0
        if direction not in ("forward", "backward"):
            raise ValueError(f"unknown direction {direction!r}")
        if self.kind == "constant":
            out = s_arr + sign * d_arr / self.params["value"]
        else:
            out = _invert(self, s_arr, d_arr, sign)
        out = np.where(d_arr == 0, s_arr, out)
        return out if out.ndim else float(out)

    # diagnostics ------------------------------------------------------

    def validate_bounds(self, window: tuple[float, float], samples: int = BOUNDS_SAMPLES):
        ta, tb = window
        if not ta < tb:
            raise ValueError("window must satisfy t_a < t_b")
        ts = np.linspace(ta, tb, samples)
        c = np.asarray(self.raw(ts))
        lo, hi = float(c.min()), float(c.max())
        bad = int(np.count_nonzero((c < self.lower - BOUND_TOL) | (c > self.upper + BOUND_TOL)))
        period_dev = None
        if self.period is not None:
            period_dev = float(np.max(np.abs(np.asarray(self.raw(ts + self.period)) - c)))
        ok = bad == 0 and lo > 0 and (period_dev is None or period_dev <= PERIOD_TOL)
        return BoundsReport(ok, lo, hi, self.lower, self.upper, bad, period_dev)

    def compatible_with_period(self, T: float, tol: float = 1e-9) -> bool:
        """True when ``c(t + T) = c(t)`` holds structurally."""
        if self.kind == "constant":
            return True
        if self.kind == "sinusoid" and self.params["omega"] == 0:
            return True
        if self.period is None:
            return False
        ratio = T / self.period
        return ratio >= 1 - tol and abs(ratio - round(ratio)) <= tol * max(1.0, ratio)


@dataclass
class BoundsReport:
    ok: bool
    observed_min: float
    observed_max: float
    lower: float
    upper: float
    violations: int
    period_deviation: float | None = None


def _invert(profile: VelocityProfile, s, d, sign, max_iter: int = 200):
    """Safeguarded Newton on the monotone displacement, vectorised."""
    lo_speed = profile.lower if profile.lower > 0 else 1e-6
    hi_speed = max(profile.upper, lo_speed)
    G = profile.primitive
    target = G(s) + sign * d
    # bracket [a, b] with G(a) <= target <= G(b)
    if sign > 0:
        a, b = s + d / hi_speed, s + d / lo_speed
    else:
        a, b = s - d / lo_speed, s - d / hi_speed
    a = np.array(a, dtype=float, copy=True)
    b = np.array(b, dtype=float, copy=True)
    for _ in range(60):
        fa, fb = G(a) - target, G(b) - target
        grow = (fa > 0) | (fb < 0)
        if not np.any(grow):
            break
        width = np.maximum(b - a, 1.0)
        a = np.where(fa > 0, a - width, a)
        b = np.where(fb < 0, b + width, b)
    tol = 1e-13 * np.maximum(1.0, d)
    x = 0.5 * (a + b)
    for _ in range(max_iter):
        f = G(x) - target
        done = np.abs(f) <= tol
        if np.all(done):
            break
        a = np.where(f < 0, x, a)
        b = np.where(f > 0, x, b)
        c = np.asarray(profile.raw(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x - f / c
        ok = (newton > a) & (newton < b) & np.isfinite(newton)
        x = np.where(done, x, np.where(ok, newton, 0.5 * (a + b)))
        if np.all(b - a <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(x))):
            break
    return x
