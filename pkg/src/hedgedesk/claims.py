"""European claim payoffs: vanillas, digitals, quadratic and log forwards,
piecewise-linear customs, constants, and scalar multiples.

Claims evaluate vectorized on underlying levels and expose their kink and
jump points so the hedging LPs can place dominance constraints exactly.
The JSON encoding here is the wire format used by the CLI and service.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedClaim

DEFAULT_INTERVAL = (100.0, 5000.0)


class ClaimSpec:
    """Payoff of a European claim as a function of the terminal level."""

    def payoff(self, x):
        raise NotImplementedError

    def kinks(self):
        """Levels where the payoff is continuous but not differentiable."""
        return ()

    def jumps(self):
        """Levels where the payoff is discontinuous."""
        return ()

    def bl_parts(self):
        """Static-replication decomposition (value_at_zero, slope_at_zero,
        point masses of the slope measure, density of its continuous part).

        Raises UnsupportedClaim when the payoff is not a difference of convex
        functions with finite value at zero.
        """
        raise UnsupportedClaim(f"{type(self).__name__} has no call-spectrum decomposition")

    def __neg__(self):
        return ScaledClaim(-1.0, self)

    def __mul__(self, factor):
        return ScaledClaim(float(factor), self)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CallClaim(ClaimSpec):
    strike: float

    def __post_init__(self):
        if self.strike <= 0:
            raise DomainError("strike must be positive")

    def payoff(self, x):
        return np.maximum(np.asarray(x, dtype=float) - self.strike, 0.0)

    def kinks(self):
        return (self.strike,)

    def bl_parts(self):
        return 0.0, 0.0, ((self.strike, 1.0),), None

    def to_json(self):
        return {"kind": "call", "strike": self.strike}


@dataclass(frozen=True)
class PutClaim(ClaimSpec):
    strike: float

    def __post_init__(self):
        if self.strike <= 0:
            raise DomainError("strike must be positive")

    def payoff(self, x):
        return np.maximum(self.strike - np.asarray(x, dtype=float), 0.0)

    def kinks(self):
        return (self.strike,)

    def bl_parts(self):
        # (K - X)^+ = K - X + (X - K)^+
        return self.strike, -1.0, ((self.strike, 1.0),), None

    def to_json(self):
        return {"kind": "put", "strike": self.strike}


@dataclass(frozen=True)
class DigitalClaim(ClaimSpec):
    """Pays ``amount`` when the level finishes at or above the strike."""

    strike: float
    amount: float

    def __post_init__(self):
        if self.strike <= 0:
            raise DomainError("strike must be positive")

    def payoff(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.strike, self.amount, 0.0)

    def jumps(self):
        return (self.strike,)

    def bl_parts(self):
        raise UnsupportedClaim(
            "digital payoff is not a difference of convex functions; "
            "its slope measure is a dipole at the strike"
        )

    def to_json(self):
        return {"kind": "digital", "strike": self.strike, "amount": self.amount}


@dataclass(frozen=True)
class QuadraticForward(ClaimSpec):
    strike: float

    def __post_init__(self):
        if self.strike <= 0:
            raise DomainError("strike must be positive")

    def payoff(self, x):
        d = np.asarray(x, dtype=float) - self.strike
        return d * d

    def bl_parts(self):
        return self.strike**2, -2.0 * self.strike, (), lambda k: 2.0 * np.ones_like(k)

    def to_json(self):
        return {"kind": "quadratic_forward", "strike": self.strike}


@dataclass(frozen=True)
class LogForward(ClaimSpec):
    """Pays ``scale * ln(strike / X_T)``; unbounded as the level falls to zero."""

    strike: float
    scale: float

    def __post_init__(self):
        if self.strike <= 0:
            raise DomainError("strike must be positive")

    def payoff(self, x):
        return self.scale * np.log(self.strike / np.asarray(x, dtype=float))

    def bl_parts(self):
        raise UnsupportedClaim("log payoff diverges at zero; no finite call-spectrum anchor")

    def to_json(self):
        return {"kind": "log_forward", "strike": self.strike, "scale": self.scale}


@dataclass(frozen=True)
class PiecewiseLinearClaim(ClaimSpec):
    """Linear interpolation through breakpoints, held flat beyond the ends."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(bps) != len(vals) or len(bps) < 2:
            raise DomainError("need matching breakpoints/values, at least two")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")

    def payoff(self, x):
        return np.interp(np.asarray(x, dtype=float), self.breakpoints, self.values)

    def kinks(self):
        return self.breakpoints

    def bl_parts(self):
        bps = np.asarray(self.breakpoints)
        vals = np.asarray(self.values)
        slopes = np.diff(vals) / np.diff(bps)
        # flat extension: slope steps up from 0 at the first breakpoint and
        # back to 0 after the last
        atoms = [(float(bps[0]), float(slopes[0]))]
        for i in range(1, len(slopes)):
            atoms.append((float(bps[i]), float(slopes[i] - slopes[i - 1])))
        atoms.append((float(bps[-1]), float(-slopes[-1])))
        atoms = tuple((k, m) for k, m in atoms if m != 0.0)
        return float(vals[0]), 0.0, atoms, None

    def to_json(self):
        return {
            "kind": "piecewise_linear",
            "breakpoints": list(self.breakpoints),
            "values": list(self.values),
        }


@dataclass(frozen=True)
class ConstantClaim(ClaimSpec):
    value: float

    def payoff(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)

    def bl_parts(self):
        return self.value, 0.0, (), None

    def to_json(self):
        return {"kind": "constant", "value": self.value}


ZERO_CLAIM = ConstantClaim(0.0)


@dataclass(frozen=True)
class ScaledClaim(ClaimSpec):
    multiplier: float
    inner: ClaimSpec

    def payoff(self, x):
        return self.multiplier * self.inner.payoff(x)

    def kinks(self):
        return self.inner.kinks()

    def jumps(self):
        return self.inner.jumps()

    def bl_parts(self):
        c0, s0, atoms, density = self.inner.bl_parts()
        m = self.multiplier
        scaled_density = None if density is None else (lambda k: m * density(k))
        return m * c0, m * s0, tuple((k, m * w) for k, w in atoms), scaled_density

    def to_json(self):
        return {"kind": "scaled", "multiplier": self.multiplier, "inner": self.inner.to_json()}


def claim_scale(claim: ClaimSpec, interval=DEFAULT_INTERVAL, floor: float = 1.0) -> float:
    """Max absolute payoff over the interval (probed on kinks, jumps, and a
    dense grid), floored so tolerances stay meaningful for tiny claims."""
    lo, hi = interval
    pts = [lo, hi]
    for k in claim.kinks():
        if lo <= k <= hi:
            pts.append(k)
    for j in claim.jumps():
        eps = 1e-9 * max(1.0, abs(j))
        for p in (j - eps, j, j + eps):
            if lo <= p <= hi:
                pts.append(p)
    grid = np.unique(np.concatenate([np.linspace(lo, hi, 2001), np.asarray(pts)]))
    return max(floor, float(np.max(np.abs(claim.payoff(grid)))))


_JSON_KINDS = {
    "call": (CallClaim, ("strike",)),
    "put": (PutClaim, ("strike",)),
    "digital": (DigitalClaim, ("strike", "amount")),
    "quadratic_forward": (QuadraticForward, ("strike",)),
    "log_forward": (LogForward, ("strike", "scale")),
    "piecewise_linear": (PiecewiseLinearClaim, ("breakpoints", "values")),
    "constant": (ConstantClaim, ("value",)),
}


def claim_from_json(obj) -> ClaimSpec:
    """Decode the claim wire format; raises DomainError with a field message."""
    if not isinstance(obj, dict):
        raise DomainError("claim must be a JSON object")
    kind = obj.get("kind")
    if kind == "scaled":
        if "multiplier" not in obj or "inner" not in obj:
            raise DomainError("scaled claim requires fields: multiplier, inner")
        return ScaledClaim(float(obj["multiplier"]), claim_from_json(obj["inner"]))
    if kind not in _JSON_KINDS:
        raise DomainError(
            f"unknown claim kind {kind!r}; expected one of "
            f"{sorted(_JSON_KINDS) + ['scaled']}"
        )
    cls, fields = _JSON_KINDS[kind]
    missing = [f for f in fields if f not in obj]
    if missing:
        raise DomainError(f"{kind} claim missing fields: {', '.join(missing)}")
    kwargs = {}
    for f in fields:
        value = obj[f]
        if f in ("breakpoints", "values"):
            if not isinstance(value, (list, tuple)):
                raise DomainError(f"{kind}.{f} must be a list of numbers")
            kwargs[f] = tuple(float(v) for v in value)
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise DomainError(f"{kind}.{f} must be a number")
            kwargs[f] = float(value)
    return cls(**kwargs)
