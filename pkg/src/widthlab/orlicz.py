"""Orlicz weight functions: the univariate class and sums of them on [0, inf)^m.

A univariate weight is convex, strictly decreasing, blows up at 0, vanishes at
infinity and equals 1 at 1.  Families only need to implement :meth:`of_log`
(the function evaluated at ``exp(s)``); inversion and the one-sided derivative
at 1 have generic numeric fallbacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._bisect import bisect_increasing
from .errors import InputError, NumericError

CLAMP_LO = 1e-12
CLAMP_HI = 1e12
LOG_LO = math.log(CLAMP_LO)
LOG_HI = math.log(CLAMP_HI)
INVERSE_RTOL = 1e-12
# forward-difference steps for the numeric one-sided derivative
FD_STEPS = (1e-4, 5e-5, 2.5e-5)


class DomainError(NumericError):
    """The requested value lies outside what the clamped function can reach."""


class OrliczFunction:
    """Base class for univariate Orlicz weights."""

    kind = "abstract"

    def of_log(self, s):
        """Value at ``t = exp(s)``; ``s`` is clamped to the admissible range."""
        raise NotImplementedError

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(np.isnan(t_arr)) or np.any(t_arr < 0):
            raise InputError("Orlicz functions are defined on [0, inf) only")
        with np.errstate(divide="ignore"):
            s = np.log(np.clip(t_arr, CLAMP_LO, CLAMP_HI))
        out = self.of_log(s)
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, y):
        """The unique ``t`` with ``phi(t) = y``, by log-space bisection."""
        y_arr = np.asarray(y, dtype=float)
        if np.any(~(y_arr > 0)) or not np.all(np.isfinite(y_arr)):
            raise InputError("inverse is defined for finite y > 0 only")
        y_flat = np.atleast_1d(y_arr).ravel()
        lo = np.full(y_flat.shape, -1.0)
        hi = np.full(y_flat.shape, 1.0)
        # expand geometrically until phi(e^lo) >= y > phi(e^hi)
        while True:
            short = self.of_log(lo) < y_flat
            if not np.any(short):
                break
            if np.min(lo) <= LOG_LO:
                raise DomainError(f"phi^-1({y_flat[short][0]!r}) lies below t = {CLAMP_LO:g}")
            lo = np.where(short, np.maximum(2.0 * lo, LOG_LO), lo)
        while True:
            long = self.of_log(hi) >= y_flat
            if not np.any(long):
                break
            if np.max(hi) >= LOG_HI:
                raise DomainError(f"phi^-1({y_flat[long][0]!r}) lies above t = {CLAMP_HI:g}")
            hi = np.where(long, np.minimum(2.0 * hi, LOG_HI), hi)
        s, _ = bisect_increasing(lambda s: y_flat - self.of_log(s), lo, hi, INVERSE_RTOL)
        t = np.exp(s).reshape(np.shape(y_arr))
        return float(t) if t.ndim == 0 else t

    @property
    def analytic_derivative_at_one(self) -> float | None:
        return None

    def numeric_right_derivative_at_one(self) -> float:
        """Forward differences at 1 with two rounds of Richardson extrapolation."""
        d = [(self(1.0 + h) - self(1.0)) / h for h in FD_STEPS]
        r1 = [2.0 * d[1] - d[0], 2.0 * d[2] - d[1]]
        return (4.0 * r1[1] - r1[0]) / 3.0

    def right_derivative_at_one(self) -> float:
        value = self.analytic_derivative_at_one
        return self.numeric_right_derivative_at_one() if value is None else value

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Power(OrliczFunction):
    """``t ** -p`` with ``p >= 1``."""

    p: float
    kind = "power"

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p < 1:
            raise InputError(f"power exponent must satisfy p >= 1, got {self.p!r}")
        object.__setattr__(self, "p", p)

    def of_log(self, s):
        return np.exp(-self.p * np.clip(s, LOG_LO, LOG_HI))

    def inverse(self, y):
        y_arr = np.asarray(y, dtype=float)
        if np.any(~(y_arr > 0)) or not np.all(np.isfinite(y_arr)):
            raise InputError("inverse is defined for finite y > 0 only")
        t = y_arr ** (-1.0 / self.p)
        return float(t) if t.ndim == 0 else t

    @property
    def analytic_derivative_at_one(self) -> float:
        return -self.p

    def to_dict(self) -> dict:
        return {"type": "power", "p": self.p}


@dataclass(frozen=True)
class Mixture(OrliczFunction):
    """Convex combination ``sum_k w_k t ** -p_k`` of power weights."""

    weights: tuple
    exponents: tuple
    kind = "mixture"

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        p = tuple(float(x) for x in self.exponents)
        if not w or len(w) != len(p):
            raise InputError("mixture needs equally many (>= 1) weights and exponents")
        if any(not math.isfinite(x) or x <= 0 for x in w):
            raise InputError("mixture weights must be positive")
        if abs(sum(w) - 1.0) > 1e-12:
            raise InputError(f"mixture weights must sum to 1, got {sum(w)!r}")
        if any(not math.isfinite(x) or x < 1 for x in p):
            raise InputError("mixture exponents must satisfy p >= 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "exponents", p)

    def of_log(self, s):
        s = np.clip(s, LOG_LO, LOG_HI)
        out = self.weights[0] * np.exp(-self.exponents[0] * s)
        for w, p in zip(self.weights[1:], self.exponents[1:]):
            out = out + w * np.exp(-p * s)
        return out

    @property
    def analytic_derivative_at_one(self) -> float:
        return -sum(w * p for w, p in zip(self.weights, self.exponents))

    def to_dict(self) -> dict:
        return {"type": "mixture", "weights": list(self.weights),
                "exponents": list(self.exponents)}


@dataclass(frozen=True)
class SumOfUnivariate:
    """``phi(x_1, ..., x_m) = sum_j c_j phi_j(x_j)``, a member of the m-variate class.

    With all coefficients equal to 1 (the default) this is the plain sum.
    """

    parts: tuple
    coefficients: tuple = field(default=None)

    def __post_init__(self):
        parts = tuple(self.parts)
        if len(parts) < 2:
            raise InputError("an m-variate weight needs m >= 2 parts")
        if not all(isinstance(f, OrliczFunction) for f in parts):
            raise InputError("every part must be a univariate Orlicz function")
        coeffs = (1.0,) * len(parts) if self.coefficients is None else tuple(
            float(c) for c in self.coefficients)
        if len(coeffs) != len(parts):
            raise InputError("need one coefficient per part")
        if any(not math.isfinite(c) or c < 0 for c in coeffs) or not any(c > 0 for c in coeffs):
            raise InputError("coefficients must be nonnegative and not all zero")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def arity(self) -> int:
        return len(self.parts)

    def terms(self) -> list:
        return list(zip(self.parts, self.coefficients))

    def __call__(self, *x):
        if len(x) != self.arity:
            raise InputError(f"expected {self.arity} arguments, got {len(x)}")
        return sum(c * f(xj) for f, c, xj in zip(self.parts, self.coefficients, x))

    def to_dict(self) -> dict:
        return {"type": "sum", "parts": [f.to_dict() for f in self.parts],
                "coefficients": list(self.coefficients)}


def WeightedSum(parts, coefficients) -> SumOfUnivariate:
    return SumOfUnivariate(tuple(parts), tuple(coefficients))


# ---------------------------------------------------------------------------
# Module-level operations


def phi_eval(f: OrliczFunction, t):
    return f(t)


def phi_inverse(f: OrliczFunction, y):
    return f.inverse(y)


def right_derivative_at_one(f: OrliczFunction) -> float:
    return f.right_derivative_at_one()


@dataclass
class PhiDiagnostics:
    checks: dict
    details: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": dict(self.checks), "details": dict(self.details)}


def _univariate_checks(f: Callable, grid: np.ndarray, rng, prefix=""):
    checks, details = {}, {}
    values = np.array([f(t) for t in grid])
    checks[prefix + "decreasing"] = bool(np.all(np.diff(values) < 0))
    a = rng.choice(grid, size=4 * grid.size)
    b = rng.choice(grid, size=4 * grid.size)
    lhs = np.array([f(x) for x in 0.5 * (a + b)])
    rhs = 0.5 * (np.array([f(x) for x in a]) + np.array([f(x) for x in b]))
    gap = lhs - rhs
    # compare relative to the larger side: values span many orders of magnitude
    checks[prefix + "midpoint_convex"] = bool(np.all(gap <= 1e-12 * np.maximum(1.0, rhs)))
    details[prefix + "worst_convexity_gap"] = float(np.max(gap))
    one = f(1.0)
    checks[prefix + "unit_at_one"] = bool(abs(one - 1.0) <= 1e-12)
    details[prefix + "phi_at_one"] = float(one)
    checks[prefix + "blows_up_at_zero"] = bool(values[0] >= 1.0 / grid[0] ** 0.5)
    checks[prefix + "vanishes_at_infinity"] = bool(values[-1] <= 1.0 / grid[-1] ** 0.5)
    return checks, details


def validate_phi(f, grid_size: int = 64, seed: int = 0) -> PhiDiagnostics:
    """Numerically check the class conditions on a log grid over ``[1e-6, 1e6]``."""
    if grid_size < 16:
        raise InputError("grid_size must be at least 16")
    grid = np.logspace(-6, 6, grid_size)
    rng = np.random.default_rng(seed)
    if isinstance(f, OrliczFunction):
        checks, details = _univariate_checks(f, grid, rng)
        return PhiDiagnostics(checks, details)
    if not isinstance(f, SumOfUnivariate):
        raise InputError(f"cannot validate {type(f).__name__}")
    checks, details = {}, {}
    for j, part in enumerate(f.parts):
        c, d = _univariate_checks(part, grid, rng, prefix=f"part{j}.")
        checks.update(c)
        details.update(d)
    if all(c == 1.0 for c in f.coefficients):
        for j in range(f.arity):
            e_j = [CLAMP_HI] * f.arity
            e_j[j] = 1.0
            value = f(*e_j)
            details[f"phi_e{j + 1}"] = float(value)
            checks[f"unit_at_e{j + 1}"] = bool(abs(value - 1.0) <= 1e-9)
    return PhiDiagnostics(checks, details)


# ---------------------------------------------------------------------------
# JSON schema

PHI_REGISTRY: dict = {}


def register_phi(name: str, parser: Callable[[dict, str], OrliczFunction]) -> None:
    """Register a parser for a univariate family under the JSON ``type`` ``name``."""
    PHI_REGISTRY[name] = parser


def _strict(data: dict, allowed: set, path: str):
    extra = set(data) - allowed
    if extra:
        raise InputError(f"{path}: unknown key(s) {sorted(extra)}")
    missing = allowed - set(data) - {"coefficients"}
    if missing:
        raise InputError(f"{path}: missing key(s) {sorted(missing)}")


def _parse_power(data: dict, path: str) -> Power:
    _strict(data, {"type", "p"}, path)
    return Power(data["p"])


def _parse_mixture(data: dict, path: str) -> Mixture:
    _strict(data, {"type", "weights", "exponents"}, path)
    return Mixture(tuple(data["weights"]), tuple(data["exponents"]))


register_phi("power", _parse_power)
register_phi("mixture", _parse_mixture)


def phi_from_dict(data: dict, path: str = "phi"):
    """Parse the JSON weight schema (univariate families or ``"sum"``)."""
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected an object")
    kind = data.get("type")
    try:
        if kind == "sum":
            _strict(data, {"type", "parts", "coefficients"}, path)
            parts = data["parts"]
            if not isinstance(parts, list):
                raise InputError(f"{path}.parts: expected a list")
            parsed = tuple(phi_from_dict(p, f"{path}.parts[{k}]") for k, p in enumerate(parts))
            if any(isinstance(p, SumOfUnivariate) for p in parsed):
                raise InputError(f"{path}.parts: sums cannot be nested")
            return SumOfUnivariate(parsed, data.get("coefficients"))
        if kind not in PHI_REGISTRY:
            raise InputError(f"{path}.type: unknown weight type {kind!r}")
        return PHI_REGISTRY[kind](data, path)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError) and str(exc).startswith(path):
            raise
        raise InputError(f"{path}: {exc}") from exc
