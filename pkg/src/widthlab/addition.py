"""Orlicz and L_p width additions, realized per direction by a monotone root solve.

For weights ``phi_j``, coefficients ``c_j`` and operand half widths ``b_j`` the
combined half width is the ``lam`` solving ``sum_j c_j phi_j(b_j / lam) = 1``.
The left side is strictly increasing in ``lam``, so the root is unique; it is
located by bisection in ``log(lam)``, vectorized over all query directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._bisect import bisect_increasing
from .errors import InputError, SolverError
from .geometry import EPS_WIDTH, WidthProfile, as_profile, body_from_dict
from .orlicz import LOG_HI, LOG_LO, OrliczFunction, Power, SumOfUnivariate, phi_from_dict

SOLVER_RTOL = 1e-12
INITIAL_SPREAD = math.log(1e6)
EXPAND_STEP = math.log(1e3)


def _check_terms(phis, coefficients, widths):
    if not (len(phis) == len(coefficients) == len(widths)) or not phis:
        raise InputError("need equally many (>= 1) weights, coefficients and widths")
    coeffs = np.asarray(coefficients, dtype=float)
    if np.any(~np.isfinite(coeffs)) or np.any(coeffs < 0) or not np.any(coeffs > 0):
        raise InputError("coefficients must be nonnegative with at least one positive")
    B = np.atleast_2d(np.asarray(widths, dtype=float))
    if B.shape[0] != len(phis):
        B = B.T
    if np.any(~(B >= EPS_WIDTH)) or np.any(~np.isfinite(B)):
        raise InputError(f"operand half widths must be finite and >= {EPS_WIDTH:g}")
    active = coeffs > 0
    return [f for f, a in zip(phis, active) if a], coeffs[active], B[active]


def _term_dump(phis, coeffs, B, k):
    return "; ".join(
        f"({f.to_dict()}, c={c!r}, b={float(b[k])!r})" for f, c, b in zip(phis, coeffs, B)
    )


def solve_lambda_array(phis, coefficients, widths, rtol: float = SOLVER_RTOL) -> np.ndarray:
    """Vectorized root of ``sum_j c_j phi_j(b_j / lam) = 1``.

    ``widths`` has shape ``(m, N)``: one row of half widths per term.  Zero
    coefficients drop their term.  Returns ``N`` positive values.
    """
    phis, coeffs, B = _check_terms(phis, coefficients, widths)
    logB = np.log(B)

    def g(s):
        total = coeffs[0] * phis[0].of_log(logB[0] - s)
        for f, c, lb in zip(phis[1:], coeffs[1:], logB[1:]):
            total = total + c * f.of_log(lb - s)
        return total - 1.0

    lo = logB.min(axis=0) - INITIAL_SPREAD
    hi = logB.max(axis=0) + INITIAL_SPREAD
    # argument b/lam must stay inside the clamp range [1e-12, 1e12]
    lo_limit = logB.max(axis=0) - LOG_HI
    hi_limit = logB.min(axis=0) - LOG_LO
    while True:
        bad = g(lo) > 0
        if not np.any(bad):
            break
        if np.any(bad & (lo <= lo_limit)):
            k = int(np.argmax(bad & (lo <= lo_limit)))
            raise SolverError("no sign change below the root within the clamp range; terms: "
                              + _term_dump(phis, coeffs, B, k))
        lo = np.where(bad, np.maximum(lo - EXPAND_STEP, lo_limit), lo)
    while True:
        bad = g(hi) <= 0
        if not np.any(bad):
            break
        if np.any(bad & (hi >= hi_limit)):
            k = int(np.argmax(bad & (hi >= hi_limit)))
            raise SolverError("no sign change above the root within the clamp range; terms: "
                              + _term_dump(phis, coeffs, B, k))
        hi = np.where(bad, np.minimum(hi + EXPAND_STEP, hi_limit), hi)
    s, _ = bisect_increasing(g, lo, hi, rtol)
    return np.exp(s)


def solve_lambda(terms, rtol: float = SOLVER_RTOL) -> float:
    """Scalar form: ``terms`` is a list of ``(phi_j, c_j, b_j)``."""
    if not terms:
        raise InputError("need at least one term")
    phis, coeffs, widths = zip(*terms)
    return float(solve_lambda_array(list(phis), coeffs, [[b] for b in widths], rtol)[0])


def implicit_residual(phis, coefficients, widths, lam) -> np.ndarray:
    """``|sum_j c_j phi_j(b_j / lam) - 1|`` per direction."""
    log_lam = np.log(np.asarray(lam, dtype=float))
    total = np.zeros(log_lam.shape)
    for f, c, b in zip(phis, coefficients, widths):
        if c > 0:
            total = total + c * f.of_log(np.log(np.asarray(b, dtype=float)) - log_lam)
    return np.abs(total - 1.0)


class ImplicitSumProfile(WidthProfile):
    """Width profile defined implicitly by ``sum_j c_j phi_j(b_j / lam) = 1``."""

    def __init__(self, phis, coefficients, operands, provenance: str, label=None):
        operands = [as_profile(K) for K in operands]
        dims = {K.dim for K in operands}
        if len(dims) != 1:
            raise InputError(f"operand dimensions differ: {sorted(dims)}")
        self.phis = tuple(phis)
        self.coefficients = tuple(float(c) for c in coefficients)
        self.operands = tuple(operands)
        super().__init__(self._solve, dims.pop(), provenance, label)

    def _solve(self, U):
        widths = [K._checked(U) for K in self.operands]
        return solve_lambda_array(self.phis, self.coefficients, widths)

    def _compute_on(self, rule):
        widths = [K.on(rule) for K in self.operands]
        return solve_lambda_array(self.phis, self.coefficients, widths)

    def residual(self, rule) -> np.ndarray:
        """Implicit-equation residual at every node of ``rule``."""
        widths = [K.on(rule) for K in self.operands]
        return implicit_residual(self.phis, self.coefficients, widths, self.on(rule))


def orlicz_width_sum(phi: SumOfUnivariate, operands) -> ImplicitSumProfile:
    """Orlicz width addition of ``m >= 2`` operands under ``phi = sum_j c_j phi_j``."""
    if not isinstance(phi, SumOfUnivariate):
        raise InputError("orlicz_width_sum needs an m-variate sum weight")
    operands = list(operands)
    if len(operands) < 2:
        raise InputError("Orlicz width addition needs at least two operands")
    if len(operands) != phi.arity:
        raise InputError(f"weight has arity {phi.arity} but {len(operands)} operands given")
    return ImplicitSumProfile(phi.parts, phi.coefficients, operands, "orlicz-sum")


def orlicz_linear_combination(phi1: OrliczFunction, phi2: OrliczFunction, K, L,
                              alpha: float = 1.0, beta: float = 1.0) -> WidthProfile:
    """Profile solving ``alpha phi1(b_K / lam) + beta phi2(b_L / lam) = 1``.

    ``beta == 0`` returns ``K``'s profile unchanged (identity property).
    """
    alpha, beta = float(alpha), float(beta)
    if not (math.isfinite(alpha) and math.isfinite(beta)) or alpha < 0 or beta < 0:
        raise InputError("alpha and beta must be finite and nonnegative")
    if alpha + beta <= 0:
        raise InputError("alpha and beta must not both be zero")
    K, L = as_profile(K), as_profile(L)
    if K.dim != L.dim:
        raise InputError(f"operand dimensions differ: {K.dim} vs {L.dim}")
    if beta == 0 and alpha == 1:
        return K
    return ImplicitSumProfile((phi1, phi2), (alpha, beta), (K, L), "orlicz-sum")


class LpSumProfile(WidthProfile):
    """Closed-form L_p width sum ``b^-p = b_K^-p + b_L^-p``."""

    def __init__(self, p: float, K: WidthProfile, L: WidthProfile):
        self.p = p
        self.operands = (K, L)
        super().__init__(self._evaluate_sum, K.dim, "lp-sum")

    def _combine(self, bK, bL):
        # factor out the larger width to keep the powers in range
        m = np.maximum(bK, bL)
        return m * ((bK / m) ** -self.p + (bL / m) ** -self.p) ** (-1.0 / self.p)

    def _evaluate_sum(self, U):
        K, L = self.operands
        return self._combine(K._checked(U), L._checked(U))

    def _compute_on(self, rule):
        K, L = self.operands
        return self._combine(K.on(rule), L.on(rule))

    def residual(self, rule) -> np.ndarray:
        K, L = self.operands
        return implicit_residual((Power(self.p),) * 2, (1.0, 1.0),
                                 (K.on(rule), L.on(rule)), self.on(rule))


def lp_width_sum(p: float, K, L) -> LpSumProfile:
    """L_p width addition of two profiles; no root solve involved."""
    p = float(p)
    if not math.isfinite(p) or p < 1:
        raise InputError(f"L_p addition needs p >= 1, got {p!r}")
    K, L = as_profile(K), as_profile(L)
    if K.dim != L.dim:
        raise InputError(f"operand dimensions differ: {K.dim} vs {L.dim}")
    return LpSumProfile(p, K, L)


# ---------------------------------------------------------------------------
# Descriptor JSON


@dataclass
class AdditionSpec:
    op: str
    profile: WidthProfile
    descriptor: dict

    def residual(self, rule) -> np.ndarray:
        if hasattr(self.profile, "residual"):
            return self.profile.residual(rule)
        # beta == 0 combination: the result is the first operand itself
        return np.zeros(rule.size)


_ADDITION_KEYS = {
    "orlicz_sum": {"op", "phi", "bodies"},
    "combination": {"op", "phi1", "phi2", "K", "L", "alpha", "beta"},
    "lp_sum": {"op", "p", "K", "L"},
}


def addition_from_dict(data: dict, path: str = "addition") -> AdditionSpec:
    """Parse an addition descriptor strictly and build its result profile."""
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected an object")
    op = data.get("op")
    if op not in _ADDITION_KEYS:
        raise InputError(f"{path}.op: unknown addition {op!r}")
    allowed = _ADDITION_KEYS[op]
    extra = set(data) - allowed
    if extra:
        raise InputError(f"{path}: unknown key(s) {sorted(extra)}")
    missing = allowed - set(data)
    if missing:
        raise InputError(f"{path}: missing key(s) {sorted(missing)}")
    if op == "orlicz_sum":
        phi = phi_from_dict(data["phi"], f"{path}.phi")
        if not isinstance(data["bodies"], list):
            raise InputError(f"{path}.bodies: expected a list")
        bodies = [body_from_dict(b, f"{path}.bodies[{k}]") for k, b in enumerate(data["bodies"])]
        profile = orlicz_width_sum(phi, bodies)
    elif op == "combination":
        phi1 = phi_from_dict(data["phi1"], f"{path}.phi1")
        phi2 = phi_from_dict(data["phi2"], f"{path}.phi2")
        if not isinstance(phi1, OrliczFunction) or not isinstance(phi2, OrliczFunction):
            raise InputError(f"{path}: phi1 and phi2 must be univariate")
        profile = orlicz_linear_combination(
            phi1, phi2, body_from_dict(data["K"], f"{path}.K"),
            body_from_dict(data["L"], f"{path}.L"), data["alpha"], data["beta"])
    else:
        profile = lp_width_sum(data["p"], body_from_dict(data["K"], f"{path}.K"),
                               body_from_dict(data["L"], f"{path}.L"))
    return AdditionSpec(op, profile, data)
