"""Numerical verification of the width-integral inequalities and identities.

Each ``check_*`` function evaluates one statement on concrete inputs and returns
a :class:`CheckReport`.  Sign convention: ``slack >= 0`` means the inequality
holds; for identity checks ``slack = -|lhs - rhs|`` (or minus the relative
error).  ``probe_*`` functions gather evidence about claims that are not
asserted and never pass or fail.

:func:`run_campaign` sweeps every check over a seeded ensemble of random bodies.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial import QhullError

from . import __version__
from .addition import lp_width_sum, orlicz_linear_combination, orlicz_width_sum
from .errors import InputError, WidthlabError
from .functionals import (
    ith_mixed_width,
    lp_mixed_width,
    orlicz_mixed_width,
    width_integral,
)
from .geometry import (
    Ball,
    Ellipsoid,
    Polytope,
    WidthProfile,
    as_profile,
    body_to_dict,
    linear_image,
    validate_body,
)
from .orlicz import Mixture, OrliczFunction, Power, SumOfUnivariate
from .sphere_quad import QuadratureRule, build_rule

REJECTION_BUDGET = 1000
MIN_POLYTOPE_WIDTH = 0.05
# pointwise probes compare node values, so a coarse node set suffices
PROBE_RESOLUTION = {2: 1024, 3: 16}
AUX_ROTATION_SEEDS = (1, 2)


@dataclass(frozen=True)
class Tolerances:
    ineq_tol: float = 1e-8
    id_tol: float = 1e-9
    eq_tol: float = 1e-5
    fd_rel_tol: float = 1e-3
    #: pointwise tolerance for implicit-equation residuals and L_p/Orlicz agreement
    node_tol: float = 1e-10
    #: rotation invariance floor; None picks 1e-8 (n=2) / 1e-6 (n>=3)
    rot_tol: float | None = None
    #: multiple of the estimated quadrature error also allowed for rotations
    rot_safety: float = 4.0

    def rotation(self, dim: int) -> float:
        if self.rot_tol is not None:
            return self.rot_tol
        return 1e-8 if dim == 2 else 1e-6


DEFAULT_TOL = Tolerances()


@dataclass
class CheckReport:
    check: str
    kind: str  # "inequality" | "identity" | "probe"
    lhs: float
    rhs: float
    slack: float
    passed: bool | None
    equality_case: bool = False
    status: str = ""
    inputs: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.status:
            self.status = "probe" if self.passed is None else ("pass" if self.passed else "fail")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _inequality(name, lhs, rhs, slack, tol, similar, inputs, detail=None) -> CheckReport:
    passed = bool(slack >= -tol.ineq_tol)
    equality = bool(similar and abs(slack) < tol.eq_tol)
    return CheckReport(name, "inequality", float(lhs), float(rhs), float(slack), passed,
                       equality, inputs=inputs, detail=detail or {})


def _phi_desc(phi) -> dict:
    return phi.to_dict()


# ---------------------------------------------------------------------------
# Equality detection


def similar_width_detect(K, L, rule: QuadratureRule, eq_tol: float = DEFAULT_TOL.eq_tol) -> bool:
    """True when ``b(L,.)/b(K,.)`` is constant over the nodes to relative ``eq_tol``."""
    ratio = as_profile(L).on(rule) / as_profile(K).on(rule)
    return bool((ratio.max() - ratio.min()) / ratio.min() < eq_tol)


# ---------------------------------------------------------------------------
# Inequalities


def check_minkowski_i(K, L, i, rule, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """``A_i(K,L)^(n-i) <= A_i(K)^(n-i-1) A_i(L)``, slack in log domain."""
    n = rule.dim
    a_k, a_l = width_integral(K, i, rule), width_integral(L, i, rule)
    a_kl = ith_mixed_width(K, L, i, rule)
    log_lhs = (n - i) * math.log(a_kl)
    log_rhs = (n - i - 1) * math.log(a_k) + math.log(a_l)
    return _inequality("minkowski_i", math.exp(log_lhs), math.exp(log_rhs), log_rhs - log_lhs,
                       tol, similar_width_detect(K, L, rule, tol.eq_tol), {"i": i})


def check_lp_minkowski(K, L, p, i, rule, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """``A_{-p,i}(K,L)^(n-i) >= A_i(K)^(n-i+p) A_i(L)^(-p)``, slack in log domain."""
    n = rule.dim
    a_k, a_l = width_integral(K, i, rule), width_integral(L, i, rule)
    a_p = lp_mixed_width(K, L, p, i, rule)
    log_lhs = (n - i) * math.log(a_p)
    log_rhs = (n - i + p) * math.log(a_k) - p * math.log(a_l)
    return _inequality("lp_minkowski", math.exp(log_lhs), math.exp(log_rhs), log_lhs - log_rhs,
                       tol, similar_width_detect(K, L, rule, tol.eq_tol), {"i": i, "p": p})


def check_orlicz_minkowski(phi: OrliczFunction, K, L, i, rule,
                           tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """``A_{phi,i}(K,L) >= A_i(K) phi((A_i(L)/A_i(K))^(1/(n-i)))``, slack = lhs - rhs."""
    n = rule.dim
    a_k, a_l = width_integral(K, i, rule), width_integral(L, i, rule)
    lhs = orlicz_mixed_width(phi, K, L, i, rule)
    rhs = a_k * phi((a_l / a_k) ** (1.0 / (n - i)))
    return _inequality("orlicz_minkowski", lhs, rhs, lhs - rhs, tol,
                       similar_width_detect(K, L, rule, tol.eq_tol),
                       {"i": i, "phi": _phi_desc(phi)})


def check_lp_brunn_minkowski(K, L, p, i, rule, tol: Tolerances = DEFAULT_TOL,
                             combined: WidthProfile | None = None) -> CheckReport:
    """``A_i(K +_p L)^(-p/(n-i)) >= A_i(K)^(-p/(n-i)) + A_i(L)^(-p/(n-i))``."""
    n = rule.dim
    q = p / (n - i)
    Q = lp_width_sum(p, K, L) if combined is None else combined
    a_k, a_l, a_q = (width_integral(X, i, rule) for X in (K, L, Q))
    log_lhs = -q * math.log(a_q)
    log_rhs = float(np.logaddexp(-q * math.log(a_k), -q * math.log(a_l)))
    return _inequality("lp_brunn_minkowski", math.exp(log_lhs), math.exp(log_rhs),
                       log_lhs - log_rhs, tol, similar_width_detect(K, L, rule, tol.eq_tol),
                       {"i": i, "p": p}, {"A_i_sum": a_q})


def _sum_of(phi1, phi2, K, L, combined):
    return orlicz_linear_combination(phi1, phi2, K, L, 1.0, 1.0) if combined is None else combined


def check_orlicz_brunn_minkowski(phi1, phi2, K, L, i, rule, tol: Tolerances = DEFAULT_TOL,
                                 combined: WidthProfile | None = None) -> CheckReport:
    """``1 >= phi1((A_i(K)/M)^(1/(n-i))) + phi2((A_i(L)/M)^(1/(n-i)))``, ``M = A_i(K +_phi L)``."""
    n = rule.dim
    Q = _sum_of(phi1, phi2, K, L, combined)
    a_k, a_l, m = (width_integral(X, i, rule) for X in (K, L, Q))
    e = 1.0 / (n - i)
    rhs = phi1((a_k / m) ** e) + phi2((a_l / m) ** e)
    return _inequality("orlicz_brunn_minkowski", 1.0, rhs, 1.0 - rhs, tol,
                       similar_width_detect(K, L, rule, tol.eq_tol),
                       {"i": i, "phi1": _phi_desc(phi1), "phi2": _phi_desc(phi2)},
                       {"A_i_sum": m})


# ---------------------------------------------------------------------------
# Identities


def check_decomposition(phi1, phi2, K, L, i, rule, tol: Tolerances = DEFAULT_TOL,
                        combined: WidthProfile | None = None) -> CheckReport:
    """``A_i(Q) = A_{phi1,i}(Q, K) + A_{phi2,i}(Q, L)`` for ``Q = K +_phi L``."""
    Q = _sum_of(phi1, phi2, K, L, combined)
    lhs = width_integral(Q, i, rule)
    rhs = orlicz_mixed_width(phi1, Q, K, i, rule) + orlicz_mixed_width(phi2, Q, L, i, rule)
    gap = abs(lhs - rhs)
    return CheckReport("decomposition", "identity", lhs, rhs, -gap, bool(gap <= tol.id_tol),
                       inputs={"i": i, "phi1": _phi_desc(phi1), "phi2": _phi_desc(phi2)})


def check_lp_orlicz_agreement(p, K, L, rule, tol: Tolerances = DEFAULT_TOL,
                              combined: WidthProfile | None = None) -> CheckReport:
    """Orlicz sum under ``t^-p + t^-p`` equals the closed-form L_p sum at every node."""
    phi = Power(p)
    Q = _sum_of(phi, phi, K, L, combined)
    gap = float(np.max(np.abs(Q.on(rule) - lp_width_sum(p, K, L).on(rule))))
    return CheckReport("lp_orlicz_agreement", "identity", gap, 0.0, -gap,
                       bool(gap <= tol.node_tol), inputs={"p": p})


def check_implicit_residual(Q, rule, tol: Tolerances = DEFAULT_TOL, inputs=None) -> CheckReport:
    """Largest implicit-equation residual of an Orlicz or L_p sum over the nodes."""
    res = float(np.max(Q.residual(rule)))
    return CheckReport("implicit_residual", "identity", res, 0.0, -res, bool(res <= tol.node_tol),
                       inputs=dict(inputs or {}))


def neville_at_zero(xs, ys) -> float:
    """Value at 0 of the interpolating polynomial through ``(xs, ys)``."""
    xs = [float(x) for x in xs]
    p = [float(y) for y in ys]
    m = len(xs)
    for level in range(1, m):
        for k in range(m - level):
            x0, x1 = xs[k], xs[k + level]
            p[k] = (x1 * p[k] - x0 * p[k + 1]) / (x1 - x0)
    return p[0]


DEFAULT_STEPS = (1e-3, 5e-4, 2.5e-4)


def _check_steps(steps) -> list:
    steps = [float(s) for s in steps]
    if len(steps) < 2 or any(s <= 0 for s in steps) or any(
            a <= b for a, b in zip(steps, steps[1:])):
        raise InputError("variation steps must be >= 2 positive, strictly decreasing values")
    return steps


def variation_steps(phi2, K, L, rule, steps=DEFAULT_STEPS) -> list:
    """``steps`` shrunk by ``1 / max_u phi2(b_L/b_K)`` when that maximum exceeds 1.

    The perturbation enters the defining equation as ``eps * phi2(b_L/b_K)``, so the
    quotients are only in their asymptotic regime once that product is small.
    """
    ratio = as_profile(L).on(rule) / as_profile(K).on(rule)
    scale = min(1.0, 1.0 / float(np.max(phi2(ratio))))
    return [s * scale for s in _check_steps(steps)]


def variation_family(phi1, phi2, K, L, steps) -> list:
    """Profiles of ``K +_phi eps L`` for each step ``eps``."""
    return [orlicz_linear_combination(phi1, phi2, K, L, 1.0, eps) for eps in _check_steps(steps)]


def check_variation(phi1, phi2, K, L, i, rule, steps=DEFAULT_STEPS,
                    tol: Tolerances = DEFAULT_TOL, family=None,
                    adaptive: bool = True) -> CheckReport:
    """One-sided first variation of ``A_i`` along ``K +_phi eps L`` against ``A_{phi2,i}(K, L)``.

    With ``adaptive`` the step schedule is rescaled by :func:`variation_steps`.
    Difference quotients are extrapolated to ``eps -> 0`` (Richardson/Neville); a
    non-monotone quotient sequence is reported as inconclusive rather than failed.
    ``family`` must hold the profiles for the effective steps.
    """
    n = rule.dim
    steps = variation_steps(phi2, K, L, rule, steps) if adaptive else _check_steps(steps)
    family = variation_family(phi1, phi2, K, L, steps) if family is None else family
    a_k = width_integral(K, i, rule)
    quotients = [(width_integral(Ke, i, rule) - a_k) / eps for Ke, eps in zip(family, steps)]
    limit = neville_at_zero(steps, quotients)
    scaled = phi1.right_derivative_at_one() / (n - i) * limit
    target = orlicz_mixed_width(phi2, K, L, i, rule)
    rel = abs(scaled - target) / abs(target)
    diffs = np.diff(quotients)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    report = CheckReport(
        "variation", "identity", scaled, target, -rel, bool(rel <= tol.fd_rel_tol),
        inputs={"i": i, "phi1": _phi_desc(phi1), "phi2": _phi_desc(phi2),
                "steps": list(steps)},
        detail={"quotients": quotients, "limit": limit, "relative_error": rel,
                "monotone": monotone},
    )
    if not monotone:
        report.passed = None
        report.status = "inconclusive"
    return report


def check_bounds_lemma35(phi: OrliczFunction, operands, rule, tol: Tolerances = DEFAULT_TOL,
                         combined: WidthProfile | None = None) -> CheckReport:
    """``r / phi^-1(1/m) <= b(+_phi(K_1..K_m), u) <= R / phi^-1(1/m)`` at every node.

    ``r`` and ``R`` are the smallest and largest operand half widths over the nodes.
    Slack is the smaller of the two log-margins.
    """
    operands = [as_profile(K) for K in operands]
    m = len(operands)
    if combined is None:
        combined = orlicz_width_sum(SumOfUnivariate((phi,) * m), operands)
    b = combined.on(rule)
    widths = np.stack([K.on(rule) for K in operands])
    r, R = float(widths.min()), float(widths.max())
    c = phi.inverse(1.0 / m)
    lower, upper = r / c, R / c
    low_margin = float(np.min(np.log(b / lower)))
    high_margin = float(np.min(np.log(upper / b)))
    slack = min(low_margin, high_margin)
    equality = bool(np.max(np.abs(np.log(b / lower))) < tol.eq_tol
                    and np.max(np.abs(np.log(upper / b))) < tol.eq_tol)
    return CheckReport(
        "lemma35_bounds", "inequality", float(b.min()), lower, slack,
        bool(slack >= -tol.node_tol), equality,
        inputs={"m": m, "phi": _phi_desc(phi)},
        detail={"lower": lower, "upper": upper, "min_width": float(b.min()),
                "max_width": float(b.max()), "phi_inv_1_over_m": c},
    )


# ---------------------------------------------------------------------------
# Probes


def _is_orthogonal(A) -> bool:
    A = np.asarray(A, dtype=float)
    return bool(np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) <= 1e-10)


def refined_rule(rule: QuadratureRule) -> QuadratureRule:
    """Same family at twice the resolution, for quadrature error estimates."""
    return build_rule(rule.dim, 2 * rule.resolution, rule.seed)


def probe_linear_covariance(phi, K, L, i, A, rule, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Compare ``A_{phi,i}(AK, AL)`` with ``A_{phi,i}(K, L)`` for ``det A = 1``.

    Rotations are asserted (the sphere measure is rotation invariant) within
    ``max(tol.rotation(n), tol.rot_safety * est)``.  ``est`` is the largest relative
    change of either value on a rule of twice the resolution, or of the base value
    under fixed auxiliary rotations.  Kinked (polytope) integrands converge
    erratically, so refinement alone can underestimate; smooth ones make ``est``
    negligible.
    Any other special-linear map only reports the discrepancy.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape != (rule.dim, rule.dim):
        raise InputError("matrix shape does not match the rule dimension")
    if abs(np.linalg.det(A) - 1.0) >= 1e-10:
        raise InputError("covariance probe needs det A = 1")
    K, L = as_profile(K), as_profile(L)
    AK, AL = linear_image(K, A), linear_image(L, A)
    base = orlicz_mixed_width(phi, K, L, i, rule)
    moved = orlicz_mixed_width(phi, AK, AL, i, rule)
    rel = abs(moved - base) / abs(base)
    inputs = {"i": i, "phi": _phi_desc(phi), "matrix": A.tolist()}
    if _is_orthogonal(A):
        fine = refined_rule(rule)
        shifts = [abs(base - orlicz_mixed_width(phi, K, L, i, fine)),
                  abs(moved - orlicz_mixed_width(phi, AK, AL, i, fine))]
        for seed in AUX_ROTATION_SEEDS:
            R = _random_rotation(np.random.default_rng(seed), rule.dim)
            shifts.append(abs(base - orlicz_mixed_width(phi, linear_image(K, R),
                                                        linear_image(L, R), i, rule)))
        est = max(shifts) / abs(base)
        limit = max(tol.rotation(rule.dim), tol.rot_safety * est)
        return CheckReport("rotation_invariance", "identity", moved, base, -rel,
                           bool(rel <= limit), inputs=inputs,
                           detail={"relative_discrepancy": rel, "tolerance": limit,
                                   "quadrature_error_estimate": est})
    return CheckReport("sl_covariance_probe", "probe", moved, base, -rel, None, inputs=inputs,
                       detail={"relative_discrepancy": rel})


def probe_sum_covariance(phi1, phi2, K, L, A, rule) -> CheckReport:
    """Linear images versus Orlicz sums.

    Reports the node discrepancy of ``b((AK) +_phi (AL), u)`` against both
    ``b(A(K +_phi L), u)`` (homogeneous extension) and ``b(K +_phi L, u)``.
    """
    A = np.asarray(A, dtype=float)
    K, L = as_profile(K), as_profile(L)
    moved = orlicz_linear_combination(phi1, phi2, linear_image(K, A), linear_image(L, A)).on(rule)
    base = orlicz_linear_combination(phi1, phi2, K, L)
    image = linear_image(base, A).on(rule)
    unmoved = base.on(rule)
    d_image = float(np.max(np.abs(moved - image) / image))
    d_unmoved = float(np.max(np.abs(moved - unmoved) / unmoved))
    return CheckReport("sum_covariance_probe", "probe", d_unmoved, 0.0, -d_unmoved, None,
                       inputs={"phi1": _phi_desc(phi1), "phi2": _phi_desc(phi2),
                               "matrix": A.tolist()},
                       detail={"vs_image_of_sum": d_image, "vs_unmoved_sum": d_unmoved})


def probe_continuity(phi: SumOfUnivariate, operands, index: int, delta: float, rule) -> CheckReport:
    """Empirical Lipschitz ratio of the Orlicz sum when one operand widens by ``delta``."""
    operands = [as_profile(K) for K in operands]
    base = orlicz_width_sum(phi, operands).on(rule)
    target = operands[index]
    widened = WidthProfile(lambda U: target._evaluate(U) + delta, target.dim, "linear-combination")
    bumped = list(operands)
    bumped[index] = widened
    moved = orlicz_width_sum(phi, bumped).on(rule)
    constant = float(np.max(np.abs(moved - base)) / delta)
    return CheckReport("continuity_probe", "probe", constant, 0.0, 0.0, None,
                       inputs={"index": index, "delta": delta},
                       detail={"constant": constant,
                               "monotone": bool(np.all(moved >= base))})


# ---------------------------------------------------------------------------
# Ensembles


def _default_phis():
    return (Power(1.0), Power(2.0), Mixture((0.5, 0.5), (1.0, 3.0)))


@dataclass(frozen=True)
class EnsembleConfig:
    seed: int = 0
    dim: int = 2
    trials: int = 200
    resolution: int | None = None
    kinds: tuple = ("polytope", "ellipsoid", "ball")
    kind_weights: tuple = (0.5, 0.3, 0.2)
    radius_range: tuple = (0.3, 3.0)
    eigen_range: tuple = (0.3, 3.0)
    polytope_scale: tuple = (0.5, 2.0)
    p_values: tuple = (1.0, 2.0, 3.0)
    phis: tuple = field(default_factory=_default_phis)
    i_values: tuple | None = None
    variation_steps: tuple = DEFAULT_STEPS
    tolerances: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if self.dim < 2:
            raise InputError("dim must be >= 2")
        if not self.kinds or len(self.kinds) != len(self.kind_weights):
            raise InputError("kinds and kind_weights must be nonempty and of equal length")
        unknown = set(self.kinds) - {"polytope", "ellipsoid", "ball"}
        if unknown:
            raise InputError(f"unknown body kinds {sorted(unknown)}")
        for name in ("radius_range", "eigen_range", "polytope_scale"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise InputError(f"{name} must satisfy 0 < lo <= hi")
        if not self.p_values or any(p < 1 for p in self.p_values):
            raise InputError("p_values must be nonempty with every p >= 1")
        if not self.phis:
            raise InputError("phis must be nonempty")
        if self.i_values is not None and any(not 0 <= i < self.dim for i in self.i_values):
            raise InputError("i_values must lie in 0 <= i < dim")

    @property
    def indices(self) -> tuple:
        return tuple(range(self.dim)) if self.i_values is None else tuple(self.i_values)

    def rule(self) -> QuadratureRule:
        return build_rule(self.dim, self.resolution, self.seed if self.dim > 3 else None)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed, "dim": self.dim, "trials": self.trials,
            "resolution": self.rule().resolution,
            "kinds": list(self.kinds), "kind_weights": list(self.kind_weights),
            "radius_range": list(self.radius_range), "eigen_range": list(self.eigen_range),
            "polytope_scale": list(self.polytope_scale),
            "p_values": list(self.p_values), "phis": [f.to_dict() for f in self.phis],
            "i_values": list(self.indices), "variation_steps": list(self.variation_steps),
            "tolerances": asdict(self.tolerances),
        }


def _rng(config: EnsembleConfig, *stream) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([config.seed, *stream]))


def _random_rotation(rng, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_body(config: EnsembleConfig, index: int):
    """Body number ``index`` of the ensemble; a pure function of ``(seed, index)``."""
    rng = _rng(config, 0, index)
    n = config.dim
    weights = np.asarray(config.kind_weights, dtype=float)
    kind = config.kinds[int(rng.choice(len(config.kinds), p=weights / weights.sum()))]
    center = rng.normal(0.0, 0.5, n)
    if kind == "ball":
        return Ball(center, rng.uniform(*config.radius_range))
    if kind == "ellipsoid":
        Q = _random_rotation(rng, n)
        eig = rng.uniform(*config.eigen_range, n)
        return Ellipsoid(Q @ np.diag(eig) @ Q.T, center)
    rule = config.rule()
    for _ in range(REJECTION_BUDGET):
        count = int(rng.integers(2 * n, 4 * n + 1))
        points = rng.standard_normal((count, n)) * rng.uniform(*config.polytope_scale) + center
        try:
            hull = ConvexHull(points)
        except QhullError:
            continue
        body = Polytope(points[np.sort(hull.vertices)])
        if validate_body(body, rule).min_width >= MIN_POLYTOPE_WIDTH:
            return body
    raise WidthlabError(f"no admissible polytope after {REJECTION_BUDGET} draws "
                        f"(seed={config.seed}, index={index})")


def body_digest(body) -> str:
    payload = json.dumps(body_to_dict(body), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def run_trial(config: EnsembleConfig, trial: int) -> dict:
    """All checks and probes on the ``trial``-th random pair."""
    return check_pair(random_body(config, 2 * trial), random_body(config, 2 * trial + 1),
                      config, trial)


def check_pair(Kb, Lb, config: EnsembleConfig, trial: int = 0) -> dict:
    """Every check and probe of the campaign on one ``(K, L)`` pair."""
    rule = config.rule()
    tol = config.tolerances
    n = config.dim
    if Kb.dim != n or Lb.dim != n:
        raise InputError(f"bodies must be {n}-D to match the rule")
    K, L = as_profile(Kb), as_profile(Lb)
    reports: list[CheckReport] = []

    sums = {j: orlicz_linear_combination(phi, phi, K, L) for j, phi in enumerate(config.phis)}
    lp_sums = {p: lp_width_sum(p, K, L) for p in config.p_values}

    for j, phi in enumerate(config.phis):
        reports.append(check_implicit_residual(sums[j], rule, tol, {"phi": _phi_desc(phi)}))
        reports.append(check_bounds_lemma35(phi, [K, L], rule, tol, combined=sums[j]))
        if isinstance(phi, Power) and phi.p in lp_sums:
            reports.append(check_lp_orlicz_agreement(phi.p, K, L, rule, tol, combined=sums[j]))
    for p, Q in lp_sums.items():
        reports.append(check_implicit_residual(Q, rule, tol, {"p": p}))

    k = len(config.phis)
    phi1, phi2 = config.phis[trial % k], config.phis[(trial + 1) % k]
    steps = variation_steps(phi2, K, L, rule, config.variation_steps)
    family = variation_family(phi1, phi2, K, L, steps)
    rng = _rng(config, 1, trial)
    rotation = _random_rotation(rng, n)
    stretch = np.diag([2.0] + [0.5 ** (1.0 / (n - 1))] * (n - 1))

    for i in config.indices:
        reports.append(check_minkowski_i(K, L, i, rule, tol))
        for p in config.p_values:
            reports.append(check_lp_minkowski(K, L, p, i, rule, tol))
            reports.append(check_lp_brunn_minkowski(K, L, p, i, rule, tol, combined=lp_sums[p]))
        for j, phi in enumerate(config.phis):
            reports.append(check_orlicz_minkowski(phi, K, L, i, rule, tol))
            reports.append(check_orlicz_brunn_minkowski(phi, phi, K, L, i, rule, tol,
                                                        combined=sums[j]))
            reports.append(check_decomposition(phi, phi, K, L, i, rule, tol, combined=sums[j]))
        reports.append(check_variation(phi1, phi2, K, L, i, rule, steps, tol, family=family,
                                       adaptive=False))
        reports.append(probe_linear_covariance(phi2, K, L, i, rotation, rule, tol))
        reports.append(probe_linear_covariance(phi2, K, L, i, stretch, rule, tol))
    probe_rule = build_rule(n, PROBE_RESOLUTION.get(n, 4096), config.seed if n > 3 else None)
    reports.append(probe_sum_covariance(phi1, phi2, K, L, stretch, probe_rule))

    for r in reports:
        r.inputs["trial"] = trial
    return {
        "trial": trial,
        "K": body_to_dict(Kb),
        "L": body_to_dict(Lb),
        "similar_width": similar_width_detect(K, L, rule, tol.eq_tol),
        "reports": reports,
    }


def _summarize(reports) -> dict:
    summary: dict = {}
    seen: dict = {}
    for r in reports:
        s = summary.setdefault(r.check, {
            "kind": r.kind, "trials": 0, "evaluations": 0, "passes": 0, "failures": 0,
            "inconclusive": 0, "probes": 0, "min_slack": None, "equality_cases": 0,
        })
        seen.setdefault(r.check, set()).add(r.inputs.get("trial"))
        s["evaluations"] += 1
        s["passes"] += r.status == "pass"
        s["failures"] += r.status == "fail"
        s["inconclusive"] += r.status == "inconclusive"
        s["probes"] += r.status == "probe"
        s["equality_cases"] += bool(r.equality_case)
        if s["min_slack"] is None or r.slack < s["min_slack"]:
            s["min_slack"] = r.slack
        if r.kind == "probe":
            s["max_discrepancy"] = max(s.get("max_discrepancy", 0.0), abs(r.slack))
    for name, trials in seen.items():
        summary[name]["trials"] = len(trials)
    return dict(sorted(summary.items()))


def _run_one(config, trial):
    try:
        return run_trial(config, trial)
    except WidthlabError as exc:
        return {"trial": trial, "error": f"{type(exc).__name__}: {exc}", "reports": []}


def run_campaign(config: EnsembleConfig, threads: int = 1) -> dict:
    """Run every check over ``config.trials`` seeded pairs; deterministic given ``config``.

    Output ordering does not depend on ``threads``.
    """
    trials = range(config.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: _run_one(config, t), trials))
    else:
        results = [_run_one(config, t) for t in trials]
    return campaign_report(config, results)


def campaign_report(config: EnsembleConfig, results) -> dict:
    """Aggregate per-trial results (from :func:`run_trial` or :func:`check_pair`)."""
    rule = config.rule()
    results = sorted(results, key=lambda r: r["trial"])

    reports = [r for res in results for r in res["reports"]]
    errors = [{"trial": res["trial"], "error": res["error"]} for res in results if "error" in res]
    summary = _summarize(reports)
    failures = sum(s["failures"] for s in summary.values())
    residuals = [r.lhs for r in reports if r.check == "implicit_residual"]
    return {
        "artifact": {"name": "widthlab", "version": __version__},
        "config": config.to_dict(),
        "rule": rule.descriptor(),
        "ok": failures == 0 and not errors,
        "failures": failures,
        "errors": errors,
        "residual_max": max(residuals) if residuals else None,
        "summary": summary,
        "trials": [{"trial": res["trial"], "K": res.get("K"), "L": res.get("L"),
                    "similar_width": res.get("similar_width")} for res in results],
        "reports": [r.to_dict() for r in reports],
    }


def report_digest(report: dict) -> str:
    """sha256 of the canonical JSON serialization."""
    return hashlib.sha256(canonical_json(report).encode()).hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"
