"""Width integrals and their mixed, L_p and Orlicz variants.

All functionals are ``(1/n) * integral over S^{n-1}`` of a product of half
widths, evaluated with an explicit quadrature rule so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .geometry import as_profile
from .orlicz import OrliczFunction
from .sphere_quad import QuadratureRule, integrate


def _index(i, n: int) -> int:
    if int(i) != i or not 0 <= i < n:
        raise InputError(f"index out of range 0 <= i < n (got i={i!r}, n={n})")
    return int(i)


def _profiles(rule: QuadratureRule, *bodies):
    profiles = [as_profile(K) for K in bodies]
    for K in profiles:
        if K.dim != rule.dim:
            raise InputError(f"body is {K.dim}-D but the rule is {rule.dim}-D")
    return profiles


def _p(p) -> float:
    p = float(p)
    if not np.isfinite(p) or p < 1:
        raise InputError(f"p must satisfy p >= 1, got {p!r}")
    return p


def width_integral(K, i: int, rule: QuadratureRule) -> float:
    """``A_i(K) = (1/n) int b(K,u)^(n-i) dS(u)``."""
    n = rule.dim
    i = _index(i, n)
    (K,) = _profiles(rule, K)
    return integrate(rule, K.on(rule) ** (n - i)) / n


def mixed_width_integral(bodies, rule: QuadratureRule) -> float:
    """``A(K_1, ..., K_n) = (1/n) int b(K_1,u) ... b(K_n,u) dS(u)``."""
    bodies = list(bodies)
    n = rule.dim
    if len(bodies) != n:
        raise InputError(f"mixed width integral in R^{n} needs exactly {n} operands, "
                         f"got {len(bodies)}")
    profiles = _profiles(rule, *bodies)
    product = np.ones(rule.size)
    for K in profiles:
        product = product * K.on(rule)
    return integrate(rule, product) / n


def ith_mixed_width(K, L, i: int, rule: QuadratureRule) -> float:
    """``A_i(K, L) = (1/n) int b(K,u)^(n-i-1) b(L,u) dS(u)``."""
    n = rule.dim
    i = _index(i, n)
    K, L = _profiles(rule, K, L)
    return integrate(rule, K.on(rule) ** (n - i - 1) * L.on(rule)) / n


def lp_mixed_width(K, L, p: float, i: int, rule: QuadratureRule) -> float:
    """``A_{-p,i}(K, L) = (1/n) int b(K,u)^(n-i+p) b(L,u)^(-p) dS(u)``."""
    n = rule.dim
    i = _index(i, n)
    p = _p(p)
    K, L = _profiles(rule, K, L)
    bK = K.on(rule)
    return integrate(rule, (L.on(rule) / bK) ** -p * bK ** (n - i)) / n


def orlicz_mixed_width(phi: OrliczFunction, K, L, i: int, rule: QuadratureRule) -> float:
    """``A_{phi,i}(K, L) = (1/n) int phi(b(L,u)/b(K,u)) b(K,u)^(n-i) dS(u)``."""
    if not isinstance(phi, OrliczFunction):
        raise InputError("Orlicz mixed width integral needs a univariate weight")
    n = rule.dim
    i = _index(i, n)
    K, L = _profiles(rule, K, L)
    bK = K.on(rule)
    return integrate(rule, phi(L.on(rule) / bK) * bK ** (n - i)) / n


def width_measure_weights(K, i: int, rule: QuadratureRule) -> np.ndarray:
    """Per-node masses of the width measure ``b(K,u)^(n-i) dS(u) / (n A_i(K))``.

    Numerator and normalizer use the same rule, so the masses sum to 1.
    """
    n = rule.dim
    i = _index(i, n)
    (K,) = _profiles(rule, K)
    mass = rule.weights * K.on(rule) ** (n - i)
    return mass / mass.sum()


@dataclass
class FunctionalResult:
    functional: str
    value: float
    i: int
    rule: dict
    evaluations: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "functional": self.functional,
            "value": self.value,
            "i": self.i,
            "rule": self.rule,
            "evaluations": self.evaluations,
            "params": self.params,
        }


FUNCTIONALS = ("A_i", "A_i_KL", "A_pi", "A_phi_i")


def compute(functional: str, rule: QuadratureRule, i: int, K, L=None, p=None, phi=None,
            params: dict | None = None) -> FunctionalResult:
    """Dispatch by functional name and wrap the value with its provenance."""
    if functional not in FUNCTIONALS:
        raise InputError(f"unknown functional {functional!r}; choose from {FUNCTIONALS}")
    operands = 1
    if functional == "A_i":
        value = width_integral(K, i, rule)
    else:
        if L is None:
            raise InputError(f"{functional} needs a second body L")
        operands = 2
        if functional == "A_i_KL":
            value = ith_mixed_width(K, L, i, rule)
        elif functional == "A_pi":
            if p is None:
                raise InputError("A_pi needs p")
            value = lp_mixed_width(K, L, p, i, rule)
        else:
            if phi is None:
                raise InputError("A_phi_i needs phi")
            value = orlicz_mixed_width(phi, K, L, i, rule)
    return FunctionalResult(functional, value, int(i), rule.descriptor(),
                            operands * rule.size, dict(params or {}))
