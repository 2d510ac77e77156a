"""Quadrature rules for integrating against surface measure on the unit sphere."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import EvaluationError, InputError

DEFAULT_RESOLUTION = {2: 65536, 3: 64}
DEFAULT_RESOLUTION_HIGH_DIM = 200_000
RESOLUTION_ENV = "WIDTHLAB_DEFAULT_RESOLUTION"


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere in ``R^dim``: ``2 pi^(n/2) / Gamma(n/2)``."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def ball_volume(dim: int) -> float:
    return sphere_area(dim) / dim


def default_resolution(dim: int) -> int:
    env = os.environ.get(RESOLUTION_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{RESOLUTION_ENV}={env!r} is not an integer") from None
    return DEFAULT_RESOLUTION.get(dim, DEFAULT_RESOLUTION_HIGH_DIM)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    dim: int
    kind: str
    resolution: int
    seed: int | None
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def key(self) -> tuple:
        return (self.dim, self.kind, self.resolution, self.seed)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def deterministic(self) -> bool:
        return self.kind != "monte-carlo"

    def descriptor(self) -> dict:
        return {"dim": self.dim, "kind": self.kind, "resolution": self.resolution,
                "seed": self.seed}


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _circle_rule(resolution: int):
    if resolution % 4:
        raise InputError("2-D resolution must be divisible by 4")
    theta = 2.0 * np.pi * np.arange(resolution) / resolution
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    # exact axis values so polytope kinks on the axes land exactly on nodes
    q = resolution // 4
    nodes[::q] = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    nodes[2 * q:] = -nodes[:2 * q]
    weights = np.full(resolution, 2.0 * np.pi / resolution)
    return nodes, weights


def _sphere_product_rule(resolution: int):
    z, wz = np.polynomial.legendre.leggauss(resolution)
    # symmetrize so the node set is exactly closed under u -> -u
    z = 0.5 * (z - z[::-1])
    wz = 0.5 * (wz + wz[::-1])
    n_az = 2 * resolution
    az = 2.0 * np.pi * np.arange(resolution) / n_az
    cos_az = np.concatenate([np.cos(az), -np.cos(az)])
    sin_az = np.concatenate([np.sin(az), -np.sin(az)])
    s = np.sqrt(1.0 - z ** 2)
    nodes = np.column_stack([np.outer(s, cos_az).ravel(), np.outer(s, sin_az).ravel(),
                             np.repeat(z, n_az)])
    weights = np.repeat(wz, n_az) * (2.0 * np.pi / n_az)
    return nodes, weights


def _monte_carlo_rule(dim: int, resolution: int, seed: int):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((resolution, dim))
    nodes = g / np.linalg.norm(g, axis=1)[:, None]
    weights = np.full(resolution, sphere_area(dim) / resolution)
    return nodes, weights


@lru_cache(maxsize=32)
def _build(dim: int, resolution: int, seed: int | None) -> QuadratureRule:
    if dim == 2:
        nodes, weights = _circle_rule(resolution)
        kind, seed = "circle-trapezoid", None
    elif dim == 3:
        nodes, weights = _sphere_product_rule(resolution)
        kind, seed = "sphere-product-gauss", None
    else:
        seed = 0 if seed is None else seed
        nodes, weights = _monte_carlo_rule(dim, resolution, seed)
        kind = "monte-carlo"
    _freeze(nodes, weights)
    return QuadratureRule(dim, kind, resolution, seed, nodes, weights)


def build_rule(dim: int, resolution: int | None = None, seed: int | None = None) -> QuadratureRule:
    """Build (or fetch the cached) rule for ``S^{dim-1}``.

    * ``dim == 2``: trapezoid rule on ``resolution`` equally spaced angles.
    * ``dim == 3``: Gauss-Legendre in ``cos(theta)`` times a uniform azimuthal grid
      of ``2 * resolution`` angles.
    * ``dim >= 4``: ``resolution`` normalized Gaussian samples drawn from
      ``numpy.random.default_rng(seed)``, each weighted ``area / resolution``.
    """
    if int(dim) != dim or dim < 2:
        raise InputError(f"dimension must be an integer >= 2, got {dim!r}")
    if resolution is None:
        resolution = default_resolution(dim)
    if int(resolution) != resolution or resolution < 16:
        raise InputError(f"resolution must be an integer >= 16, got {resolution!r}")
    return _build(int(dim), int(resolution), None if seed is None else int(seed))


def integrate(rule: QuadratureRule, f) -> float:
    """``sum_k w_k f(u_k)``.

    ``f`` is either a vectorized callable taking the ``(N, n)`` node array, or an
    array of values already evaluated at the nodes.
    """
    values = np.asarray(f(rule.nodes) if callable(f) else f, dtype=float)
    if values.ndim == 0:
        values = np.full(rule.size, float(values))
    if values.shape != (rule.size,):
        raise InputError(f"integrand returned shape {values.shape}, expected ({rule.size},)")
    bad = ~np.isfinite(values)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise EvaluationError(
            f"integrand is {values[k]!r} at node {k} (u = {rule.nodes[k].tolist()})"
        )
    return float(values @ rule.weights)
