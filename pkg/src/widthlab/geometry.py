"""Convex bodies given by support-function oracles, and their half-width profiles.

Every body knows how to evaluate ``h(K, x) = max_{y in K} x.y`` for a batch of
vectors.  All downstream functionals only ever consume the half width
``b(K, u) = (h(K, u) + h(K, -u)) / 2``, wrapped in a :class:`WidthProfile`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DegenerateBodyError, InputError

#: Minimum admissible half width; anything thinner is treated as degenerate.
EPS_WIDTH = 1e-9
#: Directions farther than this from unit norm are rejected rather than normalized.
UNIT_TOL = 1e-8
DET_TOL = 1e-12


def _vector(x, name="vector") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def _matrix(a, name="matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    if abs(np.linalg.det(arr)) <= DET_TOL:
        raise InputError(f"{name} is singular (|det| <= {DET_TOL:g})")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def as_direction(u) -> np.ndarray:
    """Return ``u`` as a unit vector, renormalizing if it is within 1e-8 of unit norm."""
    arr = _vector(u, "direction")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > UNIT_TOL:
        raise InputError(f"direction has norm {norm!r}, expected 1")
    return arr / norm


def _as_batch(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2:
        raise InputError(f"expected a vector or an (N, n) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("support query has non-finite entries")
    return arr, single


# ---------------------------------------------------------------------------
# Bodies


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(_vector(self.center, "center")))
        r = float(self.radius)
        if not np.isfinite(r) or r <= 0:
            raise InputError(f"ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def _support(self, X: np.ndarray) -> np.ndarray:
        return X @ self.center + self.radius * np.linalg.norm(X, axis=1)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """The image ``center + shape @ B`` of the unit ball."""

    shape: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        shape = _matrix(self.shape, "ellipsoid shape")
        center = _vector(self.center, "center")
        if center.size != shape.shape[0]:
            raise InputError("ellipsoid center and shape disagree on dimension")
        object.__setattr__(self, "shape", _frozen(shape))
        object.__setattr__(self, "center", _frozen(center))

    @property
    def dim(self) -> int:
        return self.center.size

    def _support(self, X: np.ndarray) -> np.ndarray:
        # |shape^T x| for each row x
        return X @ self.center + np.linalg.norm(X @ self.shape, axis=1)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of a finite vertex list (need not be in convex position)."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] < 1:
            raise InputError(f"vertices must be an (m, n) array, got shape {V.shape}")
        if not np.all(np.isfinite(V)):
            raise InputError("polytope vertices have non-finite entries")
        if V.shape[0] < V.shape[1] + 1:
            raise InputError(
                f"a full-dimensional polytope in R^{V.shape[1]} needs at least "
                f"{V.shape[1] + 1} vertices, got {V.shape[0]}"
            )
        object.__setattr__(self, "vertices", _frozen(V))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def _support(self, X: np.ndarray) -> np.ndarray:
        return np.max(X @ self.vertices.T, axis=1)


@dataclass(frozen=True, eq=False)
class LinearImage:
    """The body ``matrix @ inner``, evaluated lazily through ``h(AK, x) = h(K, A^T x)``."""

    matrix: np.ndarray
    inner: "SupportBody"

    def __post_init__(self):
        A = _matrix(self.matrix, "linear image matrix")
        if A.shape[0] != self.inner.dim:
            raise InputError(
                f"matrix is {A.shape[0]}x{A.shape[0]} but body lives in R^{self.inner.dim}"
            )
        object.__setattr__(self, "matrix", _frozen(A))

    @property
    def dim(self) -> int:
        return self.inner.dim

    def _support(self, X: np.ndarray) -> np.ndarray:
        # rows of X @ A are (A^T x)^T
        return self.inner._support(X @ self.matrix)


SupportBody = Union[Ball, Ellipsoid, Polytope, LinearImage]
BODY_TYPES = (Ball, Ellipsoid, Polytope, LinearImage)


def support(body: SupportBody, x):
    """Support function ``h(body, x)`` for one vector or an ``(N, n)`` batch."""
    X, single = _as_batch(x)
    if X.shape[1] != body.dim:
        raise InputError(f"query has dimension {X.shape[1]}, body has {body.dim}")
    h = body._support(X)
    return float(h[0]) if single else h


def _raw_half_width(body: SupportBody, U: np.ndarray) -> np.ndarray:
    return 0.5 * (body._support(U) + body._support(-U))


def half_width(obj, u):
    """Half width ``b(K, u)`` of a body or a :class:`WidthProfile`.

    ``u`` may be a single direction or an ``(N, n)`` array of unit vectors.
    Raises :class:`DegenerateBodyError` if any value falls below ``EPS_WIDTH``.
    """
    if isinstance(obj, WidthProfile):
        return obj(u)
    return width_profile(obj)(u)


def linear_image(obj, A):
    """Image of a body (lazy wrapper) or of a width profile under ``A``.

    For profiles the half width is extended 1-homogeneously,
    ``b(AK, u) = |A^T u| b(K, A^T u / |A^T u|)``, which is what the support-function
    rule gives for any body realizing the profile.
    """
    A = _matrix(A, "linear image matrix")
    if isinstance(obj, WidthProfile):
        if A.shape[0] != obj.dim:
            raise InputError(f"matrix is {A.shape[0]}x{A.shape[0]} but profile is {obj.dim}-D")
        inner = obj

        def evaluate(U):
            V = U @ A
            norms = np.linalg.norm(V, axis=1)
            return norms * inner._evaluate(V / norms[:, None])

        return WidthProfile(evaluate, obj.dim, provenance="linear-image")
    return LinearImage(A, obj)


def translate(body: SupportBody, t) -> SupportBody:
    """Translate a body by ``t``; half widths are unchanged by construction."""
    t = _vector(t, "translation")
    if t.size != body.dim:
        raise InputError("translation dimension mismatch")
    if isinstance(body, Ball):
        return Ball(body.center + t, body.radius)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(body.shape, body.center + t)
    if isinstance(body, Polytope):
        return Polytope(body.vertices + t)
    # A(K) + t = A(K + A^{-1} t)
    return LinearImage(body.matrix, translate(body.inner, np.linalg.solve(body.matrix, t)))


# ---------------------------------------------------------------------------
# Width profiles


class WidthProfile:
    """An evaluable positive even function on the unit sphere.

    ``evaluator`` maps an ``(N, n)`` array of unit vectors to ``N`` half widths.
    Values at the nodes of a quadrature rule are memoized per rule (see :meth:`on`).
    """

    def __init__(self, evaluator: Callable[[np.ndarray], np.ndarray], dim: int,
                 provenance: str = "body", label: str | None = None):
        self._evaluator = evaluator
        self.dim = int(dim)
        self.provenance = provenance
        self.label = label
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __repr__(self):
        name = f" {self.label!r}" if self.label else ""
        return f"<WidthProfile{name} dim={self.dim} provenance={self.provenance}>"

    def _evaluate(self, U: np.ndarray) -> np.ndarray:
        return np.asarray(self._evaluator(U), dtype=float)

    def _compute_on(self, rule) -> np.ndarray:
        return self._evaluate(rule.nodes)

    def _checked(self, U: np.ndarray) -> np.ndarray:
        return self._positive(self._evaluate(U), U)

    @staticmethod
    def _positive(b: np.ndarray, U: np.ndarray) -> np.ndarray:
        bad = ~(b >= EPS_WIDTH)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise DegenerateBodyError(
                f"half width {b[k]!r} below {EPS_WIDTH:g} in direction {U[k].tolist()}"
                " (body not full-dimensional there)"
            )
        return b

    def __call__(self, u):
        U, single = _as_batch(u)
        if U.shape[1] != self.dim:
            raise InputError(f"direction has dimension {U.shape[1]}, profile has {self.dim}")
        norms = np.linalg.norm(U, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise InputError("directions must have unit norm")
        b = self._checked(U / norms[:, None])
        return float(b[0]) if single else b

    def on(self, rule) -> np.ndarray:
        """Half widths at the nodes of ``rule`` (memoized, read-only)."""
        if rule.dim != self.dim:
            raise InputError(f"rule is {rule.dim}-D, profile is {self.dim}-D")
        key = rule.key
        values = self._cache.get(key)
        if values is None:
            values = self._positive(self._compute_on(rule), rule.nodes)
            values.setflags(write=False)
            with self._lock:
                values = self._cache.setdefault(key, values)
        return values


def width_profile(body: SupportBody, label: str | None = None) -> WidthProfile:
    """Half-width profile of a support body."""
    if not isinstance(body, BODY_TYPES):
        raise InputError(f"not a support body: {type(body).__name__}")
    return WidthProfile(lambda U: _raw_half_width(body, U), body.dim, "body", label)


def as_profile(obj) -> WidthProfile:
    if isinstance(obj, WidthProfile):
        return obj
    return width_profile(obj)


def scaled_profile(profile: WidthProfile, factor: float) -> WidthProfile:
    """Profile of ``factor * K``."""
    factor = float(factor)
    if factor <= 0:
        raise InputError("scale factor must be positive")
    return WidthProfile(lambda U: factor * profile._evaluate(U), profile.dim,
                        "linear-combination")


@dataclass(frozen=True)
class BodyDiagnostics:
    min_width: float
    max_width: float
    argmin: list
    argmax: list
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "r_K": self.min_width,
            "R_K": self.max_width,
            "argmin": self.argmin,
            "argmax": self.argmax,
            "degenerate": self.degenerate,
        }


def flat_direction(body: SupportBody) -> np.ndarray | None:
    """A unit normal along which a polytope (or a linear image of one) has zero width.

    Node sampling can miss such a direction, so the affine rank is checked exactly.
    """
    if isinstance(body, Polytope):
        V = body.vertices - body.vertices.mean(axis=0)
        _, sv, vt = np.linalg.svd(V)
        scale = max(float(sv[0]), 1.0)
        if sv.size < body.dim or sv[-1] < EPS_WIDTH * scale:
            return vt[-1]
        return None
    if isinstance(body, LinearImage):
        v = flat_direction(body.inner)
        if v is None:
            return None
        # zero width of K along v is zero width of AK along A^{-T} v
        w = np.linalg.solve(body.matrix.T, v)
        return w / np.linalg.norm(w)
    return None


def validate_body(obj, rule) -> BodyDiagnostics:
    """Min/max half width over the rule nodes; flags degeneracy instead of raising."""
    if rule.dim != obj.dim:
        raise InputError(f"rule is {rule.dim}-D, body is {obj.dim}-D")
    if isinstance(obj, WidthProfile):
        b = obj._evaluate(rule.nodes)
    else:
        b = _raw_half_width(obj, rule.nodes)
    kmin, kmax = int(np.argmin(b)), int(np.argmax(b))
    min_width, argmin = float(b[kmin]), rule.nodes[kmin].tolist()
    flat = None if isinstance(obj, WidthProfile) else flat_direction(obj)
    if flat is not None:
        min_width = float(_raw_half_width(obj, flat[None, :])[0])
        argmin = flat.tolist()
    return BodyDiagnostics(
        min_width=min_width,
        max_width=float(b[kmax]),
        argmin=argmin,
        argmax=rule.nodes[kmax].tolist(),
        degenerate=bool(min_width < EPS_WIDTH),
    )


# ---------------------------------------------------------------------------
# JSON schema

_BODY_KEYS = {
    "ball": {"type", "center", "radius"},
    "ellipsoid": {"type", "matrix", "center"},
    "polytope": {"type", "vertices"},
    "linear_image": {"type", "matrix", "body"},
}


def body_from_dict(data: dict, path: str = "body") -> SupportBody:
    """Parse the JSON body schema strictly; unknown keys are an error."""
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected an object")
    kind = data.get("type")
    if kind not in _BODY_KEYS:
        raise InputError(f"{path}.type: unknown body type {kind!r}")
    allowed = _BODY_KEYS[kind]
    extra = set(data) - allowed
    if extra:
        raise InputError(f"{path}: unknown key(s) {sorted(extra)}")
    missing = allowed - set(data)
    if missing:
        raise InputError(f"{path}: missing key(s) {sorted(missing)}")
    try:
        if kind == "ball":
            return Ball(data["center"], data["radius"])
        if kind == "ellipsoid":
            return Ellipsoid(data["matrix"], data["center"])
        if kind == "polytope":
            return Polytope(data["vertices"])
        return LinearImage(data["matrix"], body_from_dict(data["body"], f"{path}.body"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError) and str(exc).startswith(path):
            raise
        raise InputError(f"{path}: {exc}") from exc


def body_to_dict(body: SupportBody) -> dict:
    if isinstance(body, Ball):
        return {"type": "ball", "center": body.center.tolist(), "radius": body.radius}
    if isinstance(body, Ellipsoid):
        return {"type": "ellipsoid", "matrix": body.shape.tolist(),
                "center": body.center.tolist()}
    if isinstance(body, Polytope):
        return {"type": "polytope", "vertices": body.vertices.tolist()}
    return {"type": "linear_image", "matrix": body.matrix.tolist(),
            "body": body_to_dict(body.inner)}
