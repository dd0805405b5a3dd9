"""Spaces, windows, complexified points, and isometry-group actions.

Points of a Euclidean space of dimension ``d`` are arrays of shape ``(d,)``;
points of a sphere of dimension ``d`` live in the ambient ``(d+1,)``
coordinates and satisfy ``x . x = R**2``.  Complexified points are the same
arrays with ``complex128`` entries, paired with the *bilinear* (not
Hermitian) extension of the dot product:  ``z . w = sum_k z_k w_k``.

Real-time ("Minkowski") points are represented by their real coordinates
``(t, x_1, ..)``; :func:`wick_embed` maps them into the complexified space by
multiplying the time coordinate by ``1j`` (flat case) or onto the complex
hyperboloid (circle case).  Lorentz boosts act on those real coordinates via
:func:`lorentz_boost_real` and, equivalently, on the embedded points through
the complex-orthogonal rotation returned by
:func:`boost_as_complex_rotation`.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

__all__ = [
    "GeometryError",
    "Space",
    "Window",
    "GroupElement",
    "bilinear",
    "euclidean_isometry",
    "complex_orthogonal",
    "random_rotation",
    "lorentz_boost_real",
    "time_reflection_real",
    "boost_as_complex_rotation",
    "reflection_conjugated_by_boost",
    "wick_embed",
    "desitter_embed",
]

_ORTHO_TOL = 1e-12
_SPHERE_TOL = 1e-10


class GeometryError(ValueError):
    """Raised for invalid geometric data (bad matrices, off-sphere points)."""


def bilinear(z, w) -> complex:
    """Bilinear dot product ``sum_k z_k w_k`` (no complex conjugation)."""
    z = np.asarray(z)
    w = np.asarray(w)
    return complex(np.sum(z * w))


@dataclasses.dataclass(frozen=True)
class Space:
    """Base space of the particle system.

    kind : ``"euclidean"`` or ``"sphere"``
    dim : intrinsic dimension ``d``
    radius : sphere radius (ignored for Euclidean spaces)
    """

    kind: str
    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "sphere"):
            raise GeometryError(f"unknown space kind {self.kind!r}")
        if self.dim < 1:
            raise GeometryError("dimension must be >= 1")
        if self.kind == "sphere" and not self.radius > 0:
            raise GeometryError("sphere radius must be positive")

    @property
    def ambient_dim(self) -> int:
        """Number of coordinates used to store a point."""
        return self.dim if self.kind == "euclidean" else self.dim + 1

    def on_space(self, x, tol: float = _SPHERE_TOL) -> bool:
        """Whether ``x`` lies on the space (always true for Euclidean)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return x.shape[-1] == self.dim
        r2 = float(np.sum(x * x, axis=-1))
        return abs(r2 - self.radius**2) <= tol * max(1.0, self.radius**2)


def euclidean(dim: int) -> Space:
    return Space("euclidean", dim)


def sphere(dim: int, radius: float = 1.0) -> Space:
    return Space("sphere", dim, radius)


@dataclasses.dataclass(frozen=True)
class Window:
    """Bounded observation region carrying the reference intensity measure.

    For a Euclidean space this is an axis-aligned box with per-axis bounds
    ``bounds[i] = (lo_i, hi_i)``; for a sphere it is the whole sphere and
    ``bounds`` is ignored.
    """

    space: Space
    bounds: np.ndarray | None = None

    def __post_init__(self):
        if self.space.kind == "euclidean":
            if self.bounds is None:
                raise GeometryError("euclidean window needs bounds")
            b = np.array(self.bounds, dtype=float)
            if b.shape != (self.space.dim, 2):
                raise GeometryError(
                    f"bounds must have shape ({self.space.dim}, 2), got {b.shape}"
                )
            if not np.all(b[:, 1] > b[:, 0]):
                raise GeometryError("window must have positive side lengths")
            b.setflags(write=False)
            object.__setattr__(self, "bounds", b)
        else:
            object.__setattr__(self, "bounds", None)

    @property
    def volume(self) -> float:
        """Total reference measure: box volume, or sphere surface area."""
        if self.space.kind == "euclidean":
            return float(np.prod(self.bounds[:, 1] - self.bounds[:, 0]))
        d, r = self.space.dim, self.space.radius
        return 2.0 * math.pi ** ((d + 1) / 2.0) * r**d / math.gamma((d + 1) / 2.0)

    def contains(self, x) -> np.ndarray:
        """Boolean mask of which points of ``x`` (shape ``(n, k)``) lie inside."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.space.kind == "euclidean":
            return np.all((x >= self.bounds[:, 0]) & (x <= self.bounds[:, 1]), axis=1)
        r2 = np.sum(x * x, axis=1)
        return np.abs(r2 - self.space.radius**2) <= _SPHERE_TOL * max(
            1.0, self.space.radius**2
        )

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` independent uniform points; shape ``(n, ambient_dim)``."""
        if self.space.kind == "euclidean":
            lo, hi = self.bounds[:, 0], self.bounds[:, 1]
            return lo + rng.random((n, self.space.dim)) * (hi - lo)
        g = rng.standard_normal((n, self.space.ambient_dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return self.space.radius * g


def box_window(space: Space, bounds) -> Window:
    return Window(space, np.asarray(bounds, dtype=float))


@dataclasses.dataclass(frozen=True)
class GroupElement:
    """Affine map ``z -> M @ z + c`` with complex-orthogonal matrix part.

    ``M`` satisfies ``M.T @ M = 1`` (bilinear orthogonality); real isometries
    are the special case of real ``M`` and ``c``.  ``kind`` records how the
    element was built and is informational only.
    """

    matrix: np.ndarray
    shift: np.ndarray
    kind: str = "complex_orthogonal"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        c = np.array(self.shift, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GeometryError("matrix part must be square")
        if c.shape != (m.shape[0],):
            raise GeometryError("shift length must match matrix size")
        defect = np.max(np.abs(m.T @ m - np.eye(m.shape[0])))
        if defect > _ORTHO_TOL:
            raise GeometryError(
                f"matrix is not bilinear-orthogonal (defect {defect:.3e})"
            )
        m.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "shift", c)

    @property
    def is_real(self) -> bool:
        return bool(
            np.all(self.matrix.imag == 0.0) and np.all(self.shift.imag == 0.0)
        )

    def apply(self, z) -> np.ndarray:
        """Apply to one point ``(k,)`` or a batch ``(n, k)``."""
        z = np.asarray(z, dtype=complex)
        return z @ self.matrix.T + self.shift

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Composition ``self after other``: ``(self*other)(z) = self(other(z))``."""
        return GroupElement(
            self.matrix @ other.matrix,
            self.matrix @ other.shift + self.shift,
            kind="composition",
        )

    def inverse(self) -> "GroupElement":
        minv = self.matrix.T
        return GroupElement(minv, -(minv @ self.shift), kind="inverse")


def euclidean_isometry(rotation, translation) -> GroupElement:
    """Real isometry ``x -> O @ x + a`` of Euclidean space."""
    rot = np.asarray(rotation, dtype=float)
    tr = np.asarray(translation, dtype=float)
    return GroupElement(rot, tr, kind="euclidean")


def complex_orthogonal(matrix, shift=None) -> GroupElement:
    matrix = np.asarray(matrix, dtype=complex)
    if shift is None:
        shift = np.zeros(matrix.shape[0])
    return GroupElement(matrix, shift, kind="complex_orthogonal")


def identity(k: int) -> GroupElement:
    return GroupElement(np.eye(k), np.zeros(k), kind="identity")


def random_rotation(rng: np.random.Generator, k: int) -> GroupElement:
    """Haar-ish random real rotation in O(k) via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    q = q * np.sign(np.diag(r))
    return GroupElement(q, np.zeros(k), kind="rotation")


def lorentz_boost_real(chi: float, dim: int) -> np.ndarray:
    """Real boost matrix with rapidity ``chi`` mixing coordinates (0, 1).

    Acts on real-time coordinates ``(t, x_1, ..)``; requires ``dim >= 2``.
    """
    if dim < 2:
        raise GeometryError("a boost needs at least two coordinates")
    m = np.eye(dim)
    ch, sh = math.cosh(chi), math.sinh(chi)
    m[0, 0] = m[1, 1] = ch
    m[0, 1] = m[1, 0] = sh
    return m


def time_reflection_real(dim: int) -> np.ndarray:
    """Reflection of the time coordinate on real-time points."""
    m = np.eye(dim)
    m[0, 0] = -1.0
    return m


def boost_as_complex_rotation(chi: float, dim: int) -> GroupElement:
    """Boost of rapidity ``chi`` as a complex-orthogonal rotation.

    The returned element ``M`` acts on embedded points and satisfies
    ``wick_embed(L @ y) == M.apply(wick_embed(y))`` for every real-time
    point ``y``, where ``L = lorentz_boost_real(chi, dim)``.
    """
    if dim < 2:
        raise GeometryError("a boost needs at least two coordinates")
    m = np.eye(dim, dtype=complex)
    ch, sh = math.cosh(chi), math.sinh(chi)
    m[0, 0] = m[1, 1] = ch
    m[0, 1] = 1j * sh
    m[1, 0] = -1j * sh
    return GroupElement(m, np.zeros(dim), kind="boost")


def time_reflection(dim: int) -> GroupElement:
    """Time reflection as a group element on embedded points.

    On embedded coordinates, reflecting the real time ``t -> -t`` is the
    ordinary reflection of coordinate 0.
    """
    m = np.eye(dim, dtype=complex)
    m[0, 0] = -1.0
    return GroupElement(m, np.zeros(dim), kind="time_reflection")


def reflection_conjugated_by_boost(chi: float, dim: int) -> np.ndarray:
    """Real matrix of ``theta . theta_alpha`` with ``alpha`` the boost ``chi``.

    ``theta_alpha = alpha^-1 . theta . alpha`` is the boost-conjugated time
    reflection; the product with ``theta`` is again proper and equals the
    boost of rapidity ``2 * chi``.
    """
    theta = time_reflection_real(dim)
    alpha = lorentz_boost_real(chi, dim)
    alpha_inv = lorentz_boost_real(-chi, dim)
    return theta @ alpha_inv @ theta @ alpha


def wick_embed(y) -> np.ndarray:
    """Embed real-time points into the complexified flat space.

    ``(t, x_1, ..) -> (1j * t, x_1, ..)``.  Accepts one point ``(d,)`` or a
    batch ``(n, d)``; real input is required (the slice has real coordinates).
    """
    y = np.asarray(y)
    if np.iscomplexobj(y):
        if np.any(y.imag != 0):
            raise ValueError("slice coordinates must be real")
        y = y.real
    y = np.asarray(y, dtype=float)
    z = y.astype(complex)
    z[..., 0] = 1j * y[..., 0]
    return z


def desitter_embed(t, radius: float = 1.0) -> np.ndarray:
    """Embed real hyperbolic times onto the complexified circle of radius R.

    ``t -> (1j * R * sinh(t), R * cosh(t))``; the image satisfies
    ``z . z = R**2`` and a boost of rapidity ``chi`` acts as ``t -> t + chi``.
    """
    t = np.asarray(t, dtype=float)
    z = np.empty(t.shape + (2,), dtype=complex)
    z[..., 0] = 1j * radius * np.sinh(t)
    z[..., 1] = radius * np.cosh(t)
    return z
