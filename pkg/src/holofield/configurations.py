"""Finite point configurations, test functions, and Poisson sampling."""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .geometry import Window

__all__ = [
    "Configuration",
    "TestFunction",
    "bump",
    "pair",
    "leq",
    "count_in",
    "sample_poisson",
]


@dataclasses.dataclass(frozen=True)
class Configuration:
    """An unordered finite collection of points with optional positive charges.

    points : array of shape ``(n, k)`` (``k`` = ambient coordinate count)
    charges : array of shape ``(n,)`` with positive entries, or None for the
        unmarked case (all charges implicitly 1).
    """

    points: np.ndarray
    charges: np.ndarray | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            pts = pts.reshape(0, pts.shape[1] if pts.ndim == 2 and pts.shape[1] else 1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.charges is not None:
            ch = np.asarray(self.charges, dtype=float).reshape(-1)
            if ch.shape[0] != pts.shape[0]:
                raise ValueError("one charge per point required")
            if np.any(ch <= 0):
                raise ValueError("charges must be positive")
            ch.setflags(write=False)
            object.__setattr__(self, "charges", ch)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def effective_charges(self) -> np.ndarray:
        if self.charges is None:
            return np.ones(len(self))
        return self.charges

    def canonical(self) -> "Configuration":
        """Equivalent configuration with rows sorted lexicographically."""
        rows = np.hstack([self.points, self.effective_charges()[:, None]])
        order = np.lexsort(rows.T[::-1])
        return Configuration(
            self.points[order],
            None if self.charges is None else self.charges[order],
        )

    def add(self, x, charge: float | None = None) -> "Configuration":
        x = np.asarray(x, dtype=float).reshape(1, -1)
        pts = np.vstack([self.points, x]) if len(self) else x
        if self.charges is None and charge is None:
            return Configuration(pts)
        ch = np.append(self.effective_charges(), 1.0 if charge is None else charge)
        return Configuration(pts, ch)

    def to_jsonable(self) -> dict:
        out = {"dim": self.dim, "points": self.points.tolist()}
        if self.charges is not None:
            out["charges"] = self.charges.tolist()
        return out

    @staticmethod
    def from_jsonable(data: dict) -> "Configuration":
        return Configuration(
            np.asarray(data["points"], dtype=float).reshape(-1, _width(data)),
            np.asarray(data["charges"], dtype=float) if "charges" in data else None,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "Configuration":
        return Configuration.from_jsonable(json.loads(text))


def _width(data: dict) -> int:
    if "dim" in data:
        return int(data["dim"])
    pts = data["points"]
    return len(pts[0]) if pts else 1


def empty(dim: int) -> Configuration:
    return Configuration(np.empty((0, dim)))


def pair(eta: Configuration, h) -> float:
    """Charge-weighted sum ``sum_j s_j h(x_j)`` of ``h`` over the configuration."""
    if len(eta) == 0:
        return 0.0
    vals = np.asarray(h(eta.points), dtype=float)
    return float(np.sum(eta.effective_charges() * vals))


def _row_multiset(config: Configuration) -> dict:
    counts: dict[bytes, int] = {}
    rows = np.hstack([config.points, config.effective_charges()[:, None]])
    for row in rows:
        key = row.tobytes()
        counts[key] = counts.get(key, 0) + 1
    return counts


def leq(eta: Configuration, gamma: Configuration) -> bool:
    """Sub-configuration (multiset) order, comparing coordinates exactly."""
    if len(eta) > len(gamma):
        return False
    big = _row_multiset(gamma)
    for key, cnt in _row_multiset(eta).items():
        if big.get(key, 0) < cnt:
            return False
    return True


def count_in(eta: Configuration, region: Window | None = None, mask_fn=None) -> float:
    """Number of points (not charge-weighted) inside a window or mask."""
    if len(eta) == 0:
        return 0.0
    if mask_fn is not None:
        mask = np.asarray(mask_fn(eta.points), dtype=bool)
    elif region is not None:
        mask = region.contains(eta.points)
    else:
        return float(len(eta))
    return float(np.count_nonzero(mask))


def sample_poisson(
    window: Window, intensity: float, rng: np.random.Generator
) -> Configuration:
    """One draw of the Poisson process with constant intensity on the window."""
    if intensity < 0:
        raise ValueError("intensity must be nonnegative")
    n = rng.poisson(intensity * window.volume)
    return Configuration(window.sample_uniform(rng, n))


@dataclasses.dataclass(frozen=True)
class TestFunction:
    """Smooth nonnegative function with compact support in a ball.

    The profile is ``height * cos(pi*u/2)**4`` with ``u = |x - center|/radius``,
    identically zero for ``u >= 1``.  The fourth power makes the function C^3
    across the support boundary (and smooth at the center), so quadratures
    against it converge fast.
    """

    center: np.ndarray
    radius: float
    height: float = 1.0

    __test__ = False  # keep pytest from collecting this as a test class

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.height < 0:
            raise ValueError("height must be nonnegative")

    @property
    def support_bounds(self) -> np.ndarray:
        return np.stack(
            [self.center - self.radius, self.center + self.radius], axis=1
        )

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.center.shape[0]:
            raise ValueError("point dimension does not match the center")
        u = np.linalg.norm(x - self.center, axis=1) / self.radius
        out = np.where(
            u < 1.0, self.height * np.cos(0.5 * np.pi * np.minimum(u, 1.0)) ** 4, 0.0
        )
        return out


def bump(center, radius: float, height: float = 1.0) -> TestFunction:
    return TestFunction(np.asarray(center, dtype=float), radius, height)
