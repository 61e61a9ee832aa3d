"""Coordinate splitting, the ball-times-box neighborhood of the mode, and
Euclidean projections onto the orthant and onto that neighborhood."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError


@dataclass(frozen=True)
class CoordinateSplit:
    """Partition of coordinate indices into regular (S0) and boundary (S1)."""

    S0: np.ndarray
    S1: np.ndarray

    def __post_init__(self):
        S0 = np.asarray(self.S0, dtype=int)
        S1 = np.asarray(self.S1, dtype=int)
        object.__setattr__(self, "S0", S0)
        object.__setattr__(self, "S1", S1)
        d = S0.size + S1.size
        combined = np.sort(np.concatenate([S0, S1]))
        if not np.array_equal(combined, np.arange(d)):
            raise ShapeError("S0 and S1 must partition {0,...,d-1}")

    @property
    def d0(self) -> int:
        return self.S0.size

    @property
    def d1(self) -> int:
        return self.S1.size

    @property
    def d(self) -> int:
        return self.d0 + self.d1


def split_coordinates(theta_hat, tau: float) -> tuple[CoordinateSplit, np.ndarray]:
    """Split coordinates at threshold ``tau`` and snap boundary ones to 0.

    Returns the split and the snapped center: j lands in S1 iff
    theta_hat[j] <= tau.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    if tau <= 0:
        raise ConfigError("tau must be positive")
    mask = theta_hat <= tau
    split = CoordinateSplit(S0=np.flatnonzero(~mask), S1=np.flatnonzero(mask))
    center = theta_hat.copy()
    center[mask] = 0.0
    return split, center


def default_deltas(d1: int, eps: float = 0.05, cbar0: float = 1.0,
                   cbar1: float = 1.0) -> tuple[float, float]:
    """Default radius multipliers delta0 = cbar0*log(1/eps),
    delta1 = cbar1*log(d1/eps). The cbar constants default to 1; no principled
    value is available, so they are exposed as configuration."""
    if not 0 < eps < 1:
        raise ConfigError("eps must lie in (0, 1)")
    delta0 = cbar0 * math.log(1.0 / eps)
    delta1 = cbar1 * math.log(max(d1, 1) / eps)
    return delta0, delta1


@dataclass(frozen=True)
class GoodSet:
    """Product region B2(center_S0, r0) x Binf(center_S1, r1), intersected
    with the orthant."""

    center: np.ndarray
    split: CoordinateSplit
    delta0: float
    delta1: float
    n: int
    r0: float
    r1: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", center)
        if center.shape != (self.split.d,):
            raise ShapeError("center length does not match the split dimension")

    def to_json(self) -> dict:
        return {
            "center": self.center.tolist(),
            "S0": self.split.S0.tolist(),
            "S1": self.split.S1.tolist(),
            "delta0": self.delta0,
            "delta1": self.delta1,
            "n": self.n,
            "r0": self.r0,
            "r1": self.r1,
        }

    @staticmethod
    def from_json(obj: dict) -> "GoodSet":
        return GoodSet(
            center=np.asarray(obj["center"], dtype=float),
            split=CoordinateSplit(S0=np.asarray(obj["S0"], dtype=int),
                                  S1=np.asarray(obj["S1"], dtype=int)),
            delta0=float(obj["delta0"]),
            delta1=float(obj["delta1"]),
            n=int(obj["n"]),
            r0=float(obj["r0"]),
            r1=float(obj["r1"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def build_good_set(theta_hat, split: CoordinateSplit, delta0: float | None,
                   delta1: float, n: int, *, warn=None) -> GoodSet:
    """Construct the good set with radii r0 = delta0*sqrt(d0/n), r1 = delta1/n.

    With no regular coordinates (d0 = 0) the set is the box alone; supplying
    delta0 in that case is a configuration error. ``warn`` is an optional
    callable receiving a message when r0 reaches the smallest regular
    coordinate of the center (the construction is then suspect).
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    if n < 1:
        raise ConfigError("n must be >= 1")
    if split.d0 == 0:
        if delta0 is not None:
            raise ConfigError("delta0 given but there are no regular coordinates")
        r0, delta0 = 0.0, 0.0
    else:
        if delta0 is None or delta0 <= 0:
            raise ConfigError("delta0 must be positive")
        r0 = delta0 * math.sqrt(split.d0 / n)
    if split.d1 == 0:
        r1 = 0.0
        delta1 = 0.0
    else:
        if delta1 <= 0:
            raise ConfigError("delta1 must be positive")
        r1 = delta1 / n

    center = theta_hat.copy()
    center[split.S1] = 0.0
    if split.d0 > 0 and warn is not None:
        min_s0 = float(np.min(center[split.S0]))
        if r0 >= min_s0:
            warn(f"ball radius r0={r0:.3g} reaches the smallest regular "
                 f"coordinate {min_s0:.3g}")
    return GoodSet(center=center, split=split, delta0=float(delta0),
                   delta1=float(delta1), n=int(n), r0=float(r0), r1=float(r1))


def _l2(diff, axis=None):
    # one summation order shared by membership tests and the projection, so
    # a projected point can never fail membership by an ulp (BLAS nrm2 and
    # the vectorized norm round differently)
    diff = np.asarray(diff, dtype=float)
    return np.sqrt(np.sum(diff * diff, axis=axis))


def contains(gs: GoodSet, theta) -> bool:
    """Closed-set membership with exact comparisons."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != gs.center.shape:
        raise ShapeError("theta dimension does not match the good set")
    if np.any(theta < 0):
        return False
    if gs.split.d0 > 0:
        dist = _l2(theta[gs.split.S0] - gs.center[gs.split.S0])
        if dist > gs.r0:
            return False
    if gs.split.d1 > 0:
        if np.max(np.abs(theta[gs.split.S1] - gs.center[gs.split.S1])) > gs.r1:
            return False
    return True


def contains_many(gs: GoodSet, thetas) -> np.ndarray:
    """Vectorized membership for a (rows x d) sample matrix."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != gs.center.shape[0]:
        raise ShapeError("sample dimension does not match the good set")
    ok = np.all(thetas >= 0, axis=1)
    if gs.split.d0 > 0:
        diff = thetas[:, gs.split.S0] - gs.center[gs.split.S0]
        ok &= _l2(diff, axis=1) <= gs.r0
    if gs.split.d1 > 0:
        diff = np.abs(thetas[:, gs.split.S1] - gs.center[gs.split.S1])
        ok &= np.max(diff, axis=1) <= gs.r1
    return ok


def project_orthant(theta) -> np.ndarray:
    """Coordinate-wise max(theta, 0)."""
    return np.maximum(np.asarray(theta, dtype=float), 0.0)


def project_good_set(gs: GoodSet, theta) -> np.ndarray:
    """Exact Euclidean projection onto the good set.

    The set is a product over the (S0, S1) blocks, so the joint projection is
    the product of blockwise projections: radial scaling onto the ball for
    S0, clamping to [max(c - r1, 0), c + r1] for each S1 coordinate.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != gs.center.shape:
        raise ShapeError("theta dimension does not match the good set")
    out = theta.copy()
    if gs.split.d0 > 0:
        c0 = gs.center[gs.split.S0]
        v = theta[gs.split.S0] - c0
        norm = _l2(v)
        if norm > gs.r0:
            scale = gs.r0 / norm
            # rounding can leave the stored point an ulp outside the closed
            # ball that contains() tests exactly; step the factor down until
            # membership holds for the representation actually stored
            cand = np.maximum(c0 + v * scale, 0.0)
            while _l2(cand - c0) > gs.r0:
                scale = np.nextafter(scale, 0.0)
                cand = np.maximum(c0 + v * scale, 0.0)
            out[gs.split.S0] = cand
        else:
            out[gs.split.S0] = np.maximum(c0 + v, 0.0)
    if gs.split.d1 > 0:
        c1 = gs.center[gs.split.S1]
        lo = np.maximum(c1 - gs.r1, 0.0)
        hi = c1 + gs.r1
        out[gs.split.S1] = np.clip(theta[gs.split.S1], lo, hi)
    return out
