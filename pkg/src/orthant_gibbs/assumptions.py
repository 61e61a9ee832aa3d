"""Numerical checks of the local tractability constants and the bound
formulas built from them.

Constants are estimated by Monte Carlo over a ball-times-box region around
the mode: the smallest eigenvalue of the negated regular-block Hessian
(c_S0), the most negative boundary partial derivative (C_S1), and the
largest Hessian operator norm (s2). The reports are labeled estimates, not
certificates; grid size and seed are recorded for reproducibility.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import models
from .errors import ConfigError, DomainError, NumericalError
from .geometry import CoordinateSplit
from .rng import make_rng


@dataclass(frozen=True)
class RegionSpec:
    """Monte Carlo description of the region B(center, r0, r1)."""

    center: np.ndarray
    split: CoordinateSplit
    r0: float
    r1: float
    grid: int = 200
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.grid < 1:
            raise ConfigError("grid must be >= 1")
        if self.split.d0 > 0 and self.r0 <= 0:
            raise ConfigError("r0 must be positive when regular coordinates exist")
        if self.split.d1 > 0 and self.r1 <= 0:
            raise ConfigError("r1 must be positive when boundary coordinates exist")


@dataclass(frozen=True)
class AssumptionReport:
    c_S0_hat: float  # min over the grid of lambda_min(-Hess restricted to S0)
    C_S1_hat: float  # min over grid and j in S1 of -d_j loglik
    s2_hat: float    # max over the grid of the Hessian operator norm
    osc_bound: float
    C_PI_bound: float
    grid: int
    seed: int
    zeta_hat: float | None = None

    def __post_init__(self):
        finite = [self.c_S0_hat, self.C_S1_hat, self.s2_hat, self.osc_bound]
        if not all(math.isfinite(v) for v in finite if not math.isnan(v)):
            raise NumericalError("assumption report contains non-finite estimates")
        # C_PI_bound may be +inf: the vacuous bound reported when a measured
        # curvature/gradient constant is non-positive on the region.
        if math.isnan(self.C_PI_bound) or self.C_PI_bound < 0:
            raise NumericalError("C_PI_bound must be a non-negative number")

    def to_json(self) -> dict:
        return {
            "c_S0_hat": self.c_S0_hat,
            "C_S1_hat": self.C_S1_hat,
            "s2_hat": self.s2_hat,
            "osc_bound": self.osc_bound,
            "C_PI_bound": self.C_PI_bound,
            "zeta_hat": self.zeta_hat,
            "grid": self.grid,
            "seed": self.seed,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def sample_region(region: RegionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws from the ball-times-box region (rejection-free),
    clamped to the orthant.

    The region is defined intersected with the orthant; clamping a ball draw
    coordinate-wise at zero can only shrink its distance to the (orthant)
    center, so clamped points stay inside the region.
    """
    out = np.tile(region.center, (size, 1))
    split = region.split
    if split.d0 > 0:
        z = rng.standard_normal((size, split.d0))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        radii = region.r0 * rng.random(size) ** (1.0 / split.d0)
        out[:, split.S0] += radii[:, None] * z
    if split.d1 > 0:
        lo = np.maximum(region.center[split.S1] - region.r1, 0.0)
        hi = region.center[split.S1] + region.r1
        out[:, split.S1] = rng.uniform(lo, hi, (size, split.d1))
    return np.maximum(out, 0.0)


def operator_norm(H: np.ndarray, *, iters: int = 50, tol: float = 1e-8) -> float:
    """Spectral norm of a symmetric matrix by power iteration.

    Falls back to a dense eigensolve for d <= 200 when the iteration has not
    settled within ``iters`` steps.
    """
    d = H.shape[0]
    v = np.ones(d) + 1e-3 * np.arange(d)
    v /= np.linalg.norm(v)
    prev = 0.0
    est = 0.0
    for _ in range(iters):
        w = H @ v
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        v = w / est
        if abs(est - prev) <= tol * max(1.0, est):
            return est
        prev = est
    if d <= 200:
        return float(np.max(np.abs(np.linalg.eigvalsh(H))))
    return est


def estimate_constants(model: models.ModelInstance, region: RegionSpec,
                       *, poincare_factor: float = 4.0) -> AssumptionReport:
    """Monte Carlo estimates of (c_S0, C_S1, s2) over ``region`` plus the
    oscillation and Poincare bounds implied by them.

    The radius multipliers are recovered from the region radii via
    delta0 = r0*sqrt(n/d0) and delta1 = r1*n with n the model sample count.
    """
    rng = make_rng(region.seed, 0xA5)
    pts = sample_region(region, rng, region.grid)
    split = region.split
    d0, d1, n = split.d0, split.d1, model.n

    c_s0 = math.inf if d0 > 0 else math.nan
    c_s1 = math.inf if d1 > 0 else math.nan
    s2 = 0.0
    for theta in pts:
        H = models.hess_log_lik(model, theta)
        s2 = max(s2, operator_norm(H))
        if d0 > 0:
            block = H[np.ix_(split.S0, split.S0)]
            c_s0 = min(c_s0, float(np.linalg.eigvalsh(-block)[0]))
        if d1 > 0:
            g = models.grad_log_lik(model, theta)
            c_s1 = min(c_s1, float(np.min(-g[split.S1])))

    delta0 = region.r0 * math.sqrt(n / d0) if d0 > 0 else 0.0
    delta1 = region.r1 * n if d1 > 0 else 0.0
    osc = osc_bound(s2, delta0, delta1, d0, d1, n)
    prior_osc = model.prior.oscillation(region.r1 if d1 > 0 else 0.0)
    if (d0 > 0 and c_s0 <= 0) or (d1 > 0 and c_s1 <= 0):
        # A non-positive measured constant means the curvature/boundary-
        # gradient assumption fails somewhere on the region; the Poincare
        # bound is then vacuous.  Report it as such rather than erroring so
        # callers can inspect the offending estimate.
        cpi = math.inf
    else:
        cpi = poincare_bound(c_s0, c_s1, s2, delta0, delta1, d0, d1, n,
                             prior_osc=prior_osc, factor=poincare_factor)
    return AssumptionReport(c_S0_hat=c_s0, C_S1_hat=c_s1, s2_hat=s2,
                            osc_bound=osc, C_PI_bound=cpi,
                            grid=region.grid, seed=region.seed)


def decompose_likelihood(model: models.ModelInstance, theta_hat, split: CoordinateSplit,
                         theta, *, grad_hat: np.ndarray | None = None
                         ) -> tuple[float, float, float]:
    """Split the log-likelihood at ``theta`` into (f, g, B) parts.

    f is the likelihood with the boundary block frozen at the mode, g is the
    linear boundary term sum_j d_j l(theta_hat) * theta_j, and B is the
    remainder, so l = B + f + g holds identically.
    """
    theta = np.asarray(theta, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    frozen = theta.copy()
    frozen[split.S1] = theta_hat[split.S1]
    f_part = models.log_lik(model, frozen)
    if split.d1 > 0:
        if grad_hat is None:
            grad_hat = models.grad_log_lik(model, theta_hat)
        g_part = float(grad_hat[split.S1] @ theta[split.S1])
    else:
        g_part = 0.0
    b_part = models.log_lik(model, theta) - f_part - g_part
    return f_part, g_part, b_part


def osc_bound(s2: float, delta0: float, delta1: float, d0: int, d1: int,
              n: int) -> float:
    """Upper bound on the oscillation of the coupling term B:
    2*s2*(delta0*delta1*sqrt(d0*d1)/n^(3/2) + delta1^2*d1/n^2)."""
    if d1 == 0:
        return 0.0
    return 2.0 * s2 * (delta0 * delta1 * math.sqrt(d0 * d1) / n**1.5
                       + delta1**2 * d1 / n**2)


def poincare_bound(c_S0: float, C_S1: float, s2: float, delta0: float,
                   delta1: float, d0: int, d1: int, n: int, *,
                   prior_osc: float = 0.0, factor: float = 4.0) -> float:
    """Poincare-constant bound for the Gibbs measure restricted to the good
    set: max(1/(n*c_S0), factor*exp(prior_osc)/(n^2*C_S1^2)) times
    exp(2*s2*(delta0*delta1*sqrt(d0*d1)/sqrt(n) + delta1^2*d1/n)).

    ``factor`` is 4 for the deterministic statement and 16 for the random
    (empirical-likelihood) variant, where C_S1 plays the role of c_S1.
    Degenerate blocks (d0 = 0 or d1 = 0) drop the corresponding branch.
    """
    if prior_osc < 0:
        raise ConfigError("prior_osc must be non-negative")
    branches = []
    if d0 > 0:
        if c_S0 <= 0:
            raise ConfigError("c_S0 must be positive")
        branches.append(1.0 / (n * c_S0))
    if d1 > 0:
        if C_S1 <= 0:
            raise ConfigError("C_S1 must be positive")
        branches.append(factor * math.exp(prior_osc) / (n**2 * C_S1**2))
    if not branches:
        raise ConfigError("at least one of d0, d1 must be positive")
    expo = 2.0 * s2 * (delta0 * delta1 * math.sqrt(d0 * d1) / math.sqrt(n)
                       + delta1**2 * d1 / n)
    return max(branches) * math.exp(expo)


def concentration_sample_size(d0: int, d1: int, eps: float,
                              cbar4: float = 1.0) -> int:
    """Sample size sufficient for good-set concentration:
    ceil(cbar4 * d0 * d1 * log^2((d0+d1)/eps))."""
    if d0 < 1 or d1 < 1:
        raise ConfigError("d0 and d1 must be >= 1")
    if not 0 < eps < 1:
        raise ConfigError("eps must lie in (0, 1)")
    if cbar4 <= 0:
        raise ConfigError("cbar4 must be positive")
    return math.ceil(cbar4 * d0 * d1 * math.log((d0 + d1) / eps) ** 2)


def _in_region(region: RegionSpec, theta: np.ndarray) -> bool:
    split = region.split
    if split.d0 > 0:
        if np.linalg.norm(theta[split.S0] - region.center[split.S0]) > region.r0:
            return False
    if split.d1 > 0:
        if np.max(np.abs(theta[split.S1] - region.center[split.S1])) > region.r1:
            return False
    return True


def check_well_separation(model: models.ModelInstance, mode_result, region: RegionSpec,
                          bounds, n_outside_samples: int = 1000,
                          seed: int = 0) -> float:
    """Heuristic lower-confidence estimate of the separation gap zeta.

    Samples uniformly from the bounding box (intersected with the orthant),
    keeps points outside the region, and returns the minimum of
    loglik(mode) - loglik(theta) over them. A non-positive value flags a
    failed well-separation assumption.
    """
    lo = np.maximum(np.asarray(bounds[0], dtype=float), 0.0)
    hi = np.asarray(bounds[1], dtype=float)
    if lo.shape != hi.shape or np.any(hi <= lo):
        raise ConfigError("bounding box is empty")
    rng = make_rng(seed, 0x5E)
    theta_hat = np.asarray(mode_result.theta_hat, dtype=float)
    ll_hat = models.log_lik(model, theta_hat)
    zeta = math.inf
    n_outside = 0
    for _ in range(n_outside_samples):
        theta = rng.uniform(lo, hi)
        if _in_region(region, theta):
            continue
        n_outside += 1
        try:
            zeta = min(zeta, ll_hat - models.log_lik(model, theta))
        except DomainError:
            continue  # inadmissible points are infinitely separated
    if n_outside == 0:
        raise ConfigError("no samples landed outside the region; enlarge the box")
    return zeta
