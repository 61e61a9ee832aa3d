"""Chain diagnostics: rank-normalized bulk ESS, credible intervals and
coverage, bounded-expectation estimates, good-set mass, and a 1-D
finite-difference spectral-gap oracle for reflected Langevin generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.fft import next_fast_len, rfft, irfft
from scipy.linalg import eigh_tridiagonal
from scipy.stats import norm, rankdata

from .errors import (ConfigError, DegenerateChainError, NumericalError,
                     RangeError, ShapeError)
from .geometry import CoordinateSplit, GoodSet, contains_many

ESS_CLIP_FACTOR = 1.5  # standard safeguard for antithetic chains
RANK_OFFSET_NUM = 0.375  # rank r maps to the normal quantile of (r - 3/8)/(N + 1/4)
RANK_OFFSET_DEN = 0.25


# ---------------------------------------------------------------------------
# effective sample size
# ---------------------------------------------------------------------------


def _stack_chains(chains) -> np.ndarray:
    arr = np.asarray(chains, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ShapeError("chains must be a vector or a (n_chains, n_draws) matrix")
    if arr.shape[1] < 8:
        raise ConfigError("each chain must have at least 8 draws")
    return arr


def _split_chains(arr: np.ndarray) -> np.ndarray:
    half = arr.shape[1] // 2
    return np.vstack([arr[:, :half], arr[:, -half:]])


def _rank_normalize(arr: np.ndarray) -> np.ndarray:
    ranks = rankdata(arr, method="average")
    quantiles = (ranks - RANK_OFFSET_NUM) / (arr.size + RANK_OFFSET_DEN)
    return norm.ppf(quantiles).reshape(arr.shape)

def _autocovariance(x: np.ndarray) -> np.ndarray:
    n = x.size
    x = x - x.mean()
    m = next_fast_len(2 * n)
    f = rfft(x, m)
    acov = irfft(f * np.conj(f), m)[:n]
    return acov / n


def _ess_from_z(z: np.ndarray) -> float:
    """Multi-chain ESS with Geyer initial-monotone truncation on a
    (n_chains, n_draws) array of (already transformed) draws."""
    n_chain, n_draw = z.shape
    acov = np.array([_autocovariance(z[c]) for c in range(n_chain)])
    chain_mean = z.mean(axis=1)
    mean_var = float(np.mean(acov[:, 0])) * n_draw / (n_draw - 1.0)
    var_plus = mean_var * (n_draw - 1.0) / n_draw
    if n_chain > 1:
        var_plus += float(np.var(chain_mean, ddof=1))
    if var_plus == 0.0:
        raise DegenerateChainError("zero variance after rank normalization")

    rho = np.zeros(n_draw)
    rho[0] = 1.0
    rho_even = 1.0
    rho_odd = 1.0 - (mean_var - float(np.mean(acov[:, 1]))) / var_plus
    rho[1] = rho_odd
    # initial positive sequence: sum paired autocorrelations while positive
    t = 1
    while t < n_draw - 2 and (rho_even + rho_odd) >= 0.0:
        rho_even = 1.0 - (mean_var - float(np.mean(acov[:, t + 1]))) / var_plus
        rho_odd = 1.0 - (mean_var - float(np.mean(acov[:, t + 2]))) / var_plus
        rho[t + 1] = rho_even
        if (rho_even + rho_odd) >= 0.0:
            rho[t + 2] = rho_odd
        t += 2
    max_t = t
    # initial monotone sequence: enforce non-increasing pair sums
    t = 1
    while t <= max_t - 2:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = (rho[t - 1] + rho[t]) / 2.0
            rho[t + 2] = rho[t + 1]
        t += 2
    tau = -1.0 + 2.0 * float(np.sum(rho[:max_t])) + float(np.sum(rho[max_t + 1:max_t + 2]))
    n_total = n_chain * n_draw
    ess = n_total / tau
    if not math.isfinite(ess) or ess <= 0:
        raise NumericalError("ESS computation produced a non-positive value")
    return min(ess, ESS_CLIP_FACTOR * n_total)


def bulk_ess(chains) -> float:
    """Rank-normalized bulk effective sample size of one or more chains.

    Pooled ranks are mapped to standard-normal quantiles via
    (r - 3/8)/(N + 1/4), each chain is split in half, and the multi-chain
    autocorrelation sum uses Geyer's initial monotone positive sequence.
    The result is clipped above at 1.5x the total draw count.
    """
    arr = _stack_chains(chains)
    if np.all(arr == arr.flat[0]):
        raise DegenerateChainError("constant chain has no information")
    return _ess_from_z(_rank_normalize(_split_chains(arr)))


@dataclass(frozen=True)
class EssReport:
    per_coordinate: np.ndarray
    llr_ess: float
    n_kept: int
    n_chains: int

    def to_json(self) -> dict:
        return {"per_coordinate": np.asarray(self.per_coordinate).tolist(),
                "llr_ess": self.llr_ess, "n_kept": self.n_kept,
                "n_chains": self.n_chains}


def ess_report(samples_by_chain: Sequence[np.ndarray],
               log_post_by_chain: Sequence[np.ndarray]) -> EssReport:
    """Per-coordinate bulk ESS plus the ESS of the log-posterior trace.

    The log-posterior trace stands in for the log-likelihood ratio: the two
    differ by an additive constant, which rank normalization ignores.
    """
    stacked = np.stack([np.asarray(s, dtype=float) for s in samples_by_chain])
    n_chains, n_kept, d = stacked.shape
    per_coord = np.array([bulk_ess(stacked[:, :, j]) for j in range(d)])
    llr = bulk_ess(np.stack([np.asarray(t, dtype=float) for t in log_post_by_chain]))
    return EssReport(per_coordinate=per_coord, llr_ess=llr,
                     n_kept=n_kept, n_chains=n_chains)


# ---------------------------------------------------------------------------
# credible intervals and coverage
# ---------------------------------------------------------------------------


def credible_interval(samples, level: float) -> tuple[float, float]:
    """Equal-tailed interval with linearly interpolated empirical quantiles
    (index p*(n-1), zero-based)."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 2:
        raise ConfigError("need at least 2 samples")
    if not 0 < level < 1:
        raise ConfigError("level must lie in (0, 1)")
    lo, hi = np.quantile(samples, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


@dataclass(frozen=True)
class CoverageReport:
    per_coordinate_coverage: np.ndarray
    n_trials: int
    level: float
    boundary_flags: np.ndarray

    def to_json(self) -> dict:
        return {"per_coordinate_coverage": np.asarray(self.per_coordinate_coverage).tolist(),
                "n_trials": self.n_trials, "level": self.level,
                "boundary_flags": np.asarray(self.boundary_flags).tolist()}


def coverage_experiment(trial_samples: Sequence[np.ndarray], theta_star,
                        level: float, split: CoordinateSplit) -> CoverageReport:
    """Fraction of trials whose per-coordinate interval contains the truth."""
    theta_star = np.asarray(theta_star, dtype=float)
    d = theta_star.size
    hits = np.zeros(d)
    n_trials = 0
    for samples in trial_samples:
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != d:
            raise ShapeError("trial sample matrix does not match theta_star")
        n_trials += 1
        for j in range(d):
            lo, hi = credible_interval(samples[:, j], level)
            if lo <= theta_star[j] <= hi:
                hits[j] += 1
    flags = np.zeros(d, dtype=bool)
    flags[split.S1] = True
    return CoverageReport(per_coordinate_coverage=hits / n_trials,
                          n_trials=n_trials, level=level, boundary_flags=flags)


# ---------------------------------------------------------------------------
# expectations and good-set mass
# ---------------------------------------------------------------------------


def _chain_samples(chain) -> np.ndarray:
    samples = getattr(chain, "samples", chain)
    return np.atleast_2d(np.asarray(samples, dtype=float))


def estimate_expectation(chain, f: Callable[[np.ndarray], float]
                         ) -> tuple[float, float]:
    """Sample mean of a [0,1]-valued function with an ESS-adjusted
    Monte Carlo standard error."""
    samples = _chain_samples(chain)
    if samples.shape[0] == 0:
        raise ConfigError("chain is empty")
    vals = np.array([float(f(row)) for row in samples])
    if np.any(vals < 0) or np.any(vals > 1):
        raise RangeError("f must map into [0, 1]")
    est = float(np.mean(vals))
    if np.all(vals == vals[0]):
        return est, 0.0
    ess = bulk_ess(vals)
    return est, float(math.sqrt(np.var(vals) / ess))


def good_set_mass(chain, gs: GoodSet) -> float:
    """Monte Carlo estimate of the good-set posterior mass from an
    orthant-projected chain."""
    samples = _chain_samples(chain)
    return float(np.mean(contains_many(gs, samples)))


# ---------------------------------------------------------------------------
# 1-D spectral-gap oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralGapResult:
    gap: float
    grid_points: int
    domain: tuple[float, float]

    @property
    def implied_C_PI(self) -> float:
        return 1.0 / self.gap

    def to_json(self) -> dict:
        return {"gap": self.gap, "grid_points": self.grid_points,
                "domain": list(self.domain), "implied_C_PI": self.implied_C_PI}


def spectral_gap_1d(log_density: Callable[[np.ndarray], np.ndarray],
                    a: float, b: float, grid_points: int = 10_000
                    ) -> SpectralGapResult:
    """Smallest nonzero eigenvalue of the reflected Langevin generator
    -(f'' + (log mu)' f') on [a, b], weighted by mu.

    Cell-centered finite volumes with density weights at cell edges and
    zero-flux (Neumann) outer boundaries; a similarity transform makes the
    matrix symmetric tridiagonal so a standard eigensolver applies.
    """
    if grid_points < 100:
        raise ConfigError("grid_points must be >= 100")
    if not b > a:
        raise ConfigError("domain must satisfy b > a")
    m = int(grid_points)
    h = (b - a) / m
    nodes = a + (np.arange(m) + 0.5) * h
    edges = a + np.arange(1, m) * h
    log_w_nodes = np.asarray(log_density(nodes), dtype=float)
    log_w_edges = np.asarray(log_density(edges), dtype=float)
    if not (np.all(np.isfinite(log_w_nodes)) and np.all(np.isfinite(log_w_edges))):
        raise ConfigError("log density must be finite on [a, b]")
    shift = log_w_nodes.max()
    w_nodes = np.exp(log_w_nodes - shift)
    w_edges = np.exp(log_w_edges - shift)

    diag = np.zeros(m)
    diag[:-1] += w_edges / w_nodes[:-1]
    diag[1:] += w_edges / w_nodes[1:]
    off = -w_edges / np.sqrt(w_nodes[:-1] * w_nodes[1:])
    try:
        evals = eigh_tridiagonal(diag / h**2, off / h**2, select="i",
                                 select_range=(0, 1), eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"tridiagonal eigensolve failed: {exc}") from exc
    gap = float(evals[1])
    if not math.isfinite(gap) or gap <= 0:
        raise NumericalError("spectral gap is non-positive; grid too coarse?")
    return SpectralGapResult(gap=gap, grid_points=m, domain=(float(a), float(b)))
