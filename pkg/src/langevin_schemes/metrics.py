"""Empirical estimators that connect particle ensembles to the closed forms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measures import GaussianMeasure, gaussian_w2

MIN_FIT_POINTS = 4


def empirical_w2_1d(a, b) -> float:
    """W2 between two equal-size 1D samples via the sorted (monotone) coupling."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be nonempty")
    if a.size != b.size:
        raise ValueError(f"sample sizes differ: {a.size} vs {b.size}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def moment_match(samples, floor=None) -> GaussianMeasure:
    """Gaussian with the sample mean and regularized sample covariance.

    ``floor`` defaults to ``1e-12 * max(trace/n, 1)`` and is added to the
    diagonal, so a cloud of identical points still yields a valid measure.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m, n = x.shape
    if m < 2:
        raise ValueError("need at least two samples")
    mean = x.mean(axis=0)
    d = x - mean
    cov = d.T @ d / (m - 1)
    if floor is None:
        floor = 1e-12 * max(np.trace(cov) / n, 1.0)
    return GaussianMeasure(mean, cov + floor * np.eye(n))


def batch_means_w2_stderr(samples, reference: GaussianMeasure, batches: int = 10) -> float:
    """Standard error of the moment-matched W2 estimate by batch means.

    The samples are split into ``batches`` contiguous blocks; the spread of
    the per-block moment-matched Gaussians around the pooled one gives
    ``SE^2 = sum_b W2(G_b, G)^2 / (B (B - 1))``.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if batches < 2 or x.shape[0] < 2 * batches:
        raise ValueError("need at least two samples per batch and two batches")
    pooled = moment_match(x)
    parts = np.array_split(x, batches)
    s = sum(gaussian_w2(moment_match(p), pooled) ** 2 for p in parts)
    return float(np.sqrt(s / (batches * (batches - 1))))


class InsufficientPointsError(ValueError):
    def __init__(self, usable, excluded):
        super().__init__(
            f"only {usable} usable points (need {MIN_FIT_POINTS}); excluded eps: {excluded}")
        self.usable = usable
        self.excluded = excluded


@dataclass
class BiasSweep:
    """Measured bias at each step size, with optional Monte Carlo standard errors."""

    epsilons: list
    biases: list
    stderr: list | None = None
    excluded: list = field(default_factory=list, init=False)

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        bias = np.asarray(self.biases, dtype=float)
        if eps.shape != bias.shape or eps.ndim != 1:
            raise ValueError("epsilons and biases must be 1D lists of equal length")
        if np.any(eps <= 0) or np.any(np.diff(eps) <= 0):
            raise ValueError("epsilons must be positive and strictly increasing")
        if np.any(bias < 0):
            raise ValueError("biases must be nonnegative")
        if self.stderr is not None and len(self.stderr) != len(eps):
            raise ValueError("stderr must match epsilons in length")


@dataclass
class BiasFit:
    slope: float
    intercept: float
    used: list
    excluded: list

    @property
    def coefficient(self) -> float:
        return float(np.exp(self.intercept))


def fit_bias_order(sweep: BiasSweep) -> BiasFit:
    """Least-squares fit of log(bias) against log(eps).

    Points with zero bias, or with bias within three standard errors of zero
    when standard errors are given, are excluded and listed in the result.
    """
    eps = np.asarray(sweep.epsilons, dtype=float)
    bias = np.asarray(sweep.biases, dtype=float)
    keep = bias > 0
    if sweep.stderr is not None:
        keep &= bias > 3.0 * np.asarray(sweep.stderr, dtype=float)
    excluded = eps[~keep].tolist()
    sweep.excluded = excluded
    if keep.sum() < MIN_FIT_POINTS:
        raise InsufficientPointsError(int(keep.sum()), excluded)
    slope, intercept = np.polyfit(np.log(eps[keep]), np.log(bias[keep]), 1)
    return BiasFit(float(slope), float(intercept), eps[keep].tolist(), excluded)


def leading_coefficient(epsilons, biases) -> float:
    """Limit of bias/eps as eps -> 0, from a straight-line fit of bias/eps against eps."""
    eps = np.asarray(epsilons, dtype=float)
    ratio = np.asarray(biases, dtype=float) / eps
    slope, intercept = np.polyfit(eps, ratio, 1)
    return float(intercept)
