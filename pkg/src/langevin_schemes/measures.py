"""Gaussian measure calculus.

Closed-form Wasserstein distance, relative entropy, entropy and Fisher
information for Gaussian measures.  Everything else in the package is
checked against these.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

_SYM_RTOL = 1e-12
_PD_RATIO = 1e-12


class InvalidGaussianError(ValueError):
    """Covariance is not symmetric positive definite, or shapes disagree."""


class DimensionMismatchError(ValueError):
    pass


def sym_apply(S, fn):
    """Apply a scalar function to a symmetric matrix through its spectrum."""
    S = 0.5 * (S + S.T)
    w, Q = np.linalg.eigh(S)
    return (Q * fn(w)) @ Q.T


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    """N(mean, cov) on R^n.

    The covariance is symmetrized on construction and must have its smallest
    eigenvalue above ``1e-12`` times its largest.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if mean.ndim != 1:
            raise InvalidGaussianError("mean must be a vector")
        n = mean.shape[0]
        if cov.shape != (n, n):
            raise InvalidGaussianError(
                f"covariance shape {cov.shape} does not match mean dimension {n}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidGaussianError("non-finite entries")
        scale = max(np.max(np.abs(cov)), np.finfo(float).tiny)
        if np.max(np.abs(cov - cov.T)) > _SYM_RTOL * scale:
            raise InvalidGaussianError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        w = np.linalg.eigvalsh(cov)
        if w[0] <= 0 or w[0] <= _PD_RATIO * w[-1]:
            raise InvalidGaussianError(
                f"covariance is not positive definite (eigenvalues {w[0]:.3g}..{w[-1]:.3g})")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def standard(cls, n: int) -> "GaussianMeasure":
        return cls(np.zeros(n), np.eye(n))

    @classmethod
    def isotropic(cls, mean, var: float) -> "GaussianMeasure":
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        return cls(mean, var * np.eye(mean.shape[0]))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @cached_property
    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.cov)

    @cached_property
    def sqrt_cov(self) -> np.ndarray:
        return sym_apply(self.cov, np.sqrt)

    @cached_property
    def inv_sqrt_cov(self) -> np.ndarray:
        return sym_apply(self.cov, lambda w: 1.0 / np.sqrt(w))

    @cached_property
    def precision(self) -> np.ndarray:
        return sym_apply(self.cov, lambda w: 1.0 / w)

    def logdet(self) -> float:
        return float(np.sum(np.log(self.eigvals)))

    def sample(self, rng, size: int) -> np.ndarray:
        """Draw ``size`` points using a numpy Generator ``rng``."""
        z = rng.standard_normal((size, self.dim))
        return self.mean + z @ self.sqrt_cov

    def __repr__(self):
        return f"GaussianMeasure(mean={self.mean.tolist()}, cov={self.cov.tolist()})"


def _check_pair(a: GaussianMeasure, b: GaussianMeasure):
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} vs {b.dim}")


def gaussian_w2(a: GaussianMeasure, b: GaussianMeasure) -> float:
    """2-Wasserstein distance between two Gaussians.

    The covariance part is evaluated through the optimal transport map from
    ``b`` to ``a``, ``T = Sb^{-1/2} (Sb^{1/2} Sa Sb^{1/2})^{1/2} Sb^{-1/2}``,
    as ``|| Sb^{-1/2} (M^{1/2} - Sb) ||_F``.  This equals the usual Bures
    expression ``tr Sa + tr Sb - 2 tr M^{1/2}`` but does not lose all
    significant digits when the two covariances nearly coincide.
    """
    _check_pair(a, b)
    rb = b.sqrt_cov
    m_half = sym_apply(rb @ a.cov @ rb, lambda w: np.sqrt(np.clip(w, 0.0, None)))
    d = b.inv_sqrt_cov @ (m_half - b.cov)
    dm = a.mean - b.mean
    return float(np.sqrt(dm @ dm + np.sum(d * d)))


def bures_trace_form(a: GaussianMeasure, b: GaussianMeasure) -> float:
    """Squared W2 from the trace formula; only used as a cross-check."""
    _check_pair(a, b)
    rb = b.sqrt_cov
    m_half = sym_apply(rb @ a.cov @ rb, lambda w: np.sqrt(np.clip(w, 0.0, None)))
    dm = a.mean - b.mean
    return float(dm @ dm + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(m_half))


def gaussian_kl(rho: GaussianMeasure, nu: GaussianMeasure) -> float:
    """Relative entropy KL(rho || nu)."""
    _check_pair(rho, nu)
    p = nu.precision
    dm = rho.mean - nu.mean
    val = 0.5 * (np.trace(p @ rho.cov) - rho.dim + dm @ p @ dm
                 + nu.logdet() - rho.logdet())
    return max(float(val), 0.0)


def gaussian_entropy(rho: GaussianMeasure) -> float:
    """Differential entropy ``0.5 * log det(2 pi e cov)``."""
    return 0.5 * (rho.dim * np.log(2.0 * np.pi * np.e) + rho.logdet())


def fisher_information_gaussian(rho: GaussianMeasure) -> float:
    """E ||grad log rho||^2 = tr(cov^{-1})."""
    return float(np.trace(rho.precision))


def second_order_fisher_gaussian(rho: GaussianMeasure) -> float:
    """E ||Hess log rho||_HS^2 = ||cov^{-1}||_HS^2."""
    p = rho.precision
    return float(np.sum(p * p))


def relative_fisher_gaussian(rho: GaussianMeasure, nu: GaussianMeasure) -> float:
    """Relative Fisher information E_rho ||grad log(rho/nu)||^2.

    With ``y = x - mean_rho`` the score difference is
    ``(P_nu - P_rho) y + P_nu (mean_rho - mean_nu)``, so the expectation
    splits into a trace term and a mean term.
    """
    _check_pair(rho, nu)
    d = nu.precision - rho.precision
    shift = nu.precision @ (rho.mean - nu.mean)
    val = np.trace(d @ rho.cov @ d) + shift @ shift
    return max(float(val), 0.0)


def lsi_constant(nu: GaussianMeasure) -> float:
    """Strong log-concavity constant 1/lambda_max(cov), used as the LSI constant."""
    return float(1.0 / nu.eigvals[-1])


def smoothness_constant(nu: GaussianMeasure) -> float:
    """Log-smoothness constant 1/lambda_min(cov)."""
    return float(1.0 / nu.eigvals[0])
