"""Target potentials f = -log(nu).

All callables act on a single point of shape ``(n,)`` or on a batch of
shape ``(N, n)``; gradients keep the input shape.
"""
from __future__ import annotations

import numpy as np

from .measures import GaussianMeasure, lsi_constant, smoothness_constant


class Potential:
    """A differentiable potential with optional curvature bounds.

    Parameters
    ----------
    dimension : int
    value, gradient : callable
        ``f`` and ``grad f``, batch-aware.
    alpha : float, optional
        Strong convexity constant (``Hess f >= alpha I``).
    L : float, optional
        Smoothness constant (``Hess f <= L I``).
    M : float, optional
        Lipschitz constant of the Hessian.
    prox : callable, optional
        Closed-form ``(x, eps) -> (I + eps grad f)^{-1}(x)``.
    hessian : callable, optional
        ``x -> Hess f(x)``; used by the Newton prox solver.
    semiconvexity : float, optional
        Lower Hessian bound K that may be negative.
    """

    def __init__(self, dimension, value, gradient, *, alpha=None, L=None, M=None,
                 prox=None, hessian=None, semiconvexity=None):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        if alpha is not None and alpha <= 0:
            raise ValueError("alpha must be positive")
        if L is not None and L <= 0:
            raise ValueError("L must be positive")
        if alpha is not None and L is not None and alpha > L:
            raise ValueError(f"alpha={alpha} exceeds L={L}")
        if M is not None and M < 0:
            raise ValueError("M must be nonnegative")
        self.dimension = int(dimension)
        self.value = value
        self.gradient = gradient
        self.alpha = alpha
        self.L = L
        self.M = M
        self.closed_prox = prox
        self.hessian = hessian
        if semiconvexity is None and alpha is not None:
            semiconvexity = alpha
        self.semiconvexity = semiconvexity


class GaussianPotential(Potential):
    """f(x) = 0.5 (x-mu)^T Sigma^{-1} (x-mu) + 0.5 log det(2 pi Sigma)."""

    def __init__(self, nu: GaussianMeasure):
        self.nu = nu
        self.mu = nu.mean
        self.P = nu.precision
        self._const = 0.5 * (nu.dim * np.log(2 * np.pi) + nu.logdet())
        super().__init__(
            nu.dim, self._value, self._gradient,
            alpha=lsi_constant(nu), L=smoothness_constant(nu), M=0.0,
            prox=self._prox, hessian=lambda x: self.P)

    def _value(self, x):
        d = np.asarray(x, dtype=float) - self.mu
        return 0.5 * np.einsum("...i,ij,...j->...", d, self.P, d) + self._const

    def _gradient(self, x):
        return (np.asarray(x, dtype=float) - self.mu) @ self.P

    def _prox(self, x, eps):
        # y = (I + eps P)^{-1} (x + eps P mu)
        n = self.dimension
        rhs = np.asarray(x, dtype=float) + eps * (self.P @ self.mu)
        return np.linalg.solve(np.eye(n) + eps * self.P, rhs.T).T


class MixtureTarget(Potential):
    """Equal mixture 0.5 N(-a, I) + 0.5 N(a, I).

    ``f(x) = 0.5|x|^2 - log cosh(<x,a>) + 0.5|a|^2 + (n/2) log(2 pi)`` and
    ``grad f(x) = x - tanh(<x,a>) a``.  The Hessian ``I - sech^2(<x,a>) a a^T``
    lies between ``(1 - |a|^2) I`` and ``I``.
    """

    def __init__(self, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if a.ndim != 1:
            raise ValueError("offset a must be a vector")
        self.a = a
        self.a_sq = float(a @ a)
        k = 1.0 - self.a_sq
        super().__init__(
            a.shape[0], self._value, self._gradient,
            alpha=k if k > 0 else None, L=1.0,
            hessian=self._hessian, semiconvexity=k)

    def _value(self, x):
        x = np.asarray(x, dtype=float)
        v = x @ self.a
        logcosh = np.logaddexp(v, -v) - np.log(2.0)
        n = self.dimension
        return (0.5 * np.sum(x * x, axis=-1) - logcosh
                + 0.5 * self.a_sq + 0.5 * n * np.log(2 * np.pi))

    def _gradient(self, x):
        return mixture_gradient(self, x)

    def _hessian(self, x):
        v = float(np.asarray(x, dtype=float) @ self.a)
        return np.eye(self.dimension) - np.outer(self.a, self.a) / np.cosh(v) ** 2

    def sample(self, rng, size):
        """Exact draws from the mixture."""
        signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return signs[:, None] * self.a + rng.standard_normal((size, self.dimension))

    def moments(self) -> GaussianMeasure:
        """Gaussian with the mixture's mean (0) and covariance I + a a^T."""
        n = self.dimension
        return GaussianMeasure(np.zeros(n), np.eye(n) + np.outer(self.a, self.a))


def mixture_gradient(target: MixtureTarget, x):
    x = np.asarray(x, dtype=float)
    v = x @ target.a
    return x - np.tanh(v)[..., None] * target.a


def check_gradient(pot: Potential, points, h=1e-5):
    """Largest relative error between ``pot.gradient`` and central differences.

    Returns the maximum over the probe ``points`` (shape ``(N, n)``) of
    ``|g_fd - g| / max(1, |g|)``.
    """
    points = np.atleast_2d(points)
    worst = 0.0
    eye = np.eye(pot.dimension)
    for x in points:
        g = np.asarray(pot.gradient(x), dtype=float)
        fd = np.array([(pot.value(x + h * e) - pot.value(x - h * e)) / (2 * h) for e in eye])
        err = np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g))
        worst = max(worst, err)
    return worst
