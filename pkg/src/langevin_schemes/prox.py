"""Proximal map (I + eps grad f)^{-1} with a residual certificate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import MixtureTarget, Potential

NEWTON_MAX_ITER = 100
NEWTON_MAX_HALVINGS = 60
SCALAR_TOL = 1e-13


class ProxConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ProxRequest:
    potential: Potential
    point: np.ndarray
    epsilon: float
    tolerance: float = 1e-10

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def prox_residual(pot: Potential, y, x, eps) -> np.ndarray:
    """Row-wise norm of y + eps grad f(y) - x."""
    r = np.asarray(y) + eps * pot.gradient(y) - np.asarray(x)
    return np.linalg.norm(np.atleast_2d(r), axis=-1)


def prox(req: ProxRequest) -> np.ndarray:
    """Evaluate the proximal map and certify its residual.

    Dispatches to the potential's closed form when it has one, to the
    one-dimensional reduction for ``MixtureTarget``, and otherwise to damped
    Newton on ``y + eps grad f(y) - x = 0``.
    """
    pot, eps = req.potential, float(req.epsilon)
    x = np.asarray(req.point, dtype=float)
    k = pot.semiconvexity
    if k is not None and eps * max(0.0, -k) >= 1.0:
        raise ValueError(
            f"prox objective is not strongly convex: eps={eps} with semiconvexity {k}")
    if pot.closed_prox is not None:
        y = pot.closed_prox(x, eps)
    elif isinstance(pot, MixtureTarget):
        y = mixture_prox(pot, x, eps)
    else:
        y = _newton_prox(pot, x, eps, req.tolerance)
    res = prox_residual(pot, y, x, eps)
    worst = float(np.max(res)) if res.size else 0.0
    if not worst <= req.tolerance:
        raise ProxConvergenceError("prox residual above tolerance", worst)
    return y


def prox_step(pot: Potential, x, eps, tolerance=1e-10):
    return prox(ProxRequest(pot, x, eps, tolerance))


def solve_mixture_scalar(r, eps, a_sq):
    """Solve ``(1+eps) v - eps a_sq tanh(v) = r`` elementwise.

    The left side is odd and strictly increasing when ``eps a_sq < 1 + eps``.
    Since ``0 <= tanh(v)/v <= 1`` the root lies between ``r/(1+eps)`` and
    ``r/(1+eps-eps a_sq)``; Newton steps that leave that bracket are replaced
    by bisection.
    """
    slope_min = 1.0 + eps - eps * a_sq
    if not slope_min > 0:
        raise ValueError("scalar map is not increasing: need eps*|a|^2 < 1 + eps")
    r = np.asarray(r, dtype=float)
    b1 = r / (1.0 + eps)
    b2 = r / slope_min
    lo = np.minimum(b1, b2)
    hi = np.maximum(b1, b2)
    v = 0.5 * (lo + hi)
    scale = 1.0 + np.abs(r)
    for _ in range(200):
        g = (1.0 + eps) * v - eps * a_sq * np.tanh(v) - r
        done = np.abs(g) <= SCALAR_TOL * scale
        if np.all(done):
            return v
        lo = np.where(g < 0, v, lo)
        hi = np.where(g > 0, v, hi)
        th = np.tanh(v)
        dg = 1.0 + eps - eps * a_sq * (1.0 - th * th)
        vn = v - g / dg
        bad = ~((vn > lo) & (vn < hi))
        vn = np.where(bad, 0.5 * (lo + hi), vn)
        v = np.where(done, v, vn)
        if np.all(done | (hi - lo <= 4 * np.spacing(np.maximum(np.abs(lo), np.abs(hi))))):
            return v
    g = (1.0 + eps) * v - eps * a_sq * np.tanh(v) - r
    raise ProxConvergenceError("scalar root-finder did not converge",
                               float(np.max(np.abs(g))))


def mixture_prox(target: MixtureTarget, x, eps):
    """Prox of the two-Gaussian mixture potential.

    Projecting ``(1+eps) y - eps tanh(<y,a>) a = x`` onto ``a`` gives a
    scalar equation for ``v = <y,a>``; ``y`` then follows explicitly.
    """
    x = np.asarray(x, dtype=float)
    if target.a_sq == 0.0:
        return x / (1.0 + eps)
    v = solve_mixture_scalar(x @ target.a, eps, target.a_sq)
    return (x + eps * np.tanh(v)[..., None] * target.a) / (1.0 + eps)


def _fd_jacobian(pot, y, h=1e-6):
    n = y.shape[-1]
    jac = np.empty(y.shape[:-1] + (n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        jac[..., :, j] = (pot.gradient(y + e) - pot.gradient(y - e)) / (2 * h)
    return jac


def _newton_prox(pot, x, eps, tol):
    x2 = np.atleast_2d(x)
    n = x2.shape[-1]
    y = x2 - eps * pot.gradient(x2)
    eye = np.eye(n)

    def resid(z):
        return z + eps * pot.gradient(z) - x2

    r = resid(y)
    rn = np.linalg.norm(r, axis=-1)
    for _ in range(NEWTON_MAX_ITER):
        active = rn > 0.01 * tol
        if not np.any(active):
            break
        if pot.hessian is not None:
            hess = np.array([pot.hessian(row) for row in y])
        else:
            hess = _fd_jacobian(pot, y)
        jac = eye + eps * hess
        step = np.linalg.solve(jac, r[..., None])[..., 0]
        t = np.ones(len(y))
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = y - t[:, None] * step
            tr = resid(trial)
            tn = np.linalg.norm(tr, axis=-1)
            ok = (tn < rn) | ~active
            if np.all(ok):
                break
            t = np.where(ok, t, 0.5 * t)
        accept = active & (tn < rn)
        y = np.where(accept[:, None], trial, y)
        r = np.where(accept[:, None], tr, r)
        rn = np.where(accept, tn, rn)
        if not np.any(accept):
            break
    if np.max(rn) > tol:
        raise ProxConvergenceError("damped Newton did not converge", float(np.max(rn)))
    return y.reshape(np.shape(x))
