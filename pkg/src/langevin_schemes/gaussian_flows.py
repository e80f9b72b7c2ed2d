"""Closed-form mean/covariance recursions on Gaussian targets and data.

For a Gaussian target ``nu = N(mu, Sigma)`` every scheme below maps
Gaussians to Gaussians, so one step is an explicit (or scalar implicit)
update of the mean and covariance.
"""
from __future__ import annotations

import enum

import numpy as np

from .measures import GaussianMeasure, gaussian_w2, sym_apply

COMMUTE_RTOL = 1e-10
IMPLICIT_RTOL = 1e-12


class SchemeKind(enum.Enum):
    EXACT_OU = "exact_ou"
    ULA = "ula"
    SLA = "sla"
    FORWARD = "forward"
    BACKWARD = "backward"
    FB = "fb"
    BF = "bf"

    @classmethod
    def parse(cls, name) -> "SchemeKind":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper().replace("-", "_")]
        except KeyError:
            raise ValueError(f"unknown scheme {name!r}") from None


CONSISTENT_KINDS = (SchemeKind.SLA, SchemeKind.FORWARD, SchemeKind.BACKWARD,
                    SchemeKind.FB, SchemeKind.BF)
_COMMUTING_KINDS = (SchemeKind.FORWARD, SchemeKind.BACKWARD, SchemeKind.FB, SchemeKind.BF)


class InadmissibleStepError(ValueError):
    pass


class NonCommutingError(ValueError):
    pass


class ImplicitSolveError(RuntimeError):
    pass


def _check_eps(eps, allow_zero=False):
    eps = float(eps)
    if not np.isfinite(eps) or eps < 0 or (eps == 0 and not allow_zero):
        raise InadmissibleStepError(f"step size must be positive, got {eps}")
    return eps


def _check_t(t):
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    return t


def _same_dim(a, b):
    if a.dim != b.dim:
        raise ValueError(f"dimensions differ: {a.dim} vs {b.dim}")


def commutes(a: np.ndarray, b: np.ndarray, rtol=COMMUTE_RTOL) -> bool:
    c = a @ b - b @ a
    return np.linalg.norm(c) <= rtol * np.linalg.norm(a) * np.linalg.norm(b)


def common_eigenbasis(s_rho, s_nu):
    """Orthonormal Q diagonalizing two commuting symmetric matrices.

    Returns ``(Q, d_rho, d_nu)`` with ``s = Q diag(d) Q^T`` for both.
    """
    if not commutes(s_rho, s_nu):
        raise NonCommutingError("covariances do not commute")
    # A generic combination separates eigenspaces shared by both matrices.
    mix = s_nu / np.linalg.norm(s_nu) + np.sqrt(2.0) / 3.0 * s_rho / np.linalg.norm(s_rho)
    _, q = np.linalg.eigh(0.5 * (mix + mix.T))
    d_rho = np.einsum("ji,jk,ki->i", q, s_rho, q)
    d_nu = np.einsum("ji,jk,ki->i", q, s_nu, q)
    return q, d_rho, d_nu


def _from_basis(q, d):
    return (q * d) @ q.T


def _sym(s):
    return 0.5 * (s + s.T)


# -- exact flows ---------------------------------------------------------

def ou_exact_flow(nu: GaussianMeasure, rho0: GaussianMeasure, t) -> GaussianMeasure:
    """Law at time t of the OU process started from rho0.

    ``X_t - mu = E (X_0 - mu) + noise`` with ``E = exp(-t Sigma^{-1})`` and
    noise covariance ``Sigma - E Sigma E``.
    """
    _same_dim(nu, rho0)
    t = _check_t(t)
    if t == 0:
        return rho0
    e = sym_apply(nu.cov, lambda w: np.exp(-t / w))
    # Sigma (I - E^2) written spectrally to avoid cancellation
    noise = sym_apply(nu.cov, lambda w: -w * np.expm1(-2.0 * t / w))
    mean = nu.mean + e @ (rho0.mean - nu.mean)
    cov = e @ rho0.cov @ e + noise
    return GaussianMeasure(mean, _sym(cov))


def heat_exact(rho: GaussianMeasure, t) -> GaussianMeasure:
    t = _check_t(t)
    return GaussianMeasure(rho.mean, rho.cov + 2.0 * t * np.eye(rho.dim))


def variance_flow(rho0: GaussianMeasure, t) -> GaussianMeasure:
    """Gradient flow of the variance: shrink about the mean by exp(-2t)."""
    t = _check_t(t)
    return GaussianMeasure(rho0.mean, np.exp(-4.0 * t) * rho0.cov)


# -- heat flow discretizations ------------------------------------------

def _heat_forward_cov(s, eps):
    return sym_apply(s, lambda w: (w + eps) ** 2 / w)


def _heat_backward_eigs(w, eps):
    w = np.clip(w, 0.0, None)
    return 0.5 * (w + 2.0 * eps + np.sqrt(w * (w + 4.0 * eps)))


def _heat_backward_cov(s, eps):
    q = np.linalg.eigh(_sym(s))
    w, vecs = q
    new = _heat_backward_eigs(w, eps)
    # implicit relation: new (1 - eps/new)^2 = old
    back = (new - eps) ** 2 / new
    err = np.max(np.abs(back - np.clip(w, 0.0, None)) / np.maximum(new, 1.0))
    if not err <= IMPLICIT_RTOL:
        raise ImplicitSolveError(f"heat backward residual {err:.3e}")
    return (vecs * new) @ vecs.T


def heat_forward_step(rho: GaussianMeasure, eps) -> GaussianMeasure:
    """Forward (explicit) step for the heat flow: Sigma <- Sigma (I + eps Sigma^{-1})^2.

    A Gaussian is log-semiconcave with a positive constant, so every
    ``eps > 0`` is admissible.
    """
    eps = _check_eps(eps)
    return GaussianMeasure(rho.mean, _heat_forward_cov(rho.cov, eps))


def heat_backward_step(rho: GaussianMeasure, eps) -> GaussianMeasure:
    """Backward (implicit) step for the heat flow.

    Solves ``Sigma+ (I - eps Sigma+^{-1})^2 = Sigma`` by the closed form
    ``0.5 (Sigma + 2 eps I + (Sigma (Sigma + 4 eps I))^{1/2})``.
    """
    eps = _check_eps(eps)
    if eps > rho.eigvals[0]:
        raise InadmissibleStepError(
            f"heat backward step needs eps <= lambda_min(Sigma) = {rho.eigvals[0]:.6g}")
    return GaussianMeasure(rho.mean, _heat_backward_cov(rho.cov, eps))


# -- ULA closed forms -----------------------------------------------------

def _ula_check(nu, eps, allow_zero=False):
    eps = _check_eps(eps, allow_zero=allow_zero)
    bound = 2.0 * nu.eigvals[0]
    if eps >= bound:
        raise InadmissibleStepError(f"ULA needs eps < 2 lambda_min(Sigma) = {bound:.6g}")
    return eps


def ula_limit(nu: GaussianMeasure, eps) -> GaussianMeasure:
    """Stationary law of ULA: N(mu, Sigma (I - (eps/2) Sigma^{-1})^{-1})."""
    eps = _ula_check(nu, eps, allow_zero=True)
    if eps == 0:
        return nu
    return GaussianMeasure(nu.mean, sym_apply(nu.cov, lambda w: w / (1.0 - 0.5 * eps / w)))


def ula_bias(nu: GaussianMeasure, eps) -> float:
    """W2 distance between the target and the ULA stationary law."""
    eps = _ula_check(nu, eps, allow_zero=True)
    if eps == 0:
        return 0.0
    return gaussian_w2(nu, ula_limit(nu, eps))


def ula_bias_leading(nu: GaussianMeasure, eps) -> float:
    """First-order term (eps/4) sqrt(tr Sigma^{-1}) of the ULA bias."""
    return 0.25 * float(eps) * float(np.sqrt(np.trace(nu.precision)))


def ula_closed_form(nu: GaussianMeasure, rho0: GaussianMeasure, eps, k: int) -> GaussianMeasure:
    """Law of the k-th ULA iterate, unrolled.

    ``x_k - mu = A^k (x_0 - mu) + sqrt(2 eps) (I - A^2)^{-1/2} (I - A^{2k})^{1/2} z``
    with ``A = I - eps Sigma^{-1}``.
    """
    eps = _ula_check(nu, eps)
    ak = sym_apply(nu.cov, lambda w: (1.0 - eps / w) ** k)
    acc = sym_apply(nu.cov, lambda w: 2.0 * eps * (1.0 - (1.0 - eps / w) ** (2 * k))
                    / (1.0 - (1.0 - eps / w) ** 2))
    mean = nu.mean + ak @ (rho0.mean - nu.mean)
    return GaussianMeasure(mean, _sym(ak @ rho0.cov @ ak + acc))


def affine_coefficients(kind: SchemeKind, nu: GaussianMeasure, eps):
    """``(A, B)`` such that the particle step is ``x+ - mu = A (x - mu) + B z``.

    Defined for the particle-level schemes ULA and SLA.
    """
    kind = SchemeKind.parse(kind)
    eps = _check_eps(eps)
    if kind is SchemeKind.ULA:
        a = sym_apply(nu.cov, lambda w: 1.0 - eps / w)
        b = np.sqrt(2.0 * eps) * np.eye(nu.dim)
    elif kind is SchemeKind.SLA:
        a = sym_apply(nu.cov, lambda w: (1.0 - eps / w) / (1.0 + eps / w))
        b = sym_apply(nu.cov, lambda w: np.sqrt(4.0 * eps) / (1.0 + eps / w))
    else:
        raise ValueError(f"{kind.name} has no particle-level affine form")
    return a, b


def stationary_measure(kind, nu: GaussianMeasure, eps) -> GaussianMeasure:
    """Stationary law of the ULA or SLA recursion on a Gaussian target.

    Both coefficient matrices are functions of Sigma, so the stationary
    covariance ``(I - A^2)^{-1} B^2`` is evaluated eigenvalue by eigenvalue.
    """
    kind = SchemeKind.parse(kind)
    eps = _check_eps(eps)
    if kind is SchemeKind.ULA:
        _ula_check(nu, eps)
        a = lambda w: 1.0 - eps / w
        b2 = lambda w: 2.0 * eps + 0.0 * w
    elif kind is SchemeKind.SLA:
        a = lambda w: (1.0 - eps / w) / (1.0 + eps / w)
        b2 = lambda w: 4.0 * eps / (1.0 + eps / w) ** 2
    else:
        raise ValueError(f"{kind.name} has no particle-level stationary law here")
    return GaussianMeasure(nu.mean, sym_apply(nu.cov, lambda w: b2(w) / (1.0 - a(w) ** 2)))


def affine_stationary_cov(A, noise_cov):
    """Solve ``S = A S A^T + noise_cov`` (discrete Lyapunov)."""
    from scipy.linalg import solve_discrete_lyapunov
    if np.max(np.abs(np.linalg.eigvals(A))) >= 1.0:
        raise ValueError("affine map is not contractive")
    return _sym(solve_discrete_lyapunov(A, noise_cov))


# -- one step of each scheme ---------------------------------------------

def _backward_ou_eigs(s, sigma, eps):
    """Solve ``s' (1 - eps/s' + eps/sigma)^2 = s`` for the admissible root.

    With ``b = 1 + eps/sigma`` this is ``b^2 s'^2 - (2 b eps + s) s' + eps^2 = 0``;
    the larger root keeps ``b s' - eps > 0``.
    """
    b = 1.0 + eps / sigma
    p = 2.0 * b * eps + s
    new = (p + np.sqrt(s * (s + 4.0 * b * eps))) / (2.0 * b * b)
    # one Newton polish on the quadratic
    g = b * b * new * new - p * new + eps * eps
    new = new - g / (2.0 * b * b * new - p)
    back = new * (1.0 - eps / new + eps / sigma) ** 2
    err = np.max(np.abs(back - s) / np.maximum(s, 1.0))
    if not err <= IMPLICIT_RTOL:
        raise ImplicitSolveError(f"backward OU residual {err:.3e}")
    return new


def scheme_step(kind, nu: GaussianMeasure, rho: GaussianMeasure, eps) -> GaussianMeasure:
    """One step of ``kind`` on target ``nu`` from Gaussian data ``rho``.

    FORWARD/BACKWARD are the explicit and implicit steps for the relative
    entropy as a whole; FB is a gradient step on the potential followed by a
    backward heat step; BF is its adjoint, a forward heat step followed by a
    proximal step on the potential.  These four need covariances that commute
    with the target's.
    """
    kind = SchemeKind.parse(kind)
    _same_dim(nu, rho)
    if kind is SchemeKind.EXACT_OU:
        return ou_exact_flow(nu, rho, eps)
    eps = _check_eps(eps)
    mu, m = nu.mean, rho.mean
    n = nu.dim

    if kind in (SchemeKind.ULA, SchemeKind.SLA):
        if kind is SchemeKind.ULA:
            _ula_check(nu, eps)
        a, b = affine_coefficients(kind, nu, eps)
        mean = mu + a @ (m - mu)
        cov = a @ rho.cov @ a.T + b @ b.T
        return GaussianMeasure(mean, _sym(cov))

    q, d_rho, d_nu = common_eigenbasis(rho.cov, nu.cov)
    lam_min = float(np.min(d_nu))
    if kind in (SchemeKind.FB, SchemeKind.BF) and eps > lam_min:
        raise InadmissibleStepError(
            f"{kind.name} needs eps <= lambda_min(Sigma) = {lam_min:.6g}")
    p = nu.precision

    if kind is SchemeKind.FORWARD:
        mult = 1.0 + eps * (1.0 / d_rho - 1.0 / d_nu)
        if np.any(mult <= 0):
            raise InadmissibleStepError(
                "forward step map is not monotone: need 1 + eps K > 0 for the "
                "log-semiconcavity constant K of rho/nu")
        mean = m - eps * p @ (m - mu)
        new = d_rho * mult ** 2
    elif kind is SchemeKind.BACKWARD:
        mean = mu + np.linalg.solve(np.eye(n) + eps * p, m - mu)
        new = _backward_ou_eigs(d_rho, d_nu, eps)
    elif kind is SchemeKind.FB:
        mean = mu + (m - mu) - eps * p @ (m - mu)
        half = d_rho * (1.0 - eps / d_nu) ** 2
        new = _heat_backward_eigs(half, eps)
        back = (new - eps) ** 2 / new
        if np.max(np.abs(back - half) / np.maximum(new, 1.0)) > IMPLICIT_RTOL:
            raise ImplicitSolveError("FB backward heat step residual too large")
    else:  # BF
        mean = mu + np.linalg.solve(np.eye(n) + eps * p, m - mu)
        half = (d_rho + eps) ** 2 / d_rho
        new = half / (1.0 + eps / d_nu) ** 2
    return GaussianMeasure(mean, _sym(_from_basis(q, new)))


def iterate_scheme(kind, nu, rho0, eps, steps: int):
    """Return the list ``[rho_0, rho_1, ..., rho_steps]``."""
    out = [rho0]
    for _ in range(steps):
        out.append(scheme_step(kind, nu, out[-1], eps))
    return out


def converge_scheme(kind, nu, rho0, eps, tol=1e-12, max_iter=100_000):
    """Iterate until successive iterates are within ``tol`` in W2.

    Returns ``(rho, iterations)``; raises if ``max_iter`` is reached.
    """
    rho = rho0
    for it in range(1, max_iter + 1):
        nxt = scheme_step(kind, nu, rho, eps)
        if gaussian_w2(nxt, rho) < tol:
            return nxt, it
        rho = nxt
    raise RuntimeError(f"{SchemeKind.parse(kind).name} did not settle in {max_iter} iterations")
