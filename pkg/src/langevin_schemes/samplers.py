"""Particle-level Langevin chain steps and chain runners.

Steppers take a point ``(n,)`` or a batch ``(N, n)`` and either a
``NoiseStream`` or an explicit array of standard normal draws of the same
shape.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .noise import NoiseStream, normals_at, resolve_noise
from .potentials import GaussianPotential, MixtureTarget, Potential, mixture_gradient
from .prox import ProxConvergenceError, prox_step, solve_mixture_scalar

__all__ = [
    "Ensemble", "ChainResult", "NonFiniteGradientError", "ula_step", "sla_step",
    "backward_flow_step", "mixture_sla_step", "mixture_gradient", "sla_residual",
    "run_chain", "synchronous_coupling_run", "STEPPERS",
]

STEP_TOL = 1e-10
# at most this many doubles of noise are materialized at once
CHUNK_DOUBLES = 1 << 22


class NonFiniteGradientError(FloatingPointError):
    pass


@dataclass
class Ensemble:
    """A population of particles, stored as an ``(N, n)`` array."""

    positions: np.ndarray

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2 or p.shape[0] == 0 or p.shape[1] == 0:
            raise ValueError("ensemble needs at least one particle of positive dimension")
        self.positions = p

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def from_measure(cls, measure, size, rng) -> "Ensemble":
        return cls(measure.sample(rng, size))

    @classmethod
    def constant(cls, point, size) -> "Ensemble":
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return cls(np.tile(point, (size, 1)))

    def copy(self) -> "Ensemble":
        return Ensemble(self.positions.copy())


def _grad(pot, x):
    g = np.asarray(pot.gradient(x), dtype=float)
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradientError("gradient is not finite")
    return g


def _eps(eps):
    eps = float(eps)
    if not eps > 0:
        raise ValueError(f"step size must be positive, got {eps}")
    return eps


def ula_step(pot: Potential, x, eps, noise):
    """x - eps grad f(x) + sqrt(2 eps) z."""
    eps = _eps(eps)
    x = np.asarray(x, dtype=float)
    z = resolve_noise(noise, x.shape)
    return x - eps * _grad(pot, x) + np.sqrt(2.0 * eps) * z


def sla_residual(pot: Potential, x, y, eps, z):
    """Row-wise norm of ``y + eps grad f(y) - (x - eps grad f(x) + sqrt(4 eps) z)``."""
    w = np.asarray(x) - eps * pot.gradient(x) + np.sqrt(4.0 * eps) * np.asarray(z)
    r = np.asarray(y) + eps * pot.gradient(y) - w
    return np.linalg.norm(np.atleast_2d(r), axis=-1)


def sla_step(pot: Potential, x, eps, noise, tolerance=STEP_TOL):
    """(I + eps grad f)^{-1} (x - eps grad f(x) + sqrt(4 eps) z).

    The proximal solve is certified to ``tolerance`` in the residual of the
    implicit relation.
    """
    eps = _eps(eps)
    x = np.asarray(x, dtype=float)
    z = resolve_noise(noise, x.shape)
    w = x - eps * _grad(pot, x) + np.sqrt(4.0 * eps) * z
    return prox_step(pot, w, eps, tolerance)


def backward_flow_step(pot: Potential, x, eps, noise, tolerance=STEP_TOL):
    """(I + eps grad f)^{-1}(x) + sqrt(2 eps) z."""
    eps = _eps(eps)
    x = np.asarray(x, dtype=float)
    z = resolve_noise(noise, x.shape)
    return prox_step(pot, x, eps, tolerance) + np.sqrt(2.0 * eps) * z


def mixture_sla_step(target: MixtureTarget, x, eps, noise, tolerance=STEP_TOL):
    """SLA on the two-Gaussian mixture through its scalar reduction.

    With ``w = x - eps grad f(x) + sqrt(4 eps) z`` the new point ``y``
    satisfies ``(1+eps) y - eps tanh(<y,a>) a = w``.  Taking the inner
    product with ``a`` leaves ``(1+eps) v - eps |a|^2 tanh(v) = <w,a>`` for
    ``v = <y,a>``, which is solved first; then
    ``y = (w + eps tanh(v) a) / (1+eps)``.
    """
    eps = _eps(eps)
    if not eps * target.a_sq < 1.0 + eps:
        raise ValueError("need eps*|a|^2 < 1 + eps for a unique implicit step")
    x = np.asarray(x, dtype=float)
    z = resolve_noise(noise, x.shape)
    a = target.a
    w = x - eps * mixture_gradient(target, x) + np.sqrt(4.0 * eps) * z
    rhs = w @ a
    v = solve_mixture_scalar(rhs, eps, target.a_sq)
    y = (w + eps * np.tanh(v)[..., None] * a) / (1.0 + eps)
    scalar_res = np.abs((1.0 + eps) * v - eps * target.a_sq * np.tanh(v) - rhs)
    vec_res = np.linalg.norm(np.atleast_2d(y + eps * mixture_gradient(target, y) - w), axis=-1)
    worst = float(max(np.max(scalar_res), np.max(vec_res)))
    if not worst <= tolerance:
        raise ProxConvergenceError("mixture implicit step residual above tolerance", worst)
    return y


STEPPERS = {
    "ula": ula_step,
    "sla": sla_step,
    "backward_flow": backward_flow_step,
    "mixture_sla": mixture_sla_step,
}


def _resolve_stepper(stepper):
    if callable(stepper):
        for name, fn in STEPPERS.items():
            if fn is stepper:
                return name, fn
        return None, stepper
    key = str(stepper).lower().replace("-", "_")
    if key not in STEPPERS:
        raise ValueError(f"unknown stepper {stepper!r}")
    return key, STEPPERS[key]


@dataclass
class ChainResult:
    """Outcome of ``run_chain``.

    ``mean`` and ``cov`` pool every particle at every step after burn-in
    (``count`` points in total); ``cov`` uses the ``count - 1`` normalization.
    ``trajectory`` has shape ``(T, N, n)`` when thinning was requested.
    """

    ensemble: Ensemble
    mean: np.ndarray | None
    cov: np.ndarray | None
    count: int
    trajectory: np.ndarray | None
    max_residual: float
    backend: str


def _warn_admissibility(name, pot, eps):
    if pot.L is None:
        return
    if name == "ula" and eps >= 2.0 / pot.L:
        warnings.warn(f"eps={eps} >= 2/L; ULA may be unstable", RuntimeWarning, stacklevel=3)


def _affine_form(name, pot: GaussianPotential, eps):
    """``(A, B, check)`` so that ``x+ - mu = A (x - mu) + B z``.

    ``check`` is ``(C, D, E)`` for the implicit relation
    ``C (x+ - mu) = D (x - mu) + E z`` of the proximal schemes, else None.
    """
    n = pot.dimension
    eye = np.eye(n)
    P = pot.P
    if name == "ula":
        return eye - eps * P, np.sqrt(2.0 * eps) * eye, None
    C = eye + eps * P
    Cinv = np.linalg.inv(C)
    if name == "sla":
        D = eye - eps * P
        E = np.sqrt(4.0 * eps) * eye
        return Cinv @ D, Cinv * np.sqrt(4.0 * eps), (C, D, E)
    if name == "backward_flow":
        B = np.sqrt(2.0 * eps) * eye
        return Cinv, B, (C, eye, C @ B)
    return None


def _chunks(steps, per_step):
    size = max(1, CHUNK_DOUBLES // max(per_step, 1))
    s = 0
    while s < steps:
        e = min(steps, s + size)
        yield s, e
        s = e


def run_chain(stepper, pot: Potential, ensemble: Ensemble, eps, steps: int, seed: int, *,
              stream: int = 0, burn_in: int = 0, thin: int | None = None,
              backend: str | None = None, fast: bool = True) -> ChainResult:
    """Advance every particle ``steps`` times.

    Draw ``j`` of particle ``i`` at step ``s`` is entry
    ``(s * N + i) * n + j`` of the stream ``(seed, stream)``, so each
    particle reads a disjoint set of draws and the result does not depend on
    the order in which particles or chunks are processed.

    Gaussian targets with ULA, SLA or Backward-Flow, and the mixture target
    with ULA or SLA, run through the compiled kernels; any other combination
    (or ``fast=False``) uses the generic steppers.
    """
    name, fn = _resolve_stepper(stepper)
    eps = _eps(eps)
    if steps < 0 or burn_in < 0:
        raise ValueError("steps and burn_in must be nonnegative")
    if thin is not None and thin < 1:
        raise ValueError("thin must be positive")
    x = ensemble.positions.copy()
    N, n = x.shape
    if n != pot.dimension:
        raise ValueError(f"ensemble dimension {n} != potential dimension {pot.dimension}")
    _warn_admissibility(name, pot, eps)

    count = np.zeros(1)
    mean = np.zeros(n)
    m2 = np.zeros((n, n))
    n_rec = steps // thin if thin else 0
    traj = np.empty((max(n_rec, 1), N, n))
    worst = 0.0

    kern = kernels.get_backend(backend)
    mode = None
    if fast and name is not None:
        if isinstance(pot, GaussianPotential) and name in ("ula", "sla", "backward_flow"):
            mode = "affine"
            A, B, check = _affine_form(name, pot, eps)
            mu = np.ascontiguousarray(pot.mu, dtype=float)
        elif isinstance(pot, MixtureTarget) and name in ("ula", "sla", "mixture_sla"):
            mode = "mixture"
            scheme = 0 if name == "ula" else 1
            if scheme == 1 and not eps * pot.a_sq < 1.0 + eps:
                raise ValueError("need eps*|a|^2 < 1 + eps for a unique implicit step")

    for s0, s1 in _chunks(steps, N * n):
        z = normals_at(seed, stream, s0 * N * n, (s1 - s0) * N * n).reshape(s1 - s0, N, n)
        idx = np.arange(s0 + 1, s1 + 1)
        accumulate = np.ascontiguousarray(idx > burn_in, dtype=np.uint8)
        if thin:
            record = np.where(idx % thin == 0, idx // thin - 1, -1).astype(np.int64)
        else:
            record = np.full(s1 - s0, -1, dtype=np.int64)
        if mode == "affine":
            extra = {} if check is None else dict(zip("CDE", check))
            res = kern.affine_chain(x, mu, A, B, z, accumulate, record, traj,
                                    count, mean, m2, **extra)
        elif mode == "mixture":
            res = kern.mixture_chain(x, pot.a, eps, scheme, z, accumulate, record, traj,
                                     count, mean, m2)
        else:
            res = 0.0
            for k in range(s1 - s0):
                new = fn(pot, x, eps, z[k])
                if name in ("sla", "mixture_sla"):
                    res = max(res, float(np.max(sla_residual(pot, x, new, eps, z[k]))))
                x = np.ascontiguousarray(new, dtype=float).reshape(N, n)
                if accumulate[k]:
                    _pymerge(x, count, mean, m2)
                if record[k] >= 0:
                    traj[record[k]] = x
        worst = max(worst, float(res))
        if mode is not None and name in ("sla", "mixture_sla") and worst > STEP_TOL:
            raise ProxConvergenceError("implicit step residual above tolerance", worst)

    c = int(count[0])
    return ChainResult(
        ensemble=Ensemble(x),
        mean=mean.copy() if c > 0 else None,
        cov=m2 / (c - 1) if c > 1 else None,
        count=c,
        trajectory=traj[:n_rec] if thin else None,
        max_residual=worst,
        backend=kernels.backend_name(kern) if mode is not None else "generic",
    )


def _pymerge(x, count, mean, m2):
    from ._pykernels import _merge
    _merge(x, count, mean, m2)


def synchronous_coupling_run(stepper, pot: Potential, ensemble_a: Ensemble,
                             ensemble_b: Ensemble, eps, steps: int, seed: int, *,
                             stream: int = 0, return_scale: bool = False):
    """Drive two ensembles with identical noise and track their distance.

    Particle ``i`` of ``ensemble_a`` is paired with particle ``i`` of
    ``ensemble_b``; both receive the same draw at every step.  Returns the
    mean squared paired distance after each step, starting with step 0
    (length ``steps + 1``).  With ``return_scale`` the largest mean squared
    particle norm seen along either chain is returned as well; it sets the
    size of the rounding error in the distances.
    """
    _, fn = _resolve_stepper(stepper)
    xa = ensemble_a.positions.copy()
    xb = ensemble_b.positions.copy()
    if xa.shape != xb.shape:
        raise ValueError(f"ensemble shapes differ: {xa.shape} vs {xb.shape}")
    N, n = xa.shape
    out = np.empty(steps + 1)
    out[0] = np.mean(np.sum((xa - xb) ** 2, axis=1))
    scale = max(np.mean(np.sum(xa * xa, axis=1)), np.mean(np.sum(xb * xb, axis=1)))
    noise = NoiseStream(seed, stream)
    for k in range(steps):
        z = noise.draw((N, n))
        both = fn(pot, np.vstack([xa, xb]), eps, np.vstack([z, z]))
        xa, xb = both[:N], both[N:]
        out[k + 1] = np.mean(np.sum((xa - xb) ** 2, axis=1))
        scale = max(scale, np.mean(np.sum(xa * xa, axis=1)), np.mean(np.sum(xb * xb, axis=1)))
    return (out, float(scale)) if return_scale else out
