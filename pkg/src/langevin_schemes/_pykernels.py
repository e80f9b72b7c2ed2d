"""Pure numpy chain kernels.

Same signatures and semantics as the compiled ``_kernels`` module; used when
the extension is not built or ``LANGEVIN_BACKEND=python`` is set.

Every kernel advances ``x`` (shape ``(N, n)``, modified in place) through
``S = noise.shape[0]`` steps.  After step ``s``:

* if ``accumulate[s]`` the ensemble is merged into the running statistics
  ``count`` (shape ``(1,)``), ``mean`` (``(n,)``) and ``m2`` (``(n, n)``),
  one batch of N points at a time (Chan et al. pairwise update);
* if ``record[s] >= 0`` the ensemble is copied to ``traj[record[s]]``.
"""
from __future__ import annotations

import numpy as np

from .prox import solve_mixture_scalar

ULA = 0
SLA = 1


def _merge(x, count, mean, m2):
    nb = x.shape[0]
    mb = x.mean(axis=0)
    d = x - mb
    m2b = d.T @ d
    na = count[0]
    tot = na + nb
    delta = mb - mean
    mean += delta * (nb / tot)
    m2 += m2b + np.outer(delta, delta) * (na * nb / tot)
    count[0] = tot


def affine_chain(x, mu, A, B, noise, accumulate, record, traj, count, mean, m2,
                 C=None, D=None, E=None):
    """Iterate ``x <- mu + A (x - mu) + B z``.

    When ``C, D, E`` are given, the implicit relation
    ``C (x+ - mu) = D (x - mu) + E z`` is checked every step and the largest
    residual norm is returned; otherwise 0.0 is returned.
    """
    At = np.ascontiguousarray(A.T)
    Bt = np.ascontiguousarray(B.T)
    check = C is not None
    if check:
        Ct, Dt, Et = (np.ascontiguousarray(M.T) for M in (C, D, E))
    worst = 0.0
    for s in range(noise.shape[0]):
        z = noise[s]
        y = x - mu
        new = y @ At + z @ Bt
        if check:
            r = new @ Ct - y @ Dt - z @ Et
            worst = max(worst, float(np.max(np.sqrt(np.sum(r * r, axis=1)))))
        x[:] = mu + new
        if accumulate[s]:
            _merge(x, count, mean, m2)
        if record[s] >= 0:
            traj[record[s]] = x
    return worst


def mixture_chain(x, a, eps, scheme, noise, accumulate, record, traj, count, mean, m2):
    """ULA (``scheme=0``) or SLA (``scheme=1``) on the two-Gaussian mixture.

    Returns the largest residual ``|y + eps grad f(y) - w|`` of the implicit
    SLA step (0.0 for ULA).
    """
    a_sq = float(a @ a)
    worst = 0.0
    for s in range(noise.shape[0]):
        z = noise[s]
        t = np.tanh(x @ a)
        if scheme == ULA:
            x[:] = (1.0 - eps) * x + eps * t[:, None] * a + np.sqrt(2.0 * eps) * z
        else:
            w = (1.0 - eps) * x + eps * t[:, None] * a + np.sqrt(4.0 * eps) * z
            v = solve_mixture_scalar(w @ a, eps, a_sq)
            y = (w + eps * np.tanh(v)[:, None] * a) / (1.0 + eps)
            r = (1.0 + eps) * y - eps * np.tanh(y @ a)[:, None] * a - w
            worst = max(worst, float(np.max(np.sqrt(np.sum(r * r, axis=1)))))
            x[:] = y
        if accumulate[s]:
            _merge(x, count, mean, m2)
        if record[s] >= 0:
            traj[record[s]] = x
    return worst
