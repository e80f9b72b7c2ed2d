"""Integrator algebra for linear vector fields on the real line.

A one-step method applied to ``v(x) = -lam (x - anchor)`` is an affine map
``x -> c x + d`` whose coefficients are explicit functions of the step size,
so adjoints, compositions and fixed points can be computed exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

ORDER_LADDER = tuple(2.0 ** -k for k in range(5, 13))
RESIDUAL_FLOOR = 1e-13
EXACT_FLOOR = 1e-14
# eigenvalues recovered from a rotated Hessian are off by a few ulps, so a
# step exactly at an admissibility limit is accepted
_ADMISSIBLE_RTOL = 1.0 + 1e-12


@dataclass(frozen=True)
class LinearField:
    """v(x) = -lam (x - anchor), the negative gradient of 0.5 lam (x - anchor)^2."""

    lam: float
    anchor: float = 0.0

    def __call__(self, x):
        return -self.lam * (x - self.anchor)

    def flow(self, t, x):
        return self.anchor + math.exp(-self.lam * t) * (x - self.anchor)

    def __add__(self, other: "LinearField") -> "LinearField":
        lam = self.lam + other.lam
        if lam == 0:
            raise ValueError("sum of fields has zero rate")
        return LinearField(lam, (self.lam * self.anchor + other.lam * other.anchor) / lam)


@dataclass(frozen=True)
class AffineStepMap:
    """x -> c x + d."""

    c: float
    d: float = 0.0

    @classmethod
    def identity(cls) -> "AffineStepMap":
        return cls(1.0, 0.0)

    def __call__(self, x):
        return self.c * x + self.d

    def __matmul__(self, other: "AffineStepMap") -> "AffineStepMap":
        return compose(self, other)

    def inverse(self) -> "AffineStepMap":
        if self.c == 0:
            raise ZeroDivisionError("map is not invertible (c = 0)")
        return AffineStepMap(1.0 / self.c, -self.d / self.c)

    def distance(self, other: "AffineStepMap") -> float:
        return max(abs(self.c - other.c), abs(self.d - other.d))


def compose(a: AffineStepMap, b: AffineStepMap) -> AffineStepMap:
    """a after b: x -> a(b(x))."""
    return AffineStepMap(a.c * b.c, a.c * b.d + a.d)


class NonContractiveError(ValueError):
    pass


def fixed_point(m: AffineStepMap) -> float:
    """Limit of iterating ``m``: d / (1 - c), requires |c| < 1."""
    if not abs(m.c) < 1.0:
        raise NonContractiveError(f"map with c={m.c} is not contractive")
    return m.d / (1.0 - m.c)


class IntegratorKind(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    EXACT = "exact"
    TRAPEZOID = "trapezoid"
    MIDPOINT = "midpoint"


def step_map(kind: IntegratorKind, field: LinearField, eps: float) -> AffineStepMap:
    """One step of ``kind`` with step ``eps`` on ``field``; the anchor is always fixed."""
    kind = IntegratorKind(kind)
    lam, a = field.lam, field.anchor
    el = eps * lam
    if kind is IntegratorKind.FORWARD:
        c = 1.0 - el
    elif kind is IntegratorKind.BACKWARD:
        if 1.0 + el == 0:
            raise ZeroDivisionError("backward map is singular at 1 + eps*lam = 0")
        c = 1.0 / (1.0 + el)
    elif kind is IntegratorKind.EXACT:
        c = math.exp(-el)
    elif kind is IntegratorKind.TRAPEZOID:
        # backward half step after forward half step
        half = eps / 2.0
        return step_map(IntegratorKind.BACKWARD, field, half) @ step_map(
            IntegratorKind.FORWARD, field, half)
    else:
        half = eps / 2.0
        return step_map(IntegratorKind.FORWARD, field, half) @ step_map(
            IntegratorKind.BACKWARD, field, half)
    return AffineStepMap(c, (1.0 - c) * a)


class Integrator:
    """A step-size-indexed family ``eps -> AffineStepMap`` for a target field.

    ``field`` is the vector field the family is meant to integrate; it is
    what ``estimate_order`` compares against.
    """

    def __init__(self, maps: Callable[[float], AffineStepMap], field: LinearField, name=""):
        self._maps = maps
        self.field = field
        self.name = name

    @classmethod
    def of(cls, kind, field: LinearField) -> "Integrator":
        kind = IntegratorKind(kind)
        return cls(lambda e: step_map(kind, field, e), field, kind.name)

    def __call__(self, eps) -> AffineStepMap:
        return self._maps(float(eps))

    def adjoint(self) -> "Integrator":
        return adjoint(self)

    def __matmul__(self, other: "Integrator") -> "Integrator":
        return compose_integrators(self, other)

    def __repr__(self):
        return f"Integrator({self.name or 'anonymous'}, {self.field})"


def adjoint(family: Integrator) -> Integrator:
    """A*_eps = (A_{-eps})^{-1}."""
    return Integrator(lambda e: family(-e).inverse(), family.field, f"{family.name}*")


def compose_integrators(outer: Integrator, inner: Integrator, field=None) -> Integrator:
    return Integrator(lambda e: outer(e) @ inner(e), field or outer.field,
                      f"{outer.name}.{inner.name}")


def symmetrize(family: Integrator) -> Integrator:
    """eps -> A_{eps/2} after A*_{eps/2}; a self-adjoint family."""
    adj = adjoint(family)
    return Integrator(lambda e: family(e / 2.0) @ adj(e / 2.0), family.field,
                      f"sym({family.name})")


def lie_splitting(kind_f, field_f: LinearField, kind_g, field_g: LinearField) -> Integrator:
    """Step on f, then on g; integrates the sum field."""
    a = Integrator.of(kind_f, field_f)
    b = Integrator.of(kind_g, field_g)
    return Integrator(lambda e: b(e) @ a(e), field_f + field_g,
                      f"{IntegratorKind(kind_f).name}|{IntegratorKind(kind_g).name}")


def strang_splitting(kind_f, field_f, kind_g, field_g) -> Integrator:
    """Half step on f, full step on g, half step on f."""
    a = Integrator.of(kind_f, field_f)
    b = Integrator.of(kind_g, field_g)
    return Integrator(lambda e: a(e / 2.0) @ b(e) @ a(e / 2.0), field_f + field_g,
                      f"strang({IntegratorKind(kind_f).name},{IntegratorKind(kind_g).name})")


def is_symmetric(family: Integrator, epsilons, tol=1e-12) -> bool:
    adj = adjoint(family)
    return all(family(e).distance(adj(e)) <= tol for e in epsilons)


def _as_family(kind_or_family, field):
    if isinstance(kind_or_family, Integrator):
        return kind_or_family
    return Integrator.of(kind_or_family, field)


def local_errors(kind_or_family, field: LinearField | None, x0: float, epsilons=ORDER_LADDER):
    fam = _as_family(kind_or_family, field)
    target = fam.field
    return np.array([abs(target.flow(e, x0) - fam(e)(x0)) for e in epsilons])


def estimate_order(kind_or_family, field: LinearField | None = None, x0: float = 1.0,
                   epsilons=ORDER_LADDER) -> float:
    """Order p from a least-squares fit of log local error ~ (p + 1) log eps.

    Residuals below ``RESIDUAL_FLOOR`` are dropped from the fit.  When every
    residual is at most ``EXACT_FLOOR`` the method is exact on this field and
    ``math.inf`` is returned.  For a splitting, avoid starting at the anchor of
    one summand: the first sub-step is then exact and the leading error term
    can cancel, inflating the estimate.
    """
    fam = _as_family(kind_or_family, field)
    tf = fam.field
    if tf.lam == 0:
        raise ValueError("field has zero rate; order is undefined")
    if isinstance(kind_or_family, IntegratorKind) or not isinstance(kind_or_family, Integrator):
        if x0 == tf.anchor:
            raise ValueError("x0 is the field's equilibrium; every consistent method is exact there")
    eps = np.asarray(epsilons, dtype=float)
    res = local_errors(fam, None, x0, eps)
    if np.all(res <= EXACT_FLOOR):
        return math.inf
    keep = res >= RESIDUAL_FLOOR
    if keep.sum() < 2:
        raise ValueError("too few residuals above the floating-point floor for a fit")
    slope = np.polyfit(np.log(eps[keep]), np.log(res[keep]), 1)[0]
    return float(slope - 1.0)


def bias_order(family: Integrator, epsilons=ORDER_LADDER) -> float:
    """Slope of log |fixed point - equilibrium| against log eps."""
    eps = np.asarray(epsilons, dtype=float)
    xstar = family.field.anchor
    bias = np.array([abs(fixed_point(family(e)) - xstar) for e in eps])
    keep = bias >= RESIDUAL_FLOOR
    if keep.sum() < 2:
        raise ValueError("bias below the floating-point floor; no order to fit")
    return float(np.polyfit(np.log(eps[keep]), np.log(bias[keep]), 1)[0])


# -- composite algorithms on f = 0.5 (x-1)^2, g = 0.5 (x+1)^2 -------------

ALGORITHMS = {"GD": IntegratorKind.FORWARD, "GF": IntegratorKind.EXACT, "PG": IntegratorKind.BACKWARD}
F_FIELD = LinearField(1.0, 1.0)
G_FIELD = LinearField(1.0, -1.0)


def _em(e):
    return math.exp(-e)


# Closed-form limits for each (algorithm on f, algorithm on g) pair.
REFERENCE_LIMITS = {
    ("GD", "GD"): lambda e: -e / (2 - e),
    ("GD", "GF"): lambda e: (_em(e) * (1 + e) - 1) / (1 - _em(e) * (1 - e)),
    ("GD", "PG"): lambda e: 0.0,
    ("GF", "GD"): lambda e: ((1 - _em(e)) * (1 - e) - e) / (1 - _em(e) * (1 - e)),
    ("GF", "GF"): lambda e: -(1 - _em(e)) ** 2 / (1 - _em(2 * e)),
    ("GF", "PG"): lambda e: (1 - _em(e) - e) / (1 - _em(e) + e),
    ("PG", "GD"): lambda e: 0.0,
    ("PG", "GF"): lambda e: (_em(e) * e - (1 - _em(e)) * (1 + e)) / (1 + e - _em(e)),
    ("PG", "PG"): lambda e: e / (2 - e),
}


def composite_map(alg_f: str, alg_g: str, eps: float, observe: str = "full") -> AffineStepMap:
    """One sweep of the composite algorithm as an affine map.

    ``observe="full"`` maps x_k to x_{k+1} (f step, then g step);
    ``observe="half"`` maps the intermediate iterate x_{k+1/2} to x_{k+3/2}.
    """
    mf = step_map(ALGORITHMS[alg_f], F_FIELD, eps)
    mg = step_map(ALGORITHMS[alg_g], G_FIELD, eps)
    if observe == "full":
        return mg @ mf
    if observe == "half":
        return mf @ mg
    raise ValueError(f"observe must be 'full' or 'half', got {observe!r}")


def composite_limit(alg_f: str, alg_g: str, eps: float, observe: str = "full") -> float:
    """Limit point of alternating ``alg_f`` on f and ``alg_g`` on g."""
    if alg_f not in ALGORITHMS or alg_g not in ALGORITHMS:
        raise ValueError(f"algorithms must be in {sorted(ALGORITHMS)}")
    return fixed_point(composite_map(alg_f, alg_g, eps, observe))


@dataclass
class CompositeLimitRow:
    alg_f: str
    alg_g: str
    eps: float
    observed: float
    reference: float

    @property
    def error(self) -> float:
        return abs(self.observed - self.reference)


def composite_limit_rows(eps: float, observe: str = "full"):
    return [CompositeLimitRow(f, g, eps, composite_limit(f, g, eps, observe), REFERENCE_LIMITS[f, g](eps))
            for f in ALGORITHMS for g in ALGORITHMS]


# -- Euclidean rate checks -------------------------------------------------

@dataclass(frozen=True)
class Quadratic:
    """f(x) = 0.5 (x - b)^T H (x - b) on R^n with symmetric H."""

    H: np.ndarray
    b: np.ndarray

    @classmethod
    def diagonal(cls, h, b) -> "Quadratic":
        return cls(np.diag(np.asarray(h, dtype=float)), np.asarray(b, dtype=float))

    def value(self, x):
        d = x - self.b
        return 0.5 * d @ self.H @ d

    def gradient(self, x):
        return self.H @ (x - self.b)

    def prox(self, x, eps):
        n = len(self.b)
        return np.linalg.solve(np.eye(n) + eps * self.H, x + eps * self.H @ self.b)

    @property
    def eigs(self):
        return np.linalg.eigvalsh(self.H)


class RateScheme(enum.Enum):
    GD = "gd"
    PG = "pg"
    SYMMETRIZED_FORWARD = "symmetrized_forward"
    FB = "fb"


@dataclass
class RateCheck:
    scheme: RateScheme
    gaps: np.ndarray
    bounds: np.ndarray
    rate: float

    @property
    def ok(self) -> bool:
        return bool(np.all(self.gaps <= self.bounds * (1 + 1e-9) + 1e-14 * self.gaps[0]))

    @property
    def worst_ratio(self) -> float:
        """Largest gap/bound over iterates whose bound is above the rounding floor."""
        live = self.bounds[1:] > 1e-14 * self.gaps[0]
        if not np.any(live):
            return 0.0
        return float(np.max(self.gaps[1:][live] / self.bounds[1:][live]))


def euclidean_rate_check(scheme, f: Quadratic, eps: float, k: int, x0, g: Quadratic | None = None,
                         K: float | None = None) -> RateCheck:
    """Run ``k`` iterations and pair each function gap with its proven bound.

    GD, PG and SYMMETRIZED_FORWARD minimize ``f``; FB takes a gradient step
    on ``f`` then a proximal step on ``g`` and tracks ``f + g``.  The
    gradient-domination constant is the smallest Hessian eigenvalue of the
    objective, ``L`` the largest eigenvalue of the smooth part, and ``K``
    (FB only) defaults to the smallest eigenvalue of ``f``'s Hessian.
    """
    scheme = RateScheme(scheme) if not isinstance(scheme, RateScheme) else scheme
    x = np.array(x0, dtype=float)
    if scheme is RateScheme.FB:
        if g is None:
            raise ValueError("FB needs the second summand g")
        if np.min(g.eigs) < -1e-12:
            raise ValueError("g must be convex")
        H = f.H + g.H
        xstar = np.linalg.solve(H, f.H @ f.b + g.H @ g.b)
    else:
        H = f.H
        xstar = f.b
    alpha = float(np.min(np.linalg.eigvalsh(H)))
    L = float(np.max(f.eigs))
    if alpha <= 0:
        raise ValueError("objective is not gradient dominated (alpha <= 0)")
    if not eps > 0:
        raise ValueError("eps must be positive")

    if scheme is RateScheme.GD:
        if eps > 2.0 / L * _ADMISSIBLE_RTOL:
            raise ValueError(f"GD needs eps <= 2/L = {2 / L:.6g}")
        rate = 1.0 - 2.0 * alpha * eps * (1.0 - eps * L / 2.0)
    elif scheme is RateScheme.PG:
        rate = 1.0 / (1.0 + alpha * eps)
    elif scheme is RateScheme.SYMMETRIZED_FORWARD:
        if eps > 2.0 / L * _ADMISSIBLE_RTOL:
            raise ValueError(f"symmetrized forward needs eps <= 2/L = {2 / L:.6g}")
        rate = (1.0 - 2.0 * alpha * eps * (1.0 - eps * L / 2.0)) / (1.0 + alpha * eps)
    else:
        K = float(np.min(f.eigs)) if K is None else float(K)
        if not L > max(0.0, -K):
            raise ValueError("need L > max(0, -K)")
        if eps > min(2.0 / L, 2.0 / (K + L)) * _ADMISSIBLE_RTOL:
            raise ValueError("FB needs eps <= min(2/L, 2/(K+L))")
        denom = 1.0 - 2.0 * eps * K * L / (K + L)
        rate = 0.0 if denom <= 0 else 1.0 / (1.0 + alpha * eps * (2.0 - eps * L) / denom)

    def gap(z):
        d = z - xstar
        return 0.5 * d @ H @ d

    gaps = np.empty(k + 1)
    gaps[0] = gap(x)
    for i in range(1, k + 1):
        if scheme is RateScheme.GD:
            x = x - eps * f.gradient(x)
        elif scheme is RateScheme.PG:
            x = f.prox(x, eps)
        elif scheme is RateScheme.SYMMETRIZED_FORWARD:
            x = f.prox(x - eps * f.gradient(x), eps)
        else:
            x = g.prox(x - eps * f.gradient(x), eps)
        gaps[i] = gap(x)
    bounds = gaps[0] * rate ** np.arange(k + 1)
    return RateCheck(scheme, gaps, bounds, rate)


def semiconvex_contraction(f: Quadratic, eps: float, x, y):
    """``(|x(eps) - y(eps)|^2, (1 - 2 eps K L/(K+L)) |x - y|^2)`` for a gradient step."""
    ev = f.eigs
    K, L = float(ev[0]), float(ev[-1])
    if not L > max(0.0, -K):
        raise ValueError("need L > max(0, -K)")
    if not 0 <= eps <= 2.0 / (K + L) * _ADMISSIBLE_RTOL:
        raise ValueError("need 0 <= eps <= 2/(K+L)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = (x - eps * f.gradient(x)) - (y - eps * f.gradient(y))
    factor = 1.0 - 2.0 * eps * K * L / (K + L)
    return float(dx @ dx), float(factor * (x - y) @ (x - y))
