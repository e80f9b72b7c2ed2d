import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from langevin_schemes import gaussian_flows as gf
from langevin_schemes.gaussian_flows import SchemeKind
from langevin_schemes.measures import (GaussianMeasure, fisher_information_gaussian,
                                       gaussian_entropy, gaussian_w2,
                                       second_order_fisher_gaussian)

from conftest import random_spd

# values from tests/oracles/generate_oracles.py
OU_MEAN_EM, OU_MEAN_EM_SE = 1.0006070483184748, 0.0031787722759210567
HEAT_BACKWARD_BISECTION = 1.4571067811865475
HEAT_FORWARD_PUSHFORWARD, HEAT_FORWARD_PUSHFORWARD_SE = 1.561761527746636, 0.0022086643337318173

STD1 = GaussianMeasure.standard(1)


def diag_target():
    return GaussianMeasure(np.array([1.0, -1.0, 0.5]), np.diag([0.5, 1.0, 2.0]))


def test_ou_flow_identity_and_limit(rng):
    nu = GaussianMeasure(rng.standard_normal(3), random_spd(rng, 3))
    rho = GaussianMeasure(rng.standard_normal(3), random_spd(rng, 3))
    assert gf.ou_exact_flow(nu, rho, 0.0) is rho
    assert gaussian_w2(gf.ou_exact_flow(nu, rho, 50.0), nu) < 1e-10


def test_ou_flow_mean_matches_euler_maruyama():
    out = gf.ou_exact_flow(STD1, GaussianMeasure([2.0], [[1.0]]), np.log(2.0))
    assert out.mean[0] == pytest.approx(1.0, abs=1e-14)
    assert abs(out.mean[0] - OU_MEAN_EM) < 3 * OU_MEAN_EM_SE
    assert out.cov[0, 0] == pytest.approx(1.0)


def test_ou_flow_semigroup(rng):
    nu = GaussianMeasure(rng.standard_normal(2), random_spd(rng, 2))
    rho = GaussianMeasure(rng.standard_normal(2), random_spd(rng, 2))
    a = gf.ou_exact_flow(nu, gf.ou_exact_flow(nu, rho, 0.3), 0.4)
    b = gf.ou_exact_flow(nu, rho, 0.7)
    assert gaussian_w2(a, b) < 1e-12


@pytest.mark.parametrize("kind", gf.CONSISTENT_KINDS)
@pytest.mark.parametrize("eps", [0.05, 0.3, 0.5])
def test_target_is_fixed_point(kind, eps):
    nu = diag_target()
    assert gaussian_w2(gf.scheme_step(kind, nu, nu, eps), nu) <= 1e-12


@pytest.mark.parametrize("kind", gf.CONSISTENT_KINDS)
def test_consistent_schemes_converge(kind):
    nu = diag_target()
    lim, it = gf.converge_scheme(kind, nu, GaussianMeasure.standard(3), 0.3)
    assert gaussian_w2(lim, nu) <= 1e-10
    assert it < 1000


def test_ula_converges_to_biased_limit():
    nu = diag_target()
    lim, _ = gf.converge_scheme("ula", nu, GaussianMeasure.standard(3), 0.3)
    assert gaussian_w2(lim, gf.ula_limit(nu, 0.3)) < 1e-10
    assert gaussian_w2(lim, nu) > 0.1


def test_ula_limit_values():
    assert gf.ula_limit(STD1, 0.5).cov[0, 0] == pytest.approx(4.0 / 3.0, rel=1e-14)
    assert gf.ula_limit(STD1, 0.0) is STD1
    nu = diag_target()
    lim = gf.ula_limit(nu, 0.4)
    assert gaussian_w2(gf.scheme_step("ula", nu, lim, 0.4), lim) <= 1e-12
    with pytest.raises(gf.InadmissibleStepError):
        gf.ula_limit(nu, 1.0)


def test_ula_bias_small_eps():
    assert gf.ula_bias(STD1, 0.0) == 0.0
    b = gf.ula_bias(STD1, 0.1)
    assert b == pytest.approx(abs(1 - (1 - 0.05) ** -0.5), rel=1e-12)
    assert abs(b - 0.1 / 4) < 0.1 ** 2


def test_ula_unrolled_closed_form(rng):
    nu = GaussianMeasure(rng.standard_normal(3), random_spd(rng, 3, 0.5, 2.0))
    rho = GaussianMeasure(rng.standard_normal(3), random_spd(rng, 3))
    seq = gf.iterate_scheme("ula", nu, rho, 0.3, 12)
    for k in (1, 5, 12):
        cf = gf.ula_closed_form(nu, rho, 0.3, k)
        assert np.max(np.abs(seq[k].cov - cf.cov)) <= 1e-12
        assert np.max(np.abs(seq[k].mean - cf.mean)) <= 1e-12


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0, 2.0, 10.0])
def test_sla_stationary_is_target_for_all_eps(eps, rng):
    nu = GaussianMeasure(rng.standard_normal(2), random_spd(rng, 2))
    a, b = gf.affine_coefficients("sla", nu, eps)
    assert np.max(np.abs(np.linalg.eigvals(a))) < 1
    st_cov = gf.affine_stationary_cov(a, b @ b.T)
    assert np.max(np.abs(st_cov - nu.cov)) <= 1e-12
    assert np.max(np.abs(gf.stationary_measure("sla", nu, eps).cov - nu.cov)) <= 1e-12


def test_small_step_moves_order_eps():
    nu = diag_target()
    rho = GaussianMeasure(np.zeros(3), np.eye(3))
    for kind in SchemeKind:
        if kind is SchemeKind.EXACT_OU:
            continue
        d = gaussian_w2(gf.scheme_step(kind, nu, rho, 1e-8), rho)
        assert 0 < d < 1e-6


def test_fb_bf_mean_recursions():
    nu = diag_target()
    rho = GaussianMeasure(np.array([3.0, 2.0, -1.0]), np.eye(3))
    eps = 0.2
    p = nu.precision
    fb = gf.scheme_step("fb", nu, rho, eps)
    bf = gf.scheme_step("bf", nu, rho, eps)
    assert np.allclose(fb.mean - nu.mean, (np.eye(3) - eps * p) @ (rho.mean - nu.mean), atol=1e-14)
    assert np.allclose(bf.mean - nu.mean, np.linalg.solve(np.eye(3) + eps * p, rho.mean - nu.mean),
                       atol=1e-14)


def test_fb_covariance_satisfies_implicit_relation():
    nu = diag_target()
    rho = GaussianMeasure(np.zeros(3), np.diag([0.7, 1.3, 3.0]))
    eps = 0.3
    out = gf.scheme_step("fb", nu, rho, eps)
    half = (np.eye(3) - eps * nu.precision) @ rho.cov @ (np.eye(3) - eps * nu.precision)
    m = np.eye(3) - eps * np.linalg.inv(out.cov)
    assert np.max(np.abs(out.cov @ m @ m - half)) < 1e-12


def test_bf_is_adjoint_order_of_fb():
    # BF = heat-forward step then prox; its covariance solves the reversed composition
    nu = GaussianMeasure(np.zeros(1), [[2.0]])
    rho = GaussianMeasure(np.zeros(1), [[1.0]])
    eps = 0.4
    s = rho.cov[0, 0]
    half = (s + eps) ** 2 / s
    want = half / (1 + eps / 2.0) ** 2
    assert gf.scheme_step("bf", nu, rho, eps).cov[0, 0] == pytest.approx(want, rel=1e-14)


def test_backward_covariance_matches_bisection():
    nu = GaussianMeasure(np.zeros(1), [[2.0]])
    rho = GaussianMeasure(np.zeros(1), [[0.8]])
    eps = 0.35
    out = gf.scheme_step("backward", nu, rho, eps).cov[0, 0]

    def g(s):
        return s * (1 - eps / s + eps / 2.0) ** 2 - 0.8

    lo, hi = eps / (1 + eps / 2.0) + 1e-12, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (g(mid) > 0) == (g(hi) > 0):
            hi = mid
        else:
            lo = mid
    assert out == pytest.approx(0.5 * (lo + hi), abs=1e-12)


def test_non_commuting_rejected():
    nu = GaussianMeasure(np.zeros(2), [[2.0, 0.5], [0.5, 1.0]])
    rho = GaussianMeasure(np.zeros(2), [[1.0, 0.0], [0.0, 3.0]])
    for kind in ("forward", "backward", "fb", "bf"):
        with pytest.raises(gf.NonCommutingError):
            gf.scheme_step(kind, nu, rho, 0.1)
    gf.scheme_step("ula", nu, rho, 0.1)
    gf.scheme_step("sla", nu, rho, 0.1)


def test_inadmissible_steps():
    nu = diag_target()
    with pytest.raises(gf.InadmissibleStepError):
        gf.scheme_step("fb", nu, nu, 0.6)
    with pytest.raises(gf.InadmissibleStepError):
        gf.scheme_step("ula", nu, nu, 1.0)
    with pytest.raises(gf.InadmissibleStepError):
        gf.scheme_step("sla", nu, nu, -0.1)
    with pytest.raises(gf.InadmissibleStepError):
        gf.heat_backward_step(STD1, 1.5)
    # forward step from a much wider rho needs 1 + eps K > 0 for K = 1/s_rho - 1/s_nu
    with pytest.raises(gf.InadmissibleStepError):
        gf.scheme_step("forward", STD1, GaussianMeasure([0.0], [[100.0]]), 1.5)


def test_heat_exact():
    assert gf.heat_exact(STD1, 0.0).cov[0, 0] == 1.0
    assert gf.heat_exact(STD1, 0.5).cov[0, 0] == 2.0
    rho = GaussianMeasure(np.zeros(3), np.diag([0.5, 1.0, 2.0]))
    for t in (0.1, 1.0, 3.0):
        h = gaussian_entropy(gf.heat_exact(rho, t))
        want = 1.5 * np.log(2 * np.pi * np.e) + 0.5 * np.sum(np.log(np.array([0.5, 1.0, 2.0]) + 2 * t))
        assert h == pytest.approx(want, abs=1e-13)


def test_heat_forward_step_value_and_pushforward():
    out = gf.heat_forward_step(STD1, 0.25)
    assert out.cov[0, 0] == pytest.approx(1.5625, abs=1e-15)
    assert abs(out.cov[0, 0] - HEAT_FORWARD_PUSHFORWARD) < 3 * HEAT_FORWARD_PUSHFORWARD_SE
    rho = GaussianMeasure([3.0], [[1.0]])
    assert gf.heat_forward_step(rho, 0.25).mean[0] == 3.0


def test_heat_backward_step():
    out = gf.heat_backward_step(STD1, 0.25)
    assert out.cov[0, 0] == pytest.approx(0.5 * (1.5 + np.sqrt(2.0)), abs=1e-15)
    assert out.cov[0, 0] == pytest.approx(HEAT_BACKWARD_BISECTION, abs=1e-10)
    s = out.cov[0, 0]
    assert abs(s * (1 - 0.25 / s) ** 2 - 1.0) <= 1e-12
    # small-step expansion Sigma + 2 eps - eps^2 / Sigma
    eps = 1e-3
    small = gf.heat_backward_step(GaussianMeasure([0.0], [[2.0]]), eps).cov[0, 0]
    assert abs(small - (2.0 + 2 * eps - eps ** 2 / 2.0)) < 10 * eps ** 3


@pytest.mark.parametrize("n", [1, 3])
def test_heat_bracketing(n):
    rho0 = GaussianMeasure(np.zeros(n), np.diag(np.linspace(1.0, 2.0, n)))
    fwd = bwd = rho0
    for k in range(1, 51):
        fwd = gf.heat_forward_step(fwd, 0.1)
        bwd = gf.heat_backward_step(bwd, 0.1)
        ex = gf.heat_exact(rho0, 0.1 * k).cov
        assert np.linalg.eigvalsh(fwd.cov - ex)[0] > 0
        assert np.linalg.eigvalsh(ex - bwd.cov)[0] > 0


def test_variance_flow():
    rho = GaussianMeasure([1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]])
    assert gaussian_w2(gf.variance_flow(rho, 0.0), rho) < 1e-14
    for t in (0.1, 0.7, 2.0):
        out = gf.variance_flow(rho, t)
        assert np.trace(out.cov) == pytest.approx(np.exp(-4 * t) * np.trace(rho.cov), rel=1e-12)
        assert np.array_equal(out.mean, rho.mean)


def test_de_bruijn_identities():
    rho0 = GaussianMeasure(np.zeros(2), np.diag([0.5, 1.5]))
    h = 1e-4
    for t in (0.05, 0.3, 1.0):
        H = lambda s: gaussian_entropy(gf.heat_exact(rho0, s))
        rho = gf.heat_exact(rho0, t)
        d1 = (H(t + h) - H(t - h)) / (2 * h)
        d2 = (H(t + h) - 2 * H(t) + H(t - h)) / h ** 2
        assert abs(d1 - fisher_information_gaussian(rho)) < 1e-6
        assert abs(d2 + 2 * second_order_fisher_gaussian(rho)) < 1e-5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["forward", "backward", "fb", "bf", "sla"]))
def test_random_commuting_data_converges(seed, kind):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    nu = GaussianMeasure(rng.standard_normal(3), (q * rng.uniform(0.5, 2.0, 3)) @ q.T)
    rho0 = GaussianMeasure(rng.standard_normal(3), (q * rng.uniform(0.5, 2.0, 3)) @ q.T)
    lim, _ = gf.converge_scheme(kind, nu, rho0, 0.25)
    assert gaussian_w2(lim, nu) < 1e-10
