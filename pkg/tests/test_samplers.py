import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from langevin_schemes import gaussian_flows as gf
from langevin_schemes.experiments import coupling_worst_ratio, rounding_allowance
from langevin_schemes.measures import GaussianMeasure, gaussian_w2
from langevin_schemes.noise import NoiseStream, normals_at
from langevin_schemes.potentials import GaussianPotential, MixtureTarget, Potential
from langevin_schemes.prox import ProxConvergenceError
from langevin_schemes.samplers import (Ensemble, NonFiniteGradientError, backward_flow_step,
                                       mixture_sla_step, run_chain, sla_residual, sla_step,
                                       synchronous_coupling_run, ula_step)

# value from tests/oracles/generate_oracles.py (bisection on the scalar equation)
MIXTURE_ROOT = 0.4925798924511221

STD1 = GaussianPotential(GaussianMeasure.standard(1))


def test_ula_step_examples():
    assert ula_step(STD1, np.array([1.0]), 0.5, np.array([0.0]))[0] == 0.5
    z = np.array([0.3])
    assert ula_step(STD1, np.array([1.0]), 0.5, z)[0] == pytest.approx(0.5 + 0.3, abs=1e-15)


def test_sla_step_example():
    # x = 1, eps = 0.5, z = 0: w = 0.5, y = w / 1.5
    y = sla_step(STD1, np.array([1.0]), 0.5, np.array([0.0]))
    assert y[0] == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_backward_flow_step_example():
    y = backward_flow_step(STD1, np.array([1.0]), 1.0, np.array([0.5]))
    assert y[0] == pytest.approx(0.5 + np.sqrt(2.0) * 0.5, abs=1e-15)


def test_steppers_reject_bad_eps():
    for fn in (ula_step, sla_step, backward_flow_step):
        with pytest.raises(ValueError):
            fn(STD1, np.zeros(1), 0.0, np.zeros(1))


def test_non_finite_gradient():
    pot = Potential(1, lambda x: 0.0, lambda x: np.full_like(np.asarray(x, dtype=float), np.nan))
    with pytest.raises(NonFiniteGradientError):
        ula_step(pot, np.zeros(1), 0.1, np.zeros(1))


def test_noise_stream_and_array_agree():
    x = np.array([[0.5, -1.0], [2.0, 0.1]])
    pot = GaussianPotential(GaussianMeasure.standard(2))
    a = ula_step(pot, x, 0.2, NoiseStream(7, 1))
    b = ula_step(pot, x, 0.2, normals_at(7, 1, 0, 4).reshape(2, 2))
    assert np.array_equal(a, b)


def test_mixture_step_matches_scalar_root():
    target = MixtureTarget([1.0])
    eps = 0.1
    # choose x, z so that <w, a> = r with (1 + eps) v - eps tanh(v) = r at v = MIXTURE_ROOT
    r = (1 + eps) * 0.5 - eps * np.tanh(0.5)
    x = np.array([0.0])
    z = np.array([r / np.sqrt(4 * eps)])
    y = mixture_sla_step(target, x, eps, z)
    v = y[0]
    assert (1 + eps) * v - eps * np.tanh(v) == pytest.approx(r, abs=1e-13)
    assert v == pytest.approx(0.5, abs=1e-12)
    # the stored oracle is the noiseless step from x = 0.5
    y2 = mixture_sla_step(target, np.array([0.5]), eps, np.array([0.0]))
    assert y2[0] == pytest.approx(MIXTURE_ROOT, abs=1e-12)


def test_mixture_a_zero_matches_gaussian_sla(rng):
    target = MixtureTarget([0.0, 0.0])
    gauss = GaussianPotential(GaussianMeasure.standard(2))
    x = rng.standard_normal((50, 2))
    for eps in (0.05, 0.5, 2.0):
        z = rng.standard_normal((50, 2))
        a = mixture_sla_step(target, x, eps, z)
        b = sla_step(gauss, x, eps, z)
        assert np.max(np.abs(a - b)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.01, 3.0),
       st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_mixture_step_residual_certified(a1, a2, eps, x1, x2, z1, z2):
    target = MixtureTarget([a1, a2])
    if not eps * target.a_sq < 1 + eps:
        return
    x = np.array([x1, x2])
    z = np.array([z1, z2])
    y = mixture_sla_step(target, x, eps, z)
    assert sla_residual(target, x, y, eps, z)[0] <= 1e-10


def test_mixture_step_rejects_non_monotone():
    target = MixtureTarget([2.0])
    with pytest.raises(ValueError):
        mixture_sla_step(target, np.zeros(1), 1.0, np.zeros(1))


def test_ensemble_validation():
    with pytest.raises(ValueError):
        Ensemble(np.empty((0, 2)))
    e = Ensemble([1.0, 2.0, 3.0])
    assert (e.size, e.dimension) == (3, 1)
    c = Ensemble.constant([1.0, 2.0], 4)
    assert c.positions.shape == (4, 2)


def test_run_chain_zero_steps_and_determinism():
    ens = Ensemble.constant([0.0], 10)
    r0 = run_chain("ula", STD1, ens, 0.1, 0, seed=3)
    assert np.array_equal(r0.ensemble.positions, ens.positions)
    assert r0.count == 0 and r0.mean is None
    a = run_chain("sla", STD1, ens, 0.1, 50, seed=3)
    b = run_chain("sla", STD1, ens, 0.1, 50, seed=3)
    c = run_chain("sla", STD1, ens, 0.1, 50, seed=4)
    assert np.array_equal(a.ensemble.positions, b.ensemble.positions)
    assert not np.array_equal(a.ensemble.positions, c.ensemble.positions)


def test_run_chain_thinning_and_burn_in():
    ens = Ensemble.constant([0.0, 1.0], 5)
    pot = GaussianPotential(GaussianMeasure.standard(2))
    r = run_chain("ula", pot, ens, 0.1, 20, seed=1, burn_in=5, thin=4)
    assert r.trajectory.shape == (5, 5, 2)
    assert np.array_equal(r.trajectory[-1], r.ensemble.positions)
    assert r.count == 15 * 5
    with pytest.raises(ValueError):
        run_chain("ula", pot, ens, 0.1, 10, seed=1, thin=0)


@pytest.mark.parametrize("scheme", ["ula", "sla", "backward_flow"])
def test_kernel_path_matches_generic_steps_gaussian(scheme, rng):
    nu = GaussianMeasure(np.array([1.0, -0.5]), np.array([[2.0, 0.4], [0.4, 0.7]]))
    pot = GaussianPotential(nu)
    ens = Ensemble(rng.standard_normal((6, 2)))
    fast = run_chain(scheme, pot, ens, 0.2, 30, seed=9, burn_in=3, thin=5)
    slow = run_chain(scheme, pot, ens, 0.2, 30, seed=9, burn_in=3, thin=5, fast=False)
    assert slow.backend == "generic"
    assert np.max(np.abs(fast.ensemble.positions - slow.ensemble.positions)) <= 1e-12
    assert np.max(np.abs(fast.trajectory - slow.trajectory)) <= 1e-12
    assert np.max(np.abs(fast.cov - slow.cov)) <= 1e-12
    assert fast.count == slow.count


@pytest.mark.parametrize("scheme", ["ula", "mixture_sla"])
def test_kernel_path_matches_generic_steps_mixture(scheme, rng):
    target = MixtureTarget([0.6, -0.3])
    ens = Ensemble(rng.standard_normal((6, 2)))
    fast = run_chain(scheme, target, ens, 0.15, 40, seed=2)
    slow = run_chain(scheme, target, ens, 0.15, 40, seed=2, fast=False)
    assert np.max(np.abs(fast.ensemble.positions - slow.ensemble.positions)) <= 1e-12
    assert fast.max_residual <= 1e-10


def test_chunking_does_not_change_results(monkeypatch):
    from langevin_schemes import samplers
    ens = Ensemble.constant([0.0], 7)
    a = run_chain("sla", STD1, ens, 0.3, 25, seed=11, burn_in=2)
    monkeypatch.setattr(samplers, "CHUNK_DOUBLES", 10)
    b = run_chain("sla", STD1, ens, 0.3, 25, seed=11, burn_in=2)
    assert np.array_equal(a.ensemble.positions, b.ensemble.positions)
    assert np.allclose(a.cov, b.cov, rtol=0, atol=1e-14)


def test_particles_read_disjoint_noise():
    # particle i of a 3-particle run equals a single-particle run fed the same draws
    ens = Ensemble([[0.0], [1.0], [2.0]])
    r = run_chain("ula", STD1, ens, 0.1, 4, seed=5)
    x = 1.0
    for s in range(4):
        z = normals_at(5, 0, s * 3 + 1, 1)
        x = ula_step(STD1, np.array([x]), 0.1, z)[0]
    assert r.ensemble.positions[1, 0] == pytest.approx(x, abs=1e-15)


def test_ula_warns_outside_stability():
    with pytest.warns(RuntimeWarning):
        run_chain("ula", STD1, Ensemble.constant([0.0], 2), 2.5, 1, seed=0)


def test_ula_ensemble_variance_matches_biased_limit():
    nu = GaussianMeasure.standard(1)
    r = run_chain("ula", STD1, Ensemble.constant([0.0], 2000), 0.5, 400, seed=21, burn_in=50)
    assert r.cov[0, 0] == pytest.approx(gf.ula_limit(nu, 0.5).cov[0, 0], abs=0.03)


def test_coupling_identical_start_stays_zero():
    ens = Ensemble(np.random.default_rng(0).standard_normal((5, 1)))
    msd = synchronous_coupling_run("sla", STD1, ens, ens.copy(), 0.3, 10, seed=1)
    assert np.all(msd == 0.0)
    assert msd.shape == (11,)


def test_coupling_shape_mismatch():
    with pytest.raises(ValueError):
        synchronous_coupling_run("ula", STD1, Ensemble.constant([0.0], 3),
                                 Ensemble.constant([0.0], 4), 0.1, 1, seed=0)


def _coupling_factor(scheme, alpha, L, eps):
    c = 2 * eps * alpha * L / (alpha + L)
    return 1 - c if scheme == "ula" else (1 - c) / (1 + c)


@pytest.mark.parametrize("scheme", ["ula", "sla"])
@pytest.mark.parametrize("alpha,L", [(1.0, 1.0), (0.5, 2.0), (0.3, 1.0)])
@pytest.mark.parametrize("frac", [0.3, 1.0])
def test_coupling_ratio_bound_quadratic(scheme, alpha, L, frac):
    pot = GaussianPotential(GaussianMeasure(np.zeros(2), np.diag([1 / alpha, 1 / L])))
    eps = frac * 2 / (alpha + L)
    rng = np.random.default_rng(4)
    xa = rng.standard_normal((20, 2))
    msd, scale = synchronous_coupling_run(scheme, pot, Ensemble(xa), Ensemble(xa + 2.0), eps, 20,
                                          seed=8, return_scale=True)
    q = _coupling_factor(scheme, alpha, L, eps)
    assert coupling_worst_ratio(msd, rounding_allowance(scale)) <= q


@pytest.mark.parametrize("scheme", ["ula", "sla"])
def test_coupling_isotropic_equality(scheme):
    # on f = |x|^2 / (2 s) the coupled difference scales deterministically
    s = 2.0
    pot = GaussianPotential(GaussianMeasure(np.zeros(3), s * np.eye(3)))
    eps = 0.3
    ens = Ensemble(np.random.default_rng(1).standard_normal((4, 3)))
    msd = synchronous_coupling_run(scheme, pot, ens, Ensemble(ens.positions + 1.0), eps, 5, seed=2)
    h = 1 / s
    per = (1 - eps * h) ** 2 if scheme == "ula" else ((1 - eps * h) / (1 + eps * h)) ** 2
    assert np.allclose(msd[1:] / msd[:-1], per, rtol=1e-12)


def test_mixture_coupling_bound():
    target = MixtureTarget([0.5, 0.0])
    alpha, L = target.alpha, target.L
    eps = 2 / (alpha + L)
    rng = np.random.default_rng(6)
    xa = rng.standard_normal((30, 2))
    msd, scale = synchronous_coupling_run("ula", target, Ensemble(xa), Ensemble(xa + 1.5), eps, 200,
                                          seed=3, return_scale=True)
    q = _coupling_factor("ula", alpha, L, eps)
    assert coupling_worst_ratio(msd, rounding_allowance(scale)) <= q


def test_worst_ratio_rounding_allowance():
    assert coupling_worst_ratio(np.array([1.0, 0.25, 0.0625])) == 0.25
    assert coupling_worst_ratio(np.array([0.0, 1e-30]), rounding=1e-14) == 0.0
    assert coupling_worst_ratio(np.array([0.0, 1.0]), rounding=1e-14) == np.inf


@pytest.mark.parametrize("eps_frac", [0.01, 0.1, 0.5, 0.99])
@pytest.mark.parametrize("scheme", ["ula", "sla"])
def test_gaussian_bias_upper_bound(eps_frac, scheme, rng):
    cov = np.diag([0.5, 1.0, 3.0])
    nu = GaussianMeasure(np.zeros(3), cov)
    alpha, L = 1 / 3.0, 2.0
    eps = eps_frac * 2 / (alpha + L)
    bias = gaussian_w2(gf.stationary_measure(scheme, nu, eps), nu)
    assert bias <= (eps / alpha) * (11 / 5) * np.sqrt(L ** 3 * 3)
