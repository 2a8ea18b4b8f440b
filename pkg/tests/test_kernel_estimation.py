import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import ndtr

from tailbench.distributions import BurrDist, hall_params_of_burr, pdf_prime, sample, tail_prob
from tailbench.errors import DegenerateSampleError, DomainError, NoExceedanceError
from tailbench.kernel_estimation import (
    GAUSSIAN,
    Bandwidth,
    al_bandwidth,
    cap_bandwidth,
    kernel_cdf,
    kernel_density,
    kernel_mef,
    mef_bandwidth_plugin,
    mef_bandwidth_true,
    pointwise_bandwidth_plugin,
    pointwise_bandwidth_true,
)
from tailbench.tail_index import TailIndexEstimate


def test_gaussian_moment_constants():
    mu2, _ = integrate.quad(lambda z: z * z * GAUSSIAN.w(z), -np.inf, np.inf)
    psi, _ = integrate.quad(lambda z: z * GAUSSIAN.W(z) * GAUSSIAN.w(z), -np.inf, np.inf)
    assert GAUSSIAN.mu2 == pytest.approx(mu2, abs=1e-10)
    assert GAUSSIAN.psi == pytest.approx(psi, abs=1e-10)
    assert GAUSSIAN.psi == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)), abs=1e-14)


def test_kernel_cdf_symmetry_and_limits():
    assert kernel_cdf([1.0, 2.0, 3.0], 2.0, 0.7) == pytest.approx(0.5, abs=1e-14)
    assert kernel_cdf([1.0, 2.0, 3.0], 2.5, 1e-8) == pytest.approx(2.0 / 3.0, abs=1e-12)
    xs = np.linspace(0, 1, 20)
    h = 0.05
    assert kernel_cdf(xs, xs.max() + 41 * h, h) == pytest.approx(1.0, abs=1e-12)
    assert kernel_cdf(xs, xs.min() - 41 * h, h) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), h=st.floats(0.01, 2.0))
def test_kernel_cdf_monotone_global_h(seed, h):
    xs = np.random.default_rng(seed).normal(size=50)
    grid = np.linspace(xs.min() - 1, xs.max() + 1, 200)
    vals = [kernel_cdf(xs, g, h) for g in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_kernel_density_values():
    assert kernel_density([2.0], 2.0, 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)
    a = 0.8
    assert kernel_density([-a, a], 0.0, 0.5) == pytest.approx((1 / 0.5) * GAUSSIAN.w(a / 0.5), abs=1e-12)


def test_kernel_density_integrates_to_one():
    xs = np.random.default_rng(3).normal(size=200)
    grid = np.linspace(-8, 8, 2001)
    dens = [kernel_density(xs, g, 0.3) for g in grid]
    assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)


def test_pointwise_bandwidth_hand_value():
    hp = hall_params_of_burr(BurrDist(1, 1))
    bw = pointwise_bandwidth_true(hp, 1000, 1.0)
    expected = 1000 ** (-1 / 3) * (0.5 * GAUSSIAN.psi) ** (1 / 3)
    assert bw.h == pytest.approx(expected, rel=1e-12)
    assert bw.h == pytest.approx(0.05206, abs=1e-5)
    assert bw.method == "PointwiseTrue"
    assert bw.valid


def test_pointwise_bandwidth_scaling_law():
    hp = hall_params_of_burr(BurrDist(2, 1))  # alpha = 2
    h1 = pointwise_bandwidth_true(hp, 10 ** 6, 1.5).h
    h2 = pointwise_bandwidth_true(hp, 10 ** 6, 3.0).h
    assert h2 / h1 == pytest.approx(2.0 ** ((hp.alpha + 3.0) / 3.0), rel=1e-12)


def test_pointwise_bandwidth_validity_flag():
    hp = hall_params_of_burr(BurrDist(1, 1))
    assert not pointwise_bandwidth_true(hp, 100, 10.0).valid  # x^4/n = 100


def test_pointwise_plugin_matches_true_and_x_law():
    hp = hall_params_of_burr(BurrDist(1, 2))
    est = TailIndexEstimate(alpha_hat=hp.alpha, A_hat=hp.A, r=10, n=100)
    for x in (0.5, 1.0, 4.0):
        assert pointwise_bandwidth_plugin(est, 1000, x).h == pytest.approx(
            pointwise_bandwidth_true(hp, 1000, x).h, rel=1e-14)
    h1 = pointwise_bandwidth_plugin(est, 1000, 1.0).h
    h2 = pointwise_bandwidth_plugin(est, 1000, 2.5).h
    assert h2 / h1 == pytest.approx(2.5 ** ((est.alpha_hat + 3.0) / 3.0), rel=1e-12)


def test_al_bandwidth_normal_reference():
    # analytic int (f')^2 for the standard normal is 1/(4 sqrt(pi))
    n = 10 ** 4
    analytic = n ** (-1 / 3) * (GAUSSIAN.psi / (1.0 / (4.0 * math.sqrt(math.pi)))) ** (1 / 3)
    ratios = []
    for seed in range(20):
        xs = np.random.default_rng(seed).normal(size=n)
        ratios.append(al_bandwidth(xs).h / analytic)
    assert all(0.7 < r < 1.4 for r in ratios)


def test_al_bandwidth_affine_behavior():
    xs = np.random.default_rng(12).normal(size=2000)
    h0 = al_bandwidth(xs).h
    assert al_bandwidth(xs + 57.0).h == pytest.approx(h0, abs=1e-12)
    s = 3.7
    assert al_bandwidth(s * xs).h == pytest.approx(s * h0, rel=0.02)


def test_al_bandwidth_degenerate():
    with pytest.raises(DegenerateSampleError):
        al_bandwidth(np.ones(50))
    with pytest.raises(DomainError):
        al_bandwidth(np.arange(5.0))


def test_mef_bandwidth_hand_value_and_scaling():
    hp = hall_params_of_burr(BurrDist(1, 1))
    bw = mef_bandwidth_true(hp, 1000, 1.0)
    assert bw.h == pytest.approx(1000 ** (-1 / 3) * (GAUSSIAN.psi / 2.0) ** (1 / 3), rel=1e-12)
    assert bw.h == pytest.approx(0.05206, abs=1e-5)
    h2 = mef_bandwidth_true(hp, 1000, 2.0)
    assert h2.h / bw.h == pytest.approx(2.0 ** (1.0 + hp.alpha / 3.0), rel=1e-12)
    est = TailIndexEstimate(alpha_hat=hp.alpha, A_hat=hp.A, r=9, n=81)
    assert mef_bandwidth_plugin(est, 1000, 1.0).h == pytest.approx(bw.h, rel=1e-14)
    with pytest.raises(DomainError):
        mef_bandwidth_true(hp, 1000, 0.0)


def test_kernel_mef_hand_example():
    val = kernel_mef([5.0], 5.0, 1.0)
    assert val == pytest.approx(2.0 / math.sqrt(2.0 * math.pi), rel=1e-12)


def test_kernel_mef_small_h_is_excess_mean():
    assert kernel_mef([6.0, 8.0], 5.0, 1e-8) == pytest.approx(2.0, abs=1e-7)


def test_kernel_mef_requires_gaussian():
    from dataclasses import replace
    boxy = replace(GAUSSIAN, name="boxcar")
    with pytest.raises(DomainError):
        kernel_mef([1.0, 2.0], 0.5, 0.1, k=boxy)


def test_kernel_mef_no_exceedance():
    with pytest.raises(NoExceedanceError):
        kernel_mef(np.zeros(20) + 1.0, 50.0, 0.01)


def _mef_by_quadrature(xs, u, h):
    def integrand(x):
        return x * kernel_density(xs, x + u, h)

    denom = 1.0 - kernel_cdf(xs, u, h)
    val, _ = integrate.quad(integrand, 0, np.inf, limit=400)
    return val / denom


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kernel_mef_closed_form_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    xs = rng.exponential(size=50)
    u = float(np.quantile(xs, 0.6))
    h = 0.25
    assert kernel_mef(xs, u, h) == pytest.approx(_mef_by_quadrature(xs, u, h), abs=1e-6)


def test_cap_bandwidth():
    bw = Bandwidth(h=1e9, method="PointwisePlugin")
    capped = cap_bandwidth(bw, [0.0, 2.0, 5.0])
    assert capped.h == 5.0 and capped.capped
    ok = Bandwidth(h=0.5, method="GlobalAL")
    assert cap_bandwidth(ok, [0.0, 2.0, 5.0]) == ok


def test_mse_law_against_monte_carlo():
    # empirical MSE of the kernel CDF at the tuned bandwidth stays within a
    # factor two of the predicted bias^2 + tail/n
    d = BurrDist(3, 1)
    hp = hall_params_of_burr(d)
    n, x = 2 ** 16, 2.0
    h = pointwise_bandwidth_true(hp, n, x).h
    truth = 1.0 - tail_prob(d, x)
    reps, chunk = 2000, 200
    errs = np.empty(reps)
    for lo in range(0, reps, chunk):
        m = min(chunk, reps - lo)
        block = np.vstack([sample(d, n, seed=7000 + lo + j) for j in range(m)])
        fhat = ndtr((x - block) / h).mean(axis=1)
        errs[lo:lo + m] = (fhat - truth) ** 2
    empirical = errs.mean()
    predicted = (h ** 2 * pdf_prime(d, x) * GAUSSIAN.mu2 / 2.0) ** 2 + tail_prob(d, x) / n
    assert 0.5 < empirical / predicted < 2.0
