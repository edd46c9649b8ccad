import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgmgt.errors import DomainError, SamplerError
from sgmgt.kinetics import (
    KineticSpec,
    propose_stiff,
    sample_momentum,
    sample_thermostat,
    soft_energy,
    soft_elementwise,
    soft_grad,
    soft_hess_diag,
    stiff_energy,
    A2_GRAD_BOUND,
)
from oracles import central_difference, quadrature_cdf, softened_kinetic_reference

from sgmgt.diagnostics import ks_statistic

SOFT = [(a, c) for a in (1, 2) for c in (1, 5, 20)]
momenta = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize("p, a, expected", [([0.0], 1, 0.0), ([0.0], 2, 0.0), ([2.0], 1, 2.0), ([4.0], 2, 2.0), ([3.0], 0.5, 4.5)])
def test_stiff_energy(p, a, expected):
    assert stiff_energy(p, KineticSpec(a)) == pytest.approx(expected)


def test_soft_energy_examples():
    assert soft_energy([0.0], KineticSpec(1, 1)) == pytest.approx(2 * math.log(2))
    assert soft_energy([0.0], KineticSpec(2, 2)) == pytest.approx(1.0)
    assert abs(soft_energy([10.0], KineticSpec(1, 20)) - 10.0) < 1e-4
    assert soft_energy([3.0], KineticSpec("1/2")) == pytest.approx(4.5)


def test_soft_energy_matches_reference_formula():
    p = np.linspace(-30, 30, 601)
    for a, c in SOFT:
        spec = KineticSpec(a, c)
        ours = np.array([soft_energy([x], spec) for x in p])
        np.testing.assert_allclose(ours, softened_kinetic_reference(p, a, c), rtol=1e-12, atol=1e-12)


def test_soft_energy_no_overflow():
    # naive log(1 + exp(cp)) overflows for cp > 709
    assert soft_energy([100.0], KineticSpec(1, 20)) == pytest.approx(100.0)
    assert soft_energy([-100.0], KineticSpec(1, 20)) == pytest.approx(100.0)


def test_soft_grad_examples():
    assert soft_grad([0.0], KineticSpec(1, 3))[0] == 0.0
    assert soft_grad([1.0], KineticSpec(1, 10))[0] == pytest.approx(math.tanh(5), rel=1e-12)
    assert soft_grad([4.0], KineticSpec(2, 5))[0] == pytest.approx(math.tanh(5) ** 2 / 4, rel=1e-12)


def test_soft_grad_finite_difference_examples():
    for p, a, c in [(1.0, 1, 10), (4.0, 2, 5)]:
        spec = KineticSpec(a, c)
        fd = central_difference(lambda x: softened_kinetic_reference(x, a, c), p)
        assert soft_grad([p], spec)[0] == pytest.approx(float(fd), rel=1e-6)


def test_soft_hess_examples():
    assert soft_hess_diag([0.0], KineticSpec(1, 2))[0] == pytest.approx(1.0)
    assert soft_hess_diag([0.0], KineticSpec(0.5))[0] == 1.0
    spec = KineticSpec(2, 1)
    fd = central_difference(lambda x: soft_grad([x], spec)[0], 9.0)
    assert soft_hess_diag([9.0], spec)[0] == pytest.approx(float(fd), rel=1e-5)


def test_a2_near_origin_is_finite_and_continuous():
    spec = KineticSpec(2, 5)
    tiny = np.array([0.0, 1e-14, 1e-13, 1e-12, 1e-11, -1e-12])
    g = soft_grad(tiny, spec)
    assert np.all(np.isfinite(g))
    # both sides of the Taylor switch agree with the leading series term
    s = np.sqrt(np.abs(tiny))
    np.testing.assert_allclose(g, 25 / 8 * np.sign(tiny) * s, rtol=1e-6, atol=1e-20)
    hess = soft_hess_diag(tiny, spec)
    assert np.all(np.isfinite(hess)) and np.ptp(hess) == 0.0


@pytest.mark.parametrize("a, c", SOFT)
def test_gradient_consistency(a, c):
    rng = np.random.default_rng(7)
    p = rng.uniform(-20, 20, 500)
    if a == 2:
        p = p[np.abs(p) >= 1e-2]
    spec = KineticSpec(a, c)
    fd = central_difference(lambda x: softened_kinetic_reference(x, a, c), p)
    np.testing.assert_allclose(soft_grad(p, spec), fd, rtol=1e-5, atol=1e-9)
    fd2 = central_difference(lambda x: soft_grad(x, spec), p)
    np.testing.assert_allclose(soft_hess_diag(p, spec), fd2, rtol=1e-5, atol=1e-9)


@pytest.mark.parametrize("a", [1, 2])
def test_dominance_on_dense_grid(a):
    p = np.linspace(-50, 50, 20001)
    for c in (0.1, 1, 5, 20, 100):
        spec = KineticSpec(a, c)
        stiff = np.abs(p) ** (1.0 / a)
        assert np.all(soft_elementwise(p, spec) >= stiff)
        ref = softened_kinetic_reference(p, a, c)
        assert np.all(ref - stiff >= -1e-12 * np.maximum(1.0, stiff))


@pytest.mark.parametrize("a", [1, 2])
def test_asymptotic_agreement_monotone_in_c(a):
    p = np.concatenate([np.linspace(-40, -1, 200), np.linspace(1, 40, 200)])
    gaps = []
    for c in (1, 5, 20, 100):
        spec = KineticSpec(a, c)
        gaps.append(np.array([soft_energy([x], spec) - stiff_energy([x], spec) for x in p]))
    for lo, hi in zip(gaps, gaps[1:]):
        assert np.all(hi <= lo)


@settings(max_examples=200, deadline=None)
@given(p=momenta, a=st.sampled_from([0.5, 1, 2]), c=st.floats(0.1, 100))
def test_symmetry(p, a, c):
    spec = KineticSpec(a, c)
    assert soft_energy([p], spec) == pytest.approx(soft_energy([-p], spec), rel=1e-12, abs=1e-12)
    assert soft_grad([p], spec)[0] == pytest.approx(-soft_grad([-p], spec)[0], rel=1e-12, abs=1e-15)
    assert soft_hess_diag([p], spec)[0] == pytest.approx(soft_hess_diag([-p], spec)[0], rel=1e-12, abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(p=st.floats(-1e6, 1e6, allow_nan=False), c=st.floats(0.01, 1000))
def test_gradient_bounded_a1(p, c):
    assert abs(soft_grad([p], KineticSpec(1, c))[0]) <= 1.0


@settings(max_examples=300, deadline=None)
@given(p=st.floats(-1e6, 1e6, allow_nan=False), c=st.floats(0.01, 1000))
def test_gradient_bounded_a2(p, c):
    g = abs(soft_grad([p], KineticSpec(2, c))[0])
    assert g <= A2_GRAD_BOUND * c * (1 + 1e-9) + 1e-300
    if c <= 6.8:
        assert g <= 1.0


def test_a2_gradient_bound_is_attained():
    c = 20.0
    p = np.linspace(1e-4, 2, 200001)
    g = soft_grad(p, KineticSpec(2, c))
    assert g.max() == pytest.approx(A2_GRAD_BOUND * c, rel=1e-6)
    assert g.max() > 1.0


@pytest.mark.parametrize("fn", [stiff_energy, soft_energy, soft_grad, soft_hess_diag])
def test_non_finite_input_rejected(fn):
    with pytest.raises(DomainError):
        fn([0.0, np.nan], KineticSpec(1, 5))
    with pytest.raises(DomainError):
        fn([np.inf], KineticSpec(2, 5))


@pytest.mark.parametrize("a, c", [(3, 5), (1.5, 5), (1, 0), (1, -2), (2, np.inf)])
def test_invalid_spec(a, c):
    with pytest.raises(ValueError):
        KineticSpec(a, c)


def test_unsupported_monomial_message():
    with pytest.raises(ValueError, match="unsupported monomial parameter"):
        KineticSpec(3)


def test_stiff_proposal_laplace_moments():
    x = propose_stiff(1.0, 1_000_000, np.random.default_rng(0))
    assert np.mean(np.abs(x)) == pytest.approx(1.0, rel=0.02)
    assert np.mean(x**2) == pytest.approx(2.0, rel=0.02)


def test_stiff_proposal_a2_moment():
    x = propose_stiff(2.0, 1_000_000, np.random.default_rng(1))
    assert np.mean(np.abs(x)) == pytest.approx(6.0, rel=0.03)


@pytest.mark.parametrize("a, c", [(1, 5), (2, 1)])
def test_sample_momentum_against_quadrature(a, c):
    draw = sample_momentum(KineticSpec(a, c), 100_000, np.random.default_rng(3))
    assert np.all(np.isfinite(draw.value))
    assert draw.rejections > 0
    assert ks_statistic(draw.value, quadrature_cdf(a, c)) <= 0.01


def test_sample_momentum_quadratic_is_standard_normal():
    draw = sample_momentum(KineticSpec(0.5), 10, np.random.default_rng(0))
    np.testing.assert_array_equal(draw.value, np.random.default_rng(0).standard_normal(10))
    assert draw.rejections == 0


def test_sample_momentum_retry_cap():
    # a cap of zero retries cannot survive a realistic rejection rate at c = 0.05
    with pytest.raises(SamplerError, match="softening"):
        sample_momentum(KineticSpec(2, 0.05), 1000, np.random.default_rng(0), max_retries=0)


def test_sample_momentum_deterministic():
    spec = KineticSpec(2, 5)
    a = sample_momentum(spec, 50, np.random.default_rng(11)).value
    b = sample_momentum(spec, 50, np.random.default_rng(11)).value
    np.testing.assert_array_equal(a, b)


def test_sample_thermostat():
    x = sample_thermostat(3, np.random.default_rng(0))
    assert x.shape == (3,) and np.all(np.isfinite(x))
    np.testing.assert_array_equal(x, sample_thermostat(3, np.random.default_rng(0)))
    big = sample_thermostat(1_000_000, np.random.default_rng(1))
    assert abs(big.mean()) < 0.005
    assert big.var() == pytest.approx(1.0, rel=0.01)
