import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from mitograph import (DegenerateKernel, InvalidKernel, ModelParams, NegativeDiffusion, NonpositiveRate,
                       SplitKernel, SubcriticalOrCritical, kernel_moment, validate_params)
from mitograph.kernels import kernel_moments, log_inverse_mean


def test_validate_returns_delta_gamma():
    d = validate_params(ModelParams(beta=2.0, mu=0.5))
    assert d.delta == 1.5 and d.gamma == 0.25


@pytest.mark.parametrize("kw, exc", [
    ({"beta": 1.0, "mu": 1.0}, SubcriticalOrCritical),
    ({"beta": 0.5, "mu": 1.0}, SubcriticalOrCritical),
    ({"beta": 0.0}, NonpositiveRate),
    ({"v": 0.0}, NonpositiveRate),
    ({"mu": -0.1}, NonpositiveRate),
    ({"kappa": -1.0}, NegativeDiffusion),
])
def test_validate_rejects(kw, exc):
    with pytest.raises(exc):
        validate_params(ModelParams(**kw))


def test_kernel_rejects_asymmetric_and_unnormalised():
    with pytest.raises(InvalidKernel):
        SplitKernel("tabulated", a=0.0, values=np.array([1.0, 2.0, 0.0]))
    with pytest.raises(InvalidKernel):
        SplitKernel("tabulated", a=0.0, values=np.array([2.0, 2.0]))
    with pytest.raises(InvalidKernel):
        SplitKernel.uniform(0.6)
    with pytest.raises(InvalidKernel):
        SplitKernel.from_spec({"kind": "uniform", "b": 1})


def test_from_spec_round_trip():
    for q in (SplitKernel.atomic_half(), SplitKernel.uniform(0.25), SplitKernel.beta(3.0, 0.1),
              SplitKernel.tabulated([1.0, 3.0, 1.0], 0.2)):
        q2 = SplitKernel.from_spec(q.to_spec())
        assert q2.kind == q.kind and q2.a == q.a
        for k in range(1, 5):
            assert kernel_moment(q2, k) == pytest.approx(kernel_moment(q, k), rel=1e-14)


def _numeric_moment(q, k):
    # independent oracle: adaptive integration of the density
    return integrate.quad(lambda x: x ** k * q.density(x), q.a, 1 - q.a, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


@pytest.mark.parametrize("q", [SplitKernel.uniform(0.25), SplitKernel.uniform(0.0), SplitKernel.beta(2.5, 0.1),
                               SplitKernel.tabulated([1.0, 2.0, 4.0, 2.0, 1.0], 0.1)])
def test_kernel_moments_match_integration(q):
    for k in range(0, 7):
        assert kernel_moment(q, k) == pytest.approx(_numeric_moment(q, k), rel=1e-10, abs=1e-14)
    assert kernel_moment(q, 1) == pytest.approx(0.5, abs=1e-12)


def test_uniform_quarter_second_moment():
    # E theta^2 on [1/4, 3/4]: (27/64 - 1/64) / (3 * 1/2) = 13/48
    assert kernel_moment(SplitKernel.uniform(0.25), 2) == pytest.approx(13 / 48, rel=1e-14)


def test_atomic_moments_and_log_mean():
    q = SplitKernel.atomic_half()
    assert [kernel_moment(q, k) for k in range(4)] == [1.0, 0.5, 0.25, 0.125]
    assert log_inverse_mean(q) == pytest.approx(math.log(2))
    km = kernel_moments(q, 3)
    assert km.log_inv_mean == pytest.approx(math.log(2))


def test_quadrature_integrates_density():
    for q in (SplitKernel.uniform(0.25), SplitKernel.beta(0.7, 0.0), SplitKernel.tabulated([1, 5, 1], 0.0)):
        nodes, w = q.quadrature(32)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all((nodes >= q.a) & (nodes <= 1 - q.a))


@pytest.mark.parametrize("q", [SplitKernel.uniform(0.25), SplitKernel.beta(2.0, 0.0),
                               SplitKernel.tabulated([0.5, 2.0, 3.0, 2.0, 0.5], 0.05)])
def test_sampler_matches_moments(q):
    x = q.sample(np.random.default_rng(3), 400_000)
    assert np.all((x >= q.a) & (x <= 1 - q.a))
    for k in (1, 2, 3):
        se = np.std(x ** k) / math.sqrt(x.size)
        assert abs(np.mean(x ** k) - kernel_moment(q, k)) < 4 * se


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.49), st.integers(1, 8))
def test_uniform_moment_property(a, k):
    q = SplitKernel.uniform(a)
    # symmetric kernel: E theta = 1/2 and E theta^k decreasing in k
    assert kernel_moment(q, 1) == pytest.approx(0.5)
    assert kernel_moment(q, k + 1) <= kernel_moment(q, k) + 1e-15


def test_alpha_rejects_gapless_kernel():
    from mitograph import estimate_alpha
    with pytest.raises(DegenerateKernel):
        estimate_alpha(SplitKernel.uniform(0.0), 100)
