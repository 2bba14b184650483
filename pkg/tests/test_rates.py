import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mtginf.errors import DomainError, InvalidParameter
from mtginf.rates import (ExponentialGrowth, PolynomialGrowth, make_constant, make_exponential,
                          make_highlow, make_linear, make_polynomial, make_sinusoidal,
                          rate_from_config, validate_assumptions)

BUILTINS = [
    make_constant(10.0),
    make_constant(2.0, a=0.5),
    make_polynomial(10.0, 1.0),
    make_polynomial(3.0, 0.5),
    make_sinusoidal(1.0, 1.0, "sin"),
    make_sinusoidal(10.0, 1.0, "cos"),
    make_exponential(1.0, 1.0),
    make_highlow(1.0, 0.0),
    make_highlow(4.0, 2.0),
]


def quad_laplace(rate, z, upper):
    """int_0^upper e^{-zt} lambda(t) dt with oscillatory-weight quadrature per piece."""
    z = complex(z)
    edges = sorted(set([0.0, upper] + list(rate.breakpoints(0.0, upper)) + list(np.arange(0, upper, 2.0))))
    f = lambda t: math.exp(-z.real * t) * rate.eval(t)
    re = im = 0.0
    for a, b in zip(edges, edges[1:]):
        if z.imag == 0:
            re += integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12)[0]
            continue
        re += integrate.quad(f, a, b, weight="cos", wvar=z.imag, epsabs=1e-13)[0]
        im -= integrate.quad(f, a, b, weight="sin", wvar=z.imag, epsabs=1e-13)[0]
    return complex(re, im)


def test_constant_transform_values():
    r = make_constant(10.0)
    assert r.laplace(1 + 0j) == pytest.approx(10.0)
    assert abs(r.laplace(1 + 1j)) == pytest.approx(10 / math.sqrt(2), rel=1e-12)
    assert make_constant(1.0).eval(-1.0) == 0.0


def test_constant_transform_matches_quadrature():
    r = make_constant(10.0)
    assert abs(r.laplace(1 + 1j)) == pytest.approx(abs(quad_laplace(r, 1 + 1j, 60)), rel=1e-8)


def test_polynomial_values_and_metadata():
    r = make_polynomial(10.0, 1.0)
    assert r.laplace(2 + 0j) == pytest.approx(2.5)
    assert r.gamma == 2 and r.k0 == 1
    assert r.laplace(2 + 0j) == pytest.approx(quad_laplace(r, 2.0, 60).real, rel=1e-8)
    assert make_linear(10.0) == r


def test_polynomial_degree_zero_matches_constant():
    p, c = make_polynomial(1.0, 0.0), make_constant(1.0)
    ts = np.linspace(-1, 5, 13)
    assert np.array_equal(p.eval(ts), c.eval(ts))
    zs = np.array([0.3 + 2j, 1.0, 4 - 7j])
    assert np.allclose(p.laplace(zs), c.laplace(zs), rtol=1e-14)


def test_sinusoidal_values():
    s = make_sinusoidal(1.0, 1.0, "sin")
    assert s.laplace(1 + 0j) == pytest.approx(1.5)
    assert s.laplace(1 + 0j) == pytest.approx(quad_laplace(s, 1.0, 200).real, rel=1e-8)
    assert abs(s.laplace(1 + 1j)) >= 1 / math.sqrt(2)
    assert make_sinusoidal(10.0, 1.0, "cos").eval(math.pi) == pytest.approx(0.0, abs=1e-12)


def test_exponential_values():
    e = make_exponential(1.0, 1.0)
    assert e.laplace(2 + 0j) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        e.laplace(0.5 + 0j)
    assert make_exponential(2.0, 0.5).eval(2.0) == pytest.approx(2 * math.e)
    assert isinstance(e.growth, ExponentialGrowth) and e.sigma_lambda == 1.0


def test_highlow_values():
    hl = make_highlow(1.0, 0.0)
    assert hl.laplace(1 + 0j) == pytest.approx(1 / (1 + math.exp(-1)))
    # geometric series of the unit blocks
    series = sum(math.exp(-2 * j) * (1 - math.exp(-1)) for j in range(60))
    assert hl.laplace(1 + 0j) == pytest.approx(series, rel=1e-12)
    assert hl.eval(1.5) == 0.0 and hl.eval(0.5) == 1.0 and hl.eval(1.0) == 1.0
    flat = make_highlow(1.0, 1.0)
    assert np.all(flat.eval(np.linspace(0.01, 9.99, 101)) == 1.0)


@pytest.mark.parametrize("factory, args", [
    (make_constant, (0.0,)), (make_constant, (-1.0,)), (make_constant, (1.0, -0.5)),
    (make_polynomial, (1.0, -1.0)), (make_sinusoidal, (1.0, 0.0)), (make_sinusoidal, (1.0, 1.5)),
    (make_exponential, (1.0, 0.0)), (make_highlow, (1.0, -1.0)),
])
def test_invalid_parameters(factory, args):
    with pytest.raises(InvalidParameter):
        factory(*args)


def test_polynomial_growth_normalisation():
    with pytest.raises(InvalidParameter):
        PolynomialGrowth(p=1.0, a1=0.5, a2=0.5)


@pytest.mark.parametrize("rate", BUILTINS, ids=lambda r: f"{r.kind}{r.params()}")
def test_builtins_pass_assumption_checks(rate):
    report = validate_assumptions(rate)
    assert report.ok, report.summary()


def test_corrupted_k0_is_reported():
    bad = dataclasses.replace(make_constant(10.0), k0=100.0)
    report = validate_assumptions(bad)
    assert not report.ok
    assert all(v.check == "transform" and v.margin < 0 for v in report.violations)


def test_highlow_with_zeros_flagged():
    report = validate_assumptions(make_highlow(1.0, 3.0))
    assert any(v.check == "zeros" for v in report.violations)


def test_config_roundtrip():
    for r in BUILTINS:
        assert rate_from_config(r.to_config()) == r
    with pytest.raises(InvalidParameter):
        rate_from_config({"kind": "bogus"})
    with pytest.raises(InvalidParameter):
        rate_from_config({"kind": "constant", "params": {}})


@settings(max_examples=40, deadline=None)
@given(idx=st.integers(0, len(BUILTINS) - 1), ds=st.floats(0.1, 3.0), w=st.floats(-20, 20))
def test_transform_matches_quadrature(idx, ds, w):
    rate = BUILTINS[idx]
    z = complex(rate.sigma_lambda + ds, w)
    # tail of the growth bound below 1e-8 beyond upper
    upper = (math.log(rate.lambda0 / (ds * 1e-10)) + 10 * math.log1p(10)) / ds + 1
    upper = min(upper, 400.0)
    ref = quad_laplace(rate, z, upper)
    assert abs(rate.laplace(z) - ref) <= 1e-5 * (1 + abs(ref))


@settings(max_examples=60, deadline=None)
@given(idx=st.integers(0, len(BUILTINS) - 1), t=st.floats(-50, 50))
def test_eval_nonnegative_and_bounded(idx, t):
    rate = BUILTINS[idx]
    v = rate.eval(t)
    assert v >= 0
    if t < 0:
        assert v == 0
    else:
        assert v <= rate.growth_bound(t) * (1 + 1e-12)
        assert v <= rate.sup_bound(max(0.0, t - 1), t + 1) * (1 + 1e-12)
