"""Acceptance gate: nine end-to-end criteria at their stated tolerances."""
import math

import numpy as np
import pytest
from scipy import integrate

from mtginf import oracle
from mtginf.experiment import preset, rmse_vs_n, run
from mtginf.kernels import make_J, make_L
from mtginf.rates import (make_constant, make_exponential, make_highlow, make_linear,
                          make_polynomial, make_sinusoidal)
from mtginf.service import make_exponential_service, make_uniform_service
from mtginf.sim import simulate_counts

pytestmark = pytest.mark.slow
S2PI = math.sqrt(2 * math.pi)
THREADS = 4


def _g1(summary):
    return next(t for t in summary.targets if t.target == "G(1)")


def test_c1_sinusoidal_distribution(report):
    _, summary = run(preset("case1a"), threads=THREADS)
    t = _g1(summary)
    mean, sd = 1 - t.mean, t.sd
    ok = 0.34 <= mean <= 0.39 and 0.01 <= sd <= 0.05
    report(1, "Case 1a 1-G(1)", ok, f"mean={mean:.4f} in [0.34,0.39], sd={sd:.4f} in [0.01,0.05]")
    assert ok


def test_c2_linear_distribution(report):
    _, summary = run(preset("case1b"), threads=THREADS)
    t = _g1(summary)
    mean, sd = 1 - t.mean, t.sd
    ok = 0.25 <= mean <= 0.50 and sd <= 0.6
    report(2, "Case 1b 1-G(1)", ok, f"mean={mean:.4f} in [0.25,0.50], sd={sd:.4f} <= 0.6")
    assert ok


def test_c3_sinusoidal_mean(report):
    _, summary = run(preset("case2a", replications=2000), threads=THREADS)
    t = summary.targets[0]
    ok = 0.93 <= t.mean <= 1.13 and 0.55 <= t.sd <= 0.95
    report(3, "Case 2a mu over 2000 runs", ok, f"mean={t.mean:.4f} in [0.93,1.13], sd={t.sd:.4f} in [0.55,0.95]")
    assert ok


def test_c4_highlow_mean(report):
    _, summary = run(preset("case2b"), threads=THREADS)
    t = summary.targets[0]
    ok = t.n_reps == 10_000 and 0.97 <= t.mean <= 1.03 and 0.85 <= t.sd <= 1.15
    report(4, "Case 2b mu over 1e4 runs", ok, f"mean={t.mean:.4f} in [0.97,1.03], sd={t.sd:.4f} in [0.85,1.15]")
    assert ok


MOMENT_CASES = [
    ("const10/exp1", make_constant(10.0), make_exponential_service(1.0)),
    ("cos10/exp1", make_sinusoidal(10.0, 1.0, "cos"), make_exponential_service(1.0)),
]
TIME_PAIRS = [(0.5, 1.0), (1.0, 2.5), (2.0, 2.2)]


def test_c5_first_two_moments(report):
    worst_mean = worst_cov = 0.0
    rng = np.random.default_rng(505)
    for _, rate, service in MOMENT_CASES:
        ctx = oracle.TheoryContext(rate, service)
        for t1, t2 in TIME_PAIRS:
            X = simulate_counts(rate, service, [t1, t2], 100_000, rng).astype(float)
            n = len(X)
            for j, t in enumerate((t1, t2)):
                z = abs(X[:, j].mean() - oracle.H(ctx, t)) / (X[:, j].std(ddof=1) / math.sqrt(n))
                worst_mean = max(worst_mean, z)
            prod = (X[:, 0] - X[:, 0].mean()) * (X[:, 1] - X[:, 1].mean())
            z = abs(prod.mean() * n / (n - 1) - oracle.cov(ctx, t1, t2)) / (prod.std(ddof=1) / math.sqrt(n))
            worst_cov = max(worst_cov, z)
    ok = worst_mean <= 4 and worst_cov <= 5
    report(5, "mean and covariance vs theory", ok, f"max |z| mean={worst_mean:.2f} <= 4, cov={worst_cov:.2f} <= 5")
    assert ok


def _bootstrap_log_mgf_se(X, theta, rng, B=200):
    # resampling the distinct (x1, x2) cells with multinomial weights is the ordinary bootstrap
    cells, counts = np.unique(X, axis=0, return_counts=True)
    w = np.exp(cells @ theta)
    boots = rng.multinomial(len(X), counts / len(X), size=B) @ w / len(X)
    return np.log(boots).std(ddof=1)


def test_c6_two_point_mgf(report):
    cases = [
        ("const5/exp1", make_constant(5.0), make_exponential_service(1.0)),
        ("highlow4/unif02", make_highlow(4.0, 0.0), make_uniform_service(0.0, 2.0)),
    ]
    thetas = [np.array([0.3, 0.2]), np.array([-0.5, 0.4])]
    rng = np.random.default_rng(606)
    worst = 0.0
    for _, rate, service in cases:
        ctx = oracle.TheoryContext(rate, service)
        X = simulate_counts(rate, service, [1.0, 2.0], 1_000_000, rng)
        for th in thetas:
            emp = math.log(np.mean(np.exp(X @ th)))
            se = _bootstrap_log_mgf_se(X, th, rng)
            worst = max(worst, abs(emp - oracle.joint_log_mgf(ctx, [1.0, 2.0], th)) / se)
    ok = worst <= 4
    report(6, "two-point log-MGF vs theory", ok, f"max |error|/bootstrap SE={worst:.2f} <= 4")
    assert ok


def test_c7_inversion_accuracy(report):
    ts = np.linspace(-5, 5, 401)
    sup = fd = 0.0
    for rate in (make_constant(1.0), make_highlow(1.0, 0.0), make_linear(1.0)):
        for h in (0.25, 0.5, 1.0):
            L = make_L(rate, h)
            sup = max(sup, float(np.max(np.abs(L.invert(ts) - L.eval(ts)))))
            step = 1e-4
            F = L.antiderivative
            d = (-F(ts + 2 * step) + 8 * F(ts + step) - 8 * F(ts - step) + F(ts - 2 * step)) / (12 * step)
            fd = max(fd, float(np.max(np.abs(d - L.eval(ts)))))
    ok = sup <= 1e-3 and fd <= 1e-6
    report(7, "numeric inversion vs closed forms", ok, f"sup error={sup:.2e} <= 1e-3, antiderivative FD={fd:.2e} <= 1e-6")
    assert ok


def test_c8_deconvolution_identity(report):
    rates = [make_constant(1.0), make_highlow(1.0, 0.0), make_linear(1.0),
             make_sinusoidal(10.0, 1.0, "cos"), make_exponential(1.0, 1.0), make_polynomial(3.0, 0.5)]
    h, x0 = 0.3, 1.5
    worst = 0.0
    for rate in rates:
        L = make_L(rate, h, table_range=(-10, 10))
        hi = x0 + L.support[1]
        for x in (0.5, 1.2, 1.5, 1.9, 2.6):
            pts = [p for p in [x0] + [x + b for b in rate.breakpoints(0.0, hi - x)] if x < p < hi]
            lhs, _ = integrate.quad(lambda t: L.eval(t - x0) * rate.eval(t - x), x, hi,
                                    points=sorted(set(pts))[:200] or None, limit=1000, epsabs=1e-7, epsrel=1e-7)
            target = math.exp(-0.5 * ((x - x0) / h) ** 2) / (S2PI * h)
            worst = max(worst, abs(lhs - target))
    ok = worst <= 1e-3
    report(8, "deconvolution identity", ok, f"max error={worst:.2e} <= 1e-3")
    assert ok


def test_c9_rmse_decreases(report):
    spec = preset("case1a", estimator={"target": "G", "x0": [1.0],
                                       "adaptive": {"h_min": 0.025, "alpha": 0.25}})
    curve = rmse_vs_n(spec, [25, 50, 100, 200], replications=50, threads=THREADS)
    rmse = [r["G(1)"] for _, r in curve]
    inversions = sum(b > a for a, b in zip(rmse, rmse[1:]))
    ok = inversions <= 1 and rmse[-1] < rmse[0]
    report(9, "Case 1a RMSE of G(1) over n=25..200", ok,
           "rmse=" + ", ".join(f"{v:.4f}" for v in rmse) + f"; inversions={inversions} <= 1")
    assert ok
