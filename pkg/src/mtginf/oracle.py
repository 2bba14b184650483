"""Closed-form and quadrature oracles for the M_t/G/infinity queue.

H(t) = E X(t) is the convolution of the survival function with the
arrival rate; X(t) is Poisson(H(t)), cov[X(t1), X(t2)] = H_{t2-t1, inf}(t2)
and the joint log-MGF of (X(t_1), ..., X(t_m)) is an explicit combination
of the partial convolutions H_{a,b}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import InvalidParameter, NumericFailure
from .rates import RateModel
from .service import ServiceModel


@dataclass(frozen=True)
class TheoryContext:
    rate: RateModel
    service: ServiceModel
    tol: float = 1e-8

    def partial_H(self, t: float, a: float = 0.0, b: float = math.inf) -> float:
        """H_{a,b}(t) = int_a^b survival(u) rate(t - u) du."""
        hi = min(b, t, self.service.tail_end())
        lo = max(a, 0.0)
        if hi <= lo:
            return 0.0
        pts = [p for p in self._breaks(t) if lo < p < hi]
        val, _ = integrate.quad(
            lambda u: self.service.survival(u) * self.rate.eval(t - u), lo, hi,
            points=pts or None, limit=max(200, 4 * len(pts)),
            epsabs=self.tol * 1e-2, epsrel=self.tol,
        )
        if not math.isfinite(val):
            raise NumericFailure(f"H_({a},{b})({t}) diverged")
        return val

    def _breaks(self, t):
        return list(self.service.breakpoints()) + [t - p for p in self.rate.breakpoints(0.0, t)]


def H(ctx: TheoryContext, t: float) -> float:
    """Mean queue length at time t."""
    return ctx.partial_H(t)


def cov(ctx: TheoryContext, t1: float, t2: float) -> float:
    if t1 > t2:
        t1, t2 = t2, t1
    return ctx.partial_H(t2, t2 - t1, math.inf)


def joint_log_mgf(ctx: TheoryContext, ts, thetas) -> float:
    """log E exp(sum_i theta_i X(t_i)) for strictly increasing ``ts``."""
    ts = [float(t) for t in ts]
    thetas = [float(x) for x in thetas]
    m = len(ts)
    if m == 0 or len(thetas) != m:
        raise InvalidParameter("ts and thetas must be nonempty and of equal length")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise InvalidParameter("ts must be strictly increasing")
    total = sum(math.expm1(th) * ctx.partial_H(t) for t, th in zip(ts, thetas))
    # t_0 = -inf, so the j = 0 term integrates out to infinity
    edges = [-math.inf] + ts
    for k in range(1, m):
        t_next = ts[k]
        inner = 0.0
        for j in range(k):
            window = sum(thetas[j:k])
            inner += math.expm1(window) * ctx.partial_H(t_next, t_next - edges[j + 1], t_next - edges[j])
        total += math.expm1(thetas[k]) * inner
    return total
