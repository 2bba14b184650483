"""Estimators of G(x0) and of the mean service time from queue-length paths."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientReplications, InvalidParameter, ParameterRegimeError
from .kernels import DeconvKernelL, MeanKernelJ, make_L
from .rates import ExponentialGrowth, RateModel
from .sim import Grid, PathBatch, QueuePath

# half-width of the variance grid window, in bandwidths
VARIANCE_WINDOW = 10.0


@dataclass(frozen=True)
class DistEstimate:
    x0: float
    h: float
    value: float
    variance: Optional[float] = None  # None when fewer than two paths

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MeanEstimate:
    b: float
    value: float

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AdaptiveConfig:
    """Geometric bandwidth grid h_i = (1 + alpha)^i h_min, i = 0..max_steps.

    ``max_steps=None`` stops the grid at the last h_i not exceeding x0.
    ``kappa=None`` uses sqrt(ln n)/4. ``output`` picks the midpoint of the
    running intersection (``"intersection"``) or of the last interval
    ``I_{j*}`` (``"last_interval"``).
    """

    h_min: float
    alpha: float
    max_steps: Optional[int] = None
    kappa: Optional[float] = None
    output: str = "intersection"
    clip: bool = False

    def __post_init__(self):
        if not self.h_min > 0 or not self.alpha > 0:
            raise InvalidParameter(f"need h_min > 0 and alpha > 0, got {self.h_min}, {self.alpha}")
        if self.max_steps is not None and self.max_steps < 0:
            raise InvalidParameter("max_steps must be >= 0")
        if self.output not in ("intersection", "last_interval"):
            raise InvalidParameter(f"unknown output rule {self.output!r}")

    def grid(self, x0: float) -> np.ndarray:
        steps = self.max_steps
        if steps is None:
            steps = max(1, int(math.floor(math.log(x0 / self.h_min) / math.log1p(self.alpha) + 1e-9)))
        return self.h_min * (1.0 + self.alpha) ** np.arange(steps + 1)

    def kappa_for(self, n: int) -> float:
        return self.kappa if self.kappa is not None else 0.25 * math.sqrt(math.log(n))


@dataclass(frozen=True)
class BandwidthInputs:
    beta: float
    A: float
    M: float
    x0: float
    n: int
    rate: RateModel

    def __post_init__(self):
        if min(self.beta, self.A, self.M, self.x0, self.n) <= 0:
            raise InvalidParameter("bandwidth inputs must all be positive")


def _batch(paths) -> PathBatch:
    if isinstance(paths, PathBatch):
        return paths
    if len(paths) == 0:
        raise InvalidParameter("need at least one path")
    return PathBatch(paths)


def _check_horizon(batch: PathBatch, T: float):
    if T > batch.horizon + 1e-12:
        raise InvalidParameter(f"T={T} exceeds the observed horizon {batch.horizon}")


def kernel_integrals(paths, L: DeconvKernelL, x0: float, T: float) -> np.ndarray:
    """Per-path int_0^T L(t - x0) X_k(t) dt."""
    batch = _batch(paths)
    _check_horizon(batch, T)
    L.ensure_range(-x0, T - x0)
    return batch.integrate(a=0.0, b=T, antiderivative=lambda t: L.antiderivative(t - x0))


def default_variance_grid(L: DeconvKernelL, x0: float, T: float) -> Grid:
    """Step h/4 over the kernel's effective support around x0, clipped to [0, T]."""
    lo_s, hi_s = L.support
    lo = max(0.0, min(x0 - VARIANCE_WINDOW * L.h, x0 + lo_s))
    hi = min(T, max(x0 + VARIANCE_WINDOW * L.h, x0 + hi_s))
    step = L.h / 4
    return Grid(step=step, n=max(1, int(math.floor((hi - lo) / step))), start=lo)


def variance_estimate(paths, L: DeconvKernelL, x0: float, grid: Optional[Grid] = None,
                      T: Optional[float] = None) -> float:
    """Plug-in variance (step^2/(n-1)) L^T R L with R the sample covariance on the grid."""
    batch = _batch(paths)
    if batch.n < 2:
        raise InsufficientReplications(f"variance needs at least 2 paths, got {batch.n}")
    if grid is None:
        grid = default_variance_grid(L, x0, batch.horizon if T is None else T)
    t = grid.times
    X = batch.sample(t)
    weights = np.atleast_1d(L.eval(t - x0))
    # L^T R L without forming R: R = D^T D/(n-1) with D the centred sample matrix
    proj = (X - X.mean(axis=0)) @ weights
    quad = float(proj @ proj) / (batch.n - 1)
    return grid.step ** 2 / (batch.n - 1) * quad


def estimate_G(paths, L: DeconvKernelL, x0: float, T: float, grid: Optional[Grid] = None,
               with_variance: bool = True) -> DistEstimate:
    """1 - (1/n) sum_k int_0^T L(t - x0) X_k(t) dt. Not clipped to [0, 1]."""
    if not x0 > 0:
        raise InvalidParameter(f"x0 must be > 0, got {x0}")
    batch = _batch(paths)
    value = 1.0 - float(kernel_integrals(batch, L, x0, T).mean())
    var = None
    if with_variance and batch.n >= 2:
        var = variance_estimate(batch, L, x0, grid, T=T)
    return DistEstimate(x0=x0, h=L.h, value=value, variance=var)


def estimate_mu(paths, J: MeanKernelJ, T: float) -> MeanEstimate:
    """(1/n) sum_k int_0^T J(t) X_k(t) dt."""
    batch = _batch(paths)
    _check_horizon(batch, T)
    lo, hi = J.support
    if hi > T:
        warnings.warn(f"kernel support extends to {hi:.3g}, beyond T={T}", stacklevel=2)
    J.ensure_range(0.0, T)
    vals = batch.integrate(a=0.0, b=T, antiderivative=J.antiderivative)
    return MeanEstimate(b=J.b, value=float(vals.mean()))


def estimate_mu_closed_constant(paths, b: float, lambda0: float) -> MeanEstimate:
    """Small-bandwidth limit for constant arrivals: mean of X_i(b)/lambda0."""
    batch = _batch(paths)
    if b > batch.horizon or b < 0:
        raise InvalidParameter(f"b={b} must lie in [0, {batch.horizon}]")
    return MeanEstimate(b=b, value=float(batch.sample([b])[:, 0].mean()) / lambda0)


def estimate_mu_closed_highlow(paths, b: float, lambda0: float) -> MeanEstimate:
    """Small-bandwidth limit for high/low arrivals: mean of (X_i(b-1) + X_i(b))/lambda0."""
    batch = _batch(paths)
    if b - 1 < 0 or b > batch.horizon:
        raise InvalidParameter(f"need 1 <= b <= {batch.horizon}, got {b}")
    X = batch.sample([b - 1, b])
    return MeanEstimate(b=b, value=float(X.sum(axis=1).mean()) / lambda0)


def _kappa_factor(rate: RateModel, x0: float) -> float:
    g = rate.growth
    if isinstance(g, ExponentialGrowth):
        s = rate.sigma_lambda
        return math.exp(2 * s * x0) / s
    return g.a1 + g.a2 * x0 ** g.p


def theoretical_h(inputs: BandwidthInputs) -> float:
    """Minimax bandwidth (M kappa/(A^2 lambda0 n))^(1/(2 beta + 2 gamma + 1))."""
    rate = inputs.rate
    kappa = _kappa_factor(rate, inputs.x0)
    base = inputs.M * kappa / (inputs.A ** 2 * rate.lambda0 * inputs.n)
    return base ** (1.0 / (2 * inputs.beta + 2 * rate.gamma + 1))


def theoretical_b(rate: RateModel, M: float, n: int) -> float:
    """Window length b* for the mean estimator, by growth regime of the rate."""
    load = M * rate.lambda0 * n
    if isinstance(rate.growth, ExponentialGrowth):
        s, g = rate.sigma_lambda, rate.gamma
        arg = s ** (-2 * g + 1) * load
        if arg <= math.e:
            raise ParameterRegimeError(f"log argument {arg:.4g} <= e; b* undefined")
        ell = math.log(arg)
        return (ell - 3 * math.log(ell / (2 * s))) / (2 * s) - 0.25
    if load < 1:
        raise ParameterRegimeError(f"M lambda0 n = {load:.4g} < 1")
    return load ** (1.0 / (rate.growth.p + 2))


def lepski_select(values: Sequence[float], sds: Sequence[float], kappa: float,
                  output: str = "intersection"):
    """Intersection-of-intervals rule.

    Intervals are value +- 2 kappa sd. Returns (j_star, estimate, exhausted)
    with j_star 0-based, the largest index whose running intersection with
    all earlier intervals is nonempty.
    """
    lo, hi = -math.inf, math.inf
    j_star, best = 0, None
    for j, (v, s) in enumerate(zip(values, sds)):
        a, b = v - 2 * kappa * s, v + 2 * kappa * s
        new_lo, new_hi = max(lo, a), min(hi, b)
        if new_lo > new_hi:
            break
        lo, hi, j_star = new_lo, new_hi, j
        best = 0.5 * (lo + hi) if output == "intersection" else v
    else:
        return j_star, best, True
    return j_star, best, False


@lru_cache(maxsize=512)
def _cached_L(rate: RateModel, h: float) -> DeconvKernelL:
    return make_L(rate, h)


def select_bandwidth_adaptive(paths, rate: RateModel, x0: float, T: float,
                              cfg: AdaptiveConfig, grid_for=None):
    """Choose h by the intersection rule and return (h, DistEstimate).

    ``grid_for(L)`` may override the variance grid for each bandwidth.
    """
    batch = _batch(paths)
    if batch.n < 2:
        raise InsufficientReplications("adaptive selection needs at least 2 paths")
    kappa = cfg.kappa_for(batch.n)
    lo, hi = -math.inf, math.inf
    chosen = None
    hs = cfg.grid(x0)
    for h in hs:
        L = _cached_L(rate, float(h))
        est = estimate_G(batch, L, x0, T, grid=grid_for(L) if grid_for else None)
        sd = math.sqrt(est.variance)
        new_lo = max(lo, est.value - 2 * kappa * sd)
        new_hi = min(hi, est.value + 2 * kappa * sd)
        if new_lo > new_hi:
            break
        lo, hi = new_lo, new_hi
        mid = 0.5 * (lo + hi) if cfg.output == "intersection" else est.value
        chosen = (float(h), mid, est.variance)
    else:
        warnings.warn(f"all {len(hs)} intervals intersect; returning the largest bandwidth",
                      stacklevel=2)
    h_sel, value, var = chosen
    if cfg.clip:
        value = min(1.0, max(0.0, value))
    return h_sel, DistEstimate(x0=x0, h=h_sel, value=value, variance=var)
