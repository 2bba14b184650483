"""Arrival-rate models with closed-form Laplace transforms.

Every model vanishes for negative time, so a queue simulated from t=0
starts empty and no warm-up is needed. Each model carries the growth and
transform-decay constants (sigma_lambda, gamma, k0, lambda0, p, a1, a2)
used by the tuning formulas; :func:`validate_assumptions` checks those
constants numerically on grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DomainError, InvalidParameter

# Default validation grids. sigma is measured from sigma_lambda.
SIGMA_OFFSETS = np.linspace(0.1, 5.0, 50)
OMEGA_GRID = np.linspace(-100.0, 100.0, 2001)
T_GRID = np.linspace(0.0, 50.0, 5001)

_REL_TOL = 1e-9


@dataclass(frozen=True)
class ExponentialGrowth:
    """lambda(t) <= lambda0 * exp(sigma_lambda * t)."""


@dataclass(frozen=True)
class PolynomialGrowth:
    """lambda(t) <= lambda0 * (a1 + a2 * t**p), normalised so max(a1, a2) = 1."""

    p: float
    a1: float
    a2: float

    def __post_init__(self):
        if self.p < 0 or self.a1 < 0 or self.a2 <= 0:
            raise InvalidParameter(f"bad polynomial growth constants {self}")
        if not math.isclose(max(self.a1, self.a2), 1.0):
            raise InvalidParameter("growth constants must satisfy max(a1, a2) = 1")


Growth = Union[ExponentialGrowth, PolynomialGrowth]


@dataclass(frozen=True, kw_only=True)
class RateModel:
    """Base class for arrival intensities lambda(t), t >= 0.

    Subclasses implement ``_eval`` and ``_laplace``; the public methods
    handle the support convention and the half-plane of convergence.
    """

    lambda0: float
    sigma_lambda: float
    gamma: float
    k0: float
    growth: Growth
    # False when the transform is known to vanish somewhere in Re(z) > sigma_lambda.
    zero_free: bool = True

    kind = "abstract"

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= 0, self._eval(np.maximum(t, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def __call__(self, t):
        return self.eval(t)

    def laplace(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(z.real <= self.sigma_lambda):
            raise DomainError(
                f"Re(z) must exceed sigma_lambda={self.sigma_lambda}; got min Re(z)={z.real.min()}"
            )
        out = self._laplace(z)
        return out if out.ndim else complex(out)

    def sup_bound(self, t0: float, t1: float) -> float:
        """Upper bound of lambda on [t0, t1]."""
        raise NotImplementedError

    def breakpoints(self, t0: float, t1: float) -> list:
        """Discontinuities of lambda inside (t0, t1)."""
        return []

    def growth_bound(self, t):
        t = np.asarray(t, dtype=float)
        g = self.growth
        if isinstance(g, ExponentialGrowth):
            return self.lambda0 * np.exp(self.sigma_lambda * t)
        return self.lambda0 * (g.a1 + g.a2 * np.power(t, g.p))

    def transform_lower_bound(self, sigma, omega):
        d2 = (np.asarray(sigma) - self.sigma_lambda) ** 2 + np.asarray(omega) ** 2
        return self.lambda0 * self.k0 / d2 ** (self.gamma / 2)

    def params(self) -> dict:
        raise NotImplementedError

    def to_config(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def _eval(self, t):
        raise NotImplementedError

    def _laplace(self, z):
        raise NotImplementedError


@dataclass(frozen=True, kw_only=True)
class ConstantRate(RateModel):
    start: float = 0.0
    kind = "constant"

    def _eval(self, t):
        return np.where(t >= self.start, self.lambda0, 0.0)

    def _laplace(self, z):
        return self.lambda0 * np.exp(-self.start * z) / z

    def sup_bound(self, t0, t1):
        return self.lambda0

    def breakpoints(self, t0, t1):
        return [self.start] if t0 < self.start < t1 else []

    def params(self):
        return {"lambda0": self.lambda0, "a": self.start}


@dataclass(frozen=True, kw_only=True)
class PolynomialRate(RateModel):
    p: float = 0.0
    kind = "polynomial"

    def _eval(self, t):
        return self.lambda0 * np.power(t, self.p)

    def _laplace(self, z):
        # principal branch; the half-plane Re(z) > 0 never meets the cut
        return self.lambda0 * gamma_fn(self.p + 1) / np.power(z, self.p + 1)

    def sup_bound(self, t0, t1):
        return self.lambda0 * max(t1, 0.0) ** self.p if self.p > 0 else self.lambda0

    def params(self):
        return {"lambda0": self.lambda0, "p": self.p}


@dataclass(frozen=True, kw_only=True)
class SinusoidalRate(RateModel):
    b: float = 1.0
    phase: str = "sin"
    kind = "sinusoidal"

    def _eval(self, t):
        wave = np.sin(t) if self.phase == "sin" else np.cos(t)
        return self.lambda0 * (1.0 + self.b * wave)

    def _laplace(self, z):
        osc = 1.0 / (z * z + 1.0) if self.phase == "sin" else z / (z * z + 1.0)
        return self.lambda0 / z + self.lambda0 * self.b * osc

    def sup_bound(self, t0, t1):
        return self.lambda0 * (1.0 + self.b)

    def params(self):
        return {"lambda0": self.lambda0, "b": self.b, "phase": self.phase}


@dataclass(frozen=True, kw_only=True)
class ExponentialRate(RateModel):
    theta: float = 1.0
    kind = "exponential"

    def _eval(self, t):
        return self.lambda0 * np.exp(self.theta * t)

    def _laplace(self, z):
        return self.lambda0 / (z - self.theta)

    def sup_bound(self, t0, t1):
        return self.lambda0 * math.exp(self.theta * max(t1, 0.0))

    def params(self):
        return {"lambda0": self.lambda0, "theta": self.theta}


@dataclass(frozen=True, kw_only=True)
class HighLowRate(RateModel):
    """lambda0 on (2j, 2j+1], lambda1 on (2j+1, 2j+2]."""

    high: float = 1.0
    low: float = 0.0
    kind = "highlow"

    def _eval(self, t):
        high_phase = np.ceil(t) % 2 == 1
        return np.where(t > 0, np.where(high_phase, self.high, self.low), 0.0)

    def _laplace(self, z):
        w = np.exp(-z)
        return (self.high + self.low * w) / (z * (1.0 + w))

    def sup_bound(self, t0, t1):
        return max(self.high, self.low)

    def breakpoints(self, t0, t1):
        return [float(j) for j in range(math.floor(t0) + 1, math.ceil(t1))]

    def params(self):
        return {"lambda0": self.high, "lambda1": self.low}


def _positive(name, value):
    if not value > 0 or not math.isfinite(value):
        raise InvalidParameter(f"{name} must be a positive finite number, got {value}")
    return float(value)


def make_constant(lambda0: float, a: float = 0.0) -> ConstantRate:
    lambda0 = _positive("lambda0", lambda0)
    if a < 0:
        raise InvalidParameter(f"start time a must be >= 0, got {a}")
    # |laplace| = lambda0 e^{-a sigma}/|z|; k0 is valid for sigma up to the validation span
    k0 = math.exp(-a * (SIGMA_OFFSETS[-1]))
    return ConstantRate(
        lambda0=lambda0, sigma_lambda=0.0, gamma=1.0, k0=k0,
        growth=PolynomialGrowth(0.0, 0.0, 1.0), start=float(a),
    )


def make_polynomial(lambda0: float, p: float) -> PolynomialRate:
    lambda0 = _positive("lambda0", lambda0)
    if not p >= 0:
        raise InvalidParameter(f"p must be >= 0, got {p}")
    return PolynomialRate(
        lambda0=lambda0, sigma_lambda=0.0, gamma=p + 1.0, k0=float(gamma_fn(p + 1)),
        growth=PolynomialGrowth(float(p), 0.0, 1.0), p=float(p),
    )


def make_linear(lambda0: float) -> PolynomialRate:
    return make_polynomial(lambda0, 1.0)


def make_sinusoidal(lambda0: float, b: float, phase: str = "sin") -> SinusoidalRate:
    lambda0 = _positive("lambda0", lambda0)
    if not 0 < b <= 1:
        raise InvalidParameter(f"b must lie in (0, 1], got {b}")
    if phase not in ("sin", "cos"):
        raise InvalidParameter(f"phase must be 'sin' or 'cos', got {phase!r}")
    model = SinusoidalRate(
        lambda0=lambda0, sigma_lambda=0.0, gamma=1.0, k0=1.0,
        growth=PolynomialGrowth(0.0, 1.0, 1.0), b=float(b), phase=phase,
    )
    if phase == "cos":
        # The cosine transform has zeros on the imaginary axis, so no k0 > 0
        # holds on the whole half-plane; take the infimum over the default grid.
        sig = SIGMA_OFFSETS[:, None]
        z = sig + 1j * OMEGA_GRID[None, :]
        ratio = np.abs(model.laplace(z)) * np.abs(z) / lambda0
        model = replace(model, k0=float(ratio.min()) * (1 - 1e-6))
    return model


def make_exponential(lambda0: float, theta: float) -> ExponentialRate:
    lambda0 = _positive("lambda0", lambda0)
    theta = _positive("theta", theta)
    return ExponentialRate(
        lambda0=lambda0, sigma_lambda=theta, gamma=1.0, k0=1.0,
        growth=ExponentialGrowth(), theta=theta,
    )


def make_highlow(lambda0: float, lambda1: float) -> HighLowRate:
    lambda0 = _positive("lambda0", lambda0)
    if not lambda1 >= 0:
        raise InvalidParameter(f"lambda1 must be >= 0, got {lambda1}")
    # (lambda0 + lambda1 w)/(1 + w) maps |w| < 1 onto Re > (lambda0 + lambda1)/2
    # when lambda1 <= lambda0; otherwise the transform has zeros at Re(z) = ln(lambda1/lambda0).
    return HighLowRate(
        lambda0=lambda0, sigma_lambda=0.0, gamma=1.0,
        k0=(lambda0 + lambda1) / (2 * lambda0),
        growth=PolynomialGrowth(0.0, 0.0, 1.0),
        zero_free=lambda1 <= lambda0,
        high=lambda0, low=float(lambda1),
    )


_FACTORIES = {
    "constant": lambda p: make_constant(p["lambda0"], p.get("a", 0.0)),
    "polynomial": lambda p: make_polynomial(p["lambda0"], p["p"]),
    "linear": lambda p: make_linear(p["lambda0"]),
    "sinusoidal": lambda p: make_sinusoidal(p["lambda0"], p["b"], p.get("phase", "sin")),
    "exponential": lambda p: make_exponential(p["lambda0"], p["theta"]),
    "highlow": lambda p: make_highlow(p["lambda0"], p.get("lambda1", 0.0)),
}


def rate_from_config(cfg: dict) -> RateModel:
    """Build a rate from ``{"kind": ..., "params": {...}}``."""
    kind = cfg.get("kind")
    if kind not in _FACTORIES:
        raise InvalidParameter(f"unknown rate kind {kind!r}; expected one of {sorted(_FACTORIES)}")
    try:
        return _FACTORIES[kind](cfg.get("params", {}))
    except KeyError as exc:
        raise InvalidParameter(f"rate {kind!r} is missing parameter {exc.args[0]!r}") from None


@dataclass(frozen=True)
class Violation:
    check: str  # "growth", "transform" or "zeros"
    point: tuple
    value: float
    bound: float

    @property
    def margin(self) -> float:
        """Signed slack; negative means the bound is broken."""
        if self.check == "growth":
            return self.bound - self.value
        return self.value - self.bound


@dataclass
class ValidationReport:
    model: RateModel
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return f"{self.model.kind}: all assumption checks passed"
        worst = min(self.violations, key=lambda v: v.margin)
        return (f"{self.model.kind}: {len(self.violations)} violations, "
                f"worst {worst.check} at {worst.point} (margin {worst.margin:.3g})")


def validate_assumptions(model: RateModel, sigma_grid=None, omega_grid=None, t_grid=None) -> ValidationReport:
    """Check the growth bound and the transform lower bound on grids.

    Violations are collected, never raised.
    """
    sigma = np.asarray(model.sigma_lambda + SIGMA_OFFSETS if sigma_grid is None else sigma_grid, float)
    omega = np.asarray(OMEGA_GRID if omega_grid is None else omega_grid, float)
    t = np.asarray(T_GRID if t_grid is None else t_grid, float)
    if sigma.size == 0 or omega.size == 0 or t.size == 0:
        raise InvalidParameter("validation grids must be nonempty")
    if np.any(sigma <= model.sigma_lambda):
        raise InvalidParameter("sigma grid must lie strictly right of sigma_lambda")

    report = ValidationReport(model)
    if not model.zero_free:
        report.violations.append(Violation("zeros", (), 0.0, model.lambda0 * model.k0))

    values = np.atleast_1d(model.eval(t))
    bounds = model.growth_bound(t)
    for i in np.flatnonzero(values > bounds * (1 + _REL_TOL)):
        report.violations.append(Violation("growth", (float(t[i]),), float(values[i]), float(bounds[i])))

    S, W = np.meshgrid(sigma, omega, indexing="ij")
    mod = np.abs(model.laplace(S + 1j * W))
    lower = model.transform_lower_bound(S, W)
    for i, j in zip(*np.nonzero(mod < lower * (1 - _REL_TOL))):
        report.violations.append(
            Violation("transform", (float(S[i, j]), float(W[i, j])), float(mod[i, j]), float(lower[i, j]))
        )
    return report
