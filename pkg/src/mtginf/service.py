"""Service-time distributions G."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

from .errors import InvalidParameter

_TAIL_EPS = 1e-12


@dataclass(frozen=True)
class ServiceModel:
    kind = "abstract"

    def cdf(self, x):
        raise NotImplementedError

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = 1.0 - np.asarray(self.cdf(x))
        return out if out.ndim else float(out)

    def _draw(self, rng: np.random.Generator, size):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        """Draw strictly positive service times."""
        out = np.asarray(self._draw(rng, size), dtype=float)
        # a zero duration would put an arrival and its departure on one epoch
        out = np.where(out > 0, out, np.nextafter(0.0, 1.0))
        return out if out.ndim else float(out)

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def tail_end(self) -> float:
        """A point beyond which the survival function is below 1e-12."""
        raise NotImplementedError

    def breakpoints(self) -> list:
        """Points where the survival function is not smooth."""
        return []

    def tail_moment(self, k: int) -> float:
        """int_0^inf k t^(k-1) (1 - G(t)) dt by adaptive quadrature."""
        upper = self.tail_end()
        val, _ = integrate.quad(
            lambda t: k * t ** (k - 1) * self.survival(t), 0.0, upper,
            points=[b for b in self.breakpoints() if 0 < b < upper] or None,
            limit=200, epsabs=1e-13, epsrel=1e-10,
        )
        return val

    @cached_property
    def class_M(self) -> float:
        """Smallest M such that G belongs to the two-moment class G(M)."""
        return max(self.tail_moment(1), self.tail_moment(2))

    def params(self) -> dict:
        raise NotImplementedError

    def to_config(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


@dataclass(frozen=True)
class ExponentialService(ServiceModel):
    rate: float = 1.0
    kind = "exponential"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > 0, np.exp(-self.rate * np.maximum(x, 0.0)), 1.0)
        return out if out.ndim else float(out)

    def _draw(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    @property
    def mean(self):
        return 1.0 / self.rate

    def tail_end(self):
        return -math.log(_TAIL_EPS) / self.rate

    def params(self):
        return {"rate": self.rate}


@dataclass(frozen=True)
class UniformService(ServiceModel):
    lo: float = 0.0
    hi: float = 1.0
    kind = "uniform"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return out if out.ndim else float(out)

    def _draw(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def tail_end(self):
        return self.hi

    def breakpoints(self):
        return [self.lo, self.hi]

    def params(self):
        return {"lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class DeterministicService(ServiceModel):
    d: float = 1.0
    kind = "deterministic"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.d, 1.0, 0.0)
        return out if out.ndim else float(out)

    def _draw(self, rng, size):
        return np.full(size, self.d) if size is not None else self.d

    @property
    def mean(self):
        return self.d

    def tail_end(self):
        return self.d

    def breakpoints(self):
        return [self.d]

    def params(self):
        return {"d": self.d}


def make_exponential_service(rate: float) -> ExponentialService:
    if not rate > 0:
        raise InvalidParameter(f"service rate must be > 0, got {rate}")
    return ExponentialService(float(rate))


def make_uniform_service(lo: float, hi: float) -> UniformService:
    if not 0 <= lo < hi:
        raise InvalidParameter(f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
    return UniformService(float(lo), float(hi))


def make_deterministic_service(d: float) -> DeterministicService:
    if not d > 0:
        raise InvalidParameter(f"deterministic duration must be > 0, got {d}")
    return DeterministicService(float(d))


def service_from_config(cfg: dict) -> ServiceModel:
    kind = cfg.get("kind")
    p = cfg.get("params", {})
    try:
        if kind == "exponential":
            return make_exponential_service(p["rate"])
        if kind == "uniform":
            return make_uniform_service(p["lo"], p["hi"])
        if kind == "deterministic":
            return make_deterministic_service(p["d"])
    except KeyError as exc:
        raise InvalidParameter(f"service {kind!r} is missing parameter {exc.args[0]!r}") from None
    raise InvalidParameter(f"unknown service kind {kind!r}; expected exponential|uniform|deterministic")
