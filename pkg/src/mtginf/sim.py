"""Simulation of M_t/G/infinity queue-length paths and exact path integrals."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidParameter, UnsupportedRate
from .rates import RateModel
from .service import ServiceModel

THINNING_WINDOW = 1.0


@dataclass(frozen=True)
class Grid:
    """Uniform grid t_i = start + i * step, i = 0..n."""

    step: float
    n: int
    start: float = 0.0

    def __post_init__(self):
        if not self.step > 0 or self.n < 0:
            raise InvalidParameter(f"invalid grid step={self.step}, n={self.n}")

    @property
    def times(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.n + 1)

    @property
    def end(self) -> float:
        return self.start + self.n * self.step


@dataclass(frozen=True, eq=False)
class QueuePath:
    """Right-continuous step function X(t) on [0, horizon].

    ``counts[j]`` is the queue length on ``[epochs[j], epochs[j+1])``, the
    last segment running up to the horizon. ``epochs[0]`` is always 0.
    """

    epochs: np.ndarray
    counts: np.ndarray
    horizon: float

    def __post_init__(self):
        if len(self.epochs) != len(self.counts) or len(self.epochs) == 0:
            raise InvalidParameter("epochs and counts must be nonempty and of equal length")

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.epochs, t, side="right") - 1
        out = np.where(idx >= 0, self.counts[np.maximum(idx, 0)], 0)
        return out if out.ndim else int(out)

    def __eq__(self, other):
        if not isinstance(other, QueuePath):
            return NotImplemented
        return (self.horizon == other.horizon
                and np.array_equal(self.epochs, other.epochs)
                and np.array_equal(self.counts, other.counts))

    __hash__ = None


def _thin(rate: RateModel, T: float, rng: np.random.Generator, n_paths: int):
    """Lewis-Shedler thinning for ``n_paths`` independent NHPPs on [0, T].

    Returns (times, owner) sorted by owner, then time.
    """
    if T < 0:
        raise InvalidParameter(f"horizon must be >= 0, got {T}")
    times, owners = [], []
    n_windows = math.ceil(T / THINNING_WINDOW) if T > 0 else 0
    for w in range(n_windows):
        lo = w * THINNING_WINDOW
        hi = min(T, lo + THINNING_WINDOW)
        top = rate.sup_bound(lo, hi)
        if not math.isfinite(top):
            raise UnsupportedRate(f"rate bound on [{lo}, {hi}] is not finite")
        if top <= 0:
            continue
        k = rng.poisson(top * (hi - lo), size=n_paths)
        total = int(k.sum())
        cand = rng.uniform(lo, hi, size=total)
        u = rng.uniform(0.0, 1.0, size=total)
        keep = u * top < rate.eval(cand)
        times.append(cand[keep])
        owners.append(np.repeat(np.arange(n_paths), k)[keep])
    if not times:
        return np.empty(0), np.empty(0, dtype=np.int64)
    times = np.concatenate(times)
    owners = np.concatenate(owners)
    order = np.lexsort((times, owners))
    return times[order], owners[order]


def simulate_arrivals(rate: RateModel, T: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted arrival epochs of the NHPP with intensity ``rate`` on [0, T]."""
    times, _ = _thin(rate, T, rng, 1)
    return times


def _assemble(arrivals: np.ndarray, departures: np.ndarray, T: float) -> QueuePath:
    departures = departures[departures <= T]
    ev_t = np.concatenate([arrivals, departures])
    ev_d = np.concatenate([np.ones(len(arrivals), np.int64), -np.ones(len(departures), np.int64)])
    if ev_t.size == 0:
        return QueuePath(np.zeros(1), np.zeros(1, np.int64), float(T))
    uniq, inv = np.unique(ev_t, return_inverse=True)
    net = np.bincount(inv, weights=ev_d, minlength=len(uniq)).astype(np.int64)
    at_zero = net[0] if uniq[0] == 0.0 else 0
    if uniq[0] == 0.0:
        uniq, net = uniq[1:], net[1:]
    keep = net != 0
    uniq, net = uniq[keep], net[keep]
    epochs = np.concatenate([[0.0], uniq])
    counts = np.cumsum(np.concatenate([[at_zero], net]))
    return QueuePath(epochs, counts, float(T))


def build_queue_path(arrivals, service: ServiceModel, T: float, rng: np.random.Generator) -> QueuePath:
    """Attach i.i.d. service times to ``arrivals`` and build X on [0, T]."""
    arrivals = np.asarray(arrivals, dtype=float)
    services = np.asarray(service.sample(rng, len(arrivals)), dtype=float)
    return _assemble(arrivals, arrivals + services, T)


def simulate_paths(rate: RateModel, service: ServiceModel, T: float, n: int,
                   rng: np.random.Generator) -> list:
    """``n`` independent queue-length paths on [0, T]."""
    times, owners = _thin(rate, T, rng, n)
    services = np.asarray(service.sample(rng, len(times)), dtype=float)
    bounds = np.searchsorted(owners, np.arange(n + 1))
    return [
        _assemble(times[bounds[k]:bounds[k + 1]],
                  times[bounds[k]:bounds[k + 1]] + services[bounds[k]:bounds[k + 1]], T)
        for k in range(n)
    ]


def simulate_path(rate: RateModel, service: ServiceModel, T: float, rng: np.random.Generator) -> QueuePath:
    return build_queue_path(simulate_arrivals(rate, T, rng), service, T, rng)


def simulate_counts(rate: RateModel, service: ServiceModel, times, n_reps: int,
                    rng: np.random.Generator, chunk: int = 100_000) -> np.ndarray:
    """X(t) at the given times for ``n_reps`` independent queues.

    Returns an integer array of shape (n_reps, len(times)); skips path
    assembly, so it is the fast route for large Monte Carlo checks.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    T = float(times.max())
    out = np.empty((n_reps, len(times)), dtype=np.int64)
    for start in range(0, n_reps, chunk):
        m = min(chunk, n_reps - start)
        arr, owner = _thin(rate, T, rng, m)
        dep = arr + np.asarray(service.sample(rng, len(arr)), dtype=float)
        for i, t in enumerate(times):
            busy = (arr <= t) & (dep > t)
            out[start:start + m, i] = np.bincount(owner[busy], minlength=m)
    return out


class PathBatch:
    """Several paths stacked into flat segment arrays for vectorised queries."""

    def __init__(self, paths: Sequence[QueuePath]):
        if len(paths) == 0:
            raise InvalidParameter("need at least one path")
        self.n = len(paths)
        self.horizon = min(p.horizon for p in paths)
        lens = np.array([len(p.epochs) for p in paths])
        self.owner = np.repeat(np.arange(self.n), lens)
        self._starts = np.concatenate([[0], np.cumsum(lens)])
        self.epochs = np.concatenate([p.epochs for p in paths])
        self.counts = np.concatenate([p.counts for p in paths]).astype(float)
        self.seg_end = np.concatenate([np.append(p.epochs[1:], p.horizon) for p in paths])
        busy = self.counts != 0
        self._lo, self._hi = self.epochs[busy], self.seg_end[busy]
        self._c, self._own = self.counts[busy], self.owner[busy]

    def integrate(self, f: Optional[Callable] = None, a: float = 0.0, b: Optional[float] = None,
                  antiderivative: Optional[Callable] = None, panels: int = 64) -> np.ndarray:
        """Per-path value of int_a^b f(t) X(t) dt.

        Uses ``antiderivative`` when given, otherwise composite Simpson with
        ``panels`` panels on every constant segment.
        """
        b = self.horizon if b is None else b
        if a < 0 or b > self.horizon + 1e-12 or a > b:
            raise InvalidParameter(f"[{a}, {b}] is not inside [0, {self.horizon}]")
        lo = np.clip(self._lo, a, b)
        hi = np.clip(self._hi, a, b)
        live = hi > lo
        lo, hi, c, own = lo[live], hi[live], self._c[live], self._own[live]
        if antiderivative is not None:
            seg = antiderivative(hi) - antiderivative(lo)
        elif f is not None:
            seg = _simpson_segments(f, lo, hi, panels)
        else:
            raise InvalidParameter("need f or its antiderivative")
        return np.bincount(own, weights=c * seg, minlength=self.n)

    def sample(self, t) -> np.ndarray:
        """Matrix of X_k(t_i), shape (n_paths, len(t)), right-continuous."""
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < 0 or t.max() > self.horizon):
            raise InvalidParameter(f"grid [{t.min()}, {t.max()}] exceeds horizon {self.horizon}")
        out = np.empty((self.n, t.size))
        for k, (s, e) in enumerate(zip(self._starts[:-1], self._starts[1:])):
            # side='right' picks the epoch itself on ties: right-continuity
            idx = np.searchsorted(self.epochs[s:e], t, side="right") - 1
            out[k] = self.counts[s + idx]
        return out


def _simpson_segments(f, lo, hi, panels):
    m = 2 * panels
    w = np.ones(m + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    out = np.empty(len(lo))
    block = max(1, 200_000 // (m + 1))
    frac = np.linspace(0.0, 1.0, m + 1)
    for s in range(0, len(lo), block):
        l, h = lo[s:s + block, None], hi[s:s + block, None]
        vals = np.asarray(f(l + (h - l) * frac))
        out[s:s + block] = (vals @ w) * (h[:, 0] - l[:, 0]) / (3 * m)
    return out


def path_integral(path: QueuePath, f: Optional[Callable] = None, a: float = 0.0,
                  b: Optional[float] = None, antiderivative: Optional[Callable] = None,
                  panels: int = 64) -> float:
    """int_a^b f(t) X(t) dt for one path, exact in X."""
    return float(PathBatch([path]).integrate(f, a, b, antiderivative=antiderivative, panels=panels)[0])


def sample_on_grid(path: QueuePath, grid: Grid) -> np.ndarray:
    if grid.end > path.horizon or grid.start < 0:
        raise InvalidParameter(f"grid end {grid.end} exceeds horizon {path.horizon}")
    return np.asarray(path.value_at(grid.times), dtype=float)


def write_path_csv(path: QueuePath, dest) -> None:
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "count"])
        for e, c in zip(path.epochs, path.counts):
            w.writerow([repr(float(e)), int(c)])


def read_path_csv(src, horizon: float) -> QueuePath:
    with open(src, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return QueuePath(np.array([float(r["epoch"]) for r in rows]),
                     np.array([int(r["count"]) for r in rows]), float(horizon))
