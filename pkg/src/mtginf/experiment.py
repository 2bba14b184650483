"""Declarative Monte Carlo experiments: specs, presets, runner and summaries.

Each replication draws ``n`` paths from its own generator seeded with
``(seed, replication)``, so results do not depend on the worker count.
"""
from __future__ import annotations

import copy
import csv
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidParameter
from .estimators import (AdaptiveConfig, _cached_L, estimate_G, estimate_mu,
                         estimate_mu_closed_constant, estimate_mu_closed_highlow,
                         select_bandwidth_adaptive)
from .kernels import make_J
from .rates import ConstantRate, HighLowRate, rate_from_config
from .service import service_from_config
from .sim import PathBatch, simulate_paths
from .xform import BromwichConfig

CSV_HEADER = ["scenario", "rep", "target", "estimate", "truth", "tuning", "seconds"]


@dataclass(frozen=True)
class EstimatorSpec:
    """What to estimate and how.

    ``target`` is ``"G"`` (one estimate per entry of ``x0``) or ``"mu"``.
    For ``"G"`` give either a fixed ``h`` or an ``adaptive`` block. For
    ``"mu"`` give ``b``, ``h`` and ``x1``, or set ``closed`` to use the
    small-bandwidth formula available for constant and high/low rates.
    """

    target: str
    x0: tuple = ()
    h: Optional[float] = None
    adaptive: Optional[dict] = None
    b: Optional[float] = None
    x1: float = 0.0
    backend: str = "auto"
    bromwich: Optional[dict] = None
    closed: bool = False


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    rate: dict
    service: dict
    n: int
    replications: int
    estimator: EstimatorSpec
    seed: int = 0
    T: Optional[float] = None

    @property
    def horizon(self) -> float:
        if self.T is not None:
            return self.T
        if self.estimator.target == "G":
            return max(self.estimator.x0) + 15.0
        return self.estimator.b + 5.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimator"]["x0"] = list(self.estimator.x0)
        return d


@dataclass(frozen=True)
class RunRecord:
    scenario: str
    rep: int
    target: str
    estimate: float
    truth: float
    tuning: float
    seconds: float


@dataclass(frozen=True)
class TargetSummary:
    target: str
    mean: float
    sd: float
    rmse: float
    n_reps: int


@dataclass
class SummaryReport:
    scenario: str
    targets: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"scenario": self.scenario, "targets": [asdict(t) for t in self.targets]}


# -- parsing -----------------------------------------------------------------

def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}.{key}: required field missing")
    return d[key]


def _number(value, where: str, kind=float, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if kind is int and not float(value).is_integer():
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    value = kind(value)
    if positive and not value > 0:
        raise ConfigError(f"{where}: must be > 0, got {value}")
    return value


def spec_from_dict(d: dict) -> ExperimentSpec:
    """Validate a parsed config and build the spec; errors name the field."""
    if not isinstance(d, dict):
        raise ConfigError("config: top level must be an object")
    est = _require(d, "estimator", "config")
    if not isinstance(est, dict):
        raise ConfigError("config.estimator: expected an object")
    target = _require(est, "target", "config.estimator")
    known = {f for f in EstimatorSpec.__dataclass_fields__}
    extra = set(est) - known
    if extra:
        raise ConfigError(f"config.estimator.{sorted(extra)[0]}: unknown field")
    kw = dict(est)
    if target == "G":
        x0 = _require(est, "x0", "config.estimator")
        x0 = [x0] if isinstance(x0, (int, float)) else x0
        kw["x0"] = tuple(_number(x, f"config.estimator.x0[{i}]", positive=True) for i, x in enumerate(x0))
        if not kw["x0"]:
            raise ConfigError("config.estimator.x0: need at least one evaluation point")
        if (est.get("h") is None) == (est.get("adaptive") is None):
            raise ConfigError("config.estimator: give exactly one of h or adaptive")
        if est.get("h") is not None:
            kw["h"] = _number(est["h"], "config.estimator.h", positive=True)
    elif target == "mu":
        kw["b"] = _number(_require(est, "b", "config.estimator"), "config.estimator.b", positive=True)
        if not est.get("closed") and est.get("h") is None:
            raise ConfigError("config.estimator.h: required unless closed is true")
    else:
        raise ConfigError(f"config.estimator.target: expected 'G' or 'mu', got {target!r}")
    for key in ("rate", "service"):
        if not isinstance(_require(d, key, "config"), dict):
            raise ConfigError(f"config.{key}: expected an object with kind and params")
    T = d.get("T")
    spec = ExperimentSpec(
        scenario=str(_require(d, "scenario", "config")),
        rate=d["rate"], service=d["service"],
        n=_number(_require(d, "n", "config"), "config.n", int, positive=True),
        replications=_number(_require(d, "replications", "config"), "config.replications", int, positive=True),
        seed=_number(d.get("seed", 0), "config.seed", int),
        T=None if T is None else _number(T, "config.T", positive=True),
        estimator=EstimatorSpec(**kw),
    )
    # surface model errors now, with their field
    for key, build in (("rate", rate_from_config), ("service", service_from_config)):
        try:
            build(d[key])
        except InvalidParameter as exc:
            raise ConfigError(f"config.{key}: {exc}") from None
    return spec


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return spec_from_dict(d)


# -- presets -----------------------------------------------------------------

_X0_GRID = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]

PRESETS = {
    "case1a": {
        "scenario": "case1a",
        "rate": {"kind": "sinusoidal", "params": {"lambda0": 10.0, "b": 1.0, "phase": "cos"}},
        "service": {"kind": "exponential", "params": {"rate": 1.0}},
        "n": 200, "replications": 50, "seed": 20160101,
        "estimator": {"target": "G", "x0": _X0_GRID, "adaptive": {"h_min": 0.025, "alpha": 0.25}},
    },
    "case1b": {
        "scenario": "case1b",
        "rate": {"kind": "linear", "params": {"lambda0": 10.0}},
        "service": {"kind": "exponential", "params": {"rate": 1.0}},
        "n": 400, "replications": 50, "seed": 20160102,
        "estimator": {"target": "G", "x0": [1.0], "adaptive": {"h_min": 0.05, "alpha": 0.15}},
    },
    "case2a": {
        "scenario": "case2a",
        "rate": {"kind": "sinusoidal", "params": {"lambda0": 1.0, "b": 1.0, "phase": "sin"}},
        "service": {"kind": "exponential", "params": {"rate": 1.0}},
        "n": 1, "replications": 2000, "seed": 20160201,
        "estimator": {"target": "mu", "b": 25.0, "h": 0.08, "x1": -1.0,
                      "bromwich": {"c": -1.0, "T_tilde": 30.0}},
    },
    "case2b": {
        "scenario": "case2b",
        "rate": {"kind": "highlow", "params": {"lambda0": 1.0, "lambda1": 0.0}},
        "service": {"kind": "uniform", "params": {"lo": 0.0, "hi": 2.0}},
        "n": 1, "replications": 10000, "seed": 20160202,
        "estimator": {"target": "mu", "b": 25.0, "closed": True},
    },
}


def preset(name: str, **overrides) -> ExperimentSpec:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    d = copy.deepcopy(PRESETS[name])
    d.update(overrides)
    return spec_from_dict(d)


# -- running -----------------------------------------------------------------

class _Plan:
    """Models and kernels shared by all replications of one spec."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.rate = rate_from_config(spec.rate)
        self.service = service_from_config(spec.service)
        self.T = spec.horizon
        est = spec.estimator
        self.kernel = None
        self.adaptive = None
        if est.target == "G":
            if est.adaptive is not None:
                try:
                    self.adaptive = AdaptiveConfig(**est.adaptive)
                except TypeError as exc:
                    raise ConfigError(f"config.estimator.adaptive: {exc}") from None
            else:
                self.kernel = _cached_L(self.rate, est.h)
                for x0 in est.x0:
                    self.kernel.ensure_range(-x0, self.T - x0)
        elif not est.closed:
            cfg = BromwichConfig(**est.bromwich) if est.bromwich else None
            self.kernel = make_J(self.rate, est.b, est.h, est.x1, backend=est.backend, config=cfg,
                                 table_range=(0.0, self.T))
            if self.kernel.support[1] > self.T:
                warnings.warn(f"J support ends at {self.kernel.support[1]:.3g} > T={self.T}", stacklevel=2)
        elif isinstance(self.rate, HighLowRate):
            self.closed_fn = estimate_mu_closed_highlow
        elif isinstance(self.rate, ConstantRate):
            self.closed_fn = estimate_mu_closed_constant
        else:
            raise ConfigError(f"config.estimator.closed: no closed form for rate {self.rate.kind!r}")

    def replicate(self, rep: int) -> list:
        spec, est = self.spec, self.spec.estimator
        start = time.perf_counter()
        rng = np.random.default_rng([spec.seed, rep])
        batch = PathBatch(simulate_paths(self.rate, self.service, self.T, spec.n, rng))
        rows = []
        if est.target == "G":
            for x0 in est.x0:
                if self.adaptive is not None:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        h, res = select_bandwidth_adaptive(batch, self.rate, x0, self.T, self.adaptive)
                else:
                    h, res = est.h, estimate_G(batch, self.kernel, x0, self.T, with_variance=False)
                rows.append((f"G({x0:g})", res.value, float(self.service.cdf(x0)), h))
        else:
            if est.closed:
                res = self.closed_fn(batch, est.b, self.rate.lambda0)
            else:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    res = estimate_mu(batch, self.kernel, self.T)
            rows.append(("mu", res.value, self.service.mean, est.b))
        secs = time.perf_counter() - start
        return [RunRecord(spec.scenario, rep, t, float(v), float(tr), float(tu), secs)
                for t, v, tr, tu in rows]


def run(spec: ExperimentSpec, threads: int = 1):
    """Run every replication; returns (records, SummaryReport)."""
    plan = _Plan(spec)
    reps = range(spec.replications)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(plan.replicate, reps))
    else:
        chunks = [plan.replicate(r) for r in reps]
    records = [r for chunk in chunks for r in chunk]
    return records, summarize(spec.scenario, records)


def summarize(scenario: str, records) -> SummaryReport:
    order, groups = [], {}
    for r in records:
        if r.target not in groups:
            order.append(r.target)
            groups[r.target] = []
        groups[r.target].append((r.estimate, r.truth))
    report = SummaryReport(scenario)
    for t in order:
        est = np.array([e for e, _ in groups[t]])
        tru = np.array([x for _, x in groups[t]])
        sd = float(est.std(ddof=1)) if len(est) > 1 else 0.0
        rmse = math.sqrt(float(np.mean((est - tru) ** 2)))
        report.targets.append(TargetSummary(t, float(est.mean()), sd, rmse, len(est)))
    return report


def rmse_vs_n(spec: ExperimentSpec, n_list, replications: int = 50, threads: int = 1) -> list:
    """[(n, {target: rmse})] for each n in the increasing ``n_list``."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidParameter("n_list must be strictly increasing")
    curve = []
    for n in n_list:
        _, summary = run(replace(spec, n=int(n), replications=replications), threads=threads)
        curve.append((int(n), {t.target: t.rmse for t in summary.targets}))
    return curve


# -- persistence ---------------------------------------------------------------

def write_records(records, dest, timing: bool = False) -> None:
    """RunRecord CSV. Wall time is left blank unless ``timing`` so reruns are byte-identical."""
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([r.scenario, r.rep, r.target, repr(r.estimate), repr(r.truth),
                        repr(r.tuning), repr(r.seconds) if timing else ""])


def read_records(src) -> list:
    with open(src, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [RunRecord(r["scenario"], int(r["rep"]), r["target"], float(r["estimate"]),
                      float(r["truth"]), float(r["tuning"]),
                      float(r["seconds"]) if r["seconds"] else math.nan) for r in rows]


def write_summary(report: SummaryReport, dest) -> None:
    with open(dest, "w") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")
