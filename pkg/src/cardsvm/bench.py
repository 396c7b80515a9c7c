"""Multistart experiment runner, result files and performance profiles."""
from __future__ import annotations

import csv
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import rfe
from .dataset import Dataset, load_bundled, load_csv, load_sparse, standardize, subsample
from .decomposition import dec_sub_light, naive_alternation
from .errors import DomainError
from .kernels import FeatureMask, KernelSpec
from .local_search import LsConfig, ls, ls_star
from .problem import Evaluator, Incumbent, ProblemSpec, brute_force_minlp, random_start

log = logging.getLogger(__name__)

ALGORITHMS = ("LS", "LS_STAR", "DEC_SUB_LIGHT", "RFE1", "RFE2", "NAIVE_ALT", "BRUTE_FORCE")
CLI_NAMES = {"ls": "LS", "ls_star": "LS_STAR", "dec_sub_light": "DEC_SUB_LIGHT", "rfe1": "RFE1",
             "rfe2": "RFE2", "naive": "NAIVE_ALT", "brute_force": "BRUTE_FORCE"}
DEFAULT_OPT_WINDOW = {"LS_STAR": 5, "DEC_SUB_LIGHT": 10}
POLY_ONLY = ("DEC_SUB_LIGHT", "NAIVE_ALT")
RECORD_SCHEMA = "cardsvm.run/1"


class ConfigError(DomainError):
    """Invalid experiment configuration; the message starts with the offending field path."""


@dataclass(frozen=True)
class RunRecord:
    dataset_id: str
    algorithm: str
    kernel: KernelSpec
    B: int
    C: float
    seed: int
    ub: float
    wall_seconds: float
    mask: FeatureMask
    converged: bool

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise DomainError(f"unknown algorithm {self.algorithm!r}")
        if not np.isfinite(self.ub):
            raise DomainError("ub must be finite")
        if self.wall_seconds < 0:
            raise DomainError("wall_seconds must be nonnegative")

    @property
    def instance(self) -> str:
        return f"{self.dataset_id}|{self.kernel.describe()}|B={self.B}|C={self.C:g}"

    def to_json(self) -> dict:
        return {"schema": RECORD_SCHEMA, "dataset_id": self.dataset_id,
                "algorithm": self.algorithm, "kernel": asdict(self.kernel), "B": self.B,
                "C": self.C, "seed": self.seed, "ub": self.ub,
                "wall_seconds": self.wall_seconds, "n": self.mask.n,
                "mask": list(self.mask.support), "converged": self.converged}

    @classmethod
    def from_json(cls, obj: dict) -> "RunRecord":
        return cls(obj["dataset_id"], obj["algorithm"], KernelSpec(**obj["kernel"]), obj["B"],
                   obj["C"], obj["seed"], obj["ub"], obj["wall_seconds"],
                   FeatureMask(obj["n"], tuple(obj["mask"])), obj["converged"])


@dataclass(frozen=True)
class ProfilePoint:
    tau: float
    gamma_per_algorithm: dict[str, float]


# --- running algorithms -------------------------------------------------------

def run_algorithm(name: str, p: ProblemSpec, seed: int, cfg: LsConfig | None = None,
                  start: FeatureMask | None = None, workers: int = 1) -> Incumbent:
    """Run one algorithm from a seeded random start (RFE and brute force ignore the seed)."""
    name = CLI_NAMES.get(name, name)
    if name not in ALGORITHMS:
        raise DomainError(f"unknown algorithm {name!r}")
    if cfg is None:
        cfg = LsConfig(stall_window=DEFAULT_OPT_WINDOW.get(name, 5))
    cfg = replace(cfg, seed=seed, workers=workers)
    if name == "RFE1":
        return rfe(p, recompute_alpha=False)
    if name == "RFE2":
        return rfe(p, recompute_alpha=True, workers=workers)
    if name == "BRUTE_FORCE":
        return brute_force_minlp(p, workers=workers)
    start = start or random_start(p, seed)
    if name == "LS":
        return ls(p, start, evaluator=Evaluator(p, workers))
    if name == "LS_STAR":
        return ls_star(p, start, cfg)
    if name == "DEC_SUB_LIGHT":
        return dec_sub_light(p, start, cfg)
    return naive_alternation(p, start)


def timed_run(dataset_id: str, name: str, p: ProblemSpec, seed: int, cfg: LsConfig | None = None,
              workers: int = 1) -> tuple[RunRecord, Incumbent]:
    t0 = time.perf_counter()
    inc = run_algorithm(name, p, seed, cfg, workers=workers)
    elapsed = time.perf_counter() - t0
    rec = RunRecord(dataset_id, CLI_NAMES.get(name, name), p.kernel, p.B, p.C, seed, inc.ub,
                    elapsed, inc.mask, inc.alpha.converged)
    return rec, inc


# --- experiment configs -------------------------------------------------------

@dataclass
class DatasetConfig:
    name: str
    path: str | None = None
    format: str = "csv"
    label_col: str = "label"
    positive_label: str | None = None
    m: int | None = None
    subsample_seed: int = 0
    standardize: bool = True

    def load(self) -> Dataset:
        if self.path is None:
            d = load_bundled(self.name)
        elif self.format == "sparse":
            d = load_sparse(self.path)
        else:
            d = load_csv(self.path, self.label_col, self.positive_label)
        if self.standardize:
            d = standardize(d)
        if self.m is not None:
            d = subsample(d, self.m, self.subsample_seed)
        return d

    @property
    def dataset_id(self) -> str:
        return self.name if self.m is None else f"{self.name}@m={self.m}"


@dataclass
class ExperimentConfig:
    datasets: list[DatasetConfig]
    algorithms: list[str]
    kernels: list[KernelSpec]
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    C: float = 10.0
    B: int | None = None
    samples: int = 500
    pool: int = 200
    opt_window: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_OPT_WINDOW))
    p: int | None = None
    workers: int = 1
    parallel_runs: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("<root>: expected an object")
        known = set(cls.__dataclass_fields__) | {"n_seeds"}
        for key in raw:
            if key not in known:
                raise ConfigError(f"{key}: unknown field")
        for req in ("datasets", "algorithms", "kernels"):
            if not raw.get(req):
                raise ConfigError(f"{req}: required, non-empty list")
        datasets = []
        for i, ds in enumerate(raw["datasets"]):
            if isinstance(ds, str):
                ds = {"name": ds}
            try:
                datasets.append(DatasetConfig(**ds))
            except TypeError as exc:
                raise ConfigError(f"datasets[{i}]: {exc}") from None
            if datasets[-1].format not in ("csv", "sparse"):
                raise ConfigError(f"datasets[{i}].format: must be 'csv' or 'sparse'")
            if datasets[-1].m is not None and datasets[-1].m < 2:
                raise ConfigError(f"datasets[{i}].m: must be >= 2")
        algorithms = []
        for i, a in enumerate(raw["algorithms"]):
            name = CLI_NAMES.get(a, a)
            if name not in ALGORITHMS:
                raise ConfigError(f"algorithms[{i}]: unknown algorithm {a!r}")
            algorithms.append(name)
        kernels = []
        for i, k in enumerate(raw["kernels"]):
            try:
                kernels.append(KernelSpec(**k))
            except (TypeError, DomainError) as exc:
                raise ConfigError(f"kernels[{i}]: {exc}") from None
        rest = {k: v for k, v in raw.items()
                if k not in ("datasets", "algorithms", "kernels", "n_seeds")}
        if "n_seeds" in raw:
            rest.setdefault("seeds", list(range(int(raw["n_seeds"]))))
        cfg = cls(datasets, algorithms, kernels, **rest)
        if not cfg.seeds:
            raise ConfigError("seeds: required, non-empty list")
        for key in ("C",):
            if not cfg.C > 0:
                raise ConfigError(f"{key}: must be positive")
        for key in ("samples", "pool", "workers", "parallel_runs"):
            if int(getattr(cfg, key)) < 1:
                raise ConfigError(f"{key}: must be >= 1")
        for alg, w in cfg.opt_window.items():
            if w < 1:
                raise ConfigError(f"opt_window.{alg}: must be >= 1")
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<root>: invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    def ls_config(self, algorithm: str) -> LsConfig:
        window = self.opt_window.get(algorithm, DEFAULT_OPT_WINDOW.get(algorithm, 5))
        return LsConfig(samples_per_round=self.samples, pool_size=self.pool,
                        stall_window=window, p=self.p)


def append_records(path, records) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def read_records(path) -> list[RunRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(RunRecord.from_json(json.loads(line)))
    return out


def run_experiment(config: ExperimentConfig, results_path=None) -> list[RunRecord]:
    """Cross product datasets x kernels x algorithms x seeds; records come back in that order.

    Decomposition algorithms are skipped (with a warning) for Gaussian kernels.
    """
    jobs = []
    for dcfg in config.datasets:
        d = dcfg.load()
        for kernel in config.kernels:
            p = ProblemSpec(d, kernel, config.C, config.B)
            for alg in config.algorithms:
                if alg in POLY_ONLY and not kernel.is_polynomial:
                    log.warning("skipping %s with %s: polynomial kernel required",
                                alg, kernel.describe())
                    continue
                for seed in config.seeds:
                    jobs.append((dcfg.dataset_id, alg, p, seed))
    lock = threading.Lock()

    def run(job):
        dataset_id, alg, p, seed = job
        rec, _ = timed_run(dataset_id, alg, p, seed, config.ls_config(alg), config.workers)
        if results_path is not None:
            with lock:
                append_records(results_path, [rec])
        log.info("%s %s seed=%d ub=%.6g %.2fs", dataset_id, alg, seed, rec.ub, rec.wall_seconds)
        return rec

    if config.parallel_runs > 1:
        with ThreadPoolExecutor(config.parallel_runs) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]


# --- performance profiles -----------------------------------------------------

def best_performance(records) -> dict[str, dict[str, float]]:
    """instance -> algorithm -> best (lowest) ub across seeds."""
    perf: dict[str, dict[str, float]] = {}
    for r in records:
        row = perf.setdefault(r.instance, {})
        row[r.algorithm] = min(r.ub, row.get(r.algorithm, np.inf))
    return perf


def performance_ratios(records) -> dict[str, dict[str, float]]:
    """algorithm -> instance -> eta = perf / best perf (objectives are <= 0, so eta lies in [0, 1])."""
    records = list(records)
    if not records:
        raise DomainError("no records to profile")
    perf = best_performance(records)
    algorithms = sorted({r.algorithm for r in records}, key=ALGORITHMS.index)
    eta: dict[str, dict[str, float]] = {a: {} for a in algorithms}
    for inst, row in perf.items():
        ref = min(row.values())
        for a in algorithms:
            if a not in row:
                eta[a][inst] = 0.0
            elif ref == 0.0:
                eta[a][inst] = 1.0
            else:
                eta[a][inst] = row[a] / ref
    return eta


def performance_profiles(records, n_tau: int = 200) -> list[ProfilePoint]:
    eta = performance_ratios(records)
    taus = np.linspace(0.0, 1.0, n_tau)
    points = []
    for tau in taus:
        gammas = {a: float(np.mean([v >= tau for v in by_inst.values()]))
                  for a, by_inst in eta.items()}
        points.append(ProfilePoint(float(tau), gammas))
    return points


def write_profile_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "algorithm", "gamma"])
        for pt in points:
            for a, g in pt.gamma_per_algorithm.items():
                w.writerow([repr(pt.tau), a, repr(g)])


def write_runs_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", "dataset", "seed", "ub", "seconds"])
        for r in records:
            w.writerow([r.algorithm, r.instance, r.seed, repr(r.ub), repr(r.wall_seconds)])
