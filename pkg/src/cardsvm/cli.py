"""Command line: ``cardsvm [train flags]``, ``cardsvm bench CONFIG``, ``cardsvm profiles RESULTS``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bench import (CLI_NAMES, POLY_ONLY, ConfigError, ExperimentConfig, append_records,
                    performance_profiles, read_records, run_experiment, timed_run,
                    write_profile_csv, write_runs_csv)
from .dataset import (BUNDLED, load_bundled, load_csv, load_sparse, standardize, subsample,
                      train_test_split)
from .decomposition import POLY_REQUIRED
from .errors import DomainError, FormatError
from .kernels import KernelSpec
from .local_search import LsConfig
from .problem import ProblemSpec
from .smo import SvmModel

log = logging.getLogger("cardsvm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _train_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cardsvm", description="Train a kernel SVM using exactly B input features.")
    ap.add_argument("--data", default="toy",
                    help=f"data file, or a bundled name: {', '.join(sorted(BUNDLED))}")
    ap.add_argument("--format", choices=["csv", "sparse"], default=None,
                    help="file format (default: from extension; .svm/.libsvm/.txt are sparse)")
    ap.add_argument("--label-col", default="label")
    ap.add_argument("--positive-label", default=None)
    ap.add_argument("--no-standardize", action="store_true")
    ap.add_argument("--subsample", type=int, default=None, metavar="M")
    ap.add_argument("--algo", choices=sorted(CLI_NAMES), default="ls_star")
    ap.add_argument("--kernel", choices=["poly", "gaussian"], default="poly")
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--c", type=float, default=0.0, help="polynomial offset")
    ap.add_argument("--C", type=float, default=10.0, help="SVM cost")
    ap.add_argument("--B", type=int, default=None, help="features to keep (default floor(n/2))")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--starts", type=int, default=1, help="random starts (seeds seed..seed+starts-1)")
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--pool", type=int, default=200)
    ap.add_argument("--opt-window", type=int, default=None)
    ap.add_argument("--p", type=int, default=None, help="max swaps in sampled moves")
    ap.add_argument("--out", default=None, help="directory for model and result files")
    ap.add_argument("--test-split", type=float, default=None, metavar="FRAC")
    ap.add_argument("--parallel-runs", type=int, default=1)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _load(args):
    if args.data in BUNDLED and not Path(args.data).exists():
        return load_bundled(args.data)
    path = Path(args.data)
    if not path.exists():
        raise DomainError(f"no such data file: {path}")
    fmt = args.format or ("sparse" if path.suffix in (".svm", ".libsvm", ".txt") else "csv")
    if fmt == "sparse":
        return load_sparse(path)
    return load_csv(path, args.label_col, args.positive_label)


def _kernel(args) -> KernelSpec:
    if args.kernel == "poly":
        return KernelSpec.polynomial(args.degree, args.gamma, args.c)
    return KernelSpec.gaussian(args.gamma)


def train_cli(argv) -> int:
    args = _train_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    algo = CLI_NAMES[args.algo]
    kernel = _kernel(args)
    if algo in POLY_ONLY and not kernel.is_polynomial:
        raise DomainError(POLY_REQUIRED)
    if args.starts < 1 or args.parallel_runs < 1:
        raise DomainError("--starts and --parallel-runs must be >= 1")
    d = _load(args)
    if not args.no_standardize:
        d = standardize(d)
    if args.subsample is not None:
        d = subsample(d, args.subsample, args.seed)
    test = None
    if args.test_split is not None:
        d, test = train_test_split(d, args.test_split, args.seed)
    p = ProblemSpec(d, kernel, args.C, args.B)
    window = args.opt_window or (10 if algo == "DEC_SUB_LIGHT" else 5)
    cfg = LsConfig(samples_per_round=args.samples, pool_size=args.pool, stall_window=window, p=args.p)
    seeds = list(range(args.seed, args.seed + args.starts))
    source = d.source_id or Path(args.data).stem

    def one(seed):
        return timed_run(source, algo, p, seed, cfg)

    if args.parallel_runs > 1:
        with ThreadPoolExecutor(args.parallel_runs) as pool:
            runs = list(pool.map(one, seeds))
    else:
        runs = [one(s) for s in seeds]
    rec, best = min(runs, key=lambda t: (t[1].ub, t[1].mask.sort_key()))
    model = SvmModel.from_solution(d, kernel, best.mask, best.alpha, p.C)
    names = [d.feature_names[j] for j in best.mask.support]
    print(f"algorithm: {args.algo}  kernel: {kernel.describe()}  C={p.C:g}  B={p.B}")
    print(f"selected features ({len(names)}): {', '.join(names)}")
    print(f"dual objective: {best.ub:.6f}")
    print(f"train accuracy: {np.mean(model.predict(d.features) == d.labels):.4f}")
    if test is not None:
        print(f"test accuracy: {np.mean(model.predict(test.features) == test.labels):.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        records = [r for r, _ in runs]
        append_records(out / "results.jsonl", records)
        write_runs_csv(records, out / "runs.csv")
        (out / "model.json").write_text(json.dumps(_model_json(model, d.feature_names), indent=1))
        print(f"wrote {out / 'model.json'}, {out / 'results.jsonl'}, {out / 'runs.csv'}")
    return 0


def _model_json(model: SvmModel, names) -> dict:
    return {"kernel": {"kind": model.spec.kind, "gamma": model.spec.gamma, "c": model.spec.c,
                       "degree": model.spec.degree},
            "selected": list(model.mask.support), "n": model.mask.n,
            "selected_names": [names[j] for j in model.mask.support],
            "bias": model.bias, "support_index": model.support_index.tolist(),
            "support_coef": model.support_coef.tolist(),
            "support_rows": model.support_rows.tolist()}


def bench_cli(argv) -> int:
    ap = _Parser(prog="cardsvm bench", description="Run an experiment config (JSON).")
    ap.add_argument("config")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--parallel-runs", type=int, default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    cfg = ExperimentConfig.from_file(args.config)
    if args.parallel_runs:
        cfg.parallel_runs = args.parallel_runs
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = run_experiment(cfg, out / "results.jsonl")
    write_runs_csv(records, out / "runs.csv")
    write_profile_csv(performance_profiles(records), out / "profiles.csv")
    print(f"{len(records)} runs -> {out}")
    return 0


def profiles_cli(argv) -> int:
    ap = _Parser(prog="cardsvm profiles", description="Performance profiles from a results file.")
    ap.add_argument("results")
    ap.add_argument("--out", required=True, help="CSV path")
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args(argv)
    write_profile_csv(performance_profiles(read_records(args.results), args.points), args.out)
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    commands = {"bench": bench_cli, "profiles": profiles_cli}
    try:
        if argv and argv[0] in commands:
            return commands[argv[0]](argv[1:])
        return train_cli(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ConfigError, DomainError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
