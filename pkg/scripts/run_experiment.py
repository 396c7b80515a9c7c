"""Multistart benchmark: run a JSON config and print a per-instance summary.

Usage: python scripts/run_experiment.py scripts/configs/multistart_small.json OUT_DIR
"""
import argparse
import logging
from collections import defaultdict
from pathlib import Path

import numpy as np

from cardsvm.bench import (ExperimentConfig, performance_profiles, performance_ratios,
                           run_experiment, write_profile_csv, write_runs_csv)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("out")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
    cfg = ExperimentConfig.from_file(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = run_experiment(cfg, out / "results.jsonl")
    write_runs_csv(records, out / "runs.csv")
    write_profile_csv(performance_profiles(records), out / "profiles.csv")

    by = defaultdict(list)
    for r in records:
        by[(r.instance, r.algorithm)].append(r)
    eta = performance_ratios(records)
    print(f"{'instance':48s} {'algorithm':14s} {'best ub':>12s} {'median ub':>12s} "
          f"{'mean s':>8s} {'eta':>6s}")
    for (inst, alg), rs in sorted(by.items()):
        ubs = [r.ub for r in rs]
        secs = np.mean([r.wall_seconds for r in rs])
        print(f"{inst:48s} {alg:14s} {min(ubs):12.4f} {np.median(ubs):12.4f} {secs:8.2f} "
              f"{eta[alg][inst]:6.3f}")


if __name__ == "__main__":
    main()
