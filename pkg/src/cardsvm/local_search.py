"""Swap-neighbourhood local search (LS) and its sampled, tabu-guided extension (LS*)."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .kernels import FeatureMask
from .problem import IMPROVEMENT_TOL, Evaluator, Incumbent, ProblemSpec, best_of

log = logging.getLogger(__name__)


class TabuList:
    """Set of masks keyed by 64-bit fingerprint; collisions resolved by full comparison."""

    def __init__(self, masks=()):
        self._buckets: dict[int, list[FeatureMask]] = {}
        self._size = 0
        for m in masks:
            self.insert(m)

    def insert(self, mask: FeatureMask) -> bool:
        bucket = self._buckets.setdefault(mask.fingerprint, [])
        if mask in bucket:
            return False
        bucket.append(mask)
        self._size += 1
        return True

    def __contains__(self, mask: FeatureMask) -> bool:
        return mask in self._buckets.get(mask.fingerprint, ())

    def __len__(self) -> int:
        return self._size


@dataclass
class LsConfig:
    samples_per_round: int = 500
    pool_size: int = 200
    stall_window: int = 5
    p: int | None = None  # None -> floor(B/2), raised to 2 where the instance allows
    seed: int = 0
    improvement_tol: float = IMPROVEMENT_TOL
    max_rounds: int = 500
    workers: int = 1

    def __post_init__(self):
        if self.samples_per_round < 1:
            raise DomainError("samples_per_round must be >= 1")
        if self.pool_size < 1:
            raise DomainError("pool_size must be >= 1")
        if self.stall_window < 1:
            raise DomainError("stall_window must be >= 1")
        if self.p is not None and self.p < 2:
            raise DomainError(f"p must be >= 2, got {self.p}")

    def flip_budget(self, n: int, B: int) -> int:
        """Largest swap count for N2 on this instance; below 2 means N2 is empty."""
        p = self.p if self.p is not None else max(2, B // 2)
        return min(p, B, n - B)


@dataclass
class SearchTrace:
    """Audit record of a search run."""

    incumbent_ubs: list[float] = field(default_factory=list)
    swept: list[FeatureMask] = field(default_factory=list)
    positions: list[FeatureMask] = field(default_factory=list)

    def record(self, inc: Incumbent) -> None:
        if not self.incumbent_ubs or inc.ub != self.incumbent_ubs[-1]:
            self.incumbent_ubs.append(inc.ub)


def n1_neighbors(mask: FeatureMask) -> list[FeatureMask]:
    """All single swaps, ordered by removed index then added index."""
    off = mask.complement
    return [mask.swap((i,), (j,)) for i in mask.support for j in off]


def ls(p: ProblemSpec, start: FeatureMask, tabu: TabuList | None = None, *,
       evaluator: Evaluator | None = None, trace: SearchTrace | None = None,
       improvement_tol: float = IMPROVEMENT_TOL) -> Incumbent:
    """Best-improvement descent over N1 until no neighbour is strictly better.

    With a tabu list, masks already in it are not re-evaluated and every swept
    position is added to it; a tabu start returns without sweeping.
    """
    p.check_mask(start)
    ev = evaluator or Evaluator(p)
    current = ev(start)
    if trace is not None:
        trace.record(current)
        trace.positions.append(start)
    while True:
        if tabu is not None and current.mask in tabu:
            break
        candidates = [nb for nb in n1_neighbors(current.mask) if tabu is None or nb not in tabu]
        if tabu is not None:
            tabu.insert(current.mask)
        if trace is not None:
            trace.swept.append(current.mask)
        best = best_of(ev.evaluate(candidates))
        if best is None or not best.better_than(current, improvement_tol):
            break
        current = best
        if trace is not None:
            trace.record(current)
            trace.positions.append(current.mask)
    return current


def sample_n2(mask: FeatureMask, cfg: LsConfig, rng: np.random.Generator) -> list[FeatureMask]:
    """Draw ``cfg.samples_per_round`` masks at swap distance 2..p, de-duplicated in draw order."""
    p = cfg.flip_budget(mask.n, mask.cardinality)
    if p < 2:
        return []
    on = np.array(mask.support)
    off = np.array(mask.complement)
    out: dict[FeatureMask, None] = {}
    for _ in range(cfg.samples_per_round):
        t = int(rng.integers(2, p + 1))
        drop = rng.choice(on, t, replace=False)
        add = rng.choice(off, t, replace=False)
        out.setdefault(mask.swap(drop.tolist(), add.tolist()), None)
    return list(out)


def ls_star(p: ProblemSpec, start: FeatureMask, cfg: LsConfig | None = None, *,
            evaluator: Evaluator | None = None, trace: SearchTrace | None = None) -> Incumbent:
    """LS restarted from the best non-tabu N2 sample until ``stall_window`` idle rounds."""
    cfg = cfg or LsConfig()
    p.check_mask(start)
    ev = evaluator or Evaluator(p, cfg.workers)
    rng = np.random.default_rng(cfg.seed)
    tabu = TabuList()
    best: Incumbent | None = None
    position = start
    stall = 0
    for rnd in range(cfg.max_rounds):
        inner = SearchTrace() if trace is not None else None
        local = ls(p, position, tabu, evaluator=ev, trace=inner,
                   improvement_tol=cfg.improvement_tol)
        improved = local.better_than(best, cfg.improvement_tol)
        if improved:
            best = local
        if trace is not None:
            trace.swept.extend(inner.swept)
            trace.positions.extend(inner.positions)
            trace.record(best)
        samples = [s for s in sample_n2(local.mask, cfg, rng) if s not in tabu]
        results = ev.evaluate(samples)
        for inc in results:
            if inc.better_than(best, cfg.improvement_tol):
                best = inc
                improved = True
        if trace is not None:
            trace.record(best)
        stall = 0 if improved else stall + 1
        if stall >= cfg.stall_window or not results:
            break
        position = best_of(results).mask
    log.debug("ls_star: %d rounds, %d solves, best %.6g", rnd + 1, ev.solves, best.ub)
    return best
