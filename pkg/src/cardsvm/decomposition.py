"""Alternating alpha/beta decomposition for polynomial kernels (DecSubLight*) and naive alternation."""
from __future__ import annotations

import bisect
import logging

import numpy as np

from .errors import DomainError
from .kernels import FeatureMask
from .local_search import LsConfig, SearchTrace, TabuList, n1_neighbors
from .problem import Evaluator, Incumbent, ProblemSpec, best_of
from .submodular import SetFunctionContext, solve_beta_subproblem

log = logging.getLogger(__name__)

POLY_REQUIRED = "decomposition requires a polynomial kernel"


class SolutionPool:
    """Incumbents kept sorted by (ub, mask); bounded, one entry per mask."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise DomainError("pool capacity must be >= 1")
        self.capacity = capacity
        self.entries: list[Incumbent] = []
        self._keys: list = []
        self._masks: set[FeatureMask] = set()

    def add(self, inc: Incumbent) -> bool:
        if inc.mask in self._masks:
            return False
        key = inc.rank_key()
        pos = bisect.bisect_right(self._keys, key)
        self._keys.insert(pos, key)
        self.entries.insert(pos, inc)
        self._masks.add(inc.mask)
        if len(self.entries) > self.capacity:
            self._keys.pop()
            self._masks.discard(self.entries.pop().mask)
        return True

    def pop_best(self) -> Incumbent:
        self._keys.pop(0)
        inc = self.entries.pop(0)
        self._masks.discard(inc.mask)
        return inc

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, mask: FeatureMask) -> bool:
        return mask in self._masks


class _FixedAlphaScorer:
    """f(alpha, beta) at fixed alpha, updating the masked inner-product matrix per swap."""

    def __init__(self, p: ProblemSpec, alpha: np.ndarray):
        self.spec = p.kernel
        self.x = p.dataset.features
        w = alpha * p.dataset.labels
        self.weights = np.outer(w, w)
        self.alpha_sum = float(alpha.sum())
        self.scores: dict[FeatureMask, float] = {}

    def _inner(self, cols):
        xs = self.x[:, list(cols)]
        return self.spec.gamma * (xs @ xs.T)

    def _f(self, inner) -> float:
        k = (inner + self.spec.c) ** self.spec.degree
        return 0.5 * float(np.sum(self.weights * k)) - self.alpha_sum

    def score(self, mask: FeatureMask) -> float:
        if mask not in self.scores:
            self.scores[mask] = self._f(self._inner(mask.support))
        return self.scores[mask]

    def score_neighbors(self, mask: FeatureMask) -> list[tuple[float, FeatureMask]]:
        base = self._inner(mask.support)
        g = self.spec.gamma
        out = []
        for nb in n1_neighbors(mask):
            if nb not in self.scores:
                (i,) = set(mask.support) - set(nb.support)
                (j,) = set(nb.support) - set(mask.support)
                xi, xj = self.x[:, i], self.x[:, j]
                inner = base - g * np.outer(xi, xi) + g * np.outer(xj, xj)
                self.scores[nb] = self._f(inner)
            out.append((self.scores[nb], nb))
        return out

    def descend(self, start: FeatureMask, max_moves: int, tol: float) -> None:
        current, value = start, self.score(start)
        for _ in range(max_moves):
            scored = self.score_neighbors(current)
            if not scored:
                break
            v, nb = min(scored, key=lambda t: (t[0], t[1].sort_key()))
            if not v < value - tol:
                break
            current, value = nb, v

    def best(self, k: int) -> list[FeatureMask]:
        ranked = sorted(self.scores.items(), key=lambda t: (t[1], t[0].sort_key()))
        return [mask for mask, _ in ranked[:k]]


def _require_poly(p: ProblemSpec) -> None:
    if not p.kernel.is_polynomial:
        raise DomainError(POLY_REQUIRED)


def dec_sub_light(p: ProblemSpec, start: FeatureMask, cfg: LsConfig | None = None, *,
                  evaluator: Evaluator | None = None, trace: SearchTrace | None = None,
                  tabu: TabuList | None = None) -> Incumbent:
    """Alternate a lazy-greedy beta step (plus fixed-alpha LS pool) with dual re-solves.

    ``cfg.stall_window`` idle rounds end the run (10 is the usual setting);
    ``cfg.pool_size`` masks are re-solved per round; ``cfg.max_rounds`` caps it.
    """
    _require_poly(p)
    cfg = cfg or LsConfig(stall_window=10)
    p.check_mask(start)
    ev = evaluator or Evaluator(p, cfg.workers)
    tabu = tabu if tabu is not None else TabuList()
    explored = SolutionPool(10 * cfg.pool_size)

    current = ev(start)
    tabu.insert(start)
    best = current
    if trace is not None:
        trace.record(best)
        trace.positions.append(start)
    stall = 0
    for rnd in range(cfg.max_rounds):
        ctx = SetFunctionContext(p.dataset, p.kernel, current.alpha.alpha)
        greedy_mask = solve_beta_subproblem(ctx, p.B)
        scorer = _FixedAlphaScorer(p, current.alpha.alpha)
        scorer.score(greedy_mask)
        scorer.descend(greedy_mask, p.n, cfg.improvement_tol)
        fresh = [mk for mk in scorer.best(cfg.pool_size) if mk not in tabu]
        improved = False
        for inc in ev.evaluate(fresh):
            tabu.insert(inc.mask)
            explored.add(inc)
            if inc.better_than(best, cfg.improvement_tol):
                best = inc
                improved = True
        if trace is not None:
            trace.record(best)
        stall = 0 if improved else stall + 1
        if stall >= cfg.stall_window or not explored:
            break
        current = explored.pop_best()
        if trace is not None:
            trace.positions.append(current.mask)
    log.debug("dec_sub_light: %d rounds, %d solves, best %.6g", rnd + 1, ev.solves, best.ub)
    return best


def naive_alternation(p: ProblemSpec, start: FeatureMask, max_rounds: int = 100, *,
                      evaluator: Evaluator | None = None, trace: SearchTrace | None = None) -> Incumbent:
    """Plain alpha/beta alternation; stops on a repeated mask or after ``max_rounds``."""
    _require_poly(p)
    p.check_mask(start)
    ev = evaluator or Evaluator(p)
    current = ev(start)
    best = current
    seen = {start}
    if trace is not None:
        trace.record(best)
        trace.positions.append(start)
    for _ in range(max_rounds):
        ctx = SetFunctionContext(p.dataset, p.kernel, current.alpha.alpha)
        nxt = solve_beta_subproblem(ctx, p.B)
        if nxt in seen:
            break
        seen.add(nxt)
        current = ev(nxt)
        if current.better_than(best):
            best = current
        if trace is not None:
            trace.record(best)
            trace.positions.append(nxt)
    return best
