"""The cardinality-constrained dual SVM: problem data, f(alpha, beta), and fix-mask-solve-alpha."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DomainError
from .kernels import FeatureMask, KernelSpec, build_q, gram_on_columns
from .smo import DualSolution, solve_dual

IMPROVEMENT_TOL = 1e-9
BRUTE_FORCE_BUDGET = 1_000_000


@dataclass(frozen=True)
class ProblemSpec:
    dataset: Dataset
    kernel: KernelSpec
    C: float = 10.0
    B: int | None = None
    tol: float = 1e-6
    max_iter: int = 1_000_000

    def __post_init__(self):
        n = self.dataset.n
        if self.B is None:
            object.__setattr__(self, "B", max(1, n // 2))
        if not 1 <= self.B <= n:
            raise DomainError(f"B must lie in [1, {n}], got {self.B}")
        if not self.C > 0:
            raise DomainError(f"C must be positive, got {self.C}")

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def m(self) -> int:
        return self.dataset.m

    def check_mask(self, mask: FeatureMask) -> None:
        if mask.n != self.n or mask.cardinality != self.B:
            raise DomainError(f"infeasible mask: n={mask.n}, |mask|={mask.cardinality}; "
                              f"need n={self.n}, |mask|={self.B}")


@dataclass(frozen=True)
class Incumbent:
    alpha: DualSolution
    mask: FeatureMask
    ub: float

    def better_than(self, other: "Incumbent | None", tol: float = IMPROVEMENT_TOL) -> bool:
        return other is None or self.ub < other.ub - tol

    def rank_key(self):
        return (self.ub, self.mask.sort_key())


def best_of(incumbents) -> Incumbent | None:
    """Lowest ub; exact ties go to the lexicographically smallest mask."""
    return min(incumbents, key=Incumbent.rank_key, default=None)


def evaluate_f(p: ProblemSpec, alpha, mask: FeatureMask) -> float:
    a = np.asarray(alpha, dtype=float)
    if a.shape != (p.m,):
        raise DomainError(f"alpha must have length {p.m}")
    if mask.n != p.n:
        raise DomainError(f"mask length {mask.n} does not match n={p.n}")
    w = a * p.dataset.labels
    k = gram_on_columns(p.dataset.features, p.kernel, mask.support)
    return float(0.5 * w @ k @ w - a.sum())


def solve_for_mask(p: ProblemSpec, mask: FeatureMask) -> Incumbent:
    p.check_mask(mask)
    sol = solve_dual(build_q(p.dataset, p.kernel, mask), p.dataset.labels, p.C, p.tol, p.max_iter)
    return Incumbent(sol, mask, sol.objective)


@dataclass
class Evaluator:
    """Memoizing front end to :func:`solve_for_mask` for one search run.

    ``evaluate`` solves the uncached masks of a batch (concurrently when
    ``workers > 1``) and returns results in input order, so callers reduce
    deterministically regardless of the worker count.
    """

    problem: ProblemSpec
    workers: int = 1
    cache: dict = field(default_factory=dict)
    solves: int = 0
    solved_masks: list = field(default_factory=list)

    def __call__(self, mask: FeatureMask) -> Incumbent:
        return self.evaluate([mask])[0]

    def evaluate(self, masks) -> list[Incumbent]:
        masks = list(masks)
        todo = list(dict.fromkeys(m for m in masks if m not in self.cache))
        if todo:
            if self.workers > 1 and len(todo) > 1:
                with ThreadPoolExecutor(self.workers) as pool:
                    results = list(pool.map(lambda mk: solve_for_mask(self.problem, mk), todo))
            else:
                results = [solve_for_mask(self.problem, mk) for mk in todo]
            for mk, inc in zip(todo, results):
                self.cache[mk] = inc
            self.solves += len(todo)
            self.solved_masks.extend(todo)
        return [self.cache[m] for m in masks]


def all_masks(n: int, B: int):
    for sup in itertools.combinations(range(n), B):
        yield FeatureMask(n, sup)


def brute_force_minlp(p: ProblemSpec, budget: int = BRUTE_FORCE_BUDGET, workers: int = 1) -> Incumbent:
    count = math.comb(p.n, p.B)
    if count > budget:
        raise DomainError(f"brute force needs C({p.n},{p.B}) = {count} solves, "
                          f"over the budget of {budget}")
    ev = Evaluator(p, workers)
    return best_of(ev.evaluate(all_masks(p.n, p.B)))


def random_start(p: ProblemSpec, seed: int) -> FeatureMask:
    return FeatureMask.random(p.n, p.B, np.random.default_rng(seed))
