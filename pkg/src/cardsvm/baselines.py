"""Recursive feature elimination wrappers driven by the dual objective."""
from __future__ import annotations

import numpy as np

from .errors import DomainError
from .kernels import FeatureMask
from .problem import Evaluator, Incumbent, ProblemSpec, evaluate_f, solve_for_mask


def _without(mask: FeatureMask, j: int) -> FeatureMask:
    return FeatureMask(mask.n, tuple(k for k in mask.support if k != j))


def rfe(p: ProblemSpec, recompute_alpha: bool, *, workers: int = 1) -> Incumbent:
    """Drop features one at a time until B remain, each time removing the feature whose
    removal gives the smallest dual objective.

    ``recompute_alpha=False`` (RFE1) scores candidates at the alpha of the last
    solve; ``True`` (RFE2) re-solves the dual for every candidate. Ties go to
    the lowest feature index.
    """
    if p.B > p.n:
        raise DomainError("B exceeds the number of features")
    full = FeatureMask.full(p.n)
    relaxed = ProblemSpec(p.dataset, p.kernel, p.C, p.n, p.tol, p.max_iter)
    current = solve_for_mask(relaxed, full)
    mask = full
    for size in range(p.n - 1, p.B - 1, -1):
        step = ProblemSpec(p.dataset, p.kernel, p.C, size, p.tol, p.max_iter)
        candidates = [_without(mask, j) for j in mask.support]
        if recompute_alpha:
            scores = [inc.ub for inc in Evaluator(step, workers).evaluate(candidates)]
        else:
            scores = [evaluate_f(step, current.alpha.alpha, c) for c in candidates]
        mask = candidates[int(np.argmin(scores))]
        current = solve_for_mask(step, mask)
    return current
