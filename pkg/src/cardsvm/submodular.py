"""Fixed-alpha set functions over feature subsets, greedy maximizers and modularity certifiers.

For a fixed dual vector the beta-subproblem value of a feature subset S is

    F(S) = sum_ih a_ih k(x_S^i, x_S^h),   a_ih = alpha_i alpha_h y_i y_h,

and with a polynomial kernel H(S) = lambda - F([n] \\ S), lambda = F([n]), is
monotone submodular, so minimizing F under |S| = B becomes maximizing H under
|S| <= n - B.

F(S) is evaluated as the quadratic form of the kernel matrix on the columns in
S, including S = {} (where the kernel is c**d or 1). That matches the F({}) = 0
convention whenever y'alpha = 0, which holds for every dual-feasible alpha, and
keeps F(S) equal to its homogenized counterpart F~(S + {0}) for every S.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .dataset import Dataset
from .errors import DomainError
from .kernels import FeatureMask, KernelSpec, gram_on_columns


@dataclass(frozen=True)
class SetFunctionContext:
    dataset: Dataset
    spec: KernelSpec
    alpha_fixed: np.ndarray
    weights: np.ndarray = field(init=False, repr=False)
    signed_alpha: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.alpha_fixed, dtype=float)
        if a.shape != (self.dataset.m,):
            raise DomainError(f"alpha must have length {self.dataset.m}")
        w = a * self.dataset.labels
        a.setflags(write=False)
        object.__setattr__(self, "alpha_fixed", a)
        object.__setattr__(self, "signed_alpha", w)
        object.__setattr__(self, "weights", np.outer(w, w))

    @property
    def n(self) -> int:
        return self.dataset.n

    def require_polynomial(self) -> None:
        if not self.spec.is_polynomial:
            raise DomainError("H and lambda are defined for polynomial kernels only")


def _subset(ctx: SetFunctionContext, S) -> tuple[int, ...]:
    S = tuple(sorted(set(int(j) for j in S)))
    if S and (S[0] < 0 or S[-1] >= ctx.n):
        raise DomainError(f"subset {S} not within [0, {ctx.n})")
    return S


def f_value(ctx: SetFunctionContext, S) -> float:
    k = gram_on_columns(ctx.dataset.features, ctx.spec, _subset(ctx, S))
    return float(np.sum(ctx.weights * k))


def lambda_value(ctx: SetFunctionContext) -> float:
    ctx.require_polynomial()
    return f_value(ctx, range(ctx.n))


def h_value(ctx: SetFunctionContext, S) -> float:
    ctx.require_polynomial()
    S = set(_subset(ctx, S))
    rest = [j for j in range(ctx.n) if j not in S]
    return lambda_value(ctx) - f_value(ctx, rest)


class GreedyResult(NamedTuple):
    subset: tuple[int, ...]
    value: float
    evaluations: int


class _GainOracle:
    """Marginal gains of H with the current chosen set, via the complement's inner products."""

    def __init__(self, ctx: SetFunctionContext):
        ctx.require_polynomial()
        self.ctx = ctx
        self.x = ctx.dataset.features
        self.spec = ctx.spec
        self.chosen: list[int] = []
        self.evaluations = 0
        self._reset_rest()

    def _reset_rest(self):
        rest = [j for j in range(self.ctx.n) if j not in self.chosen]
        xr = self.x[:, rest]
        self.rest_inner = self.spec.gamma * (xr @ xr.T)
        self.rest_value = self._value(self.rest_inner)

    def _value(self, inner):
        return float(np.sum(self.ctx.weights * (inner + self.spec.c) ** self.spec.degree))

    def gain(self, j: int) -> float:
        self.evaluations += 1
        xj = self.x[:, j]
        inner = self.rest_inner - self.spec.gamma * np.outer(xj, xj)
        return self.rest_value - self._value(inner)

    def accept(self, j: int) -> None:
        self.chosen.append(j)
        self._reset_rest()


def _check_k(ctx, k):
    if not 0 <= k <= ctx.n:
        raise DomainError(f"k must lie in [0, {ctx.n}], got {k}")


def simple_greedy_max(ctx: SetFunctionContext, k: int) -> GreedyResult:
    """Plain greedy on H: each round adds the feature of largest gain (lowest index on ties)."""
    _check_k(ctx, k)
    oracle = _GainOracle(ctx)
    remaining = list(range(ctx.n))
    for _ in range(k):
        gains = [oracle.gain(j) for j in remaining]
        best = remaining[int(np.argmax(gains))]
        oracle.accept(best)
        remaining.remove(best)
    chosen = tuple(sorted(oracle.chosen))
    return GreedyResult(chosen, h_value(ctx, chosen), oracle.evaluations)


def _run_lazy(ctx: SetFunctionContext, k: int) -> _GainOracle:
    _check_k(ctx, k)
    oracle = _GainOracle(ctx)
    if k == 0:
        return oracle
    heap = [(-oracle.gain(j), j, 0) for j in range(ctx.n)]
    heapq.heapify(heap)
    for rnd in range(k):
        while True:
            _, j, fresh = heapq.heappop(heap)
            if fresh == rnd:
                oracle.accept(j)
                break
            heapq.heappush(heap, (-oracle.gain(j), j, rnd))
    return oracle


def lazy_greedy_max(ctx: SetFunctionContext, k: int) -> GreedyResult:
    """Accelerated greedy: stale gains upper-bound fresh ones, so only the heap top is refreshed."""
    oracle = _run_lazy(ctx, k)
    chosen = tuple(sorted(oracle.chosen))
    return GreedyResult(chosen, h_value(ctx, chosen), oracle.evaluations)


def greedy_order(ctx: SetFunctionContext, k: int) -> list[int]:
    """Features in the order the lazy greedy accepted them."""
    return list(_run_lazy(ctx, k).chosen)


def solve_beta_subproblem(ctx: SetFunctionContext, B: int) -> FeatureMask:
    """Mask of size B minimizing F approximately: complement of the lazy-greedy H maximizer."""
    if not 0 <= B <= ctx.n:
        raise DomainError(f"B must lie in [0, {ctx.n}], got {B}")
    dropped = set(lazy_greedy_max(ctx, ctx.n - B).subset)
    return FeatureMask(ctx.n, tuple(j for j in range(ctx.n) if j not in dropped))


# --- certifiers -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    A: tuple[int, ...]
    B: tuple[int, ...]
    e: int
    delta_A: float
    delta_B: float

    @property
    def amount(self) -> float:
        return abs(self.delta_A - self.delta_B)


@dataclass
class ModularityReport:
    """Outcome of checking increments Delta_e(A) against Delta_e(B) for A within B, e outside B."""

    exhaustive: bool
    checked: int = 0
    super_violations: list[Violation] = field(default_factory=list)
    sub_violations: list[Violation] = field(default_factory=list)
    monotone_violations: list[tuple[tuple[int, ...], tuple[int, ...], float]] = field(default_factory=list)
    worst_super: Violation | None = None
    worst_sub: Violation | None = None

    @property
    def supermodular(self) -> bool:
        return not self.super_violations

    @property
    def submodular(self) -> bool:
        return not self.sub_violations

    @property
    def monotone(self) -> bool:
        return not self.monotone_violations

    @property
    def passed(self) -> bool:
        return self.supermodular and self.monotone

    def find(self, A, B, e, kind: str = "super") -> Violation | None:
        pool = self.super_violations if kind == "super" else self.sub_violations
        key = (tuple(sorted(A)), tuple(sorted(B)), e)
        return next((v for v in pool if (v.A, v.B, v.e) == key), None)


def _bits_to_set(mask: int) -> tuple[int, ...]:
    return tuple(j for j in range(mask.bit_length()) if mask >> j & 1)


def _slack(tol, relative, *vals):
    return tol * max(1.0, *(abs(v) for v in vals)) if relative else tol


MAX_LISTED = 10_000


def certify_set_function(fn: Callable[[tuple[int, ...]], float], n: int, tol: float = 1e-9, *,
                         relative: bool = True, exhaustive_limit: int = 12, samples: int = 200,
                         rng: np.random.Generator | None = None) -> ModularityReport:
    """Check monotonicity and both modularity directions of a set function on [n]."""
    if n <= exhaustive_limit:
        values = [float(fn(_bits_to_set(s))) for s in range(1 << n)]
        report = ModularityReport(exhaustive=True)
        triples = _exhaustive_triples(n)
        get = values.__getitem__
    else:
        rng = rng or np.random.default_rng(0)
        report = ModularityReport(exhaustive=False)
        cache: dict[int, float] = {}

        def get(s):
            if s not in cache:
                cache[s] = float(fn(_bits_to_set(s)))
            return cache[s]

        triples = _sampled_triples(n, samples, rng)
    for A, B, e, first in triples:
        fa, fb = get(A), get(B)
        if first and fa > fb + _slack(tol, relative, fa, fb):
            if len(report.monotone_violations) < MAX_LISTED:
                report.monotone_violations.append((_bits_to_set(A), _bits_to_set(B), fa - fb))
        if e < 0:
            continue
        report.checked += 1
        da = get(A | 1 << e) - fa
        db = get(B | 1 << e) - fb
        slack = _slack(tol, relative, da, db)
        if da > db + slack:
            v = Violation(_bits_to_set(A), _bits_to_set(B), e, da, db)
            if len(report.super_violations) < MAX_LISTED:
                report.super_violations.append(v)
            if report.worst_super is None or v.amount > report.worst_super.amount:
                report.worst_super = v
        if da < db - slack:
            v = Violation(_bits_to_set(A), _bits_to_set(B), e, da, db)
            if len(report.sub_violations) < MAX_LISTED:
                report.sub_violations.append(v)
            if report.worst_sub is None or v.amount > report.worst_sub.amount:
                report.worst_sub = v
    return report


def _exhaustive_triples(n: int):
    # (A, B, e, first): every A within B and e outside B; e = -1 when B is the full set.
    # ``first`` flags one triple per (A, B) pair for the monotonicity check.
    for B in range(1 << n):
        outside = [e for e in range(n) if not B >> e & 1] or [-1]
        A = B
        while True:
            for k, e in enumerate(outside):
                yield A, B, e, k == 0
            if A == 0:
                break
            A = (A - 1) & B


def _sampled_triples(n: int, samples: int, rng: np.random.Generator):
    for _ in range(samples):
        B_bits = rng.random(n) < rng.random()
        free = np.flatnonzero(~B_bits)
        if free.size == 0:
            B_bits[rng.integers(n)] = False
            free = np.flatnonzero(~B_bits)
        e = int(rng.choice(free))
        A_bits = B_bits & (rng.random(n) < 0.5)
        B = int(sum(1 << int(j) for j in np.flatnonzero(B_bits)))
        A = int(sum(1 << int(j) for j in np.flatnonzero(A_bits)))
        yield A, B, e, True


def certify_supermodular(ctx: SetFunctionContext, tol: float = 1e-9, **kw) -> ModularityReport:
    """Certify F (any kernel): ``report.passed`` means monotone and supermodular within ``tol``."""
    return certify_set_function(lambda S: f_value(ctx, S), ctx.n, tol, **kw)


def certify_h_submodular(ctx: SetFunctionContext, tol: float = 1e-9, **kw) -> ModularityReport:
    """Certify H (polynomial only): check ``report.submodular`` and ``report.monotone``."""
    ctx.require_polynomial()
    lam = lambda_value(ctx)
    everything = frozenset(range(ctx.n))
    return certify_set_function(lambda S: lam - f_value(ctx, tuple(everything - set(S))),
                                ctx.n, tol, **kw)


def brute_force_h_max(ctx: SetFunctionContext, k: int) -> tuple[tuple[int, ...], float]:
    """Exact maximizer of H over |S| <= k by enumeration (H is monotone, so |S| = k suffices)."""
    _check_k(ctx, k)
    best = max(((S, h_value(ctx, S)) for S in itertools.combinations(range(ctx.n), k)),
               key=lambda t: t[1])
    return best
