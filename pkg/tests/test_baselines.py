import numpy as np
import pytest

from cardsvm import Dataset, FeatureMask, KernelSpec, rfe, solve_for_mask
from cardsvm.problem import ProblemSpec

from conftest import tiny_problem


def leave_one_out_best(p):
    full = FeatureMask.full(p.n)
    step = ProblemSpec(p.dataset, p.kernel, p.C, p.n - 1)
    vals = [solve_for_mask(step, FeatureMask(p.n, tuple(k for k in full.support if k != j))).ub
            for j in range(p.n)]
    return int(np.argmin(vals))


@pytest.mark.parametrize("seed", range(5))
def test_rfe2_single_removal_matches_enumeration(seed):
    p = tiny_problem(seed, m=20, n=6, B=5)
    out = rfe(p, recompute_alpha=True)
    assert out.mask.complement == (leave_one_out_best(p),)


def test_rfe_identity_when_nothing_to_remove():
    p = tiny_problem(1, n=5, B=5)
    for flag in (False, True):
        out = rfe(p, flag)
        assert out.mask == FeatureMask.full(5)
        assert out.ub == solve_for_mask(p, FeatureMask.full(5)).ub


def test_rfe_deterministic_and_cardinality():
    for seed in range(4):
        p = tiny_problem(seed, m=25, n=7, B=3)
        for flag in (False, True):
            a, b = rfe(p, flag), rfe(p, flag)
            assert a.mask == b.mask and a.ub == b.ub
            assert a.mask.cardinality == 3
            assert solve_for_mask(p, a.mask).ub == pytest.approx(a.ub, rel=1e-8)


def test_rfe_tie_goes_to_lowest_index():
    # two identical columns: removing either scores the same, so column 0 goes first
    rng = np.random.default_rng(0)
    base = rng.normal(size=(12, 2))
    x = np.hstack([base[:, :1], base[:, :1], base[:, 1:] * 3])
    p = ProblemSpec(Dataset(x, np.tile([1.0, -1.0], 6)), KernelSpec.polynomial(2, 0.1, 1.0), 10.0, 2)
    for flag in (False, True):
        assert rfe(p, flag).mask.support in {(1, 2), (0, 1)}


def test_rfe2_vs_rfe1_logged():
    rows = []
    for seed in range(6):
        p = tiny_problem(400 + seed, m=20, n=8, B=4)
        rows.append((rfe(p, False).ub, rfe(p, True).ub))
    for r1, r2 in rows:
        print(f"RFE1 {r1:.4f}  RFE2 {r2:.4f}")
    assert all(np.isfinite(v) for row in rows for v in row)
