import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cardsvm import FeatureMask, KernelSpec, LsConfig, TabuList, brute_force_minlp, ls, ls_star
from cardsvm import n1_neighbors, sample_n2, solve_for_mask
from cardsvm.local_search import SearchTrace
from cardsvm.problem import Evaluator, random_start

from conftest import tiny_problem


def bits(mask):
    return str(mask)


def test_n1_small_example_order():
    got = [bits(nb) for nb in n1_neighbors(FeatureMask.from_bits([1, 1, 0, 0]))]
    assert got == ["0110", "0101", "1010", "1001"]


def test_n1_sizes():
    assert len(n1_neighbors(FeatureMask(13, tuple(range(6))))) == 42
    assert n1_neighbors(FeatureMask.full(5)) == []


@given(st.integers(2, 12), st.data())
def test_n1_all_at_distance_one(n, data):
    B = data.draw(st.integers(1, n))
    mask = FeatureMask.random(n, B, np.random.default_rng(data.draw(st.integers(0, 999))))
    nbs = n1_neighbors(mask)
    assert len(nbs) == B * (n - B) == len(set(nbs))
    assert all(nb.cardinality == B and mask.swap_distance(nb) == 1 for nb in nbs)


def test_tabu_list():
    tabu = TabuList()
    a = FeatureMask(5, (0, 3))
    assert a not in tabu
    assert tabu.insert(a) and not tabu.insert(FeatureMask(5, (3, 0)))
    assert a in tabu and len(tabu) == 1


def test_config_validation_and_default_p():
    with pytest.raises(ValueError):
        LsConfig(p=1)
    with pytest.raises(ValueError):
        LsConfig(samples_per_round=0)
    cfg = LsConfig()
    assert cfg.flip_budget(13, 6) == 3
    assert cfg.flip_budget(30, 15) == 7
    assert cfg.flip_budget(8, 3) == 2  # floor(3/2) = 1 is raised to the smallest usable value
    assert cfg.flip_budget(5, 4) == 1  # only one unselected feature: N2 is empty
    assert LsConfig().stall_window == 5 and LsConfig().samples_per_round == 500


def test_sample_n2_properties():
    rng = np.random.default_rng(0)
    mask = FeatureMask(13, (0, 2, 4, 6, 8, 10))
    batch = sample_n2(mask, LsConfig(samples_per_round=300, p=2), rng)
    assert batch and all(mask.swap_distance(s) == 2 for s in batch)
    batch = sample_n2(mask, LsConfig(samples_per_round=300), np.random.default_rng(1))
    dists = {mask.swap_distance(s) for s in batch}
    assert dists <= {2, 3} and len(batch) == len(set(batch))
    assert all(s.cardinality == 6 and s.n == 13 for s in batch)
    again = sample_n2(mask, LsConfig(samples_per_round=300), np.random.default_rng(1))
    assert again == batch
    assert sample_n2(FeatureMask(5, (0, 1, 2, 3)), LsConfig(), rng) == []


def test_ls_from_global_optimum_stays():
    p = tiny_problem(11, m=20, n=6, B=3)
    opt = brute_force_minlp(p)
    trace = SearchTrace()
    out = ls(p, opt.mask, trace=trace)
    assert out.mask == opt.mask and len(trace.swept) == 1


@pytest.mark.parametrize("seed", range(6))
def test_ls_local_certificate(seed):
    p = tiny_problem(seed, m=20, n=6, B=3)
    start = random_start(p, seed)
    out = ls(p, start)
    assert out.ub <= solve_for_mask(p, start).ub
    nbs = n1_neighbors(out.mask)
    assert len(nbs) == 9
    assert all(solve_for_mask(p, nb).ub >= out.ub - 1e-9 for nb in nbs)


def test_ls_tabu_start_returns_immediately():
    p = tiny_problem(3)
    start = random_start(p, 0)
    ev = Evaluator(p)
    out = ls(p, start, TabuList([start]), evaluator=ev)
    assert out.mask == start and ev.solves == 1


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_ls_star_vs_ls_and_traces(seed):
    p = tiny_problem(seed, m=15, n=7)
    start = random_start(p, seed)
    tr_ls, tr_star = SearchTrace(), SearchTrace()
    a = ls(p, start, trace=tr_ls)
    b = ls_star(p, start, LsConfig(seed=seed, samples_per_round=50), trace=tr_star)
    assert b.ub <= a.ub
    for tr in (tr_ls, tr_star):
        ubs = tr.incumbent_ubs
        assert all(y <= x for x, y in zip(ubs, ubs[1:]))
    assert len(tr_star.swept) == len(set(tr_star.swept))
    assert solve_for_mask(p, b.mask).ub == pytest.approx(b.ub, rel=1e-8)


def test_ls_star_never_worse_than_ls_at_optimum():
    for seed in range(10):
        p = tiny_problem(100 + seed, m=20, n=8, B=4)
        opt = brute_force_minlp(p).ub
        start = random_start(p, seed)
        a = ls(p, start).ub
        b = ls_star(p, start, LsConfig(seed=seed)).ub
        if a <= opt + 1e-9:
            assert b <= opt + 1e-9


def test_ls_star_worker_independent():
    p = tiny_problem(21, m=20, n=8, B=4)
    start = random_start(p, 2)
    a = ls_star(p, start, LsConfig(seed=2, samples_per_round=100))
    b = ls_star(p, start, LsConfig(seed=2, samples_per_round=100, workers=4))
    assert (a.ub, a.mask) == (b.ub, b.mask)


def test_ls_star_gaussian_kernel():
    p = tiny_problem(4, kernel=KernelSpec.gaussian(0.5), n=6, B=3)
    start = random_start(p, 0)
    out = ls_star(p, start, LsConfig(samples_per_round=50))
    assert brute_force_minlp(p).ub - 1e-9 <= out.ub <= solve_for_mask(p, start).ub
    assert out.mask.cardinality == 3
