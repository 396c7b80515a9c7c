import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cardsvm import Dataset, DomainError, FeatureMask, KernelSpec, build_q, homogenize
from cardsvm import kernel_eval, masked_kernel_eval

from oracles import kernel_ref, q_ref


def test_kernel_values():
    assert kernel_eval(KernelSpec.gaussian(1.0), [0.3, -2.0], [0.3, -2.0]) == 1.0
    assert kernel_eval(KernelSpec.polynomial(2, 1.0, 0.0), [1, 2], [3, 4]) == 121.0
    assert kernel_eval(KernelSpec.gaussian(1.0), [0.0], [-1.0]) == pytest.approx(0.367879, abs=1e-6)


def test_kernel_dimension_mismatch():
    with pytest.raises(DomainError):
        kernel_eval(KernelSpec.gaussian(), [1.0, 2.0], [1.0])
    with pytest.raises(DomainError):
        masked_kernel_eval(KernelSpec.gaussian(), FeatureMask.full(3), [1.0, 2.0], [1.0, 2.0])


@pytest.mark.parametrize("kw", [dict(kind="poly", gamma=0.0), dict(kind="poly", c=-1.0),
                                dict(kind="poly", degree=0), dict(kind="sigmoid")])
def test_kernel_spec_validation(kw):
    with pytest.raises(DomainError):
        KernelSpec(**kw)


def test_masked_extremes():
    x, z = [0.5, -1.0, 2.0], [1.5, 0.0, -0.3]
    poly = KernelSpec.polynomial(3, 0.5, 2.0)
    gauss = KernelSpec.gaussian(0.7)
    for spec in (poly, gauss):
        assert masked_kernel_eval(spec, FeatureMask.full(3), x, z) == kernel_eval(spec, x, z)
    empty = FeatureMask(3, ())
    assert masked_kernel_eval(poly, empty, x, z) == 8.0
    assert masked_kernel_eval(gauss, empty, x, z) == 1.0


def test_masked_three_point_feature_two():
    mask = FeatureMask(3, (1,))
    v = masked_kernel_eval(KernelSpec.gaussian(1.0), mask, [0, 1, -0.5], [0, -1, 0])
    assert v == pytest.approx(math.exp(-4.0), rel=1e-15)


specs = st.one_of(
    st.builds(KernelSpec.polynomial, st.integers(1, 5), st.floats(0.01, 2.0), st.floats(0.0, 3.0)),
    st.builds(KernelSpec.gaussian, st.floats(0.01, 2.0)),
)


@given(specs, st.integers(1, 6), st.data())
def test_mask_restriction_identity(spec, n, data):
    vec = st.lists(st.floats(-3, 3), min_size=n, max_size=n)
    x, z = data.draw(vec), data.draw(vec)
    bits = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    mask = FeatureMask.from_bits(bits)
    sub = [j for j in range(n) if bits[j]]
    got = masked_kernel_eval(spec, mask, x, z)
    ref = kernel_ref(spec.kind, spec.gamma, spec.c, spec.degree, [x[j] for j in sub], [z[j] for j in sub])
    assert got == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_feature_mask_basics():
    a = FeatureMask.from_bits([1, 1, 0, 0])
    b = FeatureMask(4, (1, 0))
    assert a == b and a.fingerprint == b.fingerprint and hash(a) == hash(b)
    assert a.cardinality == 2 and a.complement == (2, 3)
    assert str(a) == "1100"
    assert a.swap((0,), (3,)) == FeatureMask(4, (1, 3))
    assert a.swap_distance(FeatureMask(4, (2, 3))) == 2
    with pytest.raises(DomainError):
        FeatureMask(3, (0, 3))


def test_build_q_linear_toy():
    d = Dataset(np.array([[1.0], [-1.0]]), np.array([1.0, -1.0]))
    q = build_q(d, KernelSpec.polynomial(1, 1.0, 0.0), FeatureMask.full(1))
    np.testing.assert_array_equal(q.entries, [[1.0, 1.0], [1.0, 1.0]])


@given(st.integers(0, 10_000), specs)
def test_build_q_matches_loops_and_is_psd(seed, spec):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(2, 21)), int(rng.integers(1, 6))
    x = rng.normal(size=(m, n))
    y = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    y[:2] = 1.0, -1.0
    mask = FeatureMask.random(n, int(rng.integers(1, n + 1)), rng)
    q = build_q(Dataset(x, y), spec, mask)
    np.testing.assert_array_equal(q.entries, q.entries.T)
    ref = q_ref(x, y, spec.kind, spec.gamma, spec.c, spec.degree, mask.support)
    np.testing.assert_allclose(q.entries, ref, rtol=1e-10, atol=1e-12)
    lam_min = np.linalg.eigvalsh(ref).min()
    assert lam_min >= -1e-8 * max(np.trace(ref) / m, 1e-300)
    assert q.mask_fingerprint == mask.fingerprint
    if spec.kind == "gaussian":
        np.testing.assert_array_equal(np.diag(q.entries), 1.0)


def test_build_q_thread_independent():
    rng = np.random.default_rng(5)
    d = Dataset(rng.normal(size=(30, 5)), np.tile([1.0, -1.0], 15))
    spec = KernelSpec.polynomial(3, 0.2, 1.0)
    mask = FeatureMask(5, (0, 2, 4))
    ref = build_q(d, spec, mask).entries
    with ThreadPoolExecutor(4) as pool:
        for out in pool.map(lambda _: build_q(d, spec, mask).entries, range(8)):
            np.testing.assert_array_equal(out, ref)


def test_homogenize_constant_and_errors():
    d = Dataset(np.array([[1.0, 2.0], [0.0, -1.0]]), np.array([1.0, -1.0]))
    d2, spec2 = homogenize(d, KernelSpec.polynomial(2, 0.1, 1.0))
    np.testing.assert_allclose(d2.features[:, 0], math.sqrt(10.0))
    assert spec2.c == 0.0 and d2.n == 3
    with pytest.raises(DomainError):
        homogenize(d, KernelSpec.gaussian(1.0))
    with pytest.raises(DomainError):
        homogenize(d, KernelSpec.polynomial(2, 0.1, 0.0))


def test_homogenize_kernel_identity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        spec = KernelSpec.polynomial(int(rng.integers(1, 6)), float(rng.uniform(0.05, 2)),
                                     float(rng.uniform(0.1, 3)))
        x, z = rng.normal(size=(2, n))
        S = sorted(rng.choice(n, int(rng.integers(0, n + 1)), replace=False).tolist())
        d = Dataset(np.vstack([x, z]), np.array([1.0, -1.0]))
        d2, spec2 = homogenize(d, spec)
        lhs = masked_kernel_eval(spec, FeatureMask(n, tuple(S)), x, z)
        rhs = masked_kernel_eval(spec2, FeatureMask(n + 1, (0,) + tuple(j + 1 for j in S)),
                                 d2.features[0], d2.features[1])
        assert rhs == pytest.approx(lhs, rel=1e-10)
