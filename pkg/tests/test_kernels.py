import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pressgap import kernels


def _random_instance(seed, n_cand=60, n_steps=6):
    rng = np.random.default_rng(seed)
    orbits = rng.random((n_cand, n_steps))
    order = rng.permutation(n_cand).astype(np.int64)
    eps = 0.02 + 0.3 * rng.random()
    return orbits, order, eps


def _circ(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def _bowen(orbits, i, j):
    return max(_circ(orbits[i, k], orbits[j, k]) for k in range(orbits.shape[1]))


def test_backend_selection_roundtrip():
    original = kernels.backend()
    try:
        kernels.set_backend("numpy")
        assert kernels.backend() == "numpy"
        if kernels.HAVE_NUMBA:
            kernels.set_backend("numba")
            assert kernels.backend() == "numba"
        with pytest.raises(ValueError):
            kernels.set_backend("cuda")
    finally:
        kernels.set_backend(original)


@pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba unavailable")
@pytest.mark.parametrize("seed", range(8))
def test_backends_agree(seed):
    orbits, order, eps = _random_instance(seed)
    original = kernels.backend()
    try:
        kernels.set_backend("numba")
        keep_nb = kernels.greedy_separated(orbits, order, eps)
        pw_nb = kernels.pairwise_bowen(orbits)
        kernels.set_backend("numpy")
        keep_np = kernels.greedy_separated(orbits, order, eps)
        pw_np = kernels.pairwise_bowen(orbits)
    finally:
        kernels.set_backend(original)
    assert np.array_equal(keep_nb, keep_np)
    assert np.allclose(pw_nb, pw_np, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_greedy_separated_semantics(seed):
    orbits, order, eps = _random_instance(seed, n_cand=40, n_steps=4)
    keep = kernels.greedy_separated(orbits, order, eps)
    kept = [i for i in order if keep[i]]
    # pairwise separated
    for a in range(len(kept)):
        for b in range(a + 1, len(kept)):
            assert _bowen(orbits, kept[a], kept[b]) >= eps
    # maximal: every rejected candidate conflicts with an earlier kept one
    for i in order:
        if not keep[i]:
            assert any(_bowen(orbits, i, j) < eps for j in kept)


def test_pairwise_bowen_values():
    orbits = np.array([[0.0, 0.5], [0.9, 0.6], [0.25, 0.25]])
    d = kernels.pairwise_bowen(orbits)
    assert d[0, 1] == pytest.approx(0.1)
    assert d[0, 2] == pytest.approx(0.25)
    assert d[1, 2] == pytest.approx(0.35)
    assert np.all(d == d.T)
    assert np.all(np.diag(d) == 0.0)


def test_min_bowen_distance():
    orbits = np.array([[0.0, 0.0], [0.5, 0.5]])
    assert kernels.min_bowen_distance(orbits) == pytest.approx(0.5)
    assert kernels.min_bowen_distance(orbits[:1]) == np.inf
