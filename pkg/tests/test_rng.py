"""Stream determinism, splitting semantics, and statistical batteries."""

import numpy as np
import pytest

from mlpicard.rng import SplittableStream, StreamBundle, root

# 5-sigma band half-widths for the Monte Carlo checks below; each matches
# the sample size used at the call site.
UNIFORM_MEAN_BAND = 0.002    # 1e6 draws, sigma = 1/sqrt(12)
UNIFORM_VAR_BAND = 0.002
GAUSS_MEAN_BAND = 0.005      # 1e6 draws, sigma = 1
GAUSS_VAR_BAND = 0.01
CORR_BAND_1E5 = 5.0 / np.sqrt(1e5)


def test_root_is_deterministic():
    first = [root(42).next_uniform() for _ in range(3)]
    second = [root(42).next_uniform() for _ in range(3)]
    assert first == second
    s = root(42)
    pair = (s.next_uniform(), s.next_uniform())
    t = root(42)
    assert pair == (t.next_uniform(), t.next_uniform())


def test_zero_seed_is_not_special():
    s = root(0)
    u = s.next_uniform()
    assert 0.0 <= u < 1.0
    assert root(0).next_uniform() == u


def test_seed_validation():
    with pytest.raises(ValueError):
        root(-1)
    with pytest.raises(ValueError):
        root(1 << 64)
    with pytest.raises(TypeError):
        root(1.5)


def test_distinct_seeds_give_uncorrelated_streams():
    a = root(42).uniforms(10**4)
    b = root(43).uniforms(10**4)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_long_run_independence_across_seed_and_path():
    # 1e6-draw battery: distinct (seed, path) pairs stay inside the 5-sigma
    # correlation band 5/sqrt(n).
    n = 10**6
    band = 5.0 / np.sqrt(n)
    a = root(1).uniforms(n)
    for other in (root(2), root(1).spawn(0), root(1).spawn(1).spawn(1)):
        assert abs(np.corrcoef(a, other.uniforms(n))[0, 1]) < band


def test_spawn_builds_paths():
    s = root(7)
    assert s.path == ()
    assert s.spawn(1).spawn(-3).path == (1, -3)
    assert s.spawn(0).path == (0,)


def test_spawn_is_idempotent_and_pure():
    s = root(7)
    s.next_uniform()
    before = (s.path, s.counter)
    c1 = s.spawn(5)
    c2 = s.spawn(5)
    assert (s.path, s.counter) == before
    assert c1 == c2
    assert c1.counter == 0
    assert c1.next_uniform() == c2.next_uniform()


def test_spawn_independent_of_parent_counter():
    a = root(9)
    b = root(9)
    for _ in range(17):
        b.next_uniform()
    assert a.spawn(3).next_uniform() == b.spawn(3).next_uniform()


def test_index_validation():
    s = root(1)
    with pytest.raises(ValueError):
        s.spawn(1 << 63)
    with pytest.raises(ValueError):
        s.spawn(-(1 << 63) - 1)
    assert s.spawn(-(1 << 63)).path == (-(1 << 63),)
    assert s.spawn((1 << 63) - 1).path == ((1 << 63) - 1,)


def test_sibling_interleaving_does_not_couple_streams():
    s = root(11)
    a, b = s.spawn(1), s.spawn(2)
    interleaved_a, interleaved_b = [], []
    for _ in range(50):
        interleaved_a.append(a.next_uniform())
        interleaved_b.append(b.next_uniform())
    a2, b2 = s.spawn(1), s.spawn(2)
    assert interleaved_a == [a2.next_uniform() for _ in range(50)]
    assert interleaved_b == [b2.next_uniform() for _ in range(50)]


def test_uniform_range_mean_variance():
    u = root(1).uniforms(10**6)
    assert ((0.0 <= u) & (u < 1.0)).all()
    assert abs(u.mean() - 0.5) < UNIFORM_MEAN_BAND
    assert abs(u.var() - 1.0 / 12.0) < UNIFORM_VAR_BAND


def test_gaussian_mean_variance_determinism():
    s = root(777)
    g = s.gaussians(10**6)
    assert abs(g.mean()) < GAUSS_MEAN_BAND
    assert abs(g.var(ddof=1) - 1.0) < GAUSS_VAR_BAND
    r = root(777)
    assert r.next_gaussian() == g[0]
    assert r.next_gaussian() == g[1]


def test_block_draws_match_scalar_draws():
    a, b = root(5), root(5)
    assert np.array_equal(a.uniforms(64), np.array([b.next_uniform() for _ in range(64)]))
    a, b = root(5), root(5)
    assert np.array_equal(a.gaussians(64), np.array([b.next_gaussian() for _ in range(64)]))
    assert a.counter == b.counter == 128


def _battery_paths():
    """Fixed adversarial path pairs: siblings, sign flips, prefixes, depth
    jumps; length <= 4, entries in [-8, 8]."""
    paths = [
        (0,), (1,), (-1,), (2,), (8,), (-8,),
        (1, 1), (1, -1), (-1, 1), (2, 2), (1, 2), (2, 1),
        (3, -3), (-3, 3), (0, 0), (0, 1),
        (1, 1, 1), (1, 1, -1), (2, 2, 2), (0, 0, 0),
        (1, 1, 1, 1), (1, 1, 1, -1), (8, -8, 8, -8), (4, 4, 4, 4),
    ]
    pairs = [(paths[i], paths[j]) for i in range(len(paths)) for j in range(i + 1, len(paths))]
    # Thin deterministically to keep runtime modest while covering all kinds.
    return pairs[::7] + [
        ((1,), (1, 1)), ((2,), (2, 2)), ((0,), (0, 0)),
        ((1, 1), (1, 1, 1)), ((1, 1, 1), (1, 1, 1, 1)),
    ]


def test_path_tree_independence_battery():
    seed = 99
    n = 10**5
    cache = {}

    def draws(path):
        if path not in cache:
            s = root(seed)
            for e in path:
                s = s.spawn(e)
            cache[path] = s.uniforms(n)
        return cache[path]

    for p, q in _battery_paths():
        c = np.corrcoef(draws(p), draws(q))[0, 1]
        assert abs(c) < CORR_BAND_1E5, f"paths {p} vs {q}: corr {c}"


def test_bundle_matches_scalar_streams():
    bundle = StreamBundle.root_children(99, np.arange(1, 9))
    streams = [root(99).spawn(j) for j in range(1, 9)]
    assert np.array_equal(
        bundle.next_uniform(), np.array([s.next_uniform() for s in streams])
    )
    assert np.array_equal(
        bundle.next_gaussian(), np.array([s.next_gaussian() for s in streams])
    )
    child = bundle.spawn(-4)
    child_scalar = [s.spawn(-4) for s in streams]
    assert np.array_equal(
        child.next_uniform(), np.array([s.next_uniform() for s in child_scalar])
    )


def test_bundle_spawn_block_layout():
    bundle = StreamBundle.root_children(3, [5, 6])
    block = bundle.spawn_block([1, 2, 3])
    assert block.shape == (3, 2)
    u = block.next_uniform()
    for i, k in enumerate((1, 2, 3)):
        for j, lane in enumerate((5, 6)):
            assert u[i, j] == root(3).spawn(lane).spawn(k).next_uniform()


def test_bundle_from_stream_tracks_counter():
    s = root(123)
    s.next_uniform()
    b = StreamBundle.from_stream(s)
    assert b.next_uniform()[0] == s.next_uniform()


def test_stream_repr_and_equality():
    s = root(4).spawn(2)
    assert "path=(2,)" in repr(s)
    assert s == root(4).spawn(2)
    assert s != root(5).spawn(2)
