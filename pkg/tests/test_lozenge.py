"""Lozenge tilings: codec, rotation masks, heights, color classes, CFTP."""

from collections import Counter

import numpy as np
import pytest

from tilesampler import (
    DomainError,
    MultiThreaded,
    OverlapError,
    Sequential,
    TriDomain,
    Uniform,
    chi_square_gof,
    enumerate_lozenge_tilings,
    flip_graph_connected,
    loz_cftp,
    loz_extremal,
    loz_heights,
    loz_random_walk,
    loz_rotateable,
    loz_sweep,
    lozenges_from_tiling,
    seed_family,
    tiling_from_lozenges,
)
from tilesampler.errors import UntileableDomain
from tilesampler.lozenge import (
    CUBE_UNIT,
    DIRS,
    ROT_HIGH,
    ROT_LOW,
    LozengeTiling,
    _apply_fire,
    loz_random_walk_batch,
)


@pytest.fixture(scope="module")
def hex1():
    return TriDomain.hexagon(1, 1, 1)


@pytest.fixture(scope="module")
def hex222_states():
    return enumerate_lozenge_tilings(TriDomain.hexagon(2, 2, 2))


# -- domains ----------------------------------------------------------------


def test_hexagon_counts(hex1):
    assert hex1.triangle_count == 6
    assert TriDomain.hexagon(2, 2, 2).triangle_count == 24
    assert TriDomain.hexagon(2, 3, 4).triangle_count == 2 * (2 * 3 + 3 * 4 + 4 * 2)


def test_domain_text_roundtrip():
    d = TriDomain.hexagon(2, 1, 2)
    assert TriDomain.from_text(d.to_text()) == d


def test_domain_rejects_disconnected():
    up = np.zeros((3, 3), dtype=bool)
    down = np.zeros((3, 3), dtype=bool)
    up[0, 0] = True
    up[2, 2] = True
    with pytest.raises(DomainError):
        TriDomain((3, 3), up, down)


def test_domain_rejects_hole():
    d = TriDomain.hexagon(2, 2, 2)
    up = d.up.copy()
    down = d.down.copy()
    # carve out one interior rhombus: leaves a hole
    up[1, 1] = False
    down[1, 1] = False
    with pytest.raises(DomainError):
        TriDomain(d.size, up, down)


# -- codec ---------------------------------------------------------------------


def test_unit_hexagon_roundtrip(hex1):
    states = enumerate_lozenge_tilings(hex1)
    assert len(states) == 2
    for t in states:
        m = lozenges_from_tiling(t)
        assert tiling_from_lozenges(hex1, m) == t


def test_codec_overlap_error(hex1):
    tris = hex1.triangles()
    ups = [t for t in tris if t[0] == "up"]
    downs = [t for t in tris if t[0] == "down"]
    pair = next(
        (u, d) for u in ups for d in downs if d in hex1._neighbors(u)
    )
    with pytest.raises(OverlapError):
        tiling_from_lozenges(hex1, [pair, pair, pair])


def test_222_all_roundtrip(hex222_states):
    assert len(hex222_states) == 20
    d = TriDomain.hexagon(2, 2, 2)
    for t in hex222_states:
        assert tiling_from_lozenges(d, lozenges_from_tiling(t)) == t


# -- rotation masks -----------------------------------------------------------------


def test_rotation_masks_are_alternating():
    assert {ROT_HIGH, ROT_LOW} == {0b010101, 0b101010}
    assert loz_rotateable(ROT_LOW) == "up"
    assert loz_rotateable(ROT_HIGH) == "down"
    assert loz_rotateable(0) == "none"
    for s in range(64):
        if s not in (ROT_HIGH, ROT_LOW):
            assert loz_rotateable(s) == "none"


def test_rotation_maps_between_masks(hex1):
    t = enumerate_lozenge_tilings(hex1)[0]
    grid = t.states_grid
    (x, y) = next(zip(*np.nonzero((grid == ROT_HIGH) | (grid == ROT_LOW))))
    fire = np.zeros_like(grid, dtype=bool)[None]
    fire[0, x, y] = True
    if grid[x, y] == ROT_LOW:
        new = _apply_fire(t.edges[None], fire, np.zeros_like(fire))
    else:
        new = _apply_fire(t.edges[None], np.zeros_like(fire), fire)
    t2 = LozengeTiling(hex1, new[0])
    assert t2.state((int(x), int(y))) in (ROT_HIGH, ROT_LOW)
    assert t2.state((int(x), int(y))) != int(grid[x, y])
    lozenges_from_tiling(t2)  # still a perfect cover


# -- heights ------------------------------------------------------------------------


def test_height_delta_under_rotation(hex222_states):
    d = TriDomain.hexagon(2, 2, 2)
    for t in hex222_states:
        h0 = loz_heights(t).heights
        grid = t.states_grid
        for x, y in zip(*np.nonzero((grid == ROT_HIGH) | (grid == ROT_LOW))):
            fire = np.zeros_like(grid, dtype=bool)[None]
            fire[0, x, y] = True
            if grid[x, y] == ROT_LOW:
                new = _apply_fire(t.edges[None], fire, np.zeros_like(fire))
                expect = CUBE_UNIT
            else:
                new = _apply_fire(t.edges[None], np.zeros_like(fire), fire)
                expect = -CUBE_UNIT
            h1 = loz_heights(LozengeTiling(d, new[0])).heights
            delta = (h1.astype(int) - h0)[d.vertex_mask]
            others = (h1.astype(int) - h0)
            assert others[x, y] == expect
            others[x, y] = 0
            assert not others[d.vertex_mask].any()


def test_color_classes_admissible():
    # no two vertices of one class are lattice neighbors
    for x in range(6):
        for y in range(6):
            for dx, dy in DIRS:
                assert (x - y) % 3 != (x + dx - (y + dy)) % 3


# -- sweeps and walks ------------------------------------------------------------------


def test_sweep_quiet_class_identity(hex1):
    t = enumerate_lozenge_tilings(hex1)[0]
    grid = t.states_grid
    (x, y) = next(zip(*np.nonzero((grid == ROT_HIGH) | (grid == ROT_LOW))))
    active = (int(x) - int(y)) % 3
    quiet = (active + 1) % 3
    fam = seed_family(4, (hex1.size[0] + 1, hex1.size[1] + 1))
    assert loz_sweep(t, fam, 0, quiet) == t


def test_backend_determinism(hex222_states):
    t = hex222_states[0]
    outs = [
        loz_random_walk(t, 42, 150, Uniform(), backend)
        for backend in (Sequential(), MultiThreaded(2), MultiThreaded(8))
    ]
    assert outs[0] == outs[1] == outs[2]


def test_walk_preserves_validity(hex222_states):
    t = hex222_states[5]
    for seed in range(5):
        t2 = loz_random_walk(t, seed, 120)
        lozenges_from_tiling(t2)


# -- extremals and CFTP -------------------------------------------------------------------


def test_extremal_dominates(hex222_states):
    d = TriDomain.hexagon(2, 2, 2)
    t_max, t_min = loz_extremal(d)
    h_max = loz_heights(t_max).heights
    h_min = loz_heights(t_min).heights
    m = d.vertex_mask
    for t in hex222_states:
        h = loz_heights(t).heights
        assert (h_max[m] >= h[m]).all()
        assert (h_min[m] <= h[m]).all()
    pool = set(hex222_states)
    assert t_max in pool and t_min in pool


def test_unbalanced_domain_untileable():
    up = np.zeros((2, 2), dtype=bool)
    down = np.zeros((2, 2), dtype=bool)
    up[0, 0] = True
    down[0, 0] = True
    up[1, 0] = True  # adjacent to down(0,0); 2 up vs 1 down
    d = TriDomain((2, 2), up, down)
    assert loz_extremal(d) is None
    with pytest.raises(UntileableDomain):
        loz_cftp(d, Uniform(), 1)


def test_cftp_unit_hexagon(hex1):
    states = enumerate_lozenge_tilings(hex1)
    samples = loz_cftp(hex1, Uniform(), 17, count=8000)
    idx = {s: i for i, s in enumerate(states)}
    freq = Counter(idx[s] for s in samples)
    for i in range(2):
        assert abs(freq[i] / 8000 - 0.5) <= 0.017


def test_cftp_222_uniform(hex222_states):
    d = TriDomain.hexagon(2, 2, 2)
    samples = loz_cftp(d, Uniform(), 3, count=20000)
    idx = {s: i for i, s in enumerate(hex222_states)}
    freq = Counter(idx[s] for s in samples)
    counts = [freq[i] for i in range(20)]
    assert chi_square_gof(counts).passed, counts


def test_cftp_batching_invariance(hex1):
    a = loz_cftp(hex1, Uniform(), 5, count=5, batch_size=2)
    b = loz_cftp(hex1, Uniform(), 5, count=5, batch_size=5)
    assert a == b


def test_edge_weights_structural(hex1):
    # the heat-bath odds at a vertex equal the Gibbs ratio of its two local
    # covers, and a weighted walk on the unit hexagon converges to the exact
    # two-state distribution
    from tilesampler.lozenge import LozEdgeWeights, loz_p_up_grid, star_covers
    from tilesampler import exact_distribution

    states = enumerate_lozenge_tilings(hex1)
    high, low = star_covers((1, 1))
    w = LozEdgeWeights(1.0, {tuple(high[0]): 3.0})
    grid = loz_p_up_grid(hex1, w)
    assert grid[1, 1] == pytest.approx(3.0 / 4.0)
    dist = exact_distribution(states, w)
    assert sorted(dist.values()) == pytest.approx([1 / 4, 3 / 4])
    # long weighted MCMC matches the exact distribution
    hits = 0
    n_runs = 4000
    start = states[0]
    seeds = np.arange(n_runs, dtype=np.uint64) * 7919 + 1
    out = loz_random_walk_batch(
        np.repeat(start.edges[None], n_runs, axis=0), seeds, 50, hex1, w
    )
    target = max(states, key=lambda s: dist[s])
    hits = sum(1 for e in out if LozengeTiling(hex1, e) == target)
    sigma = np.sqrt(0.75 * 0.25 / n_runs)
    assert abs(hits / n_runs - dist[target]) <= 4 * sigma


def test_flip_graph_connected_222(hex222_states):
    assert flip_graph_connected(hex222_states)


def test_monotone_coupling():
    d = TriDomain.hexagon(3, 3, 3)
    t_max, t_min = loz_extremal(d)
    rng = np.random.default_rng(11)
    a, b = t_max.edges[None], t_min.edges[None]
    m = d.vertex_mask
    for _ in range(30):
        seed = np.array([rng.integers(2**62)], dtype=np.uint64)
        a = loz_random_walk_batch(a, seed, 3, d, Uniform())
        b = loz_random_walk_batch(b, seed, 3, d, Uniform())
        ha = loz_heights(LozengeTiling(d, a[0])).heights
        hb = loz_heights(LozengeTiling(d, b[0])).heights
        assert (hb[m] <= ha[m]).all()
