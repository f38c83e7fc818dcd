"""Domains, tilestate codec, heights, order, extremal tilings, weights."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from tilesampler import (
    CoverageError,
    Domain,
    DomainError,
    DomainMismatchError,
    EdgeWeights,
    InconsistencyError,
    Ordering,
    OutOfDomainError,
    OverlapError,
    Tiling,
    Uniform,
    VolumeWeights,
    dominoes_from_tiling,
    enumerate_domino_tilings,
    extremal_tilings,
    height_function,
    lattice_meet_join,
    log_weight,
    merge_checkerboard,
    order_compare,
    split_checkerboard,
    tiling_from_dominoes,
)
from tilesampler.lattice import HORIZONTAL_PAIR, VERTICAL_PAIR, tiling_from_heights
from tilesampler.sweeps import recompute_states

FIG_MATRIX = np.array(
    [
        [0, 0, 2, 0, 0],
        [8, 4, 1, 8, 4],
        [0, 8, 12, 4, 0],
        [8, 4, 2, 8, 4],
        [0, 0, 1, 0, 0],
    ],
    dtype=np.uint8,
)

FIG_DOMINOES = [
    ((0, 0), (1, 0)),
    ((0, 1), (0, 2)),
    ((0, 3), (1, 3)),
    ((1, 1), (2, 1)),
    ((1, 2), (2, 2)),
    ((2, 0), (3, 0)),
    ((2, 3), (3, 3)),
    ((3, 1), (3, 2)),
]


@pytest.fixture(scope="module")
def square2():
    return Domain.square(2)


@pytest.fixture(scope="module")
def square4_tilings():
    return enumerate_domino_tilings(Domain.square(4))


# -- Domain ---------------------------------------------------------------


def test_domain_rejects_disconnected():
    grid = np.zeros((3, 3), dtype=bool)
    grid[0, 0] = grid[2, 2] = True
    with pytest.raises(DomainError):
        Domain(3, grid)


def test_domain_rejects_hole():
    grid = np.ones((3, 3), dtype=bool)
    grid[1, 1] = False
    with pytest.raises(DomainError):
        Domain(3, grid)


def test_domain_text_roundtrip():
    d = Domain.aztec(2)
    assert Domain.from_text(d.to_text()) == d
    assert d.to_text().splitlines()[0] == "4"


def test_domain_odd_face_count_is_constructible():
    d = Domain.from_faces(2, [(0, 0), (0, 1), (1, 0)])
    assert d.face_count == 3


# -- codec ------------------------------------------------------------------


def test_center_state_horizontal_pair(square2):
    t = tiling_from_dominoes(square2, [((0, 0), (0, 1)), ((1, 0), (1, 1))])
    assert t.state((1, 1)) == HORIZONTAL_PAIR == 3


def test_center_state_vertical_pair(square2):
    t = tiling_from_dominoes(square2, [((0, 0), (1, 0)), ((0, 1), (1, 1))])
    assert t.state((1, 1)) == VERTICAL_PAIR == 12


def test_figure_tilestate_matrix():
    t = tiling_from_dominoes(Domain.square(4), FIG_DOMINOES)
    assert np.array_equal(t.states, FIG_MATRIX)


def test_codec_errors(square2):
    with pytest.raises(OverlapError):
        tiling_from_dominoes(square2, [((0, 0), (0, 1)), ((0, 1), (1, 1))])
    with pytest.raises(CoverageError):
        tiling_from_dominoes(square2, [((0, 0), (0, 1))])
    with pytest.raises(OutOfDomainError):
        tiling_from_dominoes(square2, [((0, 0), (0, 1)), ((1, 1), (1, 2))])
    with pytest.raises(OutOfDomainError):
        tiling_from_dominoes(square2, [((0, 0), (1, 1)), ((0, 1), (1, 0))])


def test_roundtrip_on_enumerated_domains():
    for domain in (
        Domain.square(2),
        Domain.rectangle(2, 3),
        Domain.square(4),
        Domain.aztec(2),
    ):
        for t in enumerate_domino_tilings(domain):
            m = dominoes_from_tiling(t)
            assert tiling_from_dominoes(domain, m) == t
            assert m == sorted(m)


def test_edge_bit_consistency(square4_tilings):
    # both endpoints of every interior edge agree on its crossing bit
    for t in square4_tilings:
        s = t.states
        assert np.array_equal((s[:-1, :] & 2) >> 1, s[1:, :] & 1)
        assert np.array_equal((s[:, :-1] & 8) >> 3, (s[:, 1:] & 4) >> 2)


def test_tiling_text_roundtrip():
    d = Domain.square(4)
    t = tiling_from_dominoes(d, FIG_DOMINOES)
    assert Tiling.from_text(d, t.to_text()) == t


def test_corrupted_grid_raises():
    d = Domain.square(2)
    bad = np.zeros((3, 3), dtype=np.uint8)
    bad[1, 1] = 3  # center claims crossings its neighbors deny
    with pytest.raises(InconsistencyError):
        dominoes_from_tiling(Tiling(d, bad))


# -- checkerboard split --------------------------------------------------------


def test_split_index_formula():
    d = Domain.square(6)
    t = extremal_tilings(d)[0]
    t_b, t_w = split_checkerboard(t)
    grid = np.zeros((8, 8), dtype=np.uint8)
    grid[:7, :7] = t.states
    assert t_b[0][0] == grid[0, 0]
    assert t_b[1][0] == grid[1, 1]
    assert t_b[2][3] == grid[2, 6]
    for i in range(8):
        for j in range(4):
            assert t_b[i][j] == grid[i, 2 * j + i % 2]
            assert t_w[i][j] == grid[i, 2 * j + (i + 1) % 2]


def test_merge_inverts_split(square4_tilings):
    for t in square4_tilings[:8]:
        t_b, t_w = split_checkerboard(t)
        merged = merge_checkerboard(t_b, t_w)
        assert np.array_equal(merged[:5, :5], t.states)
        assert not merged[5:, :].any() and not merged[:, 5:].any()


# -- heights ----------------------------------------------------------------------


def test_heights_differ_only_at_center(square2):
    t_h = tiling_from_dominoes(square2, [((0, 0), (0, 1)), ((1, 0), (1, 1))])
    t_v = tiling_from_dominoes(square2, [((0, 0), (1, 0)), ((0, 1), (1, 1))])
    d = height_function(t_v).heights.astype(int) - height_function(t_h).heights
    expect = np.zeros((3, 3), dtype=int)
    expect[1, 1] = 4
    assert np.array_equal(d, expect)


def test_single_domino_heights():
    d = Domain.rectangle(1, 2)
    ts = enumerate_domino_tilings(d)
    assert len(ts) == 1
    h = height_function(ts[0])
    assert h.heights[d.vertex_mask].size == 6  # all six vertices determined


def _flip_once(t: Tiling, vertex) -> Tiling:
    new = t.states.copy()
    r, c = vertex
    new[r, c] = VERTICAL_PAIR if new[r, c] == HORIZONTAL_PAIR else HORIZONTAL_PAIR
    full = recompute_states(new[None])[0]
    rr, cc = np.meshgrid(range(new.shape[0]), range(new.shape[1]), indexing="ij")
    keep = ((rr + cc) % 2) == (r + c) % 2
    return Tiling(t.domain, np.where(keep, new, full))


def test_rotation_changes_height_only_at_vertex(square4_tilings):
    for t in square4_tilings:
        h0 = height_function(t).heights
        for r, c in zip(*np.nonzero((t.states == 3) | (t.states == 12))):
            h1 = height_function(_flip_once(t, (r, c))).heights
            delta = h1.astype(int) - h0
            assert abs(delta[r, c]) == 4
            delta[r, c] = 0
            assert not delta.any()


# -- order and lattice structure -----------------------------------------------------


def test_order_equal_vs_self(square2):
    t = extremal_tilings(square2)[0]
    h = height_function(t)
    assert order_compare(h, h) is Ordering.EQUAL


def test_order_max_vs_min():
    for domain in (Domain.square(2), Domain.square(4), Domain.aztec(2)):
        t_max, t_min = extremal_tilings(domain)
        assert (
            order_compare(height_function(t_max), height_function(t_min))
            is Ordering.GREATER_EQUAL
        )


def test_incomparable_pair_exists_on_4x2():
    ts = enumerate_domino_tilings(Domain.rectangle(4, 2))
    hs = [height_function(t) for t in ts]
    verdicts = {
        order_compare(a, b)
        for i, a in enumerate(hs)
        for b in hs[i + 1 :]
    }
    assert Ordering.INCOMPARABLE in verdicts


def test_order_domain_mismatch(square2):
    h1 = height_function(extremal_tilings(square2)[0])
    h2 = height_function(extremal_tilings(Domain.square(4))[0])
    with pytest.raises(DomainMismatchError):
        order_compare(h1, h2)


def test_meet_join_idempotent_absorbing(square4_tilings):
    t = square4_tilings[7]
    meet, join = lattice_meet_join(t, t)
    assert meet == t and join == t
    t_max, _ = extremal_tilings(t.domain)
    _, join = lattice_meet_join(t, t_max)
    assert join == t_max


def test_meet_join_against_enumeration():
    domain = Domain.rectangle(2, 4)
    ts = enumerate_domino_tilings(domain)
    hs = {t: height_function(t) for t in ts}
    pool = set(ts)
    for i, a in enumerate(ts):
        for b in ts[i + 1 :]:
            meet, join = lattice_meet_join(a, b)
            assert meet in pool and join in pool
            hm = height_function(meet).heights
            hj = height_function(join).heights
            assert np.array_equal(hm, np.minimum(hs[a].heights, hs[b].heights))
            assert np.array_equal(hj, np.maximum(hs[a].heights, hs[b].heights))


def test_lattice_laws():
    ts = enumerate_domino_tilings(Domain.rectangle(2, 4))
    rng = np.random.default_rng(3)
    for _ in range(30):
        a, b, c = (ts[int(rng.integers(len(ts)))] for _ in range(3))
        m_ab, j_ab = lattice_meet_join(a, b)
        m_ba, j_ba = lattice_meet_join(b, a)
        assert (m_ab, j_ab) == (m_ba, j_ba)  # commutative
        assert lattice_meet_join(a, a) == (a, a)  # idempotent
        # associative
        assert lattice_meet_join(lattice_meet_join(a, b)[1], c)[1] == \
            lattice_meet_join(a, lattice_meet_join(b, c)[1])[1]
        assert lattice_meet_join(lattice_meet_join(a, b)[0], c)[0] == \
            lattice_meet_join(a, lattice_meet_join(b, c)[0])[0]
        # absorption
        assert lattice_meet_join(a, lattice_meet_join(a, b)[1])[0] == a
        assert lattice_meet_join(a, lattice_meet_join(a, b)[0])[1] == a


# -- extremal tilings -------------------------------------------------------------


def test_extremal_2x2(square2):
    t_max, t_min = extremal_tilings(square2)
    assert {t_max, t_min} == set(enumerate_domino_tilings(square2))
    assert t_max != t_min


def test_untileable_L():
    d = Domain.from_faces(2, [(0, 0), (0, 1), (1, 0)])
    assert extremal_tilings(d) is None


def test_extremal_dominates_all_36(square4_tilings):
    assert len(square4_tilings) == 36
    t_max, t_min = extremal_tilings(Domain.square(4))
    h_max = height_function(t_max).heights
    h_min = height_function(t_min).heights
    for t in square4_tilings:
        h = height_function(t).heights
        assert (h_max >= h).all()
        assert (h_min <= h).all()


def test_untileable_iff_no_tilings_on_random_corpus():
    rng = np.random.default_rng(2025)
    domains = [helpers.random_subdomain(rng, 6) for _ in range(50)]
    for d in domains:
        count = len(enumerate_domino_tilings(d))
        ext = extremal_tilings(d)
        assert (ext is None) == (count == 0), d.to_text()
        if ext is not None:
            pool = set(enumerate_domino_tilings(d))
            assert ext[0] in pool and ext[1] in pool


# -- weights --------------------------------------------------------------------


def test_log_weight_uniform_and_unit_edges(square2):
    t = extremal_tilings(square2)[0]
    assert log_weight(t, Uniform()) == 0.0
    assert log_weight(t, EdgeWeights(1.0)) == 0.0


def test_volume_weight_delta(square2):
    w = VolumeWeights(1.0, {(1, 1): 2.0})
    t_h = tiling_from_dominoes(square2, [((0, 0), (0, 1)), ((1, 0), (1, 1))])
    t_v = tiling_from_dominoes(square2, [((0, 0), (1, 0)), ((0, 1), (1, 1))])
    assert log_weight(t_v, w) - log_weight(t_h, w) == pytest.approx(4 * np.log(2))


def test_weights_reject_nonpositive():
    with pytest.raises(ValueError):
        VolumeWeights(0.0)
    with pytest.raises(ValueError):
        EdgeWeights(1.0, {((0, 0), (0, 1)): -1.0})


# -- heights decode ---------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(idx=st.integers(min_value=0, max_value=35))
def test_heights_decode_inverts(idx):
    ts = enumerate_domino_tilings(Domain.square(4))
    t = ts[idx]
    h = height_function(t)
    assert tiling_from_heights(t.domain, h.heights) == t
