"""Coupling-from-the-past: schedules, collapse, exactness, replay."""

from collections import Counter

import numpy as np
import pytest

from tilesampler import (
    CftpSchedule,
    CftpTrace,
    ConvergenceCapExceeded,
    Domain,
    DomainMismatchError,
    SweepPlan,
    Uniform,
    UntileableDomain,
    VolumeWeights,
    cftp_sample,
    cftp_sample_many,
    collapse_check,
    enumerate_domino_tilings,
    exact_distribution,
    extremal_tilings,
    height_function,
    random_walk_batch,
    total_variation,
)
from tilesampler.lattice import Tiling


def test_single_domino_domain_immediate():
    d = Domain.rectangle(1, 2)
    trace = CftpTrace()
    t = cftp_sample(d, SweepPlan(d), 9, trace=trace)
    assert t == enumerate_domino_tilings(d)[0]
    assert trace.rounds == []  # zero sweeps after the first collapse check


def test_untileable_domain_raises():
    d = Domain.from_faces(2, [(0, 0), (0, 1), (1, 0)])
    with pytest.raises(UntileableDomain):
        cftp_sample(d, SweepPlan(d), 1)


def test_collapse_check_basics():
    d = Domain.square(4)
    t_max, t_min = extremal_tilings(d)
    assert collapse_check(t_max, t_max)
    assert not collapse_check(t_max, t_min)
    other = extremal_tilings(Domain.square(2))[0]
    with pytest.raises(DomainMismatchError):
        collapse_check(t_max, other)


def test_collapse_is_absorbing():
    d = Domain.rectangle(2, 3)
    plan = SweepPlan(d)
    t = cftp_sample(d, plan, 44)
    a = t.states[None]
    b = t.states.copy()[None]
    seeds = np.array([123], dtype=np.uint64)
    for _ in range(5):
        a = random_walk_batch(a, seeds, 16, plan)
        b = random_walk_batch(b, seeds, 16, plan)
        assert np.array_equal(a, b)


def test_uniformity_2x2():
    d = Domain.square(2)
    samples = cftp_sample_many(d, SweepPlan(d), 2024, 16000)
    freq = Counter(t.state((1, 1)) for t in samples)
    for state in (3, 12):
        assert abs(freq[state] / 16000 - 0.5) <= 0.012


def test_uniformity_aztec2():
    d = Domain.aztec(2)
    states = enumerate_domino_tilings(d)
    assert len(states) == 8
    samples = cftp_sample_many(d, SweepPlan(d), 31415, 16000)
    idx = {s: i for i, s in enumerate(states)}
    freq = Counter(idx[s] for s in samples)
    for i in range(8):
        assert abs(freq[i] / 16000 - 0.125) <= 0.008


def test_exactness_total_variation():
    # uniform case on a space of 11 states
    d = Domain.rectangle(3, 4)
    states = enumerate_domino_tilings(d)
    assert len(states) == 11
    dist = exact_distribution(states, Uniform())
    samples = cftp_sample_many(d, SweepPlan(d), 5, 20000)
    emp = Counter(samples)
    tv = total_variation({s: emp.get(s, 0) / 20000 for s in states}, dist)
    assert tv < 0.02
    # weighted case on the 2x2 square
    d2 = Domain.square(2)
    w = VolumeWeights(1.0, {(1, 1): 2.0})
    states2 = enumerate_domino_tilings(d2)
    dist2 = exact_distribution(states2, w)
    assert sorted(dist2.values()) == pytest.approx([1 / 17, 16 / 17])
    samples2 = cftp_sample_many(d2, SweepPlan(d2, w), 6, 20000)
    emp2 = Counter(samples2)
    tv2 = total_variation({s: emp2.get(s, 0) / 20000 for s in states2}, dist2)
    assert tv2 < 0.02


def test_sandwich_invariant():
    rng = np.random.default_rng(17)
    import helpers

    for _ in range(20):
        domain = helpers.random_tileable_domain(rng, 6)
        plan = SweepPlan(domain)
        t_max, t_min = extremal_tilings(domain)
        master = int(rng.integers(2**62))
        from tilesampler.cftp import schedule_seed

        for round_no in range(1, 7):
            hi, lo = t_max.states[None], t_min.states[None]
            for i in range(round_no, 0, -1):
                seeds = np.array([schedule_seed(master, i)], dtype=np.uint64)
                hi = random_walk_batch(hi, seeds, 2**i, plan)
                lo = random_walk_batch(lo, seeds, 2**i, plan)
                h_hi = height_function(Tiling(domain, hi[0])).heights
                h_lo = height_function(Tiling(domain, lo[0])).heights
                m = domain.vertex_mask
                assert (h_lo[m] <= h_hi[m]).all()


def test_seed_replay_across_rounds():
    d = Domain.square(6)
    trace = CftpTrace()
    t1 = cftp_sample(d, SweepPlan(d), 271828, trace=trace)
    assert trace.collapsed_at == len(trace.rounds)
    for earlier, later in zip(trace.rounds, trace.rounds[1:]):
        # matching backward intervals carry bit-identical (seed, steps) pairs
        assert later[1:] == earlier
        assert later[0][1] == 2 * earlier[0][1]
    # whole runs replay bit-exactly from the master seed
    trace2 = CftpTrace()
    t2 = cftp_sample(d, SweepPlan(d), 271828, trace=trace2)
    assert t1 == t2
    assert trace.rounds == trace2.rounds


def test_coalescence_monotone_in_rounds():
    # once a round coalesces, replaying the schedule with one more pair
    # prepended coalesces to the same state
    from tilesampler.cftp import schedule_seed

    d = Domain.rectangle(2, 3)
    plan = SweepPlan(d)
    t_max, t_min = extremal_tilings(d)
    master = 13579
    final = None
    collapsed_rounds = []
    for round_no in range(1, 8):
        hi, lo = t_max.states[None], t_min.states[None]
        for i in range(round_no, 0, -1):
            seeds = np.array([schedule_seed(master, i)], dtype=np.uint64)
            hi = random_walk_batch(hi, seeds, 2**i, plan)
            lo = random_walk_batch(lo, seeds, 2**i, plan)
        if np.array_equal(hi, lo):
            collapsed_rounds.append(round_no)
            if final is None:
                final = hi.copy()
            else:
                assert np.array_equal(hi, final)
    assert collapsed_rounds, "no round coalesced"
    assert collapsed_rounds == list(range(collapsed_rounds[0], 8))
    assert np.array_equal(final[0], cftp_sample(d, plan, master).states)


def test_batching_does_not_change_samples():
    d = Domain.rectangle(2, 3)
    plan = SweepPlan(d)
    a = cftp_sample_many(d, plan, 999, 7, batch_size=2)
    b = cftp_sample_many(d, plan, 999, 7, batch_size=7)
    singles = [cftp_sample_many(d, plan, 999, k + 1)[k] for k in range(7)]
    assert a == b == singles


def test_convergence_cap():
    d = Domain.square(6)
    with pytest.raises(ConvergenceCapExceeded):
        cftp_sample(d, SweepPlan(d), 1, max_doublings=2)


def test_schedule_grow_prepends_immutably():
    sched = CftpSchedule(master_seed=42, max_doublings=5)
    seen = []
    for _ in range(4):
        sched.grow()
        seen.append(list(sched.pairs))
    for earlier, later in zip(seen, seen[1:]):
        assert later[1:] == earlier
    lengths = [steps for _, steps in sched.pairs]
    assert lengths == [16, 8, 4, 2]
    with pytest.raises(ConvergenceCapExceeded):
        sched.grow()
        sched.grow()


def test_progress_records():
    import io

    d = Domain.square(4)
    buf = io.StringIO()
    cftp_sample(d, SweepPlan(d), 3, progress=buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines, "expected progress records"
    for ln in lines[:-1]:
        assert ln.startswith("round=") and ln.endswith("collapsed=False")
    assert lines[-1].endswith("collapsed=True")
    rounds = [int(ln.split()[0].split("=")[1]) for ln in lines]
    assert rounds == list(range(1, len(lines) + 1))
