"""Coupling-from-the-past for monotone cluster dynamics.

The sampler keeps a list of (seed, steps) pairs, newest first; pair i (in
creation order) always runs 2**i sweeps.  Each round prepends one fresh pair
and replays the whole list onto the two extremal states, newest pair first,
so the oldest randomness is always applied last, immediately before time
zero.  Existing pairs are never altered: matching backward time intervals see
bit-identical randomness on every round, which is what makes the first
coalescence an exact stationary sample.

Fresh seeds come from a stream keyed by the caller's master seed, so whole
runs replay bit-exactly.  Many chains evolve in lock step as one array batch;
each chain's trajectory depends only on its own master seed, never on the
batch layout.  The engine is generic over the state representation: models
plug in their extremal states and a batched random-walk function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import rng
from .errors import ConvergenceCapExceeded, DomainMismatchError, UntileableDomain
from .lattice import Domain, Tiling, extremal_tilings
from .sweeps import Backend, Sequential, SweepPlan, random_walk_batch

_SEED_SALT = 0x51ED2701

# walk(states, pair_seeds, n_steps) -> states, batched over the leading axis
WalkFn = Callable[[np.ndarray, np.ndarray, int], np.ndarray]


@dataclass
class CftpSchedule:
    """The (seed, steps) pairs of one run, newest first.

    Pairs are only ever prepended; an existing pair is never altered, so the
    randomness attached to any backward interval is frozen once drawn.
    """

    master_seed: int
    max_doublings: int = 40
    pairs: list[tuple[int, int]] = field(default_factory=list)

    def grow(self) -> None:
        if len(self.pairs) >= self.max_doublings:
            raise ConvergenceCapExceeded(
                f"no coalescence after {self.max_doublings} doublings"
            )
        i = len(self.pairs) + 1
        self.pairs.insert(0, (rng.derive_seed(self.master_seed, i, _SEED_SALT), 2**i))

    @property
    def total_steps(self) -> int:
        return sum(steps for _, steps in self.pairs)


def schedule_seed(master_seed: int, round_no: int) -> int:
    """Seed of the pair created at the given (1-based) round."""
    return rng.derive_seed(master_seed, round_no, _SEED_SALT)


def chain_master_seed(master_seed: int, index: int) -> int:
    """Master seed of the index-th chain of a multi-sample run."""
    return rng.derive_seed(master_seed, index, rng.TAG_DERIVE)


def collapse_check(t1: Tiling, t2: Tiling) -> bool:
    """True iff the two chains have coalesced (identical state grids)."""
    if t1.domain != t2.domain:
        raise DomainMismatchError("tilings live on different domains")
    return np.array_equal(t1.states, t2.states)


@dataclass
class CftpTrace:
    """Schedule snapshots of chain 0, one list of (seed, steps) per round."""

    rounds: list[list[tuple[int, int]]] = field(default_factory=list)
    collapsed_at: Optional[int] = None


def run_cftp_batch(
    top0: np.ndarray,
    bot0: np.ndarray,
    walk: WalkFn,
    master_seeds: np.ndarray,
    max_doublings: int = 40,
    progress: Optional[Callable[[int, int, int, int], None]] = None,
    trace: Optional[CftpTrace] = None,
) -> np.ndarray:
    """Run monotone CFTP for a batch of master seeds.

    ``top0``/``bot0`` are single extremal states; the result stacks one
    coalesced state per master seed along the leading axis.  ``progress``
    receives (round, steps, chains collapsed so far, batch size) per round.
    """
    b = len(master_seeds)
    results = np.zeros((b,) + top0.shape, dtype=top0.dtype)
    active = np.arange(b)
    seeds_per_round: list[np.ndarray] = []
    reduce_axes = tuple(range(1, top0.ndim + 1))
    for round_no in range(1, max_doublings + 1):
        seeds_per_round.append(
            np.array(
                [schedule_seed(int(s), round_no) for s in master_seeds],
                dtype=np.uint64,
            )
        )
        top = np.repeat(top0[None], len(active), axis=0)
        bot = np.repeat(bot0[None], len(active), axis=0)
        # newest pair first: pair i runs 2**i sweeps, oldest randomness last
        for i in range(round_no, 0, -1):
            pair_seeds = seeds_per_round[i - 1][active]
            top = walk(top, pair_seeds, 2**i)
            bot = walk(bot, pair_seeds, 2**i)
        collapsed = (top == bot).all(axis=reduce_axes)
        if trace is not None and (0 in active):
            trace.rounds.append(
                [(int(seeds_per_round[i - 1][0]), 2**i) for i in range(round_no, 0, -1)]
            )
            if collapsed[np.searchsorted(active, 0)] and trace.collapsed_at is None:
                trace.collapsed_at = round_no
        if collapsed.any():
            results[active[collapsed]] = bot[collapsed]
            active = active[~collapsed]
        if progress is not None:
            progress(
                round_no,
                sum(2**i for i in range(1, round_no + 1)),
                b - len(active),
                b,
            )
        if len(active) == 0:
            return results
    raise ConvergenceCapExceeded(f"no coalescence after {max_doublings} doublings")


def cftp_sample(
    domain: Domain,
    plan: SweepPlan,
    master_seed: int,
    backend: Backend | None = None,
    max_doublings: int = 40,
    progress=None,
    trace: Optional[CftpTrace] = None,
) -> Tiling:
    """Draw one domino tiling exactly from the Gibbs measure of the plan.

    ``progress`` may be a writable text stream; each round appends one
    ``round=<i> steps=<n> collapsed=<bool>`` line.
    """
    return cftp_sample_many(
        domain, plan, master_seed, 1, backend, max_doublings, progress, trace
    )[0]


def cftp_sample_many(
    domain: Domain,
    plan: SweepPlan,
    master_seed: int,
    count: int,
    backend: Backend | None = None,
    max_doublings: int = 40,
    progress=None,
    trace: Optional[CftpTrace] = None,
    batch_size: int = 2048,
) -> list[Tiling]:
    """Draw ``count`` independent exact samples.

    Chain k runs from the derived master seed ``chain_master_seed(seed, k)``,
    so the k-th sample is the same whether drawn alone or in any batch.
    """
    backend = backend or Sequential()
    extremals = extremal_tilings(domain)
    if extremals is None:
        raise UntileableDomain("domain is not tileable")
    t_max, t_min = extremals
    if collapse_check(t_max, t_min):
        # |Omega| = 1: the unique tiling needs no sweeps at all
        return [t_max] * count

    progress_cb = None
    if progress is not None:
        def progress_cb(round_no, steps, collapsed, total):
            progress.write(
                f"round={round_no} steps={steps} collapsed={collapsed == total}\n"
            )

    def walk(states, pair_seeds, n_steps):
        return random_walk_batch(states, pair_seeds, n_steps, plan, backend)

    out: list[Tiling] = []
    for lo in range(0, count, batch_size):
        hi = min(lo + batch_size, count)
        masters = np.array(
            [chain_master_seed(master_seed, k) for k in range(lo, hi)],
            dtype=np.uint64,
        )
        states = run_cftp_batch(
            t_max.states,
            t_min.states,
            walk,
            masters,
            max_doublings,
            progress_cb,
            trace if lo == 0 else None,
        )
        out.extend(Tiling(domain, s) for s in states)
    return out
