"""Cluster Glauber dynamics for domino tilings.

One sweep rotates every vertex of one checkerboard color with its own
site-and-step-indexed coin, then recomputes the other color's states from the
rotated color.  Same-color vertices are never adjacent, so all rotations of a
sweep commute and together realize one admissible cluster move.

Coins and thresholds depend only on (seed, site, step) - never on the current
state - so a single coin sequence drives every coupled chain (the grand
coupling behind coupling-from-the-past).

All kernels operate on batches shaped ``(chains, rows, cols)``; the public
single-chain operations are thin wrappers around batch size 1, which keeps
results independent of how chains are grouped.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import rng
from .lattice import (
    HORIZONTAL_PAIR,
    VERTICAL_PAIR,
    Domain,
    EdgeWeights,
    Tiling,
    Uniform,
    VolumeWeights,
    WeightSpec,
    rotation_height_delta,
)


class Color(enum.IntEnum):
    """Checkerboard vertex colors; BLACK is even coordinate sum."""

    BLACK = 0
    WHITE = 1


class Sequential:
    """Run every band of a sweep in order on the calling thread."""

    workers = 1

    def run_bands(self, n_rows: int, fn) -> None:
        fn(0, n_rows)

    def __repr__(self):
        return "Sequential()"


class MultiThreaded:
    """Partition sweep rows into contiguous bands across worker threads.

    Rotation writes only its own cell and the update phase reads only the
    other color, so banding cannot race; outputs are bit-identical to
    Sequential by construction.
    """

    def __init__(self, workers: int):
        if workers < 1:
            raise ValueError("worker count must be positive")
        self.workers = workers
        self._pool = None

    def _executor(self) -> ThreadPoolExecutor:
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.workers)
        return self._pool

    def run_bands(self, n_rows: int, fn) -> None:
        w = min(self.workers, n_rows)
        if w <= 1:
            fn(0, n_rows)
            return
        bounds = np.linspace(0, n_rows, w + 1).astype(int)
        futures = [
            self._executor().submit(fn, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for f in futures:
            f.result()

    def __repr__(self):
        return f"MultiThreaded({self.workers})"


Backend = Sequential | MultiThreaded


# -- kernels -----------------------------------------------------------------


def rotate_kernel(s: int, u: float, p_up: float) -> int:
    """Attempt an up-rotation when u < p_up, else a down-rotation.

    Only the two rotateable states move: 3 -> 12 (up) and 12 -> 3 (down);
    every other state is a no-op.
    """
    if u < p_up:
        return VERTICAL_PAIR if s == HORIZONTAL_PAIR else s
    return HORIZONTAL_PAIR if s == VERTICAL_PAIR else s


def update_kernel(t_self: np.ndarray, t_other: np.ndarray, i: int, j: int, color: Color) -> int:
    """Recompute one sub-array entry from the other color's sub-array.

    Each bit of the new state copies the neighbor's view of the shared edge;
    reads outside the sub-array count as zero padding.
    """
    par = i % 2 if color == Color.BLACK else (i + 1) % 2

    def other(a: int, b: int) -> int:
        if 0 <= a < t_other.shape[0] and 0 <= b < t_other.shape[1]:
            return int(t_other[a, b])
        return 0

    return (
        ((other(i - 1, j) & 2) >> 1)
        | ((other(i + 1, j) & 1) << 1)
        | ((other(i, j + par - 1) & 8) >> 1)
        | ((other(i, j + par) & 4) << 1)
    )


def heat_bath_p_up(vertex: tuple[int, int], w: WeightSpec) -> float:
    """Probability of choosing the up-rotated local configuration at a vertex.

    Heat bath: W_up / (W_up + W_down), the Gibbs ratio of the two parallel
    placements around the vertex.
    """
    if isinstance(w, Uniform):
        return 0.5
    if isinstance(w, VolumeWeights):
        ratio = w.q(vertex) ** rotation_height_delta(vertex)
        return ratio / (1.0 + ratio)
    if isinstance(w, EdgeWeights):
        r, c = vertex
        w_up = w.weight((r - 1, c - 1), (r, c - 1)) * w.weight((r - 1, c), (r, c))
        w_down = w.weight((r - 1, c - 1), (r - 1, c)) * w.weight((r, c - 1), (r, c))
        return w_up / (w_up + w_down)
    raise TypeError(f"unsupported weight spec {type(w)!r}")


@dataclass(frozen=True)
class SweepPlan:
    """Frozen per-domain sweep data: color classes and flip probabilities."""

    domain: Domain
    weights: WeightSpec = field(default_factory=Uniform)

    @cached_property
    def parity(self) -> np.ndarray:
        v = self.domain.n + 1
        r = np.arange(v)
        return ((r[:, None] + r[None, :]) % 2).astype(np.uint8)

    def color_class(self, color: Color) -> np.ndarray:
        """Vertices of one color: an admissible (pairwise non-adjacent) set."""
        return self.parity == int(color)

    @cached_property
    def p_up(self) -> np.ndarray:
        v = self.domain.n + 1
        if isinstance(self.weights, Uniform):
            return np.full((v, v), 0.5)
        grid = np.empty((v, v))
        for r in range(v):
            for c in range(v):
                grid[r, c] = heat_bath_p_up((r, c), self.weights)
        return grid


# -- batched sweep core -------------------------------------------------------


def _neighbor(a: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """a[..., r+dr, c+dc] with zero fill, over the trailing two axes."""
    out = np.zeros_like(a)
    rows = a.shape[-2]
    cols = a.shape[-1]
    rdst = slice(max(-dr, 0), rows + min(-dr, 0))
    rsrc = slice(max(dr, 0), rows + min(dr, 0))
    cdst = slice(max(-dc, 0), cols + min(-dc, 0))
    csrc = slice(max(dc, 0), cols + min(dc, 0))
    out[..., rdst, cdst] = a[..., rsrc, csrc]
    return out


def recompute_states(states: np.ndarray) -> np.ndarray:
    """Recompute every vertex state from its neighbors' edge bits."""
    up = _neighbor(states, -1, 0)
    down = _neighbor(states, 1, 0)
    left = _neighbor(states, 0, -1)
    right = _neighbor(states, 0, 1)
    return (
        ((up & 2) >> 1) | ((down & 1) << 1) | ((left & 8) >> 1) | ((right & 4) << 1)
    ).astype(np.uint8)


def sweep_batch(
    states: np.ndarray,
    u: np.ndarray,
    p_up: np.ndarray,
    colors: np.ndarray,
    parity: np.ndarray,
    backend: Backend,
    rotated_out: np.ndarray | None = None,
) -> np.ndarray:
    """One cluster sweep on a (B, V, V) batch; colors is the per-chain class.

    Rotates the chosen color with coins ``u`` and thresholds ``p_up``, then
    recomputes the other color.  ``rotated_out`` (bool, same shape) receives
    the sites whose state actually changed, when provided.
    """
    b, v, _ = states.shape
    rot_mask = parity[None, :, :] == colors[:, None, None]
    after_rot = states.copy()

    def rotate_band(lo: int, hi: int):
        s = states[:, lo:hi]
        attempt_up = u[:, lo:hi] < p_up[None, lo:hi]
        rot = np.where(
            attempt_up,
            np.where(s == HORIZONTAL_PAIR, VERTICAL_PAIR, s),
            np.where(s == VERTICAL_PAIR, HORIZONTAL_PAIR, s),
        )
        after_rot[:, lo:hi] = np.where(rot_mask[:, lo:hi], rot, s)

    backend.run_bands(v, rotate_band)

    out = after_rot.copy()

    def update_band(lo: int, hi: int):
        up = np.zeros((b, hi - lo, v), dtype=states.dtype)
        down = np.zeros_like(up)
        if lo > 0:
            up[:] = after_rot[:, lo - 1 : hi - 1]
        else:
            up[:, 1:] = after_rot[:, lo : hi - 1]
        if hi < v:
            down[:] = after_rot[:, lo + 1 : hi + 1]
        else:
            down[:, :-1] = after_rot[:, lo + 1 : hi]
        left = _neighbor(after_rot[:, lo:hi], 0, -1)
        right = _neighbor(after_rot[:, lo:hi], 0, 1)
        new = (
            ((up & 2) >> 1) | ((down & 1) << 1) | ((left & 8) >> 1) | ((right & 4) << 1)
        ).astype(states.dtype)
        out[:, lo:hi] = np.where(rot_mask[:, lo:hi], after_rot[:, lo:hi], new)

    backend.run_bands(v, update_band)
    if rotated_out is not None:
        rotated_out[:] = (out != states) & rot_mask
    return out


def _color_coins(global_keys: np.ndarray, step: int) -> np.ndarray:
    """Per-chain color choice for one step: BLACK when the coin is < 1/2."""
    coin = rng.uniform_from_keys(global_keys, step)
    return (coin >= 0.5).astype(np.int8)


try:
    from ._kernels import domino_walk as _fused_walk
except ImportError:  # numba unavailable: the numpy path below is complete
    _fused_walk = None


def random_walk_batch(
    states: np.ndarray,
    seeds: np.ndarray,
    n_steps: int,
    plan: SweepPlan,
    backend: Backend | None = None,
    use_fused: bool | None = None,
) -> np.ndarray:
    """Evolve a (B, V, V) batch of chains for n_steps coupled cluster sweeps.

    Chain b draws all its randomness from seeds[b]; the result for each chain
    is bit-identical to running it alone.  The fused kernel and the numpy
    path compute the same streams and kernels and agree bit for bit;
    ``use_fused`` forces one of them (None picks the fused path if built).
    """
    backend = backend or Sequential()
    v = states.shape[-1]
    seeds = np.asarray(seeds, dtype=np.uint64)
    site_keys = rng.key_grid_batch(seeds, (v, v), rng.TAG_SITE)
    global_keys = rng.global_key_batch(seeds, (v, v))
    p_up = plan.p_up
    out = states.astype(np.uint8, copy=True)
    if use_fused is None:
        use_fused = _fused_walk is not None
    if use_fused:
        if _fused_walk is None:
            raise RuntimeError("fused kernels are not available (numba missing)")

        def chain_band(lo: int, hi: int):
            _fused_walk(out[lo:hi], site_keys[lo:hi], global_keys[lo:hi], p_up, n_steps)

        backend.run_bands(out.shape[0], chain_band)
        return out
    parity = plan.parity
    for step in range(n_steps):
        colors = _color_coins(global_keys, step)
        u = rng.uniform_from_keys(site_keys, step)
        out = sweep_batch(out, u, p_up, colors, parity, backend)
    return out


# -- public single-chain operations -------------------------------------------


def sweep(
    t: Tiling,
    f: rng.StreamFamily,
    step: int,
    color: Color,
    plan: SweepPlan,
    backend: Backend | None = None,
    return_rotated: bool = False,
):
    """Rotate every vertex of ``color`` with its (site, step) coin, then
    recompute the other color.  Returns a valid tiling."""
    backend = backend or Sequential()
    u = f.uniform_grid(step)[None, :, :]
    states = t.states[None, :, :]
    colors = np.array([int(color)], dtype=np.int8)
    rotated = np.zeros_like(states, dtype=bool) if return_rotated else None
    new = sweep_batch(states, u, plan.p_up, colors, plan.parity, backend, rotated)
    result = Tiling(t.domain, new[0])
    if return_rotated:
        return result, rotated[0]
    return result


def random_walk(
    t: Tiling,
    seed: int,
    n_steps: int,
    plan: SweepPlan,
    backend: Backend | None = None,
) -> Tiling:
    """Run n_steps sweeps, choosing the rotating color uniformly per step.

    All randomness is a pure function of ``seed``, so identical calls yield
    identical tilings and coupled chains can share one coin sequence.
    """
    if n_steps < 0:
        raise ValueError("step count must be non-negative")
    states = random_walk_batch(
        t.states[None, :, :], np.array([seed], dtype=np.uint64), n_steps, plan, backend
    )
    return Tiling(t.domain, states[0])
