"""Deterministic, replayable per-site uniform random streams.

Every draw is a pure function of ``(seed, site, sub-stream tag, step)``; there
is no shared cursor, so sites can be queried in any order (or all at once as a
grid) and always see the same values.  This is what makes the grand coupling
and the reuse of seeds across coupling-from-the-past rounds well defined.

The construction is counter-based: a 64-bit key is derived per (site, tag) by
feeding an injective stream index through the splitmix64 update, and the k-th
value of a stream is the splitmix64 output at counter k.  Bit compatibility
with any particular generator is not a goal; determinism plus the statistical
gates in the test suite are the contract.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError, OutOfGridError

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_CAPACITY = 1 << 48  # max sites per family; tags live above bit 48

# Sub-stream tags.  SITE drives per-site coins; GLOBAL drives per-sweep
# whole-chain choices (e.g. which color class rotates); DERIVE hands out
# child seeds for nested samplers.  Keeping them apart means adding an
# observable never perturbs the chain's randomness.
TAG_SITE = 0
TAG_GLOBAL = 1
TAG_DERIVE = 2


def _mix(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix_u64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def _splitmix_at(state: int, counter: int) -> int:
    return _mix((state + (counter + 1) * _GOLDEN) & _MASK)


def derive_seed(seed: int, index: int, salt: int = 0) -> int:
    """Deterministic 64-bit child seed: pure in (seed, index, salt)."""
    return _splitmix_at(_mix(seed ^ (salt * 0xD6E8FEB86659FD93)), index)


def _to_unit(x: int) -> float:
    return (x >> 11) * 2.0**-53


class StreamFamily:
    """A grid of independent uniform streams keyed by one 64-bit seed.

    ``uniform(site, step)`` is pure in (seed, site, step); the same triple
    always returns the same value, from any thread, in any query order.
    """

    def __init__(self, seed: int, shape: tuple[int, int]):
        rows, cols = shape
        if rows <= 0 or cols <= 0:
            raise ValueError(f"grid shape must be positive, got {shape}")
        if rows * cols >= _CAPACITY:
            raise CapacityError(
                f"grid of {rows * cols} sites exceeds the {_CAPACITY} stream capacity"
            )
        self.seed = seed & _MASK
        self.shape = (rows, cols)
        self._base = _mix(self.seed ^ 0x6A09E667F3BCC909)
        self._key_grids: dict[int, np.ndarray] = {}

    def _stream_index(self, site: tuple[int, int], tag: int) -> int:
        r, c = site
        rows, cols = self.shape
        if not (0 <= r < rows and 0 <= c < cols):
            raise OutOfGridError(f"site {site} outside grid {self.shape}")
        return (tag << 48) | (r * cols + c)

    def site_key(self, site: tuple[int, int], tag: int = TAG_SITE) -> int:
        """The 64-bit parameterization of one site's stream."""
        return _splitmix_at(self._base, self._stream_index(site, tag))

    def uniform(self, site: tuple[int, int], step: int, tag: int = TAG_SITE) -> float:
        """Uniform [0,1) draw for (site, step); pure, replayable."""
        return _to_unit(_splitmix_at(self.site_key(site, tag), step))

    def global_uniform(self, step: int) -> float:
        """Per-step chain-wide coin from the dedicated global sub-stream."""
        return _to_unit(_splitmix_at(self.site_key((0, 0), TAG_GLOBAL), step))

    def _keys(self, tag: int) -> np.ndarray:
        grid = self._key_grids.get(tag)
        if grid is None:
            rows, cols = self.shape
            idx = np.arange(rows * cols, dtype=np.uint64).reshape(rows, cols)
            idx += np.uint64((tag << 48) + 1)
            idx *= np.uint64(_GOLDEN)
            idx += np.uint64(self._base)
            grid = _mix_u64(idx)
            self._key_grids[tag] = grid
        return grid

    def uniform_grid(self, step: int, tag: int = TAG_SITE) -> np.ndarray:
        """Uniform [0,1) draws for every site at one step, as a float64 grid.

        Bit-identical to calling :meth:`uniform` site by site.
        """
        z = self._keys(tag) + np.uint64(((step + 1) * _GOLDEN) & _MASK)
        return (_mix_u64(z) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def seed_family(seed: int, shape: tuple[int, int]) -> StreamFamily:
    """Build the family of per-site streams for a grid, keyed by ``seed``."""
    return StreamFamily(seed, shape)


# -- batched forms -----------------------------------------------------------
#
# The batched helpers below are bit-identical to StreamFamily queries with the
# corresponding scalar seed; samplers that evolve many chains in lock step use
# them so that results never depend on how chains are grouped into batches.


def key_grid_batch(seeds: np.ndarray, shape: tuple[int, int], tag: int = TAG_SITE) -> np.ndarray:
    """Per-site stream keys for a batch of seeds; shape (B, rows, cols)."""
    rows, cols = shape
    if rows * cols >= _CAPACITY:
        raise CapacityError(f"grid of {rows * cols} sites exceeds capacity")
    seeds = np.asarray(seeds, dtype=np.uint64)
    base = _mix_u64(seeds ^ np.uint64(0x6A09E667F3BCC909))
    idx = np.arange(rows * cols, dtype=np.uint64).reshape(rows, cols)
    idx += np.uint64((tag << 48) + 1)
    idx *= np.uint64(_GOLDEN)
    return _mix_u64(base[:, None, None] + idx[None, :, :])


def global_key_batch(seeds: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Per-chain global-coin stream keys; shape (B,)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    base = _mix_u64(seeds ^ np.uint64(0x6A09E667F3BCC909))
    idx = np.uint64(((TAG_GLOBAL << 48) + 1) * _GOLDEN & _MASK)
    return _mix_u64(base + idx)


def uniform_from_keys(keys: np.ndarray, step: int) -> np.ndarray:
    """Uniform [0,1) draws at one step for an array of stream keys."""
    z = keys + np.uint64(((step + 1) * _GOLDEN) & _MASK)
    return (_mix_u64(z) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def uniform(family: StreamFamily, site: tuple[int, int], step: int) -> float:
    """Functional form of :meth:`StreamFamily.uniform`."""
    return family.uniform(site, step)
