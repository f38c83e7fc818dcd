"""Fused walk kernels (numba).

Bit-identical to the numpy sweep path: the same splitmix64 stream, the same
rotate/update semantics, fused into one in-place pass per sweep.  Rotation
writes only its own cell and the update pass writes only opposite-color
cells while reading only rotated-color cells, so everything runs in place
and chains never interact; splitting a batch across threads cannot change
any result.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U = np.uint64
_TWO_NEG53 = np.float64(2.0**-53)


@njit(nogil=True, cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _U(30))) * _M1
    z = (z ^ (z >> _U(27))) * _M2
    return z ^ (z >> _U(31))


@njit(nogil=True, cache=True, inline="always")
def _unit(x):
    return np.float64(x >> _U(11)) * _TWO_NEG53


@njit(nogil=True, cache=True)
def domino_walk(states, site_keys, global_keys, p_up, n_steps):
    """Evolve a (B, V, V) uint8 batch in place for n_steps sweeps."""
    b, v, _ = states.shape
    for k in range(b):
        s = states[k]
        keys = site_keys[k]
        gkey = global_keys[k]
        for step in range(n_steps):
            salt = (_U(step) + _U(1)) * _GOLD
            color = 0 if _unit(_mix(gkey + salt)) < 0.5 else 1
            for r in range(v):
                base = (r + color) & 1
                for c in range(base, v, 2):
                    x = s[r, c]
                    if x == 3 or x == 12:
                        u = _unit(_mix(keys[r, c] + salt))
                        if u < p_up[r, c]:
                            s[r, c] = 12
                        else:
                            s[r, c] = 3
            other = 1 - color
            for r in range(v):
                base = (r + other) & 1
                for c in range(base, v, 2):
                    new = 0
                    if r > 0:
                        new |= (s[r - 1, c] & 2) >> 1
                    if r < v - 1:
                        new |= (s[r + 1, c] & 1) << 1
                    if c > 0:
                        new |= (s[r, c - 1] & 8) >> 1
                    if c < v - 1:
                        new |= (s[r, c + 1] & 4) << 1
                    s[r, c] = new
