"""Shared test utilities: random domains and small-state-space generators."""

from __future__ import annotations

import numpy as np

from tilesampler import Domain
from tilesampler.errors import DomainError


def random_subdomain(rng: np.random.Generator, n: int, target: int | None = None) -> Domain:
    """A random edge-connected, simply-connected face set in an n x n box.

    Grown by randomized BFS from a random seed face; may have odd size or be
    color-imbalanced, so untileable outputs are common (intentionally).
    """
    target = target or int(rng.integers(2, n * n + 1))
    grid = np.zeros((n, n), dtype=bool)
    start = (int(rng.integers(n)), int(rng.integers(n)))
    grid[start] = True
    frontier = [start]
    while grid.sum() < target and frontier:
        i = int(rng.integers(len(frontier)))
        r, c = frontier[i]
        nbrs = [
            (rr, cc)
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
            if 0 <= rr < n and 0 <= cc < n and not grid[rr, cc]
        ]
        if not nbrs:
            frontier.pop(i)
            continue
        f = nbrs[int(rng.integers(len(nbrs)))]
        grid[f] = True
        frontier.append(f)
    try:
        return Domain(n, grid)
    except DomainError:
        return random_subdomain(rng, n, target)


def random_tileable_domain(rng: np.random.Generator, n: int) -> Domain:
    """A random simply-connected domain that is guaranteed tileable."""
    from tilesampler import extremal_tilings

    while True:
        d = random_subdomain(rng, n)
        if d.face_count % 2 == 0 and extremal_tilings(d) is not None:
            return d
