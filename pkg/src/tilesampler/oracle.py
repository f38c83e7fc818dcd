"""Exhaustive enumeration oracles and exact Gibbs distributions.

These are test-side tools: backtracking enumeration over faces (dominoes,
lozenges) or vertex-by-vertex edge assignment with ice-rule pruning
(six-vertex), plus the exact normalized distribution for any weight spec.
Guarded to refuse state spaces above a hard cap rather than hang.
"""

from __future__ import annotations

import numpy as np

from .errors import StateSpaceTooLarge
from .lattice import Domain, Tiling, WeightSpec, log_weight, tiling_from_dominoes
from .lozenge import LozengeTiling, TriDomain, tiling_from_lozenges
from .sixvertex import Boundary, SixVertexConfig

GUARD = 10**6


def enumerate_domino_tilings(domain: Domain, guard: int = GUARD) -> list[Tiling]:
    """All tilings of the domain, by face-by-face backtracking."""
    faces = [tuple(f) for f in np.argwhere(domain.faces)]
    order = {f: i for i, f in enumerate(sorted(faces))}
    results: list[list[tuple]] = []
    covered = set()

    def neighbors(f):
        r, c = f
        return [g for g in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)) if g in order]

    def rec(pairs):
        if len(results) > guard:
            raise StateSpaceTooLarge(f"more than {guard} tilings")
        free = [f for f in sorted(faces) if f not in covered]
        if not free:
            results.append(list(pairs))
            return
        f = free[0]
        covered.add(f)
        for g in neighbors(f):
            if g in covered:
                continue
            covered.add(g)
            pairs.append(tuple(sorted((f, g))))
            rec(pairs)
            pairs.pop()
            covered.remove(g)
        covered.remove(f)

    if len(faces) % 2 == 0:
        rec([])
    return [tiling_from_dominoes(domain, m) for m in results]


def enumerate_lozenge_tilings(domain: TriDomain, guard: int = GUARD) -> list[LozengeTiling]:
    """All lozenge tilings, by triangle-by-triangle backtracking."""
    tris = domain.triangles()
    results = []
    covered = set()

    def rec(pairs):
        if len(results) > guard:
            raise StateSpaceTooLarge(f"more than {guard} tilings")
        free = [t for t in tris if t not in covered]
        if not free:
            results.append(list(pairs))
            return
        t = free[0]
        covered.add(t)
        for g in domain._neighbors(t):
            if g in covered:
                continue
            covered.add(g)
            pairs.append((t, g) if t[0] == "up" else (g, t))
            rec(pairs)
            pairs.pop()
            covered.remove(g)
        covered.remove(t)

    if domain.triangle_count % 2 == 0:
        rec([])
    return [tiling_from_lozenges(domain, m) for m in results]


# allowed (east, south) continuations given (west, north) occupancies
_SV_CONTINUATIONS = {
    (0, 0): [(0, 0)],
    (1, 0): [(1, 0), (0, 1)],
    (0, 1): [(1, 0), (0, 1)],
    (1, 1): [(1, 1)],
}


def enumerate_sixvertex(boundary: Boundary, guard: int = GUARD) -> list[SixVertexConfig]:
    """All ice-rule configurations with the given fixed boundary.

    Vertices are filled row-major; at each vertex the (west, north) pair is
    already fixed and the six types leave at most two (east, south) choices.
    """
    n = boundary.n
    h = np.zeros((n, n + 1), dtype=bool)
    v = np.zeros((n + 1, n), dtype=bool)
    h[:, 0] = boundary.left
    h[:, n] = boundary.right
    v[0, :] = boundary.top
    v[n, :] = boundary.bottom
    results: list[SixVertexConfig] = []

    def rec(idx: int):
        if len(results) > guard:
            raise StateSpaceTooLarge(f"more than {guard} configurations")
        if idx == n * n:
            results.append(SixVertexConfig(n, h.copy(), v.copy()))
            return
        r, c = divmod(idx, n)
        w = int(h[r, c])
        nn = int(v[r, c])
        for e, s in _SV_CONTINUATIONS[(w, nn)]:
            if c == n - 1 and e != int(h[r, n]):
                continue
            if r == n - 1 and s != int(v[n, c]):
                continue
            if c < n - 1:
                h[r, c + 1] = bool(e)
            if r < n - 1:
                v[r + 1, c] = bool(s)
            rec(idx + 1)
        # grids are overwritten on the next attempt; no undo needed beyond
        # the boundary columns, which are never touched

    rec(0)
    return results


def exact_distribution(states: list, weights: WeightSpec | object) -> dict:
    """Normalized Gibbs probabilities over an enumerated state list.

    Works for any state type with a matching ``state_log_weight``; dominoes
    use the lattice weight specs, six-vertex uses SVWeights, lozenges use
    Uniform/VolumeWeights.
    """
    logs = np.array([state_log_weight(s, weights) for s in states])
    logs -= logs.max()
    probs = np.exp(logs)
    probs /= probs.sum()
    return {s: float(p) for s, p in zip(states, probs)}


def state_log_weight(state, weights) -> float:
    """Log Gibbs weight of one state under the matching weight spec."""
    from .lattice import Uniform, VolumeWeights
    from .lozenge import loz_heights
    from .sixvertex import SVWeights, vertex_type_codes

    if isinstance(state, Tiling):
        return log_weight(state, weights)
    if isinstance(state, SixVertexConfig):
        if not isinstance(weights, SVWeights):
            raise TypeError("six-vertex states need SVWeights")
        table = np.log(weights.table(), out=np.zeros(16), where=weights.table() > 0)
        return float(table[vertex_type_codes(state)].sum())
    if isinstance(state, LozengeTiling):
        from .lozenge import LozEdgeWeights, lozenges_from_tiling

        if isinstance(weights, Uniform) or weights is None:
            return 0.0
        if isinstance(weights, VolumeWeights):
            h = loz_heights(state).heights
            mask = state.domain.vertex_mask
            total = 0.0
            for x, y in zip(*np.nonzero(mask)):
                total += h[x, y] * np.log(weights.q((int(x), int(y))))
            return float(total)
        if isinstance(weights, LozEdgeWeights):
            return float(
                sum(np.log(weights.weight(a, b)) for a, b in lozenges_from_tiling(state))
            )
        raise TypeError("lozenge states need Uniform, VolumeWeights, or LozEdgeWeights")
    raise TypeError(f"unknown state type {type(state)!r}")


def flip_graph_edges(states: list) -> dict:
    """Adjacency (by index) of the single-flip graph over enumerated states.

    Two states are adjacent when they differ by one elementary rotation or
    c-flip; detected representation-agnostically as "differ in exactly the
    neighborhood of one site", using each model's local move.
    """
    from .lattice import HORIZONTAL_PAIR, VERTICAL_PAIR
    from .lozenge import ROT_HIGH, ROT_LOW, states_grid_batch
    from .sixvertex import FaceHeights, flippable, heights_from_config, FlipDirection

    index = {s: i for i, s in enumerate(states)}
    adj: dict[int, set[int]] = {i: set() for i in index.values()}

    def connect(a, b):
        ia, ib = index[a], index.get(b)
        if ib is not None:
            adj[ia].add(ib)
            adj[ib].add(ia)

    for s in states:
        if isinstance(s, Tiling):
            grid = s.states
            for r, c in zip(*np.nonzero((grid == HORIZONTAL_PAIR) | (grid == VERTICAL_PAIR))):
                new = grid.copy()
                new[r, c] = VERTICAL_PAIR if grid[r, c] == HORIZONTAL_PAIR else HORIZONTAL_PAIR
                from .sweeps import recompute_states

                full = recompute_states(new[None])[0]
                parity = (r + c) % 2
                rr, cc = np.meshgrid(
                    np.arange(grid.shape[0]), np.arange(grid.shape[1]), indexing="ij"
                )
                keep = ((rr + cc) % 2) == parity
                merged = np.where(keep, new, full)
                connect(s, Tiling(s.domain, merged))
        elif isinstance(s, SixVertexConfig):
            fh = heights_from_config(s)
            for r in range(1, s.n):
                for c in range(1, s.n):
                    d = flippable(fh, (r, c))
                    if d is FlipDirection.NONE:
                        continue
                    h2 = fh.heights.copy()
                    h2[r, c] += 2 if d is FlipDirection.UP else -2
                    from .sixvertex import config_from_heights

                    connect(s, config_from_heights(FaceHeights(s.n, h2)))
        elif isinstance(s, LozengeTiling):
            grid = states_grid_batch(s.edges[None])[0]
            from .lozenge import _apply_fire

            for x, y in zip(*np.nonzero((grid == ROT_HIGH) | (grid == ROT_LOW))):
                fire = np.zeros_like(grid, dtype=bool)[None]
                fire[0, x, y] = True
                if grid[x, y] == ROT_LOW:
                    new = _apply_fire(s.edges[None], fire, np.zeros_like(fire))
                else:
                    new = _apply_fire(s.edges[None], np.zeros_like(fire), fire)
                connect(s, LozengeTiling(s.domain, new[0]))
        else:
            raise TypeError(f"unknown state type {type(s)!r}")
    return adj


def flip_graph_connected(states: list) -> bool:
    adj = flip_graph_edges(states)
    if not adj:
        return True
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(adj)


def flip_graph_diameter(states: list) -> int:
    """Largest BFS eccentricity over the flip graph (must be connected)."""
    adj = flip_graph_edges(states)
    diam = 0
    for src in adj:
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for i in frontier:
                for j in adj[i]:
                    if j not in dist:
                        dist[j] = dist[i] + 1
                        nxt.append(j)
            frontier = nxt
        if len(dist) != len(adj):
            raise ValueError("flip graph is not connected")
        diam = max(diam, max(dist.values()))
    return diam
