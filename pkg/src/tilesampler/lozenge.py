"""Lozenge tilings of simply-connected triangular-lattice domains.

Axial coordinates: lattice vertex (x, y) sits at Cartesian
``(x + y/2, y*sqrt(3)/2)``.  The six edge directions at a vertex, in cyclic
order, are d0=(1,0), d1=(0,1), d2=(-1,1), d3=(-1,0), d4=(0,-1), d5=(1,-1).
Up-triangle (x, y) has corners (x,y), (x+1,y), (x,y+1); down-triangle (x, y)
has corners (x+1,y), (x,y+1), (x+1,y+1).  A lozenge is an adjacent up/down
pair and "crosses" their shared edge.

The per-vertex 6-bit state sets bit k when the edge in direction dk is
crossed.  The two rotateable states (a three-lozenge star around the vertex)
are derived once by enumerating all local covers, not transcribed from any
picture.  Heights on vertices follow: walking an uncrossed edge in an even
direction adds +1 (odd: -1), a crossed edge -2 (odd: +2); one rotation moves
a single vertex by exactly 3 units, which we call one cube.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations
from typing import Iterable, Optional

import numpy as np

from . import rng
from .cftp import CftpTrace, chain_master_seed, run_cftp_batch
from .errors import (
    CoverageError,
    DomainError,
    InconsistencyError,
    OutOfDomainError,
    OverlapError,
    UntileableDomain,
)
from .lattice import Uniform, VolumeWeights
from .sweeps import Backend, Sequential

Triangle = tuple[str, int, int]  # ("up"|"down", x, y)
Lozenge = tuple[Triangle, Triangle]

DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
CUBE_UNIT = 3  # height change of one rotation, in height-rule units

# height step along direction k: (uncrossed, crossed)
_STEPS = tuple((1, -2) if k % 2 == 0 else (-1, 2) for k in range(6))


def _up_edges(x: int, y: int) -> tuple[tuple[str, int, int], ...]:
    return (("a", x, y), ("b", x, y), ("c", x, y + 1))


def _down_edges(x: int, y: int) -> tuple[tuple[str, int, int], ...]:
    return (("b", x + 1, y), ("a", x, y + 1), ("c", x, y + 1))


def _edge_at(x: int, y: int, k: int) -> tuple[str, int, int]:
    """The edge leaving vertex (x, y) in direction k, as a grid key."""
    if k == 0:
        return ("a", x, y)
    if k == 1:
        return ("b", x, y)
    if k == 2:
        return ("c", x - 1, y + 1)
    if k == 3:
        return ("a", x - 1, y)
    if k == 4:
        return ("b", x, y - 1)
    return ("c", x, y)


def _edge_triangles(kind: str, x: int, y: int) -> tuple[Triangle, Triangle]:
    """The up/down triangles on either side of an edge grid entry."""
    if kind == "a":
        return ("up", x, y), ("down", x, y - 1)
    if kind == "b":
        return ("up", x, y), ("down", x - 1, y)
    return ("up", x, y - 1), ("down", x, y - 1)


def _star_triangles(x: int, y: int) -> list[Triangle]:
    return [
        ("up", x, y),
        ("up", x - 1, y),
        ("up", x, y - 1),
        ("down", x - 1, y),
        ("down", x, y - 1),
        ("down", x - 1, y - 1),
    ]


def shared_edge(a: Triangle, b: Triangle) -> tuple[str, int, int]:
    """Edge shared by an adjacent up/down pair; raises if not adjacent."""
    if a[0] == "down":
        a, b = b, a
    if a[0] != "up" or b[0] != "down":
        raise OutOfDomainError(f"a lozenge needs one up and one down triangle: {a}, {b}")
    ea = set(_up_edges(a[1], a[2]))
    eb = set(_down_edges(b[1], b[2]))
    common = ea & eb
    if len(common) != 1:
        raise OutOfDomainError(f"triangles {a} and {b} are not adjacent")
    return common.pop()


def _derive_rotation_masks() -> tuple[int, int]:
    """Enumerate the three-lozenge covers of a vertex star.

    Returns (high, low): the state whose vertex sits higher, and its partner.
    There are exactly two covers; their states are complementary alternating
    masks.
    """
    x = y = 1
    ups = [t for t in _star_triangles(x, y) if t[0] == "up"]
    downs = [t for t in _star_triangles(x, y) if t[0] == "down"]
    masks = []
    for perm in permutations(range(3)):
        try:
            pairs = [(ups[i], downs[perm[i]]) for i in range(3)]
            edges = {shared_edge(a, b) for a, b in pairs}
        except OutOfDomainError:
            continue
        state = 0
        for k in range(6):
            if _edge_at(x, y, k) in edges:
                state |= 1 << k
        if bin(state).count("1") == 3:
            masks.append(state)
    masks = sorted(set(masks))
    assert len(masks) == 2, masks
    # the higher state: integrate h(v) - h(v + d0) from the d0 edge
    def rel_height(state: int) -> int:
        crossed = bool(state & 1)
        return -_STEPS[0][crossed]

    hi, lo = sorted(masks, key=rel_height, reverse=True)
    return hi, lo


ROT_HIGH, ROT_LOW = _derive_rotation_masks()


@dataclass(frozen=True)
class TriDomain:
    """A simply-connected union of up/down triangles in an axial box."""

    size: tuple[int, int]
    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        sx, sy = self.size
        up = np.asarray(self.up, dtype=bool)
        down = np.asarray(self.down, dtype=bool)
        if up.shape != (sx, sy) or down.shape != (sx, sy):
            raise DomainError(f"triangle grids must be {self.size}")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)
        if not (up.any() or down.any()):
            raise DomainError("domain has no triangles")
        self._check_connected()
        self._check_simply_connected()

    def triangle_in(self, tri: Triangle) -> bool:
        kind, x, y = tri
        sx, sy = self.size
        if not (0 <= x < sx and 0 <= y < sy):
            return False
        return bool((self.up if kind == "up" else self.down)[x, y])

    def _neighbors(self, tri: Triangle) -> list[Triangle]:
        kind, x, y = tri
        if kind == "up":
            cands = [("down", x, y), ("down", x - 1, y), ("down", x, y - 1)]
        else:
            cands = [("up", x, y), ("up", x + 1, y), ("up", x, y + 1)]
        return [t for t in cands if self.triangle_in(t)]

    def triangles(self) -> list[Triangle]:
        out = [("up", int(x), int(y)) for x, y in np.argwhere(self.up)]
        out += [("down", int(x), int(y)) for x, y in np.argwhere(self.down)]
        return sorted(out, key=lambda t: (t[1], t[2], t[0] == "down"))

    def _check_connected(self):
        tris = self.triangles()
        seen = {tris[0]}
        stack = [tris[0]]
        while stack:
            for nb in self._neighbors(stack.pop()):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != len(tris):
            raise DomainError("triangles are not edge-connected")

    def _check_simply_connected(self):
        # Euler characteristic of a disk: V - E + F = 1
        tris = self.triangles()
        verts: set[tuple[int, int]] = set()
        edges: set[tuple[str, int, int]] = set()
        for kind, x, y in tris:
            if kind == "up":
                verts.update({(x, y), (x + 1, y), (x, y + 1)})
                edges.update(_up_edges(x, y))
            else:
                verts.update({(x + 1, y), (x, y + 1), (x + 1, y + 1)})
                edges.update(_down_edges(x, y))
        if len(verts) - len(edges) + len(tris) != 1:
            raise DomainError("triangle set is not simply connected")

    @cached_property
    def triangle_count(self) -> int:
        return int(self.up.sum() + self.down.sum())

    @cached_property
    def vertex_mask(self) -> np.ndarray:
        sx, sy = self.size
        m = np.zeros((sx + 1, sy + 1), dtype=bool)
        for kind, x, y in self.triangles():
            if kind == "up":
                m[x, y] = m[x + 1, y] = m[x, y + 1] = True
            else:
                m[x + 1, y] = m[x, y + 1] = m[x + 1, y + 1] = True
        return m

    @cached_property
    def reference_vertex(self) -> tuple[int, int]:
        xs, ys = np.nonzero(self.vertex_mask)
        i = np.lexsort((ys, xs))[0]
        return (int(xs[i]), int(ys[i]))

    @classmethod
    def hexagon(cls, a: int, b: int, c: int) -> "TriDomain":
        """Hexagon with side lengths (a, b, c, a, b, c)."""
        if min(a, b, c) < 1:
            raise DomainError("hexagon sides must be positive")
        sx, sy = a + c, b + c
        up = np.zeros((sx, sy), dtype=bool)
        down = np.zeros((sx, sy), dtype=bool)
        for x in range(sx):
            for y in range(sy):
                if x + y >= c and x + y + 1 <= a + b + c:
                    up[x, y] = True
                if x + y + 1 >= c and x + y + 2 <= a + b + c:
                    down[x, y] = True
        return cls((sx, sy), up, down)

    @classmethod
    def from_text(cls, text: str) -> "TriDomain":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        try:
            sx, sy = (int(tok) for tok in lines[0].split())
        except (ValueError, IndexError) as exc:
            raise DomainError("triangle domain file must start with 'sx sy'") from exc
        if len(lines) != 1 + 2 * sx:
            raise DomainError(f"expected {2 * sx} grid rows, got {len(lines) - 1}")
        def parse(rows):
            grid = np.zeros((sx, sy), dtype=bool)
            for x, ln in enumerate(rows):
                if len(ln) != sy or set(ln) - {"0", "1"}:
                    raise DomainError(f"row {x} must be {sy} characters of 0/1")
                grid[x] = [ch == "1" for ch in ln]
            return grid
        return cls((sx, sy), parse(lines[1 : 1 + sx]), parse(lines[1 + sx :]))

    def to_text(self) -> str:
        rows = [f"{self.size[0]} {self.size[1]}"]
        for grid in (self.up, self.down):
            rows += ["".join("1" if v else "0" for v in row) for row in grid]
        return "\n".join(rows) + "\n"

    def __eq__(self, other):
        return (
            isinstance(other, TriDomain)
            and self.size == other.size
            and np.array_equal(self.up, other.up)
            and np.array_equal(self.down, other.down)
        )

    def __hash__(self):
        return hash((self.size, self.up.tobytes(), self.down.tobytes()))


@dataclass(frozen=True)
class LozengeTiling:
    """Crossed-edge grids of a lozenge tiling.

    The three (sx+1, sy+1) grids hold the a/b/c edge families, zero-padded
    beyond their valid ranges, so vertex states assemble by pure shifts.
    """

    domain: TriDomain
    edges: np.ndarray  # bool, shape (3, sx+1, sy+1)

    def __post_init__(self):
        sx, sy = self.domain.size
        e = np.asarray(self.edges, dtype=bool)
        if e.shape != (3, sx + 1, sy + 1):
            raise InconsistencyError("edge grids have the wrong shape")
        object.__setattr__(self, "edges", e)

    def edge_crossed(self, kind: str, x: int, y: int) -> bool:
        idx = "abc".index(kind)
        sx, sy = self.domain.size
        if not (0 <= x <= sx and 0 <= y <= sy):
            return False
        return bool(self.edges[idx, x, y])

    def state(self, vertex: tuple[int, int]) -> int:
        x, y = vertex
        s = 0
        for k in range(6):
            if self.edge_crossed(*_edge_at(x, y, k)):
                s |= 1 << k
        return s

    @property
    def states_grid(self) -> np.ndarray:
        return states_grid_batch(self.edges[None])[0]

    def __eq__(self, other):
        return (
            isinstance(other, LozengeTiling)
            and self.domain == other.domain
            and np.array_equal(self.edges, other.edges)
        )

    def __hash__(self):
        return hash((self.domain, self.edges.tobytes()))


@dataclass(frozen=True)
class LozengeHeights:
    """Stack-of-cubes heights on the triangular-lattice vertices."""

    domain: TriDomain
    heights: np.ndarray

    def __eq__(self, other):
        m = self.domain.vertex_mask
        return (
            isinstance(other, LozengeHeights)
            and self.domain == other.domain
            and np.array_equal(self.heights[m], other.heights[m])
        )

    def __hash__(self):
        return hash((self.domain, self.heights[self.domain.vertex_mask].tobytes()))


# -- codec ---------------------------------------------------------------------


def tiling_from_lozenges(domain: TriDomain, lozenges: Iterable[Lozenge]) -> LozengeTiling:
    """Encode lozenges (adjacent triangle pairs) as crossed-edge grids."""
    sx, sy = domain.size
    edges = np.zeros((3, sx + 1, sy + 1), dtype=bool)
    covered: set[Triangle] = set()
    for a, b in lozenges:
        for t in (a, b):
            if not domain.triangle_in(t):
                raise OutOfDomainError(f"triangle {t} not in domain")
            if t in covered:
                raise OverlapError(f"triangle {t} covered twice")
            covered.add(t)
        kind, x, y = shared_edge(a, b)
        edges["abc".index(kind), x, y] = True
    if len(covered) != domain.triangle_count:
        raise CoverageError("triangles left uncovered")
    return LozengeTiling(domain, edges)


def lozenges_from_tiling(t: LozengeTiling) -> list[Lozenge]:
    """Decode crossed edges back to a sorted list of triangle pairs."""
    domain = t.domain
    covered: set[Triangle] = set()
    out = []
    for idx, kind in enumerate("abc"):
        for x, y in np.argwhere(t.edges[idx]):
            tri_u, tri_d = _edge_triangles(kind, int(x), int(y))
            for tri in (tri_u, tri_d):
                if not domain.triangle_in(tri):
                    raise OutOfDomainError(f"crossed edge {kind, x, y} leaves the domain")
                if tri in covered:
                    raise OverlapError(f"triangle {tri} covered twice")
                covered.add(tri)
            out.append((tri_u, tri_d))
    if len(covered) != domain.triangle_count:
        raise CoverageError("decoded lozenges do not cover the domain")
    return sorted(out)


def is_valid_lozenge_tiling(t: LozengeTiling) -> bool:
    try:
        lozenges_from_tiling(t)
        return True
    except (OverlapError, CoverageError, OutOfDomainError):
        return False


def loz_rotateable(s: int) -> str:
    """'up', 'down', or 'none' for a 6-bit vertex state."""
    if s == ROT_LOW:
        return "up"
    if s == ROT_HIGH:
        return "down"
    return "none"


# -- heights ---------------------------------------------------------------------


def loz_heights(t: LozengeTiling) -> LozengeHeights:
    """Integrate the height rules over the domain's vertex graph."""
    domain = t.domain
    sx, sy = domain.size
    mask = domain.vertex_mask
    h = np.zeros((sx + 1, sy + 1), dtype=np.int32)
    seen = np.zeros_like(mask)
    ref = domain.reference_vertex
    seen[ref] = True
    frontier = [ref]
    while frontier:
        nxt = []
        for (x, y) in frontier:
            for k, (dx, dy) in enumerate(DIRS):
                xx, yy = x + dx, y + dy
                if not (0 <= xx <= sx and 0 <= yy <= sy):
                    continue
                kind, ex, ey = _edge_at(x, y, k)
                tri_u, tri_d = _edge_triangles(kind, ex, ey)
                if not (domain.triangle_in(tri_u) or domain.triangle_in(tri_d)):
                    continue
                crossed = t.edge_crossed(kind, ex, ey)
                step = _STEPS[k][crossed]
                if seen[xx, yy]:
                    if h[xx, yy] != h[x, y] + step:
                        raise InconsistencyError("height propagation inconsistent")
                    continue
                seen[xx, yy] = True
                h[xx, yy] = h[x, y] + step
                nxt.append((xx, yy))
        frontier = nxt
    if (seen != mask).any():
        raise InconsistencyError("vertex graph is not connected")
    return LozengeHeights(domain, h)


# -- sweeps -----------------------------------------------------------------------


def states_grid_batch(edges: np.ndarray) -> np.ndarray:
    """Vertex states for a batch of edge grids (B, 3, sx+1, sy+1)."""
    ea, eb, ec = edges[:, 0], edges[:, 1], edges[:, 2]
    s = ea.astype(np.uint8)  # d0: a[x, y]
    s |= np.uint8(2) * eb  # d1: b[x, y]
    d2 = np.zeros_like(ea)
    d2[:, 1:, :-1] = ec[:, :-1, 1:]  # d2: c[x-1, y+1]
    s |= np.uint8(4) * d2
    d3 = np.zeros_like(ea)
    d3[:, 1:, :] = ea[:, :-1, :]  # d3: a[x-1, y]
    s |= np.uint8(8) * d3
    d4 = np.zeros_like(ea)
    d4[:, :, 1:] = eb[:, :, :-1]  # d4: b[x, y-1]
    s |= np.uint8(16) * d4
    s |= np.uint8(32) * ec  # d5: c[x, y]
    return s


def _apply_fire(edges: np.ndarray, fire_high: np.ndarray, fire_low: np.ndarray) -> np.ndarray:
    """Rewire the six incident edges of every firing vertex.

    ``fire_high`` marks vertices rotating to the high state, ``fire_low`` to
    the low state; firing sets are same-class, hence star-disjoint.
    """
    ea = edges[:, 0].copy()
    eb = edges[:, 1].copy()
    ec = edges[:, 2].copy()

    def at(arr, mask, dx, dy, value):
        # arr[x+dx, y+dy] receives mask[x, y]
        xs = slice(max(dx, 0), arr.shape[1] + min(dx, 0))
        ys = slice(max(dy, 0), arr.shape[2] + min(dy, 0))
        xm = slice(max(-dx, 0), arr.shape[1] + min(-dx, 0))
        ym = slice(max(-dy, 0), arr.shape[2] + min(-dy, 0))
        if value:
            arr[:, xs, ys] |= mask[:, xm, ym]
        else:
            arr[:, xs, ys] &= ~mask[:, xm, ym]

    # high state crosses {d0, d2, d4} and clears {d1, d3, d5}
    at(ea, fire_high, 0, 0, True)      # d0: a[x, y]
    at(ec, fire_high, -1, 1, True)     # d2: c[x-1, y+1]
    at(eb, fire_high, 0, -1, True)     # d4: b[x, y-1]
    at(eb, fire_high, 0, 0, False)     # d1
    at(ea, fire_high, -1, 0, False)    # d3
    at(ec, fire_high, 0, 0, False)     # d5
    # low state is the mirror
    at(eb, fire_low, 0, 0, True)
    at(ea, fire_low, -1, 0, True)
    at(ec, fire_low, 0, 0, True)
    at(ea, fire_low, 0, 0, False)
    at(ec, fire_low, -1, 1, False)
    at(eb, fire_low, 0, -1, False)
    return np.stack([ea, eb, ec], axis=1)


def star_covers(vertex: tuple[int, int]) -> tuple[list[Lozenge], list[Lozenge]]:
    """The two three-lozenge covers of a vertex star: (high state, low state)."""
    x, y = vertex
    high = [
        (("up", x, y), ("down", x, y - 1)),
        (("up", x - 1, y), ("down", x - 1, y)),
        (("up", x, y - 1), ("down", x - 1, y - 1)),
    ]
    low = [
        (("up", x, y), ("down", x - 1, y)),
        (("up", x - 1, y), ("down", x - 1, y - 1)),
        (("up", x, y - 1), ("down", x, y - 1)),
    ]
    return high, low


@dataclass(frozen=True)
class LozEdgeWeights:
    """Positive weight per hexagonal dual edge (per lozenge placement).

    ``overrides`` maps an unordered triangle pair to its weight.
    """

    default: float = 1.0
    overrides: dict = None  # type: ignore[assignment]

    def __post_init__(self):
        canon = {frozenset(k): float(v) for k, v in (self.overrides or {}).items()}
        if self.default <= 0 or any(w <= 0 for w in canon.values()):
            raise ValueError("lozenge edge weights must be strictly positive")
        object.__setattr__(self, "overrides", canon)

    def weight(self, tri_a: Triangle, tri_b: Triangle) -> float:
        return self.overrides.get(frozenset((tri_a, tri_b)), self.default)


def loz_p_up_grid(domain: TriDomain, weights) -> np.ndarray:
    """Static per-vertex probability of choosing the high local state."""
    sx, sy = domain.size
    if isinstance(weights, Uniform):
        return np.full((sx + 1, sy + 1), 0.5)
    if isinstance(weights, VolumeWeights):
        grid = np.empty((sx + 1, sy + 1))
        for x in range(sx + 1):
            for y in range(sy + 1):
                ratio = weights.q((x, y)) ** CUBE_UNIT
                grid[x, y] = ratio / (1.0 + ratio)
        return grid
    if isinstance(weights, LozEdgeWeights):
        grid = np.full((sx + 1, sy + 1), 0.5)
        for x in range(sx + 1):
            for y in range(sy + 1):
                high, low = star_covers((x, y))
                w_hi = np.prod([weights.weight(*loz) for loz in high])
                w_lo = np.prod([weights.weight(*loz) for loz in low])
                grid[x, y] = w_hi / (w_hi + w_lo)
        return grid
    raise TypeError(f"unsupported lozenge weight spec {type(weights)!r}")


def _class_grids(size: tuple[int, int]) -> np.ndarray:
    sx, sy = size
    xx, yy = np.meshgrid(np.arange(sx + 1), np.arange(sy + 1), indexing="ij")
    return ((xx - yy) % 3).astype(np.int8)


def loz_sweep_batch(
    edges: np.ndarray,
    u: np.ndarray,
    p_up: np.ndarray,
    classes: np.ndarray,
    class_grid: np.ndarray,
    backend: Backend,
) -> np.ndarray:
    """One three-color cluster sweep on a (B, 3, sx+1, sy+1) edge batch."""
    states = states_grid_batch(edges)
    in_class = class_grid[None] == classes[:, None, None]
    go_high = u < p_up[None]
    fire_high = in_class & go_high & (states == ROT_LOW)
    fire_low = in_class & ~go_high & (states == ROT_HIGH)
    # rotations write disjoint edge sets (same-class stars are disjoint),
    # so banding over the batch axis is trivially deterministic
    out = edges.copy()

    def band(lo: int, hi: int):
        out[lo:hi] = _apply_fire(edges[lo:hi], fire_high[lo:hi], fire_low[lo:hi])

    backend.run_bands(edges.shape[0], band)
    return out


def loz_random_walk_batch(
    edges: np.ndarray,
    seeds: np.ndarray,
    n_steps: int,
    domain: TriDomain,
    weights,
    backend: Backend | None = None,
) -> np.ndarray:
    backend = backend or Sequential()
    sx, sy = domain.size
    shape = (sx + 1, sy + 1)
    seeds = np.asarray(seeds, dtype=np.uint64)
    site_keys = rng.key_grid_batch(seeds, shape, rng.TAG_SITE)
    global_keys = rng.global_key_batch(seeds, shape)
    p_up = loz_p_up_grid(domain, weights)
    class_grid = _class_grids(domain.size)
    out = edges.copy()
    for step in range(n_steps):
        coin = rng.uniform_from_keys(global_keys, step)
        classes = np.minimum((coin * 3).astype(np.int8), 2)
        u = rng.uniform_from_keys(site_keys, step)
        out = loz_sweep_batch(out, u, p_up, classes, class_grid, backend)
    return out


def loz_sweep(
    t: LozengeTiling,
    f: rng.StreamFamily,
    step: int,
    color: int,
    weights=None,
    backend: Backend | None = None,
) -> LozengeTiling:
    """Rotate every vertex of one color class with its (site, step) coin."""
    backend = backend or Sequential()
    weights = weights or Uniform()
    u = f.uniform_grid(step)[None]
    classes = np.array([color], dtype=np.int8)
    new = loz_sweep_batch(
        t.edges[None],
        u,
        loz_p_up_grid(t.domain, weights),
        classes,
        _class_grids(t.domain.size),
        backend,
    )
    return LozengeTiling(t.domain, new[0])


def loz_random_walk(
    t: LozengeTiling,
    seed: int,
    n_steps: int,
    weights=None,
    backend: Backend | None = None,
) -> LozengeTiling:
    weights = weights or Uniform()
    out = loz_random_walk_batch(
        t.edges[None],
        np.array([seed], dtype=np.uint64),
        n_steps,
        t.domain,
        weights,
        backend,
    )
    return LozengeTiling(t.domain, out[0])


# -- extremal tilings and CFTP -----------------------------------------------------


_BIG = np.float64(1e18)


def _edge_exists_crossable(domain: TriDomain):
    """Per-direction (exists, crossable) masks over the vertex grid."""
    sx, sy = domain.size
    out = []
    for k in range(6):
        exists = np.zeros((sx + 1, sy + 1), dtype=bool)
        crossable = np.zeros_like(exists)
        for x in range(sx + 1):
            for y in range(sy + 1):
                dx, dy = DIRS[k]
                if not (0 <= x + dx <= sx and 0 <= y + dy <= sy):
                    continue
                tri_u, tri_d = _edge_triangles(*_edge_at(x, y, k))
                a = domain.triangle_in(tri_u)
                b = domain.triangle_in(tri_d)
                exists[x, y] = a or b
                crossable[x, y] = a and b
        out.append((exists, crossable))
    return out


def _loz_relax(domain: TriDomain, maximal: bool) -> Optional[np.ndarray]:
    sx, sy = domain.size
    mask = domain.vertex_mask
    ref = domain.reference_vertex
    info = _edge_exists_crossable(domain)
    bounds = []
    for k in range(6):
        exists, crossable = info[k]
        un, cr = _STEPS[k]
        if maximal:
            b = np.where(crossable, max(un, cr), un).astype(np.float64)
            b = np.where(exists, b, _BIG)
        else:
            b = np.where(crossable, min(un, cr), un).astype(np.float64)
            b = np.where(exists, b, -_BIG)
        bounds.append(b)
    h = np.full((sx + 1, sy + 1), _BIG if maximal else -_BIG)
    h[ref] = 0.0
    cap = int(mask.sum()) + 8
    for _ in range(cap):
        changed = False
        for k, (dx, dy) in enumerate(DIRS):
            cand = h + bounds[k]
            shifted = np.full_like(h, _BIG if maximal else -_BIG)
            xs = slice(max(dx, 0), sx + 1 + min(dx, 0))
            xsrc = slice(max(-dx, 0), sx + 1 + min(-dx, 0))
            ys = slice(max(dy, 0), sy + 1 + min(dy, 0))
            ysrc = slice(max(-dy, 0), sy + 1 + min(-dy, 0))
            shifted[xs, ys] = cand[xsrc, ysrc]
            new = np.minimum(h, shifted) if maximal else np.maximum(h, shifted)
            if not np.array_equal(new, h):
                changed = True
                h = new
        if not changed:
            break
    else:
        return None
    if h[ref] != 0.0 or (np.abs(h[mask]) >= _BIG / 2).any():
        return None
    out = np.zeros((sx + 1, sy + 1), dtype=np.int32)
    out[mask] = h[mask].astype(np.int32)
    return out


def _tiling_from_loz_heights(domain: TriDomain, h: np.ndarray) -> LozengeTiling:
    sx, sy = domain.size
    edges = np.zeros((3, sx + 1, sy + 1), dtype=bool)
    for kind, idx in (("a", 0), ("b", 1), ("c", 2)):
        for x in range(sx + 1):
            for y in range(sy + 1):
                tri_u, tri_d = _edge_triangles(kind, x, y)
                if not (domain.triangle_in(tri_u) and domain.triangle_in(tri_d)):
                    continue
                # endpoints of this edge entry
                if kind == "a":
                    v1, v2, k = (x, y), (x + 1, y), 0
                elif kind == "b":
                    v1, v2, k = (x, y), (x, y + 1), 1
                else:
                    v1, v2, k = (x, y), (x + 1, y - 1), 5
                d = int(h[v2]) - int(h[v1])
                edges[idx, x, y] = d == _STEPS[k][1]
    t = LozengeTiling(domain, edges)
    lozenges_from_tiling(t)  # validates the cover
    return t


def loz_extremal(domain: TriDomain) -> Optional[tuple[LozengeTiling, LozengeTiling]]:
    """Maximal and minimal tilings, or None when the domain is untileable."""
    if int(domain.up.sum()) != int(domain.down.sum()):
        return None
    h_max = _loz_relax(domain, maximal=True)
    h_min = _loz_relax(domain, maximal=False)
    if h_max is None or h_min is None:
        return None
    try:
        t_max = _tiling_from_loz_heights(domain, h_max)
        t_min = _tiling_from_loz_heights(domain, h_min)
    except (OverlapError, CoverageError, OutOfDomainError, InconsistencyError):
        return None
    return t_max, t_min


def loz_cftp(
    domain: TriDomain,
    weights,
    master_seed: int,
    backend: Backend | None = None,
    max_doublings: int = 40,
    count: int = 1,
    progress=None,
    trace: CftpTrace | None = None,
    batch_size: int = 2048,
) -> LozengeTiling | list[LozengeTiling]:
    """Exact samples of lozenge tilings via monotone CFTP."""
    backend = backend or Sequential()
    weights = weights or Uniform()
    extremals = loz_extremal(domain)
    if extremals is None:
        raise UntileableDomain("triangle domain is not tileable")
    t_max, t_min = extremals

    progress_cb = None
    if progress is not None:
        def progress_cb(round_no, steps, collapsed, total):
            progress.write(
                f"round={round_no} steps={steps} collapsed={collapsed == total}\n"
            )

    def walk(states, pair_seeds, n_steps):
        return loz_random_walk_batch(states, pair_seeds, n_steps, domain, weights, backend)

    results: list[LozengeTiling] = []
    if np.array_equal(t_max.edges, t_min.edges):
        results = [t_max] * count
    else:
        for lo in range(0, count, batch_size):
            hi = min(lo + batch_size, count)
            masters = np.array(
                [chain_master_seed(master_seed, k) for k in range(lo, hi)],
                dtype=np.uint64,
            )
            states = run_cftp_batch(
                t_max.edges,
                t_min.edges,
                walk,
                masters,
                max_doublings,
                progress_cb,
                trace if lo == 0 else None,
            )
            results.extend(LozengeTiling(domain, s) for s in states)
    return results[0] if count == 1 else results
