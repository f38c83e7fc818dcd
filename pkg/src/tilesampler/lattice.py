"""Square-lattice domains, domino tilings, height functions, and Gibbs weights.

Grid conventions, fixed once and used by every module:

* Arrays are indexed ``[row, col]``.  Printing a grid row by row puts row 0
  at the top, so "up" means decreasing row and "left" means decreasing
  column.  Text formats below follow the same orientation.
* Face ``(r, c)`` is the unit cell between vertex rows ``r, r+1`` and vertex
  columns ``c, c+1``.  A domain is a simply-connected set of faces inside an
  ``n x n`` bounding box; vertices live on the ``(n+1) x (n+1)`` grid.
* The tilestate of a vertex packs one bit per incident edge, set when a
  domino of the tiling crosses that edge (the edge is interior to a domino):
  bit 1 = edge up, 2 = edge down, 4 = edge left, 8 = edge right.  A vertex is
  rotateable iff its state is 3 (two stacked horizontal dominoes) or 12 (two
  vertical dominoes side by side).  Vertices not touching a domain face stay
  0, and all kernels treat reads outside the grid as 0.
* Heights live on vertices.  Faces are two-colored with ``(r + c)`` odd dark.
  Walking along an edge with the dark face on the left adds +1 when the edge
  is uncrossed and -3 when it is crossed (the other color mirrors the signs).
  The reference vertex, pinned to height 0, is the lexicographically smallest
  corner of the bottom-most then left-most domain face.  Under these choices
  an up-rotation (3 -> 12) at a vertex with ``(r + c)`` even raises its
  height by exactly 4, and lowers it by 4 at odd parity.

All types here are immutable values after construction and every operation
is pure, so they are safe to share across threads without synchronization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .errors import (
    CoverageError,
    DomainError,
    DomainMismatchError,
    InconsistencyError,
    OutOfDomainError,
    OverlapError,
)

Face = tuple[int, int]
Vertex = tuple[int, int]
Domino = tuple[Face, Face]

BIT_UP, BIT_DOWN, BIT_LEFT, BIT_RIGHT = 1, 2, 4, 8
HORIZONTAL_PAIR = BIT_UP | BIT_DOWN    # 3
VERTICAL_PAIR = BIT_LEFT | BIT_RIGHT   # 12

# (dr, dc, own bit, reciprocal bit of the neighbor across the edge)
_EDGE_DIRS = (
    (-1, 0, BIT_UP, BIT_DOWN),
    (1, 0, BIT_DOWN, BIT_UP),
    (0, -1, BIT_LEFT, BIT_RIGHT),
    (0, 1, BIT_RIGHT, BIT_LEFT),
)


def _faces_of_edge(r: int, c: int, dr: int, dc: int) -> tuple[Face, Face]:
    """The two lattice faces adjacent to the edge from (r,c) toward (dr,dc).

    The first face is the one on the left of the direction of travel.
    """
    if dr == -1:  # up
        return (r - 1, c - 1), (r - 1, c)
    if dr == 1:  # down
        return (r, c), (r, c - 1)
    if dc == -1:  # left
        return (r, c - 1), (r - 1, c - 1)
    return (r - 1, c), (r, c)  # right


def _dark(face: Face) -> bool:
    return (face[0] + face[1]) % 2 == 1


@dataclass(frozen=True)
class Domain:
    """A simply-connected union of faces inside an n x n bounding box."""

    n: int
    faces: np.ndarray  # bool, shape (n, n)

    def __post_init__(self):
        faces = np.asarray(self.faces, dtype=bool)
        if faces.shape != (self.n, self.n):
            raise DomainError(f"faces grid must be {self.n}x{self.n}, got {faces.shape}")
        object.__setattr__(self, "faces", faces)
        if not faces.any():
            raise DomainError("domain has no faces")
        self._check_connected()
        self._check_simply_connected()

    def _check_connected(self):
        faces = self.faces
        start = tuple(np.argwhere(faces)[0])
        seen = np.zeros_like(faces)
        stack = [start]
        seen[start] = True
        while stack:
            r, c = stack.pop()
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= rr < self.n and 0 <= cc < self.n and faces[rr, cc] and not seen[rr, cc]:
                    seen[rr, cc] = True
                    stack.append((rr, cc))
        if seen.sum() != faces.sum():
            raise DomainError("domain faces are not edge-connected")

    def _check_simply_connected(self):
        # A hole is a complement component not reachable from outside the box.
        pad = np.pad(self.faces, 1, constant_values=False)
        seen = np.zeros_like(pad)
        stack = [(0, 0)]
        seen[0, 0] = True
        while stack:
            r, c = stack.pop()
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if (
                    0 <= rr < pad.shape[0]
                    and 0 <= cc < pad.shape[1]
                    and not pad[rr, cc]
                    and not seen[rr, cc]
                ):
                    seen[rr, cc] = True
                    stack.append((rr, cc))
        if (~pad & ~seen).any():
            raise DomainError("domain has a hole (not simply connected)")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_faces(cls, n: int, face_list: Iterable[Face]) -> "Domain":
        grid = np.zeros((n, n), dtype=bool)
        for r, c in face_list:
            if not (0 <= r < n and 0 <= c < n):
                raise DomainError(f"face {(r, c)} outside {n}x{n} bounding box")
            grid[r, c] = True
        return cls(n, grid)

    @classmethod
    def rectangle(cls, rows: int, cols: int) -> "Domain":
        n = max(rows, cols)
        grid = np.zeros((n, n), dtype=bool)
        grid[:rows, :cols] = True
        return cls(n, grid)

    @classmethod
    def square(cls, side: int) -> "Domain":
        return cls(side, np.ones((side, side), dtype=bool))

    @classmethod
    def aztec(cls, order: int) -> "Domain":
        """Aztec diamond of the given order (2*order*(order+1) faces)."""
        n = 2 * order
        r = np.arange(n, dtype=float) + 0.5 - order
        grid = (np.abs(r)[:, None] + np.abs(r)[None, :]) <= order
        return cls(n, grid)

    @classmethod
    def from_text(cls, text: str) -> "Domain":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        try:
            n = int(lines[0])
        except (ValueError, IndexError) as exc:
            raise DomainError("domain file must start with the bounding-box side") from exc
        if len(lines) != n + 1:
            raise DomainError(f"expected {n} grid rows, got {len(lines) - 1}")
        grid = np.zeros((n, n), dtype=bool)
        for r, ln in enumerate(lines[1:]):
            if len(ln) != n or set(ln) - {"0", "1"}:
                raise DomainError(f"row {r} must be {n} characters of 0/1")
            grid[r] = [ch == "1" for ch in ln]
        return cls(n, grid)

    def to_text(self) -> str:
        rows = ["".join("1" if v else "0" for v in row) for row in self.faces]
        return "\n".join([str(self.n)] + rows) + "\n"

    # -- derived structure -------------------------------------------------

    @cached_property
    def face_count(self) -> int:
        return int(self.faces.sum())

    @cached_property
    def vertex_mask(self) -> np.ndarray:
        """Vertices touching at least one domain face; shape (n+1, n+1)."""
        pad = np.pad(self.faces, 1, constant_values=False)
        m = pad[:-1, :-1] | pad[:-1, 1:] | pad[1:, :-1] | pad[1:, 1:]
        return m

    @cached_property
    def reference_vertex(self) -> Vertex:
        """Lexicographically smallest corner of the bottom-most, left-most face."""
        rows, cols = np.nonzero(self.faces)
        r = rows.max()
        c = cols[rows == r].min()
        return (int(r), int(c))

    def face_in(self, face: Face) -> bool:
        r, c = face
        return 0 <= r < self.n and 0 <= c < self.n and bool(self.faces[r, c])

    def edge_faces_in(self, r: int, c: int, dr: int, dc: int) -> tuple[bool, bool]:
        fa, fb = _faces_of_edge(r, c, dr, dc)
        return self.face_in(fa), self.face_in(fb)

    @cached_property
    def _height_levels(self):
        """BFS levels over the edge graph, for vectorized height integration.

        Each level is (child_rows, child_cols, parent_rows, parent_cols,
        dir_index); all parents of level k live in levels < k.
        """
        n = self.n
        mask = self.vertex_mask
        ref = self.reference_vertex
        seen = np.zeros_like(mask)
        seen[ref] = True
        frontier = [ref]
        levels = []
        while frontier:
            nxt = []
            rec = ([], [], [], [], [])
            for (r, c) in frontier:
                for k, (dr, dc, _, _) in enumerate(_EDGE_DIRS):
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr <= n and 0 <= cc <= n) or seen[rr, cc]:
                        continue
                    fa, fb = self.edge_faces_in(r, c, dr, dc)
                    if not (fa or fb):
                        continue
                    seen[rr, cc] = True
                    rec[0].append(rr)
                    rec[1].append(cc)
                    rec[2].append(r)
                    rec[3].append(c)
                    rec[4].append(k)
                    nxt.append((rr, cc))
            if rec[0]:
                levels.append(tuple(np.array(x, dtype=np.intp) for x in rec))
            frontier = nxt
        if (seen != mask).any():
            # cannot happen for a connected face set
            raise DomainError("vertex graph is not connected")
        return levels

    def canonical_bytes(self) -> bytes:
        return self.faces.tobytes() + self.n.to_bytes(4, "little")

    def __eq__(self, other):
        return (
            isinstance(other, Domain)
            and self.n == other.n
            and np.array_equal(self.faces, other.faces)
        )

    def __hash__(self):
        return hash((self.n, self.faces.tobytes()))


@dataclass(frozen=True)
class Tiling:
    """A domino tiling as a per-vertex tilestate grid (shape (n+1, n+1))."""

    domain: Domain
    states: np.ndarray

    def __post_init__(self):
        states = np.ascontiguousarray(self.states, dtype=np.uint8)
        if states.shape != (self.domain.n + 1, self.domain.n + 1):
            raise InconsistencyError(
                f"state grid must be {(self.domain.n + 1,) * 2}, got {states.shape}"
            )
        object.__setattr__(self, "states", states)

    def __eq__(self, other):
        return (
            isinstance(other, Tiling)
            and self.domain == other.domain
            and np.array_equal(self.states, other.states)
        )

    def __hash__(self):
        return hash((self.domain, self.states.tobytes()))

    def state(self, vertex: Vertex) -> int:
        return int(self.states[vertex])

    def to_text(self) -> str:
        return "\n".join(" ".join(str(int(s)) for s in row) for row in self.states) + "\n"

    @classmethod
    def from_text(cls, domain: Domain, text: str) -> "Tiling":
        rows = [[int(tok) for tok in ln.split()] for ln in text.strip().splitlines()]
        grid = np.array(rows, dtype=np.uint8)
        t = cls(domain, grid)
        # round-trip through the codec validates the grid
        return tiling_from_dominoes(domain, dominoes_from_tiling(t))


class Ordering(enum.Enum):
    LESS_EQUAL = "less-or-equal"
    GREATER_EQUAL = "greater-or-equal"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class HeightFunction:
    """Integer heights on the domain's vertices, pinned at the reference."""

    domain: Domain
    heights: np.ndarray  # int32, shape (n+1, n+1); valid where vertex_mask
    reference: Vertex = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.reference is None:
            object.__setattr__(self, "reference", self.domain.reference_vertex)
        object.__setattr__(self, "heights", np.asarray(self.heights, dtype=np.int32))

    def at(self, vertex: Vertex) -> int:
        return int(self.heights[vertex])

    def __eq__(self, other):
        return (
            isinstance(other, HeightFunction)
            and self.domain == other.domain
            and self.reference == other.reference
            and np.array_equal(
                self.heights[self.domain.vertex_mask],
                other.heights[self.domain.vertex_mask],
            )
        )

    def __hash__(self):
        return hash((self.domain, self.heights[self.domain.vertex_mask].tobytes()))


# -- weights ---------------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    """All tilings equally likely."""


@dataclass(frozen=True)
class EdgeWeights:
    """Positive weight per dual edge (that is, per domino placement).

    ``overrides`` maps an unordered face pair to its weight; everything else
    takes ``default``.
    """

    default: float = 1.0
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.default <= 0 or any(w <= 0 for w in self.overrides.values()):
            raise ValueError("edge weights must be strictly positive")
        canon = {frozenset(k): float(v) for k, v in self.overrides.items()}
        object.__setattr__(self, "overrides", canon)

    def weight(self, face_a: Face, face_b: Face) -> float:
        return self.overrides.get(frozenset((face_a, face_b)), self.default)


@dataclass(frozen=True)
class VolumeWeights:
    """Positive weight q per vertex; a tiling weighs prod_v q_v^h(v)."""

    default: float = 1.0
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.default <= 0 or any(q <= 0 for q in self.overrides.values()):
            raise ValueError("volume weights must be strictly positive")

    def q(self, vertex: Vertex) -> float:
        return self.overrides.get(tuple(vertex), self.default)


WeightSpec = Uniform | EdgeWeights | VolumeWeights


# -- codec -------------------------------------------------------------------


def _domino_crossed_edge(a: Face, b: Face) -> tuple[Vertex, Vertex]:
    """Endpoints of the edge shared by two adjacent faces."""
    (ra, ca), (rb, cb) = a, b
    if ra == rb and abs(ca - cb) == 1:  # horizontal domino, vertical edge
        c = max(ca, cb)
        return (ra, c), (ra + 1, c)
    if ca == cb and abs(ra - rb) == 1:  # vertical domino, horizontal edge
        r = max(ra, rb)
        return (r, ca), (r, ca + 1)
    raise OutOfDomainError(f"faces {a} and {b} are not adjacent")


def tiling_from_dominoes(domain: Domain, dominoes: Iterable[Domino]) -> Tiling:
    """Encode a list of face pairs as a tilestate grid, validating coverage."""
    n = domain.n
    covered = np.zeros((n, n), dtype=bool)
    states = np.zeros((n + 1, n + 1), dtype=np.uint8)
    for a, b in dominoes:
        for f in (a, b):
            if not domain.face_in(f):
                raise OutOfDomainError(f"face {f} not in domain")
            if covered[f]:
                raise OverlapError(f"face {f} covered twice")
            covered[f] = True
        (r1, c1), (r2, c2) = _domino_crossed_edge(a, b)
        dr, dc = r2 - r1, c2 - c1
        for (dr_, dc_, bit, rbit) in _EDGE_DIRS:
            if (dr_, dc_) == (dr, dc):
                states[r1, c1] |= bit
                states[r2, c2] |= rbit
                break
    if covered.sum() != domain.face_count:
        missing = np.argwhere(domain.faces & ~covered)
        raise CoverageError(f"faces left uncovered, e.g. {tuple(missing[0])}")
    return Tiling(domain, states)


def dominoes_from_tiling(t: Tiling) -> list[Domino]:
    """Decode a tilestate grid back to a sorted list of face pairs.

    Raises InconsistencyError when the two endpoints of an edge disagree, and
    the codec errors when the decoded pairs are not a perfect cover.
    """
    domain = t.domain
    n = domain.n
    states = t.states
    pairs = set()
    for r in range(n + 1):
        for c in range(n + 1):
            s = int(states[r, c])
            if s == 0:
                continue
            for dr, dc, bit, rbit in _EDGE_DIRS:
                if not s & bit:
                    continue
                rr, cc = r + dr, c + dc
                if not (0 <= rr <= n and 0 <= cc <= n) or not states[rr, cc] & rbit:
                    raise InconsistencyError(
                        f"edge from {(r, c)} toward {(dr, dc)} not mirrored by neighbor"
                    )
                fa, fb = _faces_of_edge(r, c, dr, dc)
                if not (domain.face_in(fa) and domain.face_in(fb)):
                    raise OutOfDomainError(
                        f"crossed edge at {(r, c)} borders a face outside the domain"
                    )
                pairs.add(tuple(sorted((fa, fb))))
    covered = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        for f in (a, b):
            if covered[f]:
                raise OverlapError(f"face {f} covered twice")
            covered[f] = True
    if covered.sum() != domain.face_count:
        raise CoverageError("decoded dominoes do not cover the domain")
    if (covered & ~domain.faces).any():
        raise OutOfDomainError("decoded dominoes stick out of the domain")
    return sorted(pairs)


def is_valid_tiling(t: Tiling) -> bool:
    """True iff the state grid decodes to a perfect cover of the domain."""
    try:
        dominoes_from_tiling(t)
        return True
    except (InconsistencyError, OverlapError, CoverageError, OutOfDomainError):
        return False


# -- checkerboard split ------------------------------------------------------


def split_checkerboard(t: Tiling | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split the state grid into the dark/light vertex sub-arrays.

    ``T_b[i, j]`` holds the state of vertex ``(i, 2j + i % 2)`` (even
    coordinate sum) and ``T_w`` the complementary color.  The grid is
    zero-padded to an even side first.
    """
    grid = t.states if isinstance(t, Tiling) else np.asarray(t)
    side = grid.shape[0]
    if side % 2:
        padded = np.zeros((side + 1, side + 1), dtype=grid.dtype)
        padded[:side, :side] = grid
        grid = padded
        side += 1
    cols = np.arange(side // 2)
    rows = np.arange(side)
    jb = 2 * cols[None, :] + (rows[:, None] % 2)
    jw = 2 * cols[None, :] + ((rows[:, None] + 1) % 2)
    t_b = grid[rows[:, None], jb]
    t_w = grid[rows[:, None], jw]
    return t_b, t_w


def merge_checkerboard(t_b: np.ndarray, t_w: np.ndarray) -> np.ndarray:
    """Inverse of :func:`split_checkerboard` (returns the even-sided grid)."""
    side = t_b.shape[0]
    grid = np.zeros((side, side), dtype=t_b.dtype)
    rows = np.arange(side)
    cols = np.arange(side // 2)
    grid[rows[:, None], 2 * cols[None, :] + (rows[:, None] % 2)] = t_b
    grid[rows[:, None], 2 * cols[None, :] + ((rows[:, None] + 1) % 2)] = t_w
    return grid


# -- heights -----------------------------------------------------------------

# height steps indexed [dir, dark(left face), crossed]; the step itself only
# depends on the left face's color, the leading axis just matches callers
_STEP_TABLE = np.zeros((4, 2, 2), dtype=np.int32)
_STEP_TABLE[:, 1] = (1, -3)  # dark face on the left: uncrossed, crossed
_STEP_TABLE[:, 0] = (-1, 3)


def _left_face_dark(r: np.ndarray, c: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Parity of the left face for edges from (r,c) in direction index k."""
    # left-face coordinate sums: up -> r+c-2, down -> r+c, left -> r+c-1, right -> r+c-1
    base = r + c
    offset = np.where(k == 0, -2, np.where(k == 1, 0, -1))
    return (base + offset) % 2 == 1


def height_function(t: Tiling) -> HeightFunction:
    """Propagate heights from the reference vertex across the whole domain."""
    domain = t.domain
    states = t.states
    h = np.zeros((domain.n + 1, domain.n + 1), dtype=np.int32)
    bits = np.array([bit for _, _, bit, _ in _EDGE_DIRS], dtype=np.uint8)
    for child_r, child_c, par_r, par_c, kdir in domain._height_levels:
        crossed = (states[par_r, par_c] & bits[kdir]) != 0
        dark = _left_face_dark(par_r, par_c, kdir)
        h[child_r, child_c] = h[par_r, par_c] + _STEP_TABLE[
            kdir, dark.astype(np.intp), crossed.astype(np.intp)
        ]
    hf = HeightFunction(domain, h)
    _check_height_consistency(t, hf)
    return hf


def _check_height_consistency(t: Tiling, hf: HeightFunction):
    """Every edge relation must hold, or the state grid is corrupt."""
    domain, states, h = t.domain, t.states, hf.heights
    n = domain.n
    pad = np.pad(domain.faces, 1, constant_values=False)
    # it suffices to check the rightward and downward relations once each
    for k, (dr, dc, bit, _) in enumerate(_EDGE_DIRS):
        if (dr, dc) not in ((0, 1), (1, 0)):
            continue
        r, c = np.nonzero(domain.vertex_mask)
        ok = (r + dr <= n) & (c + dc <= n)
        r, c = r[ok], c[ok]
        if dc == 1:  # right: faces (r-1, c) and (r, c)
            fa_in = pad[r, c + 1]
            fb_in = pad[r + 1, c + 1]
        else:  # down: faces (r, c) and (r, c-1)
            fa_in = pad[r + 1, c + 1]
            fb_in = pad[r + 1, c]
        exists = fa_in | fb_in
        r, c = r[exists], c[exists]
        if len(r) == 0:
            continue
        crossed = (states[r, c] & bit) != 0
        dark = _left_face_dark(r, c, np.full(len(r), k))
        delta = _STEP_TABLE[k, dark.astype(np.intp), crossed.astype(np.intp)]
        if not np.array_equal(h[r + dr, c + dc] - h[r, c], delta):
            raise InconsistencyError("height propagation is cyclically inconsistent")


def order_compare(h1: HeightFunction, h2: HeightFunction) -> Ordering:
    """Pointwise comparison of two height functions on the same domain."""
    if h1.domain != h2.domain or h1.reference != h2.reference:
        raise DomainMismatchError("height functions live on different domains")
    mask = h1.domain.vertex_mask
    d = h1.heights[mask].astype(np.int64) - h2.heights[mask]
    if not d.any():
        return Ordering.EQUAL
    if (d <= 0).all():
        return Ordering.LESS_EQUAL
    if (d >= 0).all():
        return Ordering.GREATER_EQUAL
    return Ordering.INCOMPARABLE


def tiling_from_heights(domain: Domain, heights: np.ndarray) -> Tiling:
    """Decode a height grid to the tiling whose crossed edges jump by 3."""
    dominoes = []
    rows, cols = np.nonzero(domain.faces)
    for r, c in zip(rows, cols):
        matched = []
        corners = ((r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1))
        sides = (  # (corner a, corner b, partner face)
            (corners[0], corners[1], (r - 1, c)),
            (corners[2], corners[3], (r + 1, c)),
            (corners[0], corners[2], (r, c - 1)),
            (corners[1], corners[3], (r, c + 1)),
        )
        for a, b, partner in sides:
            if abs(int(heights[a]) - int(heights[b])) == 3:
                matched.append(partner)
        if len(matched) != 1:
            raise InconsistencyError(f"face {(r, c)} has {len(matched)} crossed edges")
        partner = matched[0]
        if not domain.face_in(partner):
            raise InconsistencyError(f"face {(r, c)} pairs outside the domain")
        dominoes.append(tuple(sorted(((int(r), int(c)), partner))))
    return tiling_from_dominoes(domain, sorted(set(dominoes)))


def lattice_meet_join(t1: Tiling, t2: Tiling) -> tuple[Tiling, Tiling]:
    """Pointwise min/max of heights, decoded back to tilings (meet, join)."""
    if t1.domain != t2.domain:
        raise DomainMismatchError("tilings live on different domains")
    h1 = height_function(t1).heights
    h2 = height_function(t2).heights
    meet = tiling_from_heights(t1.domain, np.minimum(h1, h2))
    join = tiling_from_heights(t1.domain, np.maximum(h1, h2))
    return meet, join


# -- extremal tilings --------------------------------------------------------

_BIG = np.float64(1e18)


def _edge_bound_grids(domain: Domain, maximal: bool) -> list[np.ndarray]:
    """Per-direction step bounds W[k][r,c] for h(v) - h(u) along direction k.

    ``maximal`` selects the upper bounds (for the max height relaxation);
    otherwise the lower bounds.  Non-edges get +/- infinity.
    """
    n = domain.n
    vr = np.arange(n + 1)
    rr, cc = np.meshgrid(vr, vr, indexing="ij")
    pad = np.pad(domain.faces, 1, constant_values=False)

    def face_in(fr, fc):
        return pad[fr + 1, fc + 1]

    grids = []
    for k, (dr, dc, _, _) in enumerate(_EDGE_DIRS):
        if dr == -1:
            fa = (rr - 1, cc - 1)
            fb = (rr - 1, cc)
        elif dr == 1:
            fa = (rr, cc)
            fb = (rr, cc - 1)
        elif dc == -1:
            fa = (rr, cc - 1)
            fb = (rr - 1, cc - 1)
        else:
            fa = (rr - 1, cc)
            fb = (rr, cc)
        fa_r = np.clip(fa[0], -1, n)
        fa_c = np.clip(fa[1], -1, n)
        fb_r = np.clip(fb[0], -1, n)
        fb_c = np.clip(fb[1], -1, n)
        a_in = face_in(fa_r, fa_c)
        b_in = face_in(fb_r, fb_c)
        exists = a_in | b_in
        crossable = a_in & b_in
        dark = _left_face_dark(rr, cc, np.full_like(rr, k))
        uncrossed = np.where(dark, 1, -1)
        crossed = np.where(dark, -3, 3)
        if maximal:
            bound = np.where(crossable, np.maximum(uncrossed, crossed), uncrossed)
            w = np.where(exists, bound, _BIG)
        else:
            bound = np.where(crossable, np.minimum(uncrossed, crossed), uncrossed)
            w = np.where(exists, bound, -_BIG)
        # forbid stepping off the vertex grid
        tr, tc = rr + dr, cc + dc
        off = (tr < 0) | (tr > n) | (tc < 0) | (tc > n)
        w = np.where(off, _BIG if maximal else -_BIG, w)
        grids.append(w.astype(np.float64))
    return grids


def _relax(domain: Domain, maximal: bool) -> Optional[np.ndarray]:
    """Solve the height constraint system; None when it is infeasible."""
    n = domain.n
    mask = domain.vertex_mask
    ref = domain.reference_vertex
    bounds = _edge_bound_grids(domain, maximal)
    h = np.full((n + 1, n + 1), _BIG if maximal else -_BIG)
    h[ref] = 0.0
    cap = int(mask.sum()) + 8
    shifted = np.empty_like(h)
    for _ in range(cap):
        changed = False
        for k, (dr, dc, _, _) in enumerate(_EDGE_DIRS):
            # candidate for v = u + d is h[u] + w_k[u]
            cand = h + bounds[k]
            shifted.fill(_BIG if maximal else -_BIG)
            rs = slice(max(dr, 0), n + 1 + min(dr, 0))
            rs_src = slice(max(-dr, 0), n + 1 + min(-dr, 0))
            cs = slice(max(dc, 0), n + 1 + min(dc, 0))
            cs_src = slice(max(-dc, 0), n + 1 + min(-dc, 0))
            shifted[rs, cs] = cand[rs_src, cs_src]
            if maximal:
                new = np.minimum(h, shifted)
            else:
                new = np.maximum(h, shifted)
            if not np.array_equal(new, h):
                changed = True
                h = new
        if not changed:
            break
    else:
        return None  # a cycle keeps tightening: untileable
    if h[ref] != 0.0:
        return None
    hm = h[mask]
    if (np.abs(hm) >= _BIG / 2).any():
        return None
    out = np.zeros((n + 1, n + 1), dtype=np.int32)
    out[mask] = h[mask].astype(np.int32)
    return out


def extremal_tilings(domain: Domain) -> Optional[tuple[Tiling, Tiling]]:
    """The pointwise-maximal and -minimal tilings, or None if untileable.

    Untileability is detected by the boundary-height extension failing to
    produce a decodable height grid, in time proportional to the domain size;
    exhaustive enumeration is never consulted.
    """
    if domain.face_count % 2:
        return None
    h_max = _relax(domain, maximal=True)
    if h_max is None:
        return None
    h_min = _relax(domain, maximal=False)
    if h_min is None:
        return None
    try:
        t_max = tiling_from_heights(domain, h_max)
        t_min = tiling_from_heights(domain, h_min)
    except (InconsistencyError, OverlapError, CoverageError, OutOfDomainError):
        return None
    return t_max, t_min


# -- Gibbs weights -----------------------------------------------------------


def log_weight(t: Tiling, w: WeightSpec) -> float:
    """Natural log of the tiling's Gibbs weight (0 for uniform weights)."""
    if isinstance(w, Uniform):
        return 0.0
    if isinstance(w, EdgeWeights):
        return float(sum(np.log(w.weight(a, b)) for a, b in dominoes_from_tiling(t)))
    if isinstance(w, VolumeWeights):
        h = height_function(t).heights
        mask = t.domain.vertex_mask
        total = 0.0
        for r, c in zip(*np.nonzero(mask)):
            total += h[r, c] * np.log(w.q((int(r), int(c))))
        return float(total)
    raise TypeError(f"unsupported weight spec {type(w)!r}")


def rotation_height_delta(vertex: Vertex) -> int:
    """Height change at ``vertex`` under an up-rotation (3 -> 12)."""
    return 4 if (vertex[0] + vertex[1]) % 2 == 0 else -4
