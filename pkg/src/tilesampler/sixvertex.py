"""Six-vertex model on square domains with fully fixed boundary edges.

Geometry (same print-space conventions as the square-lattice module): the
model lives on an n x n grid of vertices (r, c), rows increasing downward.
``h_edges[r, c]`` (shape (n, n+1)) is the horizontal edge west of vertex
(r, c); column 0 and column n hold the west/east boundary stubs.
``v_edges[r, c]`` (shape (n+1, n)) is the vertical edge north of vertex
(r, c); rows 0 and n hold the north/south boundary stubs.

Faces (R, C) with 0 <= R, C <= n surround the vertex grid; the border ring
(R or C in {0, n}) is fixed by the boundary condition.  Heights on faces step
by exactly 1 across every edge: crossing an occupied edge upward or rightward
raises the height.  Configurations and face-height grids are bijective given
the boundary, and a c-flip at an interior face is exactly a +/-2 move at a
local extremum of the height grid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import rng
from .cftp import run_cftp_batch, chain_master_seed, CftpTrace
from .errors import (
    BoundaryFaceError,
    DomainMismatchError,
    IceRuleViolation,
    InconsistencyError,
    InfeasibleBoundary,
    NonMonotoneWeights,
)
from .sweeps import Backend, Sequential


class VertexType(enum.Enum):
    A1 = "a1"  # all four edges empty
    A2 = "a2"  # all four occupied
    B1 = "b1"  # west + east
    B2 = "b2"  # north + south
    C1 = "c1"  # south + west
    C2 = "c2"  # north + east


_TYPE_BY_CODE = {
    0b0000: VertexType.A1,
    0b1111: VertexType.A2,
    0b0011: VertexType.B1,  # code bits: W=1, E=2, N=4, S=8
    0b1100: VertexType.B2,
    0b1001: VertexType.C1,
    0b0110: VertexType.C2,
}


@dataclass(frozen=True)
class SVWeights:
    """Symmetric six-vertex weights (a, b, c), all positive."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("six-vertex weights must be strictly positive")

    @property
    def monotone(self) -> bool:
        """True iff c-flips preserve the height order (a <= c and b <= c)."""
        return self.a <= self.c and self.b <= self.c

    def table(self) -> np.ndarray:
        t = np.zeros(16)
        for code, vt in _TYPE_BY_CODE.items():
            t[code] = {"a": self.a, "b": self.b, "c": self.c}[vt.value[0]]
        return t


@dataclass(frozen=True)
class Boundary:
    """Fixed occupancies of the edges crossing the domain boundary."""

    n: int
    top: np.ndarray     # v_edges[0, :]
    bottom: np.ndarray  # v_edges[n, :]
    left: np.ndarray    # h_edges[:, 0]
    right: np.ndarray   # h_edges[:, n]

    def __post_init__(self):
        for name in ("top", "bottom", "left", "right"):
            arr = np.asarray(getattr(self, name), dtype=bool)
            if arr.shape != (self.n,):
                raise ValueError(f"{name} boundary must have length {self.n}")
            object.__setattr__(self, name, arr)

    def __eq__(self, other):
        return (
            isinstance(other, Boundary)
            and self.n == other.n
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("top", "bottom", "left", "right")
            )
        )

    def __hash__(self):
        return hash(
            (self.n,)
            + tuple(getattr(self, f).tobytes() for f in ("top", "bottom", "left", "right"))
        )

    def to_text(self) -> str:
        rows = [str(self.n)]
        for name in ("top", "bottom", "left", "right"):
            bits = getattr(self, name)
            rows.append(name + " " + "".join("1" if b else "0" for b in bits))
        return "\n".join(rows) + "\n"


def dwbc(n: int) -> Boundary:
    """Domain-wall boundary: paths enter on the bottom and left, none leave
    through the top or right."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ones = np.ones(n, dtype=bool)
    zeros = np.zeros(n, dtype=bool)
    return Boundary(n, top=zeros, bottom=ones, left=ones, right=zeros)


@dataclass(frozen=True)
class SixVertexConfig:
    """Edge occupancies satisfying the ice rule at every interior vertex."""

    n: int
    h_edges: np.ndarray
    v_edges: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h_edges, dtype=bool)
        v = np.asarray(self.v_edges, dtype=bool)
        if h.shape != (self.n, self.n + 1) or v.shape != (self.n + 1, self.n):
            raise InconsistencyError("edge grids have the wrong shape")
        object.__setattr__(self, "h_edges", h)
        object.__setattr__(self, "v_edges", v)

    @cached_property
    def boundary(self) -> Boundary:
        return Boundary(
            self.n,
            top=self.v_edges[0],
            bottom=self.v_edges[self.n],
            left=self.h_edges[:, 0],
            right=self.h_edges[:, self.n],
        )

    def edges_at(self, vertex: tuple[int, int]) -> tuple[bool, bool, bool, bool]:
        """(west, east, north, south) occupancies at a vertex."""
        r, c = vertex
        return (
            bool(self.h_edges[r, c]),
            bool(self.h_edges[r, c + 1]),
            bool(self.v_edges[r, c]),
            bool(self.v_edges[r + 1, c]),
        )

    def __eq__(self, other):
        return (
            isinstance(other, SixVertexConfig)
            and self.n == other.n
            and np.array_equal(self.h_edges, other.h_edges)
            and np.array_equal(self.v_edges, other.v_edges)
        )

    def __hash__(self):
        return hash((self.n, self.h_edges.tobytes(), self.v_edges.tobytes()))

    def to_text(self) -> str:
        rows = [str(self.n)]
        rows += ["".join("1" if x else "0" for x in row) for row in self.h_edges]
        rows += ["".join("1" if x else "0" for x in row) for row in self.v_edges]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SixVertexConfig":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        n = int(lines[0])
        if len(lines) != 1 + n + n + 1:
            raise InconsistencyError("config file has the wrong number of rows")
        h = np.array([[ch == "1" for ch in ln] for ln in lines[1 : n + 1]])
        v = np.array([[ch == "1" for ch in ln] for ln in lines[n + 1 :]])
        cfg = cls(n, h, v)
        heights_from_config(cfg)  # validates the ice rule
        return cfg


@dataclass(frozen=True)
class FaceHeights:
    """Integer heights on the (n+1) x (n+1) face grid, boundary ring fixed."""

    n: int
    heights: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=np.int32)
        if h.shape != (self.n + 1, self.n + 1):
            raise InconsistencyError("height grid has the wrong shape")
        object.__setattr__(self, "heights", h)

    def __eq__(self, other):
        return (
            isinstance(other, FaceHeights)
            and self.n == other.n
            and np.array_equal(self.heights, other.heights)
        )

    def __hash__(self):
        return hash((self.n, self.heights.tobytes()))


# -- classification and the height bijection ----------------------------------


def vertex_type(cfg: SixVertexConfig, vertex: tuple[int, int]) -> VertexType:
    """Classify an interior vertex; raises IceRuleViolation otherwise."""
    w, e, nn, s = cfg.edges_at(vertex)
    code = w | (e << 1) | (nn << 2) | (s << 3)
    vt = _TYPE_BY_CODE.get(code)
    if vt is None:
        raise IceRuleViolation(f"vertex {vertex} pattern (w,e,n,s)={(w, e, nn, s)}")
    return vt


def vertex_type_codes(cfg: SixVertexConfig) -> np.ndarray:
    """Pattern codes (W + 2E + 4N + 8S) for all vertices; shape (n, n)."""
    h, v = cfg.h_edges.astype(np.int8), cfg.v_edges.astype(np.int8)
    return h[:, :-1] + 2 * h[:, 1:] + 4 * v[:-1, :] + 8 * v[1:, :]


def count_c_vertices(cfg: SixVertexConfig) -> int:
    codes = vertex_type_codes(cfg)
    return int(((codes == 0b1001) | (codes == 0b0110)).sum())


def heights_from_config(cfg: SixVertexConfig) -> FaceHeights:
    """Integrate edge occupancies into face heights (reference corner 0).

    Raises InconsistencyError when the grid does not integrate consistently,
    which happens exactly when some vertex violates the ice rule.
    """
    n = cfg.n
    occ_h = cfg.h_edges.astype(np.int32)
    occ_v = cfg.v_edges.astype(np.int32)
    h = np.zeros((n + 1, n + 1), dtype=np.int32)
    # down the west ring: H[r+1,0] = H[r,0] - (+1 if west stub occupied)
    steps_down = np.where(occ_h[:, 0] == 1, -1, 1)
    h[1:, 0] = np.cumsum(steps_down)
    # across each face row: H[r,c+1] = H[r,c] + (+1 if v edge occupied)
    steps_right = np.where(occ_v == 1, 1, -1)
    h[:, 1:] = h[:, :1] + np.cumsum(steps_right, axis=1)
    fh = FaceHeights(n, h)
    back = config_from_heights(fh)
    if back != cfg:
        raise InconsistencyError("edge grid does not define a single-valued height")
    return fh


def config_from_heights(fh: FaceHeights) -> SixVertexConfig:
    """Differentiate a face-height grid back into edge occupancies."""
    h = fh.heights
    dv = h[:, 1:] - h[:, :-1]
    dh = h[:-1, :] - h[1:, :]
    if (np.abs(dv) != 1).any() or (np.abs(dh) != 1).any():
        raise InconsistencyError("adjacent faces must differ by exactly 1")
    return SixVertexConfig(fh.n, h_edges=dh == 1, v_edges=dv == 1)


class FlipDirection(enum.Enum):
    UP = "up"
    DOWN = "down"
    NONE = "none"


def flippable(fh: FaceHeights, face: tuple[int, int]) -> FlipDirection:
    """Whether an interior face is a local height minimum (up-flippable),
    maximum (down-flippable), or neither."""
    r, c = face
    if not (1 <= r <= fh.n - 1 and 1 <= c <= fh.n - 1):
        raise BoundaryFaceError(f"face {face} is not interior")
    h = fh.heights
    d = (
        h[r - 1, c] - h[r, c],
        h[r + 1, c] - h[r, c],
        h[r, c - 1] - h[r, c],
        h[r, c + 1] - h[r, c],
    )
    if all(x == 1 for x in d):
        return FlipDirection.UP
    if all(x == -1 for x in d):
        return FlipDirection.DOWN
    return FlipDirection.NONE


def _corner_weight_product(fh: FaceHeights, face: tuple[int, int], table: np.ndarray) -> float:
    cfg = config_from_heights(fh)
    codes = vertex_type_codes(cfg)
    r, c = face
    return float(
        table[codes[r - 1, c - 1]]
        * table[codes[r - 1, c]]
        * table[codes[r, c - 1]]
        * table[codes[r, c]]
    )


def sv_heat_bath_p_up(fh: FaceHeights, face: tuple[int, int], w: SVWeights) -> float:
    """Heat-bath probability of the raised local configuration at a face.

    W_up / (W_up + W_down) where each side multiplies the four corner-vertex
    weights of the face in the raised/lowered variant.
    """
    direction = flippable(fh, face)
    if direction is FlipDirection.NONE:
        raise ValueError(f"face {face} is not flippable either way")
    table = w.table()
    r, c = face
    other = fh.heights.copy()
    other[r, c] += 2 if direction is FlipDirection.UP else -2
    w_here = _corner_weight_product(fh, face, table)
    w_other = _corner_weight_product(FaceHeights(fh.n, other), face, table)
    if direction is FlipDirection.UP:
        w_lo, w_hi = w_here, w_other
    else:
        w_lo, w_hi = w_other, w_here
    return w_hi / (w_hi + w_lo)


# -- sweeps --------------------------------------------------------------------


def _interior_class_masks(n: int) -> list[np.ndarray]:
    """Masks over the face grid for the four (row, col) parity classes."""
    rr, cc = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    interior = (rr >= 1) & (rr <= n - 1) & (cc >= 1) & (cc <= n - 1)
    masks = []
    for pr in (0, 1):
        for pc in (0, 1):
            masks.append(interior & (rr % 2 == pr) & (cc % 2 == pc))
    return masks


def _vertex_weight_grid(h: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Per-vertex weights for a batch of height grids (B, n+1, n+1)."""
    dv = h[..., :, 1:] - h[..., :, :-1]  # v edge occupied iff +1
    dh = h[..., :-1, :] - h[..., 1:, :]  # h edge occupied iff +1
    occ_v = (dv == 1).astype(np.int8)
    occ_h = (dh == 1).astype(np.int8)
    codes = (
        occ_h[..., :, :-1]
        + 2 * occ_h[..., :, 1:]
        + 4 * occ_v[..., :-1, :]
        + 8 * occ_v[..., 1:, :]
    )
    return table[codes]


def sv_sweep_batch(
    h: np.ndarray,
    u: np.ndarray,
    classes: np.ndarray,
    class_masks: list[np.ndarray],
    table: np.ndarray,
    backend: Backend,
) -> np.ndarray:
    """One parity-class heat-bath sweep on a (B, n+1, n+1) height batch.

    ``classes`` picks one of the four face classes per chain; all faces of a
    class are non-adjacent and share no corner vertices, so their flips and
    acceptance ratios are independent.
    """
    b, f, _ = h.shape
    cls_mask = np.stack([class_masks[int(k)] for k in classes])
    up_nb = h[:, :-2, 1:-1]
    down_nb = h[:, 2:, 1:-1]
    left_nb = h[:, 1:-1, :-2]
    right_nb = h[:, 1:-1, 2:]
    center = h[:, 1:-1, 1:-1]
    is_min = (
        (up_nb == center + 1)
        & (down_nb == center + 1)
        & (left_nb == center + 1)
        & (right_nb == center + 1)
    )
    is_max = (
        (up_nb == center - 1)
        & (down_nb == center - 1)
        & (left_nb == center - 1)
        & (right_nb == center - 1)
    )
    inner_cls = cls_mask[:, 1:-1, 1:-1]
    cand_min = is_min & inner_cls
    cand_max = is_max & inner_cls

    out = h.copy()

    def band(lo: int, hi: int):
        # band over interior face rows [lo, hi) of the (f-2)-row interior
        sl = slice(lo, hi)
        cmin = cand_min[:, sl]
        cmax = cand_max[:, sl]
        if not (cmin.any() or cmax.any()):
            return
        # toggled variant of every candidate face; same-class faces are far
        # enough apart that their corner weights never interact
        h_alt = h.copy()
        inner = h_alt[:, 1:-1, 1:-1]
        inner[:, sl][cmin] += 2
        inner[:, sl][cmax] -= 2
        w_cur = _vertex_weight_grid(h, table)
        w_alt = _vertex_weight_grid(h_alt, table)
        # corner products for faces (R, C), R, C in 1..n-1
        p_cur = (
            w_cur[:, :-1, :-1] * w_cur[:, :-1, 1:] * w_cur[:, 1:, :-1] * w_cur[:, 1:, 1:]
        )
        p_alt = (
            w_alt[:, :-1, :-1] * w_alt[:, :-1, 1:] * w_alt[:, 1:, :-1] * w_alt[:, 1:, 1:]
        )
        p_cur = p_cur[:, sl]
        p_alt = p_alt[:, sl]
        w_hi = np.where(cmin, p_alt, p_cur)
        w_lo = np.where(cmin, p_cur, p_alt)
        p_high = w_hi / (w_hi + w_lo)
        take_high = u[:, 1:-1, 1:-1][:, sl] < p_high
        delta = np.zeros_like(cmin, dtype=h.dtype)
        delta[cmin & take_high] = 2
        delta[cmax & ~take_high] = -2
        out[:, 1:-1, 1:-1][:, sl] += delta

    backend.run_bands(f - 2, band)
    return out


def sv_random_walk_batch(
    h: np.ndarray,
    seeds: np.ndarray,
    n_steps: int,
    weights: SVWeights,
    backend: Backend | None = None,
) -> np.ndarray:
    """Evolve a (B, n+1, n+1) batch of height grids for n_steps sweeps."""
    backend = backend or Sequential()
    f = h.shape[-1]
    n = f - 1
    seeds = np.asarray(seeds, dtype=np.uint64)
    site_keys = rng.key_grid_batch(seeds, (f, f), rng.TAG_SITE)
    global_keys = rng.global_key_batch(seeds, (f, f))
    class_masks = _interior_class_masks(n)
    table = weights.table()
    out = h.copy()
    for step in range(n_steps):
        coin = rng.uniform_from_keys(global_keys, step)
        classes = np.minimum((coin * 4).astype(np.int64), 3)
        u = rng.uniform_from_keys(site_keys, step)
        out = sv_sweep_batch(out, u, classes, class_masks, table, backend)
    return out


def sv_sweep(
    cfg: SixVertexConfig,
    f: rng.StreamFamily,
    step: int,
    face_class: int,
    weights: SVWeights,
    backend: Backend | None = None,
) -> SixVertexConfig:
    """Apply the heat-bath kernel to every interior face of one parity class."""
    backend = backend or Sequential()
    h = heights_from_config(cfg).heights[None]
    u = f.uniform_grid(step)[None]
    masks = _interior_class_masks(cfg.n)
    new = sv_sweep_batch(
        h, u, np.array([face_class]), masks, weights.table(), backend
    )
    return config_from_heights(FaceHeights(cfg.n, new[0]))


def sv_random_walk(
    cfg: SixVertexConfig,
    seed: int,
    n_steps: int,
    weights: SVWeights,
    backend: Backend | None = None,
) -> SixVertexConfig:
    """Run n_steps sweeps, choosing the face parity class per step from the
    chain-wide sub-stream."""
    h = heights_from_config(cfg).heights[None]
    out = sv_random_walk_batch(
        h, np.array([seed], dtype=np.uint64), n_steps, weights, backend
    )
    return config_from_heights(FaceHeights(cfg.n, out[0]))


# -- extremal heights and CFTP --------------------------------------------------


def _ring_heights(boundary: Boundary) -> np.ndarray:
    """Heights of the boundary face ring forced by the fixed edges.

    Returns an (n+1, n+1) grid with interior entries 0 (to be filled);
    raises InfeasibleBoundary when the ring walk does not close up.
    """
    n = boundary.n
    h = np.zeros((n + 1, n + 1), dtype=np.int32)
    top = boundary.top.astype(np.int32)
    bottom = boundary.bottom.astype(np.int32)
    left = boundary.left.astype(np.int32)
    right = boundary.right.astype(np.int32)
    # across the top ring: H[0, C+1] - H[0, C] = +1 iff top[C] occupied
    h[0, 1:] = np.cumsum(np.where(top == 1, 1, -1))
    # down the east ring: H[R+1, n] - H[R, n] = -1 iff right[R] occupied
    h[1:, n] = h[0, n] + np.cumsum(np.where(right == 1, -1, 1))
    # down the west ring
    h[1:, 0] = np.cumsum(np.where(left == 1, -1, 1))
    # across the bottom ring, from the west corner
    bottom_row = h[n, 0] + np.cumsum(np.where(bottom == 1, 1, -1))
    if h[n, n] != bottom_row[-1]:
        raise InfeasibleBoundary("boundary ring heights do not close up")
    h[n, 1:] = bottom_row
    return h


def sv_extremal(n: int, boundary: Boundary) -> tuple[FaceHeights, FaceHeights]:
    """Pointwise maximal and minimal height grids consistent with the boundary.

    Tight extension: every face height is within graph distance of some ring
    face, and the bound is achieved.  Raises InfeasibleBoundary when no
    configuration exists.
    """
    if boundary.n != n:
        raise DomainMismatchError("boundary size does not match n")
    ring = _ring_heights(boundary)
    rr, cc = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    on_ring = (rr == 0) | (rr == n) | (cc == 0) | (cc == n)
    ring_pos = np.argwhere(on_ring)
    ring_vals = ring[on_ring]
    dist = np.abs(rr[None] - ring_pos[:, 0, None, None]) + np.abs(
        cc[None] - ring_pos[:, 1, None, None]
    )
    h_max = (ring_vals[:, None, None] + dist).min(axis=0)
    h_min = (ring_vals[:, None, None] - dist).max(axis=0)
    if not (
        np.array_equal(h_max[on_ring], ring_vals)
        and np.array_equal(h_min[on_ring], ring_vals)
    ):
        raise InfeasibleBoundary("ring heights are mutually incompatible")
    hi = FaceHeights(n, h_max.astype(np.int32))
    lo = FaceHeights(n, h_min.astype(np.int32))
    config_from_heights(hi)  # validates +/-1 steps
    config_from_heights(lo)
    return hi, lo


def sv_cftp(
    n: int,
    boundary: Boundary,
    weights: SVWeights,
    master_seed: int,
    backend: Backend | None = None,
    max_doublings: int = 40,
    count: int = 1,
    progress=None,
    trace: CftpTrace | None = None,
    batch_size: int = 2048,
) -> SixVertexConfig | list[SixVertexConfig]:
    """Exact Gibbs samples via monotone CFTP; requires a <= c and b <= c.

    With ``count == 1`` returns a single configuration, otherwise a list.
    """
    if not weights.monotone:
        raise NonMonotoneWeights(
            f"(a, b, c) = ({weights.a}, {weights.b}, {weights.c}) does not satisfy "
            "a <= c and b <= c; fall back to sv_random_walk with a burn-in"
        )
    backend = backend or Sequential()
    hi, lo = sv_extremal(n, boundary)

    progress_cb = None
    if progress is not None:
        def progress_cb(round_no, steps, collapsed, total):
            progress.write(
                f"round={round_no} steps={steps} collapsed={collapsed == total}\n"
            )

    def walk(states, pair_seeds, n_steps):
        return sv_random_walk_batch(states, pair_seeds, n_steps, weights, backend)

    configs: list[SixVertexConfig] = []
    if np.array_equal(hi.heights, lo.heights):
        cfg = config_from_heights(hi)
        configs = [cfg] * count
    else:
        for lo_i in range(0, count, batch_size):
            hi_i = min(lo_i + batch_size, count)
            masters = np.array(
                [chain_master_seed(master_seed, k) for k in range(lo_i, hi_i)],
                dtype=np.uint64,
            )
            states = run_cftp_batch(
                hi.heights,
                lo.heights,
                walk,
                masters,
                max_doublings,
                progress_cb,
                trace if lo_i == 0 else None,
            )
            configs.extend(
                config_from_heights(FaceHeights(n, s)) for s in states
            )
    return configs[0] if count == 1 else configs
