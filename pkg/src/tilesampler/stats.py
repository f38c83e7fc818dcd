"""Sample archives, density maps, histograms, and the chi-square harness.

Archives are line-delimited text with a human-readable header: greppable,
diff-friendly, and carrying enough metadata (model, domain hash, weights,
seed, backend, sampler settings) to regenerate every record bit-exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import stats as sps

from .errors import EmptyArchive, InconsistencyError
from .lattice import Domain, Tiling
from .lozenge import LozengeTiling
from .sixvertex import Boundary, SixVertexConfig, vertex_type_codes

C_VERTEX_CODES = (0b1001, 0b0110)


# -- chi-square harness --------------------------------------------------------


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    pvalue: float
    significance: float

    @property
    def passed(self) -> bool:
        return self.pvalue >= self.significance


def chi_square_gof(
    counts: Iterable[int],
    probs: Iterable[float] | None = None,
    significance: float = 0.001,
) -> ChiSquareResult:
    """Goodness-of-fit test of observed counts against expected probabilities.

    Passes when the p-value is at or above the significance level (default
    the 0.1% level).  ``probs=None`` means uniform.
    """
    counts = np.asarray(list(counts), dtype=float)
    n = counts.sum()
    if probs is None:
        expected = np.full(len(counts), n / len(counts))
    else:
        probs = np.asarray(list(probs), dtype=float)
        expected = probs / probs.sum() * n
    stat = float(((counts - expected) ** 2 / expected).sum())
    dof = len(counts) - 1
    pvalue = float(sps.chi2.sf(stat, dof))
    return ChiSquareResult(stat, dof, pvalue, significance)


def total_variation(emp: dict, exact: dict) -> float:
    keys = set(emp) | set(exact)
    return 0.5 * sum(abs(emp.get(k, 0.0) - exact.get(k, 0.0)) for k in keys)


# -- archives --------------------------------------------------------------------


def _domain_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class SampleArchive:
    """Header metadata plus serialized states, one record per line."""

    model: str
    header: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @classmethod
    def create(
        cls,
        model: str,
        domain,
        weights_text: str,
        seed: int,
        backend: str,
        sampler: str,
    ) -> "SampleArchive":
        header = {
            "model": model,
            "domain_hash": _domain_hash(domain.to_text()),
            "weights": weights_text,
            "seed": hex(seed),
            "backend": backend,
            "sampler": sampler,
            "samples": "0",
        }
        arc = cls(model, header)
        arc._domain = domain
        return arc

    def append(self, state) -> None:
        self.records.append(state)
        self.header["samples"] = str(len(self.records))

    def extend(self, states) -> None:
        for s in states:
            self.append(s)

    def __len__(self):
        return len(self.records)

    def dump(self, fh) -> None:
        for k, v in self.header.items():
            fh.write(f"# {k}: {v}\n")
        for state in self.records:
            fh.write(_serialize_state(state) + "\n")

    @classmethod
    def load(cls, fh, domain) -> "SampleArchive":
        header = {}
        records = []
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                header[k.strip()] = v.strip()
                continue
            records.append(_parse_state(header.get("model", ""), domain, line))
        arc = cls(header.get("model", ""), header, records)
        arc._domain = domain
        return arc


def _serialize_state(state) -> str:
    if isinstance(state, Tiling):
        return " ".join(str(int(x)) for x in state.states.ravel())
    if isinstance(state, SixVertexConfig):
        bits = np.concatenate([state.h_edges.ravel(), state.v_edges.ravel()])
        return "".join("1" if b else "0" for b in bits)
    if isinstance(state, LozengeTiling):
        return "".join("1" if b else "0" for b in state.edges.ravel())
    raise TypeError(f"unknown state type {type(state)!r}")


def _parse_state(model: str, domain, line: str):
    if model == "domino":
        v = domain.n + 1
        grid = np.array([int(tok) for tok in line.split()], dtype=np.uint8).reshape(v, v)
        return Tiling(domain, grid)
    if model == "sixvertex":
        n = domain.n if isinstance(domain, Boundary) else domain
        bits = np.array([ch == "1" for ch in line])
        nh = n * (n + 1)
        return SixVertexConfig(
            n, bits[:nh].reshape(n, n + 1), bits[nh:].reshape(n + 1, n)
        )
    if model == "lozenge":
        sx, sy = domain.size
        bits = np.array([ch == "1" for ch in line])
        return LozengeTiling(domain, bits.reshape(3, sx + 1, sy + 1))
    raise InconsistencyError(f"unknown archive model {model!r}")


# -- density maps ------------------------------------------------------------------


@dataclass(frozen=True)
class DensityMap:
    """Per-site empirical means of an indicator observable."""

    observable: str
    grid: np.ndarray
    samples: int

    def to_csv(self) -> str:
        lines = [",".join(f"{x:.6f}" for x in row) for row in self.grid]
        return "\n".join(lines) + "\n"


def domino_orientation_grid(t: Tiling) -> np.ndarray:
    """Per-face indicator: 1 for horizontal dominoes, 0 for vertical.

    Faces outside the domain are NaN.
    """
    n = t.domain.n
    grid = np.full((n, n), np.nan)
    from .lattice import dominoes_from_tiling

    for a, b in dominoes_from_tiling(t):
        horizontal = a[0] == b[0]
        grid[a] = 1.0 if horizontal else 0.0
        grid[b] = 1.0 if horizontal else 0.0
    return grid


_OBSERVABLES: dict[str, Callable] = {}


def _observable(name):
    def deco(fn):
        _OBSERVABLES[name] = fn
        return fn
    return deco


@_observable("h-edge")
def _h_edge(state: SixVertexConfig) -> np.ndarray:
    return state.h_edges.astype(float)


@_observable("v-edge")
def _v_edge(state: SixVertexConfig) -> np.ndarray:
    return state.v_edges.astype(float)


@_observable("c-vertex")
def _c_vertex(state: SixVertexConfig) -> np.ndarray:
    codes = vertex_type_codes(state)
    return ((codes == C_VERTEX_CODES[0]) | (codes == C_VERTEX_CODES[1])).astype(float)


@_observable("domino-orientation")
def _domino_orientation(state: Tiling) -> np.ndarray:
    return domino_orientation_grid(state)


def density_map(archive: SampleArchive, observable: str) -> DensityMap:
    """Per-site mean of the named indicator observable over the archive."""
    if len(archive) == 0:
        raise EmptyArchive("archive holds no records")
    fn = _OBSERVABLES.get(observable)
    if fn is None:
        raise KeyError(f"unknown observable {observable!r}; have {sorted(_OBSERVABLES)}")
    acc = None
    for state in archive.records:
        grid = fn(state)
        acc = grid if acc is None else acc + grid
    return DensityMap(observable, acc / len(archive), len(archive))


# -- scalar observables --------------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    observable: str
    edges: np.ndarray
    density: np.ndarray
    samples: int

    def to_csv(self) -> str:
        lines = ["left,right,density"]
        for lo, hi, d in zip(self.edges[:-1], self.edges[1:], self.density):
            lines.append(f"{lo:.6f},{hi:.6f},{d:.6f}")
        return "\n".join(lines) + "\n"


def c_vertex_count(state: SixVertexConfig) -> float:
    codes = vertex_type_codes(state)
    return float(((codes == C_VERTEX_CODES[0]) | (codes == C_VERTEX_CODES[1])).sum())


def aztec_y_intercept(t: Tiling) -> float:
    """Row index where the top frozen horizontal-brick cluster ends, on the
    central column, measured from the domain center (negative = above).

    Recorded for inspection of the fluctuation histogram; no distributional
    claim is asserted at desk scale.
    """
    grid = domino_orientation_grid(t)
    n = t.domain.n
    mid = n // 2
    col = grid[:, mid]
    rows = np.nonzero(~np.isnan(col))[0]
    boundary = rows[0]
    for r in rows:
        if col[r] == 1.0:
            boundary = r + 1
        else:
            break
    return float(boundary - mid)


def scalar_observable(
    archive: SampleArchive,
    fn: Callable | str,
    bins: int | None = None,
) -> Histogram:
    """Binned, normalized histogram of a scalar observable over the archive.

    ``fn`` may be a callable or one of the built-in names
    ('c-vertex-count', 'y-intercept').
    """
    if len(archive) == 0:
        raise EmptyArchive("archive holds no records")
    name = fn if isinstance(fn, str) else getattr(fn, "__name__", "scalar")
    if fn == "c-vertex-count":
        fn = c_vertex_count
    elif fn == "y-intercept":
        fn = aztec_y_intercept
    values = np.array([fn(s) for s in archive.records], dtype=float)
    lo, hi = values.min(), values.max()
    if lo == hi:
        edges = np.array([lo - 0.5, lo + 0.5])
    else:
        edges = np.histogram_bin_edges(values, bins=bins or "auto")
    density, edges = np.histogram(values, bins=edges, density=True)
    return Histogram(name, edges, density, len(values))
