"""Perfect sampling of domino tilings, lozenge tilings, and six-vertex states.

Monotone coupling-from-the-past over data-parallel cluster Glauber dynamics,
with deterministic per-site random streams, exhaustive enumeration oracles,
a statistics pipeline, and SVG rendering.
"""

from .errors import (
    BoundaryFaceError,
    CapacityError,
    ConvergenceCapExceeded,
    CoverageError,
    DomainError,
    DomainMismatchError,
    EmptyArchive,
    IceRuleViolation,
    InconsistencyError,
    InfeasibleBoundary,
    NonMonotoneWeights,
    OutOfDomainError,
    OutOfGridError,
    OverlapError,
    StateSpaceTooLarge,
    TileSamplerError,
    UntileableDomain,
)
from .lattice import (
    Domain,
    EdgeWeights,
    HeightFunction,
    Ordering,
    Tiling,
    Uniform,
    VolumeWeights,
    dominoes_from_tiling,
    extremal_tilings,
    height_function,
    is_valid_tiling,
    lattice_meet_join,
    log_weight,
    merge_checkerboard,
    order_compare,
    split_checkerboard,
    tiling_from_dominoes,
    tiling_from_heights,
)
from .rng import StreamFamily, derive_seed, seed_family, uniform
from .sweeps import (
    Color,
    MultiThreaded,
    Sequential,
    SweepPlan,
    heat_bath_p_up,
    random_walk,
    random_walk_batch,
    rotate_kernel,
    sweep,
    update_kernel,
)
from .cftp import (
    CftpSchedule,
    CftpTrace,
    cftp_sample,
    cftp_sample_many,
    collapse_check,
)
from .sixvertex import (
    Boundary,
    FaceHeights,
    FlipDirection,
    SixVertexConfig,
    SVWeights,
    VertexType,
    config_from_heights,
    dwbc,
    flippable,
    heights_from_config,
    sv_cftp,
    sv_extremal,
    sv_heat_bath_p_up,
    sv_random_walk,
    sv_sweep,
    vertex_type,
)
from .lozenge import (
    LozEdgeWeights,
    LozengeHeights,
    LozengeTiling,
    TriDomain,
    loz_cftp,
    loz_extremal,
    loz_heights,
    loz_random_walk,
    loz_rotateable,
    loz_sweep,
    lozenges_from_tiling,
    tiling_from_lozenges,
)
from .oracle import (
    enumerate_domino_tilings,
    enumerate_lozenge_tilings,
    enumerate_sixvertex,
    exact_distribution,
    flip_graph_connected,
    flip_graph_diameter,
)
from .stats import (
    DensityMap,
    Histogram,
    SampleArchive,
    chi_square_gof,
    density_map,
    scalar_observable,
    total_variation,
)
from .render import render

__version__ = "0.1.0"
