"""Schmidt games for affine Diophantine approximation.

Exact lattice geometry, badness scans, fractal supports, a game referee,
and constructive White strategies for the affine winning sets.
"""

from .diophantine import (
    AffineSystem,
    badness_scan,
    dani_cross_check,
    dist_to_Z,
    is_singular_scan,
    trajectory_minima,
)
from .exceptions import (
    ConfigError,
    InvalidTranscript,
    NotCase1,
    NotFound,
    PrecisionExhausted,
    SchmidtAffineError,
    StrategyBreakdown,
)
from .fractal import (
    DecayParams,
    Slab,
    SupportSpec,
    avoid_hyperplanes,
    cantor,
    fitting_count,
    point_on_K_in_ball,
    sierpinski,
    unit_box,
    verify_absolute_decay,
)
from .game import Ball, GameParams, Transcript, limit_point, run_game, validate_move, validate_transcript
from .lattice import (
    AffineLattice,
    FlowSchedule,
    Lattice,
    apply_flow,
    closest_point,
    enumerate_small_hyperplanes,
    shortest_vector,
    system_lattice,
)
from .white import BadAStrategy, BadBStrategy, alpha_for, badInf_verify, case1_strategy, ledger_check

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
