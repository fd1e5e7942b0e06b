"""Design and verification tools for electromagnetically actuated diaphragm micropumps."""

from ._accel import backend_name
from .config import DesignConfig, load_paper_config, parse_config
from .design import design_pipeline, optimal_gap, run_sweep, safety_margin, solve_current, trend_study
from .magnetics import (
    LoopSet,
    coil_dbz_dz,
    coil_resistance,
    effective_magnetization,
    force_point,
    force_volavg,
    loop_bz_onaxis,
    loop_field_offaxis,
    spiral_to_loops,
)
from .model import (
    CoilSpec,
    DesignReport,
    DiaphragmSpec,
    FieldSample,
    MagnetSpec,
    derive_pitch,
    flexural_rigidity,
    magnetization,
)
from .plate import (
    center_deflection_eq2,
    compare_shapes,
    force_for_deflection,
    limiting_force_eq3,
    solve_circular_fd,
    solve_rect_fd,
)

__version__ = "0.1.0"
