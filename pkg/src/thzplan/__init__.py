"""Indoor terahertz access-point placement simulator and coverage planner."""

from .geometry import (
    ApNode,
    BodyCylinder,
    Constellation,
    Room,
    height_correction,
    los_blocked,
    place_type_a,
    place_type_b,
    place_type_c,
    reference_distances,
)
from .linkbudget import (
    AbsorptionTable,
    LinkBudgetParams,
    absorption_coefficient,
    achievable_rate,
    antenna_gain,
    coverage_radius,
    coverage_radius_bruteforce,
    coverage_radius_ceiled,
    lambert_w0,
    total_path_loss,
)
from .mobility import UserState, init_users, step_user, substream
from .reporting import CrossoverResult, detect_crossover, write_results
from .simulation import (
    ConfigError,
    HeatmapGrid,
    MetricsReport,
    SimConfig,
    associate,
    heatmap,
    run,
    sweep,
)

__version__ = "0.1.0"
