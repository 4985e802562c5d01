"""Truncated Hardy-Littlewood maximal operators on grids and their sharp L1 constants."""

from .constants import (
    ControlFunctionSpec,
    control_eval,
    control_l1_norm,
    crude_upper_bound,
    growth_rate_check,
    sharp_l1_norm,
)
from .errors import BudgetError, GuardError, ParameterError, ResolutionError, TruncMaxError
from .geometry import DimensionConstants, ball_volume, series_A, series_B, sphere_area
from .grid import (
    GridFunction,
    GridSpec,
    Rect,
    SimpleFunction,
    extremal_fm,
    indicator_ball,
    l1_norm,
    read_grid,
    simple_function_to_grid,
    write_grid,
)
from .kernels import available_backends
from .operators import (
    apply_operator,
    general_truncated_max,
    strong_truncated_max,
    truncated_max,
    truncated_max_oracle,
)
from .params import RadiiResolution, TruncationParams

__version__ = "0.1.0"
