"""Weyl-chamber reduction of mean curvature flow for isoparametric submanifolds."""
__version__ = "0.1.0"

from .weyl import (RootSystem, ChamberPoint, build_root_system, parse_spec,
                   canonical_chamber_center, stratum_of, wall_gaps)
from .flow import (CollapseReport, Trajectory, integrate, detect_collapse,
                   mcv_euclidean, mcv_spherical, mcv_focal, scale_solution)
from .invariants import (eval_invariants, exact_recursion, exact_trajectory,
                         recover_point, exact_collapse_time)
from .rank2 import (Rank2Solution, rank2_solution, minimal_angle, maximal_time,
                    theta_of_t, spherical_phase_portrait)
from .analysis import (MinimalPoint, find_minimal_point, classify_singularity,
                       separation_check, correspondence_check, a3_portrait)
