"""Detecting lower-dimensional supports, estimating tube noise, denoising and
Minkowski content estimation from point clouds."""

__version__ = "0.1.0"

from .delaunay import Triangulation, build_delaunay, voronoi_deltas, voronoi_summaries
from .denoise import DenoiseConfig, DenoiseResult, Polyline, Sphere, denoise, hausdorff_distance
from .errors import (ConfigError, DegenerateInputError, DuplicatePointsError, NumericalError,
                     SetscanError)
from .geometry import PointCloud, SpatialIndex, diameter, dist_point_to_cloud, maxmin_nn
from .minkowski import (mc_union_volume, minkowski_noiseless, minkowski_noisy,
                        unit_ball_volume)
from .noise import (closeness_index, decide_inner_empty, epsilon_rule, estimate_R_bb,
                    estimate_R_rconvex)
from .offset import (OffsetEstimator, boundary_balls, data_driven_radius,
                     detect_full_dimension, offset_membership, peel)
from .rconvex import (EmptySphereSet, dist_to_rhull_boundary, empty_sphere_centers,
                      project_to_rhull_boundary)
from .samplers import CurveDescriptor, sample_curve_tube, sample_shell, sample_sphere
