"""Joint spectral tools for commuting matrix tuples."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .numcore import Tolerance, DEFAULT_TOL, Subspace, meet, join, projection_distance
from .tuples import (CommutingTuple, CommPolynomial, certify_commuting, eval_poly,
                     planted_commuting_tuple, random_commuting_tuple)
from .triangular import (JointSpectralMeasure, joint_measure, simultaneous_schur, pushforward,
                         multiset_distance)
from .regions import (Disk, HalfPlane, FullPlane, Rectangle, Union, Intersection, Complement,
                      Predicate, rectangle, polydisk_union)
from .hsproj import hs_single, hs_joint, joint_spectral_subspace
from .curve import peano_curve
from .ordering import assign_params, build_flag, curve_for, diag_expectation
from .jointspec import alpha, harte_member, scan
from .holocalc import HoloFunction, apply_series, vasilescu_integral, verify_pushforward
