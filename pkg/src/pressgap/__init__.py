"""pressgap: thermodynamic-formalism experiments for expanding circle maps,
their inverse-limit extensions, and solenoid attractors.

The toolkit classifies orbit segments by hyperbolic-time windows, estimates
topological pressure on segment collections, constructs shadowing orbits for
lists of good segments, bounds Birkhoff variation over Bowen balls, and
cross-checks pressure against an independent transfer-operator computation.
"""

__version__ = "0.1.0"

from .decomposition import (BadCollection, Classification, Decomposition,
                            DecompositionConfig, GoodCollection,
                            ObstructionSample, classify_segment, decompose,
                            in_sigma_window, obstruction_sample)
from .errors import (BranchSolveError, ConvergenceError, CoverError,
                     GluingError, MixingCapError, NodeCapError, PressgapError,
                     ValidationError)
from .extension import (ExtensionConfig, ExtPoint, as_base_potential,
                        bowen_bound, depth_for_tolerance, extend, hat_distance,
                        hat_g, hat_g_inverse, lift_fiber_averaged,
                        lift_projection, verify_bowen)
from .maps import (MapSystem, Potential, StateSpace, circle_dist,
                   constant_potential, doubling, geometric_potential,
                   manneville_pomeau, perturbed_doubling, tabulated_map,
                   tabulated_potential, zero_potential)
from .orbits import (CylinderTree, FullCollection, OrbitSegment, birkhoff_sum,
                     bowen_distance, partition_sum_sep, partition_sum_span,
                     separated_set)
from .pressure import (GapReport, HypothesisReport, PressureEstimate,
                       ct_hypothesis_check, gap_report, katok_sn,
                       pressure_at_scale)
from .solenoid import (AttractorPoint, SolenoidSystem, apply_f,
                       attractor_bowen_check, conjugacy_h, fiber_point,
                       fiber_sample, holonomy, metric_equivalence)
from .specification import (ExtensionGluingPlan, GluingPlan, fiber_sync_time,
                            glue_base, glue_extension, verify_shadow,
                            verify_shadow_extension)
from .transfer import (EigenData, OperatorGrid, build_operator,
                       check_equilibrium, leading_eigen)
