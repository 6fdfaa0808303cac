"""gbx: curvature integrals vs singularity indices on closed surfaces.

The package verifies, numerically and at desk scale, that the total
curvature of a metric (or projective, or Whitney-sum) connection over a
closed oriented surface equals the sum of winding-number indices of a
section's singular points, and decides the Z2 obstruction to lifting
projective transition cocycles to matrix cocycles.
"""

from .cech import (
    LiftAssignment,
    Nerve,
    Z2Cochain,
    build_cocycle,
    check_cocycle,
    obstruction_class,
    solve_coboundary,
)
from .expr import ExprField, FuncField, GridField, parse_expression
from .frames import (
    FrameConnection,
    VerticalForm,
    blend_vertical_form,
    circle_vertical_form,
    curvature_K,
    frame_connection,
    gram_schmidt_frame,
    levi_civita_G,
    projective_alpha,
    surface_frames,
)
from .geom import (
    Chart,
    ChartedSurface,
    OwnRegion,
    area_density,
    check_overlap_consistency,
    eval_metric,
    flat_torus,
    integrate_2form,
    round_sphere,
    transition_map,
)
from .sections import (
    BlowupLoop,
    SectionSpec,
    SingularPoint,
    angle_in_frame,
    blowup_loop,
    detect_singularities,
)
from .verify import (
    VerificationReport,
    deformation_invariance_check,
    structure_check,
    verify_hopf,
    verify_projective,
    verify_whitney,
)
from .winding import IndexResult, index_at, total_index, unwrap_angles

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
