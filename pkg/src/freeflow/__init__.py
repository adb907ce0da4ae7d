"""Lipschitz potentials, minimal flows and free-space norms on rasterized
2-D domains with obstacles."""

import os as _os

# FREEFLOW_THREADS caps the only parallelism present (BLAS/OpenMP inside
# numpy/scipy); must be exported before numpy's first import
if "FREEFLOW_THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["FREEFLOW_THREADS"])

from .domain import (
    Domain,
    DomainSpec,
    PLPath,
    Region,
    build_domain,
    constant_speed_samples,
    erode,
    intrinsic_distance,
    path_length,
    vector_norm,
)
from .errors import FreeflowError
from .fields import (
    AnalyticField,
    GridScalarField,
    GridVectorField,
    Mollifier,
    conservativity_check,
    gradient,
    jacobian_symmetry_defect,
    line_integral,
    make_mollifier,
    mollify,
    vortex_field,
    weak_divergence_pairing,
)
from .flows import (
    SpindleField,
    SpindleSpec,
    chain_spindles,
    loop_smear,
    rect_face_measure,
    spindle_field,
)
from .potential import (
    ReconstructionResult,
    isometry_defect,
    lipschitz_norm_global,
    lipschitz_norm_local,
    reconstruct_potential,
)
from .transport import (
    FlowNetwork,
    FlowSolution,
    Molecule,
    beckmann_norm,
    duality_certificate,
    kantorovich_norm,
    min_cost_flow,
    quotient_norm,
)

__version__ = "0.1.0"
