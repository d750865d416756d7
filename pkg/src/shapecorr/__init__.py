"""PDE-based shape correspondence with modal order reduction and l0-stable time stepping."""

from .correspondence import Matching, descriptor_distance, match, match_bruteforce
from .descriptor import (
    Descriptor,
    DescriptorSet,
    compute_all,
    compute_descriptor,
    initial_reduced_state,
    load_descriptors,
    save_descriptors,
)
from .errors import FormatError, InputError, MeshError, NumericalError
from .evaluation import EvaluationReport, evaluate, geodesic_distances
from .integrators import (
    CRANK_NICOLSON,
    EXPLICIT_EULER,
    HEAT,
    IMPLICIT_EULER,
    TWIZELL,
    WAVE,
    ModelSpec,
    SchemeSpec,
    TimeGrid,
    amp_theta,
    amp_twizell,
    damped_wave,
    heat_step_factors,
    make_grid,
    time_horizon,
    wave_step_matrices,
)
from .laplacian import OperatorPair, assemble
from .mesh import CellAreas, TriangleMesh, compute_areas, load_mesh, load_off, load_tosca, save_off
from .spectrum import SpectralBasis, estimate_lambda_max, load_cache, save_cache, solve_reduced

__version__ = "0.1.0"
