"""Forward transport simulation and non-iterative source reconstruction
on the unit disc."""

from .errors import (DomainError, FormatError, IterationLimitError,
                     RteSourceError, SolverError)
from .geometry import DiscDomain, Grid, boundary_nodes, exit_distance
from .media import (AttenuationField, Medium, ScatteringKernel, SourceField,
                    hg_multiplier, kernel_multipliers, medium_from_config,
                    paper_medium)
from .forward import (AngularFluxGrid, BoundaryData, ballistic_oracle,
                      extract_boundary, solve_forward)
from .transforms import (HField, build_h, divergent_beam, hilbert_offset,
                         radon_line)
from .aanalytic import (bukhgeim_cauchy, boundary_norm, conv_apply,
                        energy_identity_residual, exp_h_coeffs, left_shift,
                        sequence_norm)
from .poisson import DirichletSolver, solve_dirichlet
from .reconstruction import (ReconstructionConfig, ReconstructionResult,
                             assemble_source, boundary_modes, error_metrics,
                             extend_interior, poisson_cascade, reconstruct,
                             recover_deep_modes, trace_transform)

__version__ = "0.1.0"
