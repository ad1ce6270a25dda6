"""Positivity lab for hybridizable discontinuous Galerkin diffusion on hypergraphs."""
from .assembly import (CondensedSystem, ReducedSystem, SkeletonDofMap, apply_dirichlet, assemble,
                       assemble_graph_fd, assemble_p0_fast, diagnostics)
from .errors import (BracketError, HDGError, IllPosedComboError, InputError, MisuseError,
                     ShapeError, SolverError)
from .local import LocalSolution, condensed_local, local_solve
from .mesh import (HyperEdge, HyperNode, Hypergraph, apply_shear_map, build_graph,
                   build_interval_graph, build_single_hypercube, build_structured_rect_mesh,
                   build_structured_simplex_mesh, from_cells)
from .meshio import read_mesh, write_mesh
from .positivity import (check_angle_condition, positivity_report, rect_s0, rect_tau_threshold,
                         tau_lower_bound_p0, tau_threshold_bisect)
from .scenarios import run_counterexample
from .solve import Solution, conservation_residual, recover_locals, solve, solve_linear
from .spaces import P0_COMBO, RT0_COMBO, SpaceCombo

__version__ = "0.1.0"
