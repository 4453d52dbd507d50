from .errors import FemError, MeshGenFailure, SingularSystem
from .forward import (
    ConductivityField,
    ForwardOperator,
    VoltageSeries,
    compute_jacobian,
    geometry,
    injection_rhs,
    load_voltage_series,
    save_voltage_series,
    simulate_series,
    solve_forward,
)
from .mesh import TetMesh, build_cylinder_mesh, min_dihedral_deg
from .pattern import MeasurementPattern, ring_adjacent_pairs, two_loop_pattern
