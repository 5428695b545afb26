"""Relative entropy of entanglement for the two-qubit X-state family.

Public surface: the parameter model (`XStateParams`, constructors and
separability tests), the certified solvers (`solve_phi_half`,
`solve_diagonal_min`, `solve_general`, `relative_entropy_of_entanglement`),
the witness certifier, and the independent separable-ensemble oracle.
"""

from .closed_form import (
    ClosestSeparable,
    relative_entropy_of_entanglement,
    solve_diagonal_min,
    solve_phi_half,
)
from .errors import (
    CertificationFailure,
    ConvergenceFailure,
    DegenerateParams,
    InvalidParams,
    NonPositive,
    NotEntangled,
    ParseError,
    StructureViolation,
    SupportDeficient,
    XreeError,
)
from .linalg import (
    BlochBlock2,
    Spectrum4,
    bloch_log,
    eig_x_structured,
    hermiticity_defect,
    jacobi_eigh,
    matrix_log_on_support,
    partial_transpose,
    relative_entropy,
    spectrum,
    validate_density_matrix,
    von_neumann_entropy,
)
from .oracle import (
    OracleResult,
    ProductEnsemble,
    ensemble_to_density,
    minimize_relative_entropy,
    structured_min,
)
from .stationarity import AnsatzPoint, solve_general, stationarity_residuals
from .witness import (
    Certificate,
    ProductMax,
    WitnessA,
    build_witness,
    certify,
    max_product_overlap,
)
from .xstate import (
    CanonicalTransform,
    FilterNormalForm,
    XStateParams,
    canonicalize,
    concurrence,
    from_filter_normal_form,
    from_matrix,
    is_entangled,
    to_density,
)

__version__ = "0.1.0"
