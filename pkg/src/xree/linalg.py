"""Dense complex linear algebra for 4x4 two-qubit operators.

Everything here works on plain ``numpy`` arrays in the product basis
``|00>, |01>, |10>, |11>``.  Density matrices are ordinary ``(4, 4)``
complex arrays that pass :func:`validate_density_matrix`; the X (six
nonzero element) structure is exploited where it buys exact
eigendecompositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, InvalidParams, NonPositive, StructureViolation

# Tolerances used across the package.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10          # eigenvalue slack for positive semidefiniteness
SUPPORT_FLOOR = 1e-12    # support cutoff for matrix logarithms
X_STRUCTURE_TOL = 1e-12  # allowed magnitude of off-structure entries

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Index pairs allowed to be nonzero in the X structure.
_X_POSITIONS = {(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0)}


def hermiticity_defect(m) -> float:
    """Largest entrywise deviation of ``m`` from its conjugate transpose."""
    m = np.asarray(m, dtype=complex)
    return float(np.abs(m - m.conj().T).max())


def validate_density_matrix(m, name: str = "matrix") -> np.ndarray:
    """Check that ``m`` is a 4x4 density matrix and return it as complex128.

    Raises InvalidParams when the matrix is not Hermitian (within 1e-12),
    not unit trace (within 1e-12), or has an eigenvalue below -1e-10.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise InvalidParams(f"{name} must be 4x4, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > HERMITICITY_TOL:
        raise InvalidParams(f"{name} is not Hermitian: defect {defect:.3e}")
    tr = m.trace()
    if abs(tr.real - 1.0) > TRACE_TOL or abs(tr.imag) > TRACE_TOL:
        raise InvalidParams(f"{name} trace is {tr}, expected 1")
    lo = float(spectrum(m).eigenvalues[-1])
    if lo < -PSD_TOL:
        raise InvalidParams(f"{name} has negative eigenvalue {lo:.3e}")
    return m


def partial_transpose(m) -> np.ndarray:
    """Transpose the second-qubit indices: (i1 i2, j1 j2) -> (i1 j2, j1 i2)."""
    m = np.asarray(m, dtype=complex)
    return m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def is_x_structured(m, tol: float = X_STRUCTURE_TOL) -> bool:
    """True when all entries outside the six X positions are below ``tol``."""
    m = np.asarray(m, dtype=complex)
    for i in range(4):
        for j in range(4):
            if (i, j) not in _X_POSITIONS and abs(m[i, j]) > tol:
                return False
    return True


@dataclass(frozen=True)
class BlochBlock2:
    """2x2 Hermitian block ``A cosh(r) I + A sinh(r) n.sigma``.

    ``amplitude`` is A > 0, ``rapidity`` is r, and ``axis`` is the unit
    vector n.  The represented matrix has eigenvalues ``A exp(+-r)``.
    """

    amplitude: float
    rapidity: float
    axis: tuple[float, float, float]

    def __post_init__(self):
        n = np.asarray(self.axis, dtype=float)
        if n.shape != (3,):
            raise InvalidParams("axis must be a 3-vector")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise InvalidParams(f"axis norm {np.linalg.norm(n)} is not 1")

    def matrix(self) -> np.ndarray:
        n = np.asarray(self.axis, dtype=float)
        ns = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
        a, r = self.amplitude, self.rapidity
        return a * math.cosh(r) * np.eye(2, dtype=complex) + a * math.sinh(r) * ns


def bloch_log(block: BlochBlock2) -> np.ndarray:
    """Logarithm of a Bloch block: ``log(A) I + r n.sigma``.

    Exact for matrices of the Bloch-block form; raises NonPositive when
    the amplitude is not strictly positive.
    """
    if block.amplitude <= 0.0:
        raise NonPositive(f"amplitude must be > 0, got {block.amplitude}")
    n = np.asarray(block.axis, dtype=float)
    ns = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return math.log(block.amplitude) * np.eye(2, dtype=complex) + block.rapidity * ns


@dataclass(frozen=True)
class Spectrum4:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray   # (4,) real, descending
    eigenvectors: np.ndarray  # (4, 4) complex, column k pairs with value k

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_column_phases(vecs: np.ndarray) -> np.ndarray:
    """Deterministic phase convention: largest component real positive."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, k])))
        piv = out[idx, k]
        if abs(piv) > 0:
            out[:, k] *= piv.conjugate() / abs(piv)
    return out


def jacobi_eigh(m, tol: float = 1e-14, max_sweeps: int = 60):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Deterministic sweep order; converges when the off-diagonal Frobenius
    mass drops below ``tol``.  Returns (eigenvalues descending,
    eigenvector columns).
    """
    a = np.asarray(m, dtype=complex).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    strict = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = math.sqrt(float((np.abs(a[strict]) ** 2).sum()))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < tol / (n * n):
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * abs(apq))
                if tau == 0.0:
                    t = 1.0
                else:
                    t = -math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                phase = apq / abs(apq)
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[p, q] = -s * phase
                rot[q, p] = s * phase.conjugate()
                rot[q, q] = c
                a = rot.conj().T @ a @ rot
                v = v @ rot
    else:
        raise ConvergenceFailure("Jacobi eigensolver did not converge")
    vals = np.diag(a).real.copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], _fix_column_phases(v[:, order])


def spectrum(m) -> Spectrum4:
    """Spectrum of a 4x4 Hermitian matrix via the Jacobi solver."""
    vals, vecs = jacobi_eigh(m)
    return Spectrum4(eigenvalues=vals, eigenvectors=vecs)


def _block_eigpair(a: float, b: float, c: complex):
    """Exact eigenpairs of [[a, c], [conj(c), b]] with cancellation-safe shifts."""
    d = a - b
    disc = math.hypot(d, 2.0 * abs(c))
    t = a + b
    mu_hi = 0.5 * (t + disc)
    mu_lo = 0.5 * (t - disc)
    if abs(c) == 0.0:
        if a >= b:
            return (mu_hi, np.array([1.0, 0.0], dtype=complex),
                    mu_lo, np.array([0.0, 1.0], dtype=complex))
        return (mu_hi, np.array([0.0, 1.0], dtype=complex),
                mu_lo, np.array([1.0, 0.0], dtype=complex))
    if d >= 0.0:
        hi_shift = 2.0 * abs(c) ** 2 / (disc + d)    # mu_hi - a, avoids cancellation
        lo_shift = -0.5 * (d + disc)                 # mu_lo - a
    else:
        hi_shift = 0.5 * (disc - d)
        lo_shift = -2.0 * abs(c) ** 2 / (disc - d)
    v_hi = np.array([c, hi_shift], dtype=complex)
    v_lo = np.array([c, lo_shift], dtype=complex)
    v_hi /= np.linalg.norm(v_hi)
    v_lo /= np.linalg.norm(v_lo)
    return mu_hi, v_hi, mu_lo, v_lo


def eig_x_structured(m) -> Spectrum4:
    """Exact eigendecomposition of an X-structured Hermitian 4x4 matrix.

    The matrix is a direct sum of the {|00>, |11>} corner block and the
    two 1x1 middle entries, so the eigenpairs are closed-form.  Raises
    StructureViolation when off-structure entries exceed 1e-12.
    """
    m = np.asarray(m, dtype=complex)
    if not is_x_structured(m):
        raise StructureViolation("matrix has entries outside the X positions")
    mu_hi, b_hi, mu_lo, b_lo = _block_eigpair(m[0, 0].real, m[3, 3].real, m[0, 3])
    vecs = np.zeros((4, 4), dtype=complex)
    vals = np.array([mu_hi, m[1, 1].real, m[2, 2].real, mu_lo])
    vecs[[0, 3], 0] = b_hi
    vecs[1, 1] = 1.0
    vecs[2, 2] = 1.0
    vecs[[0, 3], 3] = b_lo
    order = np.argsort(-vals, kind="stable")
    return Spectrum4(eigenvalues=vals[order],
                     eigenvectors=_fix_column_phases(vecs[:, order]))


def matrix_log_on_support(spec: Spectrum4, floor: float = SUPPORT_FLOOR):
    """Matrix logarithm restricted to the support of a PSD spectrum.

    Returns ``(log_matrix, support_mask)`` where the mask marks the
    eigenvalues at or above ``floor``; eigenvalues in (-1e-10, floor)
    contribute nothing.
    """
    if floor <= 0.0:
        raise InvalidParams("floor must be positive")
    vals = spec.eigenvalues
    if vals.min() < -PSD_TOL:
        raise InvalidParams(f"spectrum has negative eigenvalue {vals.min():.3e}")
    mask = vals >= floor
    out = np.zeros((4, 4), dtype=complex)
    for k in np.nonzero(mask)[0]:
        vk = spec.eigenvectors[:, k]
        out += math.log(vals[k]) * np.outer(vk, vk.conj())
    return out, mask


def _tr_rho_log(rho: np.ndarray, spec: Spectrum4, floor: float) -> float:
    """Tr rho log(M) for M given by its spectrum, over M's support."""
    total = 0.0
    for k in range(4):
        lam = spec.eigenvalues[k]
        if lam >= floor:
            vk = spec.eigenvectors[:, k]
            total += math.log(lam) * float(np.real(vk.conj() @ rho @ vk))
    return total


def relative_entropy(rho, sigma, floor: float = SUPPORT_FLOOR) -> float:
    """Quantum relative entropy Tr rho (log rho - log sigma), in nats.

    Returns ``math.inf`` when the support of rho is not contained in the
    support of sigma (this is the defined value, not an error).
    """
    rho = validate_density_matrix(rho, "rho")
    sigma = validate_density_matrix(sigma, "sigma")
    spec_s = spectrum(sigma)
    kernel_mass = 0.0
    for k in range(4):
        if spec_s.eigenvalues[k] < floor:
            vk = spec_s.eigenvectors[:, k]
            kernel_mass += float(np.real(vk.conj() @ rho @ vk))
    if kernel_mass > 1e-12:
        return math.inf
    spec_r = spectrum(rho)
    tr_rho_log_rho = sum(float(lam) * math.log(lam)
                         for lam in spec_r.eigenvalues if lam >= floor)
    return tr_rho_log_rho - _tr_rho_log(rho, spec_s, floor)


def von_neumann_entropy(rho) -> float:
    """Entropy -Tr rho log rho in nats, with 0 log 0 = 0.  In [0, log 4]."""
    rho = validate_density_matrix(rho, "rho")
    vals = spectrum(rho).eigenvalues
    s = -sum(float(lam) * math.log(lam) for lam in vals if lam > SUPPORT_FLOOR)
    return max(s, 0.0)
