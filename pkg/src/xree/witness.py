"""Optimality certification of closest-separable candidates.

The directional derivative of sigma -> S(rho || sigma) at a candidate
sigma* defines a witness operator A whose matrix elements in sigma*'s
eigenbasis are divided differences of the logarithm,

    A[m, n] = (log chi_n - log chi_m) / (chi_n - chi_m) <chi_m|rho|chi_n>,

with the limit 1/chi_n at coincident eigenvalues.  If the expectation
of A never exceeds 1 on product states, no separable state improves on
sigma*; convexity of the relative entropy then promotes the local
statement to global optimality.  For candidates with vanishing chi
entries the witness is undefined and certification falls back to the
shared-eigenbasis convexity bound checked against an independent grid
minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_form import ClosestSeparable, HALF_PI
from .errors import StructureViolation, SupportDeficient
from .linalg import is_x_structured, partial_transpose, spectrum
from .xstate import from_matrix

COINCIDENT_TOL = 1e-9      # eigenvalue gap below which the limit rule applies
SUPPORT_TOL = 1e-12
TRACE_CONDITION_TOL = 1e-9
OVERLAP_TOL = 1e-7
IDENTITY_TOL = 1e-9
DIAGONAL_VALUE_TOL = 1e-7  # agreement with the independent grid minimizer
GRID_POINTS = 64
ASCENT_STEPS = 50


@dataclass(frozen=True, eq=False)
class WitnessA:
    """Witness operator with its X-pattern scalars.

    ``matrix`` is the operator in the product basis; ``elements`` holds
    the same operator in sigma*'s eigenbasis (rows/columns ordered as
    chi0, chi1, chi2, chi3).  For border solutions the product-basis
    matrix has ones at the block diagonal, B and C in the middle, and D
    on the corners, with B = lambda1/chi1, C = lambda2/chi2 and
    D = z sqrt(chi1 chi2) for the border multiplier z.
    """

    B: float
    C: float
    D: float
    z: float
    matrix: np.ndarray
    elements: np.ndarray
    chi: np.ndarray


@dataclass(frozen=True)
class ProductMax:
    """Maximum of <alpha beta|A|alpha beta> over product states."""

    closed_form: float | None
    numeric: float
    argmax: tuple[float, float, float, float]  # theta1, phi1, theta2, phi2
    closed_form_applicable: bool


@dataclass(frozen=True)
class Certificate:
    """Outcome of the optimality check for one candidate."""

    passed: bool
    method: str                      # "witness" or "diagonal_convexity"
    tr_a_sigma: float | None
    max_overlap_numeric: float | None
    max_overlap_closed: float | None
    identity_gap: float | None       # D^2 - (B-1)(C-1), when applicable
    detail: str = ""


def _eigenbasis_of_candidate(sep: ClosestSeparable):
    """Eigenvectors of sigma* ordered to pair with (chi0, chi1, chi2, chi3)."""
    sigma = sep.sigma_star
    block = np.array([[sigma[0, 0], sigma[0, 3]], [sigma[3, 0], sigma[3, 3]]])
    from .linalg import _block_eigpair  # stable 2x2 solver

    mu_hi, v_hi, mu_lo, v_lo = _block_eigpair(block[0, 0].real, block[1, 1].real,
                                              block[0, 1])
    vecs = np.zeros((4, 4), dtype=complex)
    vecs[[0, 3], 0] = v_hi
    vecs[1, 1] = 1.0
    vecs[2, 2] = 1.0
    vecs[[0, 3], 3] = v_lo
    chi = np.array([mu_hi, sigma[1, 1].real, sigma[2, 2].real, mu_lo])
    return chi, vecs


def build_witness(rho, sep: ClosestSeparable) -> WitnessA:
    """Directional-derivative operator of the relative entropy at sigma*.

    Requires full support of sigma* (all chi >= 1e-12) and the X
    structure on both operators.  The divided-difference coefficient is
    replaced by its limit 1/chi_n when |chi_n - chi_m| < 1e-9.
    """
    rho = np.asarray(rho, dtype=complex)
    if not is_x_structured(rho) or not is_x_structured(sep.sigma_star):
        raise StructureViolation("witness construction expects X-structured operators")
    chi, vecs = _eigenbasis_of_candidate(sep)
    if chi.min() < SUPPORT_TOL:
        raise SupportDeficient(
            f"sigma* eigenvalue {chi.min():.3e} below support tolerance")
    rho_chi = vecs.conj().T @ rho @ vecs
    elements = np.empty((4, 4), dtype=complex)
    for m in range(4):
        for n in range(4):
            gap = chi[n] - chi[m]
            if abs(gap) < COINCIDENT_TOL:
                coef = 1.0 / chi[n]
            else:
                coef = (math.log(chi[n]) - math.log(chi[m])) / gap
            elements[m, n] = coef * rho_chi[m, n]
    matrix = vecs @ elements @ vecs.conj().T
    b = float(elements[1, 1].real)
    c = float(elements[2, 2].real)
    d = float(matrix[0, 3].real)
    if abs(chi[1] - chi[2]) > COINCIDENT_TOL:
        z = (b - c) / (chi[1] - chi[2])
    elif chi[2] > 0:
        z = (1.0 - b) / chi[2]
    else:
        z = 0.0
    return WitnessA(B=b, C=c, D=d, z=float(z), matrix=matrix,
                    elements=elements, chi=chi)


def _overlap_surface(a_mat, theta1, theta2, psi):
    """<alpha beta|A|alpha beta> for an X-structured Hermitian A.

    ``psi`` is the joint phase phi1 + phi2, the only phase combination
    the form depends on.  Arguments may be broadcastable arrays.
    """
    c1, s1 = np.cos(theta1 / 2.0), np.sin(theta1 / 2.0)
    c2, s2 = np.cos(theta2 / 2.0), np.sin(theta2 / 2.0)
    corner = a_mat[0, 3]
    return (a_mat[0, 0].real * (c1 * c2) ** 2
            + a_mat[3, 3].real * (s1 * s2) ** 2
            + a_mat[1, 1].real * (c1 * s2) ** 2
            + a_mat[2, 2].real * (s1 * c2) ** 2
            + 2.0 * c1 * c2 * s1 * s2
            * (corner.real * np.cos(psi) - corner.imag * np.sin(psi)))


def _has_border_pattern(w: WitnessA, tol: float = 1e-6) -> bool:
    m = w.matrix
    return (abs(m[0, 0].real - 1.0) < tol and abs(m[3, 3].real - 1.0) < tol
            and abs(m[0, 3].imag) < tol)


def max_product_overlap(w: WitnessA) -> ProductMax:
    """Maximum witness expectation over product pure states.

    The closed form

        max = 1 + (D^2 - (B-1)(C-1)) / (4 (2 - B - C + 2D))

    applies when the matrix has the border pattern and the denominator
    is positive; the numeric value always comes from a 64^3 grid over
    (theta1, theta2, joint phase) refined by damped Newton ascent, with
    ties broken at the lowest grid index.
    """
    a_mat = w.matrix
    denom = 2.0 - w.B - w.C + 2.0 * w.D
    applicable = _has_border_pattern(w) and denom > 1e-12
    closed = None
    if applicable:
        closed = 1.0 + (w.D**2 - (w.B - 1.0) * (w.C - 1.0)) / (4.0 * denom)

    grid = np.linspace(0.0, math.pi, GRID_POINTS)
    phases = np.linspace(0.0, 2.0 * math.pi, GRID_POINTS, endpoint=False)
    vals = _overlap_surface(a_mat, grid[:, None, None], grid[None, :, None],
                            phases[None, None, :])
    flat_idx = int(np.argmax(vals))
    i, j, k = np.unravel_index(flat_idx, vals.shape)
    x = np.array([grid[i], grid[j], phases[k]])
    fx = float(vals[i, j, k])

    h = 1e-5
    for _ in range(ASCENT_STEPS):
        g = np.zeros(3)
        hess = np.zeros((3, 3))
        for a in range(3):
            e_a = np.zeros(3)
            e_a[a] = h
            fp = _overlap_surface(a_mat, *(x + e_a))
            fm = _overlap_surface(a_mat, *(x - e_a))
            g[a] = (fp - fm) / (2 * h)
            hess[a, a] = (fp - 2 * fx + fm) / h**2
            for b in range(a + 1, 3):
                e_b = np.zeros(3)
                e_b[b] = h
                fpp = _overlap_surface(a_mat, *(x + e_a + e_b))
                fpm = _overlap_surface(a_mat, *(x + e_a - e_b))
                fmp = _overlap_surface(a_mat, *(x - e_a + e_b))
                fmm = _overlap_surface(a_mat, *(x - e_a - e_b))
                hess[a, b] = hess[b, a] = (fpp - fpm - fmp + fmm) / (4 * h * h)
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            step = g  # fall back to plain ascent
        if not np.all(np.isfinite(step)):
            step = g
        scale = 1.0
        improved = False
        while scale > 1e-10:
            trial = x + scale * step
            ft = float(_overlap_surface(a_mat, *trial))
            if ft > fx:
                x, fx = trial, ft
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    argmax = (float(x[0]), float(x[2] % (2.0 * math.pi)), float(x[1]), 0.0)
    return ProductMax(closed_form=closed, numeric=fx, argmax=argmax,
                      closed_form_applicable=applicable)


def _certify_diagonal(rho, sep: ClosestSeparable) -> Certificate:
    """Shared-eigenbasis convexity certification for boundary candidates.

    Valid when rho and sigma* commute: the convexity bound
    -log <psi|sigma|psi> <= -<psi|log sigma|psi>, applied in the common
    eigenbasis, reduces the minimization over all separable states to
    pinched spectra, where the partial-transpose inequality is exactly
    the border constraint.  The candidate passes when sigma* is itself
    separable and its value matches the independent grid minimizer of
    that reduced problem.
    """
    from .oracle import structured_min  # independent code path, no Newton shared

    params = from_matrix(rho)
    issues = []
    commutator = float(np.abs(rho @ sep.sigma_star - sep.sigma_star @ rho).max())
    if commutator > 1e-9:
        issues.append(f"[rho, sigma*] norm {commutator:.3e}: no shared eigenbasis")
    min_pt = float(spectrum(partial_transpose(sep.sigma_star)).eigenvalues[-1])
    if min_pt < -1e-10:
        issues.append(f"sigma* partial transpose has eigenvalue {min_pt:.3e}")
    reference = structured_min(params)
    gap = abs(sep.e_r - reference)
    if gap > DIAGONAL_VALUE_TOL:
        issues.append(f"value differs from grid minimizer by {gap:.3e}")
    return Certificate(
        passed=not issues,
        method="diagonal_convexity",
        tr_a_sigma=None,
        max_overlap_numeric=None,
        max_overlap_closed=None,
        identity_gap=None,
        detail="; ".join(issues) if issues else f"grid gap {gap:.2e}",
    )


def certify(rho, sep: ClosestSeparable) -> Certificate:
    """Run the optimality certificate for a candidate closest separable state.

    Checks, for full-support candidates: (i) Tr(A sigma*) = 1, (ii) the
    numeric product-state maximum of A does not exceed 1, and (iii) for
    phi = theta = pi/2 candidates the identity D^2 = (B-1)(C-1).
    Candidates with vanishing chi entries use the diagonal convexity
    route instead.
    """
    rho = np.asarray(rho, dtype=complex)
    if sep.chi().min() < SUPPORT_TOL:
        return _certify_diagonal(rho, sep)
    w = build_witness(rho, sep)
    tr_condition = float(np.real(np.trace(w.matrix @ sep.sigma_star)))
    overlap = max_product_overlap(w)
    identity_gap = w.D**2 - (w.B - 1.0) * (w.C - 1.0)

    params = from_matrix(rho)
    at_half_pi = (abs(params.phi - HALF_PI) <= 1e-9
                  and abs(sep.theta - HALF_PI) <= 1e-9)
    issues = []
    if abs(tr_condition - 1.0) > TRACE_CONDITION_TOL:
        issues.append(f"Tr(A sigma*) = {tr_condition!r} != 1")
    if overlap.numeric > 1.0 + OVERLAP_TOL:
        issues.append(f"product-state maximum {overlap.numeric!r} exceeds 1")
    if at_half_pi and abs(identity_gap) > IDENTITY_TOL:
        issues.append(f"D^2 - (B-1)(C-1) = {identity_gap!r} != 0")
    return Certificate(
        passed=not issues,
        method="witness",
        tr_a_sigma=tr_condition,
        max_overlap_numeric=float(overlap.numeric),
        max_overlap_closed=overlap.closed_form,
        identity_gap=float(identity_gap),
        detail="; ".join(issues),
    )
