"""Closest separable state and relative entropy of entanglement at phi = pi/2.

For a canonical entangled X state with ``phi = pi/2`` the closest
separable state shares the X structure, sits on the separability border,
and is diagonal in the same eigenbasis as the input.  The minimizer is
available in closed form when ``lambda1 != lambda2`` and both middle
eigenvalues are positive; the degenerate corners are handled by a damped
Newton iteration on the constrained first-order (KKT) system, or by the
exact symmetric reduction.

The top-level :func:`relative_entropy_of_entanglement` dispatches by
``phi`` (general angles go to the numeric stationarity solver) and
refuses to return an uncertified value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import (
    CertificationFailure,
    ConvergenceFailure,
    DegenerateParams,
    InvalidParams,
    NotEntangled,
)
from .linalg import validate_density_matrix
from .xstate import XStateParams, canonicalize, is_entangled, to_density

HALF_PI = 0.5 * math.pi
PHI_TOL = 1e-12        # how close phi must be to pi/2 for the closed form
DEGENERATE_TOL = 1e-9  # |lambda1 - lambda2| or min(lambda1, lambda2) below this
                       # routes to the diagonal solver (the closed form loses
                       # accuracy to cancellation well before it divides by zero)
KKT_TOL = 1e-12
KKT_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class ClosestSeparable:
    """A separable X state achieving (or bounding) the relative entropy.

    ``chi0..chi3`` are the eigenvalues paired with the input's
    ``lambda0..lambda3``; ``theta`` is the mixing angle of the corner
    block; the hyperbolic parameters satisfy ``chi+- = 2 A1 (cosh, sinh)
    r1``, ``chi1, chi2 = A2 exp(+-r2)`` and the border condition
    ``A2 = A1 sinh(r1) sin(theta)``.  Boundary solutions with vanishing
    chi entries carry ``r1`` or ``r2`` as 0/inf limits.
    """

    theta: float
    A1: float
    r1: float
    r2: float
    A2: float
    chi0: float
    chi1: float
    chi2: float
    chi3: float
    sigma_star: np.ndarray
    e_r: float
    method: str
    certificate: Any = None
    info: dict = field(default_factory=dict)

    def chi(self) -> np.ndarray:
        return np.array([self.chi0, self.chi1, self.chi2, self.chi3])

    @property
    def full_support(self) -> bool:
        return bool(self.chi().min() >= 1e-12)


def sigma_from_chi(chi0, chi1, chi2, chi3, theta) -> np.ndarray:
    """Assemble the separable candidate's matrix (corner phase zero)."""
    m = np.zeros((4, 4), dtype=complex)
    cp, cm = chi0 + chi3, chi0 - chi3
    m[0, 0] = 0.5 * (cp + cm * math.cos(theta))
    m[1, 1] = chi1
    m[2, 2] = chi2
    m[3, 3] = 0.5 * (cp - cm * math.cos(theta))
    corner = 0.5 * cm * math.sin(theta)
    m[0, 3] = corner
    m[3, 0] = corner
    return m


def _relative_entropy_diagonal(lam, chi) -> float:
    """sum lambda_i log(lambda_i / chi_i) with 0 log 0 = 0."""
    total = 0.0
    for a, c in zip(lam, chi):
        if a > 1e-15:
            if c <= 0.0:
                return math.inf
            total += a * math.log(a / c)
    return total


def _hyperbolic_from_chi(chi0, chi1, chi2, chi3):
    """Recover (A1, r1, r2, A2) from the chi spectrum, tolerating zeros."""
    a1 = math.sqrt(max(chi0 * chi3, 0.0))
    if chi3 > 0.0:
        r1 = 0.5 * math.log(chi0 / chi3)
    else:
        r1 = math.inf if chi0 > 0.0 else 0.0
    a2 = math.sqrt(max(chi1 * chi2, 0.0))
    if chi1 > 0.0 and chi2 > 0.0:
        r2 = 0.5 * math.log(chi1 / chi2)
    else:
        r2 = 0.0
    return a1, r1, r2, a2


def _pack_solution(p: XStateParams, chi, theta, method, info=None) -> ClosestSeparable:
    chi0, chi1, chi2, chi3 = (float(c) for c in chi)
    a1, r1, r2, a2 = _hyperbolic_from_chi(chi0, chi1, chi2, chi3)
    sigma = sigma_from_chi(chi0, chi1, chi2, chi3, theta)
    e_r = _relative_entropy_diagonal(p.eigenvalues(), (chi0, chi1, chi2, chi3))
    return ClosestSeparable(
        theta=theta, A1=a1, r1=r1, r2=r2, A2=a2,
        chi0=chi0, chi1=chi1, chi2=chi2, chi3=chi3,
        sigma_star=sigma, e_r=e_r, method=method, info=info or {},
    )


def _require_canonical_half_pi(p: XStateParams):
    if abs(p.eta) > PHI_TOL:
        raise InvalidParams("expected canonical parameters (eta = 0)")
    if abs(p.phi - HALF_PI) > PHI_TOL:
        raise InvalidParams(f"phi = {p.phi} is not pi/2; use the general solver")


def solve_phi_half(p: XStateParams) -> ClosestSeparable:
    """Closed-form closest separable state for canonical phi = pi/2 input.

    The mixing angle of the minimizer is theta = pi/2 and the remaining
    parameters are

        r2 = log(sqrt(d^2 l-^2 + 4 l1 l2 (1 - d^2)) - d l-)
             - log(2 l2 (1 - d)),
        r1 = (1/2) log(1 - d tanh(r2/2)) - (1/2) log(1 - d coth(r2/2)),
        A1 = d / (2 sinh r1 sinh r2),

    with d = lambda1 - lambda2 and l- = lambda0 - lambda3.  (The first
    expression is quoted in the source derivation with the factor
    (1 - d^2) squared; that variant fails the stationarity system and
    the mirror symmetry d -> -d, so the unsquared factor is used.  See
    the test suite, which checks the residuals of the full first-order
    system at every solution.)

    Raises NotEntangled for separable input and DegenerateParams when
    ``lambda1 = lambda2`` or ``lambda1 lambda2 = 0`` (within 1e-9); the
    caller should fall back to :func:`solve_diagonal_min` there.
    """
    _require_canonical_half_pi(p)
    if not is_entangled(p):
        raise NotEntangled("state is separable; its closest separable state is itself")
    l1, l2, lm = p.lambda1, p.lambda2, p.lambda_minus
    delta = l1 - l2
    if abs(delta) <= DEGENERATE_TOL:
        raise DegenerateParams("lambda1 = lambda2: use solve_diagonal_min")
    if min(l1, l2) <= DEGENERATE_TOL:
        raise DegenerateParams("lambda1 lambda2 = 0: use solve_diagonal_min")

    radical = math.sqrt(delta**2 * lm**2 + 4.0 * l1 * l2 * (1.0 - delta**2))
    if delta > 0.0:
        # avoid cancellation in radical - delta*lm
        numerator = 4.0 * l1 * l2 * (1.0 - delta**2) / (radical + delta * lm)
    else:
        numerator = radical - delta * lm
    r2 = math.log(numerator) - math.log(2.0 * l2 * (1.0 - delta))
    th = math.tanh(0.5 * r2)
    arg_hi = 1.0 - delta * th
    arg_lo = 1.0 - delta / th
    if arg_hi <= 0.0 or arg_lo <= 0.0:
        raise ConvergenceFailure("closed form left its domain; input too degenerate")
    r1 = 0.5 * math.log(arg_hi) - 0.5 * math.log(arg_lo)
    a1 = delta / (2.0 * math.sinh(r1) * math.sinh(r2))
    a2 = a1 * math.sinh(r1)
    chi = (a1 * math.exp(r1), a2 * math.exp(r2), a2 * math.exp(-r2),
           a1 * math.exp(-r1))
    return _pack_solution(p, chi, HALF_PI, "closed_form")


def _solve_symmetric(p: XStateParams) -> ClosestSeparable:
    """Exact minimizer for lambda1 = lambda2 (one-dimensional reduction).

    Symmetry forces chi1 = chi2, which together with the border and
    trace constraints pins chi0 = 1/2 and leaves a single stationarity
    condition with solution chi3 = lambda3 / (4 lambda1 + 2 lambda3).
    The Bell limit lambda1 = lambda3 = 0 gives chi3 = 1/2.
    """
    l1, l3 = p.lambda1, p.lambda3
    denom = 4.0 * l1 + 2.0 * l3
    chi3 = l3 / denom if denom > 1e-15 else 0.5
    chi1 = 0.5 * (0.5 - chi3)
    return _pack_solution(p, (0.5, chi1, chi1, chi3), HALF_PI, "diagonal_newton",
                          info={"branch": "symmetric"})


def _solve_block_boundary(p: XStateParams) -> ClosestSeparable:
    """Minimizer on the chi3 = 0 face (needed only when lambda3 = 0).

    On that face the first-order conditions still force
    chi1 - chi2 = lambda1 - lambda2, so feasibility reduces to one
    scalar equation 2 sqrt(t (t + d)) + 2 t + d = 1 for t = min(chi1,
    chi2), solved by bisection.
    """
    delta = p.lambda1 - p.lambda2
    d = abs(delta)

    def excess(t):
        return 2.0 * math.sqrt(t * (t + d)) + 2.0 * t + d - 1.0

    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    t = 0.5 * (lo + hi)
    small, big = t, t + d
    chi1, chi2 = (big, small) if delta >= 0.0 else (small, big)
    chi0 = 1.0 - chi1 - chi2
    return _pack_solution(p, (chi0, chi1, chi2, 0.0), HALF_PI, "diagonal_newton",
                          info={"branch": "block_boundary"})


def _kkt_system(y, lam):
    """Residuals of the constrained first-order system in chi space.

    Unknowns y = (chi0, chi1, chi2, chi3, x, z) where x is the trace
    multiplier and z the border multiplier; the gradient equations are
    multiplied through by chi_i to stay polynomial.
    """
    c0, c1, c2, c3, x, z = y
    l0, l1, l2, l3 = lam
    v = c0 - c3
    return np.array([
        x * c0 + 0.5 * z * v * c0 - l0,
        x * c1 - z * c1 * c2 - l1,
        x * c2 - z * c1 * c2 - l2,
        x * c3 - 0.5 * z * v * c3 - l3,
        c0 + c1 + c2 + c3 - 1.0,
        c1 * c2 - 0.25 * v * v,
    ])


def _kkt_jacobian(y):
    c0, c1, c2, c3, x, z = y
    v = c0 - c3
    jac = np.zeros((6, 6))
    jac[0] = [x + 0.5 * z * (2 * c0 - c3), 0, 0, -0.5 * z * c0, c0, 0.5 * v * c0]
    jac[1] = [0, x - z * c2, -z * c1, 0, c1, -c1 * c2]
    jac[2] = [0, -z * c2, x - z * c1, 0, c2, -c1 * c2]
    jac[3] = [-0.5 * z * c3, 0, 0, x - 0.5 * z * (c0 - 2 * c3), c3, -0.5 * v * c3]
    jac[4] = [1, 1, 1, 1, 0, 0]
    jac[5] = [-0.5 * v, c2, c1, 0.5 * v, 0, 0]
    return jac


def _project_to_border(lam):
    """Initial iterate: lambda pushed onto the border along the middle slice.

    chi1 = lambda1 + t and chi2 = lambda2 + t (with the corner block
    rebuilt from the remaining mass) stays feasible exactly while
    sqrt(chi1) + sqrt(chi2) <= 1; the starting t is the best of a coarse
    scan of the objective over that window.
    """
    l0, l1, l2, l3 = lam

    def chi_of(t):
        c1, c2 = l1 + t, l2 + t
        v = 2.0 * math.sqrt(c1 * c2)
        s = 1.0 - c1 - c2
        return np.array([0.5 * (s + v), c1, c2, 0.5 * (s - v)])

    # largest feasible t: sqrt(l1 + t) + sqrt(l2 + t) = 1 (chi3 hits zero)
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if math.sqrt(l1 + mid) + math.sqrt(l2 + mid) <= 1.0:
            lo = mid
        else:
            hi = mid
    best_chi, best_val = None, math.inf
    for t in np.linspace(0.0, lo, 65)[1:-1]:
        chi = chi_of(float(t))
        if chi.min() <= 0.0:
            continue
        val = _relative_entropy_diagonal(lam, chi)
        if val < best_val:
            best_chi, best_val = chi, val
    return best_chi if best_chi is not None else chi_of(0.5 * lo)


def solve_diagonal_min(p: XStateParams) -> ClosestSeparable:
    """Minimize the shared-eigenbasis objective at phi = pi/2 numerically.

    Solves  min sum_i lambda_i log(lambda_i / chi_i)  subject to
    sum chi_i = 1 and the border condition chi1 chi2 = (chi0 - chi3)^2/4
    by a damped Newton iteration on the KKT system.  Covers the corners
    the closed form cannot (equal or vanishing middle eigenvalues) and
    agrees with it everywhere both apply.
    """
    _require_canonical_half_pi(p)
    if not is_entangled(p):
        raise NotEntangled("state is separable; its closest separable state is itself")
    lam = p.eigenvalues()
    if abs(p.lambda1 - p.lambda2) <= DEGENERATE_TOL:
        return _solve_symmetric(p)
    if p.lambda3 <= DEGENERATE_TOL:
        return _solve_block_boundary(p)

    y = np.empty(6)
    y[:4] = _project_to_border(lam)
    y[4] = 1.0
    y[5] = (y[2] - p.lambda2) / (y[1] * y[2])
    res = _kkt_system(y, lam)
    norm = np.abs(res).max()
    iterations = 0
    for iterations in range(1, KKT_MAX_ITER + 1):
        if norm < KKT_TOL:
            break
        try:
            step = np.linalg.solve(_kkt_jacobian(y), -res)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(f"singular KKT Jacobian: {exc}") from exc
        scale = 1.0
        while scale > 1e-12:
            trial = y + scale * step
            if np.all(trial[:4] > 0.0):
                trial_res = _kkt_system(trial, lam)
                if np.abs(trial_res).max() < norm:
                    y, res = trial, trial_res
                    norm = np.abs(res).max()
                    break
            scale *= 0.5
        else:
            break
    if norm > 1e-11:
        raise ConvergenceFailure(
            f"KKT Newton stalled at residual {norm:.3e} after {iterations} iterations")
    return _pack_solution(p, y[:4], HALF_PI, "diagonal_newton",
                          info={"iterations": iterations, "kkt_residual": float(norm),
                                "multiplier_z": float(y[5])})


def _trivial_separable(p: XStateParams, original: XStateParams) -> ClosestSeparable:
    """sigma* = rho for separable input; E_r = 0 by definition."""
    chi = p.eigenvalues()
    sigma = to_density(original)
    a1, r1, r2, a2 = _hyperbolic_from_chi(*chi)
    return ClosestSeparable(
        theta=p.phi, A1=a1, r1=r1, r2=r2, A2=a2,
        chi0=float(chi[0]), chi1=float(chi[1]), chi2=float(chi[2]),
        chi3=float(chi[3]), sigma_star=sigma, e_r=0.0, method="separable",
    )


def relative_entropy_of_entanglement(p: XStateParams):
    """Certified relative entropy of entanglement of an X state.

    Canonicalizes, dispatches to the closed form (phi = pi/2), the
    diagonal Newton solver (degenerate middle eigenvalues) or the
    general stationarity solver (other phi), then runs the witness
    certificate on the result.  Returns ``(e_r, solution)`` where the
    solution carries the certificate; raises CertificationFailure if
    the certificate does not pass (which would indicate a bug, not a
    property of the input).
    """
    canon, _transform = canonicalize(p)
    if not is_entangled(canon):
        solution = _trivial_separable(canon, p)
        from .witness import certify  # local import: witness depends on this module

        cert = certify(validate_density_matrix(solution.sigma_star), solution)
        solution = replace(solution, certificate=cert)
        return 0.0, solution

    if abs(canon.phi - HALF_PI) <= PHI_TOL:
        try:
            solution = solve_phi_half(canon)
        except DegenerateParams:
            solution = solve_diagonal_min(canon)
    else:
        from .stationarity import solve_general  # local import to avoid a cycle

        solution = solve_general(canon)

    from .witness import certify

    cert = certify(to_density(canon), solution)
    if not cert.passed:
        raise CertificationFailure(
            f"optimality certificate failed for method {solution.method}: {cert}")
    solution = replace(solution, certificate=cert)
    return solution.e_r, solution
