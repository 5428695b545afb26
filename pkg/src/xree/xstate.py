"""Parametrized two-qubit X-state family and its separability test.

The family is the set of density matrices whose only nonzero entries are
the diagonal and the |00><11| corner pair.  It is parametrized by the
four eigenvalues ``lambda0, lambda3`` (corner block) and ``lambda1,
lambda2`` (middle), a mixing angle ``phi`` and a corner phase ``eta``:

    diag( (l+ + l- cos phi)/2, lambda1, lambda2, (l+ - l- cos phi)/2 )

with corner entry ``(l- sin phi / 2) exp(-i eta)`` at position (0, 3),
where ``l+ = lambda0 + lambda3`` and ``l- = lambda0 - lambda3``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, StructureViolation
from .linalg import is_x_structured, validate_density_matrix

PARAM_SUM_TOL = 1e-12
ENTANGLEMENT_TOL = 1e-12  # concurrence below this counts as separable


@dataclass(frozen=True)
class XStateParams:
    """Six real parameters of the X-state family.

    ``lambda0 >= lambda3`` and ``eta = 0`` with ``sin(phi) >= 0`` is the
    canonical representative (see :func:`canonicalize`); constructors do
    not force it.
    """

    lambda0: float
    lambda3: float
    lambda1: float
    lambda2: float
    phi: float
    eta: float = 0.0

    def __post_init__(self):
        lams = (self.lambda0, self.lambda3, self.lambda1, self.lambda2)
        for name, val in zip(("lambda0", "lambda3", "lambda1", "lambda2"), lams):
            if not math.isfinite(val) or val < -PARAM_SUM_TOL:
                raise InvalidParams(f"{name} = {val} must be nonnegative")
        total = sum(lams)
        if abs(total - 1.0) > PARAM_SUM_TOL:
            raise InvalidParams(f"eigenvalues sum to {total}, expected 1")
        if not (math.isfinite(self.phi) and math.isfinite(self.eta)):
            raise InvalidParams("phi and eta must be finite")

    @property
    def lambda_plus(self) -> float:
        return self.lambda0 + self.lambda3

    @property
    def lambda_minus(self) -> float:
        return self.lambda0 - self.lambda3

    def eigenvalues(self) -> np.ndarray:
        """Spectrum of the state in the order (lambda0, lambda1, lambda2, lambda3)."""
        return np.array([self.lambda0, self.lambda1, self.lambda2, self.lambda3])

    def is_canonical(self, tol: float = 1e-14) -> bool:
        return (abs(self.eta) <= tol and math.sin(self.phi) >= -tol
                and 0.0 <= self.phi <= math.pi + tol
                and self.lambda0 >= self.lambda3)


@dataclass(frozen=True)
class FilterNormalForm:
    """Parameters (a, b, c, d) of the local-filtering normal form.

    The represented matrix is
        1/2 * [[a+c, 0, 0, d], [0, 0, 0, 0], [0, 0, b-c, 0], [d, 0, 0, a-b]].
    Validity is exactly density-matrix validity of that matrix (which
    forces a = 1).
    """

    a: float
    b: float
    c: float
    d: float

    def matrix(self) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = 0.5 * (self.a + self.c)
        m[2, 2] = 0.5 * (self.b - self.c)
        m[3, 3] = 0.5 * (self.a - self.b)
        m[0, 3] = 0.5 * self.d
        m[3, 0] = 0.5 * self.d
        return m


def to_density(p: XStateParams) -> np.ndarray:
    """Assemble the 4x4 density matrix of ``p`` in the product basis."""
    m = np.zeros((4, 4), dtype=complex)
    lp, lm = p.lambda_plus, p.lambda_minus
    m[0, 0] = 0.5 * (lp + lm * math.cos(p.phi))
    m[1, 1] = p.lambda1
    m[2, 2] = p.lambda2
    m[3, 3] = 0.5 * (lp - lm * math.cos(p.phi))
    corner = 0.5 * lm * math.sin(p.phi)
    m[0, 3] = corner * cmath.exp(-1j * p.eta)
    m[3, 0] = corner * cmath.exp(1j * p.eta)
    return validate_density_matrix(m, "x-state matrix")


def from_matrix(m) -> XStateParams:
    """Extract X-state parameters from a density matrix.

    Convention: ``lambda0 >= lambda3``, ``phi`` in [0, pi] (so the corner
    modulus is l- sin(phi) / 2 >= 0) and ``eta = -arg(m[0, 3])`` in
    [0, 2 pi).  A consistent representation always exists because the
    corner modulus never exceeds the block radius l-.
    """
    m = np.asarray(m, dtype=complex)
    if not is_x_structured(m):
        raise StructureViolation("matrix has entries outside the X positions")
    m = validate_density_matrix(m, "x-state matrix")
    diff = float(m[0, 0].real - m[3, 3].real)
    corner = complex(m[0, 3])
    lm = math.hypot(diff, 2.0 * abs(corner))
    lp = float(m[0, 0].real + m[3, 3].real)
    phi = math.atan2(2.0 * abs(corner), diff)
    eta = (-cmath.phase(corner)) % (2.0 * math.pi) if abs(corner) > 0 else 0.0
    return XStateParams(
        lambda0=0.5 * (lp + lm),
        lambda3=max(0.5 * (lp - lm), 0.0),
        lambda1=float(m[1, 1].real),
        lambda2=float(m[2, 2].real),
        phi=phi,
        eta=eta,
    )


def from_filter_normal_form(f: FilterNormalForm) -> XStateParams:
    """Map the local-filtering normal form into the X-state family.

    The image always has ``lambda1 = 0`` before canonical relabeling.
    Raises InvalidParams when (a, b, c, d) do not give a density matrix.
    """
    return from_matrix(f.matrix())


@dataclass(frozen=True)
class CanonicalTransform:
    """Record of the local unitaries applied by :func:`canonicalize`.

    ``phase`` is the corner phase removed by diag(1, exp(i*phase)) on the
    second qubit; ``relabeled`` is True when the sigma_x (x) sigma_x
    relabeling (which swaps lambda1 and lambda2) was applied.
    """

    phase: float = 0.0
    relabeled: bool = False

    @property
    def is_identity(self) -> bool:
        return self.phase == 0.0 and not self.relabeled


def canonicalize(p: XStateParams) -> tuple[XStateParams, CanonicalTransform]:
    """Reduce ``p`` under local unitaries to eta = 0, sin(phi) >= 0, l0 >= l3.

    Both operations (a one-qubit phase rotation and the sigma_x (x)
    sigma_x relabeling) leave the relative entropy of entanglement
    unchanged.  Already-canonical input is returned unchanged.
    """
    if p.is_canonical() and p.eta == 0.0 and 0.0 <= p.phi <= math.pi:
        return p, CanonicalTransform()
    m = to_density(p)
    relabeled = False
    if p.lambda0 < p.lambda3:
        # conjugate by sigma_x (x) sigma_x: reverses the basis order
        m = m[::-1, ::-1].copy()
        relabeled = True
    q = from_matrix(m)
    phase = q.eta
    q = XStateParams(q.lambda0, q.lambda3, q.lambda1, q.lambda2, q.phi, 0.0)
    return q, CanonicalTransform(phase=phase, relabeled=relabeled)


def concurrence(p: XStateParams) -> float:
    """Wootters concurrence of the state: max(0, |l- sin phi| - 2 sqrt(l1 l2))."""
    lam12 = max(p.lambda1, 0.0) * max(p.lambda2, 0.0)
    return max(0.0, abs(p.lambda_minus * math.sin(p.phi)) - 2.0 * math.sqrt(lam12))


def is_entangled(p: XStateParams) -> bool:
    """True when the concurrence exceeds the entanglement threshold.

    Equivalent (for this family) to the partial transpose having a
    negative eigenvalue.
    """
    return concurrence(p) > ENTANGLEMENT_TOL
