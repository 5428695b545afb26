"""Numeric solver for the closest-separable stationarity system at general phi.

The border ansatz is parametrized by (A1, r1, r2, theta) through

    chi+ = 2 A1 cosh r1,   chi- = 2 A1 sinh r1,
    chi1 = A2 exp(r2),     chi2 = A2 exp(-r2),   A2 = A1 sinh r1 sin theta.

Setting the gradient of  S(rho || sigma) + (Tr sigma - 1)  to zero gives
four residual equations; at phi = pi/2 they are solved by the closed
form, for other phi a damped Newton iteration with random restarts is
used.  The residual evaluator is also the independent checker used by
the test suite against closed-form solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_form import (
    ClosestSeparable,
    DEGENERATE_TOL,
    HALF_PI,
    sigma_from_chi,
    solve_diagonal_min,
    solve_phi_half,
)
from .errors import ConvergenceFailure, DegenerateParams, InvalidParams, NotEntangled
from .linalg import relative_entropy, validate_density_matrix
from .xstate import XStateParams, is_entangled, to_density

RESIDUAL_TOL = 1e-10   # contract: every returned solution beats this
TARGET_TOL = 1e-13     # Newton keeps polishing down to here when it can
MAX_ITER = 500
MAX_RESTARTS = 8
RESTART_NOISE_WIDTH = 0.3
JACOBIAN_COND_FLAG = 1e10


@dataclass(frozen=True)
class AnsatzPoint:
    """Solver unknowns: block amplitude/rapidity, middle rapidity, angle."""

    A1: float
    r1: float
    r2: float
    theta: float

    def __post_init__(self):
        if not (self.A1 > 0.0):
            raise InvalidParams(f"A1 must be positive, got {self.A1}")
        if not (0.0 < self.theta < math.pi):
            raise InvalidParams(f"theta must lie in (0, pi), got {self.theta}")

    def as_array(self) -> np.ndarray:
        return np.array([self.A1, self.r1, self.r2, self.theta])


def stationarity_residuals(x: AnsatzPoint, p: XStateParams) -> np.ndarray:
    """Left-hand sides of the four stationarity equations (zero at optimum).

    In order: the r1 equation, the r2 equation, the theta equation, and
    the unit-trace condition.
    """
    return _residuals(x.as_array(), p)


def _residuals(vec, p: XStateParams) -> np.ndarray:
    a1, r1, r2, th = vec
    lm = p.lambda_minus
    s12 = p.lambda1 + p.lambda2
    d12 = p.lambda1 - p.lambda2
    phi = p.phi
    sh1, ch1 = math.sinh(r1), math.cosh(r1)
    sh2, ch2 = math.sinh(r2), math.cosh(r2)
    st, ct = math.sin(th), math.cos(th)
    return np.array([
        -lm * math.cos(phi - th) - s12 * ch1 / sh1
        + 2.0 * a1 * sh1 + 2.0 * a1 * ch1 * ch2 * st,
        -d12 + 2.0 * a1 * sh1 * sh2 * st,
        -lm * r1 * math.sin(phi - th) - s12 * ct / st
        + 2.0 * a1 * sh1 * ch2 * ct,
        2.0 * a1 * ch1 + 2.0 * a1 * sh1 * st * ch2 - 1.0,
    ])


def _jacobian(vec, p: XStateParams) -> np.ndarray:
    a1, r1, r2, th = vec
    lm = p.lambda_minus
    s12 = p.lambda1 + p.lambda2
    phi = p.phi
    sh1, ch1 = math.sinh(r1), math.cosh(r1)
    sh2, ch2 = math.sinh(r2), math.cosh(r2)
    st, ct = math.sin(th), math.cos(th)
    jac = np.empty((4, 4))
    jac[0] = [2.0 * sh1 + 2.0 * ch1 * ch2 * st,
              s12 / sh1**2 + 2.0 * a1 * ch1 + 2.0 * a1 * sh1 * ch2 * st,
              2.0 * a1 * ch1 * sh2 * st,
              -lm * math.sin(phi - th) + 2.0 * a1 * ch1 * ch2 * ct]
    jac[1] = [2.0 * sh1 * sh2 * st,
              2.0 * a1 * ch1 * sh2 * st,
              2.0 * a1 * sh1 * ch2 * st,
              2.0 * a1 * sh1 * sh2 * ct]
    jac[2] = [2.0 * sh1 * ch2 * ct,
              -lm * math.sin(phi - th) + 2.0 * a1 * ch1 * ch2 * ct,
              2.0 * a1 * sh1 * sh2 * ct,
              lm * r1 * math.cos(phi - th) + s12 / st**2
              - 2.0 * a1 * sh1 * ch2 * st]
    jac[3] = [2.0 * ch1 + 2.0 * sh1 * st * ch2,
              2.0 * a1 * sh1 + 2.0 * a1 * ch1 * st * ch2,
              2.0 * a1 * sh1 * st * sh2,
              2.0 * a1 * sh1 * ct * ch2]
    return jac


def _seed_point(p: XStateParams) -> np.ndarray:
    """Initial iterate: theta = phi with the phi = pi/2 solution's shape."""
    half = XStateParams(p.lambda0, p.lambda3, p.lambda1, p.lambda2, HALF_PI, 0.0)
    try:
        base = solve_phi_half(half)
    except DegenerateParams:
        base = solve_diagonal_min(half)
    r2 = base.r2 if math.isfinite(base.r2) else 0.0
    r1 = base.r1 if math.isfinite(base.r1) and base.r1 > 0 else 1.0
    a1 = base.A1 if base.A1 > 0 else 0.25
    return np.array([a1, r1, r2, p.phi])


def _newton_from(vec, p: XStateParams):
    """Damped Newton with Armijo backtracking on the residual 2-norm."""
    x = vec.copy()
    res = _residuals(x, p)
    norm = float(np.linalg.norm(res))
    for iteration in range(1, MAX_ITER + 1):
        if norm < TARGET_TOL:
            return x, norm, iteration - 1, True
        try:
            step = np.linalg.solve(_jacobian(x, p), -res)
        except np.linalg.LinAlgError:
            return x, norm, iteration - 1, norm < RESIDUAL_TOL
        scale = 1.0
        accepted = False
        while scale > 1e-12:
            trial = x + scale * step
            if trial[0] > 0.0 and trial[1] > 0.0 and 0.0 < trial[3] < math.pi:
                trial_res = _residuals(trial, p)
                trial_norm = float(np.linalg.norm(trial_res))
                if trial_norm < (1.0 - 1e-4 * scale) * norm:
                    x, res, norm = trial, trial_res, trial_norm
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            # stagnated (roundoff floor); fine if already below contract
            return x, norm, iteration, norm < RESIDUAL_TOL
    return x, norm, MAX_ITER, norm < RESIDUAL_TOL


def solve_general(p: XStateParams, seed: int = 0) -> ClosestSeparable:
    """Closest-separable candidate for canonical entangled p, any phi in (0, pi).

    Newton starts from theta = phi seeded by the phi = pi/2 solution of
    the same eigenvalues; on stagnation, up to 8 restarts perturb
    (r1, r2, theta) with uniform noise of width 0.3 from a seeded RNG.
    The returned solution satisfies all four residuals below 1e-10.
    """
    if abs(p.eta) > 1e-12:
        raise InvalidParams("expected canonical parameters (eta = 0)")
    if not (0.0 < p.phi < math.pi):
        raise InvalidParams(f"phi = {p.phi} outside (0, pi)")
    if not is_entangled(p):
        raise NotEntangled("state is separable")

    base = _seed_point(p)
    rng = np.random.default_rng(seed)
    attempts = []
    x = base
    for restart in range(MAX_RESTARTS + 1):
        sol, norm, iterations, ok = _newton_from(x, p)
        attempts.append((restart, norm, iterations))
        if ok:
            return _package(sol, p, seed, restart, iterations, norm)
        noise = rng.uniform(-0.5 * RESTART_NOISE_WIDTH, 0.5 * RESTART_NOISE_WIDTH, 3)
        x = base.copy()
        x[1] = max(base[1] + noise[0], 1e-3)
        x[2] = base[2] + noise[1]
        x[3] = min(max(base[3] + noise[2], 1e-3), math.pi - 1e-3)
    raise ConvergenceFailure(
        f"stationarity Newton failed after {MAX_RESTARTS} restarts: {attempts}")


def _package(vec, p, seed, restart, iterations, norm) -> ClosestSeparable:
    a1, r1, r2, th = (float(v) for v in vec)
    a2 = a1 * math.sinh(r1) * math.sin(th)
    chi0 = a1 * math.exp(r1)
    chi3 = a1 * math.exp(-r1)
    chi1 = a2 * math.exp(r2)
    chi2 = a2 * math.exp(-r2)
    # exact unit trace: uniform scaling of the chi spectrum keeps the
    # border condition (both sides are quadratic in the scale)
    total = chi0 + chi1 + chi2 + chi3
    a1, a2 = a1 / total, a2 / total
    chi0, chi1, chi2, chi3 = (c / total for c in (chi0, chi1, chi2, chi3))
    sigma = sigma_from_chi(chi0, chi1, chi2, chi3, th)
    rho = to_density(p)
    e_r = relative_entropy(rho, validate_density_matrix(sigma, "sigma*"))
    cond = float(np.linalg.cond(_jacobian(vec, p)))
    return ClosestSeparable(
        theta=th, A1=a1, r1=r1, r2=r2, A2=a2,
        chi0=chi0, chi1=chi1, chi2=chi2, chi3=chi3,
        sigma_star=sigma, e_r=float(e_r), method="general_newton",
        info={"seed": seed, "restarts_used": restart, "iterations": iterations,
              "residual_norm": norm, "jacobian_cond": cond,
              "jacobian_ill_conditioned": cond > JACOBIAN_COND_FLAG},
    )
