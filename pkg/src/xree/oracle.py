"""Independent brute-force minimization of S(rho || sigma) over separable states.

This module is the ground-truth side of every cross-check: it never
touches the closed form, the stationarity system, or the witness.  A
separable state is parametrized as a weighted mixture of K product pure
states; the weights ride a softmax and each single-qubit factor is a
(polar, phase) angle pair, so the search space is unconstrained and the
assembled state is separable by construction.  Minimization is
quasi-Newton (L-BFGS-B) with central finite-difference gradients and
seeded random restarts.

:func:`structured_min` is a second, even simpler path for the
phi = pi/2 family: a dense grid over the border slice refined by
golden-section coordinate descent.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidParams
from .linalg import validate_density_matrix
from .xstate import XStateParams, is_entangled

FD_STEP = 1e-6
MAX_ITER_PER_RESTART = 300   # total budget: coarse pass plus winner polish
COARSE_MAX_ITER = 150
POLISH_COUNT = 3
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class ProductEnsemble:
    """Weighted list of product pure states |alpha_i beta_i>.

    ``alpha`` and ``beta`` are (K, 2) arrays of (polar, phase) angles;
    weights are nonnegative and sum to 1.
    """

    weights: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.min() < -1e-12 or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParams("ensemble weights must be a probability vector")
        if self.alpha.shape != (len(w), 2) or self.beta.shape != (len(w), 2):
            raise InvalidParams("angle arrays must be (K, 2)")

    @property
    def k(self) -> int:
        return len(self.weights)

    def kets(self) -> np.ndarray:
        """Product kets as a (K, 4) complex array."""
        ca = np.cos(self.alpha[:, 0] / 2.0)
        sa = np.sin(self.alpha[:, 0] / 2.0) * np.exp(1j * self.alpha[:, 1])
        cb = np.cos(self.beta[:, 0] / 2.0)
        sb = np.sin(self.beta[:, 0] / 2.0) * np.exp(1j * self.beta[:, 1])
        psi = np.empty((self.k, 4), dtype=complex)
        psi[:, 0] = ca * cb
        psi[:, 1] = ca * sb
        psi[:, 2] = sa * cb
        psi[:, 3] = sa * sb
        return psi


def ensemble_to_density(ensemble: ProductEnsemble) -> np.ndarray:
    """Convex combination sum_i w_i |alpha_i beta_i><alpha_i beta_i|."""
    psi = ensemble.kets()
    return np.einsum("k,ki,kj->ij", ensemble.weights, psi, psi.conj())


# --- ensemble objective -------------------------------------------------
#
# Parameter vector layout per restart (length 5K):
#   [0:K)        weight logits (softmax)
#   [K:5K)       per-component angles (theta_a, phi_a, theta_b, phi_b)

def _objective_batch(x_batch, rho, tr_rho_log_rho, k):
    """S(rho || sigma(x)) for a batch of parameter vectors, vectorized."""
    x_batch = np.atleast_2d(x_batch)
    batch = x_batch.shape[0]
    logits = x_batch[:, :k]
    ang = x_batch[:, k:].reshape(batch, k, 4)
    w = np.exp(logits - logits.max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    ca, sa = np.cos(ang[:, :, 0] / 2.0), np.sin(ang[:, :, 0] / 2.0)
    cb, sb = np.cos(ang[:, :, 2] / 2.0), np.sin(ang[:, :, 2] / 2.0)
    ea = np.exp(1j * ang[:, :, 1])
    eb = np.exp(1j * ang[:, :, 3])
    psi = np.empty((batch, k, 4), dtype=complex)
    psi[:, :, 0] = ca * cb
    psi[:, :, 1] = ca * sb * eb
    psi[:, :, 2] = sa * ea * cb
    psi[:, :, 3] = sa * ea * sb * eb
    weighted = w[:, :, None] * psi
    sigma = np.matmul(weighted.transpose(0, 2, 1), psi.conj())
    vals, vecs = np.linalg.eigh(sigma)
    vals = np.clip(vals, 1e-300, None)  # support deficits become a large penalty
    rho_vecs = np.matmul(rho[None, :, :], vecs)
    overlap = (vecs.conj() * rho_vecs).sum(axis=1).real
    return tr_rho_log_rho - (np.log(vals) * overlap).sum(axis=1)


def _fun_and_grad(x, rho, tr_rho_log_rho, k):
    """Objective and central-difference gradient in one batched evaluation."""
    dim = x.size
    pts = np.empty((2 * dim + 1, dim))
    pts[:] = x
    idx = np.arange(dim)
    pts[idx, idx] += FD_STEP
    pts[dim + idx, idx] -= FD_STEP
    vals = _objective_batch(pts, rho, tr_rho_log_rho, k)
    grad = (vals[:dim] - vals[dim:2 * dim]) / (2.0 * FD_STEP)
    return vals[-1], grad


def _random_start(rng, k):
    x0 = np.empty(5 * k)
    x0[:k] = np.log(rng.dirichlet(np.ones(k)) + 1e-12)
    x0[k::4] = np.arccos(rng.uniform(-1.0, 1.0, k))
    x0[k + 1::4] = rng.uniform(0.0, 2.0 * math.pi, k)
    x0[k + 2::4] = np.arccos(rng.uniform(-1.0, 1.0, k))
    x0[k + 3::4] = rng.uniform(0.0, 2.0 * math.pi, k)
    return x0


def _run_restart(args):
    """One seeded coarse L-BFGS descent; module-level for process pools."""
    index, restart_seed, rho, trll, k, maxiter = args
    rng = np.random.default_rng(restart_seed)
    x0 = _random_start(rng, k)
    result = minimize(_fun_and_grad, x0, args=(rho, trll, k), jac=True,
                      method="L-BFGS-B",
                      options={"maxiter": maxiter, "ftol": 1e-9, "gtol": 1e-7})
    return index, float(result.fun), int(result.nit), result.x


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    ensemble: ProductEnsemble
    diagnostics: dict


def _ensemble_from_vector(x, k) -> ProductEnsemble:
    logits = x[:k]
    w = np.exp(logits - logits.max())
    w /= w.sum()
    ang = x[k:].reshape(k, 4)
    alpha = np.column_stack([ang[:, 0], ang[:, 1]])
    beta = np.column_stack([ang[:, 2], ang[:, 3]])
    return ProductEnsemble(weights=w, alpha=alpha, beta=beta)


def minimize_relative_entropy(rho, k: int = 8, restarts: int = 64,
                              seed: int = 0, processes: int = 1) -> OracleResult:
    """Best separable upper bound on E_r(rho) over product ensembles.

    Runs ``restarts`` independent quasi-Newton descents from Haar-like
    random initial ensembles (Dirichlet(1) weights), then continues the
    best few to full precision; the iteration budget per restart stays
    within 300.  Deterministic for a fixed seed regardless of the
    process count: restart RNGs are spawned from one seed sequence and
    results merge by minimum value with lowest-index tie-break.
    """
    rho = validate_density_matrix(rho, "rho")
    if k < 4:
        raise InvalidParams("need at least 4 product components for a mixed target")
    evals = np.linalg.eigvalsh(rho)
    trll = float(sum(v * math.log(v) for v in evals if v > 1e-14))
    restart_seeds = np.random.SeedSequence(seed).generate_state(restarts, np.uint64)
    tasks = [(i, int(restart_seeds[i]), rho, trll, k, COARSE_MAX_ITER)
             for i in range(restarts)]
    if processes > 1:
        with ProcessPoolExecutor(max_workers=processes) as pool:
            coarse = list(pool.map(_run_restart, tasks, chunksize=4))
    else:
        coarse = [_run_restart(t) for t in tasks]
    coarse.sort(key=lambda item: (item[1], item[0]))

    polish_budget = MAX_ITER_PER_RESTART - COARSE_MAX_ITER
    candidates = []
    for index, value, _nit, x in coarse[:POLISH_COUNT]:
        refined = minimize(_fun_and_grad, x, args=(rho, trll, k), jac=True,
                           method="L-BFGS-B",
                           options={"maxiter": polish_budget,
                                    "ftol": 1e-15, "gtol": 1e-11})
        if refined.fun <= value:
            candidates.append((float(refined.fun), index, refined.x))
        else:
            candidates.append((value, index, x))
    candidates.sort(key=lambda item: (item[0], item[1]))
    best_value, _, best_x = candidates[0]
    diagnostics = {
        "seed": seed,
        "restarts": restarts,
        "k": k,
        "per_restart": [(i, v, n) for i, v, n, _ in coarse],
    }
    return OracleResult(value=best_value,
                        ensemble=_ensemble_from_vector(best_x, k),
                        diagnostics=diagnostics)


# --- independent grid minimizer on the phi = pi/2 border slice ---------

def _border_chi0(c2, c3, sign):
    """chi0 on the border for free (chi2, chi3); two square-root branches."""
    inner = c2 * (1.0 - 2.0 * c3)
    root = np.sqrt(np.maximum(inner, 0.0))
    chi0 = c3 - 2.0 * c2 + 2.0 * sign * root
    return np.where(inner >= 0.0, chi0, np.nan)


def _slice_value(lam, c2, c3, sign):
    """Objective on the border slice; +inf where infeasible."""
    chi0 = _border_chi0(c2, c3, sign)
    chi1 = 1.0 - chi0 - c2 - c3
    value = np.zeros(np.broadcast(c2, c3).shape)
    for weight, chi in zip(lam, (chi0, chi1, c2, c3)):
        if weight > 1e-15:
            with np.errstate(divide="ignore", invalid="ignore"):
                term = weight * (math.log(weight) - np.log(chi))
            value = value + np.where(chi > 0.0, term, np.inf)
    bad = ~np.isfinite(chi0) | (chi0 < 0.0) | (chi1 < 0.0)
    return np.where(bad, np.inf, value)


def _golden_1d(fun, lo, hi, iterations=80):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def structured_min(p: XStateParams, grid_points: int = 201) -> float:
    """Grid + golden-section minimizer of the shared-eigenbasis objective.

    Exists purely as a second independent code path for the phi = pi/2
    family: dense grid over the feasible (chi2, chi3) slice of the
    separability border (both chi0 branches), refined by golden-section
    coordinate descent.  Separable inputs return 0 (the minimizer is the
    state itself, inside the separable set).
    """
    if not is_entangled(p):
        return 0.0
    if abs(p.eta) > 1e-12 or abs(p.phi - 0.5 * math.pi) > 1e-12:
        raise InvalidParams("grid minimizer covers canonical phi = pi/2 input only")
    lam = tuple(p.eigenvalues())
    # chi2 can take any value in (0, 1); the chi0 branch formula needs
    # chi3 <= 1/2 (equivalent to chi3 <= chi0 on this slice)
    axis2 = np.linspace(0.0, 1.0, 2 * grid_points - 1)
    axis3 = np.linspace(0.0, 0.5, grid_points)
    c2g, c3g = np.meshgrid(axis2, axis3, indexing="ij")

    best = math.inf
    for sign in (1.0, -1.0):
        values = _slice_value(lam, c2g, c3g, sign)
        flat = int(np.argmin(values))
        if not math.isfinite(float(values.flat[flat])):
            continue
        i, j = np.unravel_index(flat, values.shape)
        c2, c3 = float(axis2[i]), float(axis3[j])
        width = float(axis3[1] - axis3[0])
        value = float(values[i, j])
        for _round in range(30):
            lo2, hi2 = max(c2 - width, 0.0), min(c2 + width, 1.0)
            c2, value = _golden_1d(
                lambda t: float(_slice_value(lam, t, c3, sign)), lo2, hi2,
                iterations=40)
            lo3, hi3 = max(c3 - width, 0.0), min(c3 + width, 0.5)
            c3, value = _golden_1d(
                lambda t: float(_slice_value(lam, c2, t, sign)), lo3, hi3,
                iterations=40)
            width = max(width * 0.7, 1e-9)
        best = min(best, value)
    return best
