"""Maximum-likelihood fitting of the generalized Pareto distribution to threshold excesses."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, InsufficientExceedancesError

__all__ = ["GpdParams", "PotFit", "gpd_loglik", "score_at", "fit_pot"]

_GAMMA_ZERO_TOL = 1e-8
_GAMMA_UPPER = 1.0 - 1e-6  # constrained-fit ceiling
_NM_OPTIONS = dict(maxiter=500, xatol=1e-10, fatol=1e-10)
_SCORE_TOL = 1e-6


@dataclass(frozen=True)
class GpdParams:
    gamma: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class PotFit:
    """Result of a peaks-over-threshold fit."""

    params: GpdParams
    threshold: float
    n_exceed: int
    loglik: float
    converged: bool
    constrained: bool
    at_boundary: bool = False


def _as_excesses(excesses) -> np.ndarray:
    y = np.asarray(excesses, dtype=float)
    if y.size == 0:
        raise DomainError("empty excess set")
    if np.any(y < 0):
        raise DomainError("excesses must be nonnegative")
    return y


def gpd_loglik(params: GpdParams, excesses) -> float:
    """GPD log likelihood of a set of excesses; -inf when the support is violated."""
    y = _as_excesses(excesses)
    g, c = params.gamma, params.scale
    n = y.size
    if abs(g) < _GAMMA_ZERO_TOL:
        return float(-n * np.log(c) - np.sum(y) / c)
    z = g * y / c
    if np.any(1.0 + z <= 0):
        return -np.inf
    return float(-n * np.log(c) - (1.0 + 1.0 / g) * np.sum(np.log1p(z)))


def score_at(params: GpdParams, excesses) -> np.ndarray:
    """Analytic gradient of the log likelihood in (gamma, ln scale)."""
    y = _as_excesses(excesses)
    g, c = params.gamma, params.scale
    n = y.size
    t = y / c
    if abs(g) < 1e-5:
        # series continuation about gamma = 0
        s_g = float(np.sum(t * t / 2.0 - t) + g * np.sum(t * t - 2.0 * t ** 3 / 3.0))
        s_lc = float(-n + (1.0 + g) * np.sum(t / (1.0 + g * t)))
        return np.array([s_g, s_lc])
    w = 1.0 + g * t
    if np.any(w <= 0):
        raise DomainError("parameters violate the support of the excesses")
    tw = t / w
    s_g = float(np.sum(np.log1p(g * t)) / g ** 2 - (1.0 + 1.0 / g) * np.sum(tw))
    s_lc = float(-n + (1.0 + g) * np.sum(tw))
    return np.array([s_g, s_lc])


def _neg_loglik(theta: np.ndarray, y: np.ndarray, g_cap: float | None) -> float:
    g, lc = theta
    if g_cap is not None and g > g_cap:
        return 1e12 * (1.0 + g - g_cap)
    c = np.exp(lc)
    if not np.isfinite(c) or c <= 0:
        return 1e15
    if abs(g) < _GAMMA_ZERO_TOL:
        return float(y.size * lc + np.sum(y) / c)
    z = g * y / c
    if np.any(1.0 + z <= 1e-300):
        return 1e15
    return float(y.size * lc + (1.0 + 1.0 / g) * np.sum(np.log1p(z)))


def _init_points(y: np.ndarray) -> list[np.ndarray]:
    m = float(np.mean(y))
    inits = [np.array([0.0, np.log(m)])]  # exponential start
    v = float(np.var(y, ddof=1)) if y.size > 1 else 0.0
    if v > 0 and m > 0:
        # method-of-moments start; collapses toward gamma=1/2 for wild samples
        g0 = 0.5 * (1.0 - m * m / v)
        c0 = m * (1.0 - min(g0, 0.95))
        if c0 > 0:
            inits.append(np.array([g0, np.log(c0)]))
    return inits


def _newton_polish(theta: np.ndarray, y: np.ndarray, g_cap: float | None) -> np.ndarray:
    """Guarded Newton steps on the analytic score to sharpen the simplex optimum.

    Progress is judged by the score norm: near the maximum the per-step
    likelihood gain drops below float resolution long before the score does.
    """

    def safe_score(th):
        try:
            s = score_at(GpdParams(th[0], float(np.exp(th[1]))), y)
        except DomainError:
            return None
        return s if np.all(np.isfinite(s)) else None

    current = theta.copy()
    s_cur = safe_score(current)
    for _ in range(30):
        if s_cur is None or np.max(np.abs(s_cur)) < _SCORE_TOL:
            break
        hessian = np.empty((2, 2))
        ok = True
        for j in range(2):
            step = 1e-6 * max(1.0, abs(current[j]))
            up, dn = current.copy(), current.copy()
            up[j] += step
            dn[j] -= step
            s_up, s_dn = safe_score(up), safe_score(dn)
            if s_up is None or s_dn is None:
                ok = False
                break
            hessian[:, j] = (s_up - s_dn) / (2.0 * step)
        if not ok:
            break
        try:
            delta = np.linalg.solve(hessian, -s_cur)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        improved = False
        for _ in range(25):
            cand = current + scale * delta
            if g_cap is not None:
                cand[0] = min(cand[0], g_cap)
            s_cand = safe_score(cand)
            if s_cand is not None and np.max(np.abs(s_cand)) < np.max(np.abs(s_cur)):
                current, s_cur = cand, s_cand
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    return current


def _fit_boundary_scale(y: np.ndarray, gamma: float) -> float:
    """Profile the scale at a fixed shape (1-D Newton on the log-scale score)."""
    lc = float(np.log(np.mean(y)))
    for _ in range(60):
        c = np.exp(lc)
        tw = (y / c) / (1.0 + gamma * y / c)
        s = -y.size + (1.0 + gamma) * np.sum(tw)
        d = 1e-7
        c2 = np.exp(lc + d)
        tw2 = (y / c2) / (1.0 + gamma * y / c2)
        s2 = -y.size + (1.0 + gamma) * np.sum(tw2)
        slope = (s2 - s) / d
        if slope == 0 or not np.isfinite(slope):
            break
        step = -s / slope
        lc += np.clip(step, -1.0, 1.0)
        if abs(step) < 1e-12:
            break
    return float(np.exp(lc))


def fit_pot(sample, u: float, constrain_gamma_lt_1: bool = False) -> PotFit:
    """Fit a GPD to the excesses of ``sample`` over ``u`` by maximum likelihood.

    Runs a 2-D simplex search in (gamma, ln scale) from two starts (exponential
    and moment-based), keeps the best likelihood, then sharpens the optimum with
    guarded Newton steps on the analytic score.  With ``constrain_gamma_lt_1``
    the shape is clipped just below 1; if the free optimum sits above, the scale
    is re-profiled at the ceiling and the fit is flagged ``at_boundary``.
    A stalled optimizer yields ``converged=False`` carrying the best-found
    parameters rather than an error.
    """
    xs = np.asarray(sample, dtype=float)
    y = xs[xs > u] - u
    if y.size < 2:
        raise InsufficientExceedancesError(
            f"need at least 2 exceedances over u={u}, got {y.size}")

    g_cap = _GAMMA_UPPER if constrain_gamma_lt_1 else None
    best = None
    for x0 in _init_points(y):
        if g_cap is not None:
            x0 = x0.copy()
            x0[0] = min(x0[0], g_cap)
        res = minimize(_neg_loglik, x0, args=(y, g_cap), method="Nelder-Mead",
                       options=_NM_OPTIONS)
        if best is None or res.fun < best.fun:
            best = res

    theta_nm = np.asarray(best.x, dtype=float)
    theta = _newton_polish(theta_nm, y, g_cap)
    if _neg_loglik(theta, y, g_cap) > _neg_loglik(theta_nm, y, g_cap) + 1e-7:
        theta = theta_nm
    at_boundary = False
    if g_cap is not None and theta[0] >= g_cap - 1e-12:
        theta[0] = g_cap
        theta[1] = np.log(_fit_boundary_scale(y, g_cap))
        at_boundary = True

    params = GpdParams(float(theta[0]), float(np.exp(theta[1])))
    ll = gpd_loglik(params, y)
    if at_boundary:
        converged = bool(np.isfinite(ll))
    else:
        try:
            s = score_at(params, y)
            converged = bool(np.isfinite(ll) and np.max(np.abs(s)) < 1e-4)
        except DomainError:
            converged = False
    return PotFit(params=params, threshold=float(u), n_exceed=int(y.size),
                  loglik=float(ll), converged=converged,
                  constrained=constrain_gamma_lt_1, at_boundary=at_boundary)
