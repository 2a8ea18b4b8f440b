"""The composite tail-probability and mean-excess estimators under comparison.

Tail probability: kernel (global or pointwise bandwidth), GPD piecing-together,
and the polynomial plug-in.  Mean excess: kernel, constrained GPD fit, and the
plug-in u/(alpha_hat - 1).  Every estimator returns an EstimateRecord whose
diagnostics carry the bandwidth/fit metadata; degenerate outcomes are flagged
results, not exceptions, so sweeps can proceed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientExceedancesError, NoExceedanceError
from .gpd_fit import fit_pot
from .kernel_estimation import (
    GAUSSIAN,
    al_bandwidth,
    cap_bandwidth,
    kernel_cdf,
    kernel_mef,
    mef_bandwidth_plugin,
    pointwise_bandwidth_plugin,
)
from .tail_index import TailIndexEstimate

__all__ = [
    "TailTarget",
    "EstimateRecord",
    "tail_ne",
    "tail_pt",
    "tail_pi",
    "mef_ne",
    "mef_pe",
    "mef_pi",
]

_ALPHA_ONE_TOL = 1e-6


@dataclass(frozen=True)
class TailTarget:
    """Evaluation point x, threshold u, and the rule that produced them."""

    x: float
    u: float
    rule: str = "fixed"

    def __post_init__(self):
        if not 0 < self.u <= self.x:
            raise ValueError(f"need 0 < u <= x, got u={self.u}, x={self.x}")


@dataclass
class EstimateRecord:
    estimator: str
    value: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def flags(self) -> list:
        return self.diagnostics.setdefault("flags", [])

    def flag(self, name: str) -> "EstimateRecord":
        if name not in self.flags:
            self.flags.append(name)
        return self


def tail_ne(sample, x: float, bandwidth_method: str = "AL",
            tail_est: TailIndexEstimate | None = None) -> EstimateRecord:
    """Kernel tail estimate 1 - Fhat(x) with a global (AL) or pointwise (PB) bandwidth."""
    xs = np.asarray(sample, dtype=float)
    if bandwidth_method == "AL":
        bw = al_bandwidth(xs)
    elif bandwidth_method == "PB":
        if tail_est is None:
            raise ValueError("the pointwise bandwidth needs a tail-index estimate")
        bw = cap_bandwidth(pointwise_bandwidth_plugin(tail_est, xs.size, x), xs)
    else:
        raise ValueError(f"unknown bandwidth method {bandwidth_method!r}")
    value = 1.0 - kernel_cdf(xs, x, bw)
    rec = EstimateRecord(bandwidth_method, value,
                         {"h": bw.h, "bandwidth_method": bw.method, "flags": []})
    if not bw.valid:
        rec.flag("bandwidth_invalid")
    if bw.capped:
        rec.flag("bandwidth_capped")
    return rec


def tail_pt(sample, x: float, u: float) -> EstimateRecord:
    """Piecing-together tail estimate (N/n) * GPD-tail(x - u) with a free POT fit."""
    xs = np.asarray(sample, dtype=float)
    n = xs.size
    try:
        fit = fit_pot(xs, u, constrain_gamma_lt_1=False)
    except InsufficientExceedancesError:
        rec = EstimateRecord("PT", 0.0, {"N": int(np.sum(xs > u)), "flags": []})
        return rec.flag("insufficient_exceedances")
    g, c = fit.params.gamma, fit.params.scale
    y = x - u
    if abs(g) < 1e-12:
        gpd_tail = math.exp(-y / c)
    else:
        z = 1.0 + g * y / c
        gpd_tail = z ** (-1.0 / g) if z > 0 else 0.0
    value = (fit.n_exceed / n) * gpd_tail
    rec = EstimateRecord("PT", value, {
        "gamma": g, "scale": c, "N": fit.n_exceed,
        "converged": fit.converged, "flags": [],
    })
    if not fit.converged:
        rec.flag("fit_not_converged")
    return rec


def tail_pi(tail_est: TailIndexEstimate, x: float) -> EstimateRecord:
    """Plug-in tail estimate A_hat x^(-alpha_hat), clamped into [0, 1]."""
    if x <= 0:
        raise ValueError("evaluation point must be positive")
    with np.errstate(over="ignore"):
        raw = tail_est.A_hat * x ** (-tail_est.alpha_hat)
    value = min(1.0, max(0.0, raw))
    rec = EstimateRecord("PI", value, {
        "raw": float(raw), "alpha_hat": tail_est.alpha_hat,
        "A_hat": tail_est.A_hat, "r": tail_est.r, "flags": [],
    })
    if raw != value:
        rec.flag("clamped")
    return rec


def mef_ne(sample, u: float, bandwidth_method: str = "AL",
           tail_est: TailIndexEstimate | None = None) -> EstimateRecord:
    """Kernel mean-excess estimate with the global (AL) or plug-in h* (PB) bandwidth."""
    xs = np.asarray(sample, dtype=float)
    if bandwidth_method == "AL":
        bw = al_bandwidth(xs)
    elif bandwidth_method == "PB":
        if tail_est is None:
            raise ValueError("the plug-in h* needs a tail-index estimate")
        bw = cap_bandwidth(mef_bandwidth_plugin(tail_est, xs.size, u), xs)
    else:
        raise ValueError(f"unknown bandwidth method {bandwidth_method!r}")
    value = kernel_mef(xs, u, bw)  # NoExceedanceError propagates
    rec = EstimateRecord(bandwidth_method, value,
                         {"h": bw.h, "bandwidth_method": bw.method, "flags": []})
    if not bw.valid:
        rec.flag("bandwidth_invalid")
    if bw.capped:
        rec.flag("bandwidth_capped")
    return rec


def mef_pe(sample, u: float) -> EstimateRecord:
    """GPD-fit mean-excess estimate c_hat/(1 - gamma_tilde), shape constrained below 1."""
    xs = np.asarray(sample, dtype=float)
    try:
        fit = fit_pot(xs, u, constrain_gamma_lt_1=True)
    except InsufficientExceedancesError:
        rec = EstimateRecord("PE", float("nan"), {"N": int(np.sum(xs > u)), "flags": []})
        return rec.flag("insufficient_exceedances")
    g, c = fit.params.gamma, fit.params.scale
    value = c / (1.0 - g)
    rec = EstimateRecord("PE", value, {
        "gamma": g, "scale": c, "N": fit.n_exceed,
        "converged": fit.converged, "flags": [],
    })
    if fit.at_boundary:
        rec.flag("gamma_at_boundary")
    if not fit.converged:
        rec.flag("fit_not_converged")
    return rec


def mef_pi(tail_est: TailIndexEstimate, u: float) -> EstimateRecord:
    """Plug-in mean-excess estimate u/(alpha_hat - 1); +inf-flagged when alpha_hat <= 1."""
    if u <= 0:
        raise ValueError("threshold must be positive")
    a = tail_est.alpha_hat
    rec = EstimateRecord("PI", float("inf"), {
        "alpha_hat": a, "r": tail_est.r, "flags": [],
    })
    if a <= 1.0 + _ALPHA_ONE_TOL:
        return rec.flag("mef_nonexistent")
    rec.value = u / (a - 1.0)
    return rec
