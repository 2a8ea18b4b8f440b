"""Log-spacing (Hill-type) estimation of a polynomial tail from order statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, DomainError

__all__ = ["TailIndexEstimate", "hill_fit", "default_r", "theoretical_r", "r_scale_constant"]


@dataclass(frozen=True)
class TailIndexEstimate:
    """Fitted tail exponent and scale together with the order statistics used."""

    alpha_hat: float
    A_hat: float
    r: int
    n: int


def hill_fit(sample, r: int) -> TailIndexEstimate:
    """Fit (A, alpha) of a tail A x^(-alpha) from the r largest order statistics.

    alpha_hat is the reciprocal mean log-excess of the top r observations over
    the (r+1)-th largest; A_hat = (r/n) * X_(n-r)^alpha_hat.  The top r+1 order
    statistics must be strictly positive.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if not 1 <= r < n:
        raise DomainError(f"need 1 <= r < n, got r={r}, n={n}")
    base = x[n - r - 1]
    top = x[n - r:]
    if base <= 0 or top[0] <= 0:
        raise DomainError("the r+1 largest order statistics must be strictly positive")
    mean_log_excess = float(np.mean(np.log(top)) - np.log(base))
    if mean_log_excess <= 0:
        raise DegenerateSampleError("top order statistics are tied; tail exponent undefined")
    alpha_hat = 1.0 / mean_log_excess
    A_hat = (r / n) * base ** alpha_hat
    return TailIndexEstimate(alpha_hat=alpha_hat, A_hat=A_hat, r=r, n=n)


def _round_clamp(value: float, n: int) -> int:
    # round-half-to-even, then clamp to [1, n-1]
    r = int(np.rint(value))
    return max(1, min(r, n - 1))


def default_r(n: int) -> int:
    """Default number of order statistics, round(n^(2/3))."""
    if n < 8:
        raise DomainError(f"need n >= 8, got {n}")
    return _round_clamp(float(n) ** (2.0 / 3.0), n)


def r_scale_constant(params) -> float:
    """Scale constant s of the optimal r ~ s n^(2 beta / (alpha + 2 beta)).

    s = A^(2b/(a+2b)) |B|^(-2a/(a+2b)) {a (a+b)^2 / (2 b^3)}^(a/(a+2b)).
    """
    a, b = params.alpha, params.beta
    if params.B == 0:
        raise DomainError("s is undefined when B = 0")
    denom = a + 2.0 * b
    return (
        params.A ** (2.0 * b / denom)
        * abs(params.B) ** (-2.0 * a / denom)
        * (a * (a + b) ** 2 / (2.0 * b ** 3)) ** (a / denom)
    )


def theoretical_r(params, n: int, s: float | None = None) -> int:
    """Optimal r = round(s * n^(2 beta / (alpha + 2 beta))), clamped to [1, n-1]."""
    if n < 8:
        raise DomainError(f"need n >= 8, got {n}")
    if s is None:
        s = r_scale_constant(params)
    exponent = 2.0 * params.beta / (params.alpha + 2.0 * params.beta)
    return _round_clamp(s * float(n) ** exponent, n)
