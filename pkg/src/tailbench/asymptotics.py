"""Closed-form convergence-rate exponents and asymptotic MSE predictors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import HallParams, WeibullTailParams, pdf_prime, tail_prob
from .errors import DomainError
from .kernel_estimation import GAUSSIAN, Bandwidth, KernelSpec
from .tail_index import r_scale_constant

__all__ = [
    "RateExponent",
    "AsymptoticConstants",
    "MefMseEnvelope",
    "delta",
    "tail_rate_exponents",
    "mef_rate_exponents",
    "tail_rate_symbols",
    "nu_vector",
    "default_sigma0",
    "predict_mse_cor1",
    "predict_relmse_cor3",
    "predict_relmse_cor3_far",
    "predict_relmse_cor4",
    "predict_mse_prop1",
    "predict_mse_thm1",
    "predict_mse_cor6",
    "predict_mse_cor7",
]

REASON_BANDWIDTH = "BandwidthDiverges"
REASON_ASSUMPTION = "AssumptionBroken"


@dataclass(frozen=True)
class RateExponent:
    """Polynomial rate exponent; ``value`` is None when the rate does not apply.

    ``log_power`` records an extra (ln n)^k factor next to the polynomial part.
    """

    value: float | None
    log_power: int = 0
    reason: str | None = None

    @property
    def applicable(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class MefMseEnvelope:
    """Order-of-magnitude envelopes for the light-tail branch; not assertable."""

    bias_order: float
    variance_order: float
    assertable: bool = False


@dataclass(frozen=True)
class AsymptoticConstants:
    """Bundle of the constants feeding the MSE predictors (diagnostics only)."""

    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    c5: float | None = None
    c6: float | None = None
    lambda_n: float | None = None
    nu: tuple[float, float] | None = None
    sigma0: tuple[tuple[float, float], tuple[float, float]] | None = None
    s: float | None = None


def delta(params: HallParams) -> float:
    """Tail-depth exponent 1/(2 beta + alpha)."""
    return 1.0 / (2.0 * params.beta + params.alpha)


def tail_rate_exponents(params, C2: float | None = None) -> dict[str, RateExponent]:
    """Relative-MSE rate exponents {NE, PT, PI} for tail-probability estimation.

    Heavy (polynomial) tails evaluated at x ~ C1 n^delta; light tails at
    x ~ C2 (ln n)^(1/kappa).  The kernel rate needs beta > 3/2 or its optimal
    bandwidth diverges; the plug-in rate does not exist for light tails.
    """
    if isinstance(params, HallParams):
        d = delta(params)
        pt = d * params.alpha - 1.0
        ne = RateExponent(pt) if params.beta > 1.5 else RateExponent(None, reason=REASON_BANDWIDTH)
        pi = RateExponent(2.0 * d * params.alpha - 2.0, log_power=2)
        return {"NE": ne, "PT": RateExponent(pt), "PI": pi}
    if isinstance(params, WeibullTailParams):
        if C2 is None:
            raise DomainError("C2 is required for light-tail rates")
        rate = -1.0 + params.C * C2 ** params.kappa
        return {
            "NE": RateExponent(rate),
            "PT": RateExponent(rate),
            "PI": RateExponent(None, reason=REASON_ASSUMPTION),
        }
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def mef_rate_exponents(params: HallParams, p: float) -> dict[str, RateExponent]:
    """MSE rate exponents {NE, PT, PI} for mean-excess estimation at u = n^p.

    The kernel rate p(alpha+2)-1 applies while p(alpha+3) <= 1 (its optimal
    bandwidth still vanishes at the boundary case, which the rate tables keep);
    the GPD-fit rate applies once p(alpha+2*beta) > 1; the plug-in rate is
    2p - 1 + alpha/(2*beta+alpha) throughout.
    """
    if p <= 0:
        raise DomainError(f"need p > 0, got {p}")
    a, b = params.alpha, params.beta
    ne_ok = p * (a + 3.0) <= 1.0
    pt_ok = p * (a + 2.0 * b) > 1.0
    rate = p * (a + 2.0) - 1.0
    return {
        "NE": RateExponent(rate) if ne_ok else RateExponent(None, reason=REASON_BANDWIDTH),
        "PT": RateExponent(rate) if pt_ok else RateExponent(None, reason=REASON_ASSUMPTION),
        "PI": RateExponent(2.0 * p - 1.0 + a / (2.0 * b + a)),
    }


def tail_rate_symbols() -> dict[str, dict[str, str]]:
    """Symbolic form of the tail rate table (for rendering)."""
    return {
        "heavy": {"NE": "n^(d*a-1)", "PT": "n^(d*a-1)", "PI": "n^(2*d*a-2) (ln n)^2"},
        "light": {"NE": "n^(-1+C*C2^k)", "PT": "n^(-1+C*C2^k)", "PI": "--"},
    }


def nu_vector(c1: float, alpha: float) -> np.ndarray:
    """Sensitivity vector (1/c1 - 1, alpha (ln c1 + 1/c1 - 1)) of the fitted tail."""
    if c1 < 1.0:
        raise DomainError(f"need c1 >= 1, got {c1}")
    return np.array([1.0 / c1 - 1.0, alpha * (math.log(c1) + 1.0 / c1 - 1.0)])


def default_sigma0(gamma: float) -> np.ndarray:
    """Asymptotic covariance of the scaled GPD MLE (gamma, scale/scale0 - 1).

    (1+g) [[1+g, -1], [-1, 2]], ordered (shape, log-scale).  Exposed as a
    replaceable constant; pass an alternative to the predictors to swap it.
    """
    return (1.0 + gamma) * np.array([[1.0 + gamma, -1.0], [-1.0, 2.0]])


def predict_mse_cor1(dist, n: int, x: float, h, k: KernelSpec = GAUSSIAN) -> float:
    """Asymptotic MSE of the kernel CDF: {h^2 f'(x) mu2 / 2}^2 + tail(x)/n."""
    hv = h.h if isinstance(h, Bandwidth) else float(h)
    bias = hv ** 2 * pdf_prime(dist, x) * k.mu2 / 2.0
    return bias ** 2 + tail_prob(dist, x) / n


def _mispec_bias_factor(alpha: float, beta: float) -> float:
    # shape-direction pull of the GPD MLE under a polynomial second-order term
    g = 1.0 / alpha
    return alpha * beta * (1.0 + g) / ((alpha + beta) * (alpha + beta + 1.0))


def predict_relmse_cor3(params: HallParams, c1: float, c2: float, N: float,
                        sigma0: np.ndarray | None = None) -> float:
    """Predicted relative MSE of the GPD piecing-together tail estimate.

    Evaluated at x = c1*u with sqrt(N) u^(-beta) -> c2.  The bias combines the
    raw GPD approximation error with the misspecification pull on the MLE and
    vanishes identically at beta = 0 and beta = 1; the variance adds the
    empirical-exceedance term (the leading 1) to the delta-method form.
    """
    a, b, B = params.alpha, params.beta, params.B
    if N <= 0:
        raise DomainError("N must be positive")
    nu = nu_vector(c1, a)
    q = (c1 ** (-b) - 1.0) + _mispec_bias_factor(a, b) * ((1.0 - b) * nu[1] - (a + 2.0 * b) * nu[0])
    bias_sq = B ** 2 * c2 ** 2 * q ** 2
    if sigma0 is None:
        sigma0 = default_sigma0(1.0 / a)
    direction = np.array([nu[1], -nu[0]])  # (shape, log-scale) pairing
    var = a ** 2 * float(direction @ sigma0 @ direction)
    return (bias_sq + 1.0 + var) / N


def predict_relmse_cor3_far(params: HallParams, c2: float, N: float) -> float:
    """Far-tail variant: relative MSE scaled by ln(1 + x/u)^2, u = o(x)."""
    a, b, B = params.alpha, params.beta, params.B
    if N <= 0:
        raise DomainError("N must be positive")
    bias = B * c2 * a * (a + 1.0) * b * (1.0 - b) / ((a + b) * (a + b + 1.0))
    var = a ** 2 * (a + 1.0) ** 2
    return (bias ** 2 + var) / N


def predict_relmse_cor4(params: WeibullTailParams, c3: float, c5: float, N: float) -> float:
    """Predicted relative MSE of the GPD fit for a stretched-exponential tail.

    Variance polynomial 1 + 2 c3^2 - c3^3 + c3^4/4 plus the c5-scaled bias
    expansion, divided by the exceedance count.
    """
    if c3 <= 0 and c3 != 0.0:
        raise DomainError("c3 must be nonnegative")
    if N <= 0:
        raise DomainError("N must be positive")
    k = params.kappa
    kk = k * (1.0 - k)
    variance = 1.0 + 2.0 * c3 ** 2 - c3 ** 3 + 0.25 * c3 ** 4
    bracket = (-(4.0 - kk) + 0.5 * c3 * (5.0 + 2.0 * kk)
               + c3 ** 2 * (2.0 + kk) / 6.0 - c3 ** 3 / 8.0)
    bias_sq = c3 ** 2 * c5 ** 2 * bracket ** 2
    return (bias_sq + variance) / N


def predict_mse_prop1(params: HallParams, n: int, c6: float) -> float:
    """Optimal-r plug-in MSE: (1/2) s^-1 A^2 a^2 b^-1 (a+2b)^-1 {c6(a+2b)-1}^2 n^-2 (ln n)^2."""
    a, b = params.alpha, params.beta
    s = r_scale_constant(params)
    return (0.5 / s * params.A ** 2 * a ** 2 / b / (a + 2.0 * b)
            * (c6 * (a + 2.0 * b) - 1.0) ** 2 * n ** (-2.0) * math.log(n) ** 2)


def predict_mse_thm1(params, n: int, u: float, h, k: KernelSpec = GAUSSIAN):
    """Asymptotic MSE of the kernel mean-excess estimator.

    Heavy-tail branch (alpha > 2 required by the displayed variance):
    h^4 mu2^2 a^2 (a-1)^-2 u^-2
      + n^-1 2 A^-1 (a-1)^-2 u^(a+2) {(a-1)/(a-2) - a h psi / u}.
    For light tails only order-of-magnitude envelopes exist; they are returned
    as a non-assertable MefMseEnvelope.
    """
    hv = h.h if isinstance(h, Bandwidth) else float(h)
    if u <= 0:
        raise DomainError("threshold must be positive")
    if isinstance(params, WeibullTailParams):
        C, kap = params.C, params.kappa
        return MefMseEnvelope(
            bias_order=hv ** 4 * k.mu2 ** 2 * u ** (4.0 * kap - 2.0),
            variance_order=u ** 2 * math.exp(C * u ** kap) / n,
        )
    if not isinstance(params, HallParams):
        raise TypeError(f"unsupported parameter type {type(params).__name__}")
    a, A = params.alpha, params.A
    if a <= 2.0:
        raise DomainError(
            "the displayed variance carries a 1/(alpha-2) factor; need alpha > 2")
    bias = hv ** 4 * k.mu2 ** 2 * a ** 2 / (a - 1.0) ** 2 / u ** 2
    var = (2.0 / A / (a - 1.0) ** 2 * u ** (a + 2.0)
           * ((a - 1.0) / (a - 2.0) - a * hv * k.psi / u)) / n
    return bias + var


def _lambda_n(params, n: int, u: float) -> float:
    if isinstance(params, HallParams):
        a, b = params.alpha, params.beta
        return math.sqrt(n) * (-math.sqrt(params.A) * params.B * b / (a + b)
                               * u ** (-a / 2.0 - b))
    C, k = params.C, params.kappa
    return math.sqrt(n) * (C * k) ** (-2.0) * u ** (-2.0 * k) * math.exp(-0.5 * C * u ** k)


def predict_mse_cor6(params, u: float, n: int, N_star: float,
                     e_u: float | None = None) -> float:
    """Predicted MSE of the GPD-fit mean-excess estimator at threshold u.

    Heavy-tail branch needs alpha > 1 and the true mean excess e(u) (pass the
    quadrature value); the light-tail branch is fully explicit in (C, kappa).
    """
    if N_star <= 0:
        raise DomainError("N_star must be positive")
    lam = _lambda_n(params, n, u)
    if isinstance(params, HallParams):
        a, b = params.alpha, params.beta
        if a <= 1.0:
            raise DomainError("mean excess requires alpha > 1")
        if e_u is None:
            raise DomainError("the heavy-tail branch needs the true mean excess e(u)")
        g = 1.0 / a
        bias_sq = (lam ** 2 * e_u ** 2 * (1.0 + g) ** 2
                   * (1.0 + g / (1.0 - g) * (1.0 - b) / (a + b + 1.0)) ** 2)
        var = e_u ** 2 * (1.0 + g) * (1.0 - g) ** 2 * (2.0 * g ** 2 - g + 1.0)
        return (bias_sq + var) / N_star
    if isinstance(params, WeibullTailParams):
        C, k = params.C, params.kappa
        bias_sq = lam ** 2 * u ** 2 * (k - 1.0) ** 2
        var = C ** (-2.0) * k ** (-2.0) * u ** (2.0 * (1.0 - k))
        return (bias_sq + var) / N_star
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def predict_mse_cor7(params: HallParams, u: float, n: int, s: float | None = None) -> float:
    """Predicted MSE of the plug-in mean-excess estimator u/(alpha_hat - 1).

    u^2 n^(-1 + a/(2b+a)) a^2 (a-1)^-4 {A^(-2b/a) B^2 b^2 (a+b)^-2 s^(2b/a) + 1/s}.
    """
    a, b = params.alpha, params.beta
    if a <= 1.0:
        raise DomainError("mean excess requires alpha > 1")
    if s is None:
        s = r_scale_constant(params)
    lead = u ** 2 * float(n) ** (-1.0 + a / (2.0 * b + a)) * a ** 2 / (a - 1.0) ** 4
    inner = (params.A ** (-2.0 * b / a) * params.B ** 2 * b ** 2 / (a + b) ** 2
             * s ** (2.0 * b / a) + 1.0 / s)
    return lead * inner
