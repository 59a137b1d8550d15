"""Exact and high-SNR closed-form outage probabilities for the three
opportunistic relaying schemes under selection combining, plus coding
gain, diversity order, and the asymptotic sandwich bounds for the
amplify-and-forward path.

All outage expressions are driven by the per-link gamma rate parameters
(shape / mean SNR), so they hold for unequal transmit powers too.  The
asymptotic expressions are derived for equal transmit power and refuse
to run otherwise.

Maximal ratio combining has no closed form here: the selection event and
the direct link are not independent under MRC, so those curves come from
the Monte Carlo engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import integrate

from .channel import LinkSnr, NetworkSpec, PowerSpec, network_link_snrs
from .specfun import (
    ln_bessel_k_int,
    ln_gamma,
    reg_lower_gamma,
    reg_lower_gamma_small_x,
    reg_upper_gamma,
)


class ClosedFormUnavailableError(ValueError):
    """The closed-form AF path CDF needs integer fading shapes."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class RateSpec:
    """Target rate and the SNR thresholds it induces.

    delta is the decode threshold 2**(2 rate) - 1 (the exponent carries
    the factor 2 of the two-slot half-duplex protocol).  gamma_th is the
    destination outage threshold and defaults to delta, the binding used
    throughout the comparative experiments; the two stay separate fields
    because the exact outage expression distinguishes them.
    """

    rate: float
    gamma_th: float | None = None
    delta: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.rate > 0.0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        object.__setattr__(self, "delta", 2.0 ** (2.0 * self.rate) - 1.0)
        if self.gamma_th is None:
            object.__setattr__(self, "gamma_th", self.delta)
        if not self.gamma_th > 0.0:
            raise ValueError(f"gamma_th must be positive, got {self.gamma_th}")


@dataclass(frozen=True)
class RelayAsymptote:
    """High-SNR factor contributed by one relay path: which hop limits it,
    the SNR exponent, and the SNR-independent coefficient."""

    branch: str  # "second_hop_limited" | "first_hop_limited" | "balanced"
    exponent: float
    coefficient: float


@dataclass(frozen=True)
class AsymptoticResult:
    coding_gain: float
    diversity_order: float
    per_relay_factors: tuple[RelayAsymptote, ...] = ()


@dataclass(frozen=True)
class AfBounds:
    """Asymptotic sandwich for the AF path CDF at the outage threshold.

    upper / lower = 2**m_min exactly; mean_snr_min is the mean SNR of the
    hop with the smaller shape (the link descriptor folds spread and
    transmit SNR together, so the bare spread is not kept separately).
    """

    lower: float
    upper: float
    m_min: float
    mean_snr_min: float


def _power_law(m: float, x: float) -> float:
    # x**m / (m * Gamma(m)), the small-argument limit of P(m, x).
    return reg_lower_gamma_small_x(m, x)


def outage_dfaf_sc(
    net: NetworkSpec, power: PowerSpec, rs: RateSpec, snr: float
) -> float:
    """Exact outage probability of adaptive decode-or-amplify relaying with
    best-relay selection and selection combining.

    Product of the direct-link outage and, per relay, the probability that
    the relay path fails: either the relay decodes (first hop clears the
    decode threshold) but the second hop falls below gamma_th, or the
    relay fails to decode, in which case the amplified path is capped by
    the first hop and cannot clear the threshold either.
    """
    direct, relays = network_link_snrs(net, power, snr)
    p = reg_lower_gamma(direct.m, direct.rate * rs.gamma_th)
    for first, second in relays:
        q_decode = reg_upper_gamma(first.m, first.rate * rs.delta)
        second_fail = reg_lower_gamma(second.m, second.rate * rs.gamma_th)
        p *= q_decode * second_fail + (1.0 - q_decode)
    return p


def outage_df_sc(
    net: NetworkSpec, power: PowerSpec, rs: RateSpec, snr: float
) -> float:
    """Exact outage of opportunistic decode-and-forward under selection
    combining.  Identical to the adaptive scheme's expression (a relay that
    cannot decode fails to clear the threshold either way once the decode
    and outage thresholds bind); kept as its own named operation so scheme
    comparison tables stay explicit."""
    return outage_dfaf_sc(net, power, rs, snr)


def _require_positive_integer_shape(m: float, which: str) -> int:
    if not float(m).is_integer() or m < 1.0:
        raise ClosedFormUnavailableError(
            f"{which} shape m={m} is not a positive integer; the finite-sum "
            "CDF needs integer shapes, use af_path_cdf_quadrature instead"
        )
    return int(m)


def af_path_cdf_closed(hop1: LinkSnr, hop2: LinkSnr, y: float) -> float:
    """CDF of the amplified two-hop SNR g1*g2/(g1+g2+1) at y, evaluated by
    the finite Bessel sum valid for integer fading shapes.

    Binomial weights are assembled in log space so shapes up to ~10 stay
    well inside double range.  The result is clamped to [0, 1] only to
    absorb last-bit rounding.
    """
    if y < 0.0:
        raise ValueError(f"y must be nonnegative, got {y}")
    if y == 0.0:
        return 0.0
    m1 = _require_positive_integer_shape(hop1.m, "first hop")
    m2 = _require_positive_integer_shape(hop2.m, "second hop")
    a1 = hop1.rate
    a2 = hop2.rate

    z = 2.0 * math.sqrt(a1 * a2 * y * (y + 1.0))
    ln_a1 = math.log(a1)
    ln_a2 = math.log(a2)
    ln_y = math.log(y)
    ln_1py = math.log1p(y)
    # (m1-1)! cancels one Gamma(m1); the remaining prefactor is
    # 2 a2^m2 exp(-(a1+a2) y) / Gamma(m2).
    ln_pref = math.log(2.0) + m2 * ln_a2 - (a1 + a2) * y - ln_gamma(m2)

    def ln_choose(n: int, k: int) -> float:
        return ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)

    total = 0.0
    for n in range(m1):
        for j in range(n + 1):
            for k in range(m2):
                order = j - k - 1
                ln_term = (
                    ln_pref
                    - ln_gamma(n + 1.0)
                    + ln_choose(n, j)
                    + ln_choose(m2 - 1, k)
                    + 0.5 * (2 * n - j + k + 1) * ln_a1
                    + 0.5 * (j - k - 1) * ln_a2
                    + 0.5 * (j + k + 1) * ln_1py
                    + 0.5 * (2 * n + 2 * m2 - j - k - 1) * ln_y
                    + ln_bessel_k_int(order, z)
                )
                total += math.exp(ln_term)
    return min(1.0, max(0.0, 1.0 - total))


def af_path_cdf_quadrature(
    hop1: LinkSnr, hop2: LinkSnr, y: float, tol: float = 1e-9
) -> float:
    """CDF of g1*g2/(g1+g2+1) from first principles, for any shapes.

    The event splits on the first hop: g1 <= y always fails, and for
    g1 = x > y the path falls below y exactly when g2 < y(x+1)/(x-y).
    Integrates the first-hop density against that conditional probability
    with adaptive quadrature.
    """
    if y < 0.0:
        raise ValueError(f"y must be nonnegative, got {y}")
    if y == 0.0:
        return 0.0
    m1, a1 = hop1.m, hop1.rate
    m2, a2 = hop2.m, hop2.rate
    ln_norm1 = m1 * math.log(a1) - ln_gamma(m1)

    def integrand(t: float) -> float:
        # t = g1 - y > 0
        x = y + t
        ln_f1 = ln_norm1 + (m1 - 1.0) * math.log(x) - a1 * x
        if ln_f1 < -745.0:
            return 0.0
        return math.exp(ln_f1) * reg_lower_gamma(m2, a2 * y * (x + 1.0) / t)

    tail, tail_err = integrate.quad(
        integrand, 0.0, math.inf, epsabs=tol * 1e-3, epsrel=1e-11, limit=500
    )
    if tail_err > tol:
        raise QuadratureError(
            f"AF path CDF quadrature error estimate {tail_err:.3e} exceeds {tol:.3e}"
        )
    head = reg_lower_gamma(m1, a1 * y)
    return min(1.0, max(0.0, head + tail))


def af_path_cdf(hop1: LinkSnr, hop2: LinkSnr, y: float) -> float:
    """Closed form when both shapes are integer, quadrature otherwise."""
    if float(hop1.m).is_integer() and float(hop2.m).is_integer():
        return af_path_cdf_closed(hop1, hop2, y)
    return af_path_cdf_quadrature(hop1, hop2, y)


def outage_af_sc(
    net: NetworkSpec, power: PowerSpec, rs: RateSpec, snr: float
) -> float:
    """Exact outage of opportunistic amplify-and-forward under selection
    combining: direct-link outage times the product of the per-relay AF
    path CDFs at gamma_th (the per-path failures are independent)."""
    direct, relays = network_link_snrs(net, power, snr)
    p = reg_lower_gamma(direct.m, direct.rate * rs.gamma_th)
    for first, second in relays:
        p *= af_path_cdf(first, second, rs.gamma_th)
    return p


def _require_equal_power(power: PowerSpec, what: str) -> None:
    if not power.is_equal_power:
        raise ValueError(
            f"{what} is derived for equal transmit power; got source "
            f"{power.source_power}, relay {power.relay_power}, direct "
            f"{power.effective_direct_power}"
        )


def _relay_asymptote(first: LinkSnr, second: LinkSnr, rs: RateSpec) -> RelayAsymptote:
    # The weaker hop (smaller shape) sets the slope.  With equal shapes
    # both hops contribute at the same order, hence the factor 2.
    if first.m > second.m:
        branch = "second_hop_limited"
        m = second.m
        coeff = _power_law(m, second.rate * rs.gamma_th)
    elif first.m < second.m:
        branch = "first_hop_limited"
        m = first.m
        coeff = _power_law(m, first.rate * rs.delta)
    else:
        branch = "balanced"
        m = first.m
        coeff = 2.0 * _power_law(m, first.rate * rs.delta)
    return RelayAsymptote(branch=branch, exponent=m, coefficient=coeff)


def asymptotic_outage_dfaf(
    net: NetworkSpec, power: PowerSpec, rs: RateSpec, snr: float
) -> float:
    """High-SNR power law for the adaptive scheme: each CDF factor of the
    exact expression is replaced by its leading small-argument term, so the
    whole product decays like snr**(-d) with the network diversity order."""
    _require_equal_power(power, "the high-SNR outage expansion")
    direct, relays = network_link_snrs(net, power, snr)
    p = _power_law(direct.m, direct.rate * rs.gamma_th)
    for first, second in relays:
        p *= _relay_asymptote(first, second, rs).coefficient
    return p


def coding_gain_dfaf(net: NetworkSpec, rs: RateSpec) -> AsymptoticResult:
    """SNR-independent coefficient g and exponent d of the high-SNR law
    outage ~ g * snr**(-d), where snr is the equal transmit SNR and each
    link's mean SNR is its spread times snr.

    The balanced branch (equal hop shapes) keeps its factor 2 so that g is
    exactly the snr-free part of the asymptotic outage expression.
    """
    factors = []
    g = _power_law(net.direct.m, net.direct.m * rs.gamma_th / net.direct.omega)
    d = net.direct.m
    for first_ch, second_ch in net.relays:
        # Unit-SNR link descriptors make rate = m / omega, which is exactly
        # the snr-free coefficient the coding gain needs.
        first = LinkSnr(mean_snr=first_ch.omega, m=first_ch.m)
        second = LinkSnr(mean_snr=second_ch.omega, m=second_ch.m)
        fac = _relay_asymptote(first, second, rs)
        factors.append(fac)
        g *= fac.coefficient
        d += fac.exponent
    return AsymptoticResult(
        coding_gain=g, diversity_order=d, per_relay_factors=tuple(factors)
    )


def diversity_order_dfaf(net: NetworkSpec) -> float:
    """Diversity order: direct shape plus the weaker shape of every relay
    path."""
    return net.direct.m + sum(min(a.m, b.m) for a, b in net.relays)


def diversity_order_af(net: NetworkSpec) -> float:
    """Opportunistic AF achieves the same diversity order as the adaptive
    scheme; only the coding gain differs."""
    return diversity_order_dfaf(net)


def af_bounds(hop1: LinkSnr, hop2: LinkSnr, rs: RateSpec) -> AfBounds:
    """Asymptotic lower/upper bounds on the AF path CDF at gamma_th.

    The amplified path SNR is sandwiched between half the weaker hop and
    the weaker hop itself, so the CDF is squeezed between the weaker hop's
    outage law at gamma_th and at 2*gamma_th; their ratio is 2**m_min.
    The hop SNR descriptors already carry the evaluation SNR.
    """
    weaker = hop1 if hop1.m <= hop2.m else hop2
    m = weaker.m
    lower = _power_law(m, weaker.rate * rs.gamma_th)
    upper = _power_law(m, weaker.rate * 2.0 * rs.gamma_th)
    return AfBounds(lower=lower, upper=upper, m_min=m, mean_snr_min=weaker.mean_snr)
