"""Nakagami-m link model: parameter containers, per-link SNR distributions,
seedable random variate generation.

The squared envelope of a Nakagami-m channel is gamma distributed, so the
instantaneous SNR of a link with mean snr gbar has density
(1/Gamma(m)) (m/gbar)^m y^(m-1) exp(-m y / gbar).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .specfun import reg_lower_gamma


@dataclass(frozen=True)
class ChannelSpec:
    """One Nakagami-m link: shape m and spread omega = E[|h|^2]."""

    m: float
    omega: float = 1.0

    def __post_init__(self) -> None:
        if not self.m > 0.0:
            raise ValueError(f"Nakagami shape must be positive, got m={self.m}")
        if self.m < 0.5:
            raise ValueError(f"Nakagami shape must be >= 0.5, got m={self.m}")
        if not self.omega > 0.0:
            raise ValueError(f"spread must be positive, got omega={self.omega}")


@dataclass(frozen=True)
class NetworkSpec:
    """Direct source-destination link plus K two-hop relay paths."""

    direct: ChannelSpec
    relays: tuple[tuple[ChannelSpec, ChannelSpec], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "relays", tuple(tuple(pair) for pair in self.relays))
        for pair in self.relays:
            if len(pair) != 2:
                raise ValueError("each relay entry must be a (first_hop, second_hop) pair")

    @property
    def num_relays(self) -> int:
        return len(self.relays)

    @classmethod
    def rayleigh(cls, num_relays: int) -> "NetworkSpec":
        """All links Rayleigh (m = 1) with unit spread."""
        ch = ChannelSpec(m=1.0)
        return cls(direct=ch, relays=tuple((ch, ch) for _ in range(num_relays)))

    @classmethod
    def from_shapes(
        cls,
        m_direct: float,
        m_first: Sequence[float],
        m_second: Sequence[float],
        omega: float = 1.0,
    ) -> "NetworkSpec":
        """Build a network from shape lists, one entry per relay."""
        if len(m_first) != len(m_second):
            raise ValueError("m_first and m_second must have the same length")
        return cls(
            direct=ChannelSpec(m=m_direct, omega=omega),
            relays=tuple(
                (ChannelSpec(m=a, omega=omega), ChannelSpec(m=b, omega=omega))
                for a, b in zip(m_first, m_second)
            ),
        )


@dataclass(frozen=True)
class PowerSpec:
    """Transmit powers and noise level, all in linear units.

    alpha is the source share of the total transmit power.  direct_power
    is the power used on the source-destination link; it defaults to the
    source power (configurable because unequal-power operation leaves
    this choice open).
    """

    source_power: float = 1.0
    relay_power: float = 1.0
    noise_variance: float = 1.0
    direct_power: float | None = None

    def __post_init__(self) -> None:
        for name in ("source_power", "relay_power", "noise_variance"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.direct_power is not None and not self.direct_power > 0.0:
            raise ValueError("direct_power must be positive when given")

    @property
    def alpha(self) -> float:
        return self.source_power / (self.source_power + self.relay_power)

    @property
    def effective_direct_power(self) -> float:
        return self.source_power if self.direct_power is None else self.direct_power

    @property
    def is_equal_power(self) -> bool:
        return (
            self.source_power == self.relay_power
            and self.effective_direct_power == self.source_power
        )

    @classmethod
    def equal(cls, power: float = 1.0, noise_variance: float = 1.0) -> "PowerSpec":
        return cls(source_power=power, relay_power=power, noise_variance=noise_variance)

    @classmethod
    def from_alpha(
        cls, alpha: float, total_power: float, noise_variance: float = 1.0
    ) -> "PowerSpec":
        """Split a total power budget: source gets alpha, relay the rest."""
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if not total_power > 0.0:
            raise ValueError("total_power must be positive")
        return cls(
            source_power=alpha * total_power,
            relay_power=(1.0 - alpha) * total_power,
            noise_variance=noise_variance,
        )


@dataclass(frozen=True)
class LinkSnr:
    """Instantaneous-SNR distribution of one link: gamma with shape m and
    mean mean_snr, so the exponential rate parameter is m / mean_snr."""

    mean_snr: float
    m: float
    rate: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.mean_snr > 0.0:
            raise ValueError(f"mean SNR must be positive, got {self.mean_snr}")
        if not self.m > 0.0:
            raise ValueError(f"shape must be positive, got {self.m}")
        object.__setattr__(self, "rate", self.m / self.mean_snr)


def link_snr(ch: ChannelSpec, tx_power: float, n0: float) -> LinkSnr:
    """Mean-SNR descriptor of a link at the given transmit power and noise."""
    if not tx_power > 0.0:
        raise ValueError(f"tx_power must be positive, got {tx_power}")
    if not n0 > 0.0:
        raise ValueError(f"n0 must be positive, got {n0}")
    return LinkSnr(mean_snr=ch.omega * tx_power / n0, m=ch.m)


def network_link_snrs(
    net: NetworkSpec, power: PowerSpec, snr: float = 1.0
) -> tuple[LinkSnr, tuple[tuple[LinkSnr, LinkSnr], ...]]:
    """Per-link SNR descriptors with the sweep variable snr scaling every
    transmit power.  With the unit equal-power default, snr is exactly the
    transmit SNR."""
    if not snr > 0.0:
        raise ValueError(f"snr must be positive, got {snr}")
    n0 = power.noise_variance
    direct = link_snr(net.direct, power.effective_direct_power * snr, n0)
    relays = tuple(
        (
            link_snr(first, power.source_power * snr, n0),
            link_snr(second, power.relay_power * snr, n0),
        )
        for first, second in net.relays
    )
    return direct, relays


def make_stream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent random stream derived from a master seed and an integer
    key such as (block_index, link_id).  Identical (seed, key) pairs give
    bit-identical streams, which is what makes parallel runs reproducible."""
    if master_seed < 0:
        raise ValueError("master_seed must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def sample_snr(
    link: LinkSnr, rng_stream: np.random.Generator, size: int | None = None
):
    """Draw instantaneous SNR values: gamma with shape m, scale mean/m.

    numpy's generator handles shape < 1 via the boosted rejection sampler
    (draw at shape m+1, multiply by U^(1/m)), which the half-integer
    shapes here need.
    """
    return rng_stream.gamma(shape=link.m, scale=link.mean_snr / link.m, size=size)


def snr_cdf(link: LinkSnr, y: float) -> float:
    """CDF of the instantaneous SNR: P(m, m y / mean)."""
    if y < 0.0:
        raise ValueError(f"y must be nonnegative, got {y}")
    if y == 0.0:
        return 0.0
    return reg_lower_gamma(link.m, link.rate * y)
