"""Trial-level protocol simulation of the three opportunistic relaying
schemes under selection or maximal ratio combining.

The engine partitions trials into fixed-size blocks; every (block, link)
pair draws from its own random stream derived from the master seed, so
failure counts are bit-identical for any worker count and scheduling
order.  Aggregation is a plain sum of per-block failure counts.

Coupled mode evaluates several schemes on the same channel draws, which
turns scheme comparisons into paired comparisons with far lower variance
and makes the per-trial dominance of the adaptive scheme directly
observable.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from statistics import NormalDist

import numpy as np

from .analytic import RateSpec
from .channel import (
    LinkSnr,
    NetworkSpec,
    PowerSpec,
    make_stream,
    network_link_snrs,
    sample_snr,
)

BLOCK_SIZE = 1 << 16


class Scheme(Enum):
    DFAF = "dfaf"
    DF = "df"
    AF = "af"


class Combiner(Enum):
    SC = "sc"
    MRC = "mrc"


@dataclass(frozen=True)
class TrialOutcome:
    """Everything one protocol round produced, kept for invariant checks."""

    gamma0: float
    gamma1: tuple[float, ...]
    gamma2: tuple[float, ...]
    decoded: tuple[bool, ...]
    equivalent_snr: tuple[float, ...]  # adaptive per-relay equivalents
    selected_index: int | None
    combined_snr: float
    outage: bool


@dataclass(frozen=True)
class OutageEstimate:
    probability: float
    trials: int
    failures: int
    ci_low: float
    ci_high: float
    confidence: float
    master_seed: int


@dataclass(frozen=True)
class CoupledEstimates:
    """Per-scheme estimates from shared channel draws, plus the number of
    trials in which the adaptive scheme's combined SNR fell below another
    scheme's (zero when the adaptive scheme was run)."""

    estimates: dict[Scheme, OutageEstimate]
    dominance_violations: dict[Scheme, int]


def wilson_interval(
    failures: int, trials: int, confidence: float = 0.99
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; stays sensible at
    the very low failure counts deep-outage points produce."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + 0.5 * confidence)
    p = failures / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


def _af_equivalent(g1, g2):
    return g1 * g2 / (g1 + g2 + 1.0)


def resolve_trial(
    gamma0: float,
    gamma1: tuple[float, ...],
    gamma2: tuple[float, ...],
    rs: RateSpec,
    scheme: Scheme,
    combiner: Combiner = Combiner.SC,
) -> TrialOutcome:
    """Pure selection and combining logic for one set of channel draws.

    The selected relay maximizes the scheme's own path metric; ties go to
    the lowest index (a zero-probability event under continuous fading,
    fixed only for determinism).  With no decoding relay the DF path
    contributes zero and the destination falls back on the direct link.
    """
    decoded = tuple(g >= rs.delta for g in gamma1)
    equivalent = tuple(
        g2 if xi else _af_equivalent(g1, g2)
        for g1, g2, xi in zip(gamma1, gamma2, decoded)
    )
    if scheme is Scheme.DFAF:
        metric = equivalent
    elif scheme is Scheme.DF:
        metric = tuple(g2 if xi else 0.0 for g2, xi in zip(gamma2, decoded))
    else:
        metric = tuple(_af_equivalent(g1, g2) for g1, g2 in zip(gamma1, gamma2))

    if metric:
        selected = max(range(len(metric)), key=lambda i: (metric[i], -i))
        relay_snr = metric[selected]
    else:
        selected = None
        relay_snr = 0.0

    if combiner is Combiner.SC:
        combined = max(gamma0, relay_snr)
    else:
        combined = gamma0 + relay_snr
    return TrialOutcome(
        gamma0=gamma0,
        gamma1=gamma1,
        gamma2=gamma2,
        decoded=decoded,
        equivalent_snr=equivalent,
        selected_index=selected,
        combined_snr=combined,
        outage=combined < rs.gamma_th,
    )


def run_trial(
    net: NetworkSpec,
    power: PowerSpec,
    rs: RateSpec,
    scheme: Scheme,
    rng_stream: np.random.Generator,
    combiner: Combiner = Combiner.SC,
) -> TrialOutcome:
    """Draw all 2K+1 link SNRs from the given stream and run one round."""
    direct, relays = network_link_snrs(net, power)
    gamma0 = float(sample_snr(direct, rng_stream))
    gamma1 = tuple(float(sample_snr(first, rng_stream)) for first, _ in relays)
    gamma2 = tuple(float(sample_snr(second, rng_stream)) for _, second in relays)
    return resolve_trial(gamma0, gamma1, gamma2, rs, scheme, combiner)


def _draw_block(
    direct: LinkSnr,
    relays: tuple[tuple[LinkSnr, LinkSnr], ...],
    seed: int,
    tag: tuple[int, ...],
    block: int,
    n: int,
):
    # Link ids: 0 direct, 2i+1 first hop of relay i, 2i+2 second hop.
    g0 = sample_snr(direct, make_stream(seed, *tag, block, 0), size=n)
    k = len(relays)
    g1 = np.empty((k, n))
    g2 = np.empty((k, n))
    for i, (first, second) in enumerate(relays):
        g1[i] = sample_snr(first, make_stream(seed, *tag, block, 2 * i + 1), size=n)
        g2[i] = sample_snr(second, make_stream(seed, *tag, block, 2 * i + 2), size=n)
    return g0, g1, g2


def _combined_snr_block(g0, g1, g2, rs: RateSpec, scheme: Scheme, combiner: Combiner):
    """Vectorized counterpart of resolve_trial over a block of draws."""
    if g1.shape[0] == 0:
        relay = np.zeros_like(g0)
    else:
        if scheme is Scheme.DFAF:
            metric = np.where(g1 >= rs.delta, g2, _af_equivalent(g1, g2))
        elif scheme is Scheme.DF:
            metric = np.where(g1 >= rs.delta, g2, 0.0)
        else:
            metric = _af_equivalent(g1, g2)
        relay = metric.max(axis=0)
    if combiner is Combiner.SC:
        return np.maximum(g0, relay)
    return g0 + relay


def _block_counts(
    net: NetworkSpec,
    power: PowerSpec,
    rs: RateSpec,
    schemes: tuple[Scheme, ...],
    combiner: Combiner,
    trials: int,
    seed: int,
    tag: tuple[int, ...],
    block_lo: int,
    block_hi: int,
) -> tuple[dict[Scheme, int], dict[Scheme, int]]:
    """Failure counts per scheme (shared draws) plus counts of trials where
    the adaptive scheme's combined SNR fell strictly below another's, over
    the block index range [block_lo, block_hi)."""
    direct, relays = network_link_snrs(net, power)
    failures = {s: 0 for s in schemes}
    violations = {s: 0 for s in schemes if s is not Scheme.DFAF}
    for block in range(block_lo, block_hi):
        n = min(BLOCK_SIZE, trials - block * BLOCK_SIZE)
        if n <= 0:
            break
        g0, g1, g2 = _draw_block(direct, relays, seed, tag, block, n)
        combined = {
            s: _combined_snr_block(g0, g1, g2, rs, s, combiner) for s in schemes
        }
        for s in schemes:
            failures[s] += int(np.count_nonzero(combined[s] < rs.gamma_th))
        if Scheme.DFAF in combined:
            for s in violations:
                violations[s] += int(
                    np.count_nonzero(combined[Scheme.DFAF] < combined[s])
                )
    return failures, violations


def _run_counts(
    net, power, rs, schemes, combiner, trials, seed, tag, workers
) -> tuple[dict[Scheme, int], dict[Scheme, int]]:
    n_blocks = -(-trials // BLOCK_SIZE)
    if workers <= 1 or n_blocks == 1:
        return _block_counts(
            net, power, rs, schemes, combiner, trials, seed, tag, 0, n_blocks
        )
    workers = min(workers, n_blocks)
    bounds = np.linspace(0, n_blocks, workers + 1).astype(int)
    failures = {s: 0 for s in schemes}
    violations = {s: 0 for s in schemes if s is not Scheme.DFAF}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(
                _block_counts,
                net, power, rs, schemes, combiner, trials, seed, tag,
                int(lo), int(hi),
            )
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]
        for fut in futures:
            part_fail, part_viol = fut.result()
            for s, c in part_fail.items():
                failures[s] += c
            for s, c in part_viol.items():
                violations[s] += c
    return failures, violations


def _check_run_args(trials: int, seed: int) -> None:
    if trials < 1000:
        raise ValueError(f"need at least 1000 trials for a usable estimate, got {trials}")
    if seed < 0:
        raise ValueError("seed must be nonnegative")


def _estimate(failures: int, trials: int, confidence: float, seed: int) -> OutageEstimate:
    lo, hi = wilson_interval(failures, trials, confidence)
    return OutageEstimate(
        probability=failures / trials,
        trials=trials,
        failures=failures,
        ci_low=lo,
        ci_high=hi,
        confidence=confidence,
        master_seed=seed,
    )


def estimate_outage(
    net: NetworkSpec,
    power: PowerSpec,
    rs: RateSpec,
    scheme: Scheme,
    trials: int,
    seed: int,
    confidence: float = 0.99,
    combiner: Combiner = Combiner.SC,
    workers: int = 1,
    stream_tag: tuple[int, ...] = (),
) -> OutageEstimate:
    """Monte Carlo outage estimate with a Wilson score interval.

    stream_tag namespaces the random streams, so runs that must be
    independent (different grid points, different schemes in uncoupled
    mode) pass distinct tags.
    """
    _check_run_args(trials, seed)
    failures, _ = _run_counts(
        net, power, rs, (scheme,), combiner, trials, seed, stream_tag, workers
    )
    return _estimate(failures[scheme], trials, confidence, seed)


def estimate_outage_coupled(
    net: NetworkSpec,
    power: PowerSpec,
    rs: RateSpec,
    schemes: tuple[Scheme, ...],
    trials: int,
    seed: int,
    confidence: float = 0.99,
    combiner: Combiner = Combiner.SC,
    workers: int = 1,
    stream_tag: tuple[int, ...] = (),
) -> CoupledEstimates:
    """Run several schemes on identical channel draws (paired comparison)."""
    _check_run_args(trials, seed)
    if not schemes:
        raise ValueError("need at least one scheme")
    failures, violations = _run_counts(
        net, power, rs, tuple(schemes), combiner, trials, seed, stream_tag, workers
    )
    return CoupledEstimates(
        estimates={
            s: _estimate(failures[s], trials, confidence, seed) for s in schemes
        },
        dominance_violations=violations,
    )


def scale_power(power: PowerSpec, snr: float) -> PowerSpec:
    """Scale all transmit powers by the linear sweep variable snr."""
    if not snr > 0.0:
        raise ValueError(f"snr must be positive, got {snr}")
    return PowerSpec(
        source_power=power.source_power * snr,
        relay_power=power.relay_power * snr,
        noise_variance=power.noise_variance,
        direct_power=None if power.direct_power is None else power.direct_power * snr,
    )


MIN_RELIABLE_FAILURES = 30


def estimate_curve(
    net: NetworkSpec,
    power: PowerSpec,
    rs: RateSpec,
    scheme: Scheme,
    snr_grid_db: list[float],
    trials: int,
    seed: int,
    confidence: float = 0.99,
    combiner: Combiner = Combiner.SC,
    workers: int = 1,
) -> list[tuple[float, OutageEstimate]]:
    """One outage estimate per grid point, each from disjoint streams."""
    if not snr_grid_db:
        raise ValueError("snr grid must be nonempty")
    if any(b <= a for a, b in zip(snr_grid_db, snr_grid_db[1:])):
        raise ValueError("snr grid must be strictly increasing")
    curve = []
    for idx, snr_db in enumerate(snr_grid_db):
        est = estimate_outage(
            net,
            scale_power(power, 10.0 ** (snr_db / 10.0)),
            rs,
            scheme,
            trials,
            seed,
            confidence,
            combiner,
            workers,
            stream_tag=(idx,),
        )
        if est.failures < MIN_RELIABLE_FAILURES:
            warnings.warn(
                f"only {est.failures} failures at {snr_db} dB "
                f"({trials} trials); estimate unreliable",
                stacklevel=2,
            )
        curve.append((snr_db, est))
    return curve
