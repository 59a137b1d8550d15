"""Scenario definitions, preset experiment configurations, diversity-slope
fitting, power-allocation sweeps, and CSV emission.

A scenario is a parameter bundle, not code: network shapes, rate, powers,
SNR grid, schemes, and which outputs to produce.  Presets reproduce the
comparative experiments at desk scale; scenario files hold the same
bundles in YAML form (see the scenarios/ directory for annotated
examples).

Curve tables use a fixed column set so emitted CSV files are stable:
snr_db, scheme, combiner, outage_analytic, outage_asymptotic, outage_mc,
mc_ci_low, mc_ci_high, trials, failures.  Columns a scenario did not
request stay empty.  Alpha-sweep, diversity-surface, slope-fit, and AF
bound tables have their own documented column sets.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, fields
from itertools import product
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np
import yaml

from . import analytic
from .analytic import RateSpec
from .channel import ChannelSpec, NetworkSpec, PowerSpec, network_link_snrs
from .montecarlo import (
    MIN_RELIABLE_FAILURES,
    Combiner,
    OutageEstimate,
    Scheme,
    estimate_outage,
    estimate_outage_coupled,
    scale_power,
)


class ScenarioError(ValueError):
    """Configuration problem: unknown preset, malformed scenario file, or
    an inconsistent scheme/combiner/output combination."""


class ZeroOutageError(RuntimeError):
    """A log-log slope fit hit an outage value of zero inside the window."""


VALID_OUTPUTS = frozenset({"analytic", "asymptotic", "montecarlo", "bounds"})


@dataclass(frozen=True)
class Scenario:
    name: str
    network: NetworkSpec
    rate: RateSpec
    power: PowerSpec
    schemes: tuple[Scheme, ...]
    combiner: Combiner
    outputs: frozenset[str]
    snr_grid_db: tuple[float, ...] | None = None
    trials: int = 10**6
    seed: int = 12345
    confidence: float = 0.99
    coupled: bool = False
    mc_max_snr_db: float | None = 25.0
    kind: str = "curve"  # curve | alpha_sweep | diversity_surface
    alphas: tuple[float, ...] | None = None
    total_power: float | None = None
    surface_shapes: tuple[float, ...] | None = None
    fit_window_db: tuple[float, float] = (35.0, 45.0)

    def __post_init__(self) -> None:
        bad = set(self.outputs) - VALID_OUTPUTS
        if bad:
            raise ScenarioError(f"unknown outputs {sorted(bad)}; valid: {sorted(VALID_OUTPUTS)}")
        if self.kind not in ("curve", "alpha_sweep", "diversity_surface"):
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        if not self.schemes:
            raise ScenarioError("scenario needs at least one scheme")


@dataclass(frozen=True)
class CurveRow:
    snr_db: float
    scheme: str
    combiner: str
    outage_analytic: float | None = None
    outage_asymptotic: float | None = None
    outage_mc: float | None = None
    mc_ci_low: float | None = None
    mc_ci_high: float | None = None
    trials: int | None = None
    failures: int | None = None


@dataclass(frozen=True)
class AlphaRow:
    alpha: float
    scheme: str
    combiner: str
    outage_mc: float
    mc_ci_low: float
    mc_ci_high: float
    trials: int
    failures: int


@dataclass(frozen=True)
class SurfaceRow:
    shape_first_hop: float
    shape_second_hop: float
    diversity_theory: float
    fitted_slope: float
    residual: float
    window_lo_db: float
    window_hi_db: float


@dataclass(frozen=True)
class FitRow:
    scheme: str
    combiner: str
    window_lo_db: float
    window_hi_db: float
    fitted_slope: float
    theoretical_d: float
    residual: float
    n_points: int


@dataclass(frozen=True)
class BoundsRow:
    snr_db: float
    relay_index: int
    m_min: float
    bound_low: float
    bound_high: float
    af_path_cdf: float


@dataclass(frozen=True)
class DiversityFit:
    fitted_slope: float
    theoretical_d: float
    snr_window_db: tuple[float, float]
    residual: float


def fit_diversity(
    curve: Sequence[tuple[float, float]],
    window_db: tuple[float, float],
    theoretical_d: float = math.nan,
) -> DiversityFit:
    """Least-squares slope of log10(outage) against log10(linear SNR) over
    the dB window, negated so a diversity order comes out positive."""
    lo, hi = window_db
    pts = [(db, p) for db, p in curve if lo <= db <= hi]
    if len(pts) < 3:
        raise ScenarioError(
            f"need at least 3 curve points inside [{lo}, {hi}] dB, found {len(pts)}"
        )
    if any(p <= 0.0 for _, p in pts):
        raise ZeroOutageError(
            f"zero outage value inside the fit window [{lo}, {hi}] dB"
        )
    x = np.array([db / 10.0 for db, _ in pts])  # log10 of linear SNR
    y = np.log10([p for _, p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return DiversityFit(
        fitted_slope=float(-slope),
        theoretical_d=theoretical_d,
        snr_window_db=(lo, hi),
        residual=resid,
    )


_ANALYTIC_FNS: dict[Scheme, Callable] = {
    Scheme.DFAF: analytic.outage_dfaf_sc,
    Scheme.DF: analytic.outage_df_sc,
    Scheme.AF: analytic.outage_af_sc,
}


def analytic_outage(s: Scenario, scheme: Scheme, snr: float) -> float:
    return _ANALYTIC_FNS[scheme](s.network, s.power, s.rate, snr)


def _validate_curve_scenario(s: Scenario) -> None:
    if s.kind != "curve":
        raise ScenarioError(
            f"scenario {s.name!r} has kind {s.kind!r}; run it with the "
            "matching command (sweep-alpha or fit-diversity)"
        )
    if not s.snr_grid_db:
        raise ScenarioError(f"scenario {s.name!r} has no SNR grid")
    if any(b <= a for a, b in zip(s.snr_grid_db, s.snr_grid_db[1:])):
        raise ScenarioError("snr_grid_db must be strictly increasing")
    closed_form = s.outputs & {"analytic", "asymptotic", "bounds"}
    if closed_form and s.combiner is Combiner.MRC:
        raise ScenarioError(
            f"outputs {sorted(closed_form)} are selection-combining only; "
            "MRC outage has no closed form here and comes from Monte Carlo "
            "(set outputs to montecarlo)"
        )
    if "asymptotic" in s.outputs and not s.power.is_equal_power:
        raise ScenarioError(
            "asymptotic output needs equal transmit power on all links"
        )
    if "bounds" in s.outputs and Scheme.AF not in s.schemes:
        raise ScenarioError("bounds output applies to the AF scheme only")


def _warn_if_unreliable(est: OutageEstimate, where: str) -> None:
    if est.failures < MIN_RELIABLE_FAILURES:
        warnings.warn(
            f"only {est.failures} failures at {where} ({est.trials} trials); "
            "estimate unreliable",
            stacklevel=3,
        )


def run_scenario(s: Scenario, workers: int = 1) -> list[CurveRow]:
    """Produce the curve table: one row per (snr_db, scheme)."""
    _validate_curve_scenario(s)
    mc_wanted = "montecarlo" in s.outputs
    mc_cut = math.inf if s.mc_max_snr_db is None else s.mc_max_snr_db

    estimates: dict[tuple[int, Scheme], OutageEstimate] = {}
    if mc_wanted:
        for idx, snr_db in enumerate(s.snr_grid_db):
            if snr_db > mc_cut:
                continue
            point_power = scale_power(s.power, 10.0 ** (snr_db / 10.0))
            if s.coupled:
                coupled = estimate_outage_coupled(
                    s.network, point_power, s.rate, s.schemes,
                    s.trials, s.seed, s.confidence, s.combiner, workers,
                    stream_tag=(idx,),
                )
                for scheme, est in coupled.estimates.items():
                    estimates[(idx, scheme)] = est
                    _warn_if_unreliable(est, f"{snr_db} dB ({scheme.value})")
            else:
                for si, scheme in enumerate(s.schemes):
                    est = estimate_outage(
                        s.network, point_power, s.rate, scheme,
                        s.trials, s.seed, s.confidence, s.combiner, workers,
                        stream_tag=(idx, si),
                    )
                    estimates[(idx, scheme)] = est
                    _warn_if_unreliable(est, f"{snr_db} dB ({scheme.value})")

    rows = []
    for idx, snr_db in enumerate(s.snr_grid_db):
        snr = 10.0 ** (snr_db / 10.0)
        for scheme in s.schemes:
            exact = asym = None
            if "analytic" in s.outputs:
                exact = analytic_outage(s, scheme, snr)
            if "asymptotic" in s.outputs and scheme is not Scheme.AF:
                asym = analytic.asymptotic_outage_dfaf(s.network, s.power, s.rate, snr)
            est = estimates.get((idx, scheme))
            rows.append(
                CurveRow(
                    snr_db=snr_db,
                    scheme=scheme.value,
                    combiner=s.combiner.value,
                    outage_analytic=exact,
                    outage_asymptotic=asym,
                    outage_mc=None if est is None else est.probability,
                    mc_ci_low=None if est is None else est.ci_low,
                    mc_ci_high=None if est is None else est.ci_high,
                    trials=None if est is None else est.trials,
                    failures=None if est is None else est.failures,
                )
            )
    return rows


def af_bounds_rows(s: Scenario) -> list[BoundsRow]:
    """Companion table for the AF scheme: asymptotic sandwich of each relay
    path's CDF at gamma_th, per grid point."""
    _validate_curve_scenario(s)
    rows = []
    for snr_db in s.snr_grid_db:
        snr = 10.0 ** (snr_db / 10.0)
        _, relays = network_link_snrs(s.network, s.power, snr)
        for i, (first, second) in enumerate(relays):
            b = analytic.af_bounds(first, second, s.rate)
            rows.append(
                BoundsRow(
                    snr_db=snr_db,
                    relay_index=i,
                    m_min=b.m_min,
                    bound_low=b.lower,
                    bound_high=b.upper,
                    af_path_cdf=analytic.af_path_cdf(first, second, s.rate.gamma_th),
                )
            )
    return rows


def sweep_alpha(s: Scenario, workers: int = 1) -> list[AlphaRow]:
    """Monte Carlo outage per (power split alpha, scheme) at fixed total
    power, coupled trials across schemes at each alpha."""
    if s.kind != "alpha_sweep":
        raise ScenarioError(f"scenario {s.name!r} is not an alpha sweep")
    if not s.alphas:
        raise ScenarioError("alpha sweep needs a nonempty alphas list")
    if any(not 0.0 < a < 1.0 for a in s.alphas):
        raise ScenarioError("every alpha must lie strictly inside (0, 1)")
    if s.total_power is None or not s.total_power > 0.0:
        raise ScenarioError("alpha sweep needs a positive total_power")
    if s.combiner is not Combiner.MRC:
        raise ScenarioError("the power-allocation comparison is defined for MRC")
    rows = []
    for idx, alpha in enumerate(s.alphas):
        point_power = PowerSpec.from_alpha(
            alpha, s.total_power, s.power.noise_variance
        )
        coupled = estimate_outage_coupled(
            s.network, point_power, s.rate, s.schemes,
            s.trials, s.seed, s.confidence, s.combiner, workers,
            stream_tag=(idx,),
        )
        for scheme in s.schemes:
            est = coupled.estimates[scheme]
            _warn_if_unreliable(est, f"alpha={alpha} ({scheme.value})")
            rows.append(
                AlphaRow(
                    alpha=alpha,
                    scheme=scheme.value,
                    combiner=s.combiner.value,
                    outage_mc=est.probability,
                    mc_ci_low=est.ci_low,
                    mc_ci_high=est.ci_high,
                    trials=est.trials,
                    failures=est.failures,
                )
            )
    return rows


def _surface_fit_grid(window: tuple[float, float]) -> list[float]:
    lo, hi = window
    return [lo + i for i in range(int(round(hi - lo)) + 1)]


def run_diversity_surface(s: Scenario) -> list[SurfaceRow]:
    """Fitted high-SNR slope of the exact outage for a two-relay symmetric
    network over a grid of hop shapes, against the predicted diversity."""
    if s.kind != "diversity_surface":
        raise ScenarioError(f"scenario {s.name!r} is not a diversity surface")
    if not s.surface_shapes:
        raise ScenarioError("diversity surface needs a surface_shapes grid")
    grid_db = _surface_fit_grid(s.fit_window_db)
    rows = []
    for g1, g2 in product(s.surface_shapes, repeat=2):
        net = NetworkSpec(
            direct=s.network.direct,
            relays=((ChannelSpec(m=g1), ChannelSpec(m=g2)),) * 2,
        )
        curve = [
            (db, analytic.outage_dfaf_sc(net, s.power, s.rate, 10.0 ** (db / 10.0)))
            for db in grid_db
        ]
        fit = fit_diversity(
            curve, s.fit_window_db, theoretical_d=analytic.diversity_order_dfaf(net)
        )
        rows.append(
            SurfaceRow(
                shape_first_hop=g1,
                shape_second_hop=g2,
                diversity_theory=fit.theoretical_d,
                fitted_slope=fit.fitted_slope,
                residual=fit.residual,
                window_lo_db=s.fit_window_db[0],
                window_hi_db=s.fit_window_db[1],
            )
        )
    return rows


def fit_scenario_curves(
    s: Scenario, window_db: tuple[float, float] | None = None
) -> list[FitRow]:
    """Diversity fit of each scheme's exact closed-form curve."""
    _validate_curve_scenario(s)
    window = window_db or s.fit_window_db
    grid_db = _surface_fit_grid(window)
    d = analytic.diversity_order_dfaf(s.network)
    rows = []
    for scheme in s.schemes:
        curve = [
            (db, analytic_outage(s, scheme, 10.0 ** (db / 10.0))) for db in grid_db
        ]
        fit = fit_diversity(curve, window, theoretical_d=d)
        rows.append(
            FitRow(
                scheme=scheme.value,
                combiner=s.combiner.value,
                window_lo_db=window[0],
                window_hi_db=window[1],
                fitted_slope=fit.fitted_slope,
                theoretical_d=fit.theoretical_d,
                residual=fit.residual,
                n_points=len(grid_db),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# CSV emission


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    # str() of a float is the shortest round-trip representation
    return str(value)


def write_csv(rows: Iterable, out: TextIO) -> None:
    """Write dataclass rows as CSV; all rows must share one type."""
    rows = list(rows)
    if not rows:
        raise ScenarioError("no rows to write")
    columns = [f.name for f in fields(rows[0])]
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(getattr(row, name)) for name in columns])


def csv_text(rows: Iterable) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


_CURVE_PARSERS = {
    "snr_db": float,
    "scheme": str,
    "combiner": str,
    "outage_analytic": float,
    "outage_asymptotic": float,
    "outage_mc": float,
    "mc_ci_low": float,
    "mc_ci_high": float,
    "trials": int,
    "failures": int,
}


def read_curve_csv(text: str) -> list[CurveRow]:
    """Parse an emitted curve table back into rows (exact round trip)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    expected = list(_CURVE_PARSERS)
    if header != expected:
        raise ScenarioError(f"unexpected curve CSV header {header}; want {expected}")
    rows = []
    for rec in reader:
        values = {
            name: (None if cell == "" else _CURVE_PARSERS[name](cell))
            for name, cell in zip(header, rec)
        }
        rows.append(CurveRow(**values))
    return rows


# ---------------------------------------------------------------------------
# Presets: the comparative experiment configurations at desk scale.

_R = RateSpec(rate=1.0)
_GRID_FULL = tuple(float(x) for x in range(0, 51, 5))
_GRID_MC = tuple(float(x) for x in range(0, 26, 5))
_NAKAGAMI_3RELAY = NetworkSpec.from_shapes(0.5, [1.0, 1.0, 2.0], [1.0, 1.0, 1.0])


def _rayleigh_curve(name: str, num_relays: int) -> Scenario:
    return Scenario(
        name=name,
        network=NetworkSpec.rayleigh(num_relays),
        rate=_R,
        power=PowerSpec.equal(),
        schemes=(Scheme.DFAF, Scheme.DF, Scheme.AF),
        combiner=Combiner.SC,
        outputs=frozenset({"analytic", "asymptotic", "montecarlo"}),
        snr_grid_db=_GRID_FULL,
    )


def _nakagami_curve() -> Scenario:
    return Scenario(
        name="fig3_nakagami_3relay",
        network=_NAKAGAMI_3RELAY,
        rate=_R,
        power=PowerSpec.equal(),
        schemes=(Scheme.DFAF, Scheme.DF, Scheme.AF),
        combiner=Combiner.SC,
        outputs=frozenset({"analytic", "asymptotic", "montecarlo"}),
        snr_grid_db=_GRID_FULL,
    )


def _vary_k(num_relays: int) -> Scenario:
    return Scenario(
        name=f"fig4_K{num_relays}",
        network=NetworkSpec.from_shapes(0.8, [1.0] * num_relays, [1.0] * num_relays),
        rate=_R,
        power=PowerSpec.equal(),
        schemes=(Scheme.DFAF,),
        combiner=Combiner.SC,
        outputs=frozenset({"analytic", "asymptotic"}),
        snr_grid_db=_GRID_FULL,
    )


def _diversity_surface() -> Scenario:
    return Scenario(
        name="fig6_diversity_surface",
        network=NetworkSpec(direct=ChannelSpec(m=0.5)),
        rate=_R,
        power=PowerSpec.equal(),
        schemes=(Scheme.DFAF,),
        combiner=Combiner.SC,
        outputs=frozenset({"analytic"}),
        kind="diversity_surface",
        surface_shapes=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
    )


def _mrc_compare() -> Scenario:
    return Scenario(
        name="fig7_mrc_compare",
        network=_NAKAGAMI_3RELAY,
        rate=_R,
        power=PowerSpec.equal(),
        schemes=(Scheme.DFAF, Scheme.DF, Scheme.AF),
        combiner=Combiner.MRC,
        outputs=frozenset({"montecarlo"}),
        snr_grid_db=_GRID_MC,
        coupled=True,
    )


def _alpha_sweep() -> Scenario:
    return Scenario(
        name="fig8_alpha_sweep",
        network=_NAKAGAMI_3RELAY,
        rate=_R,
        power=PowerSpec.equal(),
        schemes=(Scheme.DFAF, Scheme.DF, Scheme.AF),
        combiner=Combiner.MRC,
        outputs=frozenset({"montecarlo"}),
        kind="alpha_sweep",
        alphas=tuple(round(0.1 * i, 1) for i in range(1, 10)),
        total_power=10.0,  # 10 dB above unit noise
        coupled=True,
    )


_PRESET_FACTORIES: dict[str, Callable[[], tuple[Scenario, ...]]] = {
    "fig2_rayleigh_K1": lambda: (_rayleigh_curve("fig2_rayleigh_K1", 1),),
    "fig2_rayleigh_K2": lambda: (_rayleigh_curve("fig2_rayleigh_K2", 2),),
    "fig2_rayleigh_K3": lambda: (_rayleigh_curve("fig2_rayleigh_K3", 3),),
    "fig3_nakagami_3relay": lambda: (_nakagami_curve(),),
    "fig4_K1": lambda: (_vary_k(1),),
    "fig4_K2": lambda: (_vary_k(2),),
    "fig4_K3": lambda: (_vary_k(3),),
    "fig4_varyK": lambda: (_vary_k(1), _vary_k(2), _vary_k(3)),
    "fig6_diversity_surface": lambda: (_diversity_surface(),),
    "fig7_mrc_compare": lambda: (_mrc_compare(),),
    "fig8_alpha_sweep": lambda: (_alpha_sweep(),),
}


def preset_names() -> list[str]:
    return sorted(_PRESET_FACTORIES)


def preset(name: str) -> tuple[Scenario, ...]:
    try:
        factory = _PRESET_FACTORIES[name]
    except KeyError:
        raise ScenarioError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return factory()


# ---------------------------------------------------------------------------
# Scenario files (YAML)


def _channel_from_dict(d: dict) -> ChannelSpec:
    return ChannelSpec(m=float(d["m"]), omega=float(d.get("omega", 1.0)))


def _grid_from_config(cfg) -> tuple[float, ...]:
    if isinstance(cfg, dict):
        start, stop, step = float(cfg["start"]), float(cfg["stop"]), float(cfg["step"])
        if step <= 0:
            raise ScenarioError("snr grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(n))
    return tuple(float(x) for x in cfg)


def scenario_from_dict(cfg: dict) -> Scenario:
    try:
        net_cfg = cfg["network"]
        network = NetworkSpec(
            direct=_channel_from_dict(net_cfg["direct"]),
            relays=tuple(
                (
                    _channel_from_dict(r["first_hop"]),
                    _channel_from_dict(r["second_hop"]),
                )
                for r in net_cfg.get("relays", [])
            ),
        )
        rate_cfg = cfg.get("rate", {"rate": 1.0})
        rate = RateSpec(
            rate=float(rate_cfg["rate"]),
            gamma_th=(
                float(rate_cfg["gamma_th"]) if "gamma_th" in rate_cfg else None
            ),
        )
        pw_cfg = cfg.get("power", {})
        power = PowerSpec(
            source_power=float(pw_cfg.get("source_power", 1.0)),
            relay_power=float(pw_cfg.get("relay_power", 1.0)),
            noise_variance=float(pw_cfg.get("noise_variance", 1.0)),
            direct_power=(
                float(pw_cfg["direct_power"]) if "direct_power" in pw_cfg else None
            ),
        )
        kwargs = {}
        if "snr_grid_db" in cfg:
            kwargs["snr_grid_db"] = _grid_from_config(cfg["snr_grid_db"])
        if "alphas" in cfg:
            kwargs["alphas"] = tuple(float(a) for a in cfg["alphas"])
        if "total_power" in cfg:
            kwargs["total_power"] = float(cfg["total_power"])
        if "surface_shapes" in cfg:
            kwargs["surface_shapes"] = tuple(float(g) for g in cfg["surface_shapes"])
        if "fit_window_db" in cfg:
            lo, hi = cfg["fit_window_db"]
            kwargs["fit_window_db"] = (float(lo), float(hi))
        if "mc_max_snr_db" in cfg:
            v = cfg["mc_max_snr_db"]
            kwargs["mc_max_snr_db"] = None if v is None else float(v)
        return Scenario(
            name=str(cfg["name"]),
            network=network,
            rate=rate,
            power=power,
            schemes=tuple(Scheme(str(x).lower()) for x in cfg["schemes"]),
            combiner=Combiner(str(cfg.get("combiner", "sc")).lower()),
            outputs=frozenset(str(x).lower() for x in cfg.get("outputs", ["analytic"])),
            trials=int(cfg.get("trials", 10**6)),
            seed=int(cfg.get("seed", 12345)),
            confidence=float(cfg.get("confidence", 0.99)),
            coupled=bool(cfg.get("coupled", False)),
            kind=str(cfg.get("kind", "curve")),
            **kwargs,
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario config: {exc}") from exc


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise ScenarioError(f"{path} does not contain a scenario mapping")
    return scenario_from_dict(cfg)


def resolve_scenarios(ref: str) -> tuple[Scenario, ...]:
    """Accept a preset name or a path to a YAML scenario file."""
    if ref in _PRESET_FACTORIES:
        return preset(ref)
    import os

    if os.path.exists(ref):
        return (load_scenario(ref),)
    raise ScenarioError(
        f"{ref!r} is neither a preset nor an existing scenario file; "
        f"presets: {', '.join(preset_names())}"
    )
