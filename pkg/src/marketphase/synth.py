"""Synthetic markets with sector labels, volumes and an optional planted epoch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import GICS_SECTORS, PricePanel
from .returns import ReturnPanel, from_log_returns
from .svm import SvmParams, _stream, make_params, normalize_beta0, sample_returns

VOLUME_STREAM = 2
DAILY_VOL = 0.01  # price-path volatility used when exporting prices


@dataclass(frozen=True)
class SynthSpec:
    n_firms: int = 120
    n_days: int = 4032
    gamma_m: float = 0.6
    gamma: object = "uniform(0.5, 1.0)"
    beta0: object = "ones"
    seed: int = 0
    sector_set: tuple[str, ...] = GICS_SECTORS
    start_date: str = "1990-01-02"
    volume_low: float = 1e5
    volume_high: float = 1e7
    volume_noise: float = 0.25
    # Planted first epoch: one sector gets stronger market coupling and volume.
    planted_sector: str | None = None
    planted_days: int = 0
    planted_beta_scale: float = 1.5
    planted_volume_scale: float = 3.0


def sector_layout(n_firms: int, sector_set) -> tuple[tuple[str, ...], np.ndarray]:
    """Round-robin sector labels and each firm's rank inside its sector."""
    s = len(sector_set)
    sectors = tuple(sector_set[i % s] for i in range(n_firms))
    return sectors, np.arange(n_firms) // s


def _volume_profile(spec: SynthSpec, ranks: np.ndarray) -> np.ndarray:
    top = max(int(ranks.max()), 1)
    return spec.volume_low * (spec.volume_high / spec.volume_low) ** (ranks / top)


def epoch_params(spec: SynthSpec) -> tuple[SvmParams, SvmParams | None]:
    base = make_params(spec.n_firms, spec.gamma_m, spec.gamma, spec.beta0, spec.seed)
    if spec.planted_sector is None or spec.planted_days <= 0:
        return base, None
    sectors, _ = sector_layout(spec.n_firms, spec.sector_set)
    mask = np.array([s == spec.planted_sector for s in sectors])
    if not mask.any():
        raise ValueError(f"planted sector {spec.planted_sector!r} has no firms")
    b = base.beta0.copy()
    b[mask] *= spec.planted_beta_scale
    planted = SvmParams(normalize_beta0(b), base.gamma_m, base.gamma, base.seed)
    return base, planted


def generate(spec: SynthSpec) -> ReturnPanel:
    """Raw SVM returns wrapped as a normalised ReturnPanel."""
    raw, dates, sectors, volumes = _generate_raw(spec)
    return from_log_returns(
        raw, dates=dates, tickers=_tickers(spec.n_firms), sectors=sectors,
        sector_set=spec.sector_set, volumes=volumes,
    )


def _tickers(n: int) -> tuple[str, ...]:
    return tuple(f"SYN{i:04d}" for i in range(n))


def _generate_raw(spec: SynthSpec):
    base, planted = epoch_params(spec)
    sectors, ranks = sector_layout(spec.n_firms, spec.sector_set)
    if planted is None:
        raw = sample_returns(base, spec.n_days, offset=0)
    else:
        first = min(spec.planted_days, spec.n_days)
        parts = [sample_returns(planted, max(first, 2), offset=1)[:, :first]]
        if spec.n_days - first > 0:
            parts.append(sample_returns(base, max(spec.n_days - first, 2), offset=0)[:, : spec.n_days - first])
        raw = np.concatenate(parts, axis=1)
    dates = np.busday_offset(
        np.datetime64(spec.start_date, "D"), np.arange(spec.n_days + 1), roll="forward"
    )
    level = _volume_profile(spec, ranks)
    volumes = np.empty((spec.n_firms, spec.n_days + 1))
    for i in range(spec.n_firms):
        noise = _stream(spec.seed, VOLUME_STREAM, i).standard_normal(spec.n_days + 1)
        volumes[i] = level[i] * np.exp(spec.volume_noise * noise)
    if planted is not None:
        mask = np.array([s == spec.planted_sector for s in sectors])
        volumes[np.ix_(mask, np.arange(spec.planted_days + 1))] *= spec.planted_volume_scale
    return raw, dates, sectors, np.round(volumes)


def price_panel(spec: SynthSpec, start_price: float = 100.0) -> PricePanel:
    """Synthetic quotes: prices follow the SVM returns at ``DAILY_VOL`` scale."""
    raw, dates, sectors, volumes = _generate_raw(spec)
    log_paths = np.concatenate(
        [np.zeros((spec.n_firms, 1)), np.cumsum(DAILY_VOL * raw, axis=1)], axis=1
    )
    prices = np.round(start_price * np.exp(log_paths), 6)
    return PricePanel(dates, _tickers(spec.n_firms), prices, volumes, sectors, spec.sector_set)
