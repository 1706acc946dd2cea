"""Sector risk, the sector order parameter and phase labelling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import years_of
from .returns import ReturnPanel
from .spectral import WindowSpec, analyze_window, window_grid

RISK_THRESHOLD = 1.0
N_PERMUTATIONS = 100
NOISE_QUANTILE = 0.95
PHASE_STREAM = 40

ORDERED = "ordered"
DISORDERED = "disordered"


class NoRiskMassError(ValueError):
    pass


@dataclass(frozen=True)
class SectorRisk:
    sector_set: tuple[str, ...]
    risk: np.ndarray  # one entry per sector in sector_set
    window_center: int | None = None

    def __getitem__(self, sector: str) -> float:
        return float(self.risk[self.sector_set.index(sector)])


def sector_codes(sectors, sector_set) -> np.ndarray:
    index = {s: i for i, s in enumerate(sector_set)}
    try:
        return np.array([index[s] for s in sectors], dtype=int)
    except KeyError as exc:
        raise ValueError(f"sector {exc.args[0]!r} not in the declared sector set") from None


def _gated_mass(betas, volumes, threshold):
    betas = np.asarray(betas, dtype=float)
    volumes = np.asarray(volumes, dtype=float)
    if betas.shape != volumes.shape:
        raise ValueError("betas and volumes must be aligned over firms")
    if np.any(volumes < 0):
        raise ValueError("volumes must be non-negative")
    # Strict inequality: a firm at exactly the threshold carries no risk.
    return np.where(betas > threshold, betas * volumes, 0.0)


def sector_risk(
    betas,
    volumes,
    sectors,
    sector_set: tuple[str, ...],
    threshold: float = RISK_THRESHOLD,
    window_center: int | None = None,
) -> SectorRisk:
    """Volume-weighted beta of the above-threshold firms, summed per sector."""
    codes = sector_codes(sectors, sector_set)
    mass = _gated_mass(betas, volumes, threshold)
    risk = np.bincount(codes, weights=mass, minlength=len(sector_set)).astype(float)
    return SectorRisk(tuple(sector_set), risk, window_center)


def _normalise(risk: np.ndarray) -> np.ndarray:
    total = risk.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise NoRiskMassError("no risk mass: all betas below unity")
    s = risk.shape[-1]
    # Same as s/(s-1) * (share - 1/s), arranged so the fully ordered
    # extremes come out as exactly 1 and -1/(s-1).
    return (s * risk / total - 1.0) / (s - 1)


def order_parameters(risk: SectorRisk) -> np.ndarray:
    """Order parameter of every sector; sums to zero."""
    if len(risk.sector_set) < 2:
        raise ValueError("order parameter needs at least two sectors")
    return _normalise(risk.risk)


def order_parameter(risk: SectorRisk, s0: str) -> float:
    return float(order_parameters(risk)[risk.sector_set.index(s0)])


def permutation_threshold(
    betas,
    volumes,
    codes: np.ndarray,
    n_sectors: int,
    rng: np.random.Generator,
    n_permutations: int = N_PERMUTATIONS,
    quantile: float = NOISE_QUANTILE,
    threshold: float = RISK_THRESHOLD,
) -> float:
    """Noise band for the largest sector order parameter.

    Sector labels are shuffled across firms; the statistic is the maximum
    order parameter over sectors, so the band controls the chance that any
    sector looks ordered by accident.
    """
    mass = _gated_mass(betas, volumes, threshold)
    if mass.sum() <= 0:
        raise NoRiskMassError("no risk mass: all betas below unity")
    maxima = np.empty(n_permutations)
    for p in range(n_permutations):
        shuffled = rng.permutation(codes)
        r = np.bincount(shuffled, weights=mass, minlength=n_sectors)
        maxima[p] = _normalise(r).max()
    return float(np.quantile(maxima, quantile))


def classify(m: np.ndarray, band: float) -> tuple[str, int | None]:
    above = np.flatnonzero(m > band)
    if above.size == 1:
        return ORDERED, int(above[0])
    return DISORDERED, None


@dataclass(frozen=True)
class PhaseWindow:
    center: int
    date: np.datetime64
    year: int
    risk: SectorRisk
    m: np.ndarray
    band: float
    label: str
    sector: str | None
    betas: np.ndarray
    turnover: np.ndarray

    @property
    def sector_set(self) -> tuple[str, ...]:
        return self.risk.sector_set


def phase_window(
    returns: ReturnPanel,
    spec: WindowSpec,
    rng: np.random.Generator,
    threshold: float = RISK_THRESHOLD,
    n_permutations: int = N_PERMUTATIONS,
    quantile: float = NOISE_QUANTILE,
) -> PhaseWindow:
    w = analyze_window(returns, spec)
    day = returns.dates[min(spec.center, returns.n_obs - 1)]
    year = int(years_of(np.array([day]))[0])
    turnover = returns.annual_volume(year)
    risk = sector_risk(w.betas, turnover, returns.sectors, returns.sector_set, threshold, spec.center)
    m = order_parameters(risk)
    band = permutation_threshold(
        w.betas, turnover, sector_codes(returns.sectors, returns.sector_set),
        len(returns.sector_set), rng, n_permutations, quantile, threshold,
    )
    label, idx = classify(m, band)
    return PhaseWindow(
        center=spec.center, date=day, year=year, risk=risk, m=m, band=band,
        label=label, sector=None if idx is None else returns.sector_set[idx],
        betas=w.betas, turnover=turnover,
    )


def phase_series(
    returns: ReturnPanel,
    width: int,
    step: int = 252,
    grid: list[WindowSpec] | None = None,
    seed: int = 0,
    threshold: float = RISK_THRESHOLD,
    n_permutations: int = N_PERMUTATIONS,
    quantile: float = NOISE_QUANTILE,
) -> list[PhaseWindow]:
    """Order parameters on a yearly (by default) grid of windows."""
    grid = grid if grid is not None else window_grid(returns.n_obs, width, step)
    out = []
    for i, spec in enumerate(grid):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(PHASE_STREAM, i)))
        out.append(phase_window(returns, spec, rng, threshold, n_permutations, quantile))
    return out


def kirman_order_parameter(theta):
    """Herding order parameter ``theta / (1 + theta)`` from the noise-trader ratio."""
    t = np.asarray(theta, dtype=float)
    if np.any(t < 0):
        raise ValueError("noise-trader ratio must be non-negative")
    m = t / (1.0 + t)
    return float(m) if m.ndim == 0 else m
