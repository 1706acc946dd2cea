"""Market return vs. average return: pseudo indices, divergence and bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .returns import ReturnPanel
from .spectral import SpectralWindow, WindowSpec, analyze_window, market_return


class DegenerateMarketError(ValueError):
    pass


def average_return(returns: ReturnPanel | np.ndarray) -> np.ndarray:
    r = returns.returns if isinstance(returns, ReturnPanel) else np.asarray(returns)
    if r.size == 0:
        raise ValueError("empty return panel")
    return r.mean(axis=0)


def pseudo_index(r: np.ndarray, r_norm: float) -> np.ndarray:
    """Log pseudo index from daily returns, recentred to zero sum.

    One level per price day, so the output is one longer than ``r``.
    """
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        raise ValueError("empty return series")
    if not r_norm > 0:
        raise ValueError("r_norm must be positive")
    level = np.concatenate([[0.0], np.cumsum(r / r_norm)])
    return level - level.mean()


def index_from_levels(levels: np.ndarray) -> np.ndarray:
    """``ln S_0 - l_0`` with ``l_0`` chosen so the series sums to zero."""
    logs = np.log(np.asarray(levels, dtype=float))
    return logs - logs.mean()


def smooth(series: np.ndarray, days: int) -> np.ndarray:
    """Centred moving mean; shrinks the window at the edges."""
    series = np.asarray(series, dtype=float)
    if days <= 1:
        return series.copy()
    half_lo, half_hi = days // 2, days - days // 2
    csum = np.concatenate([[0.0], np.cumsum(series)])
    idx = np.arange(len(series))
    lo = np.clip(idx - half_lo, 0, len(series))
    hi = np.clip(idx + half_hi, 0, len(series))
    return (csum[hi] - csum[lo]) / (hi - lo)


def delta_squared(r_m: np.ndarray, r_av: np.ndarray, spec: WindowSpec) -> float:
    """Normalised squared gap between market and average return on a window.

    Both series are indexed by return day.
    """
    lo, hi = spec.bounds
    if lo < 0 or hi > min(len(r_m), len(r_av)):
        raise ValueError(f"series do not cover the window [{lo}, {hi})")
    m = np.asarray(r_m[lo:hi], dtype=float)
    a = np.asarray(r_av[lo:hi], dtype=float)
    if np.isnan(m).any() or np.isnan(a).any():
        raise ValueError(f"series have gaps inside the window [{lo}, {hi})")
    denom = float(m @ m)
    if denom == 0.0:
        raise DegenerateMarketError("degenerate market return")
    d = m - a
    return float(d @ d) / denom


def delta_bound(window: SpectralWindow) -> float:
    bb = window.beta_bar
    return (1.0 - bb) * (2.0 * window.trace / window.lambda0 - 1.0 - bb)


def mode_overlaps(window: SpectralWindow) -> np.ndarray:
    """Overlap of every eigenvector with the uniform vector; entry 0 is beta-bar."""
    return window.eigenvectors.sum(axis=0) / math.sqrt(window.n)


def delta_from_modes(window: SpectralWindow) -> float:
    """Divergence rebuilt from the spectrum and mode overlaps."""
    a = mode_overlaps(window)
    lam = window.eigenvalues
    return float((1.0 - a[0]) ** 2 + np.sum(lam[1:] / lam[0] * a[1:] ** 2))


def average_correlation(
    window: SpectralWindow, delta_sq: float, market_var: float
) -> tuple[float, float]:
    """Mean off-diagonal covariance, directly and via the market identity.

    The identity holds up to terms of order 1/N.
    """
    n = window.n
    if n < 2:
        raise ValueError("average correlation needs at least two firms")
    c = window.cov
    direct = float((c.sum() - np.trace(c)) / (n * (n - 1)))
    identity = market_var * (delta_sq + 2.0 * window.beta_bar - 1.0) - 1.0 / n
    return direct, identity


@dataclass(frozen=True)
class WindowStats:
    center: int
    lambda0: float
    trace: float
    beta_bar: float
    delta_sq: float
    bound: float
    c_av_direct: float
    c_av_identity: float
    market_var: float


def window_stats(returns: ReturnPanel | np.ndarray, window: SpectralWindow) -> WindowStats:
    """Divergence, bound and average correlation on one window.

    The market return used here is the window's own projection over the
    full window, so the spectral identities hold exactly.
    """
    r = returns.returns if isinstance(returns, ReturnPanel) else np.asarray(returns)
    days, r_m = market_return(r, window, span="window")
    r_av = r[:, days[0]:days[-1] + 1].mean(axis=0)
    denom = float(r_m @ r_m)
    if denom == 0.0:
        raise DegenerateMarketError(f"degenerate market return in window {window.spec.center}")
    d = r_m - r_av
    dsq = float(d @ d) / denom
    market_var = denom / len(days)
    direct, ident = average_correlation(window, dsq, market_var)
    return WindowStats(
        center=window.spec.center,
        lambda0=window.lambda0,
        trace=window.trace,
        beta_bar=window.beta_bar,
        delta_sq=dsq,
        bound=delta_bound(window),
        c_av_direct=direct,
        c_av_identity=ident,
        market_var=market_var,
    )


@dataclass
class MarketSeries:
    """Stitched market description over a window grid.

    ``days`` are the return-day indices covered by the step spans;
    ``L_M``/``L_av`` have one more entry (price days ``days[0]..days[-1]+1``).
    """

    days: np.ndarray
    r_m: np.ndarray
    r_av: np.ndarray
    L_M: np.ndarray
    L_av: np.ndarray
    windows: list[SpectralWindow]
    stats: list[WindowStats]

    @property
    def delta_sq(self) -> np.ndarray:
        return np.array([s.delta_sq for s in self.stats])

    @property
    def c_av(self) -> np.ndarray:
        return np.array([s.c_av_direct for s in self.stats])

    @property
    def beta_bar(self) -> np.ndarray:
        return np.array([s.beta_bar for s in self.stats])


def market_series(returns: ReturnPanel, grid: list[WindowSpec]) -> MarketSeries:
    if not grid:
        raise ValueError("empty window grid")
    windows, stats, day_parts, rm_parts = [], [], [], []
    for spec in grid:
        w = analyze_window(returns, spec)
        windows.append(w)
        stats.append(window_stats(returns, w))
        days, r_m = market_return(returns, w, span="step")
        day_parts.append(days)
        rm_parts.append(r_m)
    days = np.concatenate(day_parts)
    if np.any(np.diff(days) != 1):
        raise ValueError("window step spans do not tile a contiguous range")
    r_m = np.concatenate(rm_parts)
    r_av = average_return(returns)[days]
    return MarketSeries(
        days=days,
        r_m=r_m,
        r_av=r_av,
        L_M=pseudo_index(r_m, returns.r_norm),
        L_av=pseudo_index(r_av, returns.r_norm),
        windows=windows,
        stats=stats,
    )
