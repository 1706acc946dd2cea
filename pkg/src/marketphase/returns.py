"""Globally normalised log returns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import GICS_SECTORS, PricePanel, years_of


class DegeneratePanelError(ValueError):
    pass


@dataclass(frozen=True)
class ReturnPanel:
    """Normalised returns ``r_i(t)`` with ``sum r**2 == N * n_obs``.

    ``returns`` has shape (N, T-1); column ``t`` is the return from price
    day ``t`` to ``t + 1`` and is dated by ``dates[t]``. Volumes stay on
    the price calendar (``volume_dates``) so annual turnover is exact.
    """

    returns: np.ndarray
    r_norm: float
    dates: np.ndarray
    tickers: tuple[str, ...]
    sectors: tuple[str, ...]
    sector_set: tuple[str, ...]
    volumes: np.ndarray
    volume_dates: np.ndarray

    @property
    def n_firms(self) -> int:
        return self.returns.shape[0]

    @property
    def n_obs(self) -> int:
        return self.returns.shape[1]

    def annual_volume(self, year: int) -> np.ndarray:
        mask = years_of(self.volume_dates) == year
        if not mask.any():
            raise ValueError(f"year {year} outside the panel's date range")
        return self.volumes[:, mask].sum(axis=1)

    def mean_volume(self) -> np.ndarray:
        return self.volumes.mean(axis=1)

    def select(self, rows) -> "ReturnPanel":
        """Sub-market of the given firms. The global ``r_norm`` is kept."""
        rows = np.asarray(rows, dtype=int)
        return ReturnPanel(
            returns=self.returns[rows],
            r_norm=self.r_norm,
            dates=self.dates,
            tickers=tuple(self.tickers[i] for i in rows),
            sectors=tuple(self.sectors[i] for i in rows),
            sector_set=self.sector_set,
            volumes=self.volumes[rows],
            volume_dates=self.volume_dates,
        )


def normalize(log_returns: np.ndarray) -> tuple[np.ndarray, float]:
    """Scale raw log returns so the mean square over all entries is one."""
    log_returns = np.asarray(log_returns, dtype=float)
    total = float(np.sum(log_returns * log_returns))
    if total == 0.0:
        raise DegeneratePanelError("degenerate panel: zero variance")
    r_norm = float(np.sqrt(log_returns.size / total))
    return r_norm * log_returns, r_norm


def compute_returns(panel: PricePanel) -> ReturnPanel:
    if panel.n_days < 2:
        raise ValueError("at least two dates are needed to form returns")
    if np.any(panel.prices <= 0):
        raise ValueError("prices must be strictly positive")
    raw = np.diff(np.log(panel.prices), axis=1)
    returns, r_norm = normalize(raw)
    return ReturnPanel(
        returns=returns,
        r_norm=r_norm,
        dates=panel.dates[:-1],
        tickers=panel.tickers,
        sectors=panel.sectors,
        sector_set=panel.sector_set,
        volumes=panel.volumes,
        volume_dates=panel.dates,
    )


def from_log_returns(
    log_returns: np.ndarray,
    dates: np.ndarray | None = None,
    tickers=None,
    sectors=None,
    sector_set: tuple[str, ...] = GICS_SECTORS,
    volumes: np.ndarray | None = None,
) -> ReturnPanel:
    """Wrap a raw (N, T) return matrix, e.g. synthetic data, as a ReturnPanel.

    Missing labels get neutral defaults: business days from 2000-01-03,
    tickers ``F000..``, sectors dealt round-robin over ``sector_set`` and
    unit volume.
    """
    log_returns = np.asarray(log_returns, dtype=float)
    n, t = log_returns.shape
    returns, r_norm = normalize(log_returns)
    if dates is None:
        price_dates = np.busday_offset("2000-01-03", np.arange(t + 1), roll="forward")
    else:
        price_dates = np.asarray(dates, dtype="datetime64[D]")
        if len(price_dates) == t:
            price_dates = np.append(price_dates, price_dates[-1] + np.timedelta64(1, "D"))
    if tickers is None:
        tickers = tuple(f"F{i:03d}" for i in range(n))
    if sectors is None:
        sectors = tuple(sector_set[i % len(sector_set)] for i in range(n))
    if volumes is None:
        volumes = np.ones((n, t + 1))
    return ReturnPanel(
        returns=returns,
        r_norm=r_norm,
        dates=price_dates[:-1],
        tickers=tuple(tickers),
        sectors=tuple(sectors),
        sector_set=tuple(sector_set),
        volumes=np.asarray(volumes, dtype=float),
        volume_dates=price_dates,
    )
