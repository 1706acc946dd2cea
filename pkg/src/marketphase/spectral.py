"""Windowed covariance matrices and their market mode."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .jacobi import eigensystem
from .returns import ReturnPanel

DAYS_PER_YEAR = 252


class WindowError(ValueError):
    pass


def parse_days(value) -> int:
    """``"7y"`` -> 1764 trading days; plain integers are days."""
    if isinstance(value, (int, np.integer)):
        return int(value)
    text = str(value).strip().lower()
    if text.endswith("y"):
        return int(round(float(text[:-1]) * DAYS_PER_YEAR))
    if text.endswith("d"):
        text = text[:-1]
    return int(text)


def _span(center: int, length: int) -> tuple[int, int]:
    # Half-open, exactly `length` days.
    return center - math.ceil(length / 2), center + length // 2


@dataclass(frozen=True)
class WindowSpec:
    center: int
    width: int
    step: int

    def __post_init__(self):
        if not 0 < self.step <= self.width:
            raise WindowError(
                f"need 0 < step <= width, got step={self.step}, width={self.width}"
            )

    @property
    def bounds(self) -> tuple[int, int]:
        return _span(self.center, self.width)

    @property
    def step_bounds(self) -> tuple[int, int]:
        return _span(self.center, self.step)

    def check(self, n_obs: int) -> None:
        lo, hi = self.bounds
        if lo < 0 or hi > n_obs:
            raise WindowError(
                f"window centred at {self.center} spans [{lo}, {hi}) outside "
                f"the return panel [0, {n_obs})"
            )


def full_window(n_obs: int) -> WindowSpec:
    return WindowSpec(center=math.ceil(n_obs / 2), width=n_obs, step=n_obs)


def window_grid(n_obs: int, width: int, step: int) -> list[WindowSpec]:
    """Windows stepped by ``step`` whose step spans tile the covered range."""
    if width > n_obs:
        first = WindowSpec(math.ceil(width / 2), width, step)
        lo, hi = first.bounds
        raise WindowError(
            f"first window (center {first.center}, days [{lo}, {hi})) exceeds "
            f"the {n_obs} return days"
        )
    specs = []
    center = math.ceil(width / 2)
    while center + width // 2 <= n_obs:
        specs.append(WindowSpec(center, width, step))
        center += step
    return specs


def covariance(returns: ReturnPanel | np.ndarray, spec: WindowSpec) -> np.ndarray:
    """Second-moment matrix over the window, no demeaning or scaling."""
    r = returns.returns if isinstance(returns, ReturnPanel) else np.asarray(returns)
    spec.check(r.shape[1])
    lo, hi = spec.bounds
    x = r[:, lo:hi]
    c = x @ x.T / spec.width
    return 0.5 * (c + c.T)


@dataclass(frozen=True)
class SpectralWindow:
    spec: WindowSpec
    cov: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.cov.shape[0]

    @property
    def lambda0(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def market_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @cached_property
    def betas(self) -> np.ndarray:
        return math.sqrt(self.n) * self.market_vector

    @property
    def beta_bar(self) -> float:
        return float(self.market_vector.sum() / math.sqrt(self.n))

    @property
    def trace(self) -> float:
        return float(np.trace(self.cov))


def analyze_window(returns: ReturnPanel | np.ndarray, spec: WindowSpec) -> SpectralWindow:
    c = covariance(returns, spec)
    values, vectors = eigensystem(c)
    return SpectralWindow(spec, c, values, vectors)


def betas(window: SpectralWindow) -> np.ndarray:
    """``sqrt(N)`` times the market eigenvector."""
    return window.betas


def market_return(
    returns: ReturnPanel | np.ndarray,
    window: SpectralWindow,
    span: str = "step",
) -> tuple[np.ndarray, np.ndarray]:
    """Projection of returns on the market eigenvector.

    ``span="step"`` restricts to the window's step span (the piece used to
    stitch a continuous series across overlapping windows); ``"window"``
    covers the full window.

    Returns ``(day_indices, r_M)``.
    """
    r = returns.returns if isinstance(returns, ReturnPanel) else np.asarray(returns)
    lo, hi = window.spec.step_bounds if span == "step" else window.spec.bounds
    lo, hi = max(lo, 0), min(hi, r.shape[1])
    days = np.arange(lo, hi)
    return days, window.market_vector @ r[:, lo:hi] / math.sqrt(window.n)


@dataclass(frozen=True)
class Leader:
    ticker: str
    sector: str
    beta: float
    turnover: float


def market_leaders(
    betas: np.ndarray,
    threshold: float,
    volumes: np.ndarray,
    sectors,
    tickers=None,
) -> list[Leader]:
    """Firms with ``beta > threshold``, highest beta first."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    betas = np.asarray(betas, dtype=float)
    if tickers is None:
        tickers = [str(i) for i in range(len(betas))]
    picked = [i for i in range(len(betas)) if betas[i] > threshold]
    picked.sort(key=lambda i: (-betas[i], tickers[i]))
    return [Leader(tickers[i], sectors[i], float(betas[i]), float(volumes[i])) for i in picked]
