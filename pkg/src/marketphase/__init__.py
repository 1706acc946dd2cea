"""Spectral analysis of rolling return covariances and sector order parameters."""

__version__ = "0.1.0"

from .ingest import PricePanel, annual_volume, filter_liquidity, load_panel
from .returns import ReturnPanel, compute_returns
from .spectral import SpectralWindow, WindowSpec, analyze_window, covariance, window_grid
from .jacobi import eigensystem

__all__ = [
    "PricePanel",
    "ReturnPanel",
    "SpectralWindow",
    "WindowSpec",
    "analyze_window",
    "annual_volume",
    "compute_returns",
    "covariance",
    "eigensystem",
    "filter_liquidity",
    "load_panel",
    "window_grid",
]
