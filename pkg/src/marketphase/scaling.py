"""Market-size dependence via volume-balanced sub-markets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .indices import window_stats
from .returns import ReturnPanel
from .spectral import WindowSpec, analyze_window, full_window

DEFAULT_KS = (1, 2, 3, 4, 6, 8, 12)


@dataclass(frozen=True)
class ScalingPoint:
    k: int
    n_sub: int
    lambda0_mean: float
    delta_sq_mean: float
    sigma_beta_mean: float
    lambda0_sd: float  # spread of lambda0 across the k groups


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    residual: float


def partition(volumes: np.ndarray, k: int) -> list[np.ndarray]:
    """Deal firms, ranked by volume, round-robin into ``k`` groups.

    The ``N0 mod k`` lowest-volume firms are dropped so every group has
    ``N0 // k`` members and the same mix of large and small firms. Each
    group lists its firms in panel order, so ``k = 1`` is the identity.
    """
    volumes = np.asarray(volumes, dtype=float)
    n0 = volumes.size
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n0 // 2:
        raise ValueError(f"k={k} leaves fewer than 2 firms per group (N0={n0})")
    ranked = np.lexsort((np.arange(n0), -volumes))
    ranked = ranked[: (n0 // k) * k]
    return [np.sort(ranked[g::k]) for g in range(k)]


def scaling_curve(
    returns: ReturnPanel,
    ks=DEFAULT_KS,
    spec: WindowSpec | None = None,
    volumes: np.ndarray | None = None,
) -> list[ScalingPoint]:
    spec = spec if spec is not None else full_window(returns.n_obs)
    volumes = volumes if volumes is not None else returns.mean_volume()
    points = []
    for k in ks:
        lam, dsq, sig = [], [], []
        for rows in partition(volumes, k):
            sub = returns.select(rows)
            w = analyze_window(sub, spec)
            st = window_stats(sub, w)
            lam.append(w.lambda0)
            dsq.append(st.delta_sq)
            sig.append(float(np.std(w.betas)))
        points.append(
            ScalingPoint(
                k=k,
                n_sub=returns.n_firms // k,
                lambda0_mean=float(np.mean(lam)),
                delta_sq_mean=float(np.mean(dsq)),
                sigma_beta_mean=float(np.mean(sig)),
                lambda0_sd=float(np.std(lam)),
            )
        )
    return points


def fit_power_law(n, y) -> PowerLawFit:
    """Least-squares line through ``(ln n, ln y)``."""
    n = np.asarray(n, dtype=float)
    y = np.asarray(y, dtype=float)
    if n.size < 3 or n.size != y.size:
        raise ValueError("need at least three (N, y) pairs")
    if np.any(y <= 0) or np.any(n <= 0):
        raise ValueError("power-law fit requires positive values")
    x, z = np.log(n), np.log(y)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, z, rcond=None)
    resid = float(np.max(np.abs(z - (slope * x + intercept))))
    return PowerLawFit(float(slope), float(intercept), resid)


def fit_curve(points: list[ScalingPoint]) -> dict[str, PowerLawFit]:
    n = [p.n_sub for p in points]
    return {
        "lambda0": fit_power_law(n, [p.lambda0_mean for p in points]),
        "delta_sq": fit_power_law(n, [p.delta_sq_mean for p in points]),
        "sigma_beta": fit_power_law(n, [p.sigma_beta_mean for p in points]),
    }
