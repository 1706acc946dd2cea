"""Stochastic-volatility synthetic market and its 1/N perturbation oracle.

Returns follow ``r_i(t) = beta0_i * gamma_m * eta_M(t) + gamma_i * eta_i(t)``
with independent standard normal noise. For an infinite window the
covariance is ``beta0 beta0^T gamma_m**2 + diag(gamma**2)``; the oracle
expands its spectrum in powers of ``1 / (gamma_m**2 N)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .jacobi import eigensystem


@dataclass(frozen=True)
class SvmParams:
    beta0: np.ndarray
    gamma_m: float
    gamma: np.ndarray
    seed: int = 0

    def __post_init__(self):
        beta0 = np.asarray(self.beta0, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        object.__setattr__(self, "beta0", beta0)
        object.__setattr__(self, "gamma", gamma)
        n = beta0.size
        if gamma.shape != beta0.shape:
            raise ValueError("beta0 and gamma must have one entry per firm")
        if not math.isclose(float(beta0 @ beta0), n, rel_tol=1e-12):
            raise ValueError(f"beta0 must satisfy sum(beta0**2) == N, got {beta0 @ beta0}")
        if not self.gamma_m >= 0:
            raise ValueError("gamma_m must be non-negative")
        if np.any(gamma < 0):
            raise ValueError("idiosyncratic couplings must be non-negative")

    @property
    def n_firms(self) -> int:
        return self.beta0.size


def normalize_beta0(beta0) -> np.ndarray:
    b = np.asarray(beta0, dtype=float)
    return b * math.sqrt(b.size / float(b @ b))


_SPEC = re.compile(r"^\s*(\w+)\s*\(\s*([^)]*)\)\s*$")


def coupling_values(spec, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Expand a coupling spec into ``n`` values.

    Accepted forms: a number (constant), ``"constant(c)"``,
    ``"uniform(lo, hi)"`` (random draws), ``"linspace(lo, hi)"``
    (evenly spaced), ``"ones"``, or an explicit list.
    """
    if isinstance(spec, (int, float)):
        return np.full(n, float(spec))
    if not isinstance(spec, str):
        values = np.asarray(spec, dtype=float)
        if values.size != n:
            raise ValueError(f"explicit coupling list has {values.size} entries, need {n}")
        return values
    text = spec.strip()
    if text == "ones":
        return np.ones(n)
    m = _SPEC.match(text)
    if m is None:
        if "," in text:
            return coupling_values([float(x) for x in text.split(",")], n)
        return np.full(n, float(text))
    kind = m.group(1)
    args = [float(x) for x in m.group(2).split(",") if x.strip()]
    if kind == "constant" and len(args) == 1:
        return np.full(n, args[0])
    if kind == "uniform" and len(args) == 2:
        rng = rng if rng is not None else np.random.default_rng()
        return rng.uniform(args[0], args[1], n)
    if kind == "linspace" and len(args) == 2:
        return np.linspace(args[0], args[1], n)
    raise ValueError(f"unrecognised coupling spec {spec!r}")


def make_params(
    n_firms: int,
    gamma_m: float,
    gamma="uniform(0.5, 1.5)",
    beta0="ones",
    seed: int = 0,
) -> SvmParams:
    """Build parameters from specs; beta0 is rescaled to ``sum(beta0**2) == N``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7,)))
    g = coupling_values(gamma, n_firms, rng)
    b = normalize_beta0(coupling_values(beta0, n_firms, rng))
    return SvmParams(beta0=b, gamma_m=float(gamma_m), gamma=g, seed=seed)


def ideal_covariance(params: SvmParams) -> np.ndarray:
    b = params.beta0
    return params.gamma_m**2 * np.outer(b, b) + np.diag(params.gamma**2)


def _stream(seed: int, *key: int) -> np.random.Generator:
    # Philox streams keyed by firm index: adding firms leaves others' noise intact.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


MARKET_KEY = 0
FIRM_KEY = 1


def sample_returns(params: SvmParams, n_days: int, offset: int = 0) -> np.ndarray:
    """Draw an (N, n_days) return matrix. Deterministic in ``params.seed``.

    ``offset`` selects a sub-stream so several epochs can be drawn
    independently from one seed.
    """
    if n_days < 2:
        raise ValueError("n_days must be at least 2")
    eta_m = _stream(params.seed, MARKET_KEY, offset).standard_normal(n_days)
    out = np.empty((params.n_firms, n_days))
    for i in range(params.n_firms):
        eta_i = _stream(params.seed, FIRM_KEY, offset, i).standard_normal(n_days)
        out[i] = params.beta0[i] * params.gamma_m * eta_m + params.gamma[i] * eta_i
    return out


@dataclass
class OracleResult:
    lambda0: float
    betas: np.ndarray
    sub_eigs: np.ndarray | None = field(default=None)


def _weighted_moments(params: SvmParams) -> tuple[float, float]:
    w = params.beta0**2 / params.n_firms
    g2 = params.gamma**2
    return float(w @ g2), float(w @ g2**2)


def oracle_leading(params: SvmParams) -> OracleResult:
    """Second-order leading eigenvalue and first-order betas."""
    if not params.gamma_m > 0:
        raise ValueError("gamma_m = 0: expansion parameter undefined")
    e0 = params.gamma_m**2 * params.n_firms
    g2, g4 = _weighted_moments(params)
    lam = e0 + g2 + (g4 - g2 * g2) / e0
    betas = params.beta0 * (1.0 + (params.gamma**2 - g2) / e0)
    return OracleResult(lambda0=lam, betas=betas)


def complement_basis(f0: np.ndarray) -> np.ndarray:
    """Orthonormal (N, N-1) basis of the complement of unit vector ``f0``."""
    n = f0.size
    q, _ = np.linalg.qr(np.column_stack([f0, np.eye(n)]))
    return q[:, 1:n]


def oracle_subleading(params: SvmParams) -> np.ndarray:
    """Non-leading eigenvalues, descending.

    The degenerate zero-eigenspace of the market term is rotated so the
    idiosyncratic term is diagonal inside it; each eigenvalue is then that
    diagonal entry minus its coupling to the market mode squared over E0.
    """
    if not params.gamma_m > 0:
        raise ValueError("gamma_m = 0: expansion parameter undefined")
    n = params.n_firms
    e0 = params.gamma_m**2 * n
    f0 = params.beta0 / math.sqrt(n)
    c1 = params.gamma**2
    q = complement_basis(f0)
    restricted = q.T @ (c1[:, None] * q)
    _, u = eigensystem(0.5 * (restricted + restricted.T))
    f = q @ u
    diag = np.einsum("ik,i,ik->k", f, c1, f)
    coupling = (f0 * c1) @ f
    return np.sort(diag - coupling**2 / e0)[::-1]


def oracle(params: SvmParams) -> OracleResult:
    res = oracle_leading(params)
    res.sub_eigs = oracle_subleading(params)
    return res
