"""Batch front end: ``marketphase {ingest,analyze,scaling,phase,synth} CONFIG``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .indices import DegenerateMarketError, index_from_levels, market_series, smooth
from .ingest import (
    FilterError,
    LoadError,
    filter_liquidity,
    liquidity_report,
    load_panel,
    read_panel,
    write_panel,
    write_quotes,
)
from .jacobi import EigenError
from .phase import NoRiskMassError, phase_series
from .report import write_table
from .returns import DegeneratePanelError, compute_returns
from .scaling import fit_curve, scaling_curve
from .spectral import WindowError, WindowSpec, market_leaders, window_grid
from .synth import price_panel

log = logging.getLogger("marketphase")

ERROR_CATEGORIES = (
    (ConfigError, "config"),
    (LoadError, "load"),
    (FilterError, "filter"),
    (WindowError, "window"),
    (DegeneratePanelError, "degenerate"),
    (DegenerateMarketError, "degenerate"),
    (NoRiskMassError, "degenerate"),
    (EigenError, "numerics"),
    (OSError, "io"),
    (ValueError, "value"),
)


def _quotes_paths(cfg: RunConfig) -> tuple[Path, Path]:
    quotes = cfg.quotes or cfg.output / "synth" / "quotes.csv"
    sectors = cfg.sectors or cfg.output / "synth" / "sectors.csv"
    for label, p in (("quotes", quotes), ("sectors", sectors)):
        if not Path(p).exists():
            raise ConfigError(f"{label} path does not exist: {p}")
    return quotes, sectors


def run_ingest(cfg: RunConfig) -> dict[str, Path]:
    quotes, sectors = _quotes_paths(cfg)
    panel = load_panel(quotes, sectors, delimiter=cfg.delimiter)
    report = liquidity_report(panel, cfg.stale_fraction, cfg.max_flat_run)
    clean = filter_liquidity(panel, cfg.stale_fraction, cfg.max_flat_run)
    write_panel(clean, cfg.panel)
    rep = write_table(
        cfg.output / "ingest" / "filter_report.csv",
        f"firms dropped by the liquidity filter (stale_fraction={cfg.stale_fraction}, "
        f"max_flat_run={cfg.max_flat_run}); {len(report.kept)} of {panel.n_firms} kept",
        ["ticker", "reason", "stale_fraction[fraction of days]", "longest_flat_run[days]"],
        [(d.ticker, d.reason, d.stale_fraction, d.longest_flat_run) for d in report.dropped],
    )
    log.info("ingest: kept %d of %d firms over %d days", clean.n_firms, panel.n_firms, panel.n_days)
    return {"panel": Path(cfg.panel), "report": rep}


def _load_returns(cfg: RunConfig):
    cfg.require("panel")
    return compute_returns(read_panel(cfg.panel))


def _analysis_grid(cfg: RunConfig, n_obs: int) -> list[WindowSpec]:
    if cfg.centers is None:
        return window_grid(n_obs, cfg.width, cfg.step)
    grid = [WindowSpec(c, cfg.width, cfg.step) for c in cfg.centers]
    for spec in grid:
        spec.check(n_obs)
    return grid


def _read_index(path: Path, delimiter: str) -> dict:
    """External index levels: ``date,level`` with a header row."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines, delimiter=delimiter))[1:]
    try:
        return {np.datetime64(r[0].strip(), "D"): float(r[1]) for r in rows if r}
    except (ValueError, IndexError) as exc:
        raise LoadError(f"{path}: unparseable index record") from exc


def run_analyze(cfg: RunConfig) -> dict[str, Path]:
    rp = _load_returns(cfg)
    grid = _analysis_grid(cfg, rp.n_obs)
    ms = market_series(rp, grid)
    out = cfg.output / "analyze"
    n = rp.n_firms

    for w in ms.windows:
        write_table(
            out / "eigenvalues" / f"window_{w.spec.center:06d}.csv",
            f"eigenvalues of the window covariance, center day {w.spec.center} "
            f"({rp.dates[w.spec.center]}), width {w.spec.width} days, descending",
            ["rank", "eigenvalue[normalized return^2]"],
            [(k, v) for k, v in enumerate(w.eigenvalues)],
        )
    write_table(
        out / "betas.csv",
        "beta = sqrt(N) * market eigenvector component [dimensionless]; "
        "columns are window center days",
        ["ticker", "sector", *(f"beta@{w.spec.center}[dimensionless]" for w in ms.windows)],
        [
            (tk, sec, *(w.betas[i] for w in ms.windows))
            for i, (tk, sec) in enumerate(zip(rp.tickers, rp.sectors))
        ],
    )
    write_table(
        out / "returns.csv",
        f"normalized log returns r_i(t) [dimensionless], r_norm={rp.r_norm!r}; "
        "rows = interval start dates",
        ["date", *(f"{tk}[normalized return]" for tk in rp.tickers)],
        [(rp.dates[t], *rp.returns[:, t]) for t in range(rp.n_obs)],
    )

    price_days = np.arange(ms.days[0], ms.days[-1] + 2)
    dates = rp.volume_dates[price_days]
    columns = ["date", "L_M[log index]", "L_av[log index]"]
    series = [ms.L_M, ms.L_av]
    if cfg.index is not None:
        cfg.require("index")
        levels = _read_index(cfg.index, cfg.delimiter)
        have = np.array([d in levels for d in dates])
        l0 = np.full(len(dates), np.nan)
        if have.any():
            l0[have] = index_from_levels([levels[d] for d in dates[have]])
        columns.append("L_index[log index]")
        series.append(l0)
    names = [c.split("[")[0] for c in columns[1:]]
    columns += [f"{nm}_smooth[log index]" for nm in names]
    series += [smooth(s, cfg.smooth_days) for s in series]
    write_table(
        out / "pseudo_indices.csv",
        f"log pseudo indices (zero-sum), smoothed columns use a centred "
        f"{cfg.smooth_days}-day mean",
        columns,
        [(d, *(s[j] for s in series)) for j, d in enumerate(dates)],
    )

    bounds_ok = [s.delta_sq <= s.bound + 1e-10 for s in ms.stats]
    write_table(
        out / "windows.csv",
        "per-window market statistics; market return over each full window",
        [
            "center[day index]", "date", "lambda0[normalized return^2]",
            "lambda0_over_N[dimensionless]", "trace[normalized return^2]",
            "beta_bar[dimensionless]", "delta_sq[dimensionless]", "bound[dimensionless]",
            "bound_ok[bool]", "c_av_direct[normalized return^2]",
            "c_av_identity[normalized return^2]",
        ],
        [
            (s.center, rp.dates[s.center], s.lambda0, s.lambda0 / n, s.trace, s.beta_bar,
             s.delta_sq, s.bound, ok, s.c_av_direct, s.c_av_identity)
            for s, ok in zip(ms.stats, bounds_ok)
        ],
    )
    meta = write_table(
        out / "metadata.csv",
        "analysis metadata",
        ["key", "value[unit given by the key suffix]"],
        [
            ("version", __version__),
            ("seed", cfg.seed),
            ("n_firms", n),
            ("n_returns_days", rp.n_obs),
            ("r_norm", rp.r_norm),
            ("window_width_days", cfg.width),
            ("window_step_days", cfg.step),
            ("n_windows", len(grid)),
            ("window_centers", " ".join(str(s.center) for s in grid)),
            ("delta_bound_checks_passed", sum(bounds_ok)),
            ("delta_bound_checks_total", len(bounds_ok)),
            ("delta_bound_all_ok", all(bounds_ok)),
        ],
    )
    log.info("analyze: %d windows, r_norm=%g", len(grid), rp.r_norm)
    return {"directory": out, "metadata": meta}


def run_scaling(cfg: RunConfig) -> dict[str, Path]:
    rp = _load_returns(cfg)
    points = scaling_curve(rp, cfg.ks)
    out = cfg.output / "scaling"
    table = write_table(
        out / "scaling.csv",
        "sub-market averages over k volume-balanced groups, full-sample window",
        ["k[groups]", "N[firms per group]", "lambda0[normalized return^2]",
         "delta_sq[dimensionless]", "sigma_beta[dimensionless]",
         "lambda0_sd[normalized return^2]"],
        [(p.k, p.n_sub, p.lambda0_mean, p.delta_sq_mean, p.sigma_beta_mean, p.lambda0_sd)
         for p in points],
    )
    fits = write_table(
        out / "scaling_fit.csv",
        "least-squares power laws y ~ N^exponent on log-log scale",
        ["observable", "exponent[dimensionless]", "intercept[log units]",
         "max_residual[log units]"],
        [(k, f.exponent, f.intercept, f.residual) for k, f in fit_curve(points).items()]
        if len(points) >= 3 else [],
    )
    return {"table": table, "fits": fits}


def run_phase(cfg: RunConfig) -> dict[str, Path]:
    rp = _load_returns(cfg)
    windows = phase_series(
        rp, cfg.phase_width, cfg.phase_step, seed=cfg.seed,
        threshold=cfg.risk_threshold, n_permutations=cfg.permutations, quantile=cfg.quantile,
    )
    out = cfg.output / "phase"
    rows = []
    for pw in windows:
        for s, sector in enumerate(pw.sector_set):
            rows.append((pw.center, pw.date, pw.year, sector, pw.risk.risk[s], pw.m[s],
                         pw.band, pw.label, pw.sector))
    table = write_table(
        out / "phase.csv",
        f"sector risk and order parameter per window (width {cfg.phase_width} days, "
        f"beta gate > {cfg.risk_threshold}, noise band = {cfg.quantile} quantile of the "
        f"max order parameter over {cfg.permutations} label permutations)",
        ["center[day index]", "date", "year", "sector", "R[beta x turnover]",
         "m[dimensionless]", "band[dimensionless]", "label", "ordered_sector"],
        rows,
    )
    leaders = []
    for pw in windows:
        for bc in cfg.leader_thresholds:
            for rank, ld in enumerate(
                market_leaders(pw.betas, bc, pw.turnover, rp.sectors, rp.tickers), start=1
            ):
                leaders.append((pw.center, pw.year, bc, rank, ld.ticker, ld.sector, ld.beta,
                                ld.turnover))
    lead = write_table(
        out / "leaders.csv",
        "market leaders (beta > beta_c) per window with annual turnover of the window year",
        ["center[day index]", "year", "beta_c[dimensionless]", "rank", "ticker", "sector",
         "beta[dimensionless]", "turnover[volume units per year]"],
        leaders,
    )
    return {"table": table, "leaders": lead}


def run_synth(cfg: RunConfig) -> dict[str, Path]:
    panel = price_panel(cfg.synth)
    out = cfg.output / "synth"
    out.mkdir(parents=True, exist_ok=True)
    write_quotes(panel, out / "quotes.csv", out / "sectors.csv")
    return {"quotes": out / "quotes.csv", "sectors": out / "sectors.csv"}


COMMANDS = {
    "ingest": run_ingest,
    "analyze": run_analyze,
    "scaling": run_scaling,
    "phase": run_phase,
    "synth": run_synth,
}


def _category(exc: BaseException) -> str:
    for cls, name in ERROR_CATEGORIES:
        if isinstance(exc, cls):
            return name
    return "internal"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="marketphase", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", type=Path)
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override a config value (repeatable)",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, args.overrides)
        COMMANDS[args.command](cfg)
    except Exception as exc:  # noqa: BLE001 - reported as one parseable line
        msg = " ".join(str(exc).split())
        print(f"error: {_category(exc)}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
