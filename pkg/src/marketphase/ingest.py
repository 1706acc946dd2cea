"""Loading, aligning and liquidity-filtering daily quote data."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

# GICS top-level taxonomy (10 sectors).
GICS_SECTORS: tuple[str, ...] = (
    "Consumer Discretionary",
    "Consumer Staples",
    "Energy",
    "Financials",
    "Health Care",
    "Industrials",
    "IT",
    "Materials",
    "Telecommunication Services",
    "Utilities",
)

PRICE_DECIMALS = 6
DEFAULT_STALE_FRACTION = 0.07
DEFAULT_MAX_FLAT_RUN = 10


class LoadError(ValueError):
    """Malformed or inconsistent input data."""


class FilterError(ValueError):
    """Liquidity filtering left nothing to analyse."""


@dataclass(frozen=True)
class PricePanel:
    """Aligned daily prices and volumes, firms along axis 0."""

    dates: np.ndarray  # datetime64[D], strictly increasing, shape (T,)
    tickers: tuple[str, ...]
    prices: np.ndarray  # (N, T)
    volumes: np.ndarray  # (N, T)
    sectors: tuple[str, ...]
    sector_set: tuple[str, ...] = GICS_SECTORS

    def __post_init__(self):
        n, t = len(self.tickers), len(self.dates)
        if self.prices.shape != (n, t) or self.volumes.shape != (n, t):
            raise LoadError(
                f"panel shape mismatch: {n} tickers x {t} dates vs prices "
                f"{self.prices.shape}, volumes {self.volumes.shape}"
            )
        if len(self.sectors) != n:
            raise LoadError("one sector label per ticker required")
        unknown = sorted(set(self.sectors) - set(self.sector_set))
        if unknown:
            raise LoadError(f"sector labels outside the declared set: {unknown}")
        if t > 1 and not np.all(np.diff(self.dates) > np.timedelta64(0, "D")):
            raise LoadError("dates must be strictly increasing")

    @property
    def n_firms(self) -> int:
        return len(self.tickers)

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def select(self, rows) -> "PricePanel":
        rows = np.asarray(rows, dtype=int)
        return PricePanel(
            dates=self.dates,
            tickers=tuple(self.tickers[i] for i in rows),
            prices=self.prices[rows],
            volumes=self.volumes[rows],
            sectors=tuple(self.sectors[i] for i in rows),
            sector_set=self.sector_set,
        )


@dataclass(frozen=True)
class DropRecord:
    ticker: str
    reason: str
    stale_fraction: float
    longest_flat_run: int


@dataclass
class FilterReport:
    kept: list[str] = field(default_factory=list)
    dropped: list[DropRecord] = field(default_factory=list)


def _quantize(text: str) -> float:
    q = Decimal(text).quantize(Decimal(1).scaleb(-PRICE_DECIMALS))
    return float(q)


def _data_lines(handle):
    # Leading '#' comment lines are metadata written by our own exporters.
    for lineno, line in enumerate(handle, start=1):
        if line.startswith("#"):
            continue
        yield lineno, line


def _read_rows(path, delimiter):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        numbered = list(_data_lines(fh))
    if not numbered:
        raise LoadError(f"{path}: empty file (header row required)")
    linenos = [n for n, _ in numbered]
    reader = csv.reader((line for _, line in numbered), delimiter=delimiter)
    rows = list(reader)
    return path, linenos, rows


def read_sector_map(path, delimiter: str = ",") -> dict[str, str]:
    """Read a ``ticker,sector`` table (header row required)."""
    path, linenos, rows = _read_rows(path, delimiter)
    mapping: dict[str, str] = {}
    for lineno, row in zip(linenos[1:], rows[1:]):
        if not row:
            continue
        if len(row) < 2:
            raise LoadError(f"{path}:{lineno}: expected ticker and sector")
        mapping[row[0].strip()] = row[1].strip()
    return mapping


def read_quotes(path, delimiter: str = ","):
    """Parse a long quote file into ``(date, ticker, price, volume)`` tuples."""
    path, linenos, rows = _read_rows(path, delimiter)
    records = []
    seen = set()
    for lineno, row in zip(linenos[1:], rows[1:]):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 4:
            raise LoadError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
        try:
            day = np.datetime64(row[0].strip(), "D")
            ticker = row[1].strip()
            price = _quantize(row[2].strip())
            volume = float(row[3].strip())
        except (ValueError, InvalidOperation) as exc:
            raise LoadError(f"{path}:{lineno}: unparseable record {row!r}") from exc
        if not price > 0:
            raise LoadError(f"{path}:{lineno}: price must be positive, got {price}")
        if volume < 0:
            raise LoadError(f"{path}:{lineno}: volume must be non-negative")
        if (day, ticker) in seen:
            raise LoadError(f"{path}:{lineno}: duplicate record for {ticker} on {day}")
        seen.add((day, ticker))
        records.append((day, ticker, price, volume))
    if not records:
        raise LoadError(f"{path}: no quote records")
    return records


def load_panel(
    source,
    sector_map,
    sector_set: tuple[str, ...] | None = None,
    delimiter: str = ",",
) -> PricePanel:
    """Build an aligned panel from quote records and a sector map.

    ``source`` is a path to a delimited quote file or an iterable of
    ``(date, ticker, price, volume)`` records; ``sector_map`` a path or a
    dict. Only dates quoted for every ticker are retained.
    """
    if isinstance(source, (str, Path)):
        records = read_quotes(source, delimiter)
    else:
        records = [
            (np.datetime64(d, "D"), str(tk), float(p), float(v))
            for d, tk, p, v in source
        ]
    if isinstance(sector_map, (str, Path)):
        sector_map = read_sector_map(sector_map, delimiter)

    tickers = sorted({r[1] for r in records})
    missing = [tk for tk in tickers if tk not in sector_map]
    if missing:
        raise LoadError(f"ticker {missing[0]!r} missing from sector map")

    by_ticker: dict[str, dict] = {tk: {} for tk in tickers}
    for day, tk, price, vol in records:
        by_ticker[tk][day] = (price, vol)
    common = set.intersection(*(set(d) for d in by_ticker.values()))
    if not common:
        raise LoadError("no date is quoted for every ticker")
    dates = np.array(sorted(common), dtype="datetime64[D]")

    prices = np.empty((len(tickers), len(dates)))
    volumes = np.empty_like(prices)
    for i, tk in enumerate(tickers):
        quotes = by_ticker[tk]
        for j, day in enumerate(dates):
            prices[i, j], volumes[i, j] = quotes[day]

    sectors = tuple(sector_map[tk] for tk in tickers)
    if sector_set is None:
        sector_set = GICS_SECTORS if set(sectors) <= set(GICS_SECTORS) else tuple(
            sorted(set(sector_map.values()))
        )
    return PricePanel(dates, tuple(tickers), prices, volumes, sectors, tuple(sector_set))


def longest_flat_run(prices: np.ndarray) -> int:
    """Longest stretch of consecutive days on which the price did not change."""
    best = run = 0
    for unchanged in np.diff(prices) == 0.0:
        run = run + 1 if unchanged else 0
        best = max(best, run)
    return best


def liquidity_report(
    panel: PricePanel,
    stale_fraction: float = DEFAULT_STALE_FRACTION,
    max_flat_run: int = DEFAULT_MAX_FLAT_RUN,
) -> FilterReport:
    if not 0.0 < stale_fraction < 1.0:
        raise ValueError(f"stale_fraction must lie in (0, 1), got {stale_fraction}")
    if max_flat_run < 2:
        raise ValueError(f"max_flat_run must be >= 2, got {max_flat_run}")
    report = FilterReport()
    t = panel.n_days
    for tk, row in zip(panel.tickers, panel.prices):
        stale = float(np.count_nonzero(np.diff(row) == 0.0)) / t
        run = longest_flat_run(row)
        if stale > stale_fraction:
            reason = f"stale {stale:.2f} > {stale_fraction:.2f}"
        elif run >= max_flat_run:
            reason = f"flat run {run} >= {max_flat_run}"
        else:
            report.kept.append(tk)
            continue
        report.dropped.append(DropRecord(tk, reason, stale, run))
    return report


def filter_liquidity(
    panel: PricePanel,
    stale_fraction: float = DEFAULT_STALE_FRACTION,
    max_flat_run: int = DEFAULT_MAX_FLAT_RUN,
) -> PricePanel:
    """Drop firms whose price is stale too often or frozen too long."""
    report = liquidity_report(panel, stale_fraction, max_flat_run)
    if not report.kept:
        raise FilterError("empty panel after filtering")
    keep = set(report.kept)
    return panel.select([i for i, tk in enumerate(panel.tickers) if tk in keep])


def years_of(dates: np.ndarray) -> np.ndarray:
    return dates.astype("datetime64[Y]").astype(int) + 1970


def annual_volume(panel: PricePanel, year: int) -> np.ndarray:
    """Per-firm sum of daily volume over the panel dates in ``year``."""
    mask = years_of(panel.dates) == year
    if not mask.any():
        raise ValueError(
            f"year {year} outside panel range {panel.dates[0]}..{panel.dates[-1]}"
        )
    return panel.volumes[:, mask].sum(axis=1)


def _write_wide(path: Path, comment: str, dates, tickers, matrix, fmt: str) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *tickers])
        for j, day in enumerate(dates):
            w.writerow([str(day), *(format(x, fmt) for x in matrix[:, j])])


def _read_wide(path: Path):
    _, _, rows = _read_rows(path, ",")
    tickers = tuple(rows[0][1:])
    dates = np.array([r[0] for r in rows[1:]], dtype="datetime64[D]")
    matrix = np.array([[float(x) for x in r[1:]] for r in rows[1:]]).T
    return dates, tickers, matrix.reshape(len(tickers), len(dates))


def write_panel(panel: PricePanel, directory) -> None:
    """Export a panel as wide delimited files (one column per ticker)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _write_wide(
        d / "prices.csv",
        "close prices [currency units]; rows = dates, columns = tickers",
        panel.dates, panel.tickers, panel.prices, f".{PRICE_DECIMALS}f",
    )
    _write_wide(
        d / "volumes.csv",
        "daily traded volume [shares or currency]; rows = dates, columns = tickers",
        panel.dates, panel.tickers, panel.volumes, ".17g",
    )
    with (d / "sectors.csv").open("w", newline="", encoding="utf-8") as fh:
        fh.write("# sector label per ticker [category]; sector_set lists the declared taxonomy\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "sector"])
        for tk, s in zip(panel.tickers, panel.sectors):
            w.writerow([tk, s])
    with (d / "sector_set.csv").open("w", newline="", encoding="utf-8") as fh:
        fh.write("# declared sector taxonomy [category], in order\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sector"])
        for s in panel.sector_set:
            w.writerow([s])


def read_panel(directory) -> PricePanel:
    d = Path(directory)
    dates, tickers, prices = _read_wide(d / "prices.csv")
    vdates, vtickers, volumes = _read_wide(d / "volumes.csv")
    if vtickers != tickers or not np.array_equal(vdates, dates):
        raise LoadError(f"{d}: prices and volumes are not aligned")
    smap = read_sector_map(d / "sectors.csv")
    _, _, rows = _read_rows(d / "sector_set.csv", ",")
    sector_set = tuple(r[0] for r in rows[1:] if r)
    return PricePanel(
        dates, tickers, prices, volumes, tuple(smap[tk] for tk in tickers), sector_set
    )


def write_quotes(panel: PricePanel, quotes_path, sectors_path) -> None:
    """Write a panel in the long quote-input format plus its sector map."""
    with Path(quotes_path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("# daily quotes: close [currency units], volume [shares or currency]\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "ticker", "close", "volume"])
        for j, day in enumerate(panel.dates):
            for i, tk in enumerate(panel.tickers):
                w.writerow([
                    str(day), tk,
                    format(panel.prices[i, j], f".{PRICE_DECIMALS}f"),
                    format(panel.volumes[i, j], ".17g"),
                ])
    with Path(sectors_path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("# sector label per ticker [category]\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ticker", "sector"])
        for tk, s in zip(panel.tickers, panel.sectors):
            w.writerow([tk, s])
