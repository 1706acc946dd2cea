from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from marketphase.ingest import PricePanel
from marketphase.returns import compute_returns


def write_csv(path: Path, header: str, lines: list[str]) -> Path:
    path.write_text("\n".join([header, *lines]) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def random_panel() -> PricePanel:
    rng = np.random.default_rng(11)
    n, t = 5, 40
    prices = 50.0 * np.exp(np.cumsum(0.02 * rng.standard_normal((n, t)), axis=1))
    dates = np.busday_offset("2001-01-02", np.arange(t), roll="forward")
    sectors = ("IT", "Energy", "IT", "Financials", "Materials")
    return PricePanel(
        dates=dates,
        tickers=tuple(f"T{i}" for i in range(n)),
        prices=prices,
        volumes=rng.integers(1, 100, (n, t)).astype(float),
        sectors=sectors,
    )


@pytest.fixture(scope="session")
def random_returns(random_panel):
    return compute_returns(random_panel)


# One line per acceptance criterion, filled in by test_acceptance.py and
# echoed in the terminal summary so the verdicts show without ``-s``.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
