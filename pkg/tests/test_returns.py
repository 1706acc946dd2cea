import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from marketphase.ingest import PricePanel
from marketphase.returns import DegeneratePanelError, compute_returns, from_log_returns


def _panel(prices):
    prices = np.asarray(prices, dtype=float)
    n, t = prices.shape
    return PricePanel(
        np.busday_offset("2010-01-04", np.arange(t), roll="forward"),
        tuple(f"F{i}" for i in range(n)), prices, np.ones_like(prices),
        tuple("IT" for _ in range(n)),
    )


def test_doubling_prices_give_unit_returns():
    rp = compute_returns(_panel([[1, 2, 4], [3, 6, 12]]))
    assert rp.returns.shape == (2, 2)
    assert np.allclose(rp.returns, 1.0, rtol=0, atol=1e-15)
    assert rp.r_norm == pytest.approx(1 / np.log(2))


def test_constant_prices_degenerate():
    with pytest.raises(DegeneratePanelError, match="zero variance"):
        compute_returns(_panel([[5, 5, 5], [2, 2, 2]]))


def test_normalisation_identity(random_panel):
    rp = compute_returns(random_panel)
    total = sum(float(x) ** 2 for x in rp.returns.ravel())
    n, t = random_panel.n_firms, random_panel.n_days
    assert total == pytest.approx(n * (t - 1), rel=1e-12)
    assert rp.r_norm > 0
    assert rp.dates[0] == random_panel.dates[0]
    assert len(rp.dates) == t - 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.floats(0.01, 100.0))
def test_scale_invariance(random_panel, firm, factor):
    prices = random_panel.prices.copy()
    prices[firm] *= factor
    scaled = PricePanel(random_panel.dates, random_panel.tickers, prices,
                        random_panel.volumes, random_panel.sectors)
    a, b = compute_returns(random_panel), compute_returns(scaled)
    assert np.allclose(a.returns, b.returns, rtol=1e-9, atol=1e-10)
    assert a.r_norm == pytest.approx(b.r_norm, rel=1e-9)


def test_from_log_returns_defaults():
    rng = np.random.default_rng(0)
    rp = from_log_returns(rng.normal(size=(12, 50)))
    assert rp.n_firms == 12 and rp.n_obs == 50
    assert np.sum(rp.returns**2) == pytest.approx(12 * 50, rel=1e-12)
    assert len(rp.volume_dates) == 51
    assert rp.sectors[10] == rp.sector_set[0]


def test_returns_not_demeaned():
    rp = compute_returns(_panel([[1, 2, 4, 8, 8.5]]))
    assert rp.returns.mean() > 0.5
