import math

import numpy as np
import pytest

from marketphase import svm
from marketphase.indices import (
    DegenerateMarketError,
    average_correlation,
    average_return,
    delta_bound,
    delta_from_modes,
    delta_squared,
    market_series,
    mode_overlaps,
    pseudo_index,
    smooth,
    window_stats,
)
from marketphase.returns import from_log_returns
from marketphase.spectral import (
    SpectralWindow,
    WindowSpec,
    analyze_window,
    market_return,
    window_grid,
)


def test_average_return_examples():
    assert average_return(np.array([[1.0], [-1.0]])).tolist() == [0.0]
    r = np.tile(np.array([0.1, -0.2, 0.3]), (4, 1))
    assert np.allclose(average_return(r), [0.1, -0.2, 0.3])


def test_average_return_row_mean(random_returns):
    r = random_returns.returns
    oracle = [sum(r[i, t] for i in range(r.shape[0])) / r.shape[0] for t in range(r.shape[1])]
    assert np.allclose(average_return(random_returns), oracle, rtol=0, atol=1e-14)


def test_pseudo_index_cases():
    assert np.array_equal(pseudo_index(np.zeros(5), 2.0), np.zeros(6))
    c, rn, t = 0.3, 1.5, 7
    got = pseudo_index(np.full(t, c), rn)
    ramp = c / rn * np.arange(t + 1)
    assert np.allclose(got, ramp - ramp.mean(), atol=1e-15)
    rng = np.random.default_rng(1)
    r = rng.normal(size=50)
    level, acc = [0.0], 0.0
    for x in r:
        acc += x / 0.7
        level.append(acc)
    level = np.array(level)
    assert np.allclose(pseudo_index(r, 0.7), level - level.mean(), atol=1e-12)
    assert abs(pseudo_index(r, 0.7).sum()) < 1e-9


def test_delta_squared_cases():
    spec = WindowSpec(5, 10, 10)
    rng = np.random.default_rng(2)
    m = rng.normal(size=10)
    assert delta_squared(m, m, spec) == 0.0
    assert delta_squared(m, np.zeros(10), spec) == pytest.approx(1.0)
    a = rng.normal(size=10)
    num = sum((m[t] - a[t]) ** 2 for t in range(10))
    den = sum(m[t] ** 2 for t in range(10))
    assert delta_squared(m, a, spec) == pytest.approx(num / den, abs=1e-12)
    with pytest.raises(DegenerateMarketError, match="degenerate market return"):
        delta_squared(np.zeros(10), a, spec)


def _fake_window(c):
    values, vectors = np.linalg.eigh(c)
    order = np.argsort(values)[::-1]
    vectors = vectors[:, order]
    vectors *= np.sign(vectors.sum(axis=0))
    return SpectralWindow(WindowSpec(1, 2, 1), c, values[order], vectors)


def test_delta_bound_vanishes_for_uniform_market():
    c = np.full((4, 4), 2.0) + np.eye(4)
    w = _fake_window(c)
    assert w.beta_bar == pytest.approx(1.0, abs=1e-12)
    assert delta_bound(w) == pytest.approx(0.0, abs=1e-12)


def test_delta_bound_hand_evaluated():
    c = np.array([[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 0.5]])
    w = _fake_window(c)
    e0 = w.market_vector
    bb = e0.sum() / math.sqrt(3)
    lam0 = w.eigenvalues[0]
    expected = (1 - bb) * (2 / lam0 * (2.0 + 1.0 + 0.5) - 1 - bb)
    assert delta_bound(w) == pytest.approx(expected, abs=1e-12)


def test_average_correlation_definitions():
    w = _fake_window(np.array([[1.0, 0.3], [0.3, 2.0]]))
    assert average_correlation(w, 0.0, 1.0)[0] == pytest.approx(0.3)
    w = _fake_window(np.diag([1.0, 2.0, 3.0]))
    assert average_correlation(w, 0.0, 1.0)[0] == 0.0
    with pytest.raises(ValueError):
        average_correlation(_fake_window(np.eye(1)), 0.0, 1.0)


def test_mode_overlaps_uniform_and_parseval(random_returns):
    w = _fake_window(np.full((5, 5), 1.0) + np.eye(5))
    a = mode_overlaps(w)
    assert a[0] == pytest.approx(1.0)
    assert np.sum(a[1:] ** 2) == pytest.approx(0.0, abs=1e-24)
    w = analyze_window(random_returns, WindowSpec(20, 30, 30))
    assert np.sum(mode_overlaps(w) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert mode_overlaps(w)[0] == pytest.approx(w.beta_bar, abs=1e-15)


def _svm_returns(n=64, t=3000, seed=0):
    p = svm.make_params(n, 0.6, "uniform(0.5, 1.0)", seed=seed)
    return from_log_returns(svm.sample_returns(p, t))


def test_mode_reconstruction_of_delta():
    rp = _svm_returns()
    spec = WindowSpec(1500, 3000, 3000)
    w = analyze_window(rp, spec)
    days, r_m = market_return(rp, w, span="window")
    direct = delta_squared(r_m, average_return(rp)[days], WindowSpec(len(days) // 2, len(days), len(days)))
    assert delta_from_modes(w) == pytest.approx(direct, abs=1e-10)


def test_svm_window_bound_and_identity():
    rp = _svm_returns(n=128, seed=3)
    w = analyze_window(rp, WindowSpec(1500, 3000, 3000))
    st = window_stats(rp, w)
    assert 0 <= st.delta_sq <= st.bound
    assert st.delta_sq < 0.2 * st.bound
    direct, ident = average_correlation(w, st.delta_sq, st.market_var)
    assert abs(direct - ident) <= 2 / 128 * abs(direct) + 2 / 128


def test_market_series_overlapping(random_returns):
    grid = window_grid(random_returns.n_obs, 20, 5)
    ms = market_series(random_returns, grid)
    assert np.all(np.diff(ms.days) == 1)
    assert len(ms.L_M) == len(ms.days) + 1
    assert abs(ms.L_M.sum()) < 1e-9 and abs(ms.L_av.sum()) < 1e-9
    assert np.all(ms.delta_sq >= 0)
    for s in ms.stats:
        assert s.delta_sq <= s.bound + 1e-10


def test_smooth_centered():
    x = np.arange(10, dtype=float)
    assert np.allclose(smooth(x, 3)[1:-1], x[1:-1])
    assert np.array_equal(smooth(x, 1), x)
