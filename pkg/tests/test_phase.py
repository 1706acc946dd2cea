import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from marketphase import phase
from marketphase.ingest import GICS_SECTORS
from marketphase.synth import SynthSpec, generate

S3 = ("A", "B", "C")


def test_all_betas_below_unity_give_zero_risk():
    r = phase.sector_risk([0.9] * 4, [10, 20, 30, 40], ["A", "B", "C", "A"], S3)
    assert r.risk.tolist() == [0.0, 0.0, 0.0]


def test_single_contributor():
    r = phase.sector_risk([2.0], [100.0], ["IT"], GICS_SECTORS)
    assert r["IT"] == 200.0
    assert r.risk.sum() == 200.0


def test_six_firm_fixture_hand_summed():
    betas = [1.5, 0.8, 1.2, 1.0, 2.0, 1.1]
    volumes = [10, 50, 20, 30, 5, 40]
    sectors = ["A", "A", "B", "B", "C", "C"]
    r = phase.sector_risk(betas, volumes, sectors, S3 + ("D",))
    # A: 1.5*10 ; B: 1.2*20 (beta 1.0 is gated out) ; C: 2*5 + 1.1*40 ; D empty
    assert r.risk.tolist() == pytest.approx([15.0, 24.0, 54.0, 0.0], abs=1e-12)


def test_unknown_sector_and_negative_volume():
    with pytest.raises(ValueError, match="not in the declared"):
        phase.sector_risk([1.2], [1.0], ["Z"], S3)
    with pytest.raises(ValueError):
        phase.sector_risk([1.2], [-1.0], ["A"], S3)


def test_uniform_risk_is_disordered():
    r = phase.SectorRisk(GICS_SECTORS, np.full(10, 3.7))
    assert np.max(np.abs(phase.order_parameters(r))) <= 1e-12


def test_single_sector_fully_ordered():
    risk = np.zeros(10)
    risk[4] = 12.0
    r = phase.SectorRisk(GICS_SECTORS, risk)
    m = phase.order_parameters(r)
    assert m[4] == 1.0
    assert np.all(np.delete(m, 4) == -1 / 9)
    assert phase.order_parameter(r, GICS_SECTORS[4]) == 1.0


def test_no_risk_mass_error():
    r = phase.SectorRisk(S3, np.zeros(3))
    with pytest.raises(phase.NoRiskMassError, match="no risk mass: all betas below unity"):
        phase.order_parameters(r)


risk_vectors = st.lists(st.floats(0, 1e6), min_size=2, max_size=12).filter(lambda v: sum(v) > 0)


@settings(max_examples=200)
@given(risk_vectors)
def test_zero_sum_and_bounds(values):
    sectors = tuple(f"s{i}" for i in range(len(values)))
    m = phase.order_parameters(phase.SectorRisk(sectors, np.array(values)))
    assert abs(m.sum()) <= 1e-12
    assert np.all(m <= 1 + 1e-12)
    assert np.all(m >= -1 / (len(values) - 1) - 1e-12)


firm_data = st.integers(2, 20).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.0, 3.0), min_size=n, max_size=n),
        st.lists(st.floats(0.1, 1e4), min_size=n, max_size=n),
        st.lists(st.sampled_from(S3), min_size=n, max_size=n),
    )
)


@settings(max_examples=100)
@given(firm_data, st.floats(1e-3, 1e3))
def test_volume_scale_invariance(data, c):
    betas, volumes, sectors = data
    betas[0] = 1.5  # guarantee some risk mass
    a = phase.order_parameters(phase.sector_risk(betas, volumes, sectors, S3))
    b = phase.order_parameters(phase.sector_risk(betas, np.array(volumes) * c, sectors, S3))
    assert np.allclose(a, b, atol=1e-12)


@settings(max_examples=100)
@given(firm_data, st.floats(0.0, 2.0))
def test_gate_monotonicity(data, bump):
    betas, volumes, sectors = data
    betas[0] = max(betas[0], 1.01)
    own = S3.index(sectors[0])
    before = phase.order_parameters(phase.sector_risk(betas, volumes, sectors, S3))
    raised = list(betas)
    raised[0] += bump
    after = phase.order_parameters(phase.sector_risk(raised, volumes, sectors, S3))
    assert after[own] >= before[own] - 1e-12
    others = [i for i in range(3) if i != own]
    assert np.all(after[others] <= before[others] + 1e-12)


def test_classify():
    assert phase.classify(np.array([0.5, -0.2, -0.3]), 0.3) == ("ordered", 0)
    assert phase.classify(np.array([0.5, 0.4, -0.9]), 0.3) == ("disordered", None)
    assert phase.classify(np.array([0.1, 0.0, -0.1]), 0.3) == ("disordered", None)


def test_kirman_values():
    assert phase.kirman_order_parameter(0.0) == 0.0
    assert phase.kirman_order_parameter(1.0) == 0.5
    assert phase.kirman_order_parameter(3.0) == 0.75
    with pytest.raises(ValueError):
        phase.kirman_order_parameter(-0.1)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_kirman_monotone_and_bounded(a, b):
    lo, hi = sorted((a, b))
    m_lo, m_hi = phase.kirman_order_parameter(lo), phase.kirman_order_parameter(hi)
    assert 0.0 <= m_lo <= m_hi < 1.0


def test_stationary_market_stays_below_noise_band():
    exceed, total = 0, 0
    for seed in range(5):
        panel = generate(SynthSpec(n_firms=120, n_days=2016, beta0="linspace(0.6, 1.4)", seed=seed))
        for w in phase.phase_series(panel, width=1260, step=252, seed=seed):
            assert abs(w.m.sum()) <= 1e-12
            exceed += int(np.any(w.m > w.band))
            total += 1
    # The band is the 95th percentile of the largest sector's m under
    # label shuffling, so roughly one window in twenty may poke above it.
    assert exceed / total <= 0.15


def test_planted_sector_detected_then_released():
    spec = SynthSpec(
        n_firms=120, n_days=4032, beta0="linspace(0.6, 1.4)",
        planted_sector="IT", planted_days=2016, seed=1,
    )
    panel = generate(spec)
    windows = phase.phase_series(panel, width=1260, step=252, seed=1)
    it = GICS_SECTORS.index("IT")
    epoch1 = [w for w in windows if w.center + 630 <= 2016]
    epoch2 = [w for w in windows if w.center - 630 >= 2016]
    assert epoch1 and epoch2
    for w in epoch1:
        assert (w.label, w.sector) == ("ordered", "IT")
        assert w.m[it] - np.max(np.delete(w.m, it)) > 0
    assert all(w.label == "disordered" for w in epoch2)


def test_phase_series_is_seeded():
    panel = generate(SynthSpec(n_firms=40, n_days=800, seed=2))
    a = phase.phase_series(panel, width=504, step=252, seed=5, n_permutations=20)
    b = phase.phase_series(panel, width=504, step=252, seed=5, n_permutations=20)
    assert [w.band for w in a] == [w.band for w in b]
