import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from losmimo.bound import BoundCurve, optimal_snr_constant, rho_of_snr, upper_bound_relaxed
from losmimo.capacity import db_to_linear, equal_gain_rate
from losmimo.channel import effective_eta, rayleigh_geometry
from losmimo.planner import (
    InfeasibleRotation,
    continuous_eta,
    geometric_plan,
    guarantee_ratio,
    radial_antenna_count,
    radial_full_bank,
    rotation_angle,
    select_configuration,
)


def test_continuous_eta_examples():
    assert continuous_eta(db_to_linear(-10), 256, 256) == pytest.approx(0.16, abs=0.001)
    c = optimal_snr_constant()
    assert continuous_eta(c, 256, 256) == 1.0
    assert continuous_eta(100.0, 8, 32) == 1.0
    eta = continuous_eta(1.0, 256, 256)
    assert eta == pytest.approx(0.505, abs=5e-4)
    assert math.degrees(math.acos(eta)) == pytest.approx(59.7, abs=0.05)
    assert continuous_eta(1e-12, 16, 16) == 1 / 16


def test_rotation_angle_examples():
    assert rotation_angle(100.0, 16, 16) == 0.0
    assert math.degrees(rotation_angle(db_to_linear(-20), 256, 256)) == pytest.approx(87.1, abs=0.05)
    # rho / N_min = 0.4 at theta_t = 60 deg
    curve = BoundCurve(10, 10)
    snr = float(np.mean(curve.thresholds[2:4]))
    assert rho_of_snr(snr, curve) == 4
    ang = rotation_angle(snr, 10, 10, theta_t=math.radians(60), mode="integer", curve=curve)
    assert ang == pytest.approx(math.acos(0.8), abs=1e-12)
    assert math.degrees(ang) == pytest.approx(36.87, abs=0.01)


def test_rotation_infeasible():
    with pytest.raises(InfeasibleRotation):
        rotation_angle(100.0, 16, 16, theta_t=math.radians(30))
    with pytest.raises(ValueError):
        rotation_angle(1.0, 16, 16, mode="other")


@given(snr_db=st.floats(-40, 20), n=st.sampled_from([4, 16, 64, 256]))
def test_rotation_round_trip(snr_db, n):
    snr = db_to_linear(snr_db)
    theta = rotation_angle(snr, n, n)
    eta = effective_eta(rayleigh_geometry(n, elev_rx=theta))
    assert abs(eta - continuous_eta(snr, n, n)) < 1e-12


@pytest.mark.parametrize("n", [1, 4, 16])
def test_integer_mode_angles_match_bank(n):
    curve = BoundCurve(n, n)
    snrs = np.logspace(-8, 4, 2000)
    angles = {round(rotation_angle(s, n, n, mode="integer", curve=curve), 12) for s in snrs}
    bank = {round(a, 12) for a in radial_full_bank(n)}
    assert len(angles) == n
    assert angles == bank


def test_full_bank_examples():
    np.testing.assert_allclose(radial_full_bank(1), [0.0])
    np.testing.assert_allclose(np.degrees(radial_full_bank(4)), [75.5225, 60.0, 41.4096, 0.0], atol=1e-4)
    assert radial_antenna_count(16, 16) == 241
    with pytest.raises(ValueError):
        radial_full_bank(0)


def test_geometric_plan_examples():
    plan = geometric_plan(0.48, 256, 256, db_to_linear(-10))
    assert plan.count == 3
    np.testing.assert_allclose(np.degrees(plan.angles), [0.0, 61.3, 76.7], atol=0.05)
    assert plan.guarantee == pytest.approx(0.959, abs=5e-4)
    assert geometric_plan(0.48, 256, 256).count == 8
    assert guarantee_ratio(0.999) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        geometric_plan(1.0, 4, 4)
    with pytest.raises(ValueError):
        geometric_plan(0.0, 4, 4)


@given(r=st.floats(0.05, 0.95), n_tx=st.integers(2, 512), n_rx=st.integers(2, 512),
       snr_min_db=st.one_of(st.none(), st.floats(-40, 10)))
def test_plan_invariants(r, n_tx, n_rx, snr_min_db):
    plan = geometric_plan(r, n_tx, n_rx, None if snr_min_db is None else db_to_linear(snr_min_db))
    assert plan.etas[0] == 1.0
    assert np.all(np.diff(plan.etas) < 0)
    assert np.all(np.diff(plan.angles) > 0)
    assert np.all(np.diff(plan.snr_thresholds) < 0)
    assert plan.guarantee == pytest.approx(
        math.log2(1 + optimal_snr_constant() * r) / (math.sqrt(r) * math.log2(1 + optimal_snr_constant()))
    )
    if snr_min_db is not None and plan.count > 1:
        assert plan.covers(db_to_linear(snr_min_db))


def test_selection_examples():
    plan = geometric_plan(0.48, 256, 256, db_to_linear(-10))
    q = optimal_snr_constant()
    assert select_configuration(plan, q * 0.48 * 1.001) == (0, 1.0)
    idx, _ = select_configuration(plan, plan.snr_thresholds[0])
    assert idx == 1
    idx, eta = select_configuration(plan, db_to_linear(-10))
    assert idx == 2 and eta == pytest.approx(0.2304)
    assert select_configuration(plan, 1e-9)[0] == 2
    assert not plan.covers(1e-9)


def test_guarantee_examples():
    assert guarantee_ratio(1.0) == pytest.approx(1.0, abs=1e-15)
    assert guarantee_ratio(0.48) == pytest.approx(0.959, abs=5e-4)


@pytest.mark.parametrize("r", [0.3, 0.5, 0.7])
def test_guarantee_grid_minimum(r):
    c = optimal_snr_constant()
    xs = np.linspace(c * r, c / r, 200001)
    f = np.log2(1 + xs) / np.sqrt(xs)
    fc = math.log2(1 + c) / math.sqrt(c)
    assert f.min() / fc == pytest.approx(guarantee_ratio(r), abs=1e-9)


@pytest.mark.parametrize("r,snr_min_db,n_tx,n_rx", [
    (0.48, -10, 256, 256), (0.3, None, 64, 64), (0.7, -25, 32, 128), (0.5, None, 16, 16),
])
def test_rate_ratio_above_guarantee_on_covered_range(r, snr_min_db, n_tx, n_rx):
    plan = geometric_plan(r, n_tx, n_rx, None if snr_min_db is None else db_to_linear(snr_min_db))
    lo = 10 * math.log10(plan.snr_floor) + 1e-9
    for db in np.linspace(lo, 30, 300):
        snr = db_to_linear(db)
        _, eta = select_configuration(plan, snr)
        ratio = equal_gain_rate(eta, min(n_tx, n_rx), max(n_tx, n_rx), snr) / upper_bound_relaxed(snr, n_tx, n_rx)
        assert ratio >= plan.guarantee - 1e-9


def test_plan_to_dict():
    rec = geometric_plan(0.48, 256, 256, db_to_linear(-10)).to_dict()
    assert rec["count"] == 3 and rec["antennas"] == 3 * 255 + 1
    assert rec["snr_min_db"] == pytest.approx(-10)
    assert len(rec["snr_thresholds_db"]) == 2
