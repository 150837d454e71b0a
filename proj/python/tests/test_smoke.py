import math

import numpy as np
import pytest

import barankin as bk


def reference_scenario(snr_db=0.0, zeta=0.5):
    return bk.DoaScenario(zeta=zeta, sigma2=0.5, doa_angle=0.9 * math.pi).with_snr_db(snr_db)


def test_linalg_helpers():
    np.testing.assert_allclose(bk.pseudo_inverse(np.ones((2, 2))), np.full((2, 2), 0.25), atol=1e-15)
    a = np.array([[1.0, 3.0], [2.0, 4.0]])
    np.testing.assert_array_equal(bk.vec(a), [1, 2, 3, 4])
    s = bk.vec_permutation(3)
    r = np.random.default_rng(0).normal(size=(3, 3))
    np.testing.assert_array_equal(bk.vec(r.T), s @ bk.vec(r))
    np.testing.assert_array_equal(bk.kronecker(np.eye(2), a), np.kron(np.eye(2), a))


def test_scenario_and_steering():
    s = reference_scenario()
    assert s.snr == pytest.approx(1.0)
    a = bk.steering_vector(s, 0.3)
    assert np.vdot(a, a).real == pytest.approx(4.0)
    assert bk.noiseless_mean(s).shape == (4,)
    th = s.theta
    assert th[0] ** 2 + th[1] ** 2 == pytest.approx(1.0)


def test_closed_form_matches_generic_engine():
    s = reference_scenario(-4.0)
    for h in (-2.0, 0.4, math.pi / 4):
        for hp in (-math.pi, -math.pi / 2, math.pi / 2):
            lu_cf = bk.lu_cbtb_candidate_closed_form(s, h, hp)["value"]
            lu_g = bk.lu_cbtb_candidate_generic(s, h, hp)["value"]
            cb_cf = bk.cbtb_candidate_closed_form(s, h, hp)["value"]
            cb_g = bk.cbtb_candidate_generic(s, h, hp)["value"]
            assert abs(lu_cf - lu_g) <= 1e-9 * max(1.0, lu_cf)
            assert abs(cb_cf - cb_g) <= 1e-9 * max(1.0, cb_cf)
            assert lu_cf <= cb_cf * (1 + 1e-9)
    np.testing.assert_allclose(
        np.exp(bk.b_log_matrix(s, 0.7, math.pi / 2)),
        np.exp(bk.b_log_matrix_gaussian(s, 0.7, math.pi / 2)),
        rtol=1e-10,
    )


def test_grid_bounds_ordering():
    for snr in (-20.0, 0.0, 30.0):
        s = reference_scenario(snr)
        lu = bk.lu_cbtb(s)
        cb = bk.cbtb(s)
        assert lu["candidate_count"] == 195
        assert lu["value"] <= cb["value"] * (1 + 1e-9)


def test_invalid_offset_raises():
    with pytest.raises(ValueError):
        bk.lu_cbtb_candidate_generic(reference_scenario(), 0.3, 0.4)


def test_linear_constraint_bounds_coincide():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 5))
    h = rng.normal(size=(6, 5))
    g = rng.normal(size=(5, 5))
    u = bk.linear_complement(a)
    pts = [u @ rng.normal(scale=0.5, size=3) for _ in range(4)]
    lu, cb = bk.linear_bounds(a, h, 0.8, g.T @ g, pts[0], pts[1:])
    assert abs(lu - cb) <= 1e-9 * max(1.0, cb)


def test_circle_lu_ccrb():
    c, lu = bk.circle_lu_ccrb(0.5)
    assert c == pytest.approx(0.5)
    assert lu == pytest.approx(0.5 / 1.5, rel=1e-12)


def test_cml_noiseless_recovery():
    s = reference_scenario()
    s.doa_angle = -math.pi + 2 * math.pi * 100 / 4096
    est = bk.cml_estimate(s, bk.noiseless_mean(s))
    assert est["phi_hat"] == pytest.approx(s.phase)
    assert est["alpha_hat"] == pytest.approx(s.alpha)
    assert abs(math.remainder(est["nu_angle"] - s.doa_angle, 2 * math.pi)) < 1e-7


def test_trials_are_deterministic():
    s = reference_scenario(5.0)
    a = bk.run_cml_trials(s, 300, seed=4, angle_grid_size=512)
    b = bk.run_cml_trials(s, 300, seed=4, angle_grid_size=512)
    assert a["wmse"] == b["wmse"]
    assert a["trials"] + a["failed"] == 300


def test_commands_and_verify():
    cfg = (
        '{"experiment": "snr-sweep", "scenario": {"zeta": 0.5, "sigma2": 0.5, "doa_angle_over_pi": 0.9},'
        ' "snr_list_db": [0, 10], "trials": 100, "seed": 3}'
    )
    out = bk.cmd_simulate(cfg)
    assert out.splitlines()[0].startswith("snr_db,cml_wmse")
    assert out == bk.cmd_simulate(cfg)
    assert len(bk.cmd_bounds(cfg).splitlines()) == 3
    with pytest.raises(ValueError):
        bk.cmd_bounds('{"experiment": "snr-sweep", "snr_list_db": []}')
    ok, text = bk.verify(["closed-form-equivalence", "circle-limit"])
    assert ok, text
    bad, text = bk.verify(["closed-form-equivalence"], gb_perturbation=0.01)
    assert not bad
    assert "FAIL closed-form-equivalence" in text
    assert len(bk.check_names()) == 9
