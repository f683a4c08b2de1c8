import math

import numpy as np
import pytest

import fraccm


def test_special_functions():
    z = np.linspace(-3.0, 3.0, 13)
    np.testing.assert_allclose(fraccm.mittag_leffler(1.0, z), np.exp(z), rtol=1e-13)
    assert fraccm.mittag_leffler(0.5, -1.0) == pytest.approx(math.exp(1.0) * math.erfc(1.0), rel=1e-13)
    assert fraccm.mittag_leffler(0.6, 0.0, beta=0.6) == pytest.approx(1.0 / math.gamma(0.6), rel=1e-14)
    assert fraccm.wright(0.5, 1.0) == pytest.approx(math.exp(-0.25) / math.sqrt(math.pi), rel=1e-13)
    assert fraccm.wright_moment(0.5, 2) == pytest.approx(2.0 / math.gamma(2.0), rel=1e-14)
    assert fraccm.gamma(5.0) == pytest.approx(24.0)
    with pytest.raises(fraccm.DomainError):
        fraccm.wright(1.0, 0.5)
    with pytest.raises(fraccm.OverflowError):
        fraccm.mittag_leffler(0.5, 40.0)


def test_solve_first_order_is_exact():
    rows = fraccm.solve("model.alpha = 0.7\nmodel.kappa = 1.3\nchain.N_max = 1\ngrid.points = 64\n", times=[0.5, 2.0])
    assert [r["t"] for r in rows] == [0.5, 2.0]
    for r in rows:
        want = fraccm.mittag_leffler(0.7, 0.3 * r["t"] ** 0.7)
        assert r["max_norm"] == pytest.approx(want, rel=1e-12)


def test_bounds_and_identities():
    report = fraccm.bound_report("model.kappa = 1\nchain.N_max = 2\ngrid.points = 32\n", times=[1.0, 4.0])
    assert {r["regime"] for r in report} == {"critical"}
    assert all(r["pass"] for r in report)
    assert fraccm.regime(0.5) == "subcritical"
    assert fraccm.correlation_bound(1, 2.0, 0.5, 1.0) == pytest.approx(1.0)
    assert fraccm.djrbashian_identity_residual(0.5, -1.0, 0.3, 1.0) < 1e-6
    assert fraccm.beta_identity_residual(0.4, 0.7, 2.0) < 1e-12


def test_file_runs_and_errors(tmp_path):
    cfg = "grid.points = 32\nchain.N_max = 2\nchain.times = 0.5, 1\n"
    assert fraccm.run_solve(cfg, tmp_path) == 0
    assert (tmp_path / "chain_norms.csv").read_text().splitlines()[0] == "n,t,max_norm,probe_value"
    assert fraccm.run_verify(cfg, tmp_path, check="beta") == 0
    assert "beta" in fraccm.verify_checks()
    with pytest.raises(fraccm.ConfigError, match="line 1"):
        fraccm.solve("model.alpha = 3\n")
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(fraccm.IoError):
        fraccm.run_solve(cfg, blocker)
