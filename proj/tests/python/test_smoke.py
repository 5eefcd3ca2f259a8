import json
import math
import os
import subprocess

import pytest

import gibbsinv as gi


def poisson_targets(rho1, r_max=4.0):
    f = gi.RadialFunction.zeros(1, 0.05, r_max, 0.0)
    return gi.RadialFunction(1, 0.05, r_max, [rho1 * rho1] * len(f), 0.0)


def test_hard_core_grid():
    g = gi.pure_hard_core()
    assert g.core_value == -1.0
    assert len(g) == 140
    assert g.bin_centers()[0] == pytest.approx(1.025)
    assert gi.g_to_phi(g).core_value == math.inf


def test_rod_density():
    assert gi.exact_rod_density(1.0, 1.5) == pytest.approx(1.75 / 2.625 / 1.5)
    z = 1e-4
    assert gi.exact_ring_density(z, 50.0) == pytest.approx(z - 2 * z * z, rel=1e-7)


def test_ursell():
    g = gi.pure_hard_core(r_max=4.0)
    pts = [[0.0], [0.5], [0.9]]
    assert gi.ursell_direct(g, pts) == pytest.approx(2.0)
    assert gi.ursell_recurrence(g, pts[:1], pts[1:]) == pytest.approx(2.0)
    value, error = gi.integrate_ursell_a(g, 1)
    assert value == pytest.approx(-2.0)


def test_forward_and_solve():
    z = 1e-3
    f = gi.forward(z, gi.pure_hard_core(r_max=4.0), order=3)
    assert f["omega1"] == pytest.approx(z - 2 * z * z + 4.5 * z ** 3 - 32 / 3 * z ** 4, rel=1e-8)

    res = gi.solve(1e-3, poisson_targets(1e-3))
    assert res["z"] == pytest.approx(1e-3 + 2e-6, rel=1e-5)
    assert res["in_domain"]
    assert res["phi"].core_value == math.inf


def test_solve_rejects_bad_core():
    rho2 = gi.RadialFunction(1, 0.05, 4.0, [1e-6] * 60, 1e-7)
    with pytest.raises(gi.Inadmissible):
        gi.solve(1e-3, rho2)


def test_simulate():
    rho1, sigma = gi.simulate(0.1, gi.pure_hard_core(delta=0.25, r_max=3.0), 40.0, sweeps=20000, seed=3)
    assert abs(rho1 - gi.exact_ring_density(0.1, 40.0)) <= 4 * sigma


@pytest.mark.skipif("GIBBSINV_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_ursell(tmp_path):
    cfg = tmp_path / "u.json"
    cfg.write_text(json.dumps({"points": [0.0, 0.5, 0.9]}))
    out = tmp_path / "out"
    proc = subprocess.run([os.environ["GIBBSINV_CLI"], "--out", str(out), "ursell", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    table = json.loads((out / "ursell.json").read_text())["table"]
    assert table[-1]["recurrence"] == pytest.approx(2.0)
    assert (out / "manifest.json").exists()
