import math
import os
from pathlib import Path

import numpy as np
import pytest

import lsecbf

DATA = Path(os.environ.get("LSECBF_TEST_DATA_DIR", Path(__file__).resolve().parents[2] / "tests" / "data"))


def box_pair(eps, gap=1.0):
    box = lsecbf.RigidPolytope.box(0.5, 0.5)
    return lsecbf.DistanceProblem(
        box.smoothed(eps),
        box.smoothed(eps),
        lsecbf.ParamVector.rigid_pose(0.0, 0.0, 0.0),
        lsecbf.ParamVector.rigid_pose(1.0 + gap, 0.0, 0.0),
    )


def test_lse_eps_plus_matches_closed_form():
    x = np.array([0.3, -1.2, 2.0])
    e = lsecbf.lse_eps_plus(x, 5.0)
    ref = math.log1p(np.exp(5.0 * x).sum()) / 5.0
    assert e["value"] == pytest.approx(ref, rel=1e-14)
    assert e["value"] > max(0.0, x.max())
    assert e["gradient"].sum() < 1.0
    assert e["hessian_min_eigenvalue"] > 0.0
    assert lsecbf.lse(np.array([0.0, 0.0])) == pytest.approx(math.log(2.0))


def test_invalid_epsilon_raises():
    with pytest.raises(lsecbf.InvalidInput):
        lsecbf.lse_eps_plus(np.array([1.0]), -1.0)


def test_distance_and_gradient():
    p = box_pair(20.0)
    s = lsecbf.solve_distance(p)
    assert s.status == lsecbf.SolveStatus.Optimal
    assert s.kkt_residual <= 1e-8
    # smoothed boxes bulge outward, so the gap shrinks below 1
    gap = float(np.linalg.norm(s.z_ego - s.z_obstacle))
    assert 0.8 < gap < 1.0
    g = lsecbf.distance_gradient(p, s)
    assert g["d_dlambda_obstacle"][0] > 0.0
    assert g["d_dlambda_ego"][0] == pytest.approx(-g["d_dlambda_obstacle"][0], rel=1e-8)
    env = lsecbf.envelope_gradient(p, s)
    assert np.allclose(env["d_dlambda_obstacle"], g["d_dlambda_obstacle"], rtol=1e-6)


def test_filter_qp_projects_onto_halfplane():
    row = lsecbf.SafetyConstraintRow(np.array([1.0, 0.0]), -1.0, 7)
    out = lsecbf.solve_filter_qp(np.array([0.0, 2.0]), [row])
    assert out["status"] == lsecbf.FilterStatus.Optimal
    assert np.allclose(out["u"], [1.0, 2.0])
    assert out["active_rows"] == [7]


def test_short_simulation(tmp_path):
    cfg = lsecbf.load_config(DATA / "head_on.json")
    cfg.t_final = 1.0
    tr = lsecbf.run_simulation(cfg)
    assert tr.num_ticks == 51
    assert tr.num_agents == 2
    assert tr.clean
    assert tr.min_h > 0.0
    assert tr.poses(0).shape == (51, 3)
    csv = lsecbf.write_trace(tr, tmp_path / "trace")
    assert Path(csv).read_text().startswith("t,agent_id,")


def test_bad_config_raises():
    with pytest.raises(lsecbf.ConfigError):
        lsecbf.load_config(DATA / "negative_dt.json")
