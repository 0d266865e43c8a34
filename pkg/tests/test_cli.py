import json

import numpy as np
import pytest

from gksl_grape import cli, output
from gksl_grape.core import GATE_H, SystemParams
from gksl_grape.optimizer import OptimizerConfig
from gksl_grape.gradient import QuadratureConfig


def write_config(tmp_path, obj, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_empty_config_is_paper_default(tmp_path):
    cfg = cli.load_config(write_config(tmp_path, {}))
    assert cfg.system == SystemParams(omega=1.0, mu=0.1, gamma=0.01)
    assert (cfg.T, cfg.M) == (5.0, 10)
    assert cfg.optimizer == OptimizerConfig(h0=1.0, c=1.1, d=0.5, epsilon=1e-3, L_stuck=20)
    assert cfg.quadrature == QuadratureConfig(20)
    assert cfg.initial_controls == "paper_default"
    assert cfg.gate == "H"


def test_gate_selection(tmp_path):
    cfg = cli.load_config(write_config(tmp_path, {"gate": "x"}))
    assert cfg.gate == "X"
    prob = cfg.problem()
    np.testing.assert_allclose(prob.targets[0], [0, 0, -1], atol=1e-15)

    explicit = {"gate": output.complex_to_json(GATE_H)}
    cfg = cli.load_config(write_config(tmp_path, explicit))
    np.testing.assert_allclose(cfg.problem().targets,
                               cli.parse_config({"gate": "H"}).problem().targets, atol=1e-15)
    assert cfg.gate_label() == "custom"


@pytest.mark.parametrize("raw, field", [
    ({"system": {"gamma": -1}}, "system"),
    ({"system": {"mu": 0}}, "system"),
    ({"system": {"kappa": 1}}, "system.kappa"),
    ({"grid": {"M": 0}}, "grid"),
    ({"gate": "Z"}, "gate"),
    ({"gate": {"real": [[1, 1], [0, 1]], "imag": [[0, 0], [0, 0]]}}, "gate"),
    ({"optimizer": {"d": 1.5}}, "optimizer"),
    ({"optimizer": {"c": "fast"}}, "optimizer.c"),
    ({"quadrature": {"n_partition": 0}}, "quadrature"),
    ({"initial_controls": {"u": [0] * 10, "n": [-1] * 10}}, "initial_controls.n"),
    ({"initial_controls": {"u": [0] * 3, "w": [0] * 3}}, "initial_controls"),
    ({"spectrum": {"betas": [-1]}}, "spectrum.betas"),
    ({"bogus": 1}, "bogus"),
])
def test_invalid_config_names_field(raw, field):
    with pytest.raises(cli.ConfigError, match=f"^{field}"):
        cli.parse_config(raw)


def test_json_syntax_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "gate": "H",\n  "system": {"gamma" 0.1}\n}\n')
    with pytest.raises(cli.ConfigError, match=r"bad\.json:3:\d+"):
        cli.load_config(path)


def test_main_exit_codes(tmp_path, capsys):
    bad = write_config(tmp_path, {"system": {"gamma": -1}})
    assert cli.main(["grad-check", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "system" in capsys.readouterr().err
    assert cli.main(["grad-check", "--config", str(tmp_path / "missing.json")]) == 2


def test_grad_check_command(tmp_path):
    rc = cli.main(["grad-check", "--out", str(tmp_path)])
    assert rc == 0
    report = json.loads((tmp_path / "grad_check.json").read_text())
    assert report["n_partition"] == 20
    assert report["rel_error_l2"] <= 1e-3


def test_spectrum_command(tmp_path):
    cfg = cli.parse_config({"spectrum": {"betas": [0.8, 1]}})
    summary = cli.execute("spectrum", cfg, tmp_path)
    data = output.read_csv(tmp_path / "spectrum.csv")
    assert set(data) == {"omega", "planck_beta_0.8", "planck_beta_1",
                         "filtered_beta_0.8_center_5"}
    assert np.all(data["filtered_beta_0.8_center_5"] <= data["planck_beta_0.8"])
    assert summary["total_density"]["planck_beta_1"] == pytest.approx(np.pi**2 / 15, rel=5e-3)
    assert (tmp_path / "spectrum.svg").read_text().startswith("<svg")


def test_propagate_command(tmp_path):
    cfg = cli.parse_config({"propagate": {"samples_per_interval": 4}})
    summary = cli.execute("propagate", cfg, tmp_path)
    for j in range(1, 5):
        data = output.read_csv(tmp_path / f"trajectory_state{j}.csv")
        assert data["t"].size == 10 * 4 + 1
        assert data["t"][-1] == pytest.approx(5.0)
        r = np.stack([data["r_x"], data["r_y"], data["r_z"]], axis=1)
        assert np.all(np.linalg.norm(r, axis=1) <= 1 + 1e-9)
    assert len(summary["states"]) == 4


def test_channel_command(tmp_path):
    report = cli.execute("channel", cli.parse_config({}), tmp_path)
    assert report["min_eigenvalue"] >= -1e-8
    assert report["tp_residual"] <= 1e-10
    assert report["stiefel_orthonormality_residual"] <= 1e-10
    stored = json.loads((tmp_path / "channel.json").read_text())
    choi = output.complex_from_json(stored["choi"])
    assert choi.shape == (4, 4)
    np.testing.assert_allclose(choi, choi.conj().T, atol=1e-14)
    traj = json.loads((tmp_path / "stiefel_trajectory.json").read_text())
    assert len(traj) == 11 and traj[0]["t"] == 0.0


@pytest.fixture(scope="module")
def optimized_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("opt")
    rc = cli.main(["optimize", "--out", str(out)])
    assert rc == 0
    return out


def test_optimize_command_outputs(optimized_run):
    summary = json.loads((optimized_run / "summary.json").read_text())
    assert summary["stop_reason"] == "threshold"
    assert summary["final_objective"] < 1e-3
    conv = output.read_csv(optimized_run / "convergence.csv")
    assert conv["l"].size == summary["iterations"] + 1
    assert np.all(np.diff(conv["objective"]) <= 0)
    ctrl = output.read_csv(optimized_run / "controls.csv")
    assert list(ctrl) == ["t", "u", "n"]
    assert np.all(ctrl["n"] >= 0)
    for name in ("controls_u", "controls_n", "convergence", "grad_norm"):
        assert (optimized_run / f"{name}.svg").exists()


def test_seed_controls_round_trip(optimized_run, tmp_path):
    # propagating the saved optimum reproduces the optimized objective
    rc = cli.main(["propagate", "--seed-controls", str(optimized_run / "controls.csv"),
                   "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((optimized_run / "summary.json").read_text())
    traj = json.loads((tmp_path / "trajectory_summary.json").read_text())
    assert traj["objective"] == pytest.approx(summary["final_objective"], rel=1e-12)


def test_optimize_is_byte_identical(optimized_run, tmp_path):
    assert cli.main(["optimize", "--out", str(tmp_path)]) == 0
    for name in ("convergence.csv", "controls.csv", "summary.json",
                 "convergence.svg", "controls_u.svg"):
        assert (tmp_path / name).read_bytes() == (optimized_run / name).read_bytes()


def test_csv_uses_full_precision(tmp_path):
    output.write_csv(tmp_path / "x.csv", ["a"], [[1 / 3]])
    text = (tmp_path / "x.csv").read_text().splitlines()
    assert text == ["a", "0.33333333333333331"]
    assert output.read_csv(tmp_path / "x.csv")["a"][0] == 1 / 3
