import json

import numpy as np
import pytest

from orthant_gibbs import cli, experiments


def run(argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def sim_dir(tmp_path):
    out = tmp_path / "sim"
    code = run(["simulate", "--model", "logistic", "--n", 300,
                "--theta-star", "[1,1,0]", "--seed", 5, "--out", out])
    assert code == 0
    return out


def test_simulate_writes_dataset_and_config(sim_dir):
    assert (sim_dir / "dataset.csv").exists()
    doc = json.loads((sim_dir / "model.json").read_text())
    assert doc["kind"] == "logistic" and doc["n"] == 300 and doc["seed"] == 5


def test_env_seed_overrides_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("ORTHANT_GIBBS_SEED", "99")
    out = tmp_path / "sim"
    run(["simulate", "--model", "logistic", "--n", 50,
         "--theta-star", "[1]", "--seed", 5, "--out", out])
    doc = json.loads((out / "model.json").read_text())
    assert doc["seed"] == 99


def test_mode_check_sample_pipeline(tmp_path, sim_dir):
    mode_path = tmp_path / "mode.json"
    assert run(["mode", "--model-config", sim_dir / "model.json",
                "--out", mode_path]) == 0
    mode_doc = json.loads(mode_path.read_text())
    assert mode_doc["converged"]

    check_path = tmp_path / "check.json"
    assert run(["check", "--model-config", sim_dir / "model.json",
                "--mode-result", mode_path, "--grid", 40,
                "--out", check_path]) == 0
    report = json.loads(check_path.read_text())
    assert report["s2_hat"] >= report["c_S0_hat"] > 0

    # unreachable threshold: exit code 1, report still written
    assert run(["check", "--model-config", sim_dir / "model.json",
                "--mode-result", mode_path, "--grid", 40,
                "--min-c-s0", 1e6, "--out", check_path]) == 1

    chain_path = tmp_path / "chain.csv"
    assert run(["sample", "--model-config", sim_dir / "model.json",
                "--step", 1e-3, "--steps", 400, "--burn-in", 200,
                "--seed", 1, "--out", chain_path]) == 0
    body = np.loadtxt(chain_path, delimiter=",", skiprows=1)
    assert body.shape == (200, 4)  # theta_0..theta_2, log_post
    assert np.all(body[:, :3] >= 0)


def test_sample_is_reproducible(tmp_path, sim_dir):
    paths = [tmp_path / f"chain{i}.csv" for i in range(2)]
    for path in paths:
        run(["sample", "--model-config", sim_dir / "model.json",
             "--step", 1e-3, "--steps", 100, "--seed", 4, "--out", path])
    a = paths[0].read_text().splitlines()
    b = paths[1].read_text().splitlines()
    assert a == b


def test_gap_exponential_benchmark(tmp_path, capsys):
    out = tmp_path / "gap.json"
    assert run(["gap", "--benchmark", "exponential", "--out", out]) == 0
    doc = json.loads(out.read_text())
    assert doc["exponential"]["gap"] == pytest.approx(0.25 + (np.pi / 20) ** 2,
                                                      rel=0.01)
    assert doc["exponential"]["implied_C_PI"] <= 4.0


def test_gap_all_benchmarks(tmp_path):
    out = tmp_path / "gap.json"
    assert run(["gap", "--grid-points", 4000, "--out", out]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"uniform", "gaussian", "exponential"}
    assert doc["uniform"]["gap"] == pytest.approx(np.pi**2, rel=0.01)
    assert doc["gaussian"]["gap"] == pytest.approx(1.0, rel=0.01)


def test_ess_study_outputs(tmp_path):
    out = tmp_path / "ess"
    code = run(["ess", "--preset", "asymptotic", "--model", "logistic",
                "--n-trials", 2, "--n-steps", 600, "--burn-in", 300,
                "--seed", 3, "--out", out])
    assert code == 0
    run_dir = out / "asymptotic_logistic_seed3"
    per_coord = (run_dir / "ess_per_coordinate.csv").read_text().splitlines()
    assert per_coord[0] == "trial,coordinate,ess"
    assert len(per_coord) == 1 + 2 * 10  # 2 trials x d=10
    llr = (run_dir / "llr_ess.csv").read_text().splitlines()
    assert llr[0] == "trial,ess" and len(llr) == 3
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["failures"] == [] and "config_hash" in manifest
    assert (run_dir / "chains" / "0.csv").exists()


def test_coverage_study_outputs(tmp_path):
    out = tmp_path / "cov"
    code = run(["coverage", "--preset", "asymptotic", "--model", "logistic",
                "--n-trials", 2, "--n-steps", 600, "--burn-in", 300,
                "--seed", 3, "--out", out])
    assert code == 0
    rows = (out / "asymptotic_logistic_seed3" / "coverage.csv"
            ).read_text().splitlines()
    assert rows[0] == "coordinate,coverage,is_boundary"
    assert len(rows) == 11  # d=10
    flags = [row.split(",")[2] for row in rows[1:]]
    assert flags.count("1") == 1  # exactly one boundary coordinate


def test_study_rerun_is_byte_identical(tmp_path):
    args = ["ess", "--preset", "asymptotic", "--model", "logistic",
            "--n-trials", 1, "--n-steps", 400, "--burn-in", 200, "--seed", 8]
    bodies = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert run(args + ["--out", out]) == 0
        run_dir = out / "asymptotic_logistic_seed8"
        bodies.append(((run_dir / "ess_per_coordinate.csv").read_bytes(),
                       (run_dir / "chains" / "0.csv").read_bytes()))
    assert bodies[0] == bodies[1]


def test_config_file_with_flag_override(tmp_path):
    config_path = tmp_path / "cfg.json"
    config_path.write_text(json.dumps({
        "preset": "asymptotic", "model": "logistic", "n_trials": 5,
        "n_steps": 400, "burn_in": 200, "seed": 2}))
    out = tmp_path / "run"
    assert run(["ess", "--config", config_path, "--n-trials", 1,
                "--out", out]) == 0
    manifest = json.loads(
        (out / "asymptotic_logistic_seed2" / "manifest.json").read_text())
    assert manifest["config"]["n_trials"] == 1  # flag beat the file
    assert manifest["config"]["n_steps"] == 400


def test_hard_error_exit_code(tmp_path):
    assert run(["mode", "--model-config", tmp_path / "missing.json",
                "--out", tmp_path / "m.json"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["mode", "--model-config", bad,
                "--out", tmp_path / "m.json"]) == 2


def test_preset_pins():
    config = experiments.preset_config("pre_asymptotic", "logistic")
    assert (config.d, config.n, config.n_trials) == (200, 800, 20)
    assert (config.n_steps, config.burn_in) == (30_000, 20_000)
    assert 0.1 <= config.step_size <= 0.5
    config = experiments.preset_config("asymptotic", "poisson")
    assert (config.d, config.n) == (10, 1000)
    assert 0.001 <= config.step_size <= 0.01
