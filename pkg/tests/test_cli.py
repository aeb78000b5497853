"""The command line entry points, driven through click's test runner."""

import json

import pytest
from click.testing import CliRunner

from aktest import DiscreteGridDistribution, save_distribution_spec
from aktest.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def write_four_atoms(tmp_path):
    """Interleaved point masses on a line: A_j distance is j / 2."""
    p = DiscreteGridDistribution.from_atoms({(0.0,): 0.5, (2.0,): 0.5})
    q = DiscreteGridDistribution.from_atoms({(1.0,): 0.5, (3.0,): 0.5})
    p_path, q_path = tmp_path / "p.json", tmp_path / "q.json"
    save_distribution_spec(p, p_path, normalized=True)
    save_distribution_spec(q, q_path, normalized=True)
    return p_path, q_path


def write_constants(tmp_path, **values):
    path = tmp_path / "constants.json"
    path.write_text(json.dumps(values))
    return path


def gen_hard(runner, tmp_path, case, seed=5, name="inst"):
    out = tmp_path / name
    result = runner.invoke(
        main,
        [
            "gen-hard",
            "--k", "8",
            "--m", "1",
            "--eps", "1.0",
            "--case", case,
            "--seed", str(seed),
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    return out, json.loads(result.output)


def test_gen_hard_equal_case(runner, tmp_path):
    out, summary = gen_hard(runner, tmp_path, "equal")
    assert summary["case"] == "equal"
    assert 0 <= summary["heavy"] <= summary["squares"]
    assert summary["ak_lower_bound"] == 0.0
    assert (out / "p.json").read_bytes() == (out / "q.json").read_bytes()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["seed"] == 5
    assert meta["witness_rectangles"] == 0
    assert sum(1 for s in meta["squares"] if s["heavy"]) == summary["heavy"]


def test_gen_hard_is_reproducible(runner, tmp_path):
    first, _ = gen_hard(runner, tmp_path, "far", seed=9, name="a")
    second, _ = gen_hard(runner, tmp_path, "far", seed=9, name="b")
    for name in ("p.json", "q.json", "meta.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_gen_hard_far_case(runner, tmp_path):
    out, summary = gen_hard(runner, tmp_path, "far")
    assert summary["ak_lower_bound"] > 0.0
    assert (out / "p.json").read_bytes() != (out / "q.json").read_bytes()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["witness_rectangles"] > 0


def test_gen_hard_rejects_large_heavy_budget(runner, tmp_path):
    result = runner.invoke(
        main,
        ["gen-hard", "--k", "8", "--m", "4", "--eps", "1.0",
         "--case", "far", "--seed", "0", "--out", str(tmp_path / "x")],
    )
    assert result.exit_code == 2


def test_test_round_trip_accepts_generated_equal_pair(runner, tmp_path):
    out, _ = gen_hard(runner, tmp_path, "equal")
    constants = write_constants(tmp_path, c_kappa=1e5, s_multiplier=0.01)
    result = runner.invoke(
        main,
        ["test", str(out / "p.json"), str(out / "q.json"),
         "--k", "8", "--eps", "1.0", "--seed", "3",
         "--constants", str(constants)],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["decision"] == "accept"
    assert report["d"] == 2
    assert report["mode"] == "practical"
    assert report["statistic"] < report["threshold"]
    assert report["samples_used"] >= report["batch_size"]


def test_test_rejects_dimension_mismatch(runner, tmp_path):
    p_path, _ = write_four_atoms(tmp_path)
    planar = DiscreteGridDistribution.from_atoms({(0.0, 0.0): 1.0})
    q_path = tmp_path / "planar.json"
    save_distribution_spec(planar, q_path, normalized=True)
    result = runner.invoke(
        main, ["test", str(p_path), str(q_path), "--k", "2", "--eps", "1.0"]
    )
    assert result.exit_code == 2
    assert "dimension mismatch" in result.output


def test_test_rejects_malformed_spec(runner, tmp_path):
    p_path, q_path = write_four_atoms(tmp_path)
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"bogus": 1}))
    result = runner.invoke(
        main, ["test", str(p_path), str(broken), "--k", "2", "--eps", "1.0"]
    )
    assert result.exit_code == 2


def test_oracle_reports_value_and_witness(runner, tmp_path):
    p_path, q_path = write_four_atoms(tmp_path)
    result = runner.invoke(main, ["oracle", str(p_path), str(q_path), "--k", "2"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["value"] == 1.0
    assert report["k"] == 2
    assert len(report["witness"]) == 2
    for rect in report["witness"]:
        assert len(rect["lo"]) == 1 and rect["lo"] <= rect["hi"]


def experiment_config(tmp_path, **overrides):
    spec = {
        "family": ["uniform-equal", "hist-far"],
        "k": 4,
        "eps": 1.0,
        "trials": 2,
        "seed": 13,
        "constants": {"c_kappa": 1e5, "s_multiplier": 0.01},
    }
    spec.update(overrides)
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(spec))
    return path


HEADER = "schema,trial,seed,family,k,d,eps,m,verdict,statistic,threshold,wall_ms"


def test_experiment_writes_csv_and_sidecar(runner, tmp_path):
    config = experiment_config(tmp_path)
    out = tmp_path / "results.csv"
    result = runner.invoke(main, ["experiment", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 1 + 4  # two combos, two trials each
    trials = [int(line.split(",")[1]) for line in lines[1:]]
    assert trials == [0, 1, 2, 3]
    sidecar = json.loads((tmp_path / "results.csv.config.json").read_text())
    assert sidecar["seed"] == 13
    assert "rows appended to" in result.output
    assert "uniform-equal" in result.output and "hist-far" in result.output


def strip_wall_ms(path):
    return [line.rsplit(",", 1)[0] for line in path.read_text().splitlines()]


def test_experiment_rows_do_not_depend_on_jobs(runner, tmp_path):
    config = experiment_config(tmp_path)
    serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    first = runner.invoke(main, ["experiment", str(config), "--out", str(serial)])
    second = runner.invoke(
        main, ["experiment", str(config), "--out", str(parallel), "--jobs", "2"]
    )
    assert first.exit_code == 0 and second.exit_code == 0
    assert strip_wall_ms(serial) == strip_wall_ms(parallel)


def test_experiment_appends_without_repeating_the_header(runner, tmp_path):
    config = experiment_config(tmp_path)
    out = tmp_path / "results.csv"
    for _ in range(2):
        result = runner.invoke(main, ["experiment", str(config), "--out", str(out)])
        assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines.count(HEADER) == 1
    assert len(lines) == 1 + 8


def test_experiment_validates_its_config(runner, tmp_path):
    bad_family = experiment_config(tmp_path, family="gaussian")
    assert runner.invoke(main, ["experiment", str(bad_family)]).exit_code == 2
    no_seed = json.loads(experiment_config(tmp_path).read_text())
    del no_seed["seed"]
    path = tmp_path / "no_seed.json"
    path.write_text(json.dumps(no_seed))
    assert runner.invoke(main, ["experiment", str(path)]).exit_code == 2
    unknown = experiment_config(tmp_path, typo=1)
    assert runner.invoke(main, ["experiment", str(unknown)]).exit_code == 2


def test_verify_runs_a_named_suite(runner):
    result = runner.invoke(main, ["verify", "ramsey", "--seed", "1"])
    assert result.exit_code == 0, result.output
    lines = [line for line in result.output.splitlines() if line]
    assert lines and all(line.startswith("[PASS] ramsey/") for line in lines)


def test_verify_rejects_unknown_suites(runner):
    assert runner.invoke(main, ["verify", "nonesuch"]).exit_code == 2
