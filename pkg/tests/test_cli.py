import io
import json
from pathlib import Path

import pytest
from pytest_mock import MockerFixture

from byzfed.io.cli import run_cli
from byzfed.io.results import COLUMNS, read_results
from byzfed.sim import SweepRow


def write_config(directory: Path, **sections) -> str:
    """Writes a small K=3 config with the given sections merged in."""
    config = {
        "network": {
            "num_clients": 3,
            "dim": 2,
            "shared_entries": 1,
            "round_size": 2,
            "stepsize": 0.05,
            "input_variance": 1.0,
            "noise_variance": 0.01,
        },
        "experiment": {"iterations": 40, "replicas": 2, "window": 10, "test_size": 5},
    }
    for name, section in sections.items():
        config[name] = config.get(name, {}) | section
    path = directory / "config.json"
    path.write_text(json.dumps(config))
    return str(path)


def cli(*argv: str) -> tuple[int, str, str]:
    """Runs the command line, returning the exit status, stdout and stderr."""
    stdout, stderr = io.StringIO(), io.StringIO()
    status = run_cli(list(argv), stdout=stdout, stderr=stderr)
    return status, stdout.getvalue(), stderr.getvalue()


def parse_lines(text: str) -> dict[str, str]:
    return dict(line.split(" = ", 1) for line in text.splitlines())


@pytest.mark.unit
def test_stepsize_without_attack(tmp_path: Path):
    """Test that an attack-free network has mu* = 0."""
    status, out, _ = cli("stepsize", "--config", write_config(tmp_path))
    assert status == 0
    values = parse_lines(out)
    assert values["mu_star"] == "0"
    assert float(values["mu_max_mean"]) == pytest.approx(2.0)
    assert 0.0 < float(values["mu_max_ms"]) <= 2.0


@pytest.mark.unit
def test_stepsize_under_attack(tmp_path: Path):
    """Test that an attack gives a positive optimal stepsize."""
    config = write_config(
        tmp_path,
        attack={"attack_probability": 0.5, "attack_variance": 0.5, "byzantine_clients": [0]},
    )
    status, out, _ = cli("stepsize", "--config", config)
    assert status == 0
    assert float(parse_lines(out)["mu_star"]) > 0.0


@pytest.mark.unit
def test_theory(tmp_path: Path):
    """Test that the decomposition adds up."""
    status, out, _ = cli("theory", "--config", write_config(tmp_path))
    assert status == 0
    values = {key: float(value) for key, value in parse_lines(out).items()}
    assert values["spectral_radius"] < 1.0
    assert values["theory_e_omega"] == 0.0
    total = values["theory_e_phi"] + values["theory_e_omega"] + values["theory_e_theta"]
    assert values["theory_total"] == pytest.approx(total, rel=1e-8)


@pytest.mark.unit
def test_theory_unstable(tmp_path: Path):
    """Test that an unstable stepsize fails and reports the spectral radius."""
    config = write_config(tmp_path, network={"stepsize": 5.0})
    status, out, err = cli("theory", "--config", config)
    assert status == 1
    assert out == ""
    assert "byzfed theory: error:" in err
    assert "spectral radius rho(F) =" in err


@pytest.mark.unit
def test_sweep_needs_axis(tmp_path: Path):
    """Test that sweep refuses a config without a sweep axis."""
    status, _, err = cli("sweep", "--config", write_config(tmp_path))
    assert status == 1
    assert "no experiment.sweep axis" in err


@pytest.mark.integration
def test_sweep_writes_csv(tmp_path: Path):
    """Test the results file of a two-point sweep."""
    config = write_config(
        tmp_path,
        experiment={"sweep": {"parameter": "stepsize", "values": [0.02, 0.05]}},
    )
    out_path = tmp_path / "results.csv"
    status, out, _ = cli("sweep", "--config", config, "--out", str(out_path), "--seed", "3")
    assert status == 0
    assert out == ""
    assert out_path.read_text().split("\n")[0] == ",".join(COLUMNS)
    rows = read_results(out_path)
    assert [row["sweep_value"] for row in rows] == ["0.02", "0.05"]
    assert all(row["seed"] == "3" and row["replicas"] == "2" for row in rows)
    assert all(row["theory_total"] != "" for row in rows)


@pytest.mark.integration
def test_sweep_output_is_reproducible(tmp_path: Path):
    """Test that the same plan and seed give the same bytes."""
    config = write_config(
        tmp_path,
        attack={"attack_probability": 0.5, "attack_variance": 0.5, "byzantine_count": 1},
        experiment={"sweep": {"parameter": "attack_variance", "values": [0.0, 0.5]}},
    )
    first = cli("sweep", "--config", config)
    second = cli("sweep", "--config", config)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]


@pytest.mark.integration
def test_simulate(tmp_path: Path):
    """Test the simulation summary and the metrics file."""
    out_path = tmp_path / "metrics.json"
    status, out, _ = cli("simulate", "--config", write_config(tmp_path), "--out", str(out_path), "--replicas", "1")
    assert status == 0
    assert "replicas = 1" in out
    assert "sim_test_mse = " in out
    metrics = json.loads(out_path.read_text())
    assert len(metrics["test_mse_trace"]) == 40


@pytest.mark.unit
@pytest.mark.parametrize(
    "argv",
    [
        ("bogus",),
        ("theory", "--seed", "-1"),
        ("simulate", "--replicas", "0"),
        ("preset", "fig10"),
    ],
)
def test_invalid_arguments(argv: tuple[str, ...]):
    """Test that argument errors exit with status 2."""
    status, _, _ = cli(*argv)
    assert status == 2


@pytest.mark.unit
def test_reported_errors(tmp_path: Path):
    """Test that module errors exit with status 1 and a message."""
    status, _, err = cli("theory", "--config", str(tmp_path / "absent.json"))
    assert status == 1
    assert "cannot read config" in err

    status, _, err = cli("stepsize", "--config", write_config(tmp_path), "--neumann-j", "2")
    assert status == 1
    assert "neumann_j >= 3" in err

    config = write_config(tmp_path, network={"shared_entries": 3})
    status, _, err = cli("theory", "--config", config)
    assert status == 1
    assert "M ≤ D violated" in err


@pytest.mark.integration
def test_theory_at_scale_skips_mse():
    """Test that the default K=50 network reports bounds and mu* without the MSE."""
    status, out, _ = cli("theory")
    assert status == 0
    values = parse_lines(out)
    assert values["theory_mse"] == "unavailable (K=50 > max_clients=12)"
    assert "theory_total" not in values
    assert "spectral_radius" not in values
    assert values["mu_star"] == "0"
    assert float(values["mu_max_ms"]) > 0.0


@pytest.mark.unit
def test_numbered_preset(mocker: MockerFixture):
    """Test that fig6 runs the stepsize preset, one sweep per series."""
    row = SweepRow(
        sweep_param="stepsize",
        sweep_value=0.03,
        algorithm="psofed",
        sim_test_mse=0.01,
        sim_network_mse=0.02,
        replicas=1,
        seed=0,
    )
    mock_sweep = mocker.patch("byzfed.io.cli.sweep", new=mocker.AsyncMock(return_value=[row]))

    status, out, _ = cli("preset", "fig6", "--replicas", "1")

    assert status == 0
    assert mock_sweep.await_count == 2
    for call in mock_sweep.await_args_list:
        plan = call.args[0]
        assert plan.sweep.parameter == "stepsize"
        assert plan.replicas == 1
    assert "# stepsize byzantine10\n" in out
    assert "# stepsize byzantine0\n" in out


@pytest.mark.slow
def test_stepsize_preset_has_interior_minimum(tmp_path: Path):
    """Test that the attacked series of fig6 is lowest strictly inside the stepsize grid."""
    out_path = tmp_path / "fig6.csv"
    status, _, _ = cli("preset", "fig6", "--replicas", "10", "--out", str(out_path))
    assert status == 0
    rows = read_results(tmp_path / "fig6-byzantine10.csv")
    values = [float(row["sim_test_mse"]) for row in rows]
    best = values.index(min(values))
    assert 0 < best < len(values) - 1


@pytest.mark.unit
def test_bad_thread_cap(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    """Test that a malformed BYZFED_THREADS is reported, not raised."""
    monkeypatch.setenv("BYZFED_THREADS", "many")
    status, _, err = cli("simulate", "--config", write_config(tmp_path))
    assert status == 1
    assert "BYZFED_THREADS must be an integer" in err
