import os

import pytest

from byzfed.core import UserException
from byzfed.io.results import COLUMNS, format_real, read_results, render_csv, write_atomic, write_results
from byzfed.sim import SweepRow
from byzfed.theory.steady_state import MseDecomposition


@pytest.fixture
def rows() -> list[SweepRow]:
    """One row with a theory prediction and one without."""
    return [
        SweepRow(
            sweep_param="stepsize",
            sweep_value=0.05,
            algorithm="psofed",
            sim_test_mse=0.0123456789012,
            sim_network_mse=0.02,
            theory=MseDecomposition.from_terms(0.001, 0.002, 0.01),
            mu_max_mean=2 / 1.2,
            mu_max_ms=0.245,
            mu_star=0.03,
            replicas=100,
            seed=0,
        ),
        SweepRow(
            sweep_param="stepsize",
            sweep_value=0.1,
            algorithm="signsgd",
            sim_test_mse=0.5,
            sim_network_mse=0.25,
            replicas=100,
            seed=0,
        ),
    ]


@pytest.mark.unit
def test_header_and_column_order(rows: list[SweepRow]):
    """Test the column contract of the results file."""
    lines = render_csv(rows).split("\n")
    assert lines[0] == ",".join(COLUMNS)
    assert lines[0].startswith("sweep_param,sweep_value,algorithm,sim_test_mse,sim_network_mse,theory_e_phi")
    assert lines[0].endswith("mu_max_mean,mu_max_ms,mu_star,replicas,seed")
    assert lines[-1] == ""
    assert len(lines) == 4


@pytest.mark.unit
def test_row_values(rows: list[SweepRow]):
    """Test nine significant digits and blank theory columns."""
    lines = render_csv(rows).split("\n")
    first = dict(zip(COLUMNS, lines[1].split(",")))
    assert first["sim_test_mse"] == "0.0123456789"
    assert first["theory_total"] == "0.013"
    assert first["mu_max_mean"] == "1.66666667"
    assert first["replicas"] == "100"

    second = dict(zip(COLUMNS, lines[2].split(",")))
    for column in ("theory_e_phi", "theory_e_omega", "theory_e_theta", "theory_total", "mu_star"):
        assert second[column] == ""
    assert second["algorithm"] == "signsgd"


@pytest.mark.unit
def test_format_real():
    """Test the real formatting."""
    assert format_real(None) == ""
    assert format_real(0.0) == "0"
    assert format_real(1e-12) == "1e-12"
    assert format_real(123456789.123) == "123456789"


@pytest.mark.unit
def test_written_file(rows: list[SweepRow], tmp_path):
    """Test LF endings, the read-back and that no partial file remains."""
    path = tmp_path / "out" / "results.csv"
    write_results(rows, path)
    data = path.read_bytes()
    assert b"\r" not in data
    assert data.decode("utf-8") == render_csv(rows)
    assert os.listdir(path.parent) == ["results.csv"]

    read = read_results(path)
    assert [r["sweep_value"] for r in read] == ["0.05", "0.1"]
    assert read[1]["theory_total"] == ""


@pytest.mark.unit
def test_write_atomic_replaces(tmp_path):
    """Test that a rewrite replaces the whole file."""
    path = tmp_path / "file.txt"
    write_atomic(path, "first version\n")
    write_atomic(path, "second\n")
    assert path.read_text() == "second\n"


@pytest.mark.unit
def test_write_atomic_failure(tmp_path):
    """Test that an unwritable target is reported."""
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    with pytest.raises(UserException, match="Failed to write"):
        write_atomic(blocker / "results.csv", "x")
