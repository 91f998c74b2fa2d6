# byzfed/io/results.py
"""
The results CSV: a header row, then one row per sweep point, columns in
the order of COLUMNS. Reals carry 9 significant digits; theory columns are
empty when no prediction exists. UTF-8, LF line endings.
"""

import csv
import io
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path

from ..core.error import UserException
from ..sim.sweep import SweepRow

COLUMNS: tuple[str, ...] = (
    "sweep_param",
    "sweep_value",
    "algorithm",
    "sim_test_mse",
    "sim_network_mse",
    "theory_e_phi",
    "theory_e_omega",
    "theory_e_theta",
    "theory_total",
    "mu_max_mean",
    "mu_max_ms",
    "mu_star",
    "replicas",
    "seed",
)


def format_real(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.9g}"


def format_row(row: SweepRow) -> list[str]:
    theory = row.theory
    return [
        row.sweep_param,
        format_real(row.sweep_value),
        row.algorithm,
        format_real(row.sim_test_mse),
        format_real(row.sim_network_mse),
        format_real(theory.e_phi if theory is not None else None),
        format_real(theory.e_omega if theory is not None else None),
        format_real(theory.e_theta if theory is not None else None),
        format_real(theory.total if theory is not None else None),
        format_real(row.mu_max_mean),
        format_real(row.mu_max_ms),
        format_real(row.mu_star),
        str(row.replicas),
        str(row.seed),
    ]


def render_csv(rows: Iterable[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(format_row(row))
    return buffer.getvalue()


def write_atomic(path: str | os.PathLike, text: str):
    """
    Writes to a temporary file next to `path`, then renames it over `path`,
    so readers see either the old file or the complete new one.
    """
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        directory.mkdir(parents=True, exist_ok=True)
        fd, partial = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".partial", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            os.replace(partial, path)
        except BaseException:
            if os.path.exists(partial):
                os.remove(partial)
            raise
    except OSError as e:
        raise UserException(f"Failed to write {path}: {e.strerror}") from e


def write_results(rows: Sequence[SweepRow], path: str | os.PathLike):
    write_atomic(path, render_csv(rows))


def read_results(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


__all__ = [
    "COLUMNS",
    "format_real",
    "format_row",
    "read_results",
    "render_csv",
    "write_atomic",
    "write_results",
]
