"""Render convergence-report CSVs as error/rate tables."""

from __future__ import annotations

import csv
from pathlib import Path

VARIABLES = ("psi1", "psi2", "q1", "q2")


class ReportError(ValueError):
    """Malformed convergence report."""


def read_report_csv(path) -> tuple[list[str], dict]:
    """Parse a convergence CSV with columns mesh_size, var, error, rate.

    Returns the mesh labels in file order and {(mesh, var): (error, rate)}
    with rate None on the coarsest mesh.
    """
    meshes: list[str] = []
    cells: dict = {}
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["mesh_size", "var", "error", "rate"]:
            raise ReportError(f"{path}: unexpected header {header}")
        for row in reader:
            if len(row) != 4:
                raise ReportError(f"{path}: bad row {row}")
            mesh, var, error, rate = row
            if mesh not in meshes:
                meshes.append(mesh)
            cells[(mesh, var)] = (float(error), float(rate) if rate else None)
    if not meshes:
        raise ReportError(f"{path}: empty report")
    return meshes, cells


def table_report(path) -> str:
    """Text table with an error & rate column pair per variable."""
    meshes, cells = read_report_csv(path)
    variables = [v for v in VARIABLES if any((m, v) in cells for m in meshes)]
    if not variables:
        variables = sorted({var for (_, var) in cells})

    header = f"{'mesh':>8} |"
    for var in variables:
        header += f" {var:>9} {'rate':>5} |"
    lines = [header, "-" * len(header)]
    for mesh in meshes:
        row = f"{mesh:>8} |"
        for var in variables:
            if (mesh, var) not in cells:
                row += f" {'':>9} {'':>5} |"
                continue
            error, rate = cells[(mesh, var)]
            rate_s = "" if rate is None else f"{rate:5.2f}"
            row += f" {error:9.2E} {rate_s:>5} |"
        lines.append(row)
    return "\n".join(lines) + "\n"


def write_table(path, out_path) -> Path:
    out_path = Path(out_path)
    out_path.write_text(table_report(path))
    return out_path
