"""Reading solver run directories: manifest, enstrophy series, field dumps.

This package is a pure consumer of the solver's file formats; it never
recomputes physics. A run directory contains a plain-text key-value
manifest, an enstrophy CSV (``t,E1,E2``), and field dumps in the plain-text
``.fld`` format (header ``nx ny x0 xf y0 yf time``, then ny rows of nx
values).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class RunDirectoryError(ValueError):
    """Missing or inconsistent run-directory contents."""


@dataclass
class Field:
    """One field dump: values indexed [j, i] plus its grid geometry."""

    values: np.ndarray
    nx: int
    ny: int
    x0: float
    xf: float
    y0: float
    yf: float
    time: float

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """imshow extent (left, right, bottom, top)."""
        return (self.x0, self.xf, self.y0, self.yf)


def read_fld(path) -> Field:
    path = Path(path)
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 7:
            raise RunDirectoryError(f"{path}: bad field header ({len(head)} entries)")
        nx, ny = int(head[0]), int(head[1])
        x0, xf, y0, yf, time = (float(v) for v in head[2:])
        values = np.loadtxt(fh, ndmin=2)
    if values.shape != (ny, nx):
        raise RunDirectoryError(f"{path}: expected {(ny, nx)} values, got {values.shape}")
    return Field(values, nx, ny, x0, xf, y0, yf, time)


def read_enstrophy_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    times, e1, e2 = [], [], []
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["t", "E1", "E2"]:
            raise RunDirectoryError(f"{path}: not an enstrophy CSV (header {header})")
        for row in reader:
            times.append(float(row[0]))
            e1.append(float(row[1]))
            e2.append(float(row[2]))
    return np.asarray(times), np.asarray(e1), np.asarray(e2)


def read_manifest(path) -> dict[str, str]:
    entries = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                key, value = line.split("=", 1)
                entries[key.strip()] = value.strip()
    return entries


class RunDirectory:
    """Lazy view of one finished run directory."""

    def __init__(self, path):
        self.path = Path(path)
        manifest_path = self.path / "manifest.txt"
        if not manifest_path.exists():
            raise RunDirectoryError(f"{self.path}: no manifest.txt (not a run directory?)")
        self.manifest = read_manifest(manifest_path)
        csv_name = self.manifest.get("enstrophy_csv")
        if csv_name and not (self.path / csv_name).exists():
            raise RunDirectoryError(
                f"{self.path}: manifest points at missing {csv_name}"
            )
        self._series = None
        self._fields: dict[str, Field] = {}

    @property
    def label(self) -> str:
        """Legend label built from the manifest: model kind plus mesh."""
        mode = self.manifest.get("filter", "?")
        mesh = self.manifest.get("mesh", "?")
        names = {"none": "unfiltered", "linear": "linear filter",
                 "nonlinear": "nonlinear filter"}
        return f"{names.get(mode, mode)} {mesh}"

    def enstrophy_series(self):
        if self._series is None:
            csv_name = self.manifest.get("enstrophy_csv")
            if not csv_name:
                raise RunDirectoryError(f"{self.path}: run has no enstrophy CSV")
            self._series = read_enstrophy_csv(self.path / csv_name)
        return self._series

    def field(self, name: str) -> Field:
        """Load a field dump by name, searching averages/ then final/.

        ``name`` may also be an explicit relative path to a .fld file.
        """
        if name in self._fields:
            return self._fields[name]
        candidates = [
            self.path / name,
            self.path / "averages" / f"{name}_avg.fld",
            self.path / "averages" / f"{name}.fld",
            self.path / "final" / f"{name}.fld",
        ]
        for cand in candidates:
            if cand.exists():
                self._fields[name] = read_fld(cand)
                return self._fields[name]
        raise RunDirectoryError(f"{self.path}: no field dump found for {name!r}")
