import numpy as np
import pytest

from postviz.figures import plot_enstrophy, plot_field
from postviz.rundir import RunDirectory, RunDirectoryError

PNG_MAGIC = b"\x89PNG"


def assert_is_png(path):
    assert path.exists()
    assert path.read_bytes()[:4] == PNG_MAGIC


class TestPlotEnstrophy:
    def test_single_run_full_and_zoom(self, run_dir, tmp_path):
        out = plot_enstrophy([run_dir], tmp_path / "e.png", window=(0, 100))
        assert_is_png(out)

    def test_four_labeled_curves(self, four_run_dirs, tmp_path):
        out = plot_enstrophy(
            four_run_dirs, tmp_path / "four.png",
            window=(20.0, 100.0), zoom=(60.0, 70.0),
        )
        assert_is_png(out)

    def test_empty_window_is_an_error(self, run_dir, tmp_path):
        with pytest.raises(RunDirectoryError, match="window"):
            plot_enstrophy([run_dir], tmp_path / "none.png", window=(500.0, 600.0))
        assert not (tmp_path / "none.png").exists()

    def test_no_runs_is_an_error(self, tmp_path):
        with pytest.raises(RunDirectoryError, match="at least one"):
            plot_enstrophy([], tmp_path / "x.png")

    def test_svg_output(self, run_dir, tmp_path):
        out = plot_enstrophy([run_dir], tmp_path / "e.svg")
        assert out.exists() and b"<svg" in out.read_bytes()[:300]


class TestPlotField:
    def test_average_heatmap(self, run_dir, tmp_path):
        out = plot_field(run_dir, "psi1", tmp_path / "psi1.png")
        assert_is_png(out)

    def test_planetary_field_renders(self, run_dir, tmp_path):
        out = plot_field(run_dir, "q1", tmp_path / "q1.png")
        assert_is_png(out)

    def test_absolute_difference_nonnegative(self, four_run_dirs, tmp_path):
        a, b = four_run_dirs[2], four_run_dirs[3]
        out = plot_field(a, "psi1", tmp_path / "diff.png", diff_with=b)
        assert_is_png(out)
        fa = RunDirectory(a).field("psi1").values
        fb = RunDirectory(b).field("psi1").values
        assert np.all(np.abs(fa - fb) >= 0.0)

    def test_shape_mismatch_rejected(self, four_run_dirs, tmp_path):
        dns, coarse = four_run_dirs[0], four_run_dirs[1]
        with pytest.raises(RunDirectoryError, match="shapes differ"):
            plot_field(dns, "psi1", tmp_path / "d.png", diff_with=coarse)

    def test_missing_field_rejected(self, run_dir, tmp_path):
        with pytest.raises(RunDirectoryError, match="no field dump"):
            plot_field(run_dir, "zeta9", tmp_path / "x.png")
