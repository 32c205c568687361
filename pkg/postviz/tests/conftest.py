import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criterion tests")


def write_fld(path, values, bounds=(0.0, 1.0, -1.0, 1.0), time=100.0):
    ny, nx = values.shape
    x0, xf, y0, yf = bounds
    with open(path, "w") as fh:
        fh.write(f"{nx} {ny} {x0:.17g} {xf:.17g} {y0:.17g} {yf:.17g} {time:.17g}\n")
        for row in values:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")


def make_run_dir(root, name, filter_mode="nonlinear", mesh=(8, 16), amplitude=1.0,
                 n_samples=101, t_end=100.0):
    """Synthetic but format-correct run directory."""
    rundir = root / name
    (rundir / "averages").mkdir(parents=True)
    (rundir / "final").mkdir()

    t = np.linspace(0.0, t_end, n_samples)
    e1 = 0.05 + 0.01 * amplitude * np.sin(0.3 * t)
    e2 = 0.026 + 0.005 * amplitude * np.cos(0.2 * t)
    rows = ["t,E1,E2"] + [f"{a:.17g},{b:.17g},{c:.17g}" for a, b, c in zip(t, e1, e2)]
    (rundir / "enstrophy.csv").write_text("\n".join(rows) + "\n")

    nx, ny = mesh
    x = (np.arange(nx) + 0.5) / nx
    y = -1.0 + 2.0 * (np.arange(ny) + 0.5) / ny
    X, Y = np.meshgrid(x, y)
    psi = amplitude * np.sin(np.pi * X) * np.sin(np.pi * Y)
    q = Y + 0.1 * amplitude * np.cos(np.pi * X)
    for fname, vals in (("psi1", psi), ("psi2", 0.5 * psi), ("q1", q), ("q2", -q)):
        write_fld(rundir / "averages" / f"{fname}_avg.fld", vals)
        write_fld(rundir / "final" / f"{fname}.fld", vals)

    (rundir / "manifest.txt").write_text(
        "mode = bench\n"
        "case = case1\n"
        f"mesh = {nx}x{ny}\n"
        f"filter = {filter_mode}\n"
        "alpha = 0.044\n"
        "dt = 2.5e-05\n"
        f"t_end = {t_end}\n"
        "enstrophy_csv = enstrophy.csv\n"
        "averages_dir = averages\n"
        "final_dir = final\n"
        "status = completed\n"
    )
    return rundir


@pytest.fixture
def run_dir(tmp_path):
    return make_run_dir(tmp_path, "run_nl")


@pytest.fixture
def four_run_dirs(tmp_path):
    specs = [
        ("dns", "none", (64, 128), 1.0),
        ("plain", "none", (8, 16), 1.3),
        ("lin", "linear", (8, 16), 0.8),
        ("nl", "nonlinear", (8, 16), 1.1),
    ]
    return [
        make_run_dir(tmp_path, name, filter_mode=mode, mesh=mesh, amplitude=amp)
        for name, mode, mesh, amp in specs
    ]
