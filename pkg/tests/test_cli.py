"""End-to-end harness runs: files, exit codes, byte determinism."""

import csv
from pathlib import Path

import pytest

from pq_approx.cli import COMMANDS, deterministic_map, main

MOMENTS = """
[moments]
n_values = [3, 5]
p = "19/20"
q = "9/10"
x_values = ["1/2", "1", "2"]
"""

KOROVKIN = """
[korovkin]
rule = "smooth"
n_values = [10, 25]
"""

RATES = """
[rates]
functions = ["u", "usq"]
n_values = [5, 10]
p = 0.95
q = 0.9
x_values = [0.5, 1.0, 2.0]
"""

BIVARIATE = """
[bivariate]
n1 = 3
n2 = 2
p1 = "9/10"
q1 = "4/5"
p2 = "19/20"
q2 = "7/10"
x_values = ["1/2", "2"]
y_values = ["1"]
"""

DENSITY = """
[density]
set = "squares"
horizons = [1000, 100000]
rule = "statonly"
"""

IDENTITIES = """
[identities]
n_max = 5
p = "9/10"
q = "1/2"
x_values = ["1", "3/2"]
"""

CONFIGS = {
    "moments": MOMENTS,
    "korovkin": KOROVKIN,
    "rates": RATES,
    "bivariate": BIVARIATE,
    "density": DENSITY,
    "identities": IDENTITIES,
}

EXPECTED_FILES = {
    "moments": ("moments.csv",),
    "korovkin": ("korovkin.csv", "korovkin_plot.csv"),
    "rates": ("rates.csv", "delta_profile.csv"),
    "bivariate": ("bivariate_battery.csv", "bivariate_moments.csv", "bivariate_plot.csv"),
    "density": ("density.csv", "st_check.csv", "density_plot.csv"),
    "identities": ("identities.csv",),
}


def _write_config(tmp_path: Path, command: str) -> Path:
    path = tmp_path / f"{command}.toml"
    path.write_text(CONFIGS[command], encoding="utf-8")
    return path


def _read_csv(path: Path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


@pytest.mark.parametrize("command", COMMANDS)
def test_command_end_to_end(tmp_path, command):
    config = _write_config(tmp_path, command)
    out = tmp_path / "out"
    rc = main([command, "--config", str(config), "--out", str(out), "--resolution", "256"])
    assert rc == 0
    for name in EXPECTED_FILES[command]:
        assert (out / name).is_file(), name
    # every run also writes the discrepancy catalogue
    rows = _read_csv(out / "discrepancies.csv")
    assert rows[0] == ["formula", "location", "printed", "oracle", "rel_gap"]
    assert len(rows) > 10


def test_moments_rational_mode_is_exact(tmp_path):
    config = _write_config(tmp_path, "moments")
    out = tmp_path / "out"
    rc = main(["moments", "--config", str(config), "--out", str(out), "--mode", "rational"])
    assert rc == 0
    rows = _read_csv(out / "moments.csv")
    header = rows[0]
    assert header == ["nu", "n", "p", "q", "x", "closed_oracle", "closed_printed", "brute", "rel_gap"]
    # nu=0 at any x: the moment is exactly pq = 171/200, written as a fraction
    nu0 = [r for r in rows[1:] if r[0] == "0"]
    assert nu0 and all(r[5] == "171/200" and r[7] == "171/200" for r in nu0)
    # oracle always matches brute force exactly in rational mode
    assert all(r[5] == r[7] for r in rows[1:])


def test_identities_all_zero_residuals(tmp_path):
    config = _write_config(tmp_path, "identities")
    out = tmp_path / "out"
    rc = main(["identities", "--config", str(config), "--out", str(out), "--mode", "rational"])
    assert rc == 0
    rows = _read_csv(out / "identities.csv")
    assert rows[0][0] == "identity"
    residual_col = rows[0].index("residual")
    assert rows[1:]
    assert all(r[residual_col] == "0" for r in rows[1:])


def test_density_outputs_exact_values(tmp_path):
    config = _write_config(tmp_path, "density")
    out = tmp_path / "out"
    rc = main(["density", "--config", str(config), "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "density.csv")
    squares = [r for r in rows[1:] if r[0] == "squares"]
    assert squares
    # floor(sqrt(1e5)) = 316 hits, kept as an exact reduced ratio
    assert any(r[2] == "316" and r[3] == "79/25000" for r in squares)


def test_byte_identical_across_runs_and_threads(tmp_path):
    # C1 / acceptance 10
    config = _write_config(tmp_path, "rates")
    outputs = []
    for tag, threads in (("a", "1"), ("b", "4"), ("c", "1")):
        out = tmp_path / tag
        rc = main([
            "rates", "--config", str(config), "--out", str(out),
            "--resolution", "256", "--threads", threads,
        ])
        assert rc == 0
        outputs.append({name.name: name.read_bytes() for name in sorted(out.iterdir())})
    assert outputs[0] == outputs[1] == outputs[2]


def test_exit_code_config_errors(tmp_path):
    good = _write_config(tmp_path, "moments")
    assert main(["moments", "--config", str(tmp_path / "missing.toml"), "--out", str(tmp_path / "o1")]) == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("not [valid", encoding="utf-8")
    assert main(["moments", "--config", str(bad), "--out", str(tmp_path / "o2")]) == 1
    assert main(["frobnicate", "--config", str(good), "--out", str(tmp_path / "o3")]) == 1
    assert main(["moments", "--config", str(good), "--out", str(tmp_path / "o4"), "--mode", "exact"]) == 1
    assert main(["moments", "--config", str(good), "--out", str(tmp_path / "o5"), "--resolution", "4"]) == 1


def test_exit_code_io_error(tmp_path):
    config = _write_config(tmp_path, "moments")
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    rc = main(["moments", "--config", str(config), "--out", str(blocker / "sub")])
    assert rc == 2


def test_missing_section_is_a_config_error(tmp_path):
    config = tmp_path / "empty.toml"
    config.write_text("[settings]\n", encoding="utf-8")
    assert main(["moments", "--config", str(config), "--out", str(tmp_path / "out")]) == 1


def test_deterministic_map_preserves_order():
    items = list(range(64))
    serial = deterministic_map(lambda v: v * v, items, threads=1)
    pooled = deterministic_map(lambda v: v * v, items, threads=8)
    assert serial == pooled == [v * v for v in items]


def test_config_settings_section_supplies_defaults(tmp_path):
    config = tmp_path / "cfg.toml"
    config.write_text(
        "[settings]\nmode = \"rational\"\nresolution = 128\n" + MOMENTS,
        encoding="utf-8",
    )
    out = tmp_path / "out"
    rc = main(["moments", "--config", str(config), "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "moments.csv")
    assert any("/" in r[5] for r in rows[1:])  # rational mode took effect
