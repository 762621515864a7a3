import csv
import io
import shutil

import pytest

from helpers import FIXTURE_DIR
from hubreach.cli import OUTPUT_ENV, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def workdir(tmp_path):
    for name in ("communities.csv", "roads.geojson", "config.toml"):
        shutil.copy(FIXTURE_DIR / name, tmp_path / name)
    return tmp_path


def test_validate_clean_fixture(capsys):
    code, out, _ = run(capsys, "validate", "--config", str(FIXTURE_DIR / "config.toml"))
    assert code == 0
    assert out.strip().endswith("0 error(s), 6 warning(s)")


def test_validate_reports_row_errors(capsys, workdir):
    with (workdir / "communities.csv").open("a") as fh:
        fh.write("Broken,-20,abc,10\n")
    code, out, _ = run(capsys, "validate", "--config", str(workdir / "config.toml"))
    assert code == 1
    assert "non-numeric longitude" in out


def test_validate_missing_input(capsys, workdir):
    (workdir / "roads.geojson").unlink()
    code, out, _ = run(capsys, "validate", "--config", str(workdir / "config.toml"))
    assert code == 1 and "not found" in out


@pytest.mark.parametrize("argv", [
    ["validate"],
    ["bogus"],
    ["analyze", "--config", "x.toml", "--quiet", "--verbose"],
    ["charge-time"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_config_is_usage_error(capsys, tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[paths]\n")
    assert run(capsys, "validate", "--config", str(p))[0] == 2


def test_workers_must_be_positive(capsys):
    code, _, _ = run(capsys, "analyze", "--config", str(FIXTURE_DIR / "config.toml"), "--workers", "0")
    assert code == 2


def test_charge_time_rows(capsys):
    code, out, _ = run(capsys, "charge-time", "--vehicle", "low-range")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["charger"], r["minutes"], r["duration"]) for r in rows] == [
        ("L1", "1775", "29h 35m"), ("L1-effective", "1852", "30h 52m"),
        ("L2", "387", "6h 27m"), ("L3", "85", "1h 25m"),
    ]


def test_charge_time_short_and_config(capsys):
    code, out, _ = run(capsys, "charge-time", "--vehicle", "long-range", "--short",
                       "--config", str(FIXTURE_DIR / "config.toml"))
    assert code == 0 and "long-range,L3,50,50,120,2h\n" in out


def test_charge_time_unknown_vehicle(capsys):
    assert run(capsys, "charge-time", "--vehicle", "tractor")[0] == 1


def test_analyze_env_var_and_out_flag(capsys, workdir, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(workdir / "from_env"))
    assert run(capsys, "analyze", "--config", str(workdir / "config.toml"), "--workers", "1",
               "--quiet")[0] == 0
    assert (workdir / "from_env" / "hub5000-336km" / "table.csv").is_file()
    assert (workdir / "from_env" / "manifest.json").is_file()
    assert run(capsys, "analyze", "--config", str(workdir / "config.toml"), "--workers", "1",
               "--out", str(workdir / "flag"), "--quiet")[0] == 0
    assert (workdir / "flag" / "hub1000-660km" / "service_area_4R.geojson").is_file()


def test_analyze_single_scenario(capsys, workdir):
    cfg = workdir / "config.toml"
    text = cfg.read_text().split("[grid]")[0]
    cfg.write_text(text + '[[scenarios]]\nhub_population_threshold = 1000\nvehicle = "low-range"\n')
    assert run(capsys, "analyze", "--config", str(cfg), "--workers", "1", "--quiet")[0] == 0
    assert sorted(p.name for p in (workdir / "out").iterdir()) == ["hub1000-336km", "manifest.json"]


def test_analyze_rerun_is_byte_identical(capsys, workdir):
    cfg = str(workdir / "config.toml")
    for out in ("a", "b"):
        assert run(capsys, "analyze", "--config", cfg, "--workers", "1", "--out",
                   str(workdir / out), "--quiet")[0] == 0
    a = sorted(p.relative_to(workdir / "a") for p in (workdir / "a").rglob("*") if p.is_file())
    b = sorted(p.relative_to(workdir / "b") for p in (workdir / "b").rglob("*") if p.is_file())
    assert a == b
    for rel in a:
        if rel.name != "manifest.json":
            assert (workdir / "a" / rel).read_bytes() == (workdir / "b" / rel).read_bytes()


def test_analyze_data_error_leaves_no_output(capsys, workdir):
    with (workdir / "communities.csv").open("a") as fh:
        fh.write("Broken,-20,abc,10\n")
    assert run(capsys, "analyze", "--config", str(workdir / "config.toml"), "--quiet")[0] == 1
    assert not (workdir / "out").exists()
    assert not list(workdir.glob(".out-*"))


def test_zero_hubs_is_data_error(capsys, workdir):
    cfg = workdir / "config.toml"
    text = cfg.read_text().split("[grid]")[0]
    cfg.write_text(text + '[[scenarios]]\nhub_population_threshold = 99999999\nvehicle = "low-range"\n')
    assert run(capsys, "analyze", "--config", str(cfg), "--workers", "1", "--quiet")[0] == 1
    assert not (workdir / "out").exists()
