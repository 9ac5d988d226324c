"""The expsplit command line interface."""

import json

import pytest

from expsplit.cli import main


TINY = ["--grid", "7", "--kmin", "3", "--kmax", "5", "--ref-factor", "8"]


def test_run_writes_outputs(tmp_path, capsys):
    rc = main(["run", "--problem", "manufactured:decaying-sine",
               "--out", str(tmp_path), "--plot", "--guides", "1,2", *TINY])
    assert rc == 0
    for name in ("report.csv", "report.json", "plot.svg"):
        assert (tmp_path / name).exists()
    out = capsys.readouterr().out
    assert "fitted order" in out
    assert "reference gap" in out


def test_run_config_file_with_flag_override(tmp_path, capsys):
    cfg = {"problem": "manufactured:decaying-sine", "grid": 9,
           "kmin": 3, "kmax": 5, "ref_factor": 8,
           "schemes": "lie,strangb", "out": str(tmp_path / "from-config")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = main(["run", "--config", str(cfg_path), "--grid", "7"])
    assert rc == 0
    report = json.loads((tmp_path / "from-config" / "report.json").read_text())
    assert report["grid"] == 7  # flag overrides the config file
    assert set(report["fitted_orders"]) == {"lie", "strang_b"}


def test_run_rejects_unknown_config_key(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"problem": "example2", "color": "red"}))
    with pytest.raises(SystemExit):
        main(["run", "--config", str(cfg_path)])


def test_run_requires_problem():
    with pytest.raises(SystemExit):
        main(["run", *TINY])


def test_run_rejects_bad_norm(tmp_path):
    with pytest.raises(ValueError):
        main(["run", "--problem", "example2", "--norm", "h1",
              "--out", str(tmp_path), *TINY])


def test_verify_passes(capsys):
    rc = main(["verify"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[PASS]" in out
    assert "[FAIL]" not in out
