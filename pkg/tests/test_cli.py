import json

import pytest

from cmc_darboux import cli
from cmc_darboux.errors import ConfigError
from cmc_darboux.spectral import resonance_mu


def run(tmp_path, *args):
    code = cli.main([*args, "--out", str(tmp_path)])
    return code


def test_parse_mu():
    assert cli.parse_mu("-1,0") == -1
    assert cli.parse_mu("0.5,-2") == 0.5 - 2j
    assert cli.parse_mu("3") == 3
    assert cli.parse_mu("mu2") == resonance_mu(2)
    with pytest.raises(ConfigError):
        cli.parse_mu("mu1")
    with pytest.raises(ConfigError):
        cli.parse_mu("1,2,3")


def test_transform_minus_one(tmp_path, capsys):
    assert run(tmp_path, "transform", "--surface", "cylinder", "--mu", "-1,0", "--nx", "8", "--ny", "16") == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["real_part_spread"] <= 1e-9
    assert summary["seam_welded"] is True
    for name in ("f.obj", "f.ply", "f_hat.obj", "f_hat.ply", "stamp.json"):
        assert (tmp_path / name).exists()
    stamp = json.loads((tmp_path / "stamp.json").read_text())
    assert stamp["config"]["mu"] == "-1,0"
    assert "time" not in json.dumps(stamp)


def test_outputs_are_deterministic(tmp_path):
    names = ("holonomy.csv", "holonomy.json", "stamp.json")
    runs = []
    for _ in range(2):
        assert run(tmp_path, "holonomy", "--mu", "0.3,0.2", "--nx", "4", "--ny", "8") == 0
        runs.append([(tmp_path / n).read_bytes() for n in names])
    assert runs[0] == runs[1]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"mu": "0.25", "nx": 4, "ny": 8, "which": "minus"}))
    out = tmp_path / "o"
    assert cli.main(["transform", "--config", str(cfg), "--which", "plus", "--format", "obj", "--out", str(out)]) == 0
    stamp = json.loads((out / "stamp.json").read_text())
    assert stamp["config"]["which"] == "plus"
    assert not (out / "f.ply").exists()


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"mu": "0.25", "colour": "red"}))
    assert cli.main(["transform", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_bad_flag_is_config_error(tmp_path):
    assert run(tmp_path, "transform", "--mu", "2", "--bogus") == 2
    assert run(tmp_path, "transform") == 2
    assert cli.main([]) == 2


def test_numeric_failure_writes_error(tmp_path):
    assert run(tmp_path, "transform", "--mu", "1", "--nx", "4", "--ny", "8") == 3
    err = json.loads((tmp_path / "error.json").read_text())
    assert err["error"] == "MuOne" and err["exit_code"] == 3


def test_open_strip_for_generic_section(tmp_path):
    assert run(tmp_path, "transform", "--surface", "nodoid", "--neck", "0.3", "--mu", "0.5,0.5",
               "--which", "initial", "--nx", "8", "--ny", "16") == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["seam_welded"] is False


def test_mu_polar(tmp_path):
    assert run(tmp_path, "transform", "--mu-polar", "1,3.141592653589793", "--nx", "4", "--ny", "8") == 0
    assert run(tmp_path, "transform", "--mu-polar", "1,3", "--mu", "2", "--nx", "4", "--ny", "8") == 2


def test_riccati_and_validate(tmp_path):
    assert run(tmp_path / "r", "riccati", "--r", "0.5", "--sign", "+", "--nx", "8", "--ny", "16") == 0
    s = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert s["constraint_residual"] < 1e-8
    assert run(tmp_path / "v", "validate", "--surface", "unduloid", "--nx", "8", "--ny", "16") == 0
    assert json.loads((tmp_path / "v" / "validation.json").read_text())["ok"] is True


def test_scan(tmp_path):
    assert run(tmp_path, "spectral-scan", "--segment", "0.1,0.5,4", "--nx", "4", "--ny", "8") == 0
    assert (tmp_path / "scan.csv").read_text().startswith("mu_re,")
    assert (tmp_path / "plot_scan.py").exists()
