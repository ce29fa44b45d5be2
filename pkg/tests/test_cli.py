import json
import math

import pytest

from mrsle import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_partition_eval_value(capsys):
    code, out, _ = run(capsys, "partition", "eval", "--fn", "z_multiradial", "--kappa", "4", "--mu", "0",
                       "--angles", "0,3.14159")
    assert code == 0
    d = json.loads(out)
    assert d["log_abs"] == pytest.approx(0.5 * math.log(2), abs=1e-5)
    assert len(d["grad"]) == 2


def test_negative_kappa_is_config_error(capsys):
    code, _, err = run(capsys, "partition", "eval", "--fn", "z_multiradial", "--kappa", "-4", "--angles", "0,3")
    assert code == 2 and "kappa" in err


def test_load_config_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{}")
    cfg = cli.load_config(p)
    assert cfg.dt == 1e-4 and cfg.paths == 1000


def test_load_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kappa": 3, "bogus": 1}))
    with pytest.raises(cli.ConfigError, match="bogus"):
        cli.load_config(p)


def test_load_config_rejects_negative_kappa(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kappa": -1}))
    with pytest.raises(cli.ConfigError, match="kappa"):
        cli.load_config(p)


def test_negative_rho_rejected_for_transience(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kappa": 3, "rho": [-1.0], "angles": [0, 2]}))
    code, _, err = run(capsys, "verify", "transience", "--config", str(p))
    assert code == 2 and "rho_j >= 0" in err
    # the same weights are fine where transience is not needed
    assert cli.validate_config({"kappa": 3, "rho": [-1.0], "command": "sample"}).rho == [-1.0]


def test_sample_writes_driving_csv(tmp_path, capsys):
    out = tmp_path / "drive.csv"
    code, _, _ = run(capsys, "sample", "--kappa", "3", "--mu", "1", "--p", "3", "--angles", "0,2.094,4.189",
                     "--dt", "1e-4", "--steps", "200", "--paths", "2", "--seed", "7", "--out", str(out))
    assert code == 0
    rows = (tmp_path / "drive_0001.csv").read_text().splitlines()
    assert rows[0] == "step,time,omega1,omega2,omega3" and len(rows) == 202
    meta = json.loads((tmp_path / "drive_0001.csv.json").read_text())
    assert meta["params"]["config"]["seed"] == 7 and meta["path"] == 1


def test_trace_roundtrip(tmp_path, capsys):
    drv = tmp_path / "d.csv"
    assert run(capsys, "sample", "--kappa", "2", "--steps", "300", "--paths", "1", "--dt", "1e-3",
               "--out", str(drv))[0] == 0
    code, _, _ = run(capsys, "trace", "--in", str(drv), "--out", str(tmp_path / "t.csv"), "--stride", "10")
    assert code == 0
    assert (tmp_path / "t.csv").read_text().startswith("curve_index,time,re,im")


def test_verify_report_embeds_config(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "martingale", "--kappa", "2", "--mu", "0", "--angles", "0.5",
                     "--paths", "20", "--dt", "1e-3", "--out", str(out))
    rep = json.loads(out.read_text())
    assert code == 0 and rep["report"]["pass"]
    assert rep["config"]["paths"] == 20 and rep["config"]["command"] == "verify martingale"


def test_flags_override_config(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kappa": 2, "paths": 5, "dt": 1e-3, "angles": [0.0]}))
    out = tmp_path / "r.json"
    run(capsys, "verify", "martingale", "--config", str(p), "--paths", "7", "--out", str(out))
    assert json.loads(out.read_text())["config"]["paths"] == 7


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "sample", "--kappa", "9", "--steps", "10", "--paths", "1", "--out", "/dev/null")
    assert code == 2


def test_numeric_error_exit_code(capsys, monkeypatch):
    from mrsle import verify
    from mrsle.errors import NumericError

    def boom(*a, **k):
        raise NumericError("quadrature failed")

    monkeypatch.setattr(verify, "check_fusion_limit", boom)
    code, _, err = run(capsys, "verify", "fusion", "--kappa", "5")
    assert code == 3 and "quadrature" in err


def test_suite_smoke(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, _, err = run(capsys, "verify", "suite", "--preset", "smoke", "--seed", "42", "--only", "1,3",
                       "--out", str(out))
    rep = json.loads(out.read_text())
    assert code == 0 and rep["pass"] and rep["config"]["seed"] == 42
    assert "criterion  1" in err
    assert run(capsys, "suite", "--preset", "nope")[0] == 2


def test_worker_count_capped(monkeypatch):
    monkeypatch.setenv("SLE_THREADS", "1")
    assert cli.worker_count(8) == 1
    monkeypatch.delenv("SLE_THREADS")
    assert cli.worker_count(3) == 3


def test_process_pool_mapper_preserves_order():
    with cli.path_mapper(2) as m:
        assert list(m(abs, [-3, -1, -2])) == [3, 1, 2]
