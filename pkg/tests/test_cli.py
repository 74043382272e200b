import json

import pytest

from holepair import cli
from holepair.experiments import ScanTable

MINIMAL = {"model": {"variant": "two_chain", "N": 2, "Omega": 0.5, "Delta": 0.1, "J": [0.25]},
           "experiment": "scan_purity_perturbation"}


def test_minimal_config_valid():
    cfg = cli.parse_config(json.dumps(MINIMAL))
    assert cfg.seed == 53710 and cfg.threads == "auto"


def test_unknown_key_rejected_with_path():
    doc = dict(MINIMAL, model=dict(MINIMAL["model"], Nu_typo=1))
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config(json.dumps(doc))
    assert exc.value.path == "model.Nu_typo"
    with pytest.raises(cli.ConfigError):
        cli.parse_config(json.dumps(dict(MINIMAL, bogus=1)))


def test_hopping_length_rejected():
    doc = dict(MINIMAL, model=dict(MINIMAL["model"], N=3))
    with pytest.raises(cli.ConfigError):
        cli.parse_config(json.dumps(doc))


def test_malformed_json_reports_line():
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config('{\n"experiment": }')
    assert exc.value.path.startswith("line 2")


def test_unknown_experiment():
    with pytest.raises(cli.ConfigError):
        cli.parse_config('{"experiment": "nope"}')


def test_grid_ranges():
    doc = {"experiment": "scan_cdw", "grid": {
        "curve_Omega_t": {"start": 0.01, "stop": 1, "count": 3, "scale": "log"},
        "N": {"values": [40]},
        "zeta": {"start": 0, "stop": 1, "count": 3},
    }}
    cfg = cli.parse_config(json.dumps(doc))
    assert cfg.grid["curve_Omega_t"] == pytest.approx([0.01, 0.1, 1.0])
    assert cfg.grid["N"] == [40] and cfg.grid["zeta"] == [0.0, 0.5, 1.0]
    for bad in ({"start": 0, "stop": 1, "count": 0}, {"start": 0, "stop": 1, "count": 2, "scale": "log"},
                {"start": 0, "stop": 1}, {"start": 0, "stop": 1, "count": 2, "step": 1}, []):
        with pytest.raises(cli.ConfigError):
            cli.parse_config(json.dumps({"experiment": "scan_cdw", "grid": {"N": bad}}))


def test_seed_and_threads_validated():
    for key, val in (("seed", -1), ("seed", 2**64), ("threads", 0), ("threads", "many")):
        with pytest.raises(cli.ConfigError):
            cli.parse_config(json.dumps(dict(MINIMAL, **{key: val})))


def test_write_table_format():
    t = ScanTable("t", [("a", ""), ("b", "u"), ("c", "")])
    t.add(0.1 + 0.2, "x,y", 3)
    text = cli.write_table(t)
    assert text == 'a,b,c\n0.3,"x,y",3\n'


def test_header_only():
    assert cli.write_table(ScanTable("t", [("a", "")])) == "a\n"


def test_nan_rejected():
    t = ScanTable("t", [("a", "")])
    t.add(float("nan"))
    with pytest.raises(ValueError):
        cli.write_table(t)


def test_roundtrip():
    t = ScanTable("t", [("a", ""), ("b", "")])
    for x in (1.25, -3e-12, 123456789012345.0, 0.1):
        t.add(x, "k")
    header, rows = cli.read_table(cli.write_table(t))
    assert header == ["a", "b"]
    assert [tuple(r) for r in rows] == t.rows


def test_main_writes_artifacts(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"grid": {"delta": [0.0, 0.2], "kind": ["hopping_asym"]}}))
    out = tmp_path / "run" / "purity"
    assert cli.main(["scan_purity_perturbation", "--config", str(conf), "--out", str(out)]) == 0
    csv_text = (tmp_path / "run" / "purity.csv").read_text()
    assert csv_text.splitlines()[0] == "delta,kind,purity"
    meta = json.loads((tmp_path / "run" / "purity.meta.json").read_text())
    assert meta["seed"] == 53710 and len(meta["config_sha256"]) == 64
    assert cli.main(["scan_purity_perturbation", "--config", str(conf), "--out", str(out) + "2"]) == 0
    assert (tmp_path / "run" / "purity2.csv").read_text() == csv_text


def test_main_error_record(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"model": {"Nu_typo": 1}}))
    assert cli.main(["build", "--config", str(conf)]) == 2
    rec = json.loads(capsys.readouterr().err)
    assert rec["path"] == "model.Nu_typo"


def test_verify_random_disorder(capsys):
    import io, sys

    conf = json.dumps({"model": {"N": 5, "Omega": 1.3, "Delta": 0.2, "nu": 0.5}, "seed": 3})
    sys_stdin = sys.stdin
    sys.stdin = io.StringIO(conf)
    try:
        assert cli.main(["verify", "--config", "-"]) == 0
    finally:
        sys.stdin = sys_stdin
    _, rows = cli.read_table(capsys.readouterr().out)
    vals = {r[0]: r[1] for r in rows}
    assert vals["h_residual"] < 1e-10 and vals["jump_residual"] < 1e-10


@pytest.mark.parametrize("cmd", ["build", "steady-state", "spectrum"])
def test_tool_commands(cmd, capsys):
    cfg = cli.parse_config(json.dumps({"experiment": cmd, "model": {"N": 2, "J": [0.7], "Omega": 1.0}}))
    t = cli.run(cfg)
    assert t.rows and cli.write_table(t)
