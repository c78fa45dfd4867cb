import csv
import io
import json
import logging
import subprocess
import sys
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wqed import cli, figures
from wqed.cli import ConfigError, Drive, Grid, RunConfig, main, parse_config, serialize


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_minimal_config():
    cfg = parse_config('{"setup":"ss","g":0.125,"task":"poles"}')
    assert cfg.setup == "ss" and cfg.params == {"g": 0.125} and cfg.task == "poles"


def test_negative_rate_names_key():
    with pytest.raises(ConfigError) as info:
        parse_config('{"setup":"ss","g":-1,"task":"poles"}')
    assert info.value.path == "/g"


def test_nested_error_path():
    doc = {"task": "transmission", "system": {"atoms": [{"points": [{"position": 0, "strength": -1}]}]}}
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(doc))
    assert info.value.path == "/system/atoms/0/points/0/strength"


@pytest.mark.parametrize("doc, path", [
    ({"setup": "xx", "task": "poles"}, "/setup"),
    ({"setup": "ss", "task": "poles", "delta": 1.0}, "/delta"),
    ({"setup": "ss", "task": "flux", "grid": {"points": 1}}, "/grid/points"),
    ({"setup": "ss", "task": "flux", "grid": {"min": 1, "max": 0}}, "/grid/max"),
    ({"setup": "ss"}, "/task"),
    ({"task": "reproduce"}, "/target"),
    ({"setup": "ss", "task": "poles", "bogus": 1}, "/bogus"),
])
def test_schema_errors(doc, path):
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(doc))
    assert info.value.path == path


def test_flag_overrides_file(caplog):
    with caplog.at_level(logging.WARNING, logger="wqed"):
        cfg = parse_config('{"setup":"gg","delta":1.0,"task":"poles"}', {"delta": 3.0})
    assert cfg.params["delta"] == 3.0
    assert any("overrides" in r.message for r in caplog.records)


configs = st.builds(
    RunConfig,
    task=st.sampled_from(["transmission", "flux", "poles", "population"]),
    setup=st.just("gg"),
    params=st.fixed_dictionaries({}, optional={"gamma": st.floats(0.01, 10), "delta": st.floats(0, 10)}),
    grid=st.builds(Grid, st.none() | st.floats(-10, -1), st.none() | st.floats(0, 10),
                   st.none() | st.integers(2, 500)),
    drive=st.builds(Drive, st.none() | st.floats(0, 5), st.none() | st.floats(-5, 5)),
    method=st.none() | st.sampled_from(["scattering", "master"]),
    out=st.none() | st.just("x.csv"),
    phase_mode=st.none() | st.sampled_from(["markov", "exact"]),
    k0=st.none() | st.floats(1, 1e4),
)


@settings(max_examples=100, deadline=None)
@given(configs)
def test_round_trip(cfg):
    assert parse_config(serialize(cfg)) == cfg


def test_poles_command(capsys):
    code, out, _ = run_cli(capsys, "poles", "--setup", "gg", "--delta", "2.0")
    assert code == 0
    table = rows(out)
    assert table[0] == ["pole", "re", "im", "regime", "threshold", "value", "critical"]
    assert len(table) == 3 and {r[3] for r in table[1:]} == {"EIT"}


def test_transmission_default_grid(capsys):
    code, out, _ = run_cli(capsys, "transmission", "--setup", "gs", "--gamma-g", "0.015625")
    assert code == 0
    body = [list(map(float, r)) for r in rows(out)[1:]]
    assert len(body) == 401
    peak = max(body, key=lambda r: r[1])
    assert peak[0] == 0.0 and peak[1] == pytest.approx(1.0, abs=1e-12)


def test_csv_format(capsys):
    _, out, _ = run_cli(capsys, "transmission", "--setup", "ss", "--points", "3")
    assert "\r" not in out and out.endswith("\n")
    lines = out.splitlines()
    assert lines[0] == "delta_p,abs_t,re_t,im_t"
    for cell in lines[1].split(","):
        assert repr(float(cell)) == cell


def test_output_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["flux", "--setup", "s-s", "--points", "5", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert capsys.readouterr().out == ""


def test_config_file(tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"task": "population", "setup": "s-s",
                                "grid": {"min": -0.25, "max": 0.25, "points": 3}}))
    code, out, _ = run_cli(capsys, "population", "--config", str(path))
    table = rows(out)
    assert code == 0 and table[0] == ["delta_p", "p_gg", "p_S", "p_A", "p_ee"]
    assert float(table[1][4]) < 1e-8


def test_custom_system(tmp_path, capsys):
    system = {"atoms": [{"points": [{"position": 0.0, "strength": 1.0}]}]}
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"task": "transmission", "system": system,
                                "grid": {"min": 0.0, "max": 0.5, "points": 2}}))
    code, out, _ = run_cli(capsys, "transmission", "--config", str(path))
    assert code == 0
    ends = rows(out)[1:]
    assert float(ends[0][1]) == pytest.approx(0.0, abs=1e-14)
    assert float(ends[1][1]) == pytest.approx(2 ** -0.5, abs=1e-14)


def test_spectrum_command(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--setup", "ss")
    assert code == 0 and rows(out)[0] == ["omega", "s"]


@pytest.mark.parametrize("argv, code, kind", [
    (["poles", "--setup", "nope"], 2, "ConfigError"),
    (["poles", "--setup", "ss", "--gamma", "-1"], 2, "ConfigError"),
    (["poles", "--setup", "lambda", "--out", "/nonexistent/dir/x.csv"], 3, "IOError"),
    (["poles", "--config", "/nonexistent.json"], 3, "IOError"),
    (["transmission", "--setup", "lambda", "--delta-c", "0.1"], 1, "ValueError"),
])
def test_error_records(capsys, argv, code, kind):
    status, _, err = run_cli(capsys, *argv)
    assert status == code
    assert json.loads(err.strip().splitlines()[-1])["error"] == kind


def test_bad_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    status, _, err = run_cli(capsys, "poles", "--config", str(path))
    assert status == 2 and "invalid JSON" in json.loads(err)["message"]


@pytest.mark.parametrize("target", figures.TARGETS)
def test_reproduce_targets(target, tmp_path):
    out = tmp_path / f"{target}.csv"
    start = time.perf_counter()
    assert main(["reproduce", target, "--out", str(out)]) == 0
    assert time.perf_counter() - start < 60
    table = rows(out.read_text())
    assert len(table) > 1 and all(len(r) == len(table[0]) for r in table)


def test_reproduce_fig2c_values(tmp_path):
    out = tmp_path / "f.csv"
    main(["reproduce", "fig2c", "--out", str(out)])
    table = rows(out.read_text())
    assert table[0] == ["delta_p", "abs_t", "re_t", "im_t", "flux"]
    row = next(r for r in table[1:] if float(r[0]) == -0.25)
    flux_max = max(float(r[4]) for r in table[1:])
    assert float(row[1]) == pytest.approx(1.0, abs=1e-12)
    assert float(row[4]) < 1e-6 * flux_max


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wqed", "poles", "--setup", "ss"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("pole,")
