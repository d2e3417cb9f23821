import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from polardeco import __version__
from polardeco.cli import main
from polardeco.validation import REFERENCE_CONFIG

HEAD = re.compile(r"^# polar-deco v(\S+), command=(\w+), config-hash=([0-9a-f]{16})$")


def read(path):
    lines = path.read_text().splitlines()
    m = HEAD.match(lines[0])
    assert m, lines[0]
    header = [h.strip() for h in lines[1].split(",")]
    rows = [[c.strip() for c in r] for r in csv.reader(lines[2:])]
    return m.groups(), header, rows


def write_cfg(tmp_path, edit=None, name="cfg.json"):
    doc = json.loads(REFERENCE_CONFIG)
    if edit:
        edit(doc)
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "polardeco.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout


def test_xsec_csv_layout(tmp_path):
    assert main(["xsec", "--out", str(tmp_path)]) == 0
    (ver, cmd, _), header, rows = read(tmp_path / "xsec.csv")
    assert (ver, cmd) == (__version__, "xsec")
    assert all(re.fullmatch(r"\w+\[[^\]]+\]", h) for h in header)
    assert len(rows) == 3
    for r in rows:
        for c in r:
            assert len(c.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 12


def test_rate_columns(tmp_path):
    assert main(["rate", "--out", str(tmp_path)]) == 0
    _, header, rows = read(tmp_path / "rate.csv")
    data = np.array(rows, dtype=float)
    assert header[0] == "v_M[m/s]"
    assert data[0, 1] == pytest.approx(1288.3833, rel=1e-7)
    assert data[0, 2] == pytest.approx(data[0, 1], rel=1e-12)


def test_eta_levels_start_at_one_and_decrease(tmp_path):
    assert main(["eta", "--out", str(tmp_path), "--grid", "21"]) == 0
    _, header, rows = read(tmp_path / "eta.csv")
    data = np.array(rows, dtype=float)
    assert data[-1, 0] == pytest.approx(10.0)
    for j in range(2, 5):
        assert data[0, j] == 1.0
        assert np.all(np.diff(data[:, j]) < 0)


def test_kicks(tmp_path):
    assert main(["kicks", "--out", str(tmp_path), "--grid", "8"]) == 0
    data = np.array(read(tmp_path / "kicks.csv")[2], dtype=float)
    np.testing.assert_allclose(data[:, 3], data[:, 2], rtol=1e-6)


def test_pattern_outputs_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["pattern", "--out", str(a), "--grid", "481", "--jobs", "1"]) == 0
    assert main(["pattern", "--out", str(b), "--grid", "481", "--jobs", "4"]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert len(files) == 5 and "pattern_summary.csv" in files
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    _, header, rows = read(a / "pattern_summary.csv")
    assert header[:5] == ["Lc_over_L[1]", "gamma[1/s]", "w_eta[m]", "delta_x[m]", "delta_I_estimate[m]"]
    assert [float(r[0]) for r in rows] == [0.001, 0.02, 0.1, 0.5]


def test_eta_independent_of_jobs(tmp_path):
    main(["eta", "--out", str(tmp_path / "1"), "--grid", "11"])
    main(["eta", "--out", str(tmp_path / "3"), "--grid", "11", "--jobs", "3"])
    assert (tmp_path / "1" / "eta.csv").read_bytes() == (tmp_path / "3" / "eta.csv").read_bytes()


def test_output_directory_precedence(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, lambda d: d.update(output={"dir": str(tmp_path / "from_cfg")}))
    monkeypatch.chdir(tmp_path)
    assert main(["rate", "--config", str(cfg)]) == 0
    assert (tmp_path / "from_cfg" / "rate.csv").exists()
    monkeypatch.setenv("POLARDECO_OUT", str(tmp_path / "from_env"))
    assert main(["rate", "--config", str(cfg)]) == 0
    assert (tmp_path / "from_env" / "rate.csv").exists()
    assert main(["rate", "--config", str(cfg), "--out", str(tmp_path / "from_flag")]) == 0
    assert (tmp_path / "from_flag" / "rate.csv").exists()


def test_config_hash_in_header(tmp_path):
    cfg = write_cfg(tmp_path, lambda d: d["gas"].update(temperature_K=77))
    main(["rate", "--out", str(tmp_path / "x")])
    main(["rate", "--config", str(cfg), "--out", str(tmp_path / "y")])
    assert read(tmp_path / "x" / "rate.csv")[0][2] != read(tmp_path / "y" / "rate.csv")[0][2]


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, lambda d: d["gas"].update(temperature_K=-1))
    assert main(["rate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "gas.temperature_K" in capsys.readouterr().err
    assert main(["rate", "--config", str(tmp_path / "missing.json")]) == 2


def test_operation_error_names_operation(tmp_path, capsys):
    cfg = write_cfg(tmp_path, lambda d: d.update(potential={"explicit": {"C_SI": 1e-70, "s": 4.5, "a": 0}}))
    assert main(["xsec", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "cross_sections" in capsys.readouterr().err


def test_unconverged_is_an_error_unless_allowed(tmp_path, capsys):
    cfg = write_cfg(tmp_path, lambda d: d.update(numerics={"rel_tol": 1e-17, "abs_tol": 1e-300}))
    args = ["eta", "--config", str(cfg), "--out", str(tmp_path), "--grid", "3"]
    assert main(args) == 3
    assert "unconverged" in capsys.readouterr().err
    assert main(args + ["--allow-unconverged"]) == 0


def test_bad_flags():
    for argv in (["rate", "--tol", "-1"], ["rate", "--grid", "1"], ["rate", "--jobs", "0"], ["plot"]):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == 2


@pytest.mark.slow
def test_validate_report(tmp_path):
    assert main(["validate", "--out", str(tmp_path), "--strict"]) == 4
    _, header, rows = read(tmp_path / "validate.csv")
    assert header == ["name", "value[1]", "bound[1]", "result"]
    result = {r[0]: r[3] for r in rows}
    assert len(result) == 25
    assert result["angular_polar_max_err"] == "fail"
    assert [k for k, v in result.items() if v == "fail"] == ["angular_polar_max_err"]
