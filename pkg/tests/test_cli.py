import csv
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from bumplab import __version__
from bumplab.cli import main
from bumplab.report import dumps, emit_all, format_float, table_csv


def _run(args, tmp_path):
    return CliRunner().invoke(main, ["--out-dir", str(tmp_path)] + args)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_version():
    res = CliRunner().invoke(main, ["--version"])
    assert res.exit_code == 0 and __version__ in res.output


def test_young_check_example(tmp_path):
    res = _run(["young-check", "--fn", "powerlog:p=2,a=-1.5", "--class", "2",
                "--require", "in_B2"], tmp_path)
    assert res.exit_code == 0, res.output
    doc = json.loads((tmp_path / "young-check.json").read_text())
    assert doc["passed"] is True
    assert doc["schema_version"] == "0.1.0"


def test_young_check_require_fails(tmp_path):
    res = _run(["young-check", "--fn", "power:p=2", "--class", "2", "--require", "in_B2"],
               tmp_path)
    assert res.exit_code == 1
    assert "check failed: young.in_B2" in res.output


def test_norm_verify_identity(tmp_path):
    res = _run(["--depth", "7", "norm-verify", "--op", "op:identity"], tmp_path)
    assert res.exit_code == 0, res.output
    doc = json.loads((tmp_path / "norm-verify.json").read_text())
    assert doc["results"]["ratio"] == pytest.approx(1.0, rel=1e-9)


def test_maxbump_off_diagonal_exit3(tmp_path):
    res = _run(["--depth", "7", "bump", "eval", "--p", "2", "--q", "4", "--alpha", "0.5",
                "--preset", "maxbump"], tmp_path)
    assert res.exit_code == 3


def test_bad_preset_exit2(tmp_path):
    res = _run(["bump", "eval", "--preset", "nope"], tmp_path)
    assert res.exit_code == 2


def test_bad_toml_exit2(tmp_path):
    path = _write(tmp_path, "bad.toml", "scenario = [\n")
    assert _run(["run", path], tmp_path).exit_code == 2


def test_unknown_sample_exit2(tmp_path):
    path = _write(tmp_path, "z.toml", 'scenario="bump-eval"\n[weights]\nu="sample:nosuch"\n')
    assert _run(["run", path], tmp_path).exit_code == 2


def test_unknown_scenario_exit2(tmp_path):
    path = _write(tmp_path, "s.toml", 'scenario="frobnicate"\n')
    assert _run(["run", path], tmp_path).exit_code == 2


def test_config_require_fails(tmp_path):
    path = _write(tmp_path, "c.toml",
                  'scenario="young-check"\n[young]\nfn="power:p=2"\nclasses=[[2.0]]\n'
                  '[checks]\nrequire_in=["in_B2"]\n')
    res = _run(["run", path], tmp_path)
    assert res.exit_code == 1


AUDIT = """scenario = "duality-audit"
name = "audit"
seed = 3

[domain]
box = [-8.0, 8.0]
depth = 7

[weights]
u = "sample:power_weight(a=0.3)"

[symbols]
b = "sample:smooth_bump(x0=0.5,radius=3)"
m = 1

[exponents]
p = 2.0

[young]
preset = "thm11"
"""


def test_duality_audit_config(tmp_path):
    path = _write(tmp_path, "audit.toml", AUDIT)
    res = _run(["run", path], tmp_path)
    assert res.exit_code == 0, res.output
    doc = json.loads((tmp_path / "audit.json").read_text())
    assert doc["config"]["seed"] == 3
    assert doc["config"]["domain"]["depth"] == 7


def test_reports_byte_identical(tmp_path):
    path = _write(tmp_path, "audit.toml", AUDIT)
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(["--out-dir", str(a), "run", path], tmp_path).exit_code == 0
    assert _run(["--out-dir", str(b), "run", path], tmp_path).exit_code == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_csv_rows_match_json(tmp_path):
    path = _write(tmp_path, "audit.toml", AUDIT)
    assert _run(["run", path], tmp_path).exit_code == 0
    doc = json.loads((tmp_path / "audit.json").read_text())
    for name, rows in doc["tables"].items():
        with open(tmp_path / f"audit_{name}.csv", newline="") as fh:
            assert len(list(csv.DictReader(fh))) == len(rows)


def test_sparse_dominate_outputs(tmp_path):
    fam, rep = tmp_path / "family.json", tmp_path / "report.csv"
    res = _run(["--depth", "8", "sparse", "dominate", "--op", "op:riesz(alpha=0.5)",
                "--b", "sample:smooth_bump(radius=3)", "--m", "1", "--alpha", "0.5",
                "--out", str(fam), str(rep)], tmp_path)
    assert res.exit_code == 0, res.output
    doc = json.loads(fam.read_text())
    assert doc["cubes"]
    with open(rep, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and "level" in rows[0]


def test_sparse_max_ratio_check(tmp_path):
    res = _run(["--depth", "7", "sparse", "dominate", "--op", "op:hilbert.pv",
                "--max-ratio", "1e-9"], tmp_path)
    assert res.exit_code == 1
    assert "sparse.max_ratio" in res.output


def test_format_float():
    assert format_float(1.5) == "1.500000000000e+00"
    assert format_float(math.inf) == "inf"
    assert format_float(-math.inf) == "-inf"
    assert format_float(math.nan) == "nan"


def test_dumps_numpy_and_order():
    text = dumps({"b": np.float64(2.0), "a": np.arange(2)})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert json.loads(text)["a"] == [0, 1]


def test_table_csv_union_columns():
    text = table_csv([{"x": 1.0}, {"y": [1, 2]}])
    rows = list(csv.DictReader(text.splitlines()))
    assert list(rows[0]) == ["x", "y"]
    assert rows[1]["y"] == "[1,2]"


def test_emit_all(tmp_path):
    paths = emit_all({"tables": {"t": [{"a": 1.0}, {"a": 2.0}]}, "value": 1.0}, tmp_path, "r")
    assert sorted(p.name for p in paths) == ["r.json", "r_t.csv"]


@pytest.mark.parametrize("name", ["bump_eval", "compactness", "duality_audit"])
def test_shipped_configs(tmp_path, name):
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "docs" / "configs" / f"{name}.toml"
    res = _run(["--depth", "8", "run", str(path)], tmp_path)
    assert res.exit_code == 0, res.output
