import json
import random
from fractions import Fraction

import pytest

from chernloc.cli import main
from chernloc.fredholm import random_idempotent, random_model
from chernloc.multiform import GeneratorTable

TABLE_TEXT = """\
# degree-four model with one contractible pair
d 4
x 1 u
u 2 0
y 1 0
"""


@pytest.fixture()
def table_file(tmp_path):
    path = tmp_path / "table.txt"
    path.write_text(TABLE_TEXT)
    return path


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    payload = out[out.index("{"):]
    return code, json.loads(payload)


def test_check_bar(table_file, capsys):
    code, doc = run_cli(capsys, ["check-bar", str(table_file),
                                 "--chains", "30", "--seed", "1"])
    assert code == 0
    assert doc["ok"] and doc["table_ok"] and not doc["failures"]


def _model_doc():
    rng = random.Random(9)
    table = GeneratorTable(6)
    table.add_generator("y", 3)
    table.add_generator("w", 2)
    table.set_differential("w", "y")
    m = random_model(table, rng, 2, 2, scale=0.3, q_scale=0.7)
    p = random_idempotent(table, rng, n=2, scale=Fraction(1, 4))
    return {
        "table": {"top_degree": 6, "generators": [["y", 3, "0"], ["w", 2, "y"]]},
        "dim_plus": 2,
        "dim_minus": 2,
        "Q": [[[z.real, z.imag] for z in row] for row in m.Q.tolist()],
        "c": {table.mono_str(mono): [[[z.real, z.imag] for z in row]
                                     for row in mat.tolist()]
              for mono, mat in m.c_map.items() if mono},
        "p": [[e.canonical_str() for e in row] for row in p.rows],
        "t": 1.0,
    }


def test_mckean_singer_cli(tmp_path, capsys):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(_model_doc()))
    code, doc = run_cli(capsys, ["mckean-singer", str(path), "--tol", "1e-8"])
    assert code == 0
    assert doc["ok"]
    assert doc["difference"] < 1e-8
    assert "exp(-D_p^2)" in doc["note"]


def test_bismut_chern_cli(tmp_path, capsys):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(_model_doc()))
    code, doc = run_cli(capsys, ["bismut-chern", str(path), "--n-max", "1"])
    assert code == 0
    assert doc["ok"] and doc["cyclic"] and doc["even"]
    assert doc["words"] >= 1


def test_mehler_cli(tmp_path, capsys):
    path = tmp_path / "mehler.json"
    path.write_text(json.dumps({
        "d": 4,
        "generators": ["u", "v"],
        "R": [["0", "u", "0", "v"],
              ["-u", "0", "v", "0"],
              ["0", "-v", "0", "u"],
              ["-v", "0", "-u", "0"]],
        "taus": ["1/4", "1/2"],
    }))
    code, doc = run_cli(capsys, ["mehler", str(path)])
    assert code == 0
    assert doc["ok"] and doc["semigroup_exact"] and doc["heat_equation_exact"]
    assert doc["kappa_constant"] == "-1/2"


def test_localize_cli(tmp_path, capsys):
    path = tmp_path / "case.json"
    path.write_text(json.dumps({
        "d": 2,
        "generators": ["w"],
        "R": [["0", "w"], ["-w", "0"]],
        "word": ["sigma w"],
    }))
    code, doc = run_cli(capsys, ["localize", str(path)])
    assert code == 0
    assert doc["ok"] and doc["exact_equal"]


def test_torus_cli(capsys):
    code, doc = run_cli(capsys, ["torus", "--t-grid", "0.1,0.05",
                                 "--beta", "0.5", "--json"])
    assert code == 0
    assert doc["ok"]
    assert doc["rows"][-1]["relative"] < 1e-4
    assert doc["supertrace_max"] < 1e-10


def test_torus_cli_detects_underresolved_cutoff(capsys):
    code, doc = run_cli(capsys, ["torus", "-K", "2", "--t-grid", "0.05",
                                 "--beta", "0.5", "--json"])
    assert code == 1
    assert doc["rows"][0]["relative"] > 1e-4
