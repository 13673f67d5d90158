import json
import subprocess
import sys


from prk.cli import main
from prk.core import serialize
from conftest import fig2, fig8_cylinder, loop
from prk.gains import lift_cylinder


def write(tmp_path, name, g):
    p = tmp_path / name
    p.write_text(serialize(g))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_exit_codes(tmp_path, capsys):
    code, out, _ = run(capsys, "check", write(tmp_path, "a.json", loop((1, 0))))
    assert code == 0 and out.startswith("rigid")
    code, out, _ = run(capsys, "check", write(tmp_path, "b.json", loop((0, 1))))
    assert code == 1 and "witness: {0}" in out
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "check", str(bad))[0] == 2
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_check_json_and_oracle(tmp_path, capsys):
    code, out, _ = run(capsys, "check", write(tmp_path, "a.json", loop((1, 0))), "--json", "--oracle")
    doc = json.loads(out)
    assert code == 0 and doc["rigid"] and doc["oracle"]["agrees"]
    assert doc["certificate"] == {"base": {"vertex": 0, "gain": [1, 0]}, "moves": []}


def test_model_override_warns(tmp_path, capsys):
    path = write(tmp_path, "f.json", fig2())
    code, out, err = run(capsys, "check", path, "--model", "x-variable")
    assert code == 1 and "count mismatch" in out and "warning" in err
    assert run(capsys, "check", path, "--model", "cylinder")[0] == 2


def test_batch(tmp_path, capsys):
    d = tmp_path / "batch"
    d.mkdir()
    write(d, "a.json", loop((1, 0)))
    write(d, "b.json", loop((0, 1)))
    code, out, _ = run(capsys, "check", "--batch", str(d), "--json")
    doc = json.loads(out)
    assert code == 1 and [r["rigid"] for r in doc["results"]] == [True, False]
    (d / "c.json").write_text("[]")
    assert run(capsys, "check", "--batch", str(d))[0] == 2


def test_reduce(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "-n", "5", "--seed", "3")
    path = tmp_path / "g.json"
    path.write_text(out)
    code, out, _ = run(capsys, "reduce", str(path), "--json")
    assert code == 0 and len(json.loads(out)["moves"]) == 4
    code, out, _ = run(capsys, "reduce", write(tmp_path, "b.json", loop((0, 1))))
    assert code == 1 and "not reducible" in out


def test_generate_is_deterministic(tmp_path, capsys):
    a = run(capsys, "generate", "-n", "5", "--seed", "7")[1]
    b = run(capsys, "generate", "-n", "5", "--seed", "7")[1]
    assert a == b and json.loads(a)["n"] == 5
    code, out, _ = run(capsys, "generate", "-n", "4", "--certificate", "--json")
    doc = json.loads(out)
    assert set(doc) == {"graph", "certificate"}
    out_file = tmp_path / "o.json"
    assert run(capsys, "generate", "-n", "3", "--out", str(out_file))[0] == 0
    assert json.loads(out_file.read_text())["n"] == 3
    assert run(capsys, "generate", "-n", "0")[0] == 2


def test_rank(tmp_path, capsys):
    code, out, _ = run(capsys, "rank", write(tmp_path, "a.json", loop((1, 0))))
    assert code == 0 and out.strip() == "1"
    code, out, _ = run(capsys, "rank", write(tmp_path, "f.json", fig2()), "--json")
    assert json.loads(out) == {"rank": 4, "threshold": 4, "edges": 4, "rigid": True}


def test_tgain(tmp_path, capsys):
    path = write(tmp_path, "f.json", fig2())
    code, out, _ = run(capsys, "tgain", path, "--tree", "0,3", "--root", "2", "--json")
    doc = json.loads(out)
    assert doc["potentials"] == [[1, -1], [2, 1], [0, 0]]
    assert doc["t_gains"] == [[0, 0], [2, 2], [4, 0], [0, 0]]
    code, out, _ = run(capsys, "tgain", path)
    assert code == 0 and "v1:" in out
    assert run(capsys, "tgain", path, "--tree", "0,x")[0] == 2
    assert run(capsys, "tgain", path, "--tree", "0")[0] == 2


def test_decompose(tmp_path, capsys):
    code, out, _ = run(capsys, "decompose", write(tmp_path, "a.json", loop((1, 0))), "--json")
    assert code == 0 and json.loads(out) == {"tree": [], "map": [0]}
    assert run(capsys, "decompose", write(tmp_path, "f.json", fig2()))[0] == 1


def test_export_svg(tmp_path, capsys):
    path = write(tmp_path, "a.json", loop((1, 0)))
    out = tmp_path / "a.svg"
    assert run(capsys, "export-svg", path, "--window", "3x1", "--out", str(out))[0] == 0
    svg = out.read_text()
    assert svg.count('class="vertex"') == 3 and svg.count('class="edge"') == 2
    run(capsys, "export-svg", path, "--window", "1x1", "--out", str(out))
    assert out.read_text().count('class="edge"') == 0
    lifted = write(tmp_path, "c.json", lift_cylinder(fig8_cylinder()))
    run(capsys, "export-svg", lifted, "--window", "3x1", "--out", str(out))
    assert out.read_text().count('class="vertex"') == 15
    assert run(capsys, "export-svg", path, "--window", "3by1")[0] == 2
    assert run(capsys, "export-svg", path, "--window", "0x2")[0] == 2


def test_export_svg_uses_document_placement(tmp_path, capsys):
    doc = json.loads(serialize(loop((1, 0))))
    doc["placement"] = {"positions": [["1/2", "1/3"]], "lattice": [[1, 0], [0, 1]]}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "export-svg", str(path), "--window", "2x1")
    assert code == 0 and out.count('class="vertex"') == 2


def test_bound_env_var(tmp_path):
    path = write(tmp_path, "a.json", fig2().with_model("x-variable"))
    res = subprocess.run([sys.executable, "-m", "prk.cli", "rank", path],
                         capture_output=True, text=True, env={"PRK_BRUTE_FORCE_BOUND": "2", "PATH": ""})
    assert res.returncode == 0
    g = tmp_path / "g.json"
    subprocess.run([sys.executable, "-m", "prk.cli", "generate", "-n", "4", "--out", str(g)], check=True)
    res = subprocess.run([sys.executable, "-m", "prk.cli", "check", str(g)],
                         capture_output=True, text=True, env={"PRK_BRUTE_FORCE_BOUND": "2", "PATH": ""})
    assert res.returncode == 2 and "bound" in res.stderr
