import json
import subprocess
import sys
from pathlib import Path


from leftist.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_grammar(capsys):
    code, out, _ = run(capsys, "check", str(DATA / "g0.lgr"))
    assert code == 0 and "LGr: ok" in out and "acyclic: yes" in out


def test_check_transformer_json(capsys):
    code, out, _ = run(capsys, "check", "--json", str(DATA / "ins_a.ltr"))
    d = json.loads(out)
    assert code == 0 and d["transformer"] and d["simple"] and not d["acyclic"]


def test_derive_reflexive(capsys):
    code, out, _ = run(capsys, "derive", str(DATA / "g0.lgr"), "--from", "c g", "--to", "c g", "--steps", "0")
    assert code == 0 and "(0 steps)" in out


def test_derive_exit_codes(capsys, tmp_path):
    g = str(DATA / "g0.lgr")
    drv = tmp_path / "d.drv"
    code, out, _ = run(capsys, "derive", g, "--from", "c g", "--to", "b a g", "--steps", "3", "--emit", str(drv))
    assert code == 0 and drv.read_text().startswith("from c g")
    code, _, _ = run(capsys, "derive", g, "--from", "c g", "--to", "a g", "--steps", "3", "--max-word", "4")
    assert code == 1
    code, _, _ = run(capsys, "derive", g, "--from", "c c g", "--to", "b a g", "--steps", "9", "--budget", "1")
    assert code == 2


def test_verify_normalize_muminimal(capsys, tmp_path):
    g = str(DATA / "g0.lgr")
    drv = tmp_path / "d.drv"
    run(capsys, "derive", g, "--from", "c g", "--to", "b a g", "--steps", "3", "--emit", str(drv))
    code, out, _ = run(capsys, "verify", "--json", g, str(drv))
    assert code == 0 and json.loads(out)["leftmost"] is True
    out_drv = tmp_path / "n.drv"
    code, _, _ = run(capsys, "normalize", g, str(drv), "-o", str(out_drv))
    assert code == 0 and out_drv.exists()
    code, out, _ = run(capsys, "muminimal", g, str(drv))
    assert code == 0 and out.split()[0] in {"minimal", "not-minimal"}


def test_relation_tsv(capsys):
    code, out, _ = run(capsys, "relation", str(DATA / "ins_a.ltr"), "--max-input", "1", "--max-word", "3", "--max-depth", "3", "--format", "tsv")
    lines = out.strip().splitlines()
    assert code == 0 and "-\t-" in lines and "x\ty" in lines


def test_compose_union_nabla(capsys, tmp_path):
    second = tmp_path / "second.ltr"
    second.write_text("inputs y\noutputs z\nfinal g\ninsert g z\ndelete z y\n")
    out_path = tmp_path / "c.ltr"
    code, _, _ = run(capsys, "compose", str(DATA / "ins_a.ltr"), str(second), "-o", str(out_path))
    assert code == 0 and "temps y" in out_path.read_text()
    other = tmp_path / "other.ltr"
    other.write_text("inputs x\noutputs w\nfinal g\ninsert g w\ndelete w x\n")
    code, out, _ = run(capsys, "union", str(DATA / "ins_a.ltr"), str(other))
    assert code == 0 and "outputs w y" in out
    code, out, _ = run(capsys, "nabla", str(DATA / "ins_a.ltr"), "--from", "x x", "--to", "y")
    assert code == 0 and out.strip() == "1 1"
    code, out, _ = run(capsys, "nabla", str(DATA / "ins_a.ltr"), "--from", "x", "--to", "-")
    assert out.strip() == "none"


def test_closure(capsys, tmp_path):
    out_path = tmp_path / "plus.ltr"
    code, _, _ = run(capsys, "closure", str(DATA / "toy_t.ltr"), "--map", "c1=a1", "-o", str(out_path), "--anchored-exit", "--primed-entry")
    text = out_path.read_text()
    assert code == 0 and "anchors b1 b2" in text and "meta primed_entry True" in text


def test_cnf(capsys, tmp_path):
    code, out, _ = run(capsys, "cnf", "solve", str(DATA / "tiny.cnf"))
    assert code == 0 and out.startswith("SAT")
    lits = [int(x) for x in out.split()[1:-1]]
    assert 2 in lits  # x2 must be true
    code, out, _ = run(capsys, "cnf", "solve", str(DATA / "unsat.cnf"))
    assert code == 0 and out.strip() == "UNSAT"
    phi = tmp_path / "phi.lgr"
    code, _, _ = run(capsys, "cnf", "compile", str(DATA / "tiny.cnf"), "-o", str(phi))
    assert code == 0 and phi.with_suffix(".meta").exists()
    drv = tmp_path / "pi.drv"
    code, out, _ = run(capsys, "cnf", "hard", "--json", str(DATA / "unsat.cnf"), "-k", "4", "--derivation", str(drv))
    assert code == 0 and json.loads(out)["steps"] == 14 and drv.exists()


def test_errors(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "missing.lgr"))
    assert code == 66 and "lgr:" in err
    bad = tmp_path / "bad.lgr"
    bad.write_text("final g\nfrobnicate a b\n")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 65 and "line 2" in err
    code, _, _ = run(capsys, "derive", str(DATA / "g0.lgr"))
    assert code == 64
    code, _, _ = run(capsys)
    assert code == 64


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "leftist.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("lgr ")
