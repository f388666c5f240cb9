import subprocess
import sys

import pytest

from ikas import formulas as F
from ikas.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_bindec_7(capsys):
    code, out, _ = _run(capsys, "build", "--construction", "bindec", "--m", "7")
    assert code == 0
    assert sum("->" in line for line in out.splitlines()) == 42
    assert out.startswith("# construction=bindec")


def test_build_to_file(tmp_path, capsys):
    path = tmp_path / "g.txt"
    assert _run(capsys, "build", "-c", "square", "--m", "2", "-o", str(path))[0] == 0
    assert sum("->" in line for line in path.read_text().splitlines()) == 12


def test_table_square(capsys):
    code, out, _ = _run(capsys, "table", "--family", "square", "--range", "2..8")
    assert code == 0
    rows = [line.split() for line in out.splitlines()[1:]]
    assert [(r[1], int(r[2])) for r in rows] == [(f"n={n}", F.square_edges(n)) for n in (2, 4, 8)]
    code, out, _ = _run(capsys, "table", "--family", "square", "--range", "2..4", "--format", "csv")
    assert out.splitlines()[1].startswith("square,n=2,12,")


def test_stats_and_verify(capsys):
    code, out, _ = _run(capsys, "stats", "-c", "2key", "--m", "16")
    assert code == 0 and "components      2" in out
    code, out, _ = _run(capsys, "verify", "-c", "hyper", "--n", "2", "--k", "3")
    assert code == 0 and "result: pass" in out


def test_verify_desk_cap(capsys):
    code, _, err = _run(capsys, "verify", "-c", "bindec", "--m", "600")
    assert code == 1 and "desk scale" in err


def test_cover(capsys):
    code, out, _ = _run(capsys, "cover", "--scheme", "2key", "--m", "16", "--interval", "3-14")
    assert code == 0
    assert out.split() == ["d=1;3-8", "d=1;9-14"]


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["build"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run(["table", "--range", "8"])
    assert exc.value.code == 2


def test_domain_errors_exit_1(capsys):
    code, _, err = _run(capsys, "build", "-c", "nope", "--m", "3")
    assert code == 1 and "unknown construction" in err
    code, _, err = _run(capsys, "build", "-c", "2key", "--m", "12")
    assert code == 1 and "power of two" in err
    code, _, err = _run(capsys, "build", "-c", "rect-e1", "--m", "4")
    assert code == 1 and "needs" in err


@pytest.mark.parametrize("sub", ["build", "stats", "verify", "table", "setup", "issue", "derive", "encrypt", "decrypt", "cover"])
def test_help(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        run([sub, "--help"])
    assert exc.value.code == 0
    assert "--" in capsys.readouterr().out


def test_workflow(tmp_path, capsys, monkeypatch):
    pub, sec, cred = tmp_path / "pub.json", tmp_path / "sec.json", tmp_path / "cred.json"
    args = ["setup", "-c", "bindec", "--m", "8", "--public", str(pub), "--secrets", str(sec)]
    monkeypatch.setenv("IKAS_SEED", "5")
    assert _run(capsys, *args)[0] == 0
    first = pub.read_bytes()
    assert _run(capsys, *args)[0] == 0
    assert pub.read_bytes() == first

    assert _run(capsys, "issue", "--public", str(pub), "--secrets", str(sec), "--label", "1-8", "-o", str(cred))[0] == 0
    code, out, err = _run(capsys, "derive", "--public", str(pub), "--credential", str(cred), "--target", "5-5")
    assert code == 0 and len(out.strip()) == 64 and "hops: 3" in err

    plain, blob, back = tmp_path / "m.txt", tmp_path / "m.bin", tmp_path / "m.out"
    plain.write_bytes(b"hello")
    assert _run(capsys, "encrypt", "--secrets", str(sec), "--target", "d=1;5-5", "--in", str(plain), "--out", str(blob))[0] == 0
    assert _run(capsys, "decrypt", "--public", str(pub), "--credential", str(cred), "--in", str(blob), "--out", str(back))[0] == 0
    assert back.read_bytes() == b"hello"

    narrow = tmp_path / "narrow.json"
    _run(capsys, "issue", "--public", str(pub), "--secrets", str(sec), "--label", "6-8", "-o", str(narrow))
    code, _, err = _run(capsys, "derive", "--public", str(pub), "--credential", str(narrow), "--target", "5-5")
    assert code == 1 and "not authorized" in err
    code, _, err = _run(capsys, "decrypt", "--public", str(pub), "--credential", str(narrow), "--in", str(blob))
    assert code == 1 and "not authorized" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = _run(capsys, "derive", "--public", str(tmp_path / "x"), "--credential", str(tmp_path / "y"), "--target", "1-1")
    assert code == 1 and "cannot read" in err


def test_bad_seed_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("IKAS_SEED", "abc")
    code, _, err = _run(capsys, "setup", "-c", "bindec", "--m", "2", "--public", str(tmp_path / "p"), "--secrets", str(tmp_path / "s"))
    assert code == 1 and "IKAS_SEED" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ikas", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "build" in proc.stdout and "decrypt" in proc.stdout
