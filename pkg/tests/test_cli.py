from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from fo_enum.cli import main

from helpers import PATH3

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def p3(tmp_path):
    path = tmp_path / "p3.facts"
    path.write_text(PATH3)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enum_path(capsys, p3):
    code, out, _ = run(capsys, "enum", "--structure", p3, "--query", "E(x,y)")
    assert code == 0
    assert out == "1\t2\n2\t3\n"


def test_check_sentence(capsys, p3):
    code, out, _ = run(capsys, "check", "--structure", p3, "--query", "exists x exists y (E(x,y))")
    assert (code, out) == (0, "true\n")
    code, out, _ = run(capsys, "check", "--structure", p3, "--query", "exists x (E(x,x))")
    assert out == "false\n"


@pytest.mark.parametrize("sample", sorted(p.name for p in SAMPLES.glob("*.facts")))
def test_oracle_check_on_samples(capsys, sample):
    code, out, _ = run(
        capsys, "enum", "--structure", str(SAMPLES / sample),
        "--query", "E(x,y) & !(x = y)", "--radius", "1", "--oracle-check",
    )
    assert code == 0
    assert out.endswith("oracle: match\n")


def test_limit_and_head(capsys, p3):
    code, out, _ = run(capsys, "enum", "--structure", p3, "--query", "!(x = y)", "--radius", "1", "--limit", "4")
    assert out.splitlines() == ["1\t2", "1\t3", "2\t1", "2\t3"]
    code, out, _ = run(capsys, "enum", "--structure", p3, "--query", "E(x,y)", "--head", "y,x")
    assert out == "2\t1\n3\t2\n"


def test_limit_larger_than_answer_count(capsys, p3):
    _, out, _ = run(capsys, "enum", "--structure", p3, "--query", "E(x,y)", "--limit", "10")
    assert len(out.splitlines()) == 2


def test_stats_block(capsys, p3):
    code, out, err = run(capsys, "enum", "--structure", p3, "--query", "E(x,y)", "--radius", "1", "--stats")
    assert "warning: radius overridden" in err
    block = json.loads(out.split("stats ", 1)[1])
    assert block["emitted"] == 2
    assert block["radius_overridden"] is True
    assert block["max_steps"] <= block["step_bound"]


def test_sentence_enum(capsys, p3):
    _, out, _ = run(capsys, "enum", "--structure", p3, "--query", "exists x (E(x,x))", "--oracle-check")
    assert out == "oracle: match\n"


def test_exit_codes(capsys, p3, tmp_path):
    assert run(capsys, "enum", "--structure", p3, "--query", "E(x,")[0] == 1
    assert run(capsys, "enum", "--structure", p3, "--query", "R(x)")[0] == 1
    assert run(capsys, "enum", "--structure", str(tmp_path / "missing"), "--query", "E(x,y)")[0] == 1
    assert run(capsys, "enum", "--structure", p3)[0] == 1
    assert run(capsys, "bogus")[0] == 1
    code, _, err = run(capsys, "enum", "--structure", p3, "--query", "E(x,y)", "--degree", "1")
    assert code == 2 and "degree" in err
    long_query = " & ".join(["E(x,y)"] * 40)
    code, _, err = run(capsys, "enum", "--structure", p3, "--query", long_query)
    assert code == 2 and "override" in err


def test_index_dump(capsys, p3):
    code, out, _ = run(capsys, "index", "--structure", p3, "--query", "E(x,y)", "--types")
    assert code == 0
    assert out.startswith("# query: E(x,y)\n")
    assert "# preprocess_steps" in out
    assert "bucket 0:" in out


def test_query_file(capsys, p3, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("E(x,y)\n")
    _, out, _ = run(capsys, "enum", "--structure", p3, "--query-file", str(q))
    assert out == "1\t2\n2\t3\n"


def test_output_is_deterministic(capsys):
    argv = ["enum", "--structure", str(SAMPLES / "ladder12.facts"), "--query", "E(x,y) | C(y)",
            "--radius", "1", "--stats"]
    first = run(capsys, *argv)
    assert run(capsys, *argv) == first


def test_check_agrees_with_enum_nonemptiness(capsys):
    path = str(SAMPLES / "ladder12.facts")
    for q in ["E(x,y) & C(x) & C(y)", "E(x,x)", "C(x) & !C(y) & E(y,x)"]:
        _, out, _ = run(capsys, "enum", "--structure", path, "--query", q, "--radius", "1", "--limit", "1")
        _, verdict, _ = run(capsys, "check", "--structure", path, "--query", q)
        assert (verdict == "true\n") == bool(out)


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--family", "ladder", "--sizes", "50,100", "--query", "E(x,y)")
    rows = [line.split("\t") for line in out.splitlines()]
    assert code == 0
    assert rows[0][0] == "n"
    assert [r[0] for r in rows[1:]] == ["50", "100"]
    assert rows[1][2] == rows[2][2]


def test_module_entry_point(p3):
    proc = subprocess.run(
        [sys.executable, "-m", "fo_enum", "enum", "--structure", p3, "--query", "E(x,y)", "--oracle-check"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == "1\t2\n2\t3\noracle: match\n"


def test_oracle_mismatch_exit_code(capsys, tmp_path):
    # the query looks two steps away, further than a radius-1 plan can see
    doc = "rel E 2\nrel C 1\nnode 1 2 3 4 5 6 7\nfact C 1\n"
    doc += "".join(f"fact E {i} {i + 1}\nfact E {i + 1} {i}\n" for i in range(1, 7))
    path = tmp_path / "p7.facts"
    path.write_text(doc)
    code, out, _ = run(
        capsys, "enum", "--structure", str(path), "--radius", "1", "--oracle-check",
        "--query", "exists w exists z (E(x,w) & E(w,z) & C(z))",
    )
    assert code == 3
    assert "oracle: MISMATCH" in out
