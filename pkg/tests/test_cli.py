import json

import numpy as np
import pytest

from hbft.cli import main


@pytest.fixture
def corpus(tmp_path):
    rng = np.random.default_rng(21)
    d = tmp_path / "corpus"
    d.mkdir()
    for i in range(15):
        (d / f"f{i:02d}.bin").write_bytes(rng.bytes(int(rng.integers(4096, 16384))))
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "hbft" in capsys.readouterr().out


def test_hash_and_self_compare(corpus, tmp_path, capsys):
    out = tmp_path / "a.sd"
    code, stdout, _ = run(capsys, "hash", corpus / "f00.bin", "-o", out)
    assert code == 0 and out.exists()
    code, stdout, _ = run(capsys, "compare", out, out)
    assert code == 0
    assert stdout.strip() == "100"


def test_build_and_search(corpus, tmp_path, capsys):
    index = tmp_path / "idx.bin"
    code, _, _ = run(capsys, "build", corpus, "--out", index,
                     "--budget", 8 * 2**20)
    assert code == 0
    code, stdout, stderr = run(capsys, "search", corpus / "f05.bin",
                               "--index", index)
    assert code == 0
    assert "f05.bin\tf05.bin\t100" in stdout
    assert "pairwise_comparisons" in stderr


def test_search_directory_sorted_output(corpus, tmp_path, capsys):
    index = tmp_path / "idx.bin"
    run(capsys, "build", corpus, "--out", index, "--budget", 8 * 2**20)
    code, stdout, _ = run(capsys, "search", corpus, "--index", index)
    assert code == 0
    lines = [l for l in stdout.splitlines() if l and not l.startswith("#")]
    assert lines == sorted(lines)
    assert len(lines) >= 15  # every file matches itself


def test_search_fail_on_empty(corpus, tmp_path, capsys):
    index = tmp_path / "idx.bin"
    run(capsys, "build", corpus, "--out", index, "--budget", 8 * 2**20)
    query = tmp_path / "unrelated.bin"
    query.write_bytes(np.random.default_rng(999).bytes(8192))
    code, stdout, _ = run(capsys, "search", query, "--index", index,
                          "--fail-on-empty")
    assert code == 1
    code, _, _ = run(capsys, "search", query, "--index", index)
    assert code == 0


def test_usage_error_exit_code(corpus, tmp_path, capsys):
    code, _, stderr = run(capsys, "build", corpus, "--out", tmp_path / "x",
                          "--leaves", 0)
    assert code == 2
    assert "error" in stderr


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_format_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.sd"
    bad.write_bytes(b"garbage")
    code, _, stderr = run(capsys, "compare", bad, bad)
    assert code == 3


def test_missing_file_exit_code(tmp_path, capsys):
    code, _, _ = run(capsys, "hash", tmp_path / "nope.bin")
    assert code == 3


def test_bench_self_recall(tmp_path, capsys):
    report = tmp_path / "report.json"
    code, _, _ = run(capsys, "bench", "self-recall", "--seed", 3,
                     "--files", 20, "--budget", 8 * 2**20,
                     "--workdir", tmp_path / "work", "--out", report,
                     "--csv", tmp_path / "report.csv")
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["reports"][0]["recall"] == 1.0
    assert (tmp_path / "report.csv").exists()


def test_bench_planted(tmp_path, capsys):
    report = tmp_path / "report.json"
    code, _, _ = run(capsys, "bench", "planted", "--seed", 7,
                     "--files", 40, "--budget", 8 * 2**20,
                     "--workdir", tmp_path / "work", "--out", report)
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["reports"][0]["recall"] == 1.0


def test_bench_disjoint(tmp_path, capsys):
    report = tmp_path / "report.json"
    code, _, _ = run(capsys, "bench", "disjoint", "--seed", 5,
                     "--files", 20, "--budget", 8 * 2**20,
                     "--workdir", tmp_path / "work", "--out", report)
    assert code == 0
    doc = json.loads(report.read_text())
    assert len(doc["reports"]) == 2
    assert doc["reports"][0]["extras"]["faster_direction"] in ("tree-a", "tree-b")
