import json
import os
import subprocess
import sys

import pytest

from glyphattack.bundled import MOCK_CORPUS_TSV, RADICALS_TSV
from glyphattack.cli import main


def run_cli(*argv):
    """Invoke the CLI in-process, capturing the exit code."""
    return main(list(argv))


def test_selfcheck_exits_zero(capsys):
    assert run_cli("selfcheck", "--mock") == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("attack", "--no-such-flag")
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli("frobnicate")
    assert exc.value.code == 1


def test_attack_without_index_names_build_index(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    code = run_cli("attack", "--input", MOCK_CORPUS_TSV, "--out", str(out))
    assert code == 2
    assert "build-index" in capsys.readouterr().err


def test_render_writes_png(tmp_path):
    out = tmp_path / "t.png"
    assert run_cli("render", "--text", "未末", "--out", str(out)) == 0
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_build_index_and_query(tmp_path, capsys):
    idx = tmp_path / "stub.idx"
    assert run_cli("build-index", "--out", str(idx)) == 0
    assert idx.exists()
    assert run_cli("query-similar", "--char", "未", "--index", str(idx),
                   "--dict", RADICALS_TSV, "--top-m", "10", "--top-k", "5") == 0
    out = capsys.readouterr().out
    assert "末" in out and "both" in out


def test_attack_evaluate_audit_pipeline(tmp_path, capsys):
    results = tmp_path / "results.jsonl"
    assert run_cli("attack", "--input", MOCK_CORPUS_TSV, "--out", str(results),
                   "--mock", "--workers", "2", "--debug-candidates") == 0
    assert results.exists()
    assert (tmp_path / "results.jsonl.manifest.json").exists()
    lines = results.read_text(encoding="utf-8").strip().split("\n")
    assert len(lines) == 50
    first = json.loads(lines[0])
    assert first["schema"] == "glyphattack-result/v1"
    assert "manifest" in first
    assert first["candidates"], "--debug-candidates must record the candidate log"

    csv_out = tmp_path / "report.csv"
    json_out = tmp_path / "report.json"
    assert run_cli("evaluate", "--results", str(results), "--out", str(csv_out),
                   "--json", str(json_out)) == 0
    report = json.loads(json_out.read_text(encoding="utf-8"))
    assert report["aggregates"]["rows"] == 50
    assert report["aggregates"]["asr"] >= 0.6

    assert run_cli("audit", "--results", str(results)) == 0
    assert "50 clean" in capsys.readouterr().out


def test_audit_flags_tampered_results(tmp_path, capsys):
    results = tmp_path / "results.jsonl"
    run_cli("attack", "--input", MOCK_CORPUS_TSV, "--out", str(results), "--mock")
    lines = results.read_text(encoding="utf-8").strip().split("\n")
    rec = json.loads(lines[0])
    rec["relative_decrease"] = 0.999  # tamper
    lines[0] = json.dumps(rec, ensure_ascii=False)
    results.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert run_cli("audit", "--results", str(results)) == 2


def test_explain_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "attack.toml"
    cfg.write_text("[attack]\nalpha = 0.25\ntheta = 0.8\n", encoding="utf-8")
    code = run_cli("attack", "--input", MOCK_CORPUS_TSV, "--out", "unused",
                   "--config", str(cfg), "--theta", "0.7", "--explain-config")
    assert code == 0
    out = capsys.readouterr().out
    assert "alpha" in out and "0.25" in out and "config-file" in out
    assert "0.7" in out and "flag" in out
    assert "default" in out


def test_config_file_drives_attack(tmp_path):
    cfg = tmp_path / "attack.toml"
    cfg.write_text("[attack]\nreplacement_rate = 0.0\n", encoding="utf-8")
    results = tmp_path / "r.jsonl"
    assert run_cli("attack", "--input", MOCK_CORPUS_TSV, "--out", str(results),
                   "--mock", "--config", str(cfg)) == 0
    recs = [json.loads(l) for l in results.read_text(encoding="utf-8").splitlines()]
    assert all(r["plan"] == [] for r in recs)
    assert all(r["adversarial"] == r["source"] for r in recs)


def test_console_script_entrypoint_help():
    proc = subprocess.run([sys.executable, "-m", "glyphattack.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("render", "build-index", "query-similar", "attack",
                "evaluate", "selfcheck"):
        assert sub in proc.stdout


def test_malformed_corpus_is_runtime_error(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("source only, no tab\n", encoding="utf-8")
    out = tmp_path / "r.jsonl"
    assert run_cli("attack", "--input", str(bad), "--out", str(out), "--mock") == 2
    assert "expected <source>" in capsys.readouterr().err


def test_attack_byte_deterministic_across_processes(tmp_path):
    outs = []
    for name in ("a.jsonl", "b.jsonl"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "glyphattack.cli", "attack",
             "--input", MOCK_CORPUS_TSV, "--out", str(out), "--mock"],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
