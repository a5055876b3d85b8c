import json
import shutil
import subprocess

import pytest

from conftest import CORPUS, FIXTURES
from expected import CAPTURE_STATEMENT_LINES
from formcheck import property_names
from covloop.cli import EX_USAGE, main
from covloop.coverage import validate_json

CAPTURE_V = str(CORPUS / "capture.v")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_targets_statement(capsys):
    code, out, _ = run(capsys, "targets", CAPTURE_V, "--kind", "statement")
    doc = json.loads(out)
    assert code == 0 and doc["design"] == "capture"
    assert tuple(t["start"][0] for t in doc["targets"]) == CAPTURE_STATEMENT_LINES
    assert all(t["kind"] == "STATEMENT" for t in doc["targets"])


def test_parse(capsys):
    code, out, _ = run(capsys, "parse", CORPUS / "fsm4.v")
    assert code == 0 and json.loads(out)[0]["module"] == "fsm4"


def test_close_writes_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "close", CAPTURE_V, "--sva", CORPUS / "capture.sva",
                       "--threshold", "100", "--hil", "auto", "--out", tmp_path)
    summary = json.loads(out)
    assert code == 0 and summary["outcome"] == "THRESHOLD_MET"
    sva = (tmp_path / "capture.sva").read_text()
    assert len(property_names(sva)) == summary["num_properties"] == 4
    validate_json(json.loads((tmp_path / "manifest.json").read_text()), "manifest.json")
    validate_json(json.loads((tmp_path / "report.json").read_text()), "coverage_report.json")


def test_close_escalation_exit_code(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"stall_exit": False}))
    code, out, _ = run(capsys, "close", FIXTURES / "dead_code.v", "--config", cfg, "--out", tmp_path)
    assert code == 2 and json.loads(out)["outcome"] == "ESCALATED"
    code, out, _ = run(capsys, "close", FIXTURES / "dead_code.v", "--out", tmp_path / "b")
    assert code == 3 and json.loads(out)["outcome"] == "STALLED"


def test_analyze_fully_covered(capsys):
    code, out, _ = run(capsys, "analyze", FIXTURES / "all_covered.v", "--sva", FIXTURES / "all_covered.sva")
    assert code == 0 and json.loads(out) == []


def test_analyze_capture_hole(capsys):
    code, out, _ = run(capsys, "analyze", CAPTURE_V)
    contexts = json.loads(out)
    assert code == 0 and len(contexts) == 2
    assert {c["code"] for c in contexts} == {"c <= d1", "c <= d2"}


def test_generate_rerun_adds_nothing(capsys, tmp_path):
    first = tmp_path / "one.sva"
    code, _, err = run(capsys, "generate", CAPTURE_V, "--out", first)
    assert code == 0 and "added 4 properties" in err
    code, out, err = run(capsys, "generate", CAPTURE_V, "--sva", first)
    assert code == 0 and "added 0 properties" in err
    assert out == first.read_text()


def test_report_and_prove(capsys, tmp_path):
    code, out, _ = run(capsys, "report", CORPUS / "mux2.v", "--sva", CORPUS / "mux2.sva")
    assert code == 0 and json.loads(out)["design"] == "mux2"
    code, out, _ = run(capsys, "prove", CORPUS / "mux2.v", "--sva", CORPUS / "mux2.sva")
    assert json.loads(out)["proofs"]["mux_selects_b"]["verdict"] == "PROVEN"


def test_report_import_csv(capsys):
    code, out, _ = run(capsys, "report", CAPTURE_V, "--import", FIXTURES / "capture_export.csv")
    doc = json.loads(out)
    assert code == 0 and doc["coverage_pct"] == 50.0 and len(doc["targets"]) == 4


def test_replay_backend_flag(capsys, tmp_path):
    code, out, _ = run(capsys, "report", CAPTURE_V)
    rec = tmp_path / "rec.json"
    rec.write_text(json.dumps([json.loads(out)]))
    code, out2, _ = run(capsys, "report", CAPTURE_V, "--backend", f"replay:{rec}")
    assert code == 0 and json.loads(out2) == json.loads(out)


def test_bench_json(capsys, tmp_path):
    for ext in (".v", ".sva"):
        shutil.copy(CORPUS / f"mux2{ext}", tmp_path)
    code, out, _ = run(capsys, "bench", tmp_path, "--json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 2
    validate_json(doc, "bench.json")


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["close"], ["close", CAPTURE_V, "--threshold", "0"],
    ["close", CAPTURE_V, "--hil", "maybe"], ["report", CAPTURE_V, "--backend", "cloud"],
    ["targets", CAPTURE_V, "--kind", "toggle"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main([str(a) for a in argv])
    assert info.value.code == EX_USAGE


@pytest.mark.parametrize("argv", [
    ["targets", "/nonexistent/x.v"],
    ["report", CAPTURE_V, "--sva", FIXTURES / "capture_export.csv"],
    ["report", CAPTURE_V, "--import", FIXTURES / "alu_mode.v"],
    ["targets", CAPTURE_V, "--top", "nope"],
])
def test_runtime_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "error" in json.loads(err.strip().splitlines()[-1])


def test_console_script(tmp_path):
    exe = shutil.which("covloop")
    if exe is None:
        pytest.skip("covloop not installed on PATH")
    proc = subprocess.run([exe, "targets", CAPTURE_V, "--kind", "branch"], capture_output=True, text=True)
    assert proc.returncode == 0 and len(json.loads(proc.stdout)["targets"]) == 2


def test_bench_defaults_to_bundled_corpus(capsys):
    code, out, _ = run(capsys, "bench", "--max-iters", "2")
    designs = {line.split()[0] for line in out.splitlines()[1:]}
    assert code == 0 and designs == {"alu", "capture", "counter3", "fsm4", "handshake", "mux2"}
