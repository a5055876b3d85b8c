import io
import json
import threading
import time

import pytest

from conftest import CORPUS, CORPUS_NAMES, FIXTURES, corpus_sva, corpus_unit, unit_of
from expected import KPI_APPROVED, KPI_PROVEN, KPI_PROVEN_PCT
from oracle import ScalarDesign, exercised_somewhere
from covloop.closure import (
    ClosureConfig, HilMode, Outcome, Reviewer, bench_json, bench_table, benchmark, close_files,
    kpis_from_statuses, run_closure,
)
from covloop.closure.hil import Decision, apply_edit, read_decisions
from covloop.coverage import Status, report_to_json, validate_json
from covloop.engine import BuiltinBackend, ReplayBackend, Verdict
from covloop.errors import ConfigError, InvalidEdit, ReviewTimeout, UnknownTarget
from covloop.sva.generator import design_resources
from covloop.sva.llm import LlmConfig, LlmGenerator
from covloop.sva.model import PropKind
from covloop.sva.parser import parse_sva

DEAD = FIXTURES / "dead_code.v"


def _close(unit, sva="", **cfg):
    return run_closure(unit, sva, ClosureConfig(**cfg))


def _final_props(result):
    return {p.name: p for p in parse_sva(result.sva_text).properties}


# ---- outcomes ----

def test_signed_off_without_generation():
    unit = unit_of(FIXTURES / "all_covered.v")
    result = _close(unit, (FIXTURES / "all_covered.sva").read_text())
    assert result.state.outcome is Outcome.SIGNED_OFF and result.exit_code == 0
    assert len(result.state.history) == 1 and result.state.history[0].generated == []
    assert result.kpis.num_properties == 0 and result.kpis.proven_pct == 100.0


def test_capture_closes_quickly(capture):
    result = _close(capture)
    assert result.state.outcome is Outcome.THRESHOLD_MET
    assert len(result.state.history) <= 2
    oracle = ScalarDesign(capture)
    props = _final_props(result)
    stmt_ids = [t.id for t in oracle.targets if ":S@" in t.id]
    for tid in stmt_ids:
        witnesses = [p for p in props.values() if p.kind is PropKind.ASSERT
                     and oracle.verdict(p) == "PROVEN" and exercised_somewhere(oracle, p, tid)]
        assert witnesses, tid
    assert all(t.status is Status.COVERED for t in result.report.targets)


def test_dead_code_escalates():
    result = _close(unit_of(DEAD), stall_exit=False)
    assert result.state.outcome is Outcome.ESCALATED and result.exit_code == 2
    assert len(result.state.history) == 5
    unreachable = [t.id for t in result.report.targets if t.status is Status.UNREACHABLE]
    assert unreachable and set(unreachable) <= set(result.state.open_targets)
    oracle = ScalarDesign(unit_of(DEAD))
    assert not set(unreachable) & oracle.executed_anywhere()


def test_dead_code_stalls_by_default():
    result = _close(unit_of(DEAD))
    assert result.state.outcome is Outcome.STALLED and result.exit_code == 3
    assert len(result.state.history) < 5


def test_dead_code_excluded_meets_threshold():
    result = _close(unit_of(DEAD), exclude_unreachable=True)
    assert result.state.outcome is Outcome.THRESHOLD_MET


def test_generation_disabled_stalls(capture):
    result = _close(capture, generation=False)
    assert result.state.outcome is Outcome.STALLED and len(result.state.history) == 1


def test_lower_threshold(capture):
    result = _close(capture, (CORPUS / "capture.sva").read_text(), threshold=1.0)
    assert result.state.outcome is Outcome.THRESHOLD_MET or result.state.outcome is Outcome.SIGNED_OFF


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_closes(name):
    result = _close(corpus_unit(name), corpus_sva(name))
    assert result.state.outcome is Outcome.THRESHOLD_MET
    assert len(result.state.history) <= 5
    covs = [r.coverage_pct for r in result.state.history]
    assert covs == sorted(covs)
    validate_json(result.manifest(), "manifest.json")


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_deterministic(name):
    one = _close(corpus_unit(name), corpus_sva(name), seed=11)
    two = _close(corpus_unit(name), corpus_sva(name), seed=11)
    assert one.sva_text == two.sva_text
    assert one.manifest_text() == two.manifest_text()


def test_seed_changes_names(capture):
    a = _close(capture, seed=1).generated
    b = _close(capture, seed=2).generated
    assert len(a) == len(b) and a != b


# ---- KPIs ----

def test_kpi_arithmetic():
    names = [f"p{i}" for i in range(KPI_APPROVED)]
    statuses = {n: (Verdict.PROVEN if i < KPI_PROVEN else Verdict.FALSIFIED) for i, n in enumerate(names)}
    statuses["p39"] = Verdict.UNDETERMINED
    kpi = kpis_from_statuses(names, statuses, 80.0)
    assert (kpi.num_properties, kpi.num_proven, kpi.proven_pct) == (40, 36, KPI_PROVEN_PCT)


def test_kpi_empty():
    kpi = kpis_from_statuses([], {}, 100.0)
    assert kpi.num_properties == 0 and kpi.proven_pct == 100.0


def test_kpi_hand_count():
    unit = corpus_unit("fsm4")
    result = _close(unit, corpus_sva("fsm4"))
    props = _final_props(result)
    oracle = ScalarDesign(unit)
    generated = [n for n in props if n.startswith("p_")]
    proven = sum(oracle.verdict(props[n]) == "PROVEN" for n in generated)
    assert result.kpis.num_properties == len(generated)
    assert result.kpis.num_proven == proven
    assert result.kpis.proven_pct == round(100 * proven / len(generated), 2)


# ---- human review ----

def _pending(unit, sva=""):
    result = _close(unit, sva, max_iterations=2)
    named = [p for p in parse_sva(result.sva_text).properties if p.name.startswith("p_")]
    return named, design_resources(unit, parse_sva(sva).resources())


def test_auto_approves_everything(capture):
    props, res = _pending(capture)
    merged, log = Reviewer(HilMode.AUTO).review(props[:3], res, 0)
    assert len(merged) == 3 and [e.decision for e in log] == [Decision.APPROVE] * 3


def test_queue_rejects_one(tmp_path, capture):
    props, res = _pending(capture)
    props = props[:2]
    reviewer = Reviewer(HilMode.QUEUE, tmp_path, timeout_s=10, poll_s=0.02)

    def answer():
        request = tmp_path / "pending_review_iter0.json"
        while not request.exists():
            time.sleep(0.01)
        names = [p["name"] for p in json.loads(request.read_text())["properties"]]
        (tmp_path / "decisions_iter0.json").write_text(json.dumps({"decisions": [
            {"name": names[0], "decision": "approve"}, {"name": names[1], "decision": "reject"}]}))

    t = threading.Thread(target=answer)
    t.start()
    merged, log = reviewer.review(props, res, 0)
    t.join()
    assert [p.name for p in merged] == [props[0].name]
    assert [e.decision for e in log] == [Decision.APPROVE, Decision.REJECT]


def test_queue_timeout(tmp_path, capture):
    props, res = _pending(capture)
    with pytest.raises(ReviewTimeout):
        Reviewer(HilMode.QUEUE, tmp_path, timeout_s=0.1, poll_s=0.02).review(props[:1], res, 3)
    assert (tmp_path / "pending_review_iter3.json").exists()


def test_unlisted_names_stay_pending(tmp_path):
    path = tmp_path / "d.json"
    path.write_text(json.dumps({"decisions": [{"name": "a", "decision": "APPROVE"}]}))
    assert read_decisions(path, ["a", "b"]) == [("a", Decision.APPROVE, None), ("b", None, None)]


def test_bad_edit_stays_pending(capture):
    props, res = _pending(capture)
    target = next(p for p in props if p.kind is PropKind.ASSERT)
    with pytest.raises(InvalidEdit):
        apply_edit(target, "(a && b) |=> (c == d1) |=> (c == d2)", res)
    stdin = io.StringIO("e\n(a && b) |=> (c == d1 && c == d2)\n")
    reviewer = Reviewer(HilMode.INTERACTIVE, stdin=stdin, stdout=io.StringIO())
    merged, log = reviewer.review([target], res, 0)
    assert merged == [] and log[0].pending and log[0].error


def test_good_edit_is_merged(capture):
    props, res = _pending(capture)
    target = next(p for p in props if p.kind is PropKind.ASSERT)
    stdin = io.StringIO("e\n(a && b) |=> (c == $past(d1))\n")
    reviewer = Reviewer(HilMode.INTERACTIVE, stdin=stdin, stdout=io.StringIO())
    (new,), log = reviewer.review([target], res, 0)
    assert log[0].accepted and new.name == target.name and new.trace == target.trace


def test_interactive_choices(capture):
    props, res = _pending(capture)
    out = io.StringIO()
    reviewer = Reviewer(HilMode.INTERACTIVE, stdin=io.StringIO("a\nr\n"), stdout=out)
    merged, log = reviewer.review(props[:2], res, 0)
    assert [e.decision for e in log] == [Decision.APPROVE, Decision.REJECT]
    assert len(merged) == 1 and props[0].name in out.getvalue()


def test_queue_mode_in_loop(tmp_path, capture):
    def answer():
        request = tmp_path / "pending_review_iter0.json"
        while not request.exists():
            time.sleep(0.01)
        doc = json.loads(request.read_text())
        (tmp_path / "decisions_iter0.json").write_text(json.dumps({"decisions": [
            {"name": p["name"], "decision": "approve"} for p in doc["properties"]]}))

    t = threading.Thread(target=answer)
    t.start()
    cfg = ClosureConfig(hil=HilMode.QUEUE, review_dir=str(tmp_path), review_timeout_s=10)
    result = run_closure(capture, "", cfg, reviewer=Reviewer(HilMode.QUEUE, tmp_path, 10, 0.02))
    t.join()
    assert result.state.outcome is Outcome.THRESHOLD_MET
    assert result.state.history[0].decisions


# ---- backends and generators ----

def test_replay_drives_two_turns(tmp_path, capture):
    builtin = BuiltinBackend()
    first = builtin.measure_coverage(capture, [])
    full = report_to_json(first)
    for t in full["targets"]:
        t["status"] = "COVERED"
    full["coverage_pct"] = 100.0
    path = tmp_path / "rec.json"
    path.write_text(json.dumps([report_to_json(first), dict(full, iteration=1)]))
    backend = ReplayBackend.load(path)
    result = run_closure(capture, "", ClosureConfig(), backend)
    assert len(result.state.history) == 2 and backend.position == 2
    assert result.state.outcome is Outcome.THRESHOLD_MET
    # the recording had no proof table, so no generated property counts as proven
    assert result.kpis.num_proven == 0


def test_replay_unknown_target_aborts(tmp_path, capture):
    doc = report_to_json(BuiltinBackend().measure_coverage(capture, []))
    doc["targets"][0]["id"] = "other.v:x:S@1.1-1.2"
    path = tmp_path / "rec.json"
    path.write_text(json.dumps([doc]))
    with pytest.raises(UnknownTarget):
        run_closure(capture, "", ClosureConfig(), ReplayBackend.load(path))


class _Echo:
    def complete(self, messages):
        return "not a property"


def test_llm_audit_recorded(capture):
    llm = LlmGenerator(LlmConfig("http://unused", "stub", max_retries=1), _Echo())
    result = run_closure(capture, "", ClosureConfig(), llm=llm)
    template = _close(capture)
    assert result.sva_text == template.sva_text
    audits = result.state.history[0].llm
    assert audits and all(a["fallback"] for a in audits)


@pytest.mark.parametrize("doc", [{"threshold": 0}, {"max_iterations": 0}, {"hil": "sometimes"},
                                 {"colour": "red"}, {"delay": 0}])
def test_bad_config(doc):
    with pytest.raises(ConfigError):
        ClosureConfig.from_dict(doc)


def test_close_files(tmp_path):
    result = close_files([CORPUS / "mux2.v"], CORPUS / "mux2.sva", ClosureConfig())
    assert result.design == "mux2" and result.state.outcome is Outcome.THRESHOLD_MET


# ---- benchmark ----

def test_bench_empty(tmp_path):
    rows = benchmark(tmp_path)
    assert rows == [] and bench_json(rows) == {"rows": []}
    assert bench_table(rows).startswith("design")


def test_bench_single_design_schema(tmp_path):
    for ext in (".v", ".sva"):
        (tmp_path / f"mux2{ext}").write_text((CORPUS / f"mux2{ext}").read_text())
    rows = benchmark(tmp_path)
    assert [r.generation for r in rows] == [False, True]
    validate_json(bench_json(rows), "bench.json")
    assert rows[1].coverage_pct > rows[0].coverage_pct


def test_bench_records_failures(tmp_path):
    (tmp_path / "broken.v").write_text("module broken(input a; endmodule\n")
    rows = benchmark(tmp_path)
    assert len(rows) == 2 and all(r.error and r.outcome is None for r in rows)
    assert "error:" in bench_table(rows)
