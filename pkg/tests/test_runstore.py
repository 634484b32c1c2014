"""Run store persistence, output map, and evaluation storage tests."""

from __future__ import annotations

import json

import pytest

from bcogen.errors import CorruptIndex, UnknownRun
from bcogen.evaluation import HumanEvaluation, MetricResult
from bcogen.generation import RunRecord, SourceNode, Violation
from bcogen.paramsearch import ParameterSet
from bcogen.runstore import PaperStore, RunStore, paper_id_for


def make_record(domain: str = "usability", paper_id: str = "paper-abc12345") -> RunRecord:
    return RunRecord(
        run_id="unsaved-xyz",
        domain=domain,
        paper_id=paper_id,
        parameter_set=ParameterSet(k_first=8, k_final=2),
        generated_json=["a generated sentence"],
        raw_response='["a generated sentence"]',
        source_nodes=[
            SourceNode("d:0001", "first chunk", 0.91, 3.0),
            SourceNode("d:0002", "second chunk", 0.85, 1.0),
        ],
        attempts=1,
        created_at="2024-02-03T04:05:06+00:00",
        validation=[],
    )


def test_paper_id_is_slug_plus_digest(tmp_path):
    pdf = tmp_path / "My Paper (v2).pdf"
    pdf.write_bytes(b"%PDF-1.4 fake")
    pid = paper_id_for(pdf)
    slug, digest = pid.rsplit("-", 1)
    assert slug == "my-paper-v2"
    assert len(digest) == 8
    assert pid == paper_id_for(pdf)


def test_persist_first_run_gets_sequence_one(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    path = store.persist_run(record)
    assert record.run_id == "usability-1"
    assert path.is_dir()
    output_map = store.list_runs("paper-abc12345")
    assert len(output_map.runs) == 1
    assert output_map.runs[0].run_id == "usability-1"
    assert output_map.runs[0].has_human_eval is False


def test_sequence_increments_per_domain(tmp_path):
    store = RunStore(tmp_path)
    store.persist_run(make_record("usability"))
    store.persist_run(make_record("usability"))
    store.persist_run(make_record("io"))
    runs = store.list_runs("paper-abc12345").runs
    assert [r.run_id for r in runs] == ["usability-1", "usability-2", "io-1"]
    assert (store.root / "paper-abc12345" / "runs" / "usability-2").is_dir()


def test_run_directory_contents(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    path = store.persist_run(record)
    names = {p.name for p in path.iterdir()}
    assert {"domain.json", "raw_response.txt", "source_nodes.json",
            "parameter_set.json", "run.json"} <= names
    nodes = json.loads((path / "source_nodes.json").read_text())
    assert [n["chunk_id"] for n in nodes] == ["d:0001", "d:0002"]


def test_json_files_are_sorted_and_indented(tmp_path):
    store = RunStore(tmp_path)
    path = store.persist_run(make_record())
    text = (path / "parameter_set.json").read_text()
    parsed = json.loads(text)
    assert text == json.dumps(parsed, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def test_persist_load_round_trip(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    record.validation = [Violation("/1", "not a string")]
    store.persist_run(record)
    loaded = store.load_run("paper-abc12345", record.run_id)
    assert loaded == record


def test_thirty_one_runs_drive_the_counter(tmp_path):
    store = RunStore(tmp_path)
    for _ in range(31):
        store.persist_run(make_record())
    runs = store.list_runs("paper-abc12345").runs
    assert len(runs) == 31
    assert runs[12].run_id == "usability-13"


def test_dangling_index_entry_is_corrupt(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    store.persist_run(record)
    store.persist_run(make_record())
    import shutil

    shutil.rmtree(store.run_dir("paper-abc12345", "usability-1"))
    with pytest.raises(CorruptIndex) as err:
        store.list_runs("paper-abc12345")
    assert err.value.dangling == ["usability-1"]


def test_orphan_run_directory_is_ignored(tmp_path):
    store = RunStore(tmp_path)
    store.persist_run(make_record())
    orphan = store.run_dir("paper-abc12345", "usability-99")
    orphan.mkdir(parents=True)
    runs = store.list_runs("paper-abc12345").runs
    assert [r.run_id for r in runs] == ["usability-1"]


def test_fresh_store_is_empty(tmp_path):
    store = RunStore(tmp_path)
    assert store.list_runs("nothing-here").runs == []


def test_unknown_run_load_rejected(tmp_path):
    store = RunStore(tmp_path)
    with pytest.raises(UnknownRun):
        store.load_run("paper-abc12345", "usability-1")


def test_metrics_persist_beside_the_run(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    path = store.persist_run(record)
    metrics = [MetricResult("answer_relevancy", 0.5, 2, 4, [("s", "yes")])]
    store.save_metrics(record.paper_id, record.run_id, metrics)
    assert (path / "metrics.json").exists()
    loaded = store.load_metrics(record.paper_id, record.run_id)
    assert loaded[0]["score"] == 0.5
    assert store.load_metrics(record.paper_id, "usability-99") is None


def test_save_evaluation_marks_output_map(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    store.persist_run(record)
    ev = HumanEvaluation(
        run_id=record.run_id, evaluator="bob", overall_quality=2,
        content_accuracy=2, schema_conformance=True, saved_at="2024-01-01T00:00:00+00:00",
    )
    store.save_evaluation(record.paper_id, ev)
    runs = store.list_runs(record.paper_id).runs
    assert runs[0].has_human_eval is True
    loaded = store.load_evaluation(record.paper_id, record.run_id, "bob")
    assert loaded == ev
    assert store.load_evaluation(record.paper_id, record.run_id, "carol") is None


def test_save_evaluation_overwrites_per_evaluator(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    store.persist_run(record)
    for quality in (1, 3):
        store.save_evaluation(record.paper_id, HumanEvaluation(
            run_id=record.run_id, evaluator="bob", overall_quality=quality,
            content_accuracy=2, schema_conformance=True,
        ))
    evaluations = store.evaluations_for(record.paper_id, record.run_id)
    assert len(evaluations) == 1
    assert evaluations[0].overall_quality == 3


def test_curated_reference_surfaced_when_present(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    store.persist_run(record)
    assert store.curated_for(record.paper_id, "usability") is None
    curated_dir = store.paper_dir(record.paper_id) / "curated"
    curated_dir.mkdir()
    (curated_dir / "usability.json").write_text(json.dumps(["hand written"]))
    assert store.curated_for(record.paper_id, "usability") == ["hand written"]


def test_paper_store_binds_one_paper(tmp_path):
    store = RunStore(tmp_path)
    record = make_record()
    store.persist_run(record)
    paper = PaperStore(store, record.paper_id)
    assert paper.has_run("usability-1")
    assert not paper.has_run("usability-2")
    assert paper.load_run("usability-1").generated_json == ["a generated sentence"]
    assert store.paper_ids() == [record.paper_id]
