"""On-disk persistence of runs, metrics, and human evaluations.

Runs are flat JSON files in a navigable layout rather than a database: they
are human-inspected artifacts, and greppable files beat opaque storage at
this scale.

    <root>/<paper_id>/runs/<domain>-<seq>/   domain.json, raw_response.txt,
                                             source_nodes.json,
                                             parameter_set.json, run.json,
                                             metrics.json (when computed)
    <root>/<paper_id>/output_map.json        append-only index of runs
    <root>/<paper_id>/evaluations/           one JSON per (run_id, evaluator)
    <root>/<paper_id>/curated/<domain>.json  optional human-curated references

The output map is written atomically (temp + rename), so a crash between a
run-directory write and the index append leaves a directory without an index
entry; such directories are ignored and eligible for cleanup.
"""

from __future__ import annotations

import fcntl
import json
import os
import re
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import CorruptIndex, IoError, UnknownRun
from .evaluation import HumanEvaluation, MetricResult
from .generation import RunRecord, SourceNode, Violation
from .paramsearch import ParameterSet

OUTPUT_MAP_FILE = "output_map.json"
RUNS_DIR = "runs"
EVALUATIONS_DIR = "evaluations"
CURATED_DIR = "curated"


@dataclass(frozen=True)
class RunEntry:
    run_id: str
    domain: str
    parameter_set_digest: str
    path: str
    created_at: str
    has_human_eval: bool = False

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "domain": self.domain,
            "parameter_set_digest": self.parameter_set_digest,
            "path": self.path,
            "created_at": self.created_at,
            "has_human_eval": self.has_human_eval,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunEntry":
        return cls(
            run_id=data["run_id"],
            domain=data["domain"],
            parameter_set_digest=data["parameter_set_digest"],
            path=data["path"],
            created_at=data["created_at"],
            has_human_eval=bool(data.get("has_human_eval", False)),
        )


@dataclass
class OutputMap:
    paper_id: str
    runs: list[RunEntry] = field(default_factory=list)


def paper_id_for(pdf_path: str | Path, pdf_bytes: bytes | None = None) -> str:
    """Stable paper identity: slugified PDF filename plus 8-hex content
    digest, so re-ingesting the same file maps to the same store."""
    import hashlib

    pdf_path = Path(pdf_path)
    data = pdf_bytes if pdf_bytes is not None else pdf_path.read_bytes()
    slug = re.sub(r"[^a-z0-9]+", "-", pdf_path.stem.lower()).strip("-") or "paper"
    return f"{slug}-{hashlib.sha256(data).hexdigest()[:8]}"


def _write_json(path: Path, value: Any) -> None:
    """UTF-8, 2-space indent, sorted keys: stable diffs."""
    text = json.dumps(value, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


class RunStore:
    """Single writer per store root (advisory lock file); unlimited
    concurrent readers."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths -------------------------------------------------------------

    def paper_dir(self, paper_id: str) -> Path:
        return self.root / paper_id

    def _map_path(self, paper_id: str) -> Path:
        return self.paper_dir(paper_id) / OUTPUT_MAP_FILE

    def run_dir(self, paper_id: str, run_id: str) -> Path:
        return self.paper_dir(paper_id) / RUNS_DIR / run_id

    @contextmanager
    def _write_lock(self):
        lock_path = self.root / ".lock"
        with open(lock_path, "w") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    # -- runs ----------------------------------------------------------------

    def persist_run(self, record: RunRecord) -> Path:
        """Write the run directory, then append to the output map atomically.
        Assigns the final sequential run_id <domain>-<seq>; the store defines
        the run sequence the evaluation UI pages through."""
        if not record.paper_id:
            raise IoError("record has no paper_id; cannot choose a store directory")
        with self._write_lock():
            output_map = self._load_map(record.paper_id, check_paths=False)
            seq = sum(1 for e in output_map.runs if e.domain == record.domain) + 1
            record.run_id = f"{record.domain}-{seq}"
            run_dir = self.run_dir(record.paper_id, record.run_id)
            try:
                run_dir.mkdir(parents=True, exist_ok=False)
            except OSError as exc:
                raise IoError(f"cannot create {run_dir}: {exc}") from exc

            _write_json(run_dir / "domain.json", record.generated_json)
            (run_dir / "raw_response.txt").write_text(record.raw_response, encoding="utf-8")
            _write_json(
                run_dir / "source_nodes.json",
                [node.to_dict() for node in record.source_nodes],
            )
            _write_json(run_dir / "parameter_set.json", record.parameter_set.to_dict())
            _write_json(
                run_dir / "run.json",
                {
                    "run_id": record.run_id,
                    "domain": record.domain,
                    "paper_id": record.paper_id,
                    "attempts": record.attempts,
                    "created_at": record.created_at,
                    "validation": [v.to_dict() for v in record.validation],
                },
            )

            output_map.runs.append(
                RunEntry(
                    run_id=record.run_id,
                    domain=record.domain,
                    parameter_set_digest=record.parameter_set.digest(),
                    path=str(run_dir.relative_to(self.root)),
                    created_at=record.created_at,
                )
            )
            self._save_map(output_map)
        return run_dir

    def list_runs(self, paper_id: str) -> OutputMap:
        """Parse the output map with invariants checked: an index entry whose
        run directory is gone is reported, never silently dropped."""
        return self._load_map(paper_id, check_paths=True)

    def _load_map(self, paper_id: str, check_paths: bool) -> OutputMap:
        path = self._map_path(paper_id)
        if not path.exists():
            return OutputMap(paper_id=paper_id)
        try:
            data = _read_json(path)
        except ValueError as exc:
            raise CorruptIndex(f"{path} is not valid JSON: {exc}") from exc
        runs = [RunEntry.from_dict(e) for e in data.get("runs", [])]
        if check_paths:
            dangling = [e.run_id for e in runs if not (self.root / e.path).is_dir()]
            if dangling:
                raise CorruptIndex(
                    f"output map for {paper_id} references missing run directories: "
                    f"{', '.join(dangling)}",
                    dangling=dangling,
                )
        return OutputMap(paper_id=paper_id, runs=runs)

    def _save_map(self, output_map: OutputMap) -> None:
        self.paper_dir(output_map.paper_id).mkdir(parents=True, exist_ok=True)
        _write_json(
            self._map_path(output_map.paper_id),
            {
                "paper_id": output_map.paper_id,
                "runs": [e.to_dict() for e in output_map.runs],
            },
        )

    def has_run(self, paper_id: str, run_id: str) -> bool:
        output_map = self._load_map(paper_id, check_paths=False)
        return any(e.run_id == run_id for e in output_map.runs)

    def load_run(self, paper_id: str, run_id: str) -> RunRecord:
        run_dir = self.run_dir(paper_id, run_id)
        if not run_dir.is_dir() or not self.has_run(paper_id, run_id):
            raise UnknownRun(f"no persisted run {run_id!r} for {paper_id!r}")
        meta = _read_json(run_dir / "run.json")
        return RunRecord(
            run_id=meta["run_id"],
            domain=meta["domain"],
            paper_id=meta["paper_id"],
            parameter_set=ParameterSet.from_dict(_read_json(run_dir / "parameter_set.json")),
            generated_json=_read_json(run_dir / "domain.json"),
            raw_response=(run_dir / "raw_response.txt").read_text(encoding="utf-8"),
            source_nodes=[
                SourceNode.from_dict(n) for n in _read_json(run_dir / "source_nodes.json")
            ],
            attempts=meta["attempts"],
            created_at=meta["created_at"],
            validation=[Violation.from_dict(v) for v in meta.get("validation", [])],
        )

    # -- metrics -------------------------------------------------------------

    def save_metrics(self, paper_id: str, run_id: str, metrics: list[MetricResult]) -> None:
        run_dir = self.run_dir(paper_id, run_id)
        if not run_dir.is_dir():
            raise UnknownRun(f"no persisted run {run_id!r} for {paper_id!r}")
        _write_json(run_dir / "metrics.json", [m.to_dict() for m in metrics])

    def load_metrics(self, paper_id: str, run_id: str) -> list[dict] | None:
        path = self.run_dir(paper_id, run_id) / "metrics.json"
        if not path.exists():
            return None
        return _read_json(path)

    # -- human evaluations -----------------------------------------------------

    def _evaluation_path(self, paper_id: str, run_id: str, evaluator: str) -> Path:
        slug = re.sub(r"[^a-zA-Z0-9._-]+", "_", evaluator) or "anonymous"
        return self.paper_dir(paper_id) / EVALUATIONS_DIR / f"{run_id}__{slug}.json"

    def save_evaluation(self, paper_id: str, evaluation: HumanEvaluation) -> None:
        with self._write_lock():
            path = self._evaluation_path(paper_id, evaluation.run_id, evaluation.evaluator)
            path.parent.mkdir(parents=True, exist_ok=True)
            _write_json(path, evaluation.to_dict())
            output_map = self._load_map(paper_id, check_paths=False)
            updated = [
                RunEntry(
                    run_id=e.run_id,
                    domain=e.domain,
                    parameter_set_digest=e.parameter_set_digest,
                    path=e.path,
                    created_at=e.created_at,
                    has_human_eval=True if e.run_id == evaluation.run_id else e.has_human_eval,
                )
                for e in output_map.runs
            ]
            self._save_map(OutputMap(paper_id=paper_id, runs=updated))

    def load_evaluation(
        self, paper_id: str, run_id: str, evaluator: str
    ) -> HumanEvaluation | None:
        path = self._evaluation_path(paper_id, run_id, evaluator)
        if not path.exists():
            return None
        return HumanEvaluation.from_dict(_read_json(path))

    def evaluations_for(self, paper_id: str, run_id: str) -> list[HumanEvaluation]:
        directory = self.paper_dir(paper_id) / EVALUATIONS_DIR
        if not directory.is_dir():
            return []
        out = []
        for path in sorted(directory.glob(f"{run_id}__*.json")):
            out.append(HumanEvaluation.from_dict(_read_json(path)))
        return out

    # -- curated references ------------------------------------------------------

    def curated_for(self, paper_id: str, domain: str) -> Any | None:
        path = self.paper_dir(paper_id) / CURATED_DIR / f"{domain}.json"
        if not path.exists():
            return None
        return _read_json(path)

    def paper_ids(self) -> list[str]:
        out = []
        for child in sorted(self.root.iterdir()):
            if child.is_dir() and (child / OUTPUT_MAP_FILE).exists():
                out.append(child.name)
        return out


class PaperStore:
    """RunStore bound to one paper: the store shape the evaluation layer and
    HTTP service work against."""

    def __init__(self, store: RunStore, paper_id: str):
        self.store = store
        self.paper_id = paper_id

    def list_runs(self) -> OutputMap:
        return self.store.list_runs(self.paper_id)

    def has_run(self, run_id: str) -> bool:
        return self.store.has_run(self.paper_id, run_id)

    def load_run(self, run_id: str) -> RunRecord:
        return self.store.load_run(self.paper_id, run_id)

    def save_evaluation(self, evaluation: HumanEvaluation) -> None:
        self.store.save_evaluation(self.paper_id, evaluation)

    def load_evaluation(self, run_id: str, evaluator: str) -> HumanEvaluation | None:
        return self.store.load_evaluation(self.paper_id, run_id, evaluator)

    def evaluations_for(self, run_id: str) -> list[HumanEvaluation]:
        return self.store.evaluations_for(self.paper_id, run_id)

    def load_metrics(self, run_id: str) -> list[dict] | None:
        return self.store.load_metrics(self.paper_id, run_id)

    def curated_for(self, domain: str) -> Any | None:
        return self.store.curated_for(self.paper_id, domain)
