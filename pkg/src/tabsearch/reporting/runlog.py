"""Line-delimited JSON run logs.

The first line is a header object ``{"type": "header", ...}`` carrying the run
configuration; every further line is one finished evaluation. Floats are
written with ``repr`` precision, so reading a log back reproduces every numeric
field exactly.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..evolution import EvaluationRecord
from ..space import ArchConfig, HPConfig

FORMAT_VERSION = 1


def record_to_dict(rec: EvaluationRecord) -> dict:
    return {
        "type": "evaluation",
        "job_id": rec.job_id,
        "submit_time": rec.submit_time,
        "finish_time": rec.finish_time,
        "train_time": rec.train_time,
        "worker_id": rec.worker_id,
        "arch": rec.arch.to_list(),
        "hp": rec.hp.to_dict(),
        "objective": rec.objective,
        "status": rec.status,
        "warning": rec.warning,
    }


def record_from_dict(d: dict) -> EvaluationRecord:
    return EvaluationRecord(
        job_id=int(d["job_id"]),
        arch=ArchConfig(tuple(d["arch"])),
        hp=HPConfig.from_dict(d["hp"]),
        objective=float(d["objective"]),
        status=d["status"],
        submit_time=float(d["submit_time"]),
        finish_time=float(d["finish_time"]),
        train_time=float(d["train_time"]),
        worker_id=int(d["worker_id"]),
        warning=d.get("warning", ""),
    )


@dataclass
class RunLog:
    config: dict = field(default_factory=dict)
    records: list[EvaluationRecord] = field(default_factory=list)
    name: str = ""

    def ok_records(self) -> list[EvaluationRecord]:
        return [r for r in self.records if r.ok]

    def dumps(self) -> str:
        lines = [json.dumps({"type": "header", "version": FORMAT_VERSION, "config": self.config})]
        lines += [json.dumps(record_to_dict(r)) for r in self.records]
        return "\n".join(lines) + "\n"


def parse_run_log(text: str, name: str = "") -> RunLog:
    log = RunLog(name=name)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj.get("type") == "header":
            log.config = obj.get("config", {})
        elif obj.get("type") == "evaluation":
            log.records.append(record_from_dict(obj))
        else:
            raise ValueError(f"line {lineno}: unknown entry type {obj.get('type')!r}")
    return log


def read_run_log(path) -> RunLog:
    path = Path(path)
    return parse_run_log(path.read_text(), name=path.stem)


class RunLogWriter:
    """Appends records to a log file, one flushed line per record."""

    def __init__(self, path, config: dict | None = None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._fh = self.path.open("w")
        self._fh.write(json.dumps({"type": "header", "version": FORMAT_VERSION, "config": config or {}}) + "\n")
        self._fh.flush()

    def append(self, rec: EvaluationRecord) -> None:
        line = json.dumps(record_to_dict(rec)) + "\n"
        with self._lock:
            self._fh.write(line)
            self._fh.flush()

    def close(self) -> None:
        with self._lock:
            if not self._fh.closed:
                self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
