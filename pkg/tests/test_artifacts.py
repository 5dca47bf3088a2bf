import csv

import numpy as np
from conftest import make_record

from tabsearch.reporting import RunLog, emit_artifacts
from tabsearch.space import HPConfig


def random_log(n, seed, name="run"):
    rng = np.random.default_rng(seed)
    recs = [make_record(i, float(rng.uniform()), arch=tuple(rng.integers(0, 31, 4)),
                        hp=HPConfig(float(10 ** rng.uniform(-3, -1)), 128, 4), finish=float(i) * 1.5)
            for i in range(n)]
    return RunLog({"seed": seed}, recs, name)


def test_byte_identical_reruns(tmp_path):
    log = random_log(500, 0)
    a = emit_artifacts(log, tmp_path / "a")
    b = emit_artifacts(log, tmp_path / "b")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_trajectory_rows_match_ok_records(tmp_path):
    log = random_log(120, 1)
    log.records.append(make_record(999, 0.0, status="failed", finish=500.0))
    emit_artifacts(log, tmp_path)
    with open(tmp_path / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 120
    best = [float(r["best_so_far"]) for r in rows]
    assert best == sorted(best)
    assert (tmp_path / "best_so_far.svg").read_text().startswith("<svg")


def test_empty_log_gives_header_only_files(tmp_path):
    emit_artifacts(RunLog({}, [], "empty"), tmp_path)
    for name in ("trajectory.csv", "counts.csv", "pca.csv", "pca_variance.csv"):
        assert len((tmp_path / name).read_text().splitlines()) == 1


def test_multiple_logs_share_threshold(tmp_path):
    emit_artifacts([random_log(200, 0, "a"), random_log(200, 1, "b")], tmp_path)
    with open(tmp_path / "counts.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["run"] for r in rows} == {"a", "b"}
    assert len({r["threshold"] for r in rows}) == 1
