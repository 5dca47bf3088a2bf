import numpy as np
import pytest
from hypothesis import settings

from tabsearch.evolution import FAILED, OK, EvaluationRecord
from tabsearch.space import DEFAULT_HP, ArchConfig, HPConfig

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_record(job_id, objective, arch=(0,), hp=DEFAULT_HP, finish=None, status=OK, **kw):
    finish = float(job_id) if finish is None else finish
    return EvaluationRecord(
        job_id=job_id,
        arch=arch if isinstance(arch, ArchConfig) else ArchConfig(tuple(arch)),
        hp=hp,
        objective=objective,
        status=status,
        submit_time=kw.pop("submit", 0.0),
        finish_time=finish,
        train_time=kw.pop("train_time", 1.0),
        worker_id=kw.pop("worker_id", 0),
        **kw,
    )


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    """Remember one acceptance verdict; all verdicts are printed at the end of the run."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def record_factory():
    return make_record


__all__ = ["FAILED", "HPConfig", "make_record"]
