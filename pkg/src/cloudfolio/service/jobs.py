"""Asynchronous allocation jobs on a bounded worker pool.

Jobs are persisted documents; the runner only moves them through the
legal status transitions (pending to running, running to completed or
failed) and records progress and errors.  The pool's queue preserves
submission order, so jobs start first-in first-out and at most
``workers`` of them run at once.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable

from .store import DocumentStore

__all__ = ["JobStatus", "JobRunner"]


class JobStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


_ALLOWED = {
    JobStatus.PENDING: {JobStatus.RUNNING},
    JobStatus.RUNNING: {JobStatus.COMPLETED, JobStatus.FAILED},
    JobStatus.COMPLETED: set(),
    JobStatus.FAILED: set(),
}

JOBS = "jobs"


class JobRunner:
    def __init__(self, store: DocumentStore, workers: int = 2):
        self._store = store
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="alloc-job")

    def submit(self, job_id: str, task: Callable[[], None]) -> None:
        self._pool.submit(self._run, job_id, task)

    def _run(self, job_id: str, task: Callable[[], None]) -> None:
        # the job may have been deleted while queued
        if not self._transition(job_id, JobStatus.RUNNING):
            return
        try:
            task()
        except Exception as exc:  # noqa: BLE001 - failures end up on the job
            self._transition(job_id, JobStatus.FAILED, error=str(exc))
        else:
            self._transition(job_id, JobStatus.COMPLETED)

    def _transition(self, job_id: str, new: JobStatus, error: str | None = None) -> bool:
        with self._lock:
            doc = self._store.get(JOBS, job_id)
            if doc is None:
                return False
            current = JobStatus(doc["status"])
            if new not in _ALLOWED[current]:
                return False
            doc["status"] = new.value
            if error is not None:
                doc["error"] = error
            self._store.put(JOBS, job_id, doc)
            return True

    def update_progress(
        self, job_id: str, generation: int, best_cost: float, mean_cost: float
    ) -> None:
        with self._lock:
            doc = self._store.get(JOBS, job_id)
            if doc is None or doc["status"] != JobStatus.RUNNING.value:
                return
            doc["progress"] = {
                "generation": generation,
                "best_cost": best_cost,
                "mean_cost": mean_cost,
            }
            self._store.put(JOBS, job_id, doc)

    def shutdown(self, wait: bool = True) -> None:
        self._pool.shutdown(wait=wait)
