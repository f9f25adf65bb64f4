"""Bounded worker pool for simulation runs and grading.

Request threads only append lightweight events; the heavy lifting happens
here.  Every task re-checks state before acting, so duplicate or stale
enqueues degrade to no-ops.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

from ..scheme import config_from_doc, run_config
from .commands import Commands

log = logging.getLogger("acclab.service")


class Runner:
    def __init__(self, commands: Commands, workers: int):
        self.commands = commands
        self.pool = ThreadPoolExecutor(max_workers=workers,
                                       thread_name_prefix="lab-worker")
        commands.on_run_requested = self.enqueue_run
        commands.on_grade_needed = self.enqueue_grade

    def enqueue_run(self, run_id: str) -> None:
        self.pool.submit(self._guarded, self._execute_run, run_id)

    def enqueue_grade(self, submission_id: str) -> None:
        self.pool.submit(self._guarded, self.commands.grade_submission,
                         submission_id)

    def _guarded(self, fn, *args) -> None:
        try:
            fn(*args)
        except Exception:
            log.exception("worker task %s%r failed", fn.__name__, args)

    def _execute_run(self, run_id: str) -> None:
        store = self.commands.store
        with store.transaction():
            run = store.state["runs"].get(run_id)
            if run is None or run["status"] != "Pending":
                return
            store.append("run_started", {"run_id": run_id}, "system")
            config_doc = run["config"]

        # simulate outside any lock; requests stay responsive meanwhile
        try:
            config = config_from_doc(config_doc)
            template = self.commands.templates[config.template_id]
            series = run_config(template, config)
            outcome = {"run_id": run_id, "status": "Done",
                       "result": series.to_doc(), "error": None}
        except Exception as exc:
            outcome = {"run_id": run_id, "status": "Failed",
                       "result": None, "error": f"{type(exc).__name__}: {exc}"}

        store.append("run_finished", outcome, "system")
        for sub in store.state["submissions"].values():
            if sub["run_id"] == run_id and sub["status"] == "Submitted":
                self.enqueue_grade(sub["submission_id"])

    def recover(self) -> None:
        """Re-enqueue work interrupted by a previous shutdown or crash."""
        store = self.commands.store
        with store.transaction():
            interrupted = [rid for rid, run in store.state["runs"].items()
                           if run["status"] == "Running"]
            for rid in interrupted:
                store.append("run_requeued", {"run_id": rid}, "system")
            pending = sorted(rid for rid, run in store.state["runs"].items()
                             if run["status"] == "Pending")
        for rid in pending:
            self.enqueue_run(rid)
        for sid, sub in store.state["submissions"].items():
            if sub["status"] == "Submitted":
                run = store.state["runs"].get(sub["run_id"])
                if run is not None and run["status"] in ("Done", "Failed"):
                    self.enqueue_grade(sid)

    def shutdown(self) -> None:
        self.pool.shutdown(wait=False, cancel_futures=True)
