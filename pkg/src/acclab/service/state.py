"""Pure reducer from event envelopes to service state.

State is plain JSON-compatible data.  Handlers never mutate the incoming
state: every change copies the touched section, so readers can hold a
state reference without locking while the writer advances.  Everything a
handler needs must come from the envelope; wall-clock reads here would
break replay equality.
"""

from __future__ import annotations

RUN_RETENTION = 20  # finished runs kept per owner (submission refs pinned)

SUBMISSION_ORDER = ("Saved", "Submitted", "AutoChecked", "TutorChecked", "Certified")


def initial_state() -> dict:
    return {
        "seq": 0,
        "users": {},
        "logins": {},
        "groups": {},
        "assignments": {},
        "runs": {},
        "submissions": {},
        "counters": {},
    }


def mint_id(state: dict, kind: str, prefix: str) -> str:
    return f"{prefix}-{state['counters'].get(kind, 0) + 1:06d}"


def _bump(state: dict, kind: str, minted_id: str) -> None:
    number = int(minted_id.rsplit("-", 1)[1])
    counters = dict(state["counters"])
    counters[kind] = max(counters.get(kind, 0), number)
    state["counters"] = counters


def _user_created(state, env):
    data = env["data"]
    users = dict(state["users"])
    users[data["user_id"]] = {
        "user_id": data["user_id"],
        "login": data["login"],
        "password": data["password"],
        "role": data["role"],
        "display_name": data["display_name"],
        "active": True,
    }
    state["users"] = users
    logins = dict(state["logins"])
    logins[data["login"]] = data["user_id"]
    state["logins"] = logins
    _bump(state, "user", data["user_id"])


def _user_deactivated(state, env):
    uid = env["data"]["user_id"]
    users = dict(state["users"])
    users[uid] = {**users[uid], "active": False}
    state["users"] = users


def _group_created(state, env):
    data = env["data"]
    groups = dict(state["groups"])
    groups[data["group_id"]] = {
        "group_id": data["group_id"],
        "name": data["name"],
        "teacher_ids": [],
        "student_ids": [],
    }
    state["groups"] = groups
    _bump(state, "group", data["group_id"])


def _member_assigned(key):
    def handler(state, env):
        data = env["data"]
        groups = dict(state["groups"])
        group = dict(groups[data["group_id"]])
        if data["user_id"] not in group[key]:
            group[key] = group[key] + [data["user_id"]]
        groups[data["group_id"]] = group
        state["groups"] = groups
    return handler


def _assignment_created(state, env):
    data = env["data"]
    assignments = dict(state["assignments"])
    assignments[data["assignment_id"]] = dict(data)
    state["assignments"] = assignments
    _bump(state, "assignment", data["assignment_id"])


def _run_requested(state, env):
    data = env["data"]
    runs = dict(state["runs"])
    runs[data["run_id"]] = {
        "run_id": data["run_id"],
        "owner_id": data["owner_id"],
        "config": data["config"],
        "status": "Pending",
        "result": None,
        "error": None,
        "created": env["ts"],
        "finished": None,
    }
    state["runs"] = runs
    _bump(state, "run", data["run_id"])


def _run_status(status):
    def handler(state, env):
        rid = env["data"]["run_id"]
        runs = dict(state["runs"])
        runs[rid] = {**runs[rid], "status": status}
        state["runs"] = runs
    return handler


def _run_finished(state, env):
    data = env["data"]
    runs = dict(state["runs"])
    run = {**runs[data["run_id"]],
           "status": data["status"],
           "result": data["result"],
           "error": data["error"],
           "finished": env["ts"]}
    runs[data["run_id"]] = run
    state["runs"] = _pruned(runs, run["owner_id"], state["submissions"])


def _pruned(runs: dict, owner_id: str, submissions: dict) -> dict:
    """Retention: keep the newest RUN_RETENTION finished runs per owner;
    runs referenced by any submission are never dropped."""
    pinned = {sub["run_id"] for sub in submissions.values()}
    finished = sorted(
        (rid for rid, r in runs.items()
         if r["owner_id"] == owner_id and r["status"] in ("Done", "Failed")),
        key=lambda rid: int(rid.rsplit("-", 1)[1]),
        reverse=True,
    )
    for rid in finished[RUN_RETENTION:]:
        if rid not in pinned:
            del runs[rid]
    return runs


def _submission_saved(state, env):
    data = env["data"]
    submissions = dict(state["submissions"])
    submissions[data["submission_id"]] = {
        "submission_id": data["submission_id"],
        "assignment_id": data["assignment_id"],
        "student_id": data["student_id"],
        "config": data["config"],
        "run_id": data["run_id"],
        "quiz_answers": data["quiz_answers"],
        "status": "Saved",
        "auto_score": None,
        "auto_report": None,
        "tutor_comment": None,
        "updated": env["ts"],
    }
    state["submissions"] = submissions
    _bump(state, "submission", data["submission_id"])


def _submission_submitted(state, env):
    sid = env["data"]["submission_id"]
    submissions = dict(state["submissions"])
    submissions[sid] = {**submissions[sid], "status": "Submitted",
                        "updated": env["ts"]}
    state["submissions"] = submissions


def _submission_autochecked(state, env):
    data = env["data"]
    submissions = dict(state["submissions"])
    submissions[data["submission_id"]] = {
        **submissions[data["submission_id"]],
        "status": "AutoChecked",
        "auto_score": data["auto_score"],
        "auto_report": data["report"],
        "updated": env["ts"],
    }
    state["submissions"] = submissions


def _submission_reviewed(state, env):
    data = env["data"]
    submissions = dict(state["submissions"])
    submissions[data["submission_id"]] = {
        **submissions[data["submission_id"]],
        "status": data["status"],
        "tutor_comment": data["comment"],
        "updated": env["ts"],
    }
    state["submissions"] = submissions


HANDLERS = {
    "user_created": _user_created,
    "user_deactivated": _user_deactivated,
    "group_created": _group_created,
    "teacher_assigned": _member_assigned("teacher_ids"),
    "student_assigned": _member_assigned("student_ids"),
    "assignment_created": _assignment_created,
    "run_requested": _run_requested,
    "run_started": _run_status("Running"),
    "run_requeued": _run_status("Pending"),
    "run_finished": _run_finished,
    "submission_saved": _submission_saved,
    "submission_submitted": _submission_submitted,
    "submission_autochecked": _submission_autochecked,
    "submission_reviewed": _submission_reviewed,
}


def apply_event(state: dict, env: dict) -> dict:
    new = dict(state)
    new["seq"] = env["seq"]
    HANDLERS[env["type"]](new, env)
    return new


def replay(events, state: dict | None = None) -> dict:
    current = initial_state() if state is None else state
    for env in events:
        current = apply_event(current, env)
    return current
