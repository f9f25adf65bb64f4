"""Domain operations behind the HTTP API.

Every command takes the acting user record (already authenticated),
enforces authorization and validity, appends events, and returns plain
JSON-compatible documents.  The HTTP layer maps ApiError onto status
codes; tests can drive this layer directly without a server.
"""

from __future__ import annotations

import time

from ..scheme import (
    ConfigDocumentError,
    SchemeTemplate,
    config_from_doc,
    config_to_doc,
    template_to_doc,
    validate_config,
)
from ..timeseries import TimeSeries
from . import auth, grading
from .state import SUBMISSION_ORDER, mint_id
from .store import Store

VERDICTS = ("TutorChecked", "Certified")

# constant-cost verify target for unknown logins
_DUMMY_RECORD = auth.hash_password("*")


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str, violations=None):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail
        self.violations = violations or []

    def body(self) -> dict:
        return {"error": self.code, "detail": self.detail,
                "violations": self.violations}


def _forbidden(detail="not allowed for this role or resource"):
    return ApiError(403, "forbidden", detail)


def _not_found(what, ident):
    return ApiError(404, "not_found", f"no such {what}: {ident}")


def _invalid(detail, violations=None):
    return ApiError(422, "validation_failed", detail, violations)


def _field_violation(field, reason, detail):
    return [{"field": field, "reason": reason, "detail": detail}]


def _require_str(payload, field, *, optional=False, default=None):
    value = payload.get(field, default)
    if value is None and optional:
        return default
    if not isinstance(value, str) or not value.strip():
        raise _invalid(f"{field} must be a non-empty string",
                       _field_violation(field, "bad_type", f"{field} must be a string"))
    return value


def public_user(user: dict) -> dict:
    return {k: user[k] for k in ("user_id", "login", "role", "display_name", "active")}


class Commands:
    def __init__(self, store: Store, templates: dict[str, SchemeTemplate],
                 sessions: auth.SessionManager, clock=time.time):
        self.store = store
        self.templates = templates
        self.sessions = sessions
        self.clock = clock
        self.on_run_requested = lambda run_id: None
        self.on_grade_needed = lambda submission_id: None

    # -- authentication ---------------------------------------------------

    def authenticate(self, login, password) -> dict:
        bad = ApiError(401, "invalid_credentials", "invalid credentials")
        if not isinstance(login, str) or not isinstance(password, str):
            raise bad
        state = self.store.state
        uid = state["logins"].get(login)
        if uid is None:
            auth.verify_password(password, _DUMMY_RECORD)
            raise bad
        user = state["users"][uid]
        if not auth.verify_password(password, user["password"]) or not user["active"]:
            raise bad
        token = self.sessions.create(uid)
        return {"token": token, "user": public_user(user)}

    def resolve_token(self, token: str | None) -> dict:
        uid = self.sessions.resolve(token) if token else None
        if uid is None:
            raise ApiError(401, "unauthenticated", "missing, unknown, or expired token")
        user = self.store.state["users"].get(uid)
        if user is None or not user["active"]:
            raise ApiError(401, "unauthenticated", "account no longer active")
        return user

    # -- authorization helpers ---------------------------------------------

    def _require_admin(self, actor):
        if actor["role"] != "Administrator":
            raise _forbidden("administrator role required")

    def _is_teacher_of(self, actor, group: dict) -> bool:
        return actor["role"] == "Teacher" and actor["user_id"] in group["teacher_ids"]

    def _is_student_in(self, actor, group: dict) -> bool:
        return actor["role"] == "Student" and actor["user_id"] in group["student_ids"]

    def _teaches_owner(self, actor, owner_id: str) -> bool:
        if actor["role"] != "Teacher":
            return False
        for group in self.store.state["groups"].values():
            if actor["user_id"] in group["teacher_ids"] \
                    and owner_id in group["student_ids"]:
                return True
        return False

    def _group(self, group_id) -> dict:
        group = self.store.state["groups"].get(group_id)
        if group is None:
            raise _not_found("group", group_id)
        return group

    def _template(self, template_id) -> SchemeTemplate:
        template = self.templates.get(template_id)
        if template is None:
            raise _not_found("template", template_id)
        return template

    # -- users and groups ---------------------------------------------------

    def create_user(self, actor, payload) -> dict:
        self._require_admin(actor)
        login = _require_str(payload, "login")
        password = _require_str(payload, "password")
        role = _require_str(payload, "role")
        display_name = _require_str(payload, "display_name",
                                    optional=True, default=login)
        if role not in auth.ROLES:
            raise _invalid(f"role must be one of {list(auth.ROLES)}",
                           _field_violation("role", "bad_value", f"unknown role {role!r}"))
        with self.store.transaction():
            state = self.store.state
            if login in state["logins"]:
                raise ApiError(409, "login_taken", f"login {login!r} already exists")
            uid = mint_id(state, "user", "usr")
            env = self.store.append("user_created", {
                "user_id": uid, "login": login,
                "password": auth.hash_password(password),
                "role": role, "display_name": display_name,
            }, actor["user_id"])
        return public_user(self.store.state["users"][env["data"]["user_id"]])

    def list_users(self, actor) -> dict:
        self._require_admin(actor)
        users = self.store.state["users"]
        return {"users": [public_user(users[uid]) for uid in sorted(users)]}

    def deactivate_user(self, actor, user_id) -> dict:
        self._require_admin(actor)
        with self.store.transaction():
            user = self.store.state["users"].get(user_id)
            if user is None:
                raise _not_found("user", user_id)
            if user["active"]:
                self.store.append("user_deactivated", {"user_id": user_id},
                                  actor["user_id"])
        self.sessions.revoke_user(user_id)
        return public_user(self.store.state["users"][user_id])

    def create_group(self, actor, payload) -> dict:
        self._require_admin(actor)
        name = _require_str(payload, "name")
        with self.store.transaction():
            gid = mint_id(self.store.state, "group", "grp")
            self.store.append("group_created", {"group_id": gid, "name": name},
                              actor["user_id"])
        return dict(self.store.state["groups"][gid])

    def list_groups(self, actor) -> dict:
        groups = self.store.state["groups"]
        uid = actor["user_id"]
        if actor["role"] == "Administrator":
            visible = list(groups)
        elif actor["role"] == "Teacher":
            visible = [g for g, doc in groups.items() if uid in doc["teacher_ids"]]
        else:
            visible = [g for g, doc in groups.items() if uid in doc["student_ids"]]
        return {"groups": [dict(groups[g]) for g in sorted(visible)]}

    def _add_member(self, actor, group_id, payload, expected_role, event) -> dict:
        self._require_admin(actor)
        user_id = _require_str(payload, "user")
        with self.store.transaction():
            self._group(group_id)
            user = self.store.state["users"].get(user_id)
            if user is None:
                raise _not_found("user", user_id)
            if user["role"] != expected_role:
                raise _invalid(
                    f"{user_id} has role {user['role']}, expected {expected_role}",
                    _field_violation("user", "wrong_role",
                                     f"must reference a {expected_role} account"))
            self.store.append(event, {"group_id": group_id, "user_id": user_id},
                              actor["user_id"])
        return dict(self.store.state["groups"][group_id])

    def add_teacher(self, actor, group_id, payload) -> dict:
        return self._add_member(actor, group_id, payload, "Teacher", "teacher_assigned")

    def add_student(self, actor, group_id, payload) -> dict:
        return self._add_member(actor, group_id, payload, "Student", "student_assigned")

    # -- templates ----------------------------------------------------------

    def list_templates(self, actor) -> dict:
        return {"templates": [template_to_doc(self.templates[tid])
                              for tid in sorted(self.templates)]}

    def get_template(self, actor, template_id) -> dict:
        return template_to_doc(self._template(template_id))

    # -- assignments ---------------------------------------------------------

    def _validate_criteria(self, criteria, template: SchemeTemplate) -> dict:
        if not isinstance(criteria, dict) or set(criteria) - {"checks"}:
            raise _invalid("criteria must be {checks: [...]}",
                           _field_violation("criteria", "bad_shape",
                                            "criteria must be a mapping with 'checks'"))
        checks = criteria.get("checks", [])
        if not isinstance(checks, list):
            raise _invalid("criteria.checks must be a list",
                           _field_violation("criteria", "bad_shape", "checks must be a list"))
        declared = {c.channel for c in template.output_channels}
        out = []
        for i, check in enumerate(checks):
            where = f"criteria.checks[{i}]"
            if not isinstance(check, dict):
                raise _invalid(f"{where} must be a mapping",
                               _field_violation("criteria", "bad_shape", where))
            keys = set(check)
            if keys == {"channel", "probe", "expected", "rel_tol"}:
                if not all(isinstance(check[k], (int, float))
                           and not isinstance(check[k], bool)
                           for k in ("probe", "expected", "rel_tol")):
                    raise _invalid(f"{where}: probe/expected/rel_tol must be numbers",
                                   _field_violation("criteria", "bad_type", where))
                if check["rel_tol"] <= 0:
                    raise _invalid(f"{where}: rel_tol must be > 0",
                                   _field_violation("criteria", "bad_value", where))
            elif keys == {"channel", "property", "threshold"}:
                if check["property"] not in ("final_value_below", "final_value_above"):
                    raise _invalid(f"{where}: unknown property {check['property']!r}",
                                   _field_violation("criteria", "bad_value", where))
                if isinstance(check["threshold"], bool) \
                        or not isinstance(check["threshold"], (int, float)):
                    raise _invalid(f"{where}: threshold must be a number",
                                   _field_violation("criteria", "bad_type", where))
            else:
                raise _invalid(
                    f"{where}: expected channel/probe/expected/rel_tol or "
                    "channel/property/threshold",
                    _field_violation("criteria", "bad_shape", where))
            if check["channel"] not in declared:
                raise _invalid(
                    f"{where}: unknown channel {check['channel']!r} "
                    f"(template declares {sorted(declared)})",
                    _field_violation("criteria", "unknown_channel", check["channel"]))
            out.append(dict(check))
        return {"checks": out}

    def _validate_quiz(self, quiz) -> list[dict]:
        if not isinstance(quiz, list):
            raise _invalid("quiz must be a list",
                           _field_violation("quiz", "bad_shape", "quiz must be a list"))
        out = []
        for i, q in enumerate(quiz):
            where = f"quiz[{i}]"
            if not isinstance(q, dict) or set(q) != {"text", "choices", "correct_index"}:
                raise _invalid(f"{where}: expected text/choices/correct_index",
                               _field_violation("quiz", "bad_shape", where))
            choices = q["choices"]
            if not isinstance(choices, list) or len(choices) < 2 \
                    or not all(isinstance(c, str) for c in choices):
                raise _invalid(f"{where}: choices must be >= 2 strings",
                               _field_violation("quiz", "bad_value", where))
            idx = q["correct_index"]
            if isinstance(idx, bool) or not isinstance(idx, int) \
                    or not 0 <= idx < len(choices):
                raise _invalid(f"{where}: correct_index out of range",
                               _field_violation("quiz", "bad_value", where))
            out.append({"question_id": f"q{i + 1}", "text": str(q["text"]),
                        "choices": list(choices), "correct_index": idx})
        return out

    def create_assignment(self, actor, payload) -> dict:
        allowed = {"group", "template", "instructions", "references", "due",
                   "criteria", "quiz"}
        unknown = set(payload) - allowed
        if unknown:
            raise _invalid(f"unknown fields {sorted(unknown)}",
                           _field_violation(sorted(unknown)[0], "unknown_field",
                                            "field not in assignment schema"))
        group_id = _require_str(payload, "group")
        group = self._group(group_id)
        if not self._is_teacher_of(actor, group):
            raise _forbidden("only a teacher of the group may create assignments")
        template_id = _require_str(payload, "template")
        if template_id not in self.templates:
            raise _invalid(f"unknown template {template_id!r}",
                           _field_violation("template", "unknown_template", template_id))
        template = self.templates[template_id]

        due = payload.get("due")
        if isinstance(due, bool) or not isinstance(due, (int, float)):
            raise _invalid("due must be a unix timestamp",
                           _field_violation("due", "bad_type", "seconds since epoch"))
        if due <= self.clock():
            raise _invalid("due must be in the future",
                           _field_violation("due", "in_past", f"due={due}"))

        instructions = payload.get("instructions", "")
        if not isinstance(instructions, str):
            raise _invalid("instructions must be a string",
                           _field_violation("instructions", "bad_type", "string"))
        references = payload.get("references", [])
        if not isinstance(references, list) \
                or not all(isinstance(r, str) for r in references):
            raise _invalid("references must be a list of strings",
                           _field_violation("references", "bad_type", "list of strings"))
        criteria = self._validate_criteria(payload.get("criteria", {"checks": []}),
                                           template)
        quiz = self._validate_quiz(payload.get("quiz", []))

        with self.store.transaction():
            aid = mint_id(self.store.state, "assignment", "asg")
            self.store.append("assignment_created", {
                "assignment_id": aid, "group_id": group_id,
                "template_id": template_id, "instructions": instructions,
                "references": list(references), "due": float(due),
                "criteria": criteria, "quiz": quiz,
            }, actor["user_id"])
        return self._project_assignment(self.store.state["assignments"][aid], actor)

    def _project_assignment(self, assignment: dict, actor) -> dict:
        doc = dict(assignment)
        if actor["role"] == "Student":
            doc["quiz"] = [{k: q[k] for k in ("question_id", "text", "choices")}
                           for q in assignment["quiz"]]
        return doc

    def list_assignments(self, actor, group_id) -> dict:
        if not group_id:
            raise _invalid("group query parameter is required",
                           _field_violation("group", "missing", "pass ?group=<id>"))
        group = self._group(group_id)
        if not (actor["role"] == "Administrator"
                or self._is_teacher_of(actor, group)
                or self._is_student_in(actor, group)):
            raise _forbidden("not a member of this group")
        assignments = self.store.state["assignments"]
        return {"assignments": [
            self._project_assignment(assignments[aid], actor)
            for aid in sorted(assignments)
            if assignments[aid]["group_id"] == group_id]}

    def _assignment(self, assignment_id) -> dict:
        assignment = self.store.state["assignments"].get(assignment_id)
        if assignment is None:
            raise _not_found("assignment", assignment_id)
        return assignment

    # -- runs -----------------------------------------------------------------

    def request_run(self, actor, config_doc) -> dict:
        try:
            config = config_from_doc(config_doc)
        except ConfigDocumentError as exc:
            raise _invalid(str(exc), _field_violation("config", "malformed", str(exc)))
        template = self.templates.get(config.template_id)
        if template is None:
            raise _invalid(f"unknown template {config.template_id!r}",
                           _field_violation("template", "unknown_template",
                                            config.template_id))
        violations = validate_config(template, config)
        if violations:
            raise _invalid("config failed validation",
                           [v.to_doc() for v in violations])
        with self.store.transaction():
            rid = mint_id(self.store.state, "run", "run")
            self.store.append("run_requested", {
                "run_id": rid, "owner_id": actor["user_id"],
                "config": config_to_doc(config),
            }, actor["user_id"])
        self.on_run_requested(rid)
        return dict(self.store.state["runs"][rid])

    def _readable_run(self, actor, run_id) -> dict:
        run = self.store.state["runs"].get(run_id)
        if run is None:
            raise _not_found("run", run_id)
        if actor["user_id"] == run["owner_id"] \
                or actor["role"] == "Administrator" \
                or self._teaches_owner(actor, run["owner_id"]):
            return run
        raise _forbidden("not your run")

    def get_run(self, actor, run_id) -> dict:
        return dict(self._readable_run(actor, run_id))

    def run_csv(self, actor, run_id) -> str:
        run = self._readable_run(actor, run_id)
        if run["status"] != "Done":
            raise ApiError(404, "result_not_ready",
                           f"run {run_id} is {run['status']}, no result to export")
        return TimeSeries.from_doc(run["result"]).to_csv()

    # -- submissions ------------------------------------------------------------

    def _find_submission(self, assignment_id, student_id) -> dict | None:
        for sub in self.store.state["submissions"].values():
            if sub["assignment_id"] == assignment_id \
                    and sub["student_id"] == student_id:
                return sub
        return None

    def save_submission(self, actor, payload) -> dict:
        allowed = {"assignment", "config", "run", "quiz_answers"}
        unknown = set(payload) - allowed
        if unknown:
            raise _invalid(f"unknown fields {sorted(unknown)}",
                           _field_violation(sorted(unknown)[0], "unknown_field",
                                            "field not in submission schema"))
        assignment_id = _require_str(payload, "assignment")
        assignment = self._assignment(assignment_id)
        group = self._group(assignment["group_id"])
        if not self._is_student_in(actor, group):
            raise _forbidden("only a student of the assignment's group may submit")

        try:
            config = config_from_doc(payload.get("config"))
        except ConfigDocumentError as exc:
            raise _invalid(str(exc), _field_violation("config", "malformed", str(exc)))
        if config.template_id != assignment["template_id"]:
            raise _invalid(
                f"config template {config.template_id!r} does not match "
                f"assignment template {assignment['template_id']!r}",
                _field_violation("config", "template_mismatch", config.template_id))
        template = self._template(assignment["template_id"])
        violations = validate_config(template, config)
        if violations:
            raise _invalid("config failed validation",
                           [v.to_doc() for v in violations])

        run_id = _require_str(payload, "run")
        run = self.store.state["runs"].get(run_id)
        if run is None:
            raise _invalid(f"unknown run {run_id!r}",
                           _field_violation("run", "unknown_run", run_id))
        if run["owner_id"] != actor["user_id"]:
            raise _invalid("run belongs to a different user",
                           _field_violation("run", "not_your_run", run_id))
        if run["config"]["template"] != assignment["template_id"]:
            raise _invalid(
                f"run {run_id} used template {run['config']['template']!r}, "
                f"assignment needs {assignment['template_id']!r}",
                _field_violation("run", "template_mismatch", run_id))
        if run["status"] == "Failed":
            raise _invalid(f"run {run_id} failed; submit a successful run",
                           _field_violation("run", "run_failed", run_id))

        quiz = assignment["quiz"]
        answers = payload.get("quiz_answers")
        if answers is not None:
            if not isinstance(answers, list) or len(answers) != len(quiz):
                raise _invalid(f"quiz_answers must list {len(quiz)} choices",
                               _field_violation("quiz_answers", "bad_length",
                                                f"expected {len(quiz)}"))
            for i, (a, q) in enumerate(zip(answers, quiz)):
                if isinstance(a, bool) or not isinstance(a, int) \
                        or not 0 <= a < len(q["choices"]):
                    raise _invalid(f"quiz_answers[{i}] out of range",
                                   _field_violation("quiz_answers", "bad_value", str(i)))

        with self.store.transaction():
            existing = self._find_submission(assignment_id, actor["user_id"])
            if existing is not None and existing["status"] != "Saved":
                raise ApiError(409, "already_submitted",
                               f"submission {existing['submission_id']} is "
                               f"{existing['status']} and cannot be overwritten")
            sid = existing["submission_id"] if existing \
                else mint_id(self.store.state, "submission", "sub")
            self.store.append("submission_saved", {
                "submission_id": sid, "assignment_id": assignment_id,
                "student_id": actor["user_id"], "config": config_to_doc(config),
                "run_id": run_id, "quiz_answers": answers,
            }, actor["user_id"])
        return dict(self.store.state["submissions"][sid])

    def _readable_submission(self, actor, submission_id) -> dict:
        sub = self.store.state["submissions"].get(submission_id)
        if sub is None:
            raise _not_found("submission", submission_id)
        assignment = self._assignment(sub["assignment_id"])
        group = self._group(assignment["group_id"])
        if actor["user_id"] == sub["student_id"] \
                or actor["role"] == "Administrator" \
                or self._is_teacher_of(actor, group):
            return sub
        raise _forbidden("not your submission")

    def get_submission(self, actor, submission_id) -> dict:
        return dict(self._readable_submission(actor, submission_id))

    def list_submissions(self, actor, assignment_id) -> dict:
        if not assignment_id:
            raise _invalid("assignment query parameter is required",
                           _field_violation("assignment", "missing",
                                            "pass ?assignment=<id>"))
        assignment = self._assignment(assignment_id)
        group = self._group(assignment["group_id"])
        submissions = self.store.state["submissions"]
        if actor["role"] == "Administrator" or self._is_teacher_of(actor, group):
            visible = [s for s in submissions.values()
                       if s["assignment_id"] == assignment_id]
        elif self._is_student_in(actor, group):
            visible = [s for s in submissions.values()
                       if s["assignment_id"] == assignment_id
                       and s["student_id"] == actor["user_id"]]
        else:
            raise _forbidden("not a member of this group")
        return {"submissions": [
            dict(s) for s in sorted(visible, key=lambda s: s["submission_id"])]}

    def submit_submission(self, actor, submission_id) -> dict:
        with self.store.transaction():
            sub = self.store.state["submissions"].get(submission_id)
            if sub is None:
                raise _not_found("submission", submission_id)
            if sub["student_id"] != actor["user_id"]:
                raise _forbidden("only the owning student may submit")
            if sub["status"] != "Saved":
                raise ApiError(409, "illegal_transition",
                               f"cannot submit from status {sub['status']}")
            self.store.append("submission_submitted",
                              {"submission_id": submission_id}, actor["user_id"])
            run = self.store.state["runs"].get(sub["run_id"])
            finished = run is not None and run["status"] in ("Done", "Failed")
        if finished:
            self.on_grade_needed(submission_id)
        return dict(self.store.state["submissions"][submission_id])

    def review_submission(self, actor, submission_id, payload) -> dict:
        verdict = _require_str(payload, "verdict")
        comment = payload.get("comment", "")
        if not isinstance(comment, str):
            raise _invalid("comment must be a string",
                           _field_violation("comment", "bad_type", "string"))
        if verdict not in VERDICTS:
            raise _invalid(f"verdict must be one of {list(VERDICTS)}",
                           _field_violation("verdict", "bad_value", verdict))
        with self.store.transaction():
            sub = self.store.state["submissions"].get(submission_id)
            if sub is None:
                raise _not_found("submission", submission_id)
            assignment = self._assignment(sub["assignment_id"])
            group = self._group(assignment["group_id"])
            if not self._is_teacher_of(actor, group):
                raise _forbidden("only a teacher of the student's group may review")
            current = SUBMISSION_ORDER.index(sub["status"])
            target = SUBMISSION_ORDER.index(verdict)
            if current < SUBMISSION_ORDER.index("Submitted") or target <= current:
                raise ApiError(409, "illegal_transition",
                               f"cannot move {sub['status']} -> {verdict}")
            self.store.append("submission_reviewed", {
                "submission_id": submission_id, "status": verdict,
                "comment": comment,
            }, actor["user_id"])
        return dict(self.store.state["submissions"][submission_id])

    # -- grading (worker entry point) ---------------------------------------

    def grade_submission(self, submission_id) -> dict | None:
        """Auto-check a Submitted submission whose run has finished.

        No-op when the status moved on (e.g. a tutor already reviewed it)
        or the run is still executing.
        """
        with self.store.transaction():
            sub = self.store.state["submissions"].get(submission_id)
            if sub is None or sub["status"] != "Submitted":
                return None
            run = self.store.state["runs"].get(sub["run_id"])
            if run is None or run["status"] not in ("Done", "Failed"):
                return None
            assignment = self._assignment(sub["assignment_id"])
            score, report = grading.grade(sub, assignment, run)
            self.store.append("submission_autochecked", {
                "submission_id": submission_id, "auto_score": score,
                "report": report,
            }, "system")
        return dict(self.store.state["submissions"][submission_id])

    # -- reports -----------------------------------------------------------

    def progress_report(self, actor, group_id) -> dict:
        if not group_id:
            raise _invalid("group query parameter is required",
                           _field_violation("group", "missing", "pass ?group=<id>"))
        group = self._group(group_id)
        if not (actor["role"] == "Administrator" or self._is_teacher_of(actor, group)):
            raise _forbidden("progress reports are for admins and the group's teachers")
        assignments = [a for a in self.store.state["assignments"].values()
                       if a["group_id"] == group_id]
        assignments.sort(key=lambda a: a["assignment_id"])
        users = self.store.state["users"]
        rows = []
        for student_id in sorted(group["student_ids"]):
            student = users[student_id]
            for assignment in assignments:
                sub = self._find_submission(assignment["assignment_id"], student_id)
                rows.append({
                    "student_id": student_id,
                    "login": student["login"],
                    "display_name": student["display_name"],
                    "assignment_id": assignment["assignment_id"],
                    "template_id": assignment["template_id"],
                    "status": sub["status"] if sub else None,
                    "auto_score": sub["auto_score"] if sub else None,
                    "certified": bool(sub and sub["status"] == "Certified"),
                })
        return {"group": group_id, "rows": rows}
