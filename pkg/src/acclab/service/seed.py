"""Demo-data seeding: one admin, one teacher, one group with two students,
and one assignment per built-in template.  Passwords are generated fresh
each time and returned to the caller; they are never stored in clear."""

from __future__ import annotations

import secrets
import time

from . import auth
from .commands import Commands
from .state import mint_id
from .store import Store

TWO_WEEKS_S = 14 * 24 * 3600.0


def _assignment_payloads() -> dict[str, dict]:
    return {
        "vacuum-station": {
            "instructions": "Pump the vessel below 1 Pa within the default "
                            "duration. Watch how the valve conductance limits "
                            "the effective pumping speed.",
            "references": ["Lecture notes: rarefied gas flow and pumping speed"],
            "criteria": {"checks": [
                {"channel": "vessel", "property": "final_value_below",
                 "threshold": 1.0},
            ]},
            "quiz": [{
                "text": "Which pump family reaches the lower ultimate pressure?",
                "choices": ["Rotary vane", "Turbomolecular"],
                "correct_index": 1,
            }],
        },
        "transport-channel": {
            "instructions": "Keep the horizontal beta function bounded through "
                            "the channel; try swapping the last slot between a "
                            "drift and a quadrupole.",
            "references": ["Lecture notes: transfer matrices and Twiss functions"],
            "criteria": {"checks": [
                {"channel": "beta_x", "property": "final_value_below",
                 "threshold": 100.0},
            ]},
            "quiz": [{
                "text": "A quadrupole that focuses horizontally acts on the "
                        "vertical plane as a",
                "choices": ["focusing lens", "defocusing lens", "drift"],
                "correct_index": 1,
            }],
        },
        "rlc-bench": {
            "instructions": "Switch the DC source onto the series RLC chain and "
                            "observe the step response; confirm the capacitor "
                            "settles at the source voltage.",
            "references": ["Lecture notes: linear circuit transients"],
            "criteria": {"checks": [
                {"channel": "v_cap", "probe": 0.002, "expected": 10.0,
                 "rel_tol": 0.05},
            ]},
            "quiz": [{
                "text": "Increasing the series resistance makes the step "
                        "response",
                "choices": ["more oscillatory", "less oscillatory"],
                "correct_index": 1,
            }],
        },
        "pfn-modulator": {
            "instructions": "Discharge the pulse-forming network into the "
                            "matched load and measure the flat-top voltage.",
            "references": ["Lecture notes: pulse-forming networks"],
            "criteria": {"checks": [
                {"channel": "v_out", "probe": 5.0e-6, "expected": 5000.0,
                 "rel_tol": 0.1},
            ]},
            "quiz": [{
                "text": "For a matched PFN discharge the load voltage plateau "
                        "sits at",
                "choices": ["the full charge voltage", "half the charge voltage"],
                "correct_index": 1,
            }],
        },
    }


def seed_demo(store: Store, templates: dict, clock=time.time) -> list[dict]:
    """Populate an empty store; returns the generated credentials."""
    if store.state["seq"] != 0:
        raise RuntimeError("data directory already contains events")

    def password() -> str:
        return secrets.token_urlsafe(9)

    credentials = []
    admin_pw = password()
    with store.transaction():
        admin_id = mint_id(store.state, "user", "usr")
        store.append("user_created", {
            "user_id": admin_id, "login": "admin",
            "password": auth.hash_password(admin_pw),
            "role": "Administrator", "display_name": "Administrator",
        }, "system")
    credentials.append({"login": "admin", "password": admin_pw,
                        "role": "Administrator"})
    admin = store.state["users"][admin_id]

    sessions = auth.SessionManager(ttl_hours=1.0, clock=clock)
    commands = Commands(store, templates, sessions, clock=clock)

    teacher_pw = password()
    teacher = commands.create_user(admin, {
        "login": "teacher", "password": teacher_pw, "role": "Teacher",
        "display_name": "Demo Teacher"})
    credentials.append({"login": "teacher", "password": teacher_pw,
                        "role": "Teacher"})

    students = []
    for i in (1, 2):
        pw = password()
        student = commands.create_user(admin, {
            "login": f"student{i}", "password": pw, "role": "Student",
            "display_name": f"Demo Student {i}"})
        credentials.append({"login": student["login"], "password": pw,
                            "role": "Student"})
        students.append(student)

    group = commands.create_group(admin, {"name": "Demo group"})
    commands.add_teacher(admin, group["group_id"], {"user": teacher["user_id"]})
    for student in students:
        commands.add_student(admin, group["group_id"], {"user": student["user_id"]})

    teacher_actor = store.state["users"][teacher["user_id"]]
    payloads = _assignment_payloads()
    for template_id in sorted(templates):
        extra = payloads.get(template_id)
        if extra is None:
            continue
        commands.create_assignment(teacher_actor, {
            "group": group["group_id"], "template": template_id,
            "due": clock() + TWO_WEEKS_S, **extra})

    store.write_snapshot()
    return credentials
