"""Acceptance gate: one test per release criterion.

Each test states its criterion in the first docstring line; conftest
prints a PASS/FAIL line per criterion after the run.  Tolerances here are
the contract, not aspirations: loosening one is a release decision.
"""

import math
import random
import subprocess
import sys
import time
from dataclasses import replace

import httpx
import numpy as np
import pytest
from fastapi.testclient import TestClient

from acclab import beam, circuit, vacuum
from acclab.beam import Beamline, BeamlineElement, TwissParams
from acclab.ode import SolverSettings
from acclab.scheme import (builtin_templates, config_to_doc, default_config,
                           instantiate, run_config, validate_config)
from acclab.service.auth import hash_password
from acclab.service.commands import ApiError
from acclab.service.events import EventLog, canonical_json
from acclab.service.state import SUBMISSION_ORDER, replay
from acclab.service.store import Store
from acclab.timeseries import sample_at

from test_cli import free_port, wait_for_health, write_config
from test_scheme import random_config
from test_service import ALL, MATRIX, Clock, Lab, login, make_service, wait_done


def by_id(template_id):
    return next(t for t in builtin_templates() if t.template_id == template_id)


def parse_credentials(stdout):
    creds = {}
    for line in stdout.strip().splitlines():
        fields = dict(part.split("=", 1) for part in line.split())
        creds[fields["login"]] = fields["password"]
    return creds


def serve_subprocess(addr, data_dir):
    return subprocess.Popen(
        [sys.executable, "-m", "acclab.cli", "serve", "--addr", addr,
         "--data", str(data_dir)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)


def test_single_chamber_pumpdown_matches_exponential():
    """Pumped chamber follows p0*exp(-S*t/V) to 0.1% at 20 probes, under 1 s."""
    volume, speed, p0 = 100.0, 10.0, 1000.0
    network = vacuum.VacuumNetwork(
        chambers=[vacuum.Chamber(id="tank", volume=volume, initial_pressure=p0)],
        pumps=[vacuum.Pump(id="pump", attached_chamber="tank", speed=speed,
                           ultimate_pressure=1e-9)],
    )
    started = time.perf_counter()
    series = vacuum.pumpdown(network, duration=60.0, n_samples=601)
    elapsed = time.perf_counter() - started

    for t in np.linspace(3.0, 60.0, 20):
        expected = p0 * math.exp(-speed * t / volume)
        measured = sample_at(series, "tank", float(t))
        assert abs(measured - expected) / expected < 1e-3, t
    assert elapsed < 1.0


def test_steady_state_matches_dense_solve_and_gas_is_conserved():
    """Equilibrium equals an independent dense solve to 1e-9; sealed networks
    conserve total gas to within 10x the solver tolerance over 1000 s."""
    link_c, s_a, s_b = 20.0, 2.0, 40.0
    ult_a, ult_b = 0.05, 1e-4
    q_a, q_b = 0.02, 0.005
    network = vacuum.VacuumNetwork(
        chambers=[
            vacuum.Chamber(id="a", volume=50.0, initial_pressure=300.0,
                           outgassing_rate=q_a),
            vacuum.Chamber(id="b", volume=200.0, initial_pressure=500.0,
                           outgassing_rate=q_b),
        ],
        pumps=[
            vacuum.Pump(id="pa", attached_chamber="a", speed=s_a,
                        ultimate_pressure=ult_a),
            vacuum.Pump(id="pb", attached_chamber="b", speed=s_b,
                        ultimate_pressure=ult_b),
        ],
        links=[vacuum.ConductanceLink(id="duct", endpoints=("a", "b"),
                                      conductance=link_c)],
    )
    # the same balance assembled by hand: 0 = Q + C(p_other - p) - S(p - p_ult)
    matrix = np.array([
        [-link_c - s_a, link_c],
        [link_c, -link_c - s_b],
    ])
    rhs = np.array([-q_a - s_a * ult_a, -q_b - s_b * ult_b])
    dense = np.linalg.solve(matrix, rhs)
    solved = vacuum.steady_state(network)
    assert abs(solved["a"] - dense[0]) <= 1e-9 * abs(dense[0])
    assert abs(solved["b"] - dense[1]) <= 1e-9 * abs(dense[1])

    sealed = vacuum.VacuumNetwork(
        chambers=[
            vacuum.Chamber(id="a", volume=50.0, initial_pressure=800.0),
            vacuum.Chamber(id="b", volume=200.0, initial_pressure=100.0),
        ],
        links=[vacuum.ConductanceLink(id="duct", endpoints=("a", "b"),
                                      conductance=15.0)],
    )
    series = vacuum.pumpdown(sealed, duration=1000.0, n_samples=401)
    total = 50.0 * series.channel("a") + 200.0 * series.channel("b")
    drift = float(np.max(np.abs(total / total[0] - 1.0)))
    assert drift < 10.0 * SolverSettings().rel_tol


def test_transfer_matrices_twiss_and_envelope_invariants():
    """det(M)=1 to 1e-12 over 10^4 elements, the Twiss invariant to 1e-10
    over 10^3 maps, thin-lens FODO cos(mu) and the waist parabola to 1e-9."""
    rng = np.random.default_rng(20260821)

    def random_element(wild):
        kind = ("drift", "quadrupole", "sector_bend")[rng.integers(0, 3)]
        length = float(rng.uniform(0.05, 1.5 if wild else 0.8))
        if kind == "drift":
            return BeamlineElement(kind="drift", length=length)
        if kind == "quadrupole":
            k = float(rng.uniform(-5.0, 5.0) if wild else rng.uniform(-1.5, 1.5))
            return BeamlineElement(kind="quadrupole", length=length, strength=k)
        angle = float(rng.uniform(-1.0, 1.0) if wild else rng.uniform(-0.3, 0.3))
        return BeamlineElement(kind="sector_bend", length=length, strength=angle)

    for _ in range(10_000):
        element = random_element(wild=True)
        for plane in ("x", "y"):
            m = beam.element_matrix(element, plane)
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            assert abs(det - 1.0) <= 1e-12, element

    for _ in range(1_000):
        line = Beamline([random_element(wild=False) for _ in range(3)])
        m = beam.compose(line).x
        beta0 = float(np.exp(rng.uniform(np.log(0.5), np.log(5.0))))
        alpha0 = float(rng.uniform(-1.5, 1.5))
        tw1 = beam.propagate_twiss(
            TwissParams(alpha=alpha0, beta=beta0, emittance=1e-6), m)
        assert abs(tw1.gamma * tw1.beta - tw1.alpha**2 - 1.0) <= 1e-10
        # dual route: transport the full (beta, alpha, gamma) triple by hand
        m11, m12, m21, m22 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        g0 = (1.0 + alpha0**2) / beta0
        beta1 = m11**2 * beta0 - 2.0 * m11 * m12 * alpha0 + m12**2 * g0
        alpha1 = (-m11 * m21 * beta0 + (m11 * m22 + m12 * m21) * alpha0
                  - m12 * m22 * g0)
        gamma1 = m21**2 * beta0 - 2.0 * m21 * m22 * alpha0 + m22**2 * g0
        assert abs(tw1.beta - beta1) <= 1e-9 * beta1
        assert abs(tw1.alpha - alpha1) <= 1e-9 * max(1.0, abs(alpha1))
        assert abs(gamma1 * beta1 - alpha1**2 - 1.0) <= 1e-10

    def thin_quad(f):
        eps = 1e-10
        return BeamlineElement(kind="quadrupole", length=eps,
                               strength=1.0 / (f * eps))

    for f, spacing in ((1.0, 1.0), (2.0, 1.0), (2.5, 0.8), (3.0, 1.5), (10.0, 4.0)):
        cell = Beamline([
            thin_quad(f),
            BeamlineElement(kind="drift", length=spacing),
            thin_quad(-f),
            BeamlineElement(kind="drift", length=spacing),
        ])
        stability = beam.cell_stability(cell)
        expected = 1.0 - spacing**2 / (2.0 * f**2)
        for plane in (stability.x, stability.y):
            assert plane.stable
            assert abs(math.cos(plane.phase_advance) - expected) <= 1e-9, (f, spacing)

    waist = TwissParams(alpha=0.0, beta=5.0, emittance=1e-6)
    profile = beam.envelope(
        Beamline([BeamlineElement(kind="drift", length=10.0)]), waist, step=0.05)
    s = profile.times
    beta_expected = 5.0 + s**2 / 5.0
    beta_measured = profile.channel("beta_x")
    assert np.all(np.abs(beta_measured - beta_expected) <= 1e-9 * beta_expected)
    env_expected = np.sqrt(1e-6 * beta_expected)
    env_measured = profile.channel("envelope_x")
    assert np.all(np.abs(env_measured - env_expected) <= 1e-9 * env_expected)
    assert beta_measured[60] == pytest.approx(6.8, rel=1e-12)  # s = 3 m


def test_rematch_recovers_a_perturbed_two_quad_solution():
    """Quads detuned by 10% re-match to residual < 1e-6 within 2000
    iterations, and repeat runs are bit-identical."""
    line = Beamline([
        BeamlineElement(kind="drift", length=0.5),
        BeamlineElement(kind="quadrupole", length=0.2, strength=3.0),
        BeamlineElement(kind="drift", length=1.0),
        BeamlineElement(kind="quadrupole", length=0.2, strength=-3.0),
        BeamlineElement(kind="drift", length=1.0),
    ])
    tw0 = TwissParams(alpha=0.0, beta=5.0, emittance=1e-6)
    m = beam.compose(line)
    target = (beam.propagate_twiss(tw0, m.x), beam.propagate_twiss(tw0, m.y))

    for f1, f2 in ((1.1, 0.9), (0.9, 1.1)):
        elements = list(line.elements)
        elements[1] = replace(elements[1], strength=3.0 * f1)
        elements[3] = replace(elements[3], strength=-3.0 * f2)
        perturbed = Beamline(elements)

        result = beam.match_quadrupoles(perturbed, [1, 3], tw0, target)
        assert result.residual < 1e-6, (f1, f2, result)
        assert result.iterations <= 2000
        again = beam.match_quadrupoles(perturbed, [1, 3], tw0, target)
        assert again.strengths == result.strengths
        assert again.residual == result.residual
        assert again.iterations == result.iterations


def test_circuit_waveforms_match_closed_forms():
    """RC decay and LC period to 0.5%, KCL residuals below 1e-6, and the
    matched PFN pulse within 15% width and 5% energy of the design values."""
    rc = circuit.Circuit(ground="gnd", elements=[
        circuit.capacitor("C1", "top", "gnd", 1e-6, v0=10.0),
        circuit.resistor("R1", "top", "gnd", 1000.0),
    ])
    series = circuit.transient(rc, 2e-3, 201)
    expected = 10.0 / math.e
    assert abs(sample_at(series, "v_top", 1e-3) - expected) / expected < 5e-3

    lc = circuit.Circuit(ground="gnd", elements=[
        circuit.capacitor("C1", "top", "gnd", 1e-6, v0=1.0),
        circuit.inductor("L1", "top", "gnd", 1e-3),
    ])
    period = 2.0 * math.pi * math.sqrt(1e-3 * 1e-6)
    osc = circuit.transient(lc, 3.0 * period, 1200)
    v = osc.channel("v_top")
    t = osc.times
    crossings = []
    for i in range(1, len(v)):
        if (v[i - 1] > 0.0) != (v[i] > 0.0):
            frac = v[i - 1] / (v[i - 1] - v[i])
            crossings.append(t[i - 1] + frac * (t[i] - t[i - 1]))
    half_periods = np.diff(crossings)
    assert len(half_periods) >= 4
    assert abs(2.0 * float(np.mean(half_periods)) - period) / period < 5e-3

    rlc = circuit.Circuit(ground="gnd", elements=[
        circuit.dc_source("V1", "src", "gnd", 10.0),
        circuit.switch("sw", "src", "mid", closed_at=5e-4),
        circuit.resistor("R1", "mid", "ring", 50.0),
        circuit.inductor("L1", "ring", "cap", 1e-3),
        circuit.capacitor("C1", "cap", "gnd", 1e-6),
    ])
    solution = circuit.simulate_transient(rlc, 2e-3, 500)
    residuals = circuit.kcl_residuals(rlc, solution)
    worst = max(float(np.max(np.abs(r))) for r in residuals.values())
    assert worst < 1e-6

    n, l_per, c_per, v0 = 5, 1e-5, 1e-7, 1e4
    z = math.sqrt(l_per / c_per)
    design_width = 2.0 * n * math.sqrt(l_per * c_per)
    pfn = circuit.pfn_template(n, l_per, c_per, z, charge_voltage=v0)

    pulse = circuit.transient(pfn, 4e-5, 800)
    v_out = pulse.channel("v_out")
    t = pulse.times
    half = float(np.max(v_out)) / 2.0
    above = v_out >= half

    def crossing_time(i):
        frac = (half - v_out[i]) / (v_out[i + 1] - v_out[i])
        return t[i] + frac * (t[i + 1] - t[i])

    first = int(np.argmax(above))
    last = len(above) - 1 - int(np.argmax(above[::-1]))
    rise = t[0] if first == 0 else crossing_time(first - 1)
    fall = crossing_time(last)
    width = fall - rise
    assert abs(width - design_width) / design_width < 0.15

    drained = circuit.transient(pfn, 1e-4, 4000)
    power = drained.channel("v_out") ** 2 / z
    delivered = float(np.trapezoid(power, drained.times))
    stored = 0.5 * n * c_per * v0**2
    assert abs(delivered - stored) / stored < 0.05


def test_builtin_templates_run_defaults_and_random_configs():
    """All four built-ins run their defaults with the declared channels,
    1000 random in-bounds configs validate and run to finite output, and
    instantiate is structurally deterministic."""
    weights = {"transport-channel": 550, "vacuum-station": 250,
               "rlc-bench": 110, "pfn-modulator": 90}
    templates = {t.template_id: t for t in builtin_templates()}
    assert sorted(templates) == sorted(weights)

    for template in templates.values():
        cfg = default_config(template)
        assert validate_config(template, cfg) == []
        series = run_config(template, cfg)
        declared = [(o.channel, o.unit) for o in template.output_channels]
        assert [(lab, series.units[lab]) for lab in series.labels] == declared
        assert instantiate(template, cfg) == instantiate(template, cfg)

    rng = random.Random(20260821)
    ran = 0
    for template_id in sorted(weights):
        template = templates[template_id]
        for i in range(weights[template_id]):
            cfg = random_config(template, rng)
            assert validate_config(template, cfg) == []
            if i == 0:
                assert instantiate(template, cfg) == instantiate(template, cfg)
            series = run_config(template, cfg)
            for label in series.labels:
                assert np.all(np.isfinite(series.channel(label))), \
                    (template_id, label, cfg)
            ran += 1
    assert ran == 1000


def test_service_authorization_durability_and_recovery(tmp_path):
    """Exhaustive role matrix holds, snapshots replay byte-identically,
    10^4 random submission calls admit no illegal transition, and a killed
    server restarts without losing acknowledged work."""
    # -- exhaustive role x endpoint matrix ---------------------------------
    # one world per row: an allowed mutation (say, promoting teacher2 into
    # the group) must not leak into the next row's denial expectations
    for name, op, allowed in MATRIX:
        world = Lab(tmp_path / f"authz-{name}")
        try:
            for who in sorted(ALL - allowed) + sorted(allowed):
                if who in allowed:
                    op(world, world.actor(who))
                else:
                    with pytest.raises(ApiError) as err:
                        op(world, world.actor(who))
                    assert err.value.status == 403, (name, who)
        finally:
            world.close()

    world = Lab(tmp_path / "authz-review")
    try:
        world.commands.submit_submission(world.actor("student1"),
                                         world.submission_id)
        for who in sorted(ALL - {"teacher"}):
            with pytest.raises(ApiError) as err:
                world.commands.review_submission(
                    world.actor(who), world.submission_id,
                    {"verdict": "Certified"})
            assert err.value.status == 403, who
        reviewed = world.commands.review_submission(
            world.actor("teacher"), world.submission_id,
            {"verdict": "Certified"})
        assert reviewed["status"] == "Certified"
    finally:
        world.close()

    # -- snapshots replay byte-identically --------------------------------
    snap_dir = tmp_path / "snapshots"
    store = Store(snap_dir, clock=Clock(), snapshot_every=3)
    for i in range(8):
        store.append("user_created", {
            "user_id": f"usr-{i + 1:06d}", "login": f"user{i}",
            "password": hash_password("pw"), "role": "Student",
            "display_name": f"User {i}",
        }, "system")
    store.close()
    log = EventLog(snap_dir)
    events = log.open()
    log.close()
    snapshots = sorted(snap_dir.glob("snapshot-*.json"))
    assert len(snapshots) == 2  # seq 3 and seq 6
    for path in snapshots:
        seq = int(path.stem.split("-")[1])
        state = replay(events[:seq])
        assert canonical_json(state).encode("utf-8") == path.read_bytes(), path

    # -- 10^4 random calls, submission status only moves forward ----------
    world = Lab(tmp_path / "fuzz")
    try:
        commands = world.commands
        commands.add_student(world.actor("admin"), world.group_id,
                             {"user": world.users["student3"]["user_id"]})
        students = ("student1", "student2", "student3")
        runs, pool = {}, []
        for who in students:
            runs[who] = commands.request_run(world.actor(who),
                                             world.config_doc)["run_id"]
            sub = commands.save_submission(world.actor(who), {
                "assignment": world.assignment_id, "config": world.config_doc,
                "run": runs[who], "quiz_answers": [1]})
            pool.append(sub["submission_id"])

        order = {status: i for i, status in enumerate(SUBMISSION_ORDER)}
        actors = sorted(world.users)
        verdicts = SUBMISSION_ORDER + ("Rejected",)
        rng = random.Random(1729)
        transitions = 0
        for _ in range(10_000):
            before = {sid: world.store.state["submissions"][sid]["status"]
                      for sid in pool}
            roll = rng.random()
            sid = rng.choice(pool)
            who = rng.choice(actors)
            try:
                if roll < 0.25:
                    owner = rng.choice(students)
                    commands.save_submission(world.actor(owner), {
                        "assignment": world.assignment_id,
                        "config": world.config_doc, "run": runs[owner],
                        "quiz_answers": [rng.randint(0, 1)]})
                elif roll < 0.50:
                    commands.submit_submission(world.actor(who), sid)
                elif roll < 0.85:
                    commands.review_submission(world.actor(who), sid, {
                        "verdict": rng.choice(verdicts)})
                else:
                    commands.grade_submission(sid)
            except ApiError:
                pass  # a rejected call must leave every status in place
            for sid_ in pool:
                now = world.store.state["submissions"][sid_]["status"]
                assert now in order
                assert order[now] >= order[before[sid_]], (sid_, before, now)
                if now != before[sid_]:
                    transitions += 1
        assert transitions >= 6  # the walk exercised real moves, not only rejections
    finally:
        world.close()

    # -- SIGKILL mid-run: acknowledged state survives, the run re-queues --
    kill_dir = tmp_path / "killdata"
    seeded = subprocess.run(
        [sys.executable, "-m", "acclab.cli", "seed", "--data", str(kill_dir)],
        capture_output=True, text=True, timeout=120)
    assert seeded.returncode == 0, seeded.stderr
    creds = parse_credentials(seeded.stdout)

    addr = f"127.0.0.1:{free_port()}"
    proc = serve_subprocess(addr, kill_dir)
    try:
        wait_for_health(addr)
        base = f"http://{addr}/api/v1"
        token = httpx.post(f"{base}/session", json={
            "login": "admin", "password": creds["admin"]},
            timeout=5.0).json()["token"]
        admin = {"Authorization": "Bearer " + token}
        created = httpx.post(f"{base}/users", json={
            "login": "phoenix", "password": "phoenixpw", "role": "Student"},
            headers=admin, timeout=5.0)
        assert created.status_code == 201

        token = httpx.post(f"{base}/session", json={
            "login": "student1", "password": creds["student1"]},
            timeout=5.0).json()["token"]
        student = {"Authorization": "Bearer " + token}
        # a config that integrates for several seconds: big pump on a small
        # manifold over an hour of simulated time
        slow = config_to_doc(default_config(by_id("vacuum-station")))
        slow["selections"]["pump_hv"] = "diffusion"
        slow["params"]["pump_hv"] = {"speed": 2000.0, "ultimate_pressure": 1e-6}
        slow["params"]["main_valve"]["conductance"] = 500.0
        slow["sim"]["duration"] = 3600.0
        run_id = httpx.post(f"{base}/runs", json=slow, headers=student,
                            timeout=5.0).json()["run_id"]
        status = None
        deadline = time.monotonic() + 10.0
        while time.monotonic() < deadline:
            status = httpx.get(f"{base}/runs/{run_id}", headers=student,
                               timeout=5.0).json()["status"]
            if status == "Running":
                break
            time.sleep(0.05)
        assert status == "Running"
        time.sleep(1.0)  # well inside the integration window
    finally:
        proc.kill()
        proc.wait(timeout=10)

    addr = f"127.0.0.1:{free_port()}"
    proc = serve_subprocess(addr, kill_dir)
    try:
        wait_for_health(addr)
        base = f"http://{addr}/api/v1"
        # the acknowledged account survived the kill
        phoenix = httpx.post(f"{base}/session", json={
            "login": "phoenix", "password": "phoenixpw"}, timeout=5.0)
        assert phoenix.status_code == 200
        token = httpx.post(f"{base}/session", json={
            "login": "student1", "password": creds["student1"]},
            timeout=5.0).json()["token"]
        student = {"Authorization": "Bearer " + token}
        status = None
        deadline = time.monotonic() + 120.0
        while time.monotonic() < deadline:
            status = httpx.get(f"{base}/runs/{run_id}", headers=student,
                               timeout=5.0).json()["status"]
            if status in ("Done", "Failed"):
                break
            time.sleep(0.25)
        assert status == "Done"  # the interrupted run was re-queued and re-run
        csv = httpx.get(f"{base}/runs/{run_id}/result.csv", headers=student,
                        timeout=10.0)
        assert csv.status_code == 200
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_full_teaching_loop_closes_in_under_thirty_seconds(tmp_path):
    """Seed, assign, run, submit, auto-grade, certify, and report in < 30 s."""
    started = time.monotonic()
    app, creds = make_service(tmp_path, "integration")
    with TestClient(app) as client:
        teacher = login(client, "teacher", creds["teacher"])
        student = login(client, "student1", creds["student1"])
        group_id = client.get("/api/v1/groups",
                              headers=teacher).json()["groups"][0]["group_id"]

        assignment = client.post("/api/v1/assignments", json={
            "group": group_id, "template": "rlc-bench",
            "instructions": "charge the capacitor and verify the plateau",
            "due": time.time() + 3600.0,
            "criteria": {"checks": [{"channel": "v_cap",
                                     "property": "final_value_below",
                                     "threshold": 11.0}]},
            "quiz": [{"text": "What limits the charging current at t=0?",
                      "choices": ["the resistor", "the capacitor"],
                      "correct_index": 0}],
        }, headers=teacher)
        assert assignment.status_code == 201, assignment.text
        assignment_id = assignment.json()["assignment_id"]

        config = config_to_doc(default_config(by_id("rlc-bench")))
        created = client.post("/api/v1/runs", json=config, headers=student)
        assert created.status_code == 201
        run = wait_done(client, student, created.json()["run_id"])
        assert run["status"] == "Done"

        saved = client.post("/api/v1/submissions", json={
            "assignment": assignment_id, "config": config,
            "run": run["run_id"], "quiz_answers": [0]}, headers=student)
        assert saved.status_code == 201, saved.text
        submission_id = saved.json()["submission_id"]
        assert client.post(f"/api/v1/submissions/{submission_id}/submit",
                           headers=student).status_code == 200

        submission = None
        deadline = time.monotonic() + 20.0
        while time.monotonic() < deadline:
            submission = client.get(f"/api/v1/submissions/{submission_id}",
                                    headers=student).json()
            if submission["status"] == "AutoChecked":
                break
            time.sleep(0.05)
        assert submission["status"] == "AutoChecked"
        assert submission["auto_score"] == 100.0

        reviewed = client.post(f"/api/v1/submissions/{submission_id}/review",
                               json={"verdict": "Certified"}, headers=teacher)
        assert reviewed.status_code == 200
        assert reviewed.json()["status"] == "Certified"

        report = client.get("/api/v1/reports/progress",
                            params={"group": group_id},
                            headers=teacher).json()
        row = next(r for r in report["rows"]
                   if r["assignment_id"] == assignment_id
                   and r["login"] == "student1")
        assert row["certified"] is True
    assert time.monotonic() - started < 30.0


def test_cli_run_determinism_exit_codes_and_fresh_deploy(tmp_path):
    """Repeat runs emit identical CSV bytes, exit codes follow the 0/1/2
    contract, and seed-then-check is green on a fresh data directory."""
    cfg = write_config(tmp_path / "station.yaml", "vacuum-station")

    def labctl(*args):
        return subprocess.run([sys.executable, "-m", "acclab.cli", *args],
                              capture_output=True, timeout=120)

    first = labctl("run", "vacuum-station", str(cfg))
    second = labctl("run", "vacuum-station", str(cfg))
    assert first.returncode == 0 and second.returncode == 0
    assert first.stdout == second.stdout
    assert first.stdout.decode().splitlines()[0] == "t,vessel[Pa],manifold[Pa]"

    bad = write_config(
        tmp_path / "bad.yaml", "vacuum-station",
        mutate=lambda doc: doc["params"]["vessel"].update(volume=9999.0))
    assert labctl("run", "vacuum-station", str(bad)).returncode == 2
    assert labctl("run", "vacuum-station",
                  str(tmp_path / "missing.yaml")).returncode == 1
    assert labctl("run", "no-such-template", str(cfg)).returncode == 1

    data = tmp_path / "deploy"
    seeded = labctl("seed", "--data", str(data))
    assert seeded.returncode == 0, seeded.stderr.decode()
    creds = parse_credentials(seeded.stdout.decode())

    addr = f"127.0.0.1:{free_port()}"
    proc = serve_subprocess(addr, data)
    try:
        wait_for_health(addr)
        check = labctl("check", "--addr", addr, "--login", "student1",
                       "--password", creds["student1"])
        assert check.returncode == 0, check.stderr.decode()
        assert check.stdout.decode().startswith("ok: ")
    finally:
        proc.terminate()
        proc.wait(timeout=10)
