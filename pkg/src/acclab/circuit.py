"""Linear-circuit transients via modified nodal analysis.

Unknowns are the non-ground node voltages followed by the branch currents
of voltage-defined elements (DC sources, closed switches, and whatever an
analysis stamps as a voltage branch).  Transients march with trapezoidal
companion models at a fixed internal step, re-assembling the system at
every switch event; switches are ideal (open = absent branch, closed =
zero-volt source).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .timeseries import TimeSeries

ELEMENT_KINDS = ("resistor", "capacitor", "inductor", "dc_voltage_source", "switch")

# branch currents of these appear as public output channels
CURRENT_CHANNEL_KINDS = ("dc_voltage_source", "inductor", "switch")

_COND_LIMIT = 1e13


class CircuitError(ValueError):
    """Invalid circuit description."""


class FloatingSubcircuitError(CircuitError):
    """Part of the circuit is unreachable from ground."""

    def __init__(self, nodes: list[str], context: str = ""):
        self.nodes = list(nodes)
        suffix = f" ({context})" if context else ""
        super().__init__(f"floating subcircuit at nodes {self.nodes}{suffix}")


class SingularSystemError(RuntimeError):
    """The stamped system cannot be solved (e.g. source loop)."""


@dataclass(frozen=True)
class CircuitElement:
    id: str
    kind: str
    terminals: tuple[str, str]
    value: float = 0.0  # ohms / farads / henries / volts
    initial: float = 0.0  # capacitor volts or inductor amps at t=0
    closed_at: float = 0.0  # switches only

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise CircuitError(f"unknown element kind {self.kind!r}")
        a, b = self.terminals
        if a == b:
            raise CircuitError(f"element {self.id}: terminals must be distinct")
        if self.kind in ("resistor", "capacitor", "inductor") and self.value <= 0:
            raise CircuitError(f"element {self.id}: value must be > 0")
        if self.kind == "switch" and self.closed_at < 0:
            raise CircuitError(f"switch {self.id}: closed_at must be >= 0")


def resistor(id: str, a: str, b: str, ohms: float) -> CircuitElement:
    return CircuitElement(id, "resistor", (a, b), ohms)


def capacitor(id: str, a: str, b: str, farads: float, v0: float = 0.0) -> CircuitElement:
    return CircuitElement(id, "capacitor", (a, b), farads, initial=v0)


def inductor(id: str, a: str, b: str, henries: float, i0: float = 0.0) -> CircuitElement:
    return CircuitElement(id, "inductor", (a, b), henries, initial=i0)


def dc_source(id: str, a: str, b: str, volts: float) -> CircuitElement:
    return CircuitElement(id, "dc_voltage_source", (a, b), volts)


def switch(id: str, a: str, b: str, closed_at: float) -> CircuitElement:
    return CircuitElement(id, "switch", (a, b), closed_at=closed_at)


@dataclass(frozen=True)
class Circuit:
    ground: str
    elements: list[CircuitElement]

    def __post_init__(self):
        ids = [e.id for e in self.elements]
        if len(set(ids)) != len(ids):
            raise CircuitError("element ids must be unique")
        if self.ground not in self.nodes:
            raise CircuitError(f"ground node {self.ground!r} touches no element")
        unreachable = _unreachable_nodes(self.nodes, self.ground, self.elements)
        if unreachable:
            raise FloatingSubcircuitError(unreachable, "with all switches closed")

    @property
    def nodes(self) -> list[str]:
        seen = []
        for e in self.elements:
            for t in e.terminals:
                if t not in seen:
                    seen.append(t)
        return seen

    def switches(self) -> list[CircuitElement]:
        return [e for e in self.elements if e.kind == "switch"]


def _unreachable_nodes(nodes, ground, elements) -> list[str]:
    adjacency: dict[str, set[str]] = {n: set() for n in nodes}
    for e in elements:
        a, b = e.terminals
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen = {ground}
    stack = [ground]
    while stack:
        v = stack.pop()
        for w in adjacency[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return [n for n in nodes if n not in seen]


class _Stamper:
    """Dense MNA matrix builder over nodes + voltage-branch unknowns."""

    def __init__(self, nodes: list[str], ground: str, branches: list[str]):
        order = [n for n in nodes if n != ground]
        self.node_index = {n: i for i, n in enumerate(order)}
        self.branch_index = {b: len(order) + j for j, b in enumerate(branches)}
        self.size = len(order) + len(branches)
        self.matrix = np.zeros((self.size, self.size))
        self.rhs = np.zeros(self.size)

    def _n(self, node: str) -> int:
        return self.node_index.get(node, -1)  # -1 = ground (eliminated)

    def conductance(self, a: str, b: str, g: float):
        ia, ib = self._n(a), self._n(b)
        if ia >= 0:
            self.matrix[ia, ia] += g
            if ib >= 0:
                self.matrix[ia, ib] -= g
        if ib >= 0:
            self.matrix[ib, ib] += g
            if ia >= 0:
                self.matrix[ib, ia] -= g

    def history_current(self, a: str, b: str, i_hist: float):
        """Companion source term: element current i = G*v_ab + i_hist."""
        ia, ib = self._n(a), self._n(b)
        if ia >= 0:
            self.rhs[ia] -= i_hist
        if ib >= 0:
            self.rhs[ib] += i_hist

    def known_current(self, a: str, b: str, i: float):
        """A fixed current i flowing a -> b through the element."""
        self.history_current(a, b, i)

    def voltage_branch(self, branch_id: str, a: str, b: str, volts: float):
        """Constrain v_a - v_b = volts; branch current becomes an unknown."""
        k = self.branch_index[branch_id]
        ia, ib = self._n(a), self._n(b)
        if ia >= 0:
            self.matrix[ia, k] += 1.0
            self.matrix[k, ia] += 1.0
        if ib >= 0:
            self.matrix[ib, k] -= 1.0
            self.matrix[k, ib] -= 1.0
        self.rhs[k] = volts


@dataclass
class MNASystem:
    """A stamped DC system: matrix, rhs, unknown layout, reactive-state map."""

    circuit: Circuit
    node_index: dict[str, int]
    branch_index: dict[str, int]
    matrix: np.ndarray
    rhs: np.ndarray
    reactive_state: dict[str, dict]

    def solve(self) -> "OperatingPoint":
        if np.linalg.cond(self.matrix) > _COND_LIMIT:
            raise SingularSystemError("singular DC system (source loop or degenerate mesh)")
        x = np.linalg.solve(self.matrix, self.rhs)
        voltages = {self.circuit.ground: 0.0}
        voltages.update({n: float(x[i]) for n, i in self.node_index.items()})
        currents = {b: float(x[i]) for b, i in self.branch_index.items()}
        return OperatingPoint(node_voltages=voltages, branch_currents=currents)


@dataclass(frozen=True)
class OperatingPoint:
    node_voltages: dict[str, float]
    branch_currents: dict[str, float]


def assemble_mna(circuit: Circuit, switch_states: dict[str, bool] | None = None) -> MNASystem:
    """Stamp the DC operating-point system for the given switch states.

    DC semantics: capacitors are open, inductors are shorts carrying a
    branch current, open switches are absent.  Defaults to all switches
    closed.
    """
    states = dict.fromkeys((s.id for s in circuit.switches()), True)
    if switch_states:
        for sid, closed in switch_states.items():
            if sid not in states:
                raise CircuitError(f"unknown switch {sid!r}")
            states[sid] = closed

    present = []
    for e in circuit.elements:
        if e.kind == "switch" and not states[e.id]:
            continue
        if e.kind == "capacitor":
            continue  # open at DC
        present.append(e)

    dc_nodes = sorted({t for e in present for t in e.terminals} | {circuit.ground})
    unreachable = _unreachable_nodes(dc_nodes, circuit.ground, present)
    # nodes touched only by capacitors are also floating at DC
    dangling = [n for n in circuit.nodes if n not in dc_nodes]
    if unreachable or dangling:
        raise FloatingSubcircuitError(sorted(unreachable + dangling), "at DC")

    branches = [e.id for e in present
                if e.kind in ("dc_voltage_source", "switch", "inductor")]
    st = _Stamper(dc_nodes, circuit.ground, branches)
    for e in present:
        a, b = e.terminals
        if e.kind == "resistor":
            st.conductance(a, b, 1.0 / e.value)
        elif e.kind == "dc_voltage_source":
            st.voltage_branch(e.id, a, b, e.value)
        else:  # closed switch or inductor: zero-volt branch
            st.voltage_branch(e.id, a, b, 0.0)

    reactive = {e.id: {"kind": e.kind, "initial": e.initial}
                for e in circuit.elements if e.kind in ("capacitor", "inductor")}
    return MNASystem(
        circuit=circuit,
        node_index=st.node_index,
        branch_index=st.branch_index,
        matrix=st.matrix,
        rhs=st.rhs,
        reactive_state=reactive,
    )


@dataclass(frozen=True)
class TransientSolution:
    """Full transient record: every node voltage and every element current."""

    circuit: Circuit
    times: np.ndarray
    node_voltages: dict[str, np.ndarray]
    element_currents: dict[str, np.ndarray]

    def series(self) -> TimeSeries:
        """Public channel set: node voltages plus source-like currents."""
        channels: dict[str, np.ndarray] = {}
        units: dict[str, str] = {}
        for node, values in self.node_voltages.items():
            channels[f"v_{node}"] = values
            units[f"v_{node}"] = "V"
        for e in self.circuit.elements:
            if e.kind in CURRENT_CHANNEL_KINDS:
                channels[f"i_{e.id}"] = self.element_currents[e.id]
                units[f"i_{e.id}"] = "A"
        return TimeSeries(times=self.times, channels=channels, units=units)


def _epoch_bounds(circuit: Circuit, duration: float) -> list[tuple[float, float]]:
    cuts = sorted({s.closed_at for s in circuit.switches() if 0.0 < s.closed_at < duration})
    edges = [0.0] + cuts + [duration]
    return list(zip(edges[:-1], edges[1:]))


class _EpochRecorder:
    def __init__(self, circuit: Circuit):
        self.t: list[float] = []
        self.v: dict[str, list[float]] = {n: [] for n in circuit.nodes}
        self.i: dict[str, list[float]] = {e.id: [] for e in circuit.elements}

    def add(self, t: float, voltages: dict[str, float], currents: dict[str, float]):
        self.t.append(t)
        for n, vals in self.v.items():
            vals.append(voltages[n])
        for eid, vals in self.i.items():
            vals.append(currents.get(eid, 0.0))


def _initial_snapshot(circuit, present, states, t):
    """Consistent state at an epoch start: capacitors pinned to their
    voltages, inductors injecting their currents."""
    branches = [e.id for e in present
                if e.kind in ("dc_voltage_source", "switch", "capacitor")]
    st = _Stamper(circuit.nodes, circuit.ground, branches)
    for e in present:
        a, b = e.terminals
        if e.kind == "resistor":
            st.conductance(a, b, 1.0 / e.value)
        elif e.kind == "dc_voltage_source":
            st.voltage_branch(e.id, a, b, e.value)
        elif e.kind == "switch":
            st.voltage_branch(e.id, a, b, 0.0)
        elif e.kind == "capacitor":
            st.voltage_branch(e.id, a, b, states[e.id]["v"])
        elif e.kind == "inductor":
            st.known_current(a, b, states[e.id]["i"])
    try:
        if np.linalg.cond(st.matrix) > _COND_LIMIT:
            raise np.linalg.LinAlgError("ill-conditioned")
        x = np.linalg.solve(st.matrix, st.rhs)
    except np.linalg.LinAlgError:
        # redundant but consistent constraints (e.g. parallel equal-voltage
        # capacitors) still admit a solution; otherwise give up
        x, _, _, _ = np.linalg.lstsq(st.matrix, st.rhs, rcond=None)
        if not np.allclose(st.matrix @ x, st.rhs, rtol=1e-9, atol=1e-12):
            raise SingularSystemError(
                f"inconsistent initial conditions at t={t}"
            ) from None

    voltages = {circuit.ground: 0.0}
    voltages.update({n: float(x[i]) for n, i in st.node_index.items()})
    currents: dict[str, float] = {}
    for e in present:
        a, b = e.terminals
        v_ab = voltages[a] - voltages[b]
        if e.kind == "resistor":
            currents[e.id] = v_ab / e.value
        elif e.kind == "inductor":
            currents[e.id] = states[e.id]["i"]
            states[e.id]["v"] = v_ab
        elif e.kind == "capacitor":
            currents[e.id] = float(x[st.branch_index[e.id]])
            states[e.id]["i"] = currents[e.id]
        else:
            currents[e.id] = float(x[st.branch_index[e.id]])
    return voltages, currents


def simulate_transient(circuit: Circuit, duration: float, n_samples: int) -> TransientSolution:
    """Run the switched transient and record every internal quantity,
    resampled to a uniform n_samples grid (right-continuous at switch
    events)."""
    if duration <= 0:
        raise ValueError("duration must be > 0")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")

    h_target = duration / (50.0 * n_samples)
    states = {e.id: {"v": e.initial if e.kind == "capacitor" else 0.0,
                     "i": e.initial if e.kind == "inductor" else 0.0}
              for e in circuit.elements if e.kind in ("capacitor", "inductor")}

    recorders: list[_EpochRecorder] = []
    spans = _epoch_bounds(circuit, duration)
    for t_a, t_b in spans:
        present = [e for e in circuit.elements
                   if e.kind != "switch" or e.closed_at <= t_a]
        live_nodes = sorted({t for e in present for t in e.terminals} | {circuit.ground})
        unreachable = _unreachable_nodes(live_nodes, circuit.ground, present)
        isolated = [n for n in circuit.nodes if n not in live_nodes]
        if unreachable or isolated:
            raise FloatingSubcircuitError(
                sorted(unreachable + isolated), f"in epoch starting t={t_a}")

        rec = _EpochRecorder(circuit)
        voltages, currents = _initial_snapshot(circuit, present, states, t_a)
        rec.add(t_a, voltages, currents)

        n_steps = max(1, math.ceil((t_b - t_a) / h_target))
        h = (t_b - t_a) / n_steps

        branches = [e.id for e in present if e.kind in ("dc_voltage_source", "switch")]
        st = _Stamper(circuit.nodes, circuit.ground, branches)
        companions = []  # (element, G)
        for e in present:
            a, b = e.terminals
            if e.kind == "resistor":
                st.conductance(a, b, 1.0 / e.value)
            elif e.kind == "capacitor":
                g = 2.0 * e.value / h
                st.conductance(a, b, g)
                companions.append((e, g))
            elif e.kind == "inductor":
                g = h / (2.0 * e.value)
                st.conductance(a, b, g)
                companions.append((e, g))
            elif e.kind == "dc_voltage_source":
                st.voltage_branch(e.id, a, b, e.value)
            else:
                st.voltage_branch(e.id, a, b, 0.0)
        if np.linalg.cond(st.matrix) > _COND_LIMIT:
            raise SingularSystemError(f"singular system in epoch starting t={t_a}")
        lu = lu_factor(st.matrix)
        rhs_static = st.rhs.copy()

        for step in range(1, n_steps + 1):
            rhs = rhs_static.copy()
            hist = {}
            for e, g in companions:
                s = states[e.id]
                if e.kind == "capacitor":
                    i_hist = -g * s["v"] - s["i"]
                else:
                    i_hist = s["i"] + g * s["v"]
                hist[e.id] = i_hist
                ia = st.node_index.get(e.terminals[0], -1)
                ib = st.node_index.get(e.terminals[1], -1)
                if ia >= 0:
                    rhs[ia] -= i_hist
                if ib >= 0:
                    rhs[ib] += i_hist
            x = lu_solve(lu, rhs)

            voltages = {circuit.ground: 0.0}
            voltages.update({n: float(x[i]) for n, i in st.node_index.items()})
            currents = {}
            for e in present:
                a, b = e.terminals
                v_ab = voltages[a] - voltages[b]
                if e.kind == "resistor":
                    currents[e.id] = v_ab / e.value
                elif e.kind in ("capacitor", "inductor"):
                    g = 2.0 * e.value / h if e.kind == "capacitor" else h / (2.0 * e.value)
                    i_now = g * v_ab + hist[e.id]
                    currents[e.id] = i_now
                    states[e.id]["v"] = v_ab
                    states[e.id]["i"] = i_now
                else:
                    currents[e.id] = float(x[st.branch_index[e.id]])
            rec.add(t_a + step * h, voltages, currents)
        recorders.append(rec)

    # resample onto the uniform output grid, right-continuous at events
    grid = np.linspace(0.0, duration, n_samples)
    node_out = {n: np.empty(n_samples) for n in circuit.nodes}
    curr_out = {e.id: np.empty(n_samples) for e in circuit.elements}
    for k, ((t_a, t_b), rec) in enumerate(zip(spans, recorders)):
        last = k == len(recorders) - 1
        mask = (grid >= t_a) & ((grid <= t_b) if last else (grid < t_b))
        if not np.any(mask):
            continue
        t_internal = np.asarray(rec.t)
        pts = grid[mask]
        for n in circuit.nodes:
            node_out[n][mask] = np.interp(pts, t_internal, rec.v[n])
        for eid in curr_out:
            curr_out[eid][mask] = np.interp(pts, t_internal, rec.i[eid])

    return TransientSolution(
        circuit=circuit,
        times=grid,
        node_voltages={n: node_out[n] for n in circuit.nodes if n != circuit.ground},
        element_currents=curr_out,
    )


def transient(circuit: Circuit, duration: float, n_samples: int = 200) -> TimeSeries:
    """Node-voltage and source/inductor/switch-current channels over time."""
    return simulate_transient(circuit, duration, n_samples).series()


def kcl_residuals(circuit: Circuit, solution: TransientSolution) -> dict[str, np.ndarray]:
    """Recompute Kirchhoff current sums per non-ground node from the
    published channels (resistor currents re-derived from node voltages)."""
    voltages = dict(solution.node_voltages)
    voltages[circuit.ground] = np.zeros_like(solution.times)
    residuals = {n: np.zeros_like(solution.times) for n in circuit.nodes
                 if n != circuit.ground}
    scale = np.zeros_like(solution.times)
    for e in circuit.elements:
        a, b = e.terminals
        if e.kind == "resistor":
            current = (voltages[a] - voltages[b]) / e.value
        else:
            current = solution.element_currents[e.id]
        scale = np.maximum(scale, np.abs(current))
        if a in residuals:
            residuals[a] = residuals[a] + current
        if b in residuals:
            residuals[b] = residuals[b] - current
    floor = max(float(np.max(scale)), 1e-30)
    return {n: np.abs(r) / floor for n, r in residuals.items()}


def pfn_template(
    n_sections: int,
    l_per: float,
    c_per: float,
    load: float,
    charge_voltage: float = 1.0,
) -> Circuit:
    """n-section LC ladder discharging into a load through a switch at t=0.

    Every section capacitor starts at ``charge_voltage``; the far end of the
    ladder is open, the near end feeds the load resistor when the switch
    closes.
    """
    if n_sections < 1:
        raise CircuitError("n_sections must be >= 1")
    for name, v in (("l_per", l_per), ("c_per", c_per), ("load", load)):
        if v <= 0:
            raise CircuitError(f"{name} must be > 0")
    elements = [
        switch("sw", "s0", "out", closed_at=0.0),
        resistor("Rload", "out", "gnd", load),
    ]
    for k in range(1, n_sections + 1):
        elements.append(inductor(f"L{k}", f"s{k-1}", f"s{k}", l_per))
        elements.append(capacitor(f"C{k}", f"s{k}", "gnd", c_per, v0=charge_voltage))
    return Circuit(ground="gnd", elements=elements)
