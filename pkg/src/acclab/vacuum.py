"""Lumped-parameter vacuum networks and pump-down transients.

Chambers exchange gas through valved conductances and lose it to pumps;
per chamber i the balance reads

    V_i dp_i/dt = Q_i + sum_links C_ij (p_j - p_i) - sum_pumps S (p_i - p_ult)

with closed valves contributing nothing.  Integration runs in ln(p)
coordinates so pressures stay strictly positive across the many decades a
pump-down traverses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ode import ODESystem, SolverSettings, integrate_ivp
from .timeseries import TimeSeries


class NetworkError(ValueError):
    """The network description violates its invariants."""


class EquilibriumError(RuntimeError):
    """No steady state exists (unpumped gas load) or the balance is singular."""


@dataclass(frozen=True)
class Chamber:
    id: str
    volume: float  # liters
    initial_pressure: float  # Pa
    outgassing_rate: float = 0.0  # Pa*l/s

    def __post_init__(self):
        if self.volume <= 0:
            raise NetworkError(f"chamber {self.id}: volume must be > 0")
        if self.initial_pressure <= 0:
            raise NetworkError(f"chamber {self.id}: initial pressure must be > 0")
        if self.outgassing_rate < 0:
            raise NetworkError(f"chamber {self.id}: outgassing must be >= 0")


@dataclass(frozen=True)
class Pump:
    id: str
    attached_chamber: str
    speed: float  # l/s
    ultimate_pressure: float  # Pa

    def __post_init__(self):
        if self.speed < 0:
            raise NetworkError(f"pump {self.id}: speed must be >= 0")
        if self.ultimate_pressure <= 0:
            raise NetworkError(f"pump {self.id}: ultimate pressure must be > 0")


@dataclass(frozen=True)
class ConductanceLink:
    id: str
    endpoints: tuple[str, str]
    conductance: float  # l/s
    valve_open: bool = True

    def __post_init__(self):
        a, b = self.endpoints
        if a == b:
            raise NetworkError(f"link {self.id}: endpoints must be distinct")
        if not self.conductance > 0:
            raise NetworkError(f"link {self.id}: conductance must be > 0")
        if not math.isfinite(self.conductance):
            # infinite conductance means the chambers are one volume;
            # model them as a single chamber instead
            raise NetworkError(f"link {self.id}: conductance must be finite")


@dataclass(frozen=True)
class VacuumNetwork:
    chambers: list[Chamber]
    pumps: list[Pump] = field(default_factory=list)
    links: list[ConductanceLink] = field(default_factory=list)

    def __post_init__(self):
        if not self.chambers:
            raise NetworkError("network needs at least one chamber")
        ids = [c.id for c in self.chambers]
        if len(set(ids)) != len(ids):
            raise NetworkError("chamber ids must be unique")
        known = set(ids)
        for p in self.pumps:
            if p.attached_chamber not in known:
                raise NetworkError(f"pump {p.id}: unknown chamber {p.attached_chamber!r}")
        for l in self.links:
            for end in l.endpoints:
                if end not in known:
                    raise NetworkError(f"link {l.id}: unknown chamber {end!r}")

    def chamber_ids(self) -> list[str]:
        return [c.id for c in self.chambers]


def effective_speed(pump_speed: float, conductance: float) -> float:
    """Series combination of a pump and a duct: 1/S_eff = 1/S + 1/C.

    ``conductance`` may be ``math.inf``, in which case the pump speed is
    returned exactly.
    """
    if pump_speed <= 0:
        raise ValueError("pump_speed must be > 0")
    if conductance <= 0:
        raise ValueError("conductance must be > 0")
    if math.isinf(conductance):
        return pump_speed
    return 1.0 / (1.0 / pump_speed + 1.0 / conductance)


def _balance_terms(network: VacuumNetwork):
    """Index chambers and collect per-chamber pump/link coefficients."""
    index = {c.id: i for i, c in enumerate(network.chambers)}
    volumes = np.array([c.volume for c in network.chambers])
    outgassing = np.array([c.outgassing_rate for c in network.chambers])
    pumps = [(index[p.attached_chamber], p.speed, p.ultimate_pressure)
             for p in network.pumps if p.speed > 0]
    links = [(index[l.endpoints[0]], index[l.endpoints[1]], l.conductance)
             for l in network.links if l.valve_open]
    return index, volumes, outgassing, pumps, links


def build_ode(network: VacuumNetwork) -> ODESystem:
    """Balance equations in ln(p) state space, one state per chamber."""
    _, volumes, outgassing, pumps, links = _balance_terms(network)
    n = len(network.chambers)

    def rhs(t, u):
        p = np.exp(u)
        flow = outgassing.copy()
        for i, j, c in links:
            q = c * (p[j] - p[i])
            flow[i] += q
            flow[j] -= q
        for i, s, p_ult in pumps:
            flow[i] -= s * (p[i] - p_ult)
        return flow / (volumes * p)

    return ODESystem(dimension=n, rhs=rhs, state_labels=network.chamber_ids())


def pumpdown(
    network: VacuumNetwork,
    duration: float,
    n_samples: int = 200,
    settings: SolverSettings = SolverSettings(),
) -> TimeSeries:
    """Simulate the pump-down transient; one pressure channel per chamber."""
    if duration <= 0:
        raise ValueError("duration must be > 0")
    system = build_ode(network)
    u0 = np.log([c.initial_pressure for c in network.chambers])
    raw = integrate_ivp(system, u0, 0.0, duration, n_samples, settings)
    channels = {lab: np.exp(raw.channels[lab]) for lab in system.state_labels}
    units = {lab: "Pa" for lab in channels}
    return TimeSeries(times=raw.times, channels=channels, units=units)


def _components(n: int, links) -> list[list[int]]:
    """Connected components of the open-valve link graph."""
    adjacency = {i: set() for i in range(n)}
    for i, j, _ in links:
        adjacency[i].add(j)
        adjacency[j].add(i)
    seen: set[int] = set()
    comps = []
    for start in range(n):
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def steady_state(network: VacuumNetwork) -> dict[str, float]:
    """Equilibrium pressures: the dp/dt = 0 solution of the balance system.

    Pumped components solve the linear balance; an unpumped component with
    zero gas load settles at the gas-conserving uniform pressure set by its
    initial fill.  An unpumped component with outgassing has no equilibrium.
    """
    index, volumes, outgassing, pumps, links = _balance_terms(network)
    n = len(network.chambers)
    pumped = {i for i, _, _ in pumps}
    result = np.empty(n)

    for comp in _components(n, links):
        if not any(i in pumped for i in comp):
            if any(outgassing[i] > 0 for i in comp):
                names = [network.chambers[i].id for i in comp]
                raise EquilibriumError(
                    f"no equilibrium: outgassing without pumping in chambers {names}"
                )
            total_gas = sum(volumes[i] * network.chambers[i].initial_pressure for i in comp)
            p_uniform = total_gas / sum(volumes[i] for i in comp)
            for i in comp:
                result[i] = p_uniform
            continue

        local = {g: k for k, g in enumerate(comp)}
        m = len(comp)
        a = np.zeros((m, m))
        b = np.zeros(m)
        for i in comp:
            b[local[i]] -= outgassing[i]
        for i, j, c in links:
            if i in local:
                a[local[i], local[j]] += c
                a[local[i], local[i]] -= c
                a[local[j], local[i]] += c
                a[local[j], local[j]] -= c
        for i, s, p_ult in pumps:
            if i in local:
                a[local[i], local[i]] -= s
                b[local[i]] -= s * p_ult
        try:
            p = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise EquilibriumError(f"singular balance system: {exc}") from exc
        for i in comp:
            result[i] = p[local[i]]

    return {c.id: float(result[index[c.id]]) for c in network.chambers}
