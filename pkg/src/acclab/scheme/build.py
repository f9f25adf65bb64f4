"""Turn a validated scheme config into a concrete lab model and run it.

Each lab kind owns a builder that reads the template's fixed structure plus
the config's slot choices.  Builders are pure: the same (template, config)
pair always produces a structurally identical model.
"""

from __future__ import annotations

from .. import beam, circuit, vacuum
from ..ode import SolverSettings
from ..timeseries import ChannelError, TimeSeries
from .model import SchemeConfig, SchemeTemplate, TemplateError, validate_config


class ConfigError(ValueError):
    """Raised when a config fails validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.detail for v in self.violations) or "invalid config")


def _checked(template: SchemeTemplate, config: SchemeConfig) -> None:
    violations = validate_config(template, config)
    if violations:
        raise ConfigError(violations)


def _build_vacuum(template: SchemeTemplate, config: SchemeConfig) -> vacuum.VacuumNetwork:
    fx = template.fixed_structure
    chambers = [vacuum.Chamber(**doc) for doc in fx.get("extra_chambers", [])]
    for sid in fx.get("chamber_slots", []):
        p = config.param_values[sid]
        chambers.append(vacuum.Chamber(
            id=sid, volume=p["volume"], initial_pressure=p["initial_pressure"],
            outgassing_rate=p.get("outgassing_rate", 0.0)))
    pumps = []
    for sid, attached in fx.get("pump_slots", {}).items():
        p = config.param_values[sid]
        pumps.append(vacuum.Pump(id=sid, attached_chamber=attached,
                                 speed=p["speed"],
                                 ultimate_pressure=p["ultimate_pressure"]))
    links = []
    for sid, ends in fx.get("link_slots", {}).items():
        p = config.param_values[sid]
        links.append(vacuum.ConductanceLink(id=sid, endpoints=(ends[0], ends[1]),
                                            conductance=p["conductance"]))
    return vacuum.VacuumNetwork(chambers=chambers, pumps=pumps, links=links)


def _beam_element(kind: str, values: dict) -> beam.BeamlineElement:
    if kind == "drift":
        return beam.BeamlineElement(kind="drift", length=values["length"])
    if kind == "quadrupole":
        return beam.BeamlineElement(kind="quadrupole", length=values["length"],
                                    strength=values["strength"])
    if kind == "sector_bend":
        return beam.BeamlineElement(kind="sector_bend", length=values["length"],
                                    strength=values["angle"])
    raise TemplateError(f"no beamline mapping for kind {kind!r}")


def _build_beam(template: SchemeTemplate, config: SchemeConfig) -> beam.Beamline:
    elements = []
    for entry in template.fixed_structure["sequence"]:
        if "slot" in entry:
            sid = entry["slot"]
            kind = config.selections[sid]
            elements.append(_beam_element(kind, config.param_values[sid]))
        else:
            elements.append(_beam_element(entry["element"], entry))
    return beam.Beamline(elements=elements)


def _circuit_element(eid: str, kind: str, terminals, values: dict,
                     closed_at: float = 0.0) -> circuit.CircuitElement:
    a, b = terminals
    if kind == "resistor":
        return circuit.resistor(eid, a, b, values["resistance"])
    if kind == "capacitor":
        return circuit.capacitor(eid, a, b, values["capacitance"],
                                 v0=values.get("initial_voltage", 0.0))
    if kind == "inductor":
        return circuit.inductor(eid, a, b, values["inductance"],
                                i0=values.get("initial_current", 0.0))
    if kind == "dc_voltage_source":
        return circuit.dc_source(eid, a, b, values["voltage"])
    if kind == "switch":
        return circuit.switch(eid, a, b, closed_at)
    raise TemplateError(f"no circuit mapping for kind {kind!r}")


def _build_electronics(template: SchemeTemplate, config: SchemeConfig) -> circuit.Circuit:
    fx = template.fixed_structure
    elements = []
    for entry in fx["elements"]:
        terminals = tuple(entry["terminals"])
        if "slot" in entry:
            sid = entry["slot"]
            elements.append(_circuit_element(sid, config.selections[sid],
                                             terminals, config.param_values[sid],
                                             closed_at=entry.get("closed_at", 0.0)))
        else:
            elements.append(_circuit_element(entry["id"], entry["element"],
                                             terminals, entry,
                                             closed_at=entry.get("closed_at", 0.0)))
    return circuit.Circuit(ground=fx["ground"], elements=elements)


def _build_pulse(template: SchemeTemplate, config: SchemeConfig) -> circuit.Circuit:
    pfn = config.param_values["pfn"]
    load = config.param_values["load"]
    return circuit.pfn_template(
        n_sections=int(round(pfn["n_sections"])),
        l_per=pfn["inductance_per_section"],
        c_per=pfn["capacitance_per_section"],
        load=load["resistance"],
        charge_voltage=pfn["charge_voltage"],
    )


_BUILDERS = {
    "vacuum": _build_vacuum,
    "beam_transport": _build_beam,
    "electronics": _build_electronics,
    "pulse_power": _build_pulse,
}


def instantiate(template: SchemeTemplate, config: SchemeConfig):
    """Lab model for a valid config; raises ConfigError otherwise."""
    _checked(template, config)
    return _BUILDERS[template.lab_kind](template, config)


def run_config(
    template: SchemeTemplate,
    config: SchemeConfig,
    settings: SolverSettings | None = None,
) -> TimeSeries:
    """Simulate a valid config; channels match the template declaration."""
    model = instantiate(template, config)
    fx = template.fixed_structure
    if template.lab_kind == "vacuum":
        series = vacuum.pumpdown(model, duration=config.sim["duration"],
                                 n_samples=int(fx.get("samples", 200)),
                                 settings=settings or SolverSettings())
    elif template.lab_kind == "beam_transport":
        tw0 = beam.TwissParams(alpha=config.sim["alpha0"], beta=config.sim["beta0"],
                               emittance=config.sim["emittance"])
        series = beam.envelope(model, tw0, step=float(fx.get("step", 0.05)))
    else:
        series = circuit.transient(model, duration=config.sim["duration"],
                                   n_samples=int(fx.get("samples", 500)))

    declared = [c.channel for c in template.output_channels]
    try:
        out = series.select(declared)
    except ChannelError as exc:
        raise TemplateError(
            f"template {template.template_id} declares channel {exc} "
            "that the simulation did not produce") from exc
    for spec in template.output_channels:
        if out.units[spec.channel] != spec.unit:
            raise TemplateError(
                f"template {template.template_id}: channel {spec.channel} "
                f"unit {out.units[spec.channel]!r} != declared {spec.unit!r}")
    return out
