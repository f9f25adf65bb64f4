"""Scheme templates: fixed-topology virtual-lab schematics in which only
designated slots can be swapped or re-parameterized.

Templates are data, loaded from YAML documents; configs are the matching
user choices.  Everything here is immutable after construction and
validation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import yaml

LAB_KINDS = ("vacuum", "beam_transport", "electronics", "pulse_power")

DISCIPLINE_TAGS = (
    "accelerators_of_charged_particles",
    "microwave_engineering",
    "physical_electronics",
    "electronic_systems_of_accelerators",
    "information_systems_of_accelerators",
)

TEMPLATE_DIR = Path(__file__).parent / "templates"


class TemplateError(ValueError):
    """Malformed template document or template/config identity mismatch."""


class ConfigDocumentError(ValueError):
    """Config document is structurally unusable (wrong types or keys)."""


@dataclass(frozen=True)
class ParamSpec:
    name: str
    unit: str
    min: float
    max: float
    default: float
    scale: str = "linear"

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise TemplateError(f"param {self.name}: scale must be linear or log")
        if not (self.min < self.max):
            raise TemplateError(f"param {self.name}: min must be < max")
        if not (self.min <= self.default <= self.max):
            raise TemplateError(f"param {self.name}: default outside [min, max]")
        if self.scale == "log" and self.min <= 0:
            raise TemplateError(f"param {self.name}: log scale requires min > 0")


@dataclass(frozen=True)
class KindOption:
    kind: str
    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise TemplateError(f"kind {self.kind}: duplicate param names")


@dataclass(frozen=True)
class Slot:
    slot_id: str
    position: tuple[int, int]
    default_kind: str
    kinds: tuple[KindOption, ...]

    def __post_init__(self):
        if not self.kinds:
            raise TemplateError(f"slot {self.slot_id}: needs at least one kind")
        if self.default_kind not in self.allowed_kinds:
            raise TemplateError(f"slot {self.slot_id}: default kind not offered")
        if len(set(self.allowed_kinds)) != len(self.kinds):
            raise TemplateError(f"slot {self.slot_id}: duplicate kinds")

    @property
    def allowed_kinds(self) -> tuple[str, ...]:
        return tuple(k.kind for k in self.kinds)

    def option(self, kind: str) -> KindOption:
        for k in self.kinds:
            if k.kind == kind:
                return k
        raise KeyError(kind)


@dataclass(frozen=True)
class OutputChannel:
    channel: str
    unit: str


@dataclass(frozen=True)
class SchemeTemplate:
    template_id: str
    lab_kind: str
    title: str
    discipline_tags: tuple[str, ...]
    slots: tuple[Slot, ...]
    fixed_structure: dict
    sim_params: tuple[ParamSpec, ...]
    output_channels: tuple[OutputChannel, ...]

    def __post_init__(self):
        if self.lab_kind not in LAB_KINDS:
            raise TemplateError(f"unknown lab_kind {self.lab_kind!r}")
        ids = [s.slot_id for s in self.slots]
        if len(set(ids)) != len(ids):
            raise TemplateError("slot ids must be unique")
        if "sim" in ids:
            raise TemplateError("slot id 'sim' is reserved")
        for tag in self.discipline_tags:
            if tag not in DISCIPLINE_TAGS:
                raise TemplateError(f"unknown discipline tag {tag!r}")
        if not self.output_channels:
            raise TemplateError("output_channels must be non-empty")
        names = [p.name for p in self.sim_params]
        if len(set(names)) != len(names):
            raise TemplateError("duplicate sim param names")

    def slot(self, slot_id: str) -> Slot:
        for s in self.slots:
            if s.slot_id == slot_id:
                return s
        raise KeyError(slot_id)


@dataclass(frozen=True)
class SchemeConfig:
    template_id: str
    selections: dict[str, str]
    param_values: dict[str, dict[str, float]]
    sim: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Violation:
    """One broken constraint, pinned to a single slot or param.

    ``slot`` is the slot id ("sim" for simulation directives); ``param``
    is None when the slot-level choice itself is wrong.
    """

    slot: str
    param: str | None
    reason: str
    detail: str

    def to_doc(self) -> dict:
        return {"slot": self.slot, "param": self.param,
                "reason": self.reason, "detail": self.detail}


def _check_values(slot_id, specs, given, violations):
    by_name = {p.name: p for p in specs}
    for name in given:
        if name not in by_name:
            violations.append(Violation(slot_id, name, "unknown_param",
                                         f"{slot_id}: no such parameter {name!r}"))
    for spec in specs:
        if spec.name not in given:
            violations.append(Violation(slot_id, spec.name, "missing_param",
                                         f"{slot_id}: {spec.name} has no value"))
            continue
        value = given[spec.name]
        if not isinstance(value, (int, float)) or isinstance(value, bool) \
                or not math.isfinite(float(value)):
            violations.append(Violation(slot_id, spec.name, "not_a_number",
                                         f"{slot_id}: {spec.name} must be a finite number"))
        elif not (spec.min <= float(value) <= spec.max):
            violations.append(Violation(
                slot_id, spec.name, "out_of_range",
                f"{slot_id}: {spec.name}={value} outside [{spec.min}, {spec.max}] {spec.unit}"))


def validate_config(template: SchemeTemplate, config: SchemeConfig) -> list[Violation]:
    """Empty list iff the config satisfies every template constraint."""
    if config.template_id != template.template_id:
        raise TemplateError(
            f"config targets {config.template_id!r}, not {template.template_id!r}")
    violations: list[Violation] = []
    slot_ids = {s.slot_id for s in template.slots}

    for sid in config.selections:
        if sid not in slot_ids:
            violations.append(Violation(sid, None, "unknown_slot",
                                         f"template has no slot {sid!r}"))
    for sid in config.param_values:
        if sid not in slot_ids:
            violations.append(Violation(sid, None, "unknown_slot",
                                         f"template has no slot {sid!r}"))

    for slot in template.slots:
        chosen = config.selections.get(slot.slot_id)
        if chosen is None:
            violations.append(Violation(slot.slot_id, None, "missing_selection",
                                         f"slot {slot.slot_id} has no selection"))
            continue
        if chosen not in slot.allowed_kinds:
            violations.append(Violation(
                slot.slot_id, None, "invalid_kind",
                f"slot {slot.slot_id}: kind {chosen!r} not among {list(slot.allowed_kinds)}"))
            continue
        _check_values(slot.slot_id, slot.option(chosen).params,
                      config.param_values.get(slot.slot_id, {}), violations)

    _check_values("sim", template.sim_params, config.sim, violations)
    return violations


def default_config(template: SchemeTemplate) -> SchemeConfig:
    """The all-defaults config; always valid by the ParamSpec invariants."""
    selections = {s.slot_id: s.default_kind for s in template.slots}
    params = {s.slot_id: {p.name: p.default for p in s.option(s.default_kind).params}
              for s in template.slots}
    sim = {p.name: p.default for p in template.sim_params}
    return SchemeConfig(template_id=template.template_id, selections=selections,
                        param_values=params, sim=sim)


# ---------------------------------------------------------------------------
# document (de)serialization; unknown fields are rejected everywhere


def _require_keys(doc: dict, required: set[str], optional: set[str], where: str):
    if not isinstance(doc, dict):
        raise TemplateError(f"{where}: expected a mapping")
    keys = set(doc)
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise TemplateError(f"{where}: missing fields {sorted(missing)}")
    if unknown:
        raise TemplateError(f"{where}: unknown fields {sorted(unknown)}")


def _param_from_doc(doc: dict) -> ParamSpec:
    _require_keys(doc, {"name", "unit", "min", "max", "default"}, {"scale"}, "param")
    return ParamSpec(name=str(doc["name"]), unit=str(doc["unit"]),
                     min=float(doc["min"]), max=float(doc["max"]),
                     default=float(doc["default"]),
                     scale=str(doc.get("scale", "linear")))


def template_from_doc(doc: dict) -> SchemeTemplate:
    _require_keys(doc, {"template", "lab_kind", "title", "discipline_tags",
                        "slots", "fixed", "sim", "outputs"}, set(), "template")
    slots = []
    for sdoc in doc["slots"]:
        _require_keys(sdoc, {"slot", "position", "default", "kinds"}, set(),
                      f"slot {sdoc.get('slot', '?')}")
        kinds = []
        for kdoc in sdoc["kinds"]:
            _require_keys(kdoc, {"kind", "params"}, set(),
                          f"kind {kdoc.get('kind', '?')}")
            kinds.append(KindOption(kind=str(kdoc["kind"]),
                                    params=tuple(_param_from_doc(p) for p in kdoc["params"])))
        pos = sdoc["position"]
        if not (isinstance(pos, (list, tuple)) and len(pos) == 2):
            raise TemplateError(f"slot {sdoc['slot']}: position must be [col, row]")
        slots.append(Slot(slot_id=str(sdoc["slot"]),
                          position=(int(pos[0]), int(pos[1])),
                          default_kind=str(sdoc["default"]),
                          kinds=tuple(kinds)))
    outputs = []
    for odoc in doc["outputs"]:
        _require_keys(odoc, {"channel", "unit"}, set(), "output")
        outputs.append(OutputChannel(channel=str(odoc["channel"]), unit=str(odoc["unit"])))
    if not isinstance(doc["fixed"], dict):
        raise TemplateError("fixed: expected a mapping")
    return SchemeTemplate(
        template_id=str(doc["template"]),
        lab_kind=str(doc["lab_kind"]),
        title=str(doc["title"]),
        discipline_tags=tuple(str(t) for t in doc["discipline_tags"]),
        slots=tuple(slots),
        fixed_structure=doc["fixed"],
        sim_params=tuple(_param_from_doc(p) for p in doc["sim"]),
        output_channels=tuple(outputs),
    )


def template_to_doc(template: SchemeTemplate) -> dict:
    def param_doc(p: ParamSpec) -> dict:
        return {"name": p.name, "unit": p.unit, "min": p.min, "max": p.max,
                "default": p.default, "scale": p.scale}

    return {
        "template": template.template_id,
        "lab_kind": template.lab_kind,
        "title": template.title,
        "discipline_tags": list(template.discipline_tags),
        "slots": [
            {"slot": s.slot_id, "position": list(s.position), "default": s.default_kind,
             "kinds": [{"kind": k.kind, "params": [param_doc(p) for p in k.params]}
                       for k in s.kinds]}
            for s in template.slots
        ],
        "fixed": template.fixed_structure,
        "sim": [param_doc(p) for p in template.sim_params],
        "outputs": [{"channel": o.channel, "unit": o.unit}
                    for o in template.output_channels],
    }


def config_from_doc(doc: dict) -> SchemeConfig:
    if not isinstance(doc, dict):
        raise ConfigDocumentError("config must be a mapping")
    keys = set(doc)
    unknown = keys - {"template", "selections", "params", "sim"}
    if unknown:
        raise ConfigDocumentError(f"config: unknown fields {sorted(unknown)}")
    if "template" not in doc or not isinstance(doc["template"], str):
        raise ConfigDocumentError("config: 'template' must be a string")

    def str_map(name) -> dict:
        value = doc.get(name, {})
        if not isinstance(value, dict):
            raise ConfigDocumentError(f"config: {name!r} must be a mapping")
        return value

    selections = {}
    for sid, kind in str_map("selections").items():
        if not isinstance(kind, str):
            raise ConfigDocumentError(f"config: selection for {sid!r} must be a string")
        selections[str(sid)] = kind

    def number_map(owner: str, values: dict) -> dict[str, float]:
        out = {}
        for name, value in values.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigDocumentError(f"config: {owner}.{name} must be a number")
            out[str(name)] = float(value)
        return out

    params = {}
    for sid, values in str_map("params").items():
        if not isinstance(values, dict):
            raise ConfigDocumentError(f"config: params for {sid!r} must be a mapping")
        params[str(sid)] = number_map(str(sid), values)

    return SchemeConfig(template_id=doc["template"], selections=selections,
                        param_values=params, sim=number_map("sim", str_map("sim")))


def config_to_doc(config: SchemeConfig) -> dict:
    return {"template": config.template_id,
            "selections": dict(config.selections),
            "params": {sid: dict(vals) for sid, vals in config.param_values.items()},
            "sim": dict(config.sim)}


def load_template(path: str | Path) -> SchemeTemplate:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return template_from_doc(doc)


def load_template_dir(directory: str | Path) -> list[SchemeTemplate]:
    paths = sorted(Path(directory).glob("*.yaml"))
    templates = [load_template(p) for p in paths]
    ids = [t.template_id for t in templates]
    if len(set(ids)) != len(ids):
        raise TemplateError("duplicate template ids in directory")
    return sorted(templates, key=lambda t: t.template_id)


@lru_cache(maxsize=1)
def builtin_templates() -> tuple[SchemeTemplate, ...]:
    """The four shipped labs, one per lab kind."""
    return tuple(load_template_dir(TEMPLATE_DIR))
