"""Fixed-topology scheme templates and their lab-model builders."""

from .build import ConfigError, instantiate, run_config
from .model import (
    DISCIPLINE_TAGS,
    LAB_KINDS,
    TEMPLATE_DIR,
    ConfigDocumentError,
    KindOption,
    OutputChannel,
    ParamSpec,
    SchemeConfig,
    SchemeTemplate,
    Slot,
    TemplateError,
    Violation,
    builtin_templates,
    config_from_doc,
    config_to_doc,
    default_config,
    load_template,
    load_template_dir,
    template_from_doc,
    template_to_doc,
    validate_config,
)

__all__ = [
    "DISCIPLINE_TAGS",
    "LAB_KINDS",
    "TEMPLATE_DIR",
    "ConfigDocumentError",
    "ConfigError",
    "KindOption",
    "OutputChannel",
    "ParamSpec",
    "SchemeConfig",
    "SchemeTemplate",
    "Slot",
    "TemplateError",
    "Violation",
    "builtin_templates",
    "config_from_doc",
    "config_to_doc",
    "default_config",
    "instantiate",
    "load_template",
    "load_template_dir",
    "run_config",
    "template_from_doc",
    "template_to_doc",
    "validate_config",
]
