"""Pipeline configuration: one YAML file, every field overridable by a flag.

Paths inside a config file resolve relative to the file's own directory, so
a corpus checkout can carry its config along. Paths given on the command
line resolve relative to the working directory as usual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from archlens.errors import ConfigError
from archlens.export import ExportOptions
from archlens.layout import LayoutParams
from archlens.merging import NameRuleSet

_TOP_LEVEL_KEYS = {
    "project_root",
    "include",
    "exclude",
    "trace_logs",
    "name_rules",
    "export",
    "layout",
    "output_dir",
    "jobs",
}

_EXPORT_KEYS = {"format", "dot_mode", "include_dataflow", "include_weights"}

_LAYOUT_KEYS = {
    "iterations_inter_group",
    "iterations_intra_group",
    "repulsion_constant",
    "spring_constant",
    "spring_rest_length",
    "cooling_factor",
    "rng_seed",
    "group_padding",
}


@dataclass
class PipelineConfig:
    project_root: Path | None = None
    include: list[str] | None = None
    exclude: list[str] | None = None
    trace_logs: list[Path] = field(default_factory=list)
    name_rules: NameRuleSet = field(default_factory=lambda: NameRuleSet([]))
    export_options: ExportOptions = field(default_factory=ExportOptions)
    layout_params: LayoutParams = field(default_factory=LayoutParams)
    output_dir: Path = Path("out")
    jobs: int = 1

    def require_inputs(self) -> None:
        if self.project_root is None and not self.trace_logs:
            raise ConfigError(
                "nothing to analyze: set project_root and/or trace_logs"
            )


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(unknown)}")


def _mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping")
    return value


def _string_list(value, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where} must be a list of strings")
    return list(value)


def _path(value, where: str, base: Path) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{where} must be a non-empty path string")
    raw = Path(value)
    return raw if raw.is_absolute() else base / raw


def config_from_mapping(data: dict, base_dir: Path) -> PipelineConfig:
    _mapping(data, "config")
    _reject_unknown(data, _TOP_LEVEL_KEYS, "config")
    cfg = PipelineConfig()

    if "project_root" in data:
        cfg.project_root = _path(data["project_root"], "project_root", base_dir)
    if "include" in data:
        cfg.include = _string_list(data["include"], "include")
    if "exclude" in data:
        cfg.exclude = _string_list(data["exclude"], "exclude")
    if "trace_logs" in data:
        cfg.trace_logs = [
            _path(v, f"trace_logs[{i}]", base_dir)
            for i, v in enumerate(_string_list(data["trace_logs"], "trace_logs"))
        ]
    if "name_rules" in data:
        if not isinstance(data["name_rules"], list):
            raise ConfigError("name_rules must be a list of rule mappings")
        cfg.name_rules = NameRuleSet.from_spec(data["name_rules"])
    if "export" in data:
        section = _mapping(data["export"], "export")
        _reject_unknown(section, _EXPORT_KEYS, "export")
        try:
            cfg.export_options = ExportOptions(**section)
        except TypeError as exc:
            raise ConfigError(f"export section: {exc}") from exc
    if "layout" in data:
        section = _mapping(data["layout"], "layout")
        _reject_unknown(section, _LAYOUT_KEYS, "layout")
        try:
            cfg.layout_params = LayoutParams(**section)
        except TypeError as exc:
            raise ConfigError(f"layout section: {exc}") from exc
    if "output_dir" in data:
        cfg.output_dir = _path(data["output_dir"], "output_dir", base_dir)
    if "jobs" in data:
        jobs = data["jobs"]
        if not isinstance(jobs, int) or isinstance(jobs, bool) or jobs < 1:
            raise ConfigError("jobs must be a positive integer")
        cfg.jobs = jobs
    return cfg


def load_config(path: Path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping at the top level")
    return config_from_mapping(data, path.resolve().parent)
