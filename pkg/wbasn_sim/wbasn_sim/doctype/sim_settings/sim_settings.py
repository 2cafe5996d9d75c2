# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

import fnmatch
import json
import os
from dataclasses import replace
from typing import Any, Dict, List, Optional

from wbasn_sim import hooks
from wbasn_sim.wbasn_sim.exceptions import ConfigError
from wbasn_sim.wbasn_sim.services import physiology
from wbasn_sim.wbasn_sim.services.nodes import Direction, NodeSpec, ReportMode, SensorKind
from wbasn_sim.wbasn_sim.services.physiology import (
    BodyProfile, FatigueConfig, ScenarioParams, SignalBaseline,
)
from wbasn_sim.wbasn_sim.services.radio_energy import NANO, RadioParams
from wbasn_sim.wbasn_sim.services.simulator import (
    CALIBRATION_FATIGUE_ROUNDS, THRESHOLD_BMR, SimConfig,
)
from wbasn_sim.wbasn_sim.utils import check, cint, flt, logger

SCHEMA_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "sim_settings.json")

SCENARIO_ALIASES = {"slow": "slow_running", "fast": "fast_running"}

_SCENARIO_FIELDS = ("speed", "temp_plateau", "temp_time_constant", "hr_plateau", "hr_time_constant",
                    "glucose_slope", "temp_noise", "hr_noise", "glucose_noise")


def load_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def default_config_path() -> str:
    """Path of the checked-in defaults file."""
    app_dir = os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))
    return os.path.join(app_dir, hooks.default_config)


def _nanojoules(joules: float) -> float:
    # 12 significant digits undo the J -> nJ rounding noise
    return float(f"{joules / NANO:.12g}")


def config_to_flat(cfg: SimConfig) -> Dict[str, Any]:
    """
    Render a SimConfig in the flat dotted-key space.

    Drain rates are written explicitly; calibration targets are left empty.
    """
    flat: Dict[str, Any] = {
        "simulation.scenario": cfg.scenario,
        "simulation.max_rounds": cfg.max_rounds,
        "simulation.round_duration": cfg.round_duration,
        "simulation.seed": cfg.seed,
        "simulation.runs": cfg.num_runs,
        "simulation.noise": cfg.noise,
        "simulation.stop_when_exhausted": cfg.stop_when_exhausted,
        "protocol.report_mode": cfg.report_mode.value,
        "radio.e_tx_elec_nj": _nanojoules(cfg.radio.e_tx_elec),
        "radio.e_rx_elec_nj": _nanojoules(cfg.radio.e_rx_elec),
        "radio.e_amp_nj": _nanojoules(cfg.radio.e_amp),
        "radio.path_loss_exponent": cfg.radio.path_loss_exponent,
        "fatigue.initial_energy": cfg.fatigue.initial_energy,
        "fatigue.threshold": cfg.fatigue.fatigue_threshold,
        "fatigue.threshold_source": cfg.threshold_source,
        "body.weight": cfg.body.weight,
        "body.height": cfg.body.height,
        "body.age": cfg.body.age,
        "baseline.temperature": cfg.baseline.temperature,
        "baseline.heart_rate": cfg.baseline.heart_rate,
        "baseline.glucose": cfg.baseline.glucose,
        "baseline.glucose_floor": cfg.baseline.glucose_floor,
    }
    for name, params in cfg.scenarios.items():
        prefix = f"scenario.{name}"
        flat[f"{prefix}.fatigue_round"] = None
        flat[f"{prefix}.drain_rate"] = params.drain_rate
        for attr in _SCENARIO_FIELDS:
            flat[f"{prefix}.{attr}"] = getattr(params, attr)
    for spec in cfg.nodes:
        prefix = f"node.{spec.kind.value}"
        flat[f"{prefix}.payload_bits"] = spec.payload_bits
        flat[f"{prefix}.distance"] = spec.distance
        flat[f"{prefix}.path_loss_exponent"] = spec.path_loss_exponent
        flat[f"{prefix}.hard_threshold"] = spec.hard_threshold
        flat[f"{prefix}.soft_threshold"] = spec.soft_threshold
        flat[f"{prefix}.direction"] = spec.direction.value
        flat[f"{prefix}.sample_interval"] = spec.sample_interval
        flat[f"{prefix}.initial_energy"] = spec.initial_energy
    return flat


def default_values() -> Dict[str, Any]:
    """Reference defaults in flat form, drain rates given as calibrated fatigue rounds."""
    flat = config_to_flat(SimConfig())
    for name, rounds in CALIBRATION_FATIGUE_ROUNDS.items():
        flat[f"scenario.{name}.fatigue_round"] = rounds
        flat[f"scenario.{name}.drain_rate"] = None
    return flat


class SimSettings:
    """
    Configuration document of an experiment.

    Holds the flat key/value space, parses config files and manifests into
    it, applies command-line overrides and builds the SimConfig. Diagnostics
    are collected, never raised one at a time.
    """

    def __init__(self, values: Optional[Dict[str, Any]] = None, source: str = "<defaults>"):
        self.schema = load_schema()
        self.values: Dict[str, Any] = default_values() if values is None else dict(values)
        self.source = source
        self.diagnostics: List[str] = []

    @classmethod
    def load(cls, path: Optional[str] = None) -> "SimSettings":
        """
        Load a key = value config file, or the config echo of a manifest.json.

        Args:
            path (str): Config path, the defaults file when omitted

        Returns:
            SimSettings: Settings with any parse diagnostics attached

        Raises:
            ConfigError: If the file cannot be read at all
        """
        path = path or default_config_path()
        settings = cls(source=path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise ConfigError([f"{path}: cannot read config ({e.strerror or e})"]) from e

        if path.endswith(".json"):
            settings.load_manifest_text(text)
        else:
            settings.parse_text(text)
        return settings

    def field_for(self, key: str) -> Optional[Dict[str, Any]]:
        """Schema field matching a dotted key, honoring wildcard segments."""
        parts = key.split(".")
        for field in self.schema["fields"]:
            pattern = field["fieldname"].split(".")
            if len(pattern) != len(parts) or not fnmatch.fnmatchcase(key, field["fieldname"]):
                continue
            wildcard_ok = all(
                p != "*" or part in self.schema["wildcards"].get(pattern[0], [])
                for p, part in zip(pattern, parts)
            )
            if wildcard_ok:
                return field
        return None

    def coerce(self, field: Dict[str, Any], raw: Any) -> Any:
        """
        Convert a raw value to the field's type.

        Raises:
            ValueError: If the value does not fit the field
        """
        if raw is None or (isinstance(raw, str) and not raw.strip()):
            if field.get("reqd"):
                raise ValueError("a value is required")
            return None
        fieldtype = field["fieldtype"]
        if fieldtype == "Int":
            return cint(raw)
        if fieldtype == "Float":
            return flt(raw)
        if fieldtype == "Check":
            return check(raw)
        if fieldtype == "Select":
            value = str(raw).strip()
            options = field["options"].split("\n")
            if value not in options:
                raise ValueError(f"must be one of {', '.join(options)}")
            return value
        return str(raw).strip()

    def set_value(self, key: str, raw: Any, where: str) -> None:
        field = self.field_for(key)
        if field is None:
            self.diagnostics.append(f"{where}: {key}: unknown setting")
            return
        try:
            self.values[key] = self.coerce(field, raw)
        except ValueError as e:
            self.diagnostics.append(f"{where}: {key}: invalid {field['fieldtype']} value {raw!r} ({e})")

    def parse_text(self, text: str) -> None:
        """Apply `key = value` lines on top of the current values."""
        seen: Dict[str, int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            where = f"{self.source}:{lineno}"
            if "=" not in stripped:
                self.diagnostics.append(f"{where}: expected 'key = value', got {stripped!r}")
                continue
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key in seen:
                self.diagnostics.append(f"{where}: {key}: already set on line {seen[key]}")
                continue
            seen[key] = lineno
            self.set_value(key, raw, where)

    def load_manifest_text(self, text: str) -> None:
        """Apply the config echo of a manifest written by a previous run."""
        try:
            echo = json.loads(text).get("config")
        except (ValueError, AttributeError):
            echo = None
        if not isinstance(echo, dict):
            self.diagnostics.append(f"{self.source}: not a manifest with a 'config' object")
            return
        for key in sorted(echo):
            self.set_value(key, echo[key], self.source)

    def apply_overrides(self, scenario: Optional[str] = None, seed: Optional[int] = None,
                        rounds: Optional[int] = None, runs: Optional[int] = None,
                        noise: Optional[Any] = None) -> "SimSettings":
        """Apply command-line overrides after the file."""
        overrides = {
            "simulation.scenario": SCENARIO_ALIASES.get(scenario, scenario),
            "simulation.seed": seed,
            "simulation.max_rounds": rounds,
            "simulation.runs": runs,
            "simulation.noise": noise,
        }
        for key, value in overrides.items():
            if value is not None:
                self.set_value(key, value, "command line")
        return self

    def to_config(self) -> SimConfig:
        """
        Build the SimConfig these values describe.

        Invariants are not checked here; see validate().
        """
        v = self.values
        fatigue = FatigueConfig(v["fatigue.initial_energy"], v["fatigue.threshold"])
        body = BodyProfile(v["body.weight"], v["body.height"], v["body.age"])
        threshold_source = v["fatigue.threshold_source"]
        calibration = replace(fatigue, fatigue_threshold=physiology.bmr(body)) \
            if threshold_source == THRESHOLD_BMR else fatigue

        scenarios = {}
        for name in self.schema["wildcards"]["scenario"]:
            prefix = f"scenario.{name}"
            drain_rate = v.get(f"{prefix}.drain_rate")
            fatigue_round = v.get(f"{prefix}.fatigue_round")
            if drain_rate is None:
                drain_rate = physiology.calibrated_drain_rate(calibration, fatigue_round) \
                    if fatigue_round else 0.0
            scenarios[name] = ScenarioParams(
                name=name, drain_rate=drain_rate,
                **{attr: v[f"{prefix}.{attr}"] for attr in _SCENARIO_FIELDS},
            )

        nodes = []
        for kind in SensorKind:
            prefix = f"node.{kind.value}"
            nodes.append(NodeSpec(
                kind=kind,
                payload_bits=v[f"{prefix}.payload_bits"],
                distance=v[f"{prefix}.distance"],
                hard_threshold=v[f"{prefix}.hard_threshold"],
                soft_threshold=v[f"{prefix}.soft_threshold"],
                direction=Direction(v[f"{prefix}.direction"]),
                sample_interval=v[f"{prefix}.sample_interval"],
                initial_energy=v[f"{prefix}.initial_energy"],
                path_loss_exponent=v.get(f"{prefix}.path_loss_exponent"),
            ))

        return SimConfig(
            scenario=v["simulation.scenario"],
            max_rounds=v["simulation.max_rounds"],
            round_duration=v["simulation.round_duration"],
            seed=v["simulation.seed"],
            num_runs=v["simulation.runs"],
            noise=v["simulation.noise"],
            stop_when_exhausted=v["simulation.stop_when_exhausted"],
            report_mode=ReportMode(v["protocol.report_mode"]),
            radio=RadioParams.from_nanojoules(v["radio.e_tx_elec_nj"], v["radio.e_rx_elec_nj"],
                                              v["radio.e_amp_nj"], v["radio.path_loss_exponent"]),
            fatigue=fatigue,
            threshold_source=threshold_source,
            body=body,
            baseline=SignalBaseline(v["baseline.temperature"], v["baseline.heart_rate"],
                                    v["baseline.glucose"], v["baseline.glucose_floor"]),
            scenarios=scenarios,
            nodes=tuple(nodes),
        )

    def violations(self) -> List[str]:
        """Parse diagnostics followed by every invariant the resulting config breaks."""
        problems = list(self.diagnostics)
        for name in self.schema["wildcards"]["scenario"]:
            prefix = f"scenario.{name}"
            if self.values.get(f"{prefix}.drain_rate") is None and not self.values.get(f"{prefix}.fatigue_round"):
                problems.append(f"{prefix}: needs drain_rate or a positive fatigue_round")
        try:
            problems += self.to_config().violations()
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            problems.append(f"{self.source}: cannot build configuration ({e})")
        return problems

    def validate(self) -> SimConfig:
        """
        Validate and build the configuration.

        Returns:
            SimConfig: The validated configuration

        Raises:
            ConfigError: Listing every diagnostic and violation
        """
        problems = self.violations()
        if problems:
            logger("settings").warning(f"{self.source}: {len(problems)} config problem(s)")
            raise ConfigError(problems)
        return self.to_config()

    def as_dict(self) -> Dict[str, Any]:
        """Complete flat echo, suitable for a manifest."""
        return {key: self.values[key] for key in sorted(self.values)}
