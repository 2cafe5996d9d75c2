# Copyright (c) 2025, WBASN Sim contributors
# See license.txt

import json
import os
import tempfile
import unittest
from dataclasses import replace

from wbasn_sim.wbasn_sim.doctype.sim_settings.sim_settings import (
	SimSettings, config_to_flat, default_config_path, load_schema,
)
from wbasn_sim.wbasn_sim.exceptions import ConfigError
from wbasn_sim.wbasn_sim.services import physiology
from wbasn_sim.wbasn_sim.services.nodes import ReportMode, SensorKind
from wbasn_sim.wbasn_sim.services.simulator import SimConfig, run_simulation


def parsed(text):
	settings = SimSettings(source="test.conf")
	settings.parse_text(text)
	return settings


class TestSimSettings(unittest.TestCase):
	def test_defaults_file_matches_code(self):
		"""The checked-in defaults file parses to the code defaults"""
		settings = SimSettings.load(default_config_path())
		self.assertEqual(settings.diagnostics, [])
		self.assertEqual(settings.validate(), SimConfig())

	def test_empty_settings_are_defaults(self):
		"""Without a file the code defaults apply"""
		self.assertEqual(SimSettings().validate(), SimConfig())
		self.assertEqual(SimSettings.load().validate(), SimConfig())

	def test_flat_round_trip(self):
		"""A config rendered flat builds back to itself"""
		cfg = replace(SimConfig(), seed=9, noise=True, report_mode=ReportMode.ON_CHANGE)
		self.assertEqual(SimSettings(values=config_to_flat(cfg)).to_config(), cfg)

	def test_comments_and_blank_lines(self):
		"""Comments, blank lines and padding are ignored"""
		settings = parsed("\n# a comment\n  simulation.seed   =  42   # trailing\n\n")
		self.assertEqual(settings.diagnostics, [])
		self.assertEqual(settings.validate().seed, 42)

	def test_every_diagnostic_is_collected(self):
		"""Parsing keeps going and names the line of each problem"""
		settings = parsed(
			"simulation.seed = 3\n"
			"this line is wrong\n"
			"simulation.colour = blue\n"
			"simulation.seed = 4\n"
			"simulation.runs = five\n"
			"protocol.report_mode = sometimes\n"
			"simulation.max_rounds =\n"
			"scenario.jogging.speed = 4.0\n"
		)
		problems = settings.violations()
		self.assertEqual(len(settings.diagnostics), 7)
		self.assertTrue(problems[0].startswith("test.conf:2:"))
		joined = "\n".join(problems)
		self.assertIn("test.conf:3: simulation.colour: unknown setting", joined)
		self.assertIn("test.conf:4: simulation.seed: already set on line 1", joined)
		self.assertIn("test.conf:5: simulation.runs", joined)
		self.assertIn("test.conf:6: protocol.report_mode", joined)
		self.assertIn("test.conf:7: simulation.max_rounds", joined)
		self.assertIn("test.conf:8: scenario.jogging.speed: unknown setting", joined)
		with self.assertRaises(ConfigError) as ctx:
			settings.validate()
		self.assertEqual(ctx.exception.violations, problems)

	def test_check_values(self):
		"""on/off style values coerce to booleans"""
		for text, expected in (("on", True), ("OFF", False), ("yes", True), ("0", False), ("true", True)):
			self.assertIs(parsed(f"simulation.noise = {text}").validate().noise, expected)

	def test_overrides_after_file(self):
		"""Command-line values win over the file, with short scenario names"""
		settings = parsed("simulation.seed = 3\nsimulation.scenario = walking\n")
		settings.apply_overrides(scenario="slow", seed=8, rounds=500, runs=2, noise="on")
		cfg = settings.validate()
		self.assertEqual(cfg.scenario, "slow_running")
		self.assertEqual((cfg.seed, cfg.max_rounds, cfg.num_runs, cfg.noise), (8, 500, 2, True))
		self.assertEqual(parsed("").apply_overrides(scenario="fast").validate().scenario, "fast_running")

	def test_drain_rate_overrides_calibration(self):
		"""An explicit drain rate replaces the fatigue-round calibration"""
		cfg = parsed("scenario.walking.drain_rate = 0.25\n").validate()
		self.assertEqual(cfg.scenarios["walking"].drain_rate, 0.25)
		self.assertEqual(physiology.fatigue_round_closed_form(cfg.fatigue, 0.25), 4000)

	def test_calibration_target(self):
		"""A new fatigue round recalibrates the drain rate"""
		cfg = parsed("scenario.fast_running.fatigue_round = 2000\n").validate()
		self.assertEqual(physiology.fatigue_round_closed_form(
			cfg.effective_fatigue(), cfg.scenarios["fast_running"].drain_rate), 2000)

	def test_bmr_threshold_calibration(self):
		"""With the BMR threshold the calibrated rounds still hold"""
		cfg = parsed("fatigue.threshold_source = bmr\n").validate()
		fatigue = cfg.effective_fatigue()
		self.assertAlmostEqual(fatigue.fatigue_threshold, 1735.15, places=9)
		for name, rounds in (("walking", 10182), ("slow_running", 6454), ("fast_running", 3811)):
			self.assertEqual(physiology.fatigue_round_closed_form(fatigue, cfg.scenarios[name].drain_rate), rounds)

	def test_missing_calibration(self):
		"""A scenario needs either a drain rate or a fatigue round"""
		settings = parsed("scenario.slow_running.fatigue_round =\n")
		self.assertIn("scenario.slow_running: needs drain_rate or a positive fatigue_round",
					  settings.violations())

	def test_invariant_violations(self):
		"""Type-correct but out-of-range values are reported by field"""
		settings = parsed(
			"fatigue.threshold = 3000\n"
			"radio.path_loss_exponent = 7\n"
			"node.glucose.sample_interval = 0\n"
			"scenario.fast_running.temp_plateau = 37.0\n"
		)
		self.assertEqual(settings.diagnostics, [])
		joined = "\n".join(settings.violations())
		self.assertIn("fatigue.threshold", joined)
		self.assertIn("radio.path_loss_exponent", joined)
		self.assertIn("node.glucose.sample_interval", joined)
		self.assertIn("scenario.*.temp_plateau", joined)

	def test_seed_must_not_be_negative(self):
		"""A negative base seed is a violation of simulation.seed"""
		problems = parsed("simulation.seed = -3\n").violations()
		self.assertEqual(problems, ["simulation.seed: must be >= 0 (got -3)"])
		self.assertEqual(parsed("simulation.seed = 0\n").violations(), [])

	def test_round_duration_is_informational(self):
		"""Any positive round duration validates and leaves the outcome unchanged"""
		field = next(f for f in load_schema()["fields"] if f["fieldname"] == "simulation.round_duration")
		self.assertIn("Informational", field["description"])
		cfg = parsed("simulation.round_duration = 2.5\nsimulation.scenario = fast_running\n").validate()
		self.assertEqual(cfg.round_duration, 2.5)
		reference = run_simulation(SimConfig(scenario=physiology.FAST_RUNNING, max_rounds=4000))
		result = run_simulation(replace(cfg, max_rounds=4000))
		self.assertEqual(result.fatigue_round, reference.fatigue_round)
		self.assertEqual(result.records, reference.records)
		self.assertIn("simulation.round_duration", "\n".join(parsed("simulation.round_duration = 0\n").violations()))

	def test_per_node_exponent(self):
		"""A node can override the path loss exponent, empty means none"""
		cfg = parsed("node.heartbeat.path_loss_exponent = 5.9\n").validate()
		by_kind = {spec.kind: spec for spec in cfg.nodes}
		self.assertEqual(by_kind[SensorKind.HEARTBEAT].path_loss_exponent, 5.9)
		self.assertIsNone(by_kind[SensorKind.TEMPERATURE].path_loss_exponent)

	def test_manifest_as_config(self):
		"""The config echo of a manifest reproduces the configuration"""
		settings = parsed("simulation.seed = 77\nsimulation.noise = on\nnode.glucose.sample_interval = 30\n")
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "manifest.json")
			with open(path, "w", encoding="utf-8") as f:
				json.dump({"app": "wbasn_sim", "config": settings.as_dict()}, f)
			loaded = SimSettings.load(path)
		self.assertEqual(loaded.diagnostics, [])
		self.assertEqual(loaded.validate(), settings.validate())

	def test_bad_manifest(self):
		"""JSON without a config object is a diagnostic"""
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "other.json")
			with open(path, "w", encoding="utf-8") as f:
				f.write("[1, 2, 3]")
			self.assertTrue(SimSettings.load(path).violations())

	def test_unreadable_file(self):
		"""A missing file raises straight away"""
		with self.assertRaises(ConfigError):
			SimSettings.load("/nonexistent/wbasn.conf")
