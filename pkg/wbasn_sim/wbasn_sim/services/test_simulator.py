# Copyright (c) 2025, WBASN Sim contributors
# See license.txt

import math
import os
import unittest
from dataclasses import replace
from unittest import mock

import numpy as np
from scipy import stats

from wbasn_sim.wbasn_sim.exceptions import ConfigError
from wbasn_sim.wbasn_sim.services import physiology, simulator
from wbasn_sim.wbasn_sim.services.nodes import (
	DEFAULT_NODES, READING_FIELD, NodeState, SensorKind,
)
from wbasn_sim.wbasn_sim.services.physiology import FAST_RUNNING, SCENARIO_NAMES, SLOW_RUNNING, WALKING
from wbasn_sim.wbasn_sim.services.simulator import SimConfig, run_experiment, run_simulation

FATIGUE_ROUNDS = {WALKING: 10182, SLOW_RUNNING: 6454, FAST_RUNNING: 3811}


def affordable_packets(initial_energy, cost):
	"""Packets a node can pay for, subtracting the way a node does."""
	residual, count = initial_energy, 0
	while residual >= cost:
		residual -= cost
		count += 1
	return count


def predicted_death_round(cfg, scenario, spec):
	"""
	Death round of a node with noise off and continuous reporting.

	Signals are monotone, so once a sampled reading is beyond the hard
	threshold every later sample is too.
	"""
	params = cfg.scenario_params(scenario)
	node = spec.build(0, cfg.report_mode)
	for t in range(0, cfg.max_rounds, spec.sample_interval):
		reading = physiology.signal_trajectory(params, cfg.baseline, t)[READING_FIELD[spec.kind]]
		if node.beyond_hard_threshold(reading):
			death = t + spec.sample_interval * affordable_packets(spec.initial_energy, node.tx_cost(cfg.radio))
			return death if death < cfg.max_rounds else None
	return None


class TestRunRound(unittest.TestCase):
	def test_round_zero_is_quiet(self):
		"""Baseline signals are below every threshold, so round 0 sends nothing"""
		world = simulator.new_world(SimConfig(scenario=WALKING), 1)
		world, record = simulator.run_round(world)
		self.assertEqual(record.round, 0)
		self.assertEqual(record.packets, 0)
		self.assertEqual(record.alive, 3)
		self.assertEqual(record.soldier_energy, 2500.0)
		self.assertEqual(world.round, 1)

	def test_quiescent_world(self):
		"""With every node dead and no energy left nothing changes"""
		world = simulator.new_world(SimConfig(scenario=WALKING), 1)
		for node in world.nodes:
			node.state = NodeState.DEAD
		world.physio = replace(world.physio, soldier_energy=0.0)
		for _ in range(3):
			world, record = simulator.run_round(world)
			self.assertEqual(record.alive, 0)
			self.assertEqual(record.packets, 0)
			self.assertEqual(record.soldier_energy, 0.0)
			self.assertTrue(record.fatigued)


class TestRunSimulation(unittest.TestCase):
	def test_fatigue_rounds(self):
		"""Fatigue lands exactly on the calibration rounds with noise off"""
		for name, expected in FATIGUE_ROUNDS.items():
			result = run_simulation(SimConfig(scenario=name))
			self.assertEqual(result.fatigue_round, expected, name)

	def test_linear_soldier_energy(self):
		"""The record of round t carries t drains"""
		result = run_simulation(SimConfig(scenario=WALKING, max_rounds=12000))
		rate = 1000 / 10182
		for t in (0, 1, 500, 10181, 10182, 11999):
			self.assertAlmostEqual(result.records[t].soldier_energy, 2500 - t * rate, places=6)
		self.assertFalse(result.records[10181].fatigued)
		self.assertTrue(result.records[10182].fatigued)

	def test_same_seed_same_result(self):
		"""Two runs with the same seed are identical, noise included"""
		cfg = SimConfig(scenario=SLOW_RUNNING, noise=True, max_rounds=3000, seed=11)
		self.assertEqual(run_simulation(cfg), run_simulation(cfg))
		other = run_simulation(cfg, seed=12)
		self.assertNotEqual(run_simulation(cfg).records, other.records)

	def test_death_rounds_match_closed_form(self):
		"""Every node dies when its own packet budget runs out, the first one sets first_node_dead"""
		for name in SCENARIO_NAMES:
			cfg = SimConfig(scenario=name)
			result = run_simulation(cfg)
			predicted = {spec.kind: predicted_death_round(cfg, name, spec) for spec in cfg.nodes}
			self.assertEqual(result.death_rounds, predicted, name)
			self.assertEqual(result.first_node_dead_round,
							 min(r for r in predicted.values() if r is not None), name)

	def test_forced_interval_lifetime(self):
		"""A node that always reports every k rounds dies at k * floor(E0 / cost)"""
		spec = replace(DEFAULT_NODES[0], distance=1.0, hard_threshold=0.0, sample_interval=2)
		cfg = SimConfig(scenario=WALKING, nodes=(spec,), max_rounds=20000)
		cost = spec.build(0).tx_cost(cfg.radio)
		self.assertEqual(math.floor(0.3 / cost), 6695)
		result = run_simulation(cfg)
		self.assertEqual(result.first_node_dead_round, 2 * 6695)
		self.assertEqual(result.last_node_dead_round, 2 * 6695)
		self.assertEqual(result.total_throughput, 6695)

	def test_stops_when_exhausted(self):
		"""Once all nodes are dead and fatigue was reached the run ends"""
		spec = replace(DEFAULT_NODES[0], distance=1.0, hard_threshold=0.0, sample_interval=2)
		result = run_simulation(SimConfig(scenario=WALKING, nodes=(spec,)))
		self.assertEqual(len(result.records), 2 * 6695 + 1)
		full = run_simulation(SimConfig(scenario=WALKING, nodes=(spec,), stop_when_exhausted=False))
		self.assertEqual(len(full.records), 20000)
		self.assertEqual(full.records[-1].alive, 0)

	def test_cross_scenario_ordering(self):
		"""Harder movement kills the first node sooner, tires sooner and sends more"""
		results = {name: run_simulation(SimConfig(scenario=name)) for name in SCENARIO_NAMES}
		walk, slow, fast = (results[name] for name in SCENARIO_NAMES)
		self.assertGreater(walk.first_node_dead_round, slow.first_node_dead_round)
		self.assertGreater(slow.first_node_dead_round, fast.first_node_dead_round)
		self.assertGreater(walk.fatigue_round, slow.fatigue_round)
		self.assertGreater(slow.fatigue_round, fast.fatigue_round)
		self.assertGreaterEqual(fast.total_throughput, slow.total_throughput)
		self.assertGreaterEqual(slow.total_throughput, walk.total_throughput)

	def test_last_node_ordering_extended(self):
		"""On a long horizon every node dies, and the last one dies sooner under harder movement"""
		glucose = replace(DEFAULT_NODES[1], sample_interval=1)
		nodes = (DEFAULT_NODES[0], glucose, DEFAULT_NODES[2])
		last = {}
		for name in SCENARIO_NAMES:
			result = run_simulation(SimConfig(scenario=name, max_rounds=80000, nodes=nodes))
			self.assertIsNotNone(result.last_node_dead_round, name)
			self.assertEqual(result.records[-1].alive, 0)
			last[name] = result.last_node_dead_round
		self.assertGreater(last[WALKING], last[SLOW_RUNNING])
		self.assertGreater(last[SLOW_RUNNING], last[FAST_RUNNING])

	def test_last_node_censored_under_defaults(self):
		"""The heartbeat node outlives the default round cap"""
		result = run_simulation(SimConfig(scenario=FAST_RUNNING))
		self.assertIsNone(result.last_node_dead_round)
		self.assertIsNone(result.death_rounds[SensorKind.HEARTBEAT])

	def test_energy_conservation(self):
		"""Residual plus transmitted energy equals the initial node energy every round"""
		for scenario in SCENARIO_NAMES:
			with self.subTest(scenario=scenario):
				result = run_simulation(SimConfig(scenario=scenario, max_rounds=11000, noise=True))
				self.assertEqual(len(result.records), 11000)
				for record in result.records:
					self.assertAlmostEqual(record.residual_energy + record.tx_energy,
										   result.initial_node_energy, places=9, msg=record.round)

	def test_invalid_config(self):
		"""Every offending field is reported"""
		with self.assertRaises(ConfigError) as ctx:
			run_simulation(SimConfig(scenario=WALKING, max_rounds=0, num_runs=0))
		joined = "\n".join(ctx.exception.violations)
		self.assertIn("simulation.max_rounds", joined)
		self.assertIn("simulation.runs", joined)

	def test_needs_single_scenario(self):
		"""A single run cannot use the 'all' selector"""
		with self.assertRaises(ConfigError):
			run_simulation(SimConfig())

	def test_randomized_series_invariants(self):
		"""Alive, packets and energies stay monotone over randomized noisy configs up to 20000 rounds"""
		rng = np.random.default_rng(2024)
		for case in range(100):
			nodes = tuple(
				replace(spec, initial_energy=float(rng.uniform(1e-4, 5e-3)),
						distance=float(rng.uniform(0.05, 1.5)))
				for spec in DEFAULT_NODES
			)
			nodes = (replace(nodes[0], hard_threshold=float(rng.uniform(36.9, 37.6))),) + nodes[1:]
			cfg = SimConfig(
				scenario=SCENARIO_NAMES[int(rng.integers(len(SCENARIO_NAMES)))],
				max_rounds=int(rng.integers(2000, 20001)) if case % 10 == 0 else int(rng.integers(50, 400)),
				noise=True,
				nodes=nodes,
			)
			result = run_simulation(cfg, seed=int(rng.integers(1_000_000)))
			records = result.records
			for prev, cur in zip(records, records[1:]):
				self.assertLessEqual(cur.alive, prev.alive, case)
				self.assertGreaterEqual(cur.packets, prev.packets, case)
				self.assertLessEqual(cur.soldier_energy, prev.soldier_energy, case)
				self.assertLessEqual(cur.residual_energy, prev.residual_energy + 1e-15, case)
			self.assertEqual(result.total_throughput, sum(result.packets_by_kind.values()))


class TestRunExperiment(unittest.TestCase):
	def test_noise_off_runs_identical(self):
		"""Without noise every run is the same and every half-width is 0"""
		summary = run_experiment(SimConfig(scenario=FAST_RUNNING, max_rounds=8000)).scenarios[FAST_RUNNING]
		self.assertEqual(len(set(summary.runs)), 1)
		for metric in (summary.first_node_dead, summary.throughput, summary.fatigue_round):
			self.assertEqual(metric.half_width, 0.0)
		self.assertEqual(summary.fatigue_round.mean, 3811)
		for name in ("alive", "packets", "soldier_energy", "residual_energy"):
			self.assertTrue(np.all(summary.series.half_widths[name] == 0.0))

	def test_single_run_zero_width(self):
		"""One run has no spread"""
		summary = run_experiment(SimConfig(scenario=WALKING, num_runs=1, max_rounds=2000, noise=True))
		self.assertEqual(summary.scenarios[WALKING].throughput.half_width, 0.0)

	def test_early_stops_keep_alive_series_non_increasing(self):
		"""Runs that end at different rounds still give a non-increasing mean alive series"""
		scenarios = dict(SimConfig().scenarios)
		scenarios[WALKING] = replace(scenarios[WALKING], drain_rate=50.0)
		nodes = tuple(replace(spec, initial_energy=2e-4) for spec in DEFAULT_NODES)
		cfg = SimConfig(scenario=WALKING, max_rounds=2000, noise=True, scenarios=scenarios, nodes=nodes)
		runs = simulator.run_scenario_runs(cfg, WALKING)
		lengths = [len(run.records) for run in runs]
		self.assertGreater(len(set(lengths)), 1)
		self.assertLess(max(lengths), cfg.max_rounds)

		series = run_experiment(cfg).scenarios[WALKING].series
		self.assertEqual(len(series.rounds), max(lengths))
		self.assertTrue(np.all(np.diff(series.means["alive"]) <= 0))
		self.assertTrue(np.all(np.diff(series.means["packets"]) >= 0))
		self.assertTrue(np.all(np.diff(series.means["soldier_energy"]) <= 0))
		self.assertEqual(series.means["alive"][-1], 0.0)
		self.assertAlmostEqual(series.means["packets"][-1], np.mean([run.total_throughput for run in runs]))

	def test_noise_on_confidence_intervals(self):
		"""Half-widths match a Student-t interval recomputed from the per-run values"""
		nodes = tuple(replace(spec, initial_energy=0.01) for spec in DEFAULT_NODES)
		cfg = SimConfig(scenario=WALKING, max_rounds=5000, noise=True, nodes=nodes, seed=3)
		summary = run_experiment(cfg).scenarios[WALKING]
		t = stats.t.ppf(0.95, 4)
		for metric, values in (
			(summary.throughput, [run.throughput for run in summary.runs]),
			(summary.first_node_dead, [run.first_node_dead for run in summary.runs]),
		):
			self.assertEqual(metric.censored, 0)
			expected = t * np.std(values, ddof=1) / math.sqrt(5)
			self.assertAlmostEqual(metric.mean, float(np.mean(values)), places=9)
			self.assertTrue(math.isclose(metric.half_width, float(expected), rel_tol=1e-6, abs_tol=1e-12))

	def test_all_scenarios(self):
		"""'all' runs the three scenarios in order"""
		summary = run_experiment(SimConfig(max_rounds=100, num_runs=2))
		self.assertEqual(list(summary.scenarios), list(SCENARIO_NAMES))

	def test_threads_do_not_change_results(self):
		"""Parallel runs give the same summary as sequential ones"""
		cfg = SimConfig(scenario=SLOW_RUNNING, max_rounds=1500, noise=True, num_runs=4)
		sequential = run_experiment(cfg, threads=1).scenarios[SLOW_RUNNING]
		parallel = run_experiment(cfg, threads=4).scenarios[SLOW_RUNNING]
		self.assertEqual(sequential.runs, parallel.runs)
		np.testing.assert_array_equal(sequential.series.means["packets"], parallel.series.means["packets"])

	def test_thread_cap_from_environment(self):
		"""The thread cap reads the environment and falls back to 1"""
		with mock.patch.dict(os.environ, {"WBASN_SIM_THREADS": "4"}):
			self.assertEqual(simulator.thread_cap(), 4)
		with mock.patch.dict(os.environ, {"WBASN_SIM_THREADS": "many"}):
			self.assertEqual(simulator.thread_cap(), 1)
		with mock.patch.dict(os.environ, {"WBASN_SIM_THREADS": "0"}):
			self.assertEqual(simulator.thread_cap(), 1)

	def test_bmr_threshold_keeps_calibration(self):
		"""Taking the threshold from the BMR keeps the calibrated fatigue rounds"""
		fatigue = physiology.FatigueConfig()
		bmr_fatigue = replace(fatigue, fatigue_threshold=physiology.bmr(physiology.BodyProfile()))
		cfg = SimConfig(scenario=FAST_RUNNING, threshold_source=simulator.THRESHOLD_BMR,
						scenarios=simulator.default_scenarios(bmr_fatigue))
		self.assertEqual(run_simulation(cfg).fatigue_round, 3811)
