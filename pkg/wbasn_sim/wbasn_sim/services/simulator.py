# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from wbasn_sim import hooks
from wbasn_sim.wbasn_sim.exceptions import ConfigError
from wbasn_sim.wbasn_sim.services import physiology
from wbasn_sim.wbasn_sim.services.metrics import ExperimentSummary, summarize_scenario
from wbasn_sim.wbasn_sim.services.nodes import (
    DEFAULT_NODES, BaseStation, Decision, NodeSpec, ReportMode, SensorKind, SensorNode, alive_count,
)
from wbasn_sim.wbasn_sim.services.physiology import (
    FAST_RUNNING, SCENARIO_NAMES, SLOW_RUNNING, WALKING,
    BodyProfile, FatigueConfig, PhysioState, ScenarioParams, SignalBaseline,
)
from wbasn_sim.wbasn_sim.services.radio_energy import DEFAULT_RADIO, RadioParams
from wbasn_sim.wbasn_sim.utils import logger

ALL_SCENARIOS = "all"

THRESHOLD_FIXED = "fixed"
THRESHOLD_BMR = "bmr"

# fatigue rounds the default drain rates are calibrated on
CALIBRATION_FATIGUE_ROUNDS = {WALKING: 10182, SLOW_RUNNING: 6454, FAST_RUNNING: 3811}


def default_scenarios(fatigue: FatigueConfig = FatigueConfig()) -> Dict[str, ScenarioParams]:
    """The three movement scenarios with drain rates calibrated to the reference fatigue rounds."""
    rates = {name: physiology.calibrated_drain_rate(fatigue, rounds)
             for name, rounds in CALIBRATION_FATIGUE_ROUNDS.items()}
    return {
        WALKING: ScenarioParams(
            WALKING, speed=3.0, drain_rate=rates[WALKING],
            temp_plateau=37.6, temp_time_constant=600.0, hr_plateau=105.0, hr_time_constant=600.0,
            glucose_slope=-0.004, temp_noise=0.05, hr_noise=1.0, glucose_noise=0.5),
        SLOW_RUNNING: ScenarioParams(
            SLOW_RUNNING, speed=5.0, drain_rate=rates[SLOW_RUNNING],
            temp_plateau=38.4, temp_time_constant=300.0, hr_plateau=140.0, hr_time_constant=300.0,
            glucose_slope=-0.008, temp_noise=0.05, hr_noise=1.0, glucose_noise=0.5),
        FAST_RUNNING: ScenarioParams(
            FAST_RUNNING, speed=7.0, drain_rate=rates[FAST_RUNNING],
            temp_plateau=39.2, temp_time_constant=150.0, hr_plateau=175.0, hr_time_constant=150.0,
            glucose_slope=-0.015, temp_noise=0.05, hr_noise=1.0, glucose_noise=0.5),
    }


@dataclass(frozen=True)
class SimConfig:
    """
    Everything one simulation or experiment needs.

    Defaults reproduce the reference setup: 1-second rounds, 5 runs,
    0.3 J per node, 2500 J soldier energy and a 1500 J fatigue threshold.
    round_duration is informational; the round is the time unit.
    """

    scenario: str = ALL_SCENARIOS
    max_rounds: int = 20000
    round_duration: float = 1.0
    seed: int = 1
    num_runs: int = 5
    noise: bool = False
    stop_when_exhausted: bool = True
    report_mode: ReportMode = ReportMode.CONTINUOUS
    radio: RadioParams = DEFAULT_RADIO
    fatigue: FatigueConfig = FatigueConfig()
    threshold_source: str = THRESHOLD_FIXED
    body: BodyProfile = BodyProfile()
    baseline: SignalBaseline = SignalBaseline()
    scenarios: Dict[str, ScenarioParams] = field(default_factory=default_scenarios)
    nodes: Tuple[NodeSpec, ...] = DEFAULT_NODES

    def selected_scenarios(self) -> List[str]:
        if self.scenario == ALL_SCENARIOS:
            return [name for name in SCENARIO_NAMES if name in self.scenarios]
        return [self.scenario]

    def effective_fatigue(self) -> FatigueConfig:
        """Fatigue budget with the threshold taken from the configured source."""
        if self.threshold_source == THRESHOLD_BMR:
            return replace(self.fatigue, fatigue_threshold=physiology.bmr(self.body))
        return self.fatigue

    def scenario_params(self, name: Optional[str] = None) -> ScenarioParams:
        """Scenario parameters as a run uses them, noise stripped when noise is off."""
        params = self.scenarios[name or self.scenario]
        return params if self.noise else params.without_noise()

    def violations(self) -> List[str]:
        """
        Collect every invariant violation in the config.

        Returns:
            List[str]: Messages naming the dotted field and the broken rule
        """
        problems: List[str] = []
        if self.max_rounds <= 0:
            problems.append(f"simulation.max_rounds: must be > 0 (got {self.max_rounds!r})")
        if self.num_runs < 1:
            problems.append(f"simulation.runs: must be >= 1 (got {self.num_runs!r})")
        if self.seed < 0:
            problems.append(f"simulation.seed: must be >= 0 (got {self.seed!r})")
        if not self.round_duration > 0:
            problems.append(f"simulation.round_duration: must be > 0 (got {self.round_duration!r})")
        if self.scenario != ALL_SCENARIOS and self.scenario not in self.scenarios:
            problems.append(f"simulation.scenario: unknown scenario {self.scenario!r}")
        if self.threshold_source not in (THRESHOLD_FIXED, THRESHOLD_BMR):
            problems.append(f"fatigue.threshold_source: must be fixed or bmr (got {self.threshold_source!r})")

        problems += self.radio.violations()
        problems += self.body.violations()
        problems += self.baseline.violations()
        if self.threshold_source == THRESHOLD_BMR:
            problems += self.effective_fatigue().violations()
        else:
            problems += self.fatigue.violations()

        for name, params in self.scenarios.items():
            problems += params.violations(f"scenario.{name}")
        problems += self._ordering_violations()

        kinds = [spec.kind for spec in self.nodes]
        if len(set(kinds)) != len(kinds):
            problems.append("node: each sensor kind may appear only once")
        if not self.nodes:
            problems.append("node: at least one sensor node is required")
        for spec in self.nodes:
            problems += spec.violations()
        return problems

    def _ordering_violations(self) -> List[str]:
        if not all(name in self.scenarios for name in SCENARIO_NAMES):
            return []
        walk, slow, fast = (self.scenarios[name] for name in SCENARIO_NAMES)
        problems = []
        for attr in ("temp_plateau", "hr_plateau"):
            if not getattr(walk, attr) <= getattr(slow, attr) <= getattr(fast, attr):
                problems.append(f"scenario.*.{attr}: must be ordered walking <= slow_running <= fast_running")
        if not abs(walk.glucose_slope) <= abs(slow.glucose_slope) <= abs(fast.glucose_slope):
            problems.append("scenario.*.glucose_slope: |slope| must be ordered walking <= slow_running <= fast_running")
        return problems

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class RoundRecord:
    """Network and soldier snapshot at the end of one round."""

    round: int
    alive: int
    packets: int
    residual_energy: float
    soldier_energy: float
    fatigued: bool
    tx_energy: float = 0.0


@dataclass
class RunResult:
    """
    Outcome of one seeded simulation.

    Death and fatigue rounds are None when the event did not happen
    before the round cap.
    """

    scenario: str
    seed: int
    max_rounds: int
    node_count: int
    initial_node_energy: float
    records: List[RoundRecord]
    first_node_dead_round: Optional[int]
    last_node_dead_round: Optional[int]
    total_throughput: int
    fatigue_round: Optional[int]
    death_rounds: Dict[SensorKind, Optional[int]] = field(default_factory=dict)
    packets_by_kind: Dict[SensorKind, int] = field(default_factory=dict)
    rx_energy: float = 0.0
    drain_rate: float = 0.0


@dataclass
class World:
    """Mutable state of one run. Owned by exactly one run at a time."""

    cfg: SimConfig
    scenario: ScenarioParams
    fatigue: FatigueConfig
    physio: PhysioState
    nodes: List[SensorNode]
    bs: BaseStation
    rng: Optional[np.random.Generator]
    tx_costs: List[float]
    round: int = 0
    tx_energy: float = 0.0
    first_dead: Optional[int] = None
    last_dead: Optional[int] = None

    @property
    def exhausted(self) -> bool:
        """No node left and fatigue already reached; nothing more can change but the drain."""
        return self.last_dead is not None and self.bs.fatigue_reported


def new_world(cfg: SimConfig, seed: int, scenario: Optional[str] = None) -> World:
    """
    Build the initial world of one run.

    Args:
        cfg (SimConfig): Validated configuration
        seed (int): Seed for this run's noise source
        scenario (str): Scenario name, defaults to cfg.scenario

    Returns:
        World: State before round 0
    """
    name = scenario or cfg.scenario
    params = cfg.scenario_params(name)
    fatigue = cfg.effective_fatigue()
    nodes = [spec.build(node_id, cfg.report_mode) for node_id, spec in enumerate(cfg.nodes)]
    return World(
        cfg=cfg,
        scenario=params,
        fatigue=fatigue,
        physio=physiology.initial_state(cfg.baseline, fatigue),
        nodes=nodes,
        bs=BaseStation(),
        rng=np.random.default_rng(seed) if cfg.noise else None,
        tx_costs=[node.tx_cost(cfg.radio) for node in nodes],
    )


def run_round(world: World) -> Tuple[World, RoundRecord]:
    """
    Execute one round.

    Order: signals advance, the soldier spends energy, every alive node at
    its sampling round decides and possibly transmits, the base station
    checks fatigue, and the round is recorded. Round 0 observes the initial
    condition, so signals and drain advance from round 1 on.

    Args:
        world (World): State after the previous round, mutated in place

    Returns:
        Tuple[World, RoundRecord]: The advanced world and its snapshot
    """
    t = world.round
    if t > 0:
        world.physio = physiology.step_signals(world.physio, world.scenario, world.rng, world.cfg.baseline)
        world.physio = physiology.expend(world.physio, world.scenario)

    for node, cost in zip(world.nodes, world.tx_costs):
        if not node.is_alive or not node.is_sampling_round(t):
            continue
        reading = node.reading_from(world.physio)
        if node.decide(reading, t) is Decision.SLEEP:
            continue
        if node.transmit(world.bs, world.cfg.radio, reading, t, cost):
            world.tx_energy += cost
        elif world.first_dead is None:
            world.first_dead = t

    alive = alive_count(world.nodes)
    if alive == 0 and world.last_dead is None:
        world.last_dead = t

    fatigued = physiology.is_fatigued(world.physio, world.fatigue)
    if fatigued:
        world.bs.report_fatigue(t, world.physio.soldier_energy)

    record = RoundRecord(
        round=t,
        alive=alive,
        packets=world.bs.total_packets,
        residual_energy=sum(node.residual_energy for node in world.nodes),
        soldier_energy=world.physio.soldier_energy,
        fatigued=fatigued,
        tx_energy=world.tx_energy,
    )
    world.round = t + 1
    return world, record


def run_simulation(cfg: SimConfig, seed: Optional[int] = None, scenario: Optional[str] = None) -> RunResult:
    """
    Run one seeded simulation of one scenario.

    Stops at max_rounds, or earlier once every node is dead and fatigue was
    reached when stop_when_exhausted is set.

    Args:
        cfg (SimConfig): Configuration
        seed (int): Noise seed, defaults to cfg.seed
        scenario (str): Scenario to run, defaults to cfg.scenario

    Returns:
        RunResult: Round records and the lifetime, throughput and fatigue outcomes

    Raises:
        ConfigError: If the configuration is invalid or names no single scenario
    """
    cfg.validate()
    name = scenario or cfg.scenario
    if name not in cfg.scenarios:
        raise ConfigError([f"simulation.scenario: a single scenario is required (got {name!r})"])
    seed = cfg.seed if seed is None else seed

    world = new_world(cfg, seed, name)
    records: List[RoundRecord] = []
    while world.round < cfg.max_rounds:
        world, record = run_round(world)
        records.append(record)
        if cfg.stop_when_exhausted and world.exhausted:
            break

    logger("simulator").debug(f"Run {name} seed={seed}: {len(records)} rounds, "
                              f"{world.bs.total_packets} packets, first dead {world.first_dead}, "
                              f"last dead {world.last_dead}, fatigue {world.bs.fatigue_round}")
    return RunResult(
        scenario=name,
        seed=seed,
        max_rounds=cfg.max_rounds,
        node_count=len(world.nodes),
        initial_node_energy=sum(node.initial_energy for node in world.nodes),
        records=records,
        first_node_dead_round=world.first_dead,
        last_node_dead_round=world.last_dead,
        total_throughput=world.bs.total_packets,
        fatigue_round=world.bs.fatigue_round,
        death_rounds={node.kind: node.death_round for node in world.nodes},
        packets_by_kind=dict(world.bs.packets_received),
        rx_energy=world.bs.rx_energy_accounted,
        drain_rate=world.scenario.drain_rate,
    )


def thread_cap(env_var: str = hooks.threads_env_var) -> int:
    """Parallel run cap from the environment, at least 1."""
    try:
        return max(1, int(os.environ.get(env_var, "1")))
    except ValueError:
        return 1


def run_scenario_runs(cfg: SimConfig, scenario: str, threads: Optional[int] = None) -> List[RunResult]:
    """
    Run num_runs simulations of one scenario with seeds seed, seed + 1, ...

    Returns:
        List[RunResult]: In seed order, whatever order the runs finished in
    """
    cfg.validate()
    seeds = [cfg.seed + offset for offset in range(cfg.num_runs)]
    workers = min(len(seeds), threads or 1)
    if workers <= 1:
        return [run_simulation(cfg, seed, scenario) for seed in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda seed: run_simulation(cfg, seed, scenario), seeds))


def run_experiment(cfg: SimConfig, threads: Optional[int] = None) -> ExperimentSummary:
    """
    Run every selected scenario num_runs times and aggregate.

    Args:
        cfg (SimConfig): Configuration, cfg.scenario may be "all"
        threads (int): Cap on parallel runs, 1 runs them in sequence

    Returns:
        ExperimentSummary: Per-scenario means and 90% confidence intervals
    """
    cfg.validate()
    summary = ExperimentSummary(seed=cfg.seed, num_runs=cfg.num_runs, max_rounds=cfg.max_rounds)
    for name in cfg.selected_scenarios():
        logger("simulator").info(f"Running {cfg.num_runs} x {name} (seed {cfg.seed}, {cfg.max_rounds} rounds)")
        runs = run_scenario_runs(cfg, name, threads)
        summary.scenarios[name] = summarize_scenario(name, runs)
    return summary
