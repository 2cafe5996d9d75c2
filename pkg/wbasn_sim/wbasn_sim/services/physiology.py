# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

"""
Soldier physiology: synthetic vital signs per movement scenario and the
metabolic energy reserve that decides the state of fatigue.
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional

import numpy as np

WALKING = "walking"
SLOW_RUNNING = "slow_running"
FAST_RUNNING = "fast_running"

SCENARIO_NAMES = (WALKING, SLOW_RUNNING, FAST_RUNNING)

# relative slack on the fatigue comparison, absorbs drift from repeated drains
FATIGUE_REL_TOL = 1e-9


@dataclass(frozen=True)
class BodyProfile:
    """Soldier body measurements for the Harris-Benedict estimate."""

    weight: float = 70.0  # kg
    height: float = 175.0  # cm
    age: float = 25.0  # years

    def violations(self, prefix: str = "body") -> List[str]:
        problems = []
        for name in ("weight", "height", "age"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                problems.append(f"{prefix}.{name}: must be non-negative and finite (got {value!r})")
        return problems


@dataclass(frozen=True)
class SignalBaseline:
    """Resting values every scenario starts from."""

    temperature: float = 37.0  # °C
    heart_rate: float = 70.0  # bpm
    glucose: float = 95.0  # mg/dL
    glucose_floor: float = 55.0  # mg/dL

    def violations(self, prefix: str = "baseline") -> List[str]:
        problems = []
        for name in ("temperature", "heart_rate", "glucose", "glucose_floor"):
            value = getattr(self, name)
            if not math.isfinite(value):
                problems.append(f"{prefix}.{name}: must be finite (got {value!r})")
        if self.glucose < self.glucose_floor:
            problems.append(f"{prefix}.glucose: must not start below glucose_floor "
                            f"({self.glucose!r} < {self.glucose_floor!r})")
        return problems


@dataclass(frozen=True)
class FatigueConfig:
    """Soldier energy budget in joules."""

    initial_energy: float = 2500.0
    fatigue_threshold: float = 1500.0

    def violations(self, prefix: str = "fatigue") -> List[str]:
        if not (math.isfinite(self.initial_energy) and math.isfinite(self.fatigue_threshold)):
            return [f"{prefix}: initial_energy and threshold must be finite"]
        if not 0 < self.fatigue_threshold < self.initial_energy:
            return [f"{prefix}.threshold: must satisfy 0 < threshold < initial_energy "
                    f"(got threshold={self.fatigue_threshold!r}, initial_energy={self.initial_energy!r})"]
        return []

    @property
    def budget(self) -> float:
        """Energy the soldier may spend before fatigue."""
        return self.initial_energy - self.fatigue_threshold


@dataclass(frozen=True)
class ScenarioParams:
    """
    One movement scenario.

    Attributes:
        name (str): walking, slow_running or fast_running
        speed (float): Miles per hour, informational
        drain_rate (float): Soldier energy spent per round (J)
        temp_plateau (float): Temperature the body settles at (°C)
        temp_time_constant (float): Rounds to reach ~63% of the rise
        hr_plateau (float): Heart rate the body settles at (bpm)
        hr_time_constant (float): Rounds to reach ~63% of the rise
        glucose_slope (float): mg/dL per round, negative
        temp_noise, hr_noise, glucose_noise (float): Gaussian stddev per signal
    """

    name: str
    speed: float
    drain_rate: float
    temp_plateau: float
    temp_time_constant: float
    hr_plateau: float
    hr_time_constant: float
    glucose_slope: float
    temp_noise: float = 0.0
    hr_noise: float = 0.0
    glucose_noise: float = 0.0

    def violations(self, prefix: Optional[str] = None) -> List[str]:
        prefix = prefix or f"scenario.{self.name}"
        problems = []
        if self.name not in SCENARIO_NAMES:
            problems.append(f"{prefix}.name: must be one of {', '.join(SCENARIO_NAMES)} (got {self.name!r})")
        if not self.drain_rate > 0:
            problems.append(f"{prefix}.drain_rate: must be > 0 (got {self.drain_rate!r})")
        for name in ("temp_time_constant", "hr_time_constant"):
            if not getattr(self, name) > 0:
                problems.append(f"{prefix}.{name}: must be > 0 (got {getattr(self, name)!r})")
        if not self.glucose_slope < 0:
            problems.append(f"{prefix}.glucose_slope: must be < 0 (got {self.glucose_slope!r})")
        for name in ("temp_noise", "hr_noise", "glucose_noise"):
            if not getattr(self, name) >= 0:
                problems.append(f"{prefix}.{name}: must be >= 0 (got {getattr(self, name)!r})")
        return problems

    def without_noise(self) -> "ScenarioParams":
        return replace(self, temp_noise=0.0, hr_noise=0.0, glucose_noise=0.0)


@dataclass(frozen=True)
class PhysioState:
    """Readings at one round plus the remaining soldier energy."""

    temperature: float
    heart_rate: float
    glucose: float
    soldier_energy: float
    round: int = 0


def calibrated_drain_rate(fatigue: FatigueConfig, fatigue_round: int) -> float:
    """Drain per round that spends the fatigue budget in exactly `fatigue_round` rounds."""
    return fatigue.budget / fatigue_round


def fatigue_round_closed_form(fatigue: FatigueConfig, drain_rate: float) -> int:
    """
    First round at which linear drain reaches the threshold.

    Uses the same relative tolerance as is_fatigued.
    """
    rounds = fatigue.budget / drain_rate
    return max(0, math.ceil(rounds - rounds * FATIGUE_REL_TOL))


def bmr(profile: BodyProfile) -> float:
    """
    Harris-Benedict basal metabolic rate.

    Args:
        profile (BodyProfile): Weight (kg), height (cm), age (years)

    Returns:
        float: kcal/day
    """
    a = 13.75 * profile.weight
    b = 5.003 * profile.height
    c = 6.775 * profile.age
    return 66.5 + a + b - c


def initial_state(baseline: SignalBaseline, fatigue: FatigueConfig) -> PhysioState:
    return PhysioState(
        temperature=baseline.temperature,
        heart_rate=baseline.heart_rate,
        glucose=baseline.glucose,
        soldier_energy=fatigue.initial_energy,
        round=0,
    )


def _approach(base: float, plateau: float, tau: float, t: int) -> float:
    return base + (plateau - base) * (1.0 - math.exp(-t / tau))


def _noise(rng: Optional[np.random.Generator], stddev: float) -> float:
    if rng is None or stddev <= 0:
        return 0.0
    return float(rng.normal(0.0, stddev))


def signal_trajectory(scenario: ScenarioParams, baseline: SignalBaseline, t: int) -> Dict[str, float]:
    """Noise-free readings at round t."""
    return {
        "temperature": _approach(baseline.temperature, scenario.temp_plateau, scenario.temp_time_constant, t),
        "heart_rate": _approach(baseline.heart_rate, scenario.hr_plateau, scenario.hr_time_constant, t),
        "glucose": max(baseline.glucose_floor, baseline.glucose + scenario.glucose_slope * t),
    }


def step_signals(state: PhysioState, scenario: ScenarioParams,
                 rng: Optional[np.random.Generator] = None,
                 baseline: SignalBaseline = SignalBaseline()) -> PhysioState:
    """
    Advance the vital signs by one round.

    Temperature and heart rate rise exponentially toward the scenario plateau,
    glucose falls linearly down to its floor. Noise is drawn fresh each round
    and never accumulates.

    Args:
        state (PhysioState): Readings at round t
        scenario (ScenarioParams): Movement scenario
        rng (np.random.Generator): Seeded noise source, None for no noise
        baseline (SignalBaseline): Resting values

    Returns:
        PhysioState: Readings at round t + 1
    """
    t = state.round + 1
    clean = signal_trajectory(scenario, baseline, t)
    temperature = clean["temperature"] + _noise(rng, scenario.temp_noise)
    heart_rate = clean["heart_rate"] + _noise(rng, scenario.hr_noise)
    glucose = max(baseline.glucose_floor, clean["glucose"] + _noise(rng, scenario.glucose_noise))
    return replace(state, temperature=temperature, heart_rate=heart_rate, glucose=glucose, round=t)


def expend(state: PhysioState, scenario: ScenarioParams) -> PhysioState:
    """Spend one round of soldier energy at the scenario's drain rate, never below zero."""
    return replace(state, soldier_energy=max(0.0, state.soldier_energy - scenario.drain_rate))


def is_fatigued(state: PhysioState, cfg: FatigueConfig) -> bool:
    """True once the soldier's energy has come down to the fatigue threshold (inclusive)."""
    energy, threshold = state.soldier_energy, cfg.fatigue_threshold
    return energy <= threshold or math.isclose(energy, threshold, rel_tol=FATIGUE_REL_TOL)
