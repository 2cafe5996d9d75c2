# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

"""
Summary statistics over simulation runs: lifetime, throughput and fatigue
per run, and means with Student-t confidence intervals across runs.
"""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from wbasn_sim.wbasn_sim.exceptions import DomainError

if TYPE_CHECKING:
    from wbasn_sim.wbasn_sim.services.simulator import RunResult

DEFAULT_LEVEL = 0.90

# two-sided 90% Student-t quantiles t(0.95, df), df = 1..30
T_QUANTILES_90 = (
    6.313752, 2.919986, 2.353363, 2.131847, 2.015048,
    1.943180, 1.894579, 1.859548, 1.833113, 1.812461,
    1.795885, 1.782288, 1.770933, 1.761310, 1.753050,
    1.745884, 1.739607, 1.734064, 1.729133, 1.724718,
    1.720743, 1.717144, 1.713872, 1.710882, 1.708141,
    1.705618, 1.703288, 1.701131, 1.699127, 1.697261,
)

SERIES_FIELDS = ("alive", "packets", "soldier_energy", "residual_energy")


@dataclass(frozen=True)
class RunSummary:
    """
    Table-style outcome of one run.

    A lifetime or fatigue round that did not happen before the round cap is
    None with its censored flag set; censored_at holds the cap.
    """

    first_node_dead: Optional[int]
    last_node_dead: Optional[int]
    throughput: int
    fatigue_round: Optional[int]
    first_censored: bool
    last_censored: bool
    fatigue_censored: bool
    censored_at: int


@dataclass(frozen=True)
class MetricEstimate:
    """Mean and 90% CI half-width over the uncensored runs."""

    mean: Optional[float]
    half_width: Optional[float]
    runs: int
    censored: int = 0


@dataclass
class SeriesSummary:
    """Per-round means and CI half-widths, one array per series field."""

    rounds: np.ndarray
    means: Dict[str, np.ndarray]
    half_widths: Dict[str, np.ndarray]


@dataclass
class ScenarioSummary:
    scenario: str
    first_node_dead: MetricEstimate
    last_node_dead: MetricEstimate
    throughput: MetricEstimate
    fatigue_round: MetricEstimate
    series: SeriesSummary
    runs: List[RunSummary] = field(default_factory=list)


@dataclass
class ExperimentSummary:
    """Aggregated results of an experiment, keyed by scenario name."""

    seed: int
    num_runs: int
    max_rounds: int
    scenarios: Dict[str, ScenarioSummary] = field(default_factory=dict)


def t_quantile(level: float, df: int) -> float:
    """
    Two-sided Student-t critical value.

    Uses the embedded table for 90% and df <= 30, scipy otherwise.
    """
    if df < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df}")
    if math.isclose(level, DEFAULT_LEVEL) and df <= len(T_QUANTILES_90):
        return T_QUANTILES_90[df - 1]
    return float(stats.t.ppf((1.0 + level) / 2.0, df))


def confidence_interval(values: Sequence[float], level: float = DEFAULT_LEVEL) -> Tuple[float, float]:
    """
    Mean and Student-t confidence half-width of a sample.

    Args:
        values (Sequence[float]): At least one value
        level (float): Two-sided confidence level

    Returns:
        Tuple[float, float]: (mean, half_width); half_width is 0 for a single
        value or a constant sample

    Raises:
        DomainError: If values is empty or level is outside (0, 1)
    """
    if not 0 < level < 1:
        raise DomainError(f"confidence level must lie in (0, 1), got {level!r}")
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise DomainError("confidence interval needs at least one value")
    if data.size == 1 or np.all(data == data[0]):
        return float(data[0]), 0.0
    mean = float(np.mean(data))
    sd = float(np.std(data, ddof=1))
    return mean, t_quantile(level, data.size - 1) * sd / math.sqrt(data.size)


def summarize(run: "RunResult") -> RunSummary:
    """
    Derive the table metrics of one run from its round records alone.

    First node dead is the first round with fewer alive nodes than at the
    start, last node dead the first round with none alive, throughput the
    final packet count and fatigue the first fatigued round.
    """
    first = last = fatigue = None
    for record in run.records:
        if first is None and record.alive < run.node_count:
            first = record.round
        if last is None and record.alive == 0:
            last = record.round
        if fatigue is None and record.fatigued:
            fatigue = record.round
        if first is not None and last is not None and fatigue is not None:
            break
    throughput = run.records[-1].packets if run.records else 0
    return RunSummary(
        first_node_dead=first,
        last_node_dead=last,
        throughput=throughput,
        fatigue_round=fatigue,
        first_censored=first is None,
        last_censored=last is None,
        fatigue_censored=fatigue is None,
        censored_at=run.max_rounds,
    )


def estimate(values: Sequence[Optional[float]], level: float = DEFAULT_LEVEL) -> MetricEstimate:
    """Mean and CI over the values that are not censored (None)."""
    observed = [value for value in values if value is not None]
    censored = len(values) - len(observed)
    if not observed:
        return MetricEstimate(None, None, len(values), censored)
    mean, half_width = confidence_interval(observed, level)
    return MetricEstimate(mean, half_width, len(values), censored)


def _extended_series(run: "RunResult", name: str, length: int) -> np.ndarray:
    values = np.array([getattr(record, name) for record in run.records], dtype=float)
    extra = length - len(values)
    if extra <= 0 or not len(values):
        return values
    if name == "soldier_energy":
        tail = np.maximum(values[-1] - run.drain_rate * np.arange(1, extra + 1), 0.0)
    else:
        tail = np.full(extra, values[-1])
    return np.concatenate([values, tail])


def _series_matrix(runs: Sequence["RunResult"], name: str, length: int) -> np.ndarray:
    return np.vstack([_extended_series(run, name, length) for run in runs])


def aggregate_series(runs: Sequence["RunResult"], level: float = DEFAULT_LEVEL) -> SeriesSummary:
    """
    Per-round mean and CI half-width of every series field across runs.

    A run that stopped early stays in the average with its last round
    carried forward: alive, packets and residual energy frozen, soldier
    energy still draining at the scenario rate down to 0.
    """
    length = max((len(run.records) for run in runs), default=0)
    if not runs or length == 0:
        empty = {name: np.zeros(0) for name in SERIES_FIELDS}
        return SeriesSummary(rounds=np.arange(0), means=empty, half_widths=dict(empty))

    n = len(runs)
    quantile = t_quantile(level, n - 1) if n > 1 else 0.0
    means, half_widths = {}, {}
    for name in SERIES_FIELDS:
        matrix = _series_matrix(runs, name, length)
        low = matrix.min(axis=0)
        constant = low == matrix.max(axis=0)
        mean = np.where(constant, low, matrix.mean(axis=0))
        std = matrix.std(axis=0, ddof=1) if n > 1 else np.zeros(length)
        half_widths[name] = np.where(constant, 0.0, quantile * std / math.sqrt(n))
        means[name] = mean
    return SeriesSummary(rounds=np.arange(length), means=means, half_widths=half_widths)


def summarize_scenario(scenario: str, runs: Sequence["RunResult"], level: float = DEFAULT_LEVEL) -> ScenarioSummary:
    """
    Aggregate the runs of one scenario.

    Args:
        scenario (str): Scenario name
        runs (Sequence[RunResult]): Runs in seed order
        level (float): Confidence level

    Returns:
        ScenarioSummary: Metric estimates, per-round series and per-run summaries
    """
    per_run = [summarize(run) for run in runs]
    return ScenarioSummary(
        scenario=scenario,
        first_node_dead=estimate([s.first_node_dead for s in per_run], level),
        last_node_dead=estimate([s.last_node_dead for s in per_run], level),
        throughput=estimate([s.throughput for s in per_run], level),
        fatigue_round=estimate([s.fatigue_round for s in per_run], level),
        series=aggregate_series(runs, level),
        runs=per_run,
    )
