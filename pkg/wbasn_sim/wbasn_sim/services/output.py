# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from wbasn_sim import __version__, hooks
from wbasn_sim.wbasn_sim.exceptions import OutputError
from wbasn_sim.wbasn_sim.services.metrics import ExperimentSummary, MetricEstimate, ScenarioSummary
from wbasn_sim.wbasn_sim.utils import logger

# series field -> (file suffix, CSV column)
SERIES_FILES = {
    "alive": ("alive", "alive"),
    "packets": ("packets", "packets"),
    "soldier_energy": ("soldier_energy", "soldier_energy_j"),
    "residual_energy": ("residual_energy", "residual_energy_j"),
}

SUMMARY_COLUMNS = (
    "scenario", "first_dead_mean", "first_dead_ci", "last_dead_mean", "last_dead_ci",
    "throughput_mean", "throughput_ci", "fatigue_round_mean", "fatigue_round_ci", "censored_flags",
)

SUMMARY_FILE = "summary.csv"
MANIFEST_FILE = "manifest.json"


@dataclass
class OutputBundle:
    """Files written for one experiment, all inside out_dir."""

    out_dir: str
    series_files: List[str] = field(default_factory=list)
    summary_file: Optional[str] = None
    manifest_file: Optional[str] = None

    @property
    def files(self) -> List[str]:
        return self.series_files + [path for path in (self.summary_file, self.manifest_file) if path]


def format_number(value: Optional[float]) -> str:
    """Fixed 9-significant-digit rendering; empty for a missing value."""
    if value is None:
        return ""
    return format(float(value), ".9g")


def _censored_flags(summary: ScenarioSummary) -> str:
    def flag(name: str, metric: MetricEstimate) -> str:
        return f"{name}={metric.censored}/{metric.runs}"

    return ";".join([
        flag("first_dead", summary.first_node_dead),
        flag("last_dead", summary.last_node_dead),
        flag("fatigue", summary.fatigue_round),
    ])


def summary_row(summary: ScenarioSummary) -> List[str]:
    row = [summary.scenario]
    for metric in (summary.first_node_dead, summary.last_node_dead, summary.throughput, summary.fatigue_round):
        row += [format_number(metric.mean), format_number(metric.half_width)]
    row.append(_censored_flags(summary))
    return row


def _write_csv(path: str, header: List[str], rows: List[List[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        digest.update(handle.read())
    return digest.hexdigest()


def write_series(summary: ScenarioSummary, out_dir: str) -> List[str]:
    """Write the four per-round series files of one scenario."""
    series = summary.series
    paths = []
    for name, (suffix, column) in SERIES_FILES.items():
        path = os.path.join(out_dir, f"{summary.scenario}_{suffix}.csv")
        means, half_widths = series.means[name], series.half_widths[name]
        rows = [[str(int(r)), format_number(means[i]), format_number(half_widths[i])]
                for i, r in enumerate(series.rounds)]
        _write_csv(path, ["round", column, f"{column}_ci"], rows)
        paths.append(path)
    return paths


def write_bundle(experiment: ExperimentSummary, config_echo: Dict[str, Any], out_dir: str) -> OutputBundle:
    """
    Write series files, the summary table and the manifest.

    The manifest has no timestamps, so identical inputs give byte-identical bundles.

    Args:
        experiment (ExperimentSummary): Aggregated results
        config_echo (Dict[str, Any]): Complete flat config the results came from
        out_dir (str): Output directory, created when missing

    Returns:
        OutputBundle: Paths of everything written

    Raises:
        OutputError: If the directory or any file cannot be written
    """
    bundle = OutputBundle(out_dir=out_dir)
    try:
        os.makedirs(out_dir, exist_ok=True)
        for summary in experiment.scenarios.values():
            bundle.series_files += write_series(summary, out_dir)

        bundle.summary_file = os.path.join(out_dir, SUMMARY_FILE)
        _write_csv(bundle.summary_file, list(SUMMARY_COLUMNS),
                   [summary_row(summary) for summary in experiment.scenarios.values()])

        manifest = {
            "app": hooks.app_name,
            "version": __version__,
            "scenarios": list(experiment.scenarios),
            "seed": experiment.seed,
            "runs": experiment.num_runs,
            "max_rounds": experiment.max_rounds,
            "config": config_echo,
            "files": {os.path.basename(path): _sha256(path)
                      for path in bundle.series_files + [bundle.summary_file]},
        }
        bundle.manifest_file = os.path.join(out_dir, MANIFEST_FILE)
        with open(bundle.manifest_file, "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
            handle.write("\n")
    except OSError as e:
        raise OutputError(f"Cannot write output to {out_dir}: {e}") from e

    logger("output").info(f"Wrote {len(bundle.files)} files to {out_dir}")
    return bundle
