# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

import os
from typing import Any, Dict, Optional

from wbasn_sim.wbasn_sim.doctype.sim_settings.sim_settings import SimSettings
from wbasn_sim.wbasn_sim.exceptions import ConfigError, OutputError
from wbasn_sim.wbasn_sim.services.output import write_bundle
from wbasn_sim.wbasn_sim.services.simulator import run_experiment, thread_cap
from wbasn_sim.wbasn_sim.utils import log_error, logger


def load_settings(config_path=None, scenario=None, seed=None, rounds=None, runs=None, noise=None):
    """
    Load a config file and apply command-line overrides.

    Args:
        config_path (str): Config file or manifest.json, defaults file when omitted
        scenario (str): walking, slow, fast, slow_running, fast_running or all
        seed (int): Base seed
        rounds (int): Round cap
        runs (int): Runs per scenario
        noise (str|bool): on/off

    Returns:
        SimSettings: Settings, not yet validated
    """
    settings = SimSettings.load(config_path)
    return settings.apply_overrides(scenario=scenario, seed=seed, rounds=rounds, runs=runs, noise=noise)


def run(config_path=None, scenario=None, seed=None, rounds=None, runs=None, noise=None,
        out_dir="out", threads=None) -> Dict[str, Any]:
    """
    Run an experiment and write its output bundle.

    Args:
        config_path (str): Config file or manifest.json
        scenario (str): Scenario override
        seed (int): Seed override
        rounds (int): Round cap override
        runs (int): Runs override
        noise (str|bool): Noise override
        out_dir (str): Output directory
        threads (int): Parallel run cap, read from the environment when omitted

    Returns:
        dict: success flag, output files and the per-scenario summary

    Raises:
        ConfigError: If the configuration is invalid
        OutputError: If the bundle cannot be written
    """
    try:
        settings = load_settings(config_path, scenario, seed, rounds, runs, noise)
        cfg = settings.validate()
        experiment = run_experiment(cfg, threads or thread_cap())
        bundle = write_bundle(experiment, settings.as_dict(), out_dir)
    except ConfigError as e:
        log_error(f"Invalid configuration: {e}", "WBASN Sim")
        raise
    except OutputError as e:
        log_error(f"Output error: {e}", "WBASN Sim")
        raise

    summary = {}
    for name, scenario_summary in experiment.scenarios.items():
        summary[name] = {
            "first_node_dead": scenario_summary.first_node_dead.mean,
            "last_node_dead": scenario_summary.last_node_dead.mean,
            "throughput": scenario_summary.throughput.mean,
            "fatigue_round": scenario_summary.fatigue_round.mean,
        }
        logger("api").info(f"{name}: fatigue round {summary[name]['fatigue_round']}, "
                           f"throughput {summary[name]['throughput']}")

    return {
        "success": True,
        "out_dir": os.path.abspath(out_dir),
        "files": [os.path.basename(path) for path in bundle.files],
        "summary": summary,
    }


def validate(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Check a config without running it.

    Returns:
        dict: success flag and the list of violations, empty when valid

    Raises:
        ConfigError: Only if the file cannot be read
    """
    settings = SimSettings.load(config_path)
    problems = settings.violations()
    if problems:
        logger("api").warning(f"{settings.source}: {len(problems)} violation(s)")
    return {"success": not problems, "source": settings.source, "violations": problems}
