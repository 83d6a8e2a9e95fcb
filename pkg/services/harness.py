"""Experiment harness: scenario loading, runs, M_max sweeps, comparisons and CSV output."""

import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

import config
from errors import ConfigError
from observer import iterate_run
from services.benchmarks import initial_state, model_from_scenario, simulate_truth
from services.metrics import DirectionSet, hull_volume_term, normalize, width_term
from services.utils import log
from state import MetricReport, ObserverConfig, RunRecord, ScenarioConfig


def _deep_merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_scenario(path: Optional[Union[str, Path]] = None, preset: Optional[str] = None,
                  overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """Build a scenario from a preset, a YAML file and explicit overrides, in that order.

    Args:
        path: YAML scenario file (optional)
        preset: Name of a built-in preset (see config.SCENARIO_PRESETS)
        overrides: Nested dict applied last

    Returns:
        The validated ScenarioConfig

    Raises:
        ConfigError: on unknown presets, unreadable files or schema violations
    """
    payload: Dict[str, Any] = {}
    source = "defaults"
    if preset is not None:
        try:
            payload = config.get_preset(preset)
        except KeyError:
            known = ", ".join(sorted(config.SCENARIO_PRESETS))
            raise ConfigError(f"Unknown preset {preset!r} (known: {known})") from None
        source = f"preset {preset}"

    if path is not None:
        path = Path(path)
        try:
            with open(path, "r") as f:
                loaded = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"Cannot read scenario file {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"Scenario file {path} must contain a mapping")
        payload = _deep_merge(payload, loaded)
        source = str(path)

    if overrides:
        payload = _deep_merge(payload, overrides)

    try:
        scenario = ScenarioConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"Invalid scenario ({source}): {e}") from e

    log(f"Loaded scenario '{scenario.id}' from {source}", node="harness", level="DEBUG")
    return scenario


def with_overrides(scenario: ScenarioConfig, mmax: Optional[int] = None, seed: Optional[int] = None,
                   rigorous: Optional[bool] = None, repeats: Optional[int] = None,
                   horizon: Optional[int] = None) -> ScenarioConfig:
    """Apply command-line overrides to a loaded scenario.

    Raises:
        ConfigError: if an override breaks the schema
    """
    observer_update: Dict[str, Any] = {}
    if mmax is not None:
        observer_update["M_max"] = mmax
    if rigorous:
        observer_update["rounding"] = config.ROUNDING_RIGOROUS

    update: Dict[str, Any] = {}
    if observer_update:
        update["observer"] = scenario.observer.model_copy(update=observer_update)
    if seed is not None:
        update["truth_seed"] = seed
    if repeats is not None:
        update["repeats"] = repeats
    if horizon is not None:
        update["horizon"] = horizon
    if not update:
        return scenario

    # model_copy skips validation, so re-validate the result
    try:
        return ScenarioConfig.model_validate(scenario.model_copy(update=update).model_dump())
    except ValidationError as e:
        raise ConfigError(f"Invalid command-line override: {e}") from e


def single_set_config(cfg: ObserverConfig) -> ObserverConfig:
    """The same tuning with a single box: the classical interval observer."""
    return cfg.model_copy(update={"M_max": 1})


def _with_cap(scenario: ScenarioConfig, m_max: int) -> ScenarioConfig:
    return scenario.model_copy(update={
        "observer": scenario.observer.model_copy(update={"M_max": m_max}),
    })


def run_scenario(scenario: ScenarioConfig, seed: Optional[int] = None,
                 label: Optional[str] = None) -> Tuple[MetricReport, List[RunRecord]]:
    """Simulate the truth, run the observer and score every step.

    The hull-volume and mean-width metrics average the steps k = 1..N (the
    initial collection alone when N = 0). Step time covers the step graph
    only.

    Raises:
        InconsistentMeasurements: with the failing step index
        DomainViolation: if a tank level enclosure leaves the model's domain
    """
    seed = scenario.truth_seed if seed is None else seed
    model = model_from_scenario(scenario)
    truth = simulate_truth(model, initial_state(model, scenario.x0), None, scenario.horizon, seed)
    dirs = DirectionSet.sample(model.n, scenario.direction_seed)

    records: List[RunRecord] = []
    for k, collection, step_ms in iterate_run(model, scenario.observer, truth.inputs,
                                              truth.measurements):
        sound = collection.contains_point(truth.states[k])
        if not sound:
            log(f"k={k}: true state {truth.states[k]} is outside the enclosure",
                node="harness", level="WARNING")
        records.append(RunRecord(
            scenario=scenario.id,
            seed=seed,
            k=k,
            M_k=len(collection),
            step_ms=step_ms,
            hullvol_term=hull_volume_term(collection),
            width_term=width_term(collection, dirs),
            sound=sound,
        ))

    scored = records[1:] or records
    report = MetricReport(
        label=label or scenario.id,
        v_tilde=float(np.mean([r.hullvol_term for r in scored])),
        w_tilde=float(np.mean([r.width_term for r in scored])),
        mean_step_ms=float(np.mean([r.step_ms for r in records[1:]])) if len(records) > 1 else 0.0,
        hullvol_series=[r.hullvol_term for r in records],
        width_series=[r.width_term for r in records],
        box_counts=[r.M_k for r in records],
        step_ms=[r.step_ms for r in records],
        M_max=scenario.observer.M_max,
        sound=all(r.sound for r in records),
    )
    log(
        f"{report.label} seed={seed} M_max={report.M_max}: v~={report.v_tilde:.4f} "
        f"w~={report.w_tilde:.4f} {report.mean_step_ms:.3f} ms/step sound={report.sound}",
        node="harness",
    )
    return report, records


def run_repeats(scenario: ScenarioConfig,
                label: Optional[str] = None) -> Tuple[MetricReport, List[RunRecord]]:
    """Run seeds truth_seed .. truth_seed + repeats - 1 and average their reports."""
    reports: List[MetricReport] = []
    records: List[RunRecord] = []
    for r in range(scenario.repeats):
        report, rows = run_scenario(scenario, scenario.truth_seed + r, label)
        reports.append(report)
        records.extend(rows)
    if len(reports) == 1:
        return reports[0], records

    averaged = MetricReport(
        label=reports[0].label,
        v_tilde=float(np.mean([r.v_tilde for r in reports])),
        w_tilde=float(np.mean([r.w_tilde for r in reports])),
        mean_step_ms=float(np.mean([r.mean_step_ms for r in reports])),
        M_max=scenario.observer.M_max,
        sound=all(r.sound for r in reports),
    )
    return averaged, records


def sweep(scenario: ScenarioConfig, m_max_values: Sequence[int]) -> pd.DataFrame:
    """One aggregated row per interval cap, all with the same truth seeds."""
    if not m_max_values:
        raise ConfigError("sweep needs at least one M_max value")
    rows = []
    for m_max in m_max_values:
        report, _ = run_repeats(_with_cap(scenario, m_max))
        rows.append({
            "scenario": scenario.id,
            "seed": scenario.truth_seed,
            "repeats": scenario.repeats,
            "M_max": m_max,
            "v_tilde": report.v_tilde,
            "w_tilde": report.w_tilde,
            "mean_step_ms": report.mean_step_ms,
            "sound": report.sound,
        })
    return pd.DataFrame(rows, columns=config.SWEEP_CSV_COLUMNS)


def compare(scenario: ScenarioConfig, variants: Optional[Sequence[int]] = None) -> pd.DataFrame:
    """Normalized comparison of observer variants that differ in M_max.

    By default the single-set observer is compared against the scenario's
    own interval cap.
    """
    if variants is None:
        variants = [single_set_config(scenario.observer).M_max, scenario.observer.M_max]
    if not variants:
        raise ConfigError("compare needs at least one variant")

    reports = []
    for m_max in variants:
        name = "single-set" if m_max == 1 else f"dd-{m_max}"
        report, _ = run_repeats(_with_cap(scenario, m_max), label=name)
        reports.append(report)

    rows = [{
        "scenario": scenario.id,
        "variant": r.label,
        "M_max": r.M_max,
        "v_tilde": r.v_tilde,
        "w_tilde": r.w_tilde,
        "mean_step_ms": r.mean_step_ms,
        "v_hat": r.v_hat,
        "w_hat": r.w_hat,
        "sound": r.sound,
    } for r in normalize(reports)]
    return pd.DataFrame(rows, columns=config.COMPARE_CSV_COLUMNS)


def records_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in records], columns=config.RUN_CSV_COLUMNS)


def format_table(frame: pd.DataFrame) -> str:
    """Plain-text table for the terminal."""
    return frame.to_string(index=False, float_format=lambda v: f"{v:.3f}")


def write_csv(frame: pd.DataFrame, out: Optional[Union[str, Path, TextIO]] = None) -> None:
    """Write a table as CSV preceded by the schema comment line.

    Args:
        frame: Table to write
        out: File path, open text stream, or None for stdout
    """
    if out is None:
        out = sys.stdout
    if isinstance(out, (str, Path)):
        path = Path(out)
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            write_csv(frame, f)
        log(f"Wrote {len(frame)} row(s) to {path}", node="harness")
        return
    out.write(config.CSV_SCHEMA_COMMENT + "\n")
    frame.to_csv(out, index=False, lineterminator="\n")
