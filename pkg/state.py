from typing import Annotated, Any, Dict, List, Literal, Optional, TypedDict, Union

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

import config
from services.dynamics import SystemModel
from services.interval import BoxCollection


def merge_dict_reducer(x: Dict[str, Any], y: Dict[str, Any]) -> Dict[str, Any]:
    """Reducer function to merge two dictionaries."""
    if not x:
        return y or {}
    if not y:
        return x or {}
    return {**x, **y}


class ObserverConfig(BaseModel):
    """Tuning parameters of the divide-and-discard observer.

    M_max caps the number of active boxes, I_max the number of Gauss-Seidel
    sweeps per contraction, and K_split / K_prune the number of equal-width
    bins used by refinement and pruning. ``s`` scales box widths per state
    component; when omitted it defaults to the width of the model's X0.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    M_max: int = Field(default=1, ge=1)
    I_max: int = Field(default=config.DEFAULT_I_MAX, ge=1)
    K_split: int = Field(default=config.DEFAULT_K_SPLIT, ge=1)
    K_prune: int = Field(default=config.DEFAULT_K_PRUNE, ge=1)
    s: Optional[List[float]] = None
    rounding: Literal["fast", "rigorous"] = Field(default_factory=config.get_default_rounding)

    @field_validator("s")
    @classmethod
    def _positive_scale(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None:
            if not value:
                raise ValueError("scaling vector must not be empty")
            if any(not (v > 0.0) or not math.isfinite(v) for v in value):
                raise ValueError("scaling vector must be strictly positive and finite")
        return value


class VdPParams(BaseModel):
    """Euler-discretized Van der Pol oscillator parameters."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    mu: float = Field(default=config.VDP_MU, gt=0.0)
    h: float = Field(default=config.VDP_H, gt=0.0)


class TankParams(BaseModel):
    """Multi-tank cascade parameters.

    Index lists are 1-based tank numbers. When omitted, the 30-tank inflow and
    measurement tables are restricted to tanks 1..n; if nothing is left to
    measure, the last tank is measured.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int = Field(default=config.TANK_N, ge=2)
    h: float = Field(default=config.TANK_H, gt=0.0)
    g: float = Field(default=config.TANK_G, gt=0.0)
    kappa: Union[float, List[float]] = config.TANK_KAPPA
    inflow_indices: Optional[List[int]] = None
    measured_indices: Optional[List[int]] = None
    u_level: float = Field(default=config.TANK_INFLOW, ge=0.0)
    level_floor: float = Field(default=config.TANK_LEVEL_FLOOR, gt=0.0)

    @model_validator(mode="after")
    def _check_tanks(self) -> "TankParams":
        kappa = self.kappa_vector()
        if kappa.shape != (self.n,):
            raise ValueError(f"kappa needs {self.n} entries, got {kappa.size}")
        if np.any(kappa <= 0.0):
            raise ValueError("kappa entries must be positive")
        for name, indices in (("inflow_indices", self.inflow_indices),
                              ("measured_indices", self.measured_indices)):
            if indices is None:
                continue
            if not indices:
                raise ValueError(f"{name} must not be empty")
            bad = [i for i in indices if not 1 <= i <= self.n]
            if bad:
                raise ValueError(f"{name} outside 1..{self.n}: {bad}")
            if len(set(indices)) != len(indices):
                raise ValueError(f"{name} contains duplicates")
        return self

    def kappa_vector(self) -> np.ndarray:
        if isinstance(self.kappa, (int, float)):
            return np.full(self.n, float(self.kappa))
        return np.asarray(self.kappa, dtype=float)

    def resolved_inflow(self) -> List[int]:
        if self.inflow_indices is not None:
            return sorted(self.inflow_indices)
        return [i for i in config.TANK30_INFLOW if i <= self.n] or [1]

    def resolved_measured(self) -> List[int]:
        if self.measured_indices is not None:
            return sorted(self.measured_indices)
        return [i for i in config.TANK30_MEASURED if i <= self.n] or [self.n]


class ScenarioConfig(BaseModel):
    """One experiment: benchmark, uncertainty scaling, observer tuning, seeds."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str = "scenario"
    benchmark: Literal["vdp", "tank"] = "vdp"
    vdp: VdPParams = Field(default_factory=VdPParams)
    tank: TankParams = Field(default_factory=TankParams)
    w_factor: float = Field(default=1.0, gt=0.0)
    v_factor: float = Field(default=1.0, gt=0.0)
    observer: ObserverConfig = Field(default_factory=ObserverConfig)
    horizon: int = Field(default=config.DEFAULT_HORIZON, ge=0)
    truth_seed: int = config.DEFAULT_TRUTH_SEED
    direction_seed: int = config.DEFAULT_DIRECTION_SEED
    repeats: int = Field(default=1, ge=1)
    x0: Union[Literal["center", "corner"], List[float]] = "center"

    @model_validator(mode="before")
    @classmethod
    def _benchmark_default_cap(cls, data: Any) -> Any:
        # The interval cap defaults to the tuned value of the chosen benchmark.
        if isinstance(data, dict):
            benchmark = data.get("benchmark", "vdp")
            observer = data.get("observer")
            if observer is None or (isinstance(observer, dict) and "M_max" not in observer):
                observer = dict(observer or {})
                observer["M_max"] = config.DEFAULT_M_MAX.get(benchmark, 1)
                data = {**data, "observer": observer}
        return data


class RunRecord(BaseModel):
    """One CSV row: observer state after step k of one run."""
    scenario: str
    seed: int
    k: int
    M_k: int
    step_ms: float
    hullvol_term: float
    width_term: float
    sound: bool


class MetricReport(BaseModel):
    """Tightness and runtime summary of one run (or the mean of several)."""
    label: str
    v_tilde: float
    w_tilde: float
    mean_step_ms: float
    hullvol_series: List[float] = []
    width_series: List[float] = []
    box_counts: List[int] = []
    step_ms: List[float] = []
    M_max: Optional[int] = None
    sound: bool = True
    v_hat: Optional[float] = None
    w_hat: Optional[float] = None

    @field_validator("v_tilde", "w_tilde", "mean_step_ms")
    @classmethod
    def _finite_nonnegative(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0.0:
            raise ValueError(f"metric must be finite and nonnegative, got {value}")
        return value


class TruthRun(BaseModel):
    """Simulated ground truth: states x_0..N, measurements y_0..N, inputs u_0..N-1."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    states: np.ndarray
    measurements: np.ndarray
    inputs: np.ndarray
    disturbances: np.ndarray
    noise: np.ndarray
    seed: int

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]


class ObserverState(TypedDict, total=False):
    """State flowing through the observer step graph.

    ``collection`` is replaced by every stage; ``stats`` collects per-stage
    counts (splits, discards, prunes) and stage wall times (``*_ms``) and is
    merged across stages.
    """
    collection: BoxCollection
    model: SystemModel
    cfg: ObserverConfig
    scaling: np.ndarray
    u: np.ndarray
    y: np.ndarray
    k: int
    stats: Annotated[Dict[str, float], merge_dict_reducer]
