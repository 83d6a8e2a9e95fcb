"""Benchmark systems: Euler-discretized Van der Pol oscillator and multi-tank cascade.

Both models supply point dynamics, a natural interval extension and an
analytic interval Jacobian enclosure over [x; w]. The point dynamics and the
interval extension evaluate the same expressions in the same order, so a
degenerate box maps to exactly f(x) in fast mode.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

import config
from errors import DomainViolation, InitialStateOutsideX0
from services.dynamics import SystemModel
from services.interval import (
    ArrayPair,
    Box,
    BoxCollection,
    add_arrays,
    div_arrays,
    mul_arrays,
    scale_arrays,
    scale_box,
    sqr_arrays,
    sqrt_arrays,
    sub_arrays,
)
from services.utils import log
from state import ScenarioConfig, TankParams, TruthRun, VdPParams


@dataclass(frozen=True, eq=False)
class VanDerPolModel(SystemModel):
    """x1+ = x1 + h x2 + w1,  x2+ = x2 + h (mu (1 - x1^2) x2 - x1) + w2,  y = x1 + v."""
    mu: float
    h: float
    W: Box
    V: Box
    X0: Box
    n: int = 2
    m: int = 0
    C: np.ndarray = field(default_factory=lambda: np.array([[1.0, 0.0]]))

    def f(self, x, u, w):
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        x1_next = x1 + self.h * x2 + w[..., 0]
        x2_next = x2 + self.h * (self.mu * (1.0 - x1 * x1) * x2 - x1) + w[..., 1]
        return np.stack([x1_next, x2_next], axis=-1)

    def f_enclosure(self, xlo, xhi, u, wlo, whi, rigorous: bool = False) -> ArrayPair:
        x1lo, x1hi = xlo[..., 0], xhi[..., 0]
        x2lo, x2hi = xlo[..., 1], xhi[..., 1]

        tlo, thi = scale_arrays(self.h, x2lo, x2hi, rigorous)
        r1lo, r1hi = add_arrays(x1lo, x1hi, tlo, thi, rigorous)
        r1lo, r1hi = add_arrays(r1lo, r1hi, wlo[..., 0], whi[..., 0], rigorous)

        slo, shi = sqr_arrays(x1lo, x1hi, rigorous)
        alo, ahi = sub_arrays(1.0, 1.0, slo, shi, rigorous)
        alo, ahi = scale_arrays(self.mu, alo, ahi, rigorous)
        alo, ahi = mul_arrays(alo, ahi, x2lo, x2hi, rigorous)
        alo, ahi = sub_arrays(alo, ahi, x1lo, x1hi, rigorous)
        alo, ahi = scale_arrays(self.h, alo, ahi, rigorous)
        r2lo, r2hi = add_arrays(x2lo, x2hi, alo, ahi, rigorous)
        r2lo, r2hi = add_arrays(r2lo, r2hi, wlo[..., 1], whi[..., 1], rigorous)

        return np.stack([r1lo, r2lo], axis=-1), np.stack([r1hi, r2hi], axis=-1)

    def jac_enclosure_arrays(self, xlo, xhi, u, wlo, whi, rigorous: bool = False) -> ArrayPair:
        count = xlo.shape[0]
        x1lo, x1hi = xlo[:, 0], xhi[:, 0]
        x2lo, x2hi = xlo[:, 1], xhi[:, 1]

        jlo = np.zeros((count, 2, 4))
        jhi = np.zeros((count, 2, 4))
        # d x1+ / d[x1, x2, w1, w2] = [1, h, 1, 0]
        jlo[:, 0, 0] = jhi[:, 0, 0] = 1.0
        jlo[:, 0, 1] = jhi[:, 0, 1] = self.h
        jlo[:, 0, 2] = jhi[:, 0, 2] = 1.0

        # d x2+ / d x1 = h (-2 mu x1 x2 - 1)
        plo, phi = mul_arrays(x1lo, x1hi, x2lo, x2hi, rigorous)
        plo, phi = scale_arrays(-2.0 * self.mu, plo, phi, rigorous)
        plo, phi = sub_arrays(plo, phi, 1.0, 1.0, rigorous)
        jlo[:, 1, 0], jhi[:, 1, 0] = scale_arrays(self.h, plo, phi, rigorous)

        # d x2+ / d x2 = 1 + h mu (1 - x1^2)
        slo, shi = sqr_arrays(x1lo, x1hi, rigorous)
        alo, ahi = sub_arrays(1.0, 1.0, slo, shi, rigorous)
        alo, ahi = scale_arrays(self.mu, alo, ahi, rigorous)
        alo, ahi = scale_arrays(self.h, alo, ahi, rigorous)
        jlo[:, 1, 1], jhi[:, 1, 1] = add_arrays(1.0, 1.0, alo, ahi, rigorous)

        jlo[:, 1, 3] = jhi[:, 1, 3] = 1.0
        return jlo, jhi


@dataclass(frozen=True, eq=False)
class TankModel(SystemModel):
    """Cascade of n tanks draining by Torricelli's law into their successor.

    x_j+ = x_j + h (k_j sqrt(2g) (sqrt(x_{j-1}) - sqrt(x_j)) + (B u)_j) + w_j,
    with the upstream term absent for the first tank.
    """
    h: float
    g: float
    kappa: np.ndarray
    B: np.ndarray
    C: np.ndarray
    W: Box
    V: Box
    X0: Box
    u_level: float = config.TANK_INFLOW
    level_floor: float = config.TANK_LEVEL_FLOOR

    @property
    def n(self) -> int:
        return self.kappa.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def _coefficient(self, rigorous: bool) -> ArrayPair:
        rlo, rhi = sqrt_arrays(2.0 * self.g, 2.0 * self.g, rigorous)
        return scale_arrays(self.kappa, rlo, rhi, rigorous)

    def f(self, x, u, w):
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        coef = self.kappa * np.sqrt(2.0 * self.g)
        root = np.sqrt(x)
        upstream = np.concatenate([np.zeros_like(root[..., :1]), root[..., :-1]], axis=-1)
        inflow = self.B @ self._inputs(u)
        return x + self.h * (coef * (upstream - root) + inflow) + w

    def f_enclosure(self, xlo, xhi, u, wlo, whi, rigorous: bool = False) -> ArrayPair:
        clo, chi = self._coefficient(rigorous)
        rlo, rhi = sqrt_arrays(xlo, xhi, rigorous)
        zeros = np.zeros_like(rlo[..., :1])
        ulo = np.concatenate([zeros, rlo[..., :-1]], axis=-1)
        uhi = np.concatenate([zeros, rhi[..., :-1]], axis=-1)
        inflow = self.B @ self._inputs(u)

        dlo, dhi = sub_arrays(ulo, uhi, rlo, rhi, rigorous)
        tlo, thi = mul_arrays(clo, chi, dlo, dhi, rigorous)
        tlo, thi = add_arrays(tlo, thi, inflow, inflow, rigorous)
        tlo, thi = scale_arrays(self.h, tlo, thi, rigorous)
        out_lo, out_hi = add_arrays(xlo, xhi, tlo, thi, rigorous)
        return add_arrays(out_lo, out_hi, wlo, whi, rigorous)

    def jac_enclosure_arrays(self, xlo, xhi, u, wlo, whi, rigorous: bool = False) -> ArrayPair:
        count, n = xlo.shape
        # d sqrt(x)/dx = 1 / (2 sqrt(x)) is only bounded on [level_floor, inf)
        if np.any(xlo < self.level_floor):
            raise DomainViolation(
                f"tank level enclosure reaches {float(np.min(xlo)):g}, below the "
                f"level floor {self.level_floor:g}; the Jacobian bound would be unsound"
            )
        rlo, rhi = sqrt_arrays(xlo, xhi, rigorous)
        rlo, rhi = scale_arrays(2.0, rlo, rhi, rigorous)
        qlo, qhi = div_arrays(1.0, 1.0, rlo, rhi, rigorous)

        clo, chi = self._coefficient(rigorous)
        glo, ghi = mul_arrays(clo, chi, qlo, qhi, rigorous)
        glo, ghi = scale_arrays(self.h, glo, ghi, rigorous)

        jlo = np.zeros((count, n, 2 * n))
        jhi = np.zeros((count, n, 2 * n))
        diag = np.arange(n)
        jlo[:, diag, diag], jhi[:, diag, diag] = sub_arrays(1.0, 1.0, glo, ghi, rigorous)
        # tank j receives the outflow of tank j-1
        slo, shi = mul_arrays(clo[1:], chi[1:], qlo[:, :-1], qhi[:, :-1], rigorous)
        jlo[:, diag[1:], diag[:-1]], jhi[:, diag[1:], diag[:-1]] = scale_arrays(
            self.h, slo, shi, rigorous)
        jlo[:, diag, n + diag] = 1.0
        jhi[:, diag, n + diag] = 1.0
        return jlo, jhi

    def domain_guard(self, collection: BoxCollection) -> BoxCollection:
        """Intersect boxes with the nonnegative orthant.

        Raises:
            DomainViolation: if a box lies entirely below zero
        """
        if len(collection) == 0:
            return collection
        if np.any(collection.hi < 0.0):
            raise DomainViolation("tank level enclosure lies entirely below zero")
        return BoxCollection(np.maximum(collection.lo, 0.0), collection.hi)

    def default_inputs(self, steps: int) -> np.ndarray:
        return np.full((steps, self.m), self.u_level)

    def check_state(self, x: np.ndarray) -> None:
        if np.any(x < 0.0):
            raise DomainViolation(f"simulated tank level became negative: {x.min():g}")


def vdp_model(params: Optional[VdPParams] = None, X0: Optional[Box] = None,
              W: Optional[Box] = None, V: Optional[Box] = None) -> VanDerPolModel:
    """Build the Van der Pol benchmark; omitted sets take the standard defaults."""
    params = params or VdPParams()
    return VanDerPolModel(
        mu=params.mu,
        h=params.h,
        X0=X0 if X0 is not None else Box.unit(2, config.VDP_X0_RADIUS),
        W=W if W is not None else Box.unit(2, config.VDP_W_RADIUS),
        V=V if V is not None else Box.unit(1, config.VDP_V_RADIUS),
    )


def tank_model(params: Optional[TankParams] = None, X0: Optional[Box] = None,
               W: Optional[Box] = None, V: Optional[Box] = None) -> TankModel:
    """Build the multi-tank benchmark.

    B routes one unit-gain input channel to each inflow tank and C selects the
    measured tanks.
    """
    params = params or TankParams()
    n = params.n
    inflow = params.resolved_inflow()
    measured = params.resolved_measured()

    B = np.zeros((n, len(inflow)))
    for channel, tank in enumerate(inflow):
        B[tank - 1, channel] = 1.0
    C = np.eye(n)[[tank - 1 for tank in measured]]

    return TankModel(
        h=params.h,
        g=params.g,
        kappa=params.kappa_vector(),
        B=B,
        C=C,
        X0=X0 if X0 is not None else Box.from_center(
            np.full(n, config.TANK_X0_CENTER), config.TANK_X0_RADIUS),
        W=W if W is not None else Box.unit(n, config.TANK_W_RADIUS),
        V=V if V is not None else Box.unit(len(measured), config.TANK_V_RADIUS),
        u_level=params.u_level,
        level_floor=params.level_floor,
    )


def scale_uncertainty(model: SystemModel, w_factor: float, v_factor: float) -> SystemModel:
    """Scale the radii of W and V about their centers."""
    if not (w_factor > 0.0 and v_factor > 0.0):
        raise ValueError(f"uncertainty factors must be positive, got ({w_factor}, {v_factor})")
    if w_factor == 1.0 and v_factor == 1.0:
        return model
    return dataclasses.replace(
        model, W=scale_box(model.W, w_factor), V=scale_box(model.V, v_factor)
    )


def model_from_scenario(scenario: ScenarioConfig) -> SystemModel:
    if scenario.benchmark == "vdp":
        model = vdp_model(scenario.vdp)
    else:
        model = tank_model(scenario.tank)
    return scale_uncertainty(model, scenario.w_factor, scenario.v_factor)


def initial_state(model: SystemModel, choice: Union[str, Sequence[float]] = "center") -> np.ndarray:
    """Resolve the true initial state: X0's center, its lower corner, or a given point."""
    if isinstance(choice, str):
        if choice == "center":
            return (model.X0.lo + model.X0.hi) / 2.0
        if choice == "corner":
            return model.X0.lo.copy()
        raise ValueError(f"Unknown initial state choice: {choice!r}")
    return np.asarray(choice, dtype=float)


def simulate_truth(model: SystemModel, x0, inputs: Optional[np.ndarray], N: int,
                   seed: int) -> TruthRun:
    """Simulate x_{k+1} = f(x_k, u_k, w_k), y_k = C x_k + v_k for k = 0..N.

    w_k and v_k are drawn i.i.d. uniformly from W and V with a generator
    seeded by ``seed``.

    Raises:
        InitialStateOutsideX0: if x0 is not in model.X0
        DomainViolation: if the model rejects a simulated state
    """
    x0 = np.asarray(x0, dtype=float)
    if not model.X0.contains_point(x0):
        raise InitialStateOutsideX0(f"initial state {x0} is outside X0 {model.X0!r}")
    if inputs is None:
        inputs = model.default_inputs(N)
    inputs = np.asarray(inputs, dtype=float).reshape(N, model.m)

    rng = np.random.default_rng(seed)
    states = np.empty((N + 1, model.n))
    measurements = np.empty((N + 1, model.p))
    disturbances = np.empty((N, model.n))
    noise = np.empty((N + 1, model.p))

    states[0] = x0
    check_state = getattr(model, "check_state", None)
    for k in range(N + 1):
        noise[k] = rng.uniform(model.V.lo, model.V.hi)
        measurements[k] = model.C @ states[k] + noise[k]
        if k == N:
            break
        disturbances[k] = rng.uniform(model.W.lo, model.W.hi)
        states[k + 1] = model.f(states[k], inputs[k], disturbances[k])
        if check_state is not None:
            check_state(states[k + 1])

    log(f"Simulated {N} step(s) of {model.name} with seed {seed}", node="benchmarks", level="DEBUG")
    return TruthRun(
        states=states,
        measurements=measurements,
        inputs=inputs,
        disturbances=disturbances,
        noise=noise,
        seed=seed,
    )
