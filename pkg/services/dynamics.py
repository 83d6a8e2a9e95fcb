"""System models and the mean-value enclosure predictor."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

import config
from errors import DimensionMismatch, EmptyBox
from services.interval import (
    ArrayPair,
    Box,
    BoxCollection,
    Interval,
    RoundingLike,
    add_arrays,
    is_rigorous,
    mul_arrays,
    sub_arrays,
)


@dataclass(frozen=True, eq=False)
class IntervalMatrix:
    """Grid of intervals stored as lower/upper arrays of shape (..., rows, cols).

    Leading dimensions, when present, index a batch of matrices (one per box).
    """
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim < 2:
            raise DimensionMismatch(f"interval matrix bounds {lo.shape} / {hi.shape}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, grid: Sequence[Sequence[Interval]]) -> "IntervalMatrix":
        return cls(
            [[entry.lo for entry in row] for row in grid],
            [[entry.hi for entry in row] for row in grid],
        )

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        eye = np.eye(n)
        return cls(eye, eye.copy())

    @property
    def rows(self) -> int:
        return self.lo.shape[-2]

    @property
    def cols(self) -> int:
        return self.lo.shape[-1]

    def __getitem__(self, index: Tuple[int, int]) -> Interval:
        i, j = index
        return Interval(self.lo[..., i, j], self.hi[..., i, j])


def matvec_arrays(jlo, jhi, vlo, vhi, rigorous: bool = False) -> ArrayPair:
    """Interval matrix-vector product over stacked arrays.

    ``jlo``/``jhi`` have shape (..., rows, cols) and ``vlo``/``vhi`` shape
    (..., cols). Columns whose entries are exactly zero for every matrix in
    the batch contribute nothing and are skipped. Terms are accumulated in
    column order.
    """
    cols = jlo.shape[-1]
    out_shape = np.broadcast_shapes(jlo.shape[:-1], vlo.shape[:-1] + (1,))
    acc_lo = None
    acc_hi = None
    for j in range(cols):
        clo = jlo[..., j]
        chi = jhi[..., j]
        if not (np.any(clo) or np.any(chi)):
            continue
        plo, phi = mul_arrays(clo, chi, vlo[..., j, None], vhi[..., j, None], rigorous)
        if acc_lo is None:
            acc_lo, acc_hi = plo, phi
        else:
            acc_lo, acc_hi = add_arrays(acc_lo, acc_hi, plo, phi, rigorous)
    if acc_lo is None:
        return np.zeros(out_shape), np.zeros(out_shape)
    return np.broadcast_to(acc_lo, out_shape), np.broadcast_to(acc_hi, out_shape)


def interval_matvec(J: IntervalMatrix, v: Box,
                    rounding: RoundingLike = config.ROUNDING_FAST) -> Box:
    """Evaluate J·v with interval arithmetic.

    Raises:
        DimensionMismatch: if J.cols != dim(v)
    """
    if J.lo.ndim != 2:
        raise DimensionMismatch("interval_matvec expects a single matrix")
    if J.cols != v.dim:
        raise DimensionMismatch(f"matrix with {J.cols} columns times vector of dim {v.dim}")
    if v.is_empty:
        raise EmptyBox("interval_matvec of an empty box")
    lo, hi = matvec_arrays(J.lo, J.hi, v.lo, v.hi, is_rigorous(rounding))
    return Box(lo, hi)


class SystemModel(ABC):
    """Discrete-time model x+ = f(x, u, w), y = C x + v with bounded w, v.

    Subclasses provide the point dynamics, the natural interval extension of
    f and an interval enclosure of the Jacobian with respect to [x; w]. All
    three work on stacked inputs whose leading axis indexes boxes.
    """

    n: int
    m: int
    C: np.ndarray
    W: Box
    V: Box
    X0: Box

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def name(self) -> str:
        return type(self).__name__

    @abstractmethod
    def f(self, x: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Point dynamics; ``x`` and ``w`` may carry leading batch axes."""

    @abstractmethod
    def f_enclosure(self, xlo, xhi, u, wlo, whi, rigorous: bool = False) -> ArrayPair:
        """Natural interval extension of f over stacked boxes (M, n)."""

    @abstractmethod
    def jac_enclosure_arrays(self, xlo, xhi, u, wlo, whi, rigorous: bool = False) -> ArrayPair:
        """Enclosure of d f / d[x; w] over stacked boxes, shape (M, n, 2n)."""

    def jac_enclosure(self, X: Box, u, W: Box,
                      rounding: RoundingLike = config.ROUNDING_FAST) -> IntervalMatrix:
        """Jacobian enclosure for a single box pair, as an n x 2n interval matrix."""
        lo, hi = self.jac_enclosure_arrays(
            X.lo[None, :], X.hi[None, :], self._inputs(u),
            W.lo[None, :], W.hi[None, :], is_rigorous(rounding),
        )
        return IntervalMatrix(lo[0], hi[0])

    def domain_guard(self, collection: BoxCollection) -> BoxCollection:
        """Restrict boxes to the domain of f. The default domain is all of R^n."""
        return collection

    def default_inputs(self, steps: int) -> np.ndarray:
        """Input sequence used when a scenario does not provide one, shape (steps, m)."""
        return np.zeros((steps, self.m))

    def _inputs(self, u) -> np.ndarray:
        if u is None:
            return np.zeros(self.m)
        return np.asarray(u, dtype=float).reshape(self.m)


def mean_value_arrays(model: SystemModel, xlo, xhi, u, wlo, whi,
                      rigorous: bool = False) -> ArrayPair:
    """Mean-value enclosure for stacked boxes (M, n) with a shared disturbance box.

    Returns f(c) + J(X x W) ([X; W] - c) with c the midpoint of X x W, where
    f(c) is evaluated through the model's interval extension so that rigorous
    mode also covers the rounding of the point evaluation.
    """
    count = xlo.shape[0]
    u = model._inputs(u)
    wlo_b = np.broadcast_to(wlo, (count, wlo.shape[-1]))
    whi_b = np.broadcast_to(whi, (count, whi.shape[-1]))
    cx = (xlo + xhi) / 2.0
    cw = (wlo_b + whi_b) / 2.0

    flo, fhi = model.f_enclosure(cx, cx, u, cw, cw, rigorous)
    jlo, jhi = model.jac_enclosure_arrays(xlo, xhi, u, wlo_b, whi_b, rigorous)

    dxlo, dxhi = sub_arrays(xlo, xhi, cx, cx, rigorous)
    dwlo, dwhi = sub_arrays(wlo_b, whi_b, cw, cw, rigorous)
    dlo = np.concatenate([dxlo, dwlo], axis=1)
    dhi = np.concatenate([dxhi, dwhi], axis=1)

    plo, phi = matvec_arrays(jlo, jhi, dlo, dhi, rigorous)
    return add_arrays(flo, fhi, plo, phi, rigorous)


def mean_value_enclosure(model: SystemModel, X: Union[Box, BoxCollection], u, W: Box,
                         rounding: RoundingLike = config.ROUNDING_FAST) -> Union[Box, BoxCollection]:
    """Predict the image of X x W under f with a first-order mean-value form.

    The known input ``u`` is a fixed parameter and is never widened.

    Raises:
        EmptyBox: if X (or W) is empty
        DomainViolation: if the model's domain guard rejects X
    """
    if W.is_empty:
        raise EmptyBox("empty disturbance box")
    rigorous = is_rigorous(rounding)
    if isinstance(X, Box):
        if X.is_empty:
            raise EmptyBox("mean-value enclosure of an empty box")
        guarded = model.domain_guard(BoxCollection(X.lo[None, :], X.hi[None, :]))
        lo, hi = mean_value_arrays(model, guarded.lo, guarded.hi, u, W.lo, W.hi, rigorous)
        return Box(lo[0], hi[0])
    if len(X) == 0:
        raise EmptyBox("mean-value enclosure of an empty collection")
    guarded = model.domain_guard(X)
    lo, hi = mean_value_arrays(model, guarded.lo, guarded.hi, u, W.lo, W.hi, rigorous)
    return BoxCollection(lo, hi)
