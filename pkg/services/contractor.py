"""Gauss-Seidel contraction of boxes against linear measurement strips.

Each measurement row i defines the strip
    { x : y_i - v_hi_i <= C_i x <= y_i - v_lo_i }.
Sweeps run strips outer, variables inner, and always use the bounds tightened
earlier in the same sweep.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

import config
from errors import DimensionMismatch, EmptyBox, ZeroCoefficient
from services.interval import (
    ArrayPair,
    Box,
    BoxCollection,
    Interval,
    RoundingLike,
    add_arrays,
    div_arrays,
    is_rigorous,
    scale_arrays,
    sub_arrays,
)


@dataclass(frozen=True, eq=False)
class StripSet:
    """Measurement strips C x in y - V."""
    C: np.ndarray
    y: np.ndarray
    V: Box

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if C.shape[0] < 1:
            raise DimensionMismatch("at least one measurement strip is required")
        if y.shape != (C.shape[0],) or self.V.dim != C.shape[0]:
            raise DimensionMismatch(
                f"C has {C.shape[0]} rows but y has shape {y.shape} and V dim {self.V.dim}"
            )
        if self.V.is_empty:
            raise EmptyBox("empty measurement noise box")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "y", y)

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def n(self) -> int:
        return self.C.shape[1]

    def support(self) -> List[Tuple[int, np.ndarray]]:
        """Per strip, the variables with a nonzero coefficient. Empty strips are left out."""
        pairs = []
        for i in range(self.p):
            nonzero = np.flatnonzero(self.C[i])
            if nonzero.size:
                pairs.append((i, nonzero))
        return pairs


def _admissible_arrays(strips: StripSet, i: int, j: int, nonzero: np.ndarray,
                       lo: np.ndarray, hi: np.ndarray, rigorous: bool) -> ArrayPair:
    # s = sum over l != j of C_il * X_l, accumulated left to right
    row = strips.C[i]
    slo = shi = None
    for l in nonzero:
        if l == j:
            continue
        tlo, thi = scale_arrays(row[l], lo[:, l], hi[:, l], rigorous)
        if slo is None:
            slo, shi = tlo, thi
        else:
            slo, shi = add_arrays(slo, shi, tlo, thi, rigorous)

    y = strips.y[i]
    blo, bhi = sub_arrays(y, y, strips.V.lo[i], strips.V.hi[i], rigorous)
    if slo is not None:
        blo, bhi = sub_arrays(blo, bhi, slo, shi, rigorous)
    c = row[j]
    return div_arrays(blo, bhi, c, c, rigorous)


def admissible_interval(strips: StripSet, i: int, j: int, X: Box,
                        rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    """Values of x_j compatible with strip i given the other components of X.

    Indices are zero-based.

    Raises:
        ZeroCoefficient: if C[i, j] == 0
        EmptyBox: if X is empty
    """
    if strips.C[i, j] == 0.0:
        raise ZeroCoefficient(f"C[{i}, {j}] is zero")
    if X.is_empty:
        raise EmptyBox("admissible interval of an empty box")
    if X.dim != strips.n:
        raise DimensionMismatch(f"box of dim {X.dim} against {strips.n} state columns")
    nonzero = np.flatnonzero(strips.C[i])
    lo, hi = _admissible_arrays(strips, i, j, nonzero, X.lo[None, :], X.hi[None, :],
                                is_rigorous(rounding))
    lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
    return Interval(float(lo[0]), float(hi[0]))


def gs_contract_arrays(lo: np.ndarray, hi: np.ndarray, strips: StripSet, I_max: int,
                       rigorous: bool = False) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Contract stacked boxes (M, n).

    Returns the contracted bounds and a boolean mask of the boxes that
    survived. Rows of discarded boxes hold meaningless values.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    count = lo.shape[0]
    alive = np.ones(count, dtype=bool)
    active = np.ones(count, dtype=bool)
    support = strips.support()

    for _ in range(I_max):
        rows = np.flatnonzero(alive & active)
        if rows.size == 0:
            break
        blo = lo[rows]
        bhi = hi[rows]
        start_lo = blo.copy()
        start_hi = bhi.copy()
        dead = np.zeros(rows.size, dtype=bool)

        for i, nonzero in support:
            for j in nonzero:
                ilo, ihi = _admissible_arrays(strips, i, j, nonzero, blo, bhi, rigorous)
                blo[:, j] = np.maximum(blo[:, j], ilo)
                bhi[:, j] = np.minimum(bhi[:, j], ihi)
                dead |= blo[:, j] > bhi[:, j]

        changed = np.any(blo != start_lo, axis=1) | np.any(bhi != start_hi, axis=1)
        lo[rows] = blo
        hi[rows] = bhi
        alive[rows[dead]] = False
        active[rows] = changed & ~dead

    return lo, hi, alive


def gs_contract(collection: BoxCollection, strips: StripSet, I_max: int,
                rounding: RoundingLike = config.ROUNDING_FAST) -> BoxCollection:
    """Tighten every box against the strips and discard the ones that become empty.

    An empty result is a legal return; callers decide how to react.
    """
    if I_max < 1:
        raise ValueError(f"I_max must be at least 1, got {I_max}")
    if len(collection) == 0:
        return collection
    if collection.n != strips.n:
        raise DimensionMismatch(f"boxes of dim {collection.n} against {strips.n} state columns")
    lo, hi, alive = gs_contract_arrays(collection.lo, collection.hi, strips, I_max,
                                       is_rigorous(rounding))
    return BoxCollection(lo[alive], hi[alive])


def contract_initial(X0: Box, strips: StripSet, I_max: int,
                     rounding: RoundingLike = config.ROUNDING_FAST) -> BoxCollection:
    """Contract the initial set against the first measurement."""
    if X0.is_empty:
        raise EmptyBox("empty initial set")
    return gs_contract(BoxCollection(X0.lo[None, :], X0.hi[None, :]), strips, I_max, rounding)
