"""Closed-interval and box arithmetic.

All arithmetic is implemented once as numpy kernels on (lower, upper) array
pairs so the same code serves scalar intervals, single boxes and stacked box
collections. In "rigorous" rounding mode every computed endpoint is moved one
ULP outward with ``np.nextafter``; in "fast" mode native floating point is
used as is.
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from errors import (
    DimensionMismatch,
    DivisorContainsZero,
    EmptyBox,
    NegativeDomain,
)

ArrayPair = Tuple[np.ndarray, np.ndarray]
RoundingLike = Union[str, bool]

_INF = np.inf


def is_rigorous(rounding: RoundingLike) -> bool:
    """Normalize a rounding mode ("fast" / "rigorous" or a bool) to a bool."""
    if isinstance(rounding, (bool, np.bool_)):
        return bool(rounding)
    if rounding == config.ROUNDING_RIGOROUS:
        return True
    if rounding == config.ROUNDING_FAST:
        return False
    raise ValueError(f"Unknown rounding mode: {rounding!r}")


def round_down(x, rigorous: bool):
    return np.nextafter(x, -_INF) if rigorous else x


def round_up(x, rigorous: bool):
    return np.nextafter(x, _INF) if rigorous else x


# ---------------------------------------------------------------------------
# Array kernels. Inputs broadcast against each other; empty handling is left
# to the callers (collections never hold empty boxes).
# ---------------------------------------------------------------------------

def add_arrays(alo, ahi, blo, bhi, rigorous: bool = False) -> ArrayPair:
    return round_down(alo + blo, rigorous), round_up(ahi + bhi, rigorous)


def sub_arrays(alo, ahi, blo, bhi, rigorous: bool = False) -> ArrayPair:
    return round_down(alo - bhi, rigorous), round_up(ahi - blo, rigorous)


def mul_arrays(alo, ahi, blo, bhi, rigorous: bool = False) -> ArrayPair:
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return round_down(lo, rigorous), round_up(hi, rigorous)


def scale_arrays(c, lo, hi, rigorous: bool = False) -> ArrayPair:
    """Multiply intervals by real scalars ``c`` (point intervals)."""
    p1 = c * lo
    p2 = c * hi
    return round_down(np.minimum(p1, p2), rigorous), round_up(np.maximum(p1, p2), rigorous)


def div_arrays(alo, ahi, blo, bhi, rigorous: bool = False) -> ArrayPair:
    if np.any((np.asarray(blo) <= 0.0) & (np.asarray(bhi) >= 0.0)):
        raise DivisorContainsZero("divisor interval contains zero")
    q1 = alo / blo
    q2 = alo / bhi
    q3 = ahi / blo
    q4 = ahi / bhi
    lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
    hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
    return round_down(lo, rigorous), round_up(hi, rigorous)


def sqr_arrays(lo, hi, rigorous: bool = False) -> ArrayPair:
    lo2 = lo * lo
    hi2 = hi * hi
    straddles = (lo < 0.0) & (hi > 0.0)
    out_lo = np.where(straddles, 0.0, np.minimum(lo2, hi2))
    out_hi = np.maximum(lo2, hi2)
    return np.maximum(round_down(out_lo, rigorous), 0.0), round_up(out_hi, rigorous)


def sqrt_arrays(lo, hi, rigorous: bool = False) -> ArrayPair:
    if np.any(np.asarray(hi) < 0.0):
        raise NegativeDomain("sqrt of an interval lying entirely below zero")
    out_lo = np.sqrt(np.maximum(lo, 0.0))
    out_hi = np.sqrt(hi)
    return np.maximum(round_down(out_lo, rigorous), 0.0), round_up(out_hi, rigorous)


def intersect_arrays(alo, ahi, blo, bhi) -> ArrayPair:
    """Intersection; components with lo > hi are empty."""
    return np.maximum(alo, blo), np.minimum(ahi, bhi)


# ---------------------------------------------------------------------------
# Scalar intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Interval:
    """Closed real interval [lo, hi], or the empty set when ``is_empty``."""
    lo: float = 0.0
    hi: float = 0.0
    is_empty: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not self.is_empty and self.lo > self.hi:
            raise ValueError(f"Invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def empty(cls) -> "Interval":
        return cls(_INF, -_INF, is_empty=True)

    @classmethod
    def point(cls, value: float) -> "Interval":
        return cls(value, value)

    @property
    def width(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    @property
    def mid(self) -> float:
        if self.is_empty:
            raise EmptyBox("midpoint of an empty interval")
        return (self.lo + self.hi) / 2.0

    def contains(self, x: float) -> bool:
        return not self.is_empty and self.lo <= x <= self.hi

    def subset_of(self, other: "Interval") -> bool:
        if self.is_empty:
            return True
        return not other.is_empty and other.lo <= self.lo and self.hi <= other.hi

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash(("empty",)) if self.is_empty else hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return "Interval(empty)" if self.is_empty else f"[{self.lo:.6g}, {self.hi:.6g}]"

    def __add__(self, other: "Interval") -> "Interval":
        return add(self, other)

    def __sub__(self, other: "Interval") -> "Interval":
        return sub(self, other)

    def __mul__(self, other: "Interval") -> "Interval":
        return mul(self, other)

    def __truediv__(self, other: "Interval") -> "Interval":
        return div(self, other)

    def __neg__(self) -> "Interval":
        return neg(self)

    def __and__(self, other: "Interval") -> "Interval":
        return intersect(self, other)


def _wrap(pair: ArrayPair) -> Interval:
    lo, hi = pair
    return Interval(float(lo), float(hi))


def add(a: Interval, b: Interval, rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    if a.is_empty or b.is_empty:
        return Interval.empty()
    return _wrap(add_arrays(a.lo, a.hi, b.lo, b.hi, is_rigorous(rounding)))


def sub(a: Interval, b: Interval, rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    if a.is_empty or b.is_empty:
        return Interval.empty()
    return _wrap(sub_arrays(a.lo, a.hi, b.lo, b.hi, is_rigorous(rounding)))


def neg(a: Interval) -> Interval:
    return a if a.is_empty else Interval(-a.hi, -a.lo)


def mul(a: Interval, b: Interval, rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    if a.is_empty or b.is_empty:
        return Interval.empty()
    return _wrap(mul_arrays(a.lo, a.hi, b.lo, b.hi, is_rigorous(rounding)))


def scale(c: float, a: Interval, rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    if a.is_empty:
        return a
    return _wrap(scale_arrays(float(c), a.lo, a.hi, is_rigorous(rounding)))


def div(a: Interval, b: Interval, rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    """Interval quotient.

    Raises:
        DivisorContainsZero: if 0 lies in ``b``
    """
    if b.is_empty:
        return Interval.empty()
    if b.lo <= 0.0 <= b.hi:
        raise DivisorContainsZero(f"divisor {b!r} contains zero")
    if a.is_empty:
        return Interval.empty()
    return _wrap(div_arrays(a.lo, a.hi, b.lo, b.hi, is_rigorous(rounding)))


def sqr(a: Interval, rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    if a.is_empty:
        return a
    return _wrap(sqr_arrays(a.lo, a.hi, is_rigorous(rounding)))


def sqrt(a: Interval, rounding: RoundingLike = config.ROUNDING_FAST) -> Interval:
    """Square root, clamping a slightly negative lower bound to 0.

    Raises:
        NegativeDomain: if the whole interval lies below 0
    """
    if a.is_empty:
        return a
    if a.hi < 0.0:
        raise NegativeDomain(f"sqrt of {a!r}")
    return _wrap(sqrt_arrays(a.lo, a.hi, is_rigorous(rounding)))


def intersect(a: Interval, b: Interval) -> Interval:
    if a.is_empty or b.is_empty:
        return Interval.empty()
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        return Interval.empty()
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# Boxes
# ---------------------------------------------------------------------------

def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Box:
    """Interval vector; empty iff any component is empty."""
    lo: np.ndarray
    hi: np.ndarray
    is_empty: bool = field(default=False)

    def __post_init__(self):
        lo = _frozen(self.lo)
        hi = _frozen(self.hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch(f"bounds of shape {lo.shape} and {hi.shape}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if np.any(lo > hi):
            object.__setattr__(self, "is_empty", True)

    @classmethod
    def from_intervals(cls, components: Sequence[Interval]) -> "Box":
        empty = any(c.is_empty for c in components)
        return cls([c.lo for c in components], [c.hi for c in components], is_empty=empty)

    @classmethod
    def from_center(cls, center, radius) -> "Box":
        center = np.asarray(center, dtype=float)
        radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape)
        return cls(center - radius, center + radius)

    @classmethod
    def unit(cls, n: int, radius: float = 1.0) -> "Box":
        """The box radius * [-1, 1]^n."""
        return cls.from_center(np.zeros(n), radius)

    @classmethod
    def point(cls, x) -> "Box":
        return cls(x, x)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def components(self) -> List[Interval]:
        return [Interval.empty() if lo > hi else Interval(lo, hi)
                for lo, hi in zip(self.lo, self.hi)]

    def midpoint(self) -> np.ndarray:
        return midpoint(self)

    def width(self) -> np.ndarray:
        return width(self)

    def radius(self) -> np.ndarray:
        return width(self) / 2.0

    def contains_point(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return (not self.is_empty) and bool(np.all(self.lo <= x) and np.all(x <= self.hi))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty and self.dim == other.dim
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __hash__(self) -> int:
        return hash((self.lo.tobytes(), self.hi.tobytes(), self.is_empty))

    def __repr__(self) -> str:
        if self.is_empty:
            return f"Box(empty, n={self.dim})"
        parts = " x ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in zip(self.lo, self.hi))
        return f"Box({parts})"


def _require_non_empty(box: Box) -> None:
    if box.is_empty:
        raise EmptyBox("operation needs a non-empty box")


def _require_same_dim(a: Box, b: Box) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"boxes of dimension {a.dim} and {b.dim}")


def box_contains(outer: Box, inner: Box) -> bool:
    """True iff ``inner`` is a subset of ``outer``.

    Raises:
        DimensionMismatch: if the dimensions differ
    """
    _require_same_dim(outer, inner)
    if inner.is_empty:
        return True
    if outer.is_empty:
        return False
    return bool(np.all(outer.lo <= inner.lo) and np.all(inner.hi <= outer.hi))


def midpoint(box: Box) -> np.ndarray:
    _require_non_empty(box)
    return (box.lo + box.hi) / 2.0


def width(box: Box) -> np.ndarray:
    _require_non_empty(box)
    return box.hi - box.lo


def hull(a: Box, b: Box) -> Box:
    _require_same_dim(a, b)
    _require_non_empty(a)
    _require_non_empty(b)
    return Box(np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi))


def intersect_boxes(a: Box, b: Box) -> Box:
    _require_same_dim(a, b)
    if a.is_empty or b.is_empty:
        return Box(np.full(a.dim, _INF), np.full(a.dim, -_INF), is_empty=True)
    lo, hi = intersect_arrays(a.lo, a.hi, b.lo, b.hi)
    return Box(lo, hi)


def scale_box(box: Box, factor: float) -> Box:
    """Scale a box's radius about its center."""
    _require_non_empty(box)
    return Box.from_center(midpoint(box), factor * box.radius())


# ---------------------------------------------------------------------------
# Box collections
# ---------------------------------------------------------------------------

class BoxCollection:
    """Ordered finite union of non-empty boxes of equal dimension.

    Bounds are stored stacked as (M, n) arrays; row order is the encounter
    order used for tie-breaking by refinement and pruning.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.array(lo, dtype=float, ndmin=2)
        hi = np.array(hi, dtype=float, ndmin=2)
        if lo.shape != hi.shape:
            raise DimensionMismatch(f"bounds of shape {lo.shape} and {hi.shape}")
        if np.any(lo > hi):
            raise EmptyBox("collections hold non-empty boxes only")
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_boxes(cls, boxes: Iterable[Box], n: Optional[int] = None) -> "BoxCollection":
        boxes = [b for b in boxes if not b.is_empty]
        if not boxes:
            if n is None:
                raise DimensionMismatch("dimension needed for an empty collection")
            return cls.empty(n)
        dims = {b.dim for b in boxes}
        if len(dims) != 1:
            raise DimensionMismatch(f"mixed box dimensions {sorted(dims)}")
        return cls(np.stack([b.lo for b in boxes]), np.stack([b.hi for b in boxes]))

    @classmethod
    def empty(cls, n: int) -> "BoxCollection":
        return cls(np.empty((0, n)), np.empty((0, n)))

    @property
    def n(self) -> int:
        return self.lo.shape[1]

    @property
    def boxes(self) -> List[Box]:
        return [Box(lo, hi) for lo, hi in zip(self.lo, self.hi)]

    def __len__(self) -> int:
        return self.lo.shape[0]

    def __iter__(self) -> Iterator[Box]:
        return iter(self.boxes)

    def __getitem__(self, index: int) -> Box:
        return Box(self.lo[index], self.hi[index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoxCollection):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __repr__(self) -> str:
        return f"BoxCollection(M={len(self)}, n={self.n})"

    def take(self, mask_or_index) -> "BoxCollection":
        return BoxCollection(self.lo[mask_or_index], self.hi[mask_or_index])

    def centers(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def contains_points(self, points) -> np.ndarray:
        """Union membership for each row of ``points`` (shape (P, n))."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.zeros(points.shape[0], dtype=bool)
        for lo, hi in zip(self.lo, self.hi):
            inside |= np.all((lo <= points) & (points <= hi), axis=1)
        return inside

    def contains_point(self, x) -> bool:
        return bool(self.contains_points(x)[0])
