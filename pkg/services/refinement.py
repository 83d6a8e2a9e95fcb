"""Binned splitting and pruning of box collections.

Both passes work on the stacked (M, n) bounds and are linear in the number of
boxes for a fixed state dimension. Row order is the encounter order used to
break ties.
"""

from typing import Optional, Tuple

import numpy as np

from errors import DimensionMismatch, EmptyBox, EmptyCollection, NonpositiveScale, ZeroWidthSplit
from services.interval import Box, BoxCollection
from state import ObserverConfig


def default_scaling(X0: Box) -> np.ndarray:
    """Componentwise width of X0, floored at machine epsilon."""
    return np.maximum(X0.width(), np.finfo(float).eps)


def resolve_scaling(cfg: ObserverConfig, X0: Box) -> np.ndarray:
    """Scaling vector from the configuration, or the X0 default when unset."""
    if cfg.s is None:
        return default_scaling(X0)
    s = np.asarray(cfg.s, dtype=float)
    if s.shape != (X0.dim,):
        raise DimensionMismatch(f"scaling vector of length {s.size} for a {X0.dim}-dim state")
    return s


def _check_scaling(s, n: int) -> np.ndarray:
    if s is None:
        raise ValueError("a scaling vector is required when the configuration has none")
    s = np.asarray(s, dtype=float)
    if s.shape != (n,):
        raise DimensionMismatch(f"scaling vector of length {s.size} for dimension {n}")
    if not np.all(s > 0.0):
        raise NonpositiveScale(f"scaling vector must be strictly positive, got {s}")
    return s


def scaled_widths(X: Box, s) -> np.ndarray:
    """Widths of X divided componentwise by s.

    Raises:
        NonpositiveScale: if some s_j <= 0
    """
    s = _check_scaling(s, X.dim)
    if X.is_empty:
        raise EmptyBox("scaled widths of an empty box")
    return X.width() / s


def widest_dim(X: Box, s) -> int:
    """Index of the largest scaled width; the lowest index wins ties."""
    return int(np.argmax(scaled_widths(X, s)))


def bisect(X: Box, j: int) -> Tuple[Box, Box]:
    """Split X at the midpoint of component j.

    Raises:
        ZeroWidthSplit: if component j has zero width
    """
    if X.is_empty:
        raise EmptyBox("bisect of an empty box")
    if not X.hi[j] > X.lo[j]:
        raise ZeroWidthSplit(f"component {j} of {X!r} has zero width")
    mid = (X.lo[j] + X.hi[j]) / 2.0
    left_hi = X.hi.copy()
    left_hi[j] = mid
    right_lo = X.lo.copy()
    right_lo[j] = mid
    return Box(X.lo, left_hi), Box(right_lo, X.hi)


def equal_width_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Bin index of each value over ``bins`` equal-width bins spanning [min, max].

    Bins are half-open [a, b) except the last, which is closed. When all values
    are equal everything lands in bin 0.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return np.zeros(0, dtype=int)
    vmin = values.min()
    vmax = values.max()
    if not vmax > vmin:
        return np.zeros(values.shape, dtype=int)
    step = (vmax - vmin) / bins
    index = np.floor((values - vmin) / step).astype(int)
    return np.clip(index, 0, bins - 1)


def _split_rows(lo: np.ndarray, hi: np.ndarray, selected: np.ndarray,
                dims: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Children replace their parent in place, lower half first.
    counts = np.where(selected, 2, 1)
    source = np.repeat(np.arange(lo.shape[0]), counts)
    new_lo = lo[source]
    new_hi = hi[source]
    first = np.cumsum(counts) - counts
    parents = np.flatnonzero(selected)
    left = first[parents]
    d = dims[parents]
    mid = (lo[parents, d] + hi[parents, d]) / 2.0
    new_hi[left, d] = mid
    new_lo[left + 1, d] = mid
    return new_lo, new_hi


def _select_from_top_bins(keys: np.ndarray, eligible: np.ndarray, budget: int,
                          bins: int) -> np.ndarray:
    # Take whole bins from the largest widths down, then the first boxes (in
    # encounter order) of the bin where the budget runs out.
    selected = np.zeros(keys.shape[0], dtype=bool)
    candidates = np.flatnonzero(eligible)
    if candidates.size <= budget:
        selected[candidates] = True
        return selected

    bin_of = equal_width_bins(keys[candidates], bins)
    counts = np.bincount(bin_of, minlength=bins)
    from_top = np.cumsum(counts[::-1])
    position = int(np.searchsorted(from_top, budget))
    threshold = bins - 1 - position
    remaining = budget - (from_top[position] - counts[threshold])

    chosen = bin_of > threshold
    chosen[np.flatnonzero(bin_of == threshold)[:remaining]] = True
    selected[candidates[chosen]] = True
    return selected


def _max_scaled_width(lo: np.ndarray, hi: np.ndarray, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    scaled = (hi - lo) / s
    dims = np.argmax(scaled, axis=1)
    return scaled[np.arange(scaled.shape[0]), dims], dims


def refine(collection: BoxCollection, cfg: ObserverConfig,
           s: Optional[np.ndarray] = None) -> BoxCollection:
    """Split boxes along their widest scaled dimension until M_max boxes exist.

    Full doubling rounds run while 2M <= M_max. The last, partial round splits
    exactly M_max - M boxes picked from the largest-width bins downward. Boxes
    whose widest scaled dimension has zero width are skipped.

    Raises:
        EmptyCollection: if the collection is empty
    """
    if len(collection) == 0:
        raise EmptyCollection("refine needs at least one box")
    s = _check_scaling(s if s is not None else cfg.s, collection.n)
    lo, hi = collection.lo, collection.hi

    while lo.shape[0] < cfg.M_max:
        count = lo.shape[0]
        keys, dims = _max_scaled_width(lo, hi, s)
        splittable = keys > 0.0
        if not splittable.any():
            break
        if 2 * count <= cfg.M_max:
            lo, hi = _split_rows(lo, hi, splittable, dims)
            continue
        selected = _select_from_top_bins(keys, splittable, cfg.M_max - count, cfg.K_split)
        lo, hi = _split_rows(lo, hi, selected, dims)
        break

    if lo is collection.lo:
        return collection
    return BoxCollection(lo, hi)


def prune(collection: BoxCollection, cfg: ObserverConfig,
          s: Optional[np.ndarray] = None) -> BoxCollection:
    """Drop boxes contained in the representative box of their center bin.

    Centers are binned along the component with the largest center spread.
    Each bin's representative is its box with the largest scaled side length
    (earliest on ties); representatives always survive and survivors keep
    their order.
    """
    count = len(collection)
    if count <= 1:
        return collection
    s = _check_scaling(s if s is not None else cfg.s, collection.n)
    lo, hi = collection.lo, collection.hi

    centers = collection.centers()
    j_ctr = int(np.argmax(centers.max(axis=0) - centers.min(axis=0)))
    bin_of = equal_width_bins(centers[:, j_ctr], cfg.K_prune)

    keys, _ = _max_scaled_width(lo, hi, s)
    best = np.full(cfg.K_prune, -np.inf)
    np.maximum.at(best, bin_of, keys)
    order = np.arange(count)
    representative = np.full(cfg.K_prune, count)
    np.minimum.at(representative, bin_of, np.where(keys == best[bin_of], order, count))

    rep = representative[bin_of]
    contained = np.all(lo[rep] <= lo, axis=1) & np.all(hi <= hi[rep], axis=1)
    keep = ~(contained & (rep != order))
    if keep.all():
        return collection
    return collection.take(keep)
