"""Tightness measures for box collections.

Two per-step terms are averaged over a run:
- the n-th root of the volume of the collection's interval hull
- the mean width: rho(X, d) + rho(X, -d) averaged over random unit directions
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

import config
from errors import EmptyCollection, NonpositiveMetric
from services.interval import Box, BoxCollection
from state import MetricReport


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Unit directions for the mean-width measure, one fixed set per run."""
    directions: np.ndarray
    seed: int

    @classmethod
    def sample(cls, n: int, seed: int = config.DEFAULT_DIRECTION_SEED,
               count: int = 0) -> "DirectionSet":
        """Draw ``count`` (default DIRECTIONS_PER_DIM * n) normalized Gaussian vectors."""
        count = count or config.DIRECTIONS_PER_DIM * n
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((count, n))
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
        return cls(raw / norms, seed)

    @property
    def n(self) -> int:
        return self.directions.shape[1]

    def __len__(self) -> int:
        return self.directions.shape[0]


def _require_boxes(collection: BoxCollection) -> None:
    if len(collection) == 0:
        raise EmptyCollection("metric of an empty collection")


def hull_of_collection(collection: BoxCollection) -> Box:
    """Smallest box containing every member of the collection."""
    _require_boxes(collection)
    return Box(collection.lo.min(axis=0), collection.hi.max(axis=0))


def hull_volume_term(collection: BoxCollection) -> float:
    """vol(hull(X)) ** (1/n) for one step."""
    hull = hull_of_collection(collection)
    return float(np.prod(hull.width()) ** (1.0 / hull.dim))


def hull_volume_metric(series: Sequence[BoxCollection]) -> float:
    if not series:
        raise EmptyCollection("hull volume metric of an empty series")
    return float(np.mean([hull_volume_term(collection) for collection in series]))


def support_values(collection: BoxCollection, directions: np.ndarray) -> np.ndarray:
    """Support function of the union for each row of ``directions``.

    The support of a box with center c and radius r in direction d is
    d.c + |d|.r; a union takes the maximum over its members.
    """
    _require_boxes(collection)
    directions = np.atleast_2d(directions)
    centers = collection.centers()
    radii = collection.widths() / 2.0
    per_box = centers @ directions.T + radii @ np.abs(directions).T
    return per_box.max(axis=0)


def support(collection: BoxCollection, d) -> float:
    return float(support_values(collection, np.asarray(d, dtype=float))[0])


def width_term(collection: BoxCollection, dirs: DirectionSet) -> float:
    """Mean two-sided support of one collection over the direction set."""
    both = support_values(collection, dirs.directions) + support_values(collection, -dirs.directions)
    return float(both.mean())


def mean_width(series: Sequence[BoxCollection], dirs: DirectionSet) -> float:
    if not series:
        raise EmptyCollection("mean width of an empty series")
    if len(dirs) == 0:
        raise EmptyCollection("mean width needs at least one direction")
    return float(np.mean([width_term(collection, dirs) for collection in series]))


def normalize(reports: List[MetricReport]) -> List[MetricReport]:
    """Divide each report's metrics by the smallest value across reports.

    Raises:
        NonpositiveMetric: if any metric is not strictly positive
    """
    if not reports:
        raise ValueError("normalize needs at least one report")
    v_values = np.array([r.v_tilde for r in reports])
    w_values = np.array([r.w_tilde for r in reports])
    if np.any(v_values <= 0.0) or np.any(w_values <= 0.0):
        raise NonpositiveMetric("normalization needs strictly positive metrics")
    v_min = v_values.min()
    w_min = w_values.min()
    return [
        r.model_copy(update={"v_hat": r.v_tilde / v_min, "w_hat": r.w_tilde / w_min})
        for r in reports
    ]
