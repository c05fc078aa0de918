# -*- coding: utf-8 -*-
# Copyright (c) 2026-present pymfd contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
"""Exact k-nearest-neighbour queries in a periodic box and adaptive smoothing radii."""
from __future__ import annotations

import logging
import typing as t

import numpy as np
import numpy.typing as npt
from scipy.spatial import cKDTree

from pymfd import errors
from pymfd.snapshot import Kind
from pymfd.snapshot import ParticleSet

__all__ = [
    "DEFAULT_NEIGHBOURS",
    "periodic_distance",
    "PeriodicIndex",
    "SmoothingRadii",
    "build_index",
    "knn",
    "smoothing_radii",
]

_LOGGER = logging.getLogger(__name__)

DEFAULT_NEIGHBOURS = 32
# Extra candidates requested from the tree so that ties and rounding at the k-th
# neighbour are resolved by the exact re-ranking below.
_CANDIDATE_SLACK = 8
_RADIUS_SLACK = 1e-9

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


def periodic_distance(a: npt.ArrayLike, b: npt.ArrayLike, box_size: float) -> FloatArray:
    """Minimum-image Euclidean distance ``sqrt(sum(min(|d|, box - |d|)^2))``, broadcasting over leading axes."""
    delta = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
    delta = np.minimum(delta, box_size - delta)
    return np.sqrt(delta[..., 0] * delta[..., 0] + delta[..., 1] * delta[..., 1] + delta[..., 2] * delta[..., 2])


class PeriodicIndex:
    """Immutable spatial index over points in ``[0, box_size)^3``."""

    __slots__ = ("box_size", "points", "_tree")

    def __init__(self, points: FloatArray, box_size: float) -> None:
        self.box_size: float = float(box_size)
        self.points: FloatArray = points
        self.points.setflags(write=False)
        self._tree: t.Optional[cKDTree] = cKDTree(points, boxsize=self.box_size) if len(points) else None

    def __repr__(self) -> str:
        return f"PeriodicIndex(box_size={self.box_size}, point_count={self.point_count})"

    @property
    def point_count(self) -> int:
        return int(self.points.shape[0])

    def _ranked(
        self, query: FloatArray, candidates: IntArray, exclude: t.Optional[int]
    ) -> t.Tuple[IntArray, FloatArray]:
        if exclude is not None:
            candidates = candidates[candidates != exclude]
        distances = periodic_distance(self.points[candidates], query, self.box_size)
        order = np.lexsort((candidates, distances))
        return candidates[order], distances[order]

    def query(self, query: FloatArray, k: int, exclude: t.Optional[int] = None) -> t.Tuple[IntArray, FloatArray]:
        """Exact ``k`` nearest points to ``query`` ordered by (distance, id)."""
        available = self.point_count - (1 if exclude is not None else 0)
        if k < 1:
            raise ValueError("k must be at least 1")
        if k > available:
            raise errors.InsufficientPoints(k, available)
        assert self._tree is not None

        want = min(self.point_count, k + 1)
        tree_distances, _ = self._tree.query(query, k=want)
        tree_distances = np.atleast_1d(tree_distances)
        # The k-th distance excluding self is at most the last one returned.
        cutoff = float(tree_distances[-1]) * (1.0 + _RADIUS_SLACK) + _RADIUS_SLACK
        candidates = np.asarray(self._tree.query_ball_point(query, cutoff), dtype=np.int64)
        ids, distances = self._ranked(query, candidates, exclude)
        return ids[:k], distances[:k]


def build_index(points: npt.ArrayLike, box_size: float) -> PeriodicIndex:
    coords = np.array(points, dtype=np.float64).reshape(-1, 3)
    outside = ~((coords >= 0.0) & (coords < box_size)).all(axis=1)
    if outside.any():
        raise errors.OutOfBox(int(np.flatnonzero(outside)[0]), box_size)
    _LOGGER.debug("building periodic index over %d points (box %s)", len(coords), box_size)
    return PeriodicIndex(coords, box_size)


def knn(
    index: PeriodicIndex,
    query: t.Union[int, npt.ArrayLike],
    k: int,
    exclude_self: bool = False,
) -> t.List[t.Tuple[int, float]]:
    """
    Exact k nearest neighbours under the minimum-image metric.

    Args:
        index (PeriodicIndex): Index to search.
        query (int | array-like): Either a point id of the index or a position.
        k (int): Number of neighbours to return.
        exclude_self (bool): Skip the queried point itself; requires ``query`` to be a point id.

    Returns:
        ``k`` ``(point_id, distance)`` pairs sorted by distance, ties broken by ascending id.
    """
    if isinstance(query, (int, np.integer)):
        point_id: t.Optional[int] = int(query)
        position = index.points[int(query)]
    else:
        if exclude_self:
            raise ValueError("exclude_self needs the query given as a point id")
        point_id = None
        position = np.asarray(query, dtype=np.float64).reshape(3)

    ids, distances = index.query(position, k, point_id if exclude_self else None)
    return [(int(i), float(d)) for i, d in zip(ids, distances)]


class SmoothingRadii(t.NamedTuple):
    kind: Kind
    radii: FloatArray
    k: int


def smoothing_radii(species: ParticleSet, box_size: float, k: int = DEFAULT_NEIGHBOURS) -> SmoothingRadii:
    """
    Kernel radius of every particle: the exact periodic distance to the ``k``-th closest other
    particle of the same species for gas and dark matter, zero for stars and black holes.
    """
    count = species.count
    if species.kind in (Kind.STAR, Kind.BLACK_HOLE) or count == 0:
        return SmoothingRadii(species.kind, np.zeros(count), k)
    if k < 1:
        raise ValueError("k must be at least 1")
    if count <= k:
        raise errors.InsufficientPoints(k, count - 1, species.kind.tag)

    index = build_index(species.positions, box_size)
    assert index._tree is not None
    points = index.points

    want = min(count, k + 1 + _CANDIDATE_SLACK)
    tree_distances, candidates = index._tree.query(points, k=want)
    candidates = np.asarray(candidates, dtype=np.int64)

    exact = periodic_distance(points[candidates], points[:, None, :], box_size)
    exact[candidates == np.arange(count)[:, None]] = np.inf
    order = np.lexsort((candidates, exact), axis=-1)
    ranked = np.take_along_axis(exact, order, axis=-1)
    radii = ranked[:, k - 1].copy()

    # Rows whose k-th neighbour may sit beyond the candidate horizon are re-queried exactly.
    if want < count:
        horizon = tree_distances[:, -1] * (1.0 - _RADIUS_SLACK)
        unresolved = np.flatnonzero(radii >= horizon)
        for i in unresolved:
            _, distances = index.query(points[i], k, exclude=int(i))
            radii[i] = distances[-1]
        if len(unresolved):
            _LOGGER.debug("re-queried %d of %d particles exactly", len(unresolved), count)

    _LOGGER.debug("computed %s smoothing radii (k=%d) for %d particles", species.kind.tag, k, count)
    return SmoothingRadii(species.kind, radii, k)
