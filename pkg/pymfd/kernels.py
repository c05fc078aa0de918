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
"""
Geometry of the uniform-sphere kernel.

Voxel overlaps are exact: the volume of a unit ball inside the corner region
``{x >= a, y >= b, z >= c}`` has a closed form (``_octant_volume``), and any axis-aligned box
is an inclusion-exclusion of eight such corners. The same construction in 2D gives exact
circle/rectangle areas. Projected 2D kernels are sampled with a deterministic equal-area
sunflower lattice of tracers.
"""
from __future__ import annotations

import enum
import math
import typing as t

import numpy as np
import numpy.typing as npt

__all__ = [
    "Kernel3D",
    "Kernel2DMode",
    "BALL_VOLUME",
    "sphere_voxel_overlap",
    "sphere_grid_fractions",
    "circle_rect_area",
    "tracer_points",
    "tracer_weights",
]

FloatArray = npt.NDArray[np.float64]

BALL_VOLUME = 4.0 * math.pi / 3.0
GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
GOLDEN_ANGLE = 2.0 * math.pi * (1.0 - 1.0 / GOLDEN_RATIO)
FRACTION_FLOOR = 1e-12


class Kernel3D(t.NamedTuple):
    center: t.Tuple[float, float, float]
    radius: float


class Kernel2DMode(enum.Enum):
    UNIFORM_DISK = "uniform_disk"
    PROJECTED_SPHERE = "projected_sphere"


def _chord(x: FloatArray, x_end: FloatArray, offset: FloatArray) -> FloatArray:
    # sqrt(offset^2 + x_end^2 - x^2) for 0 <= x <= x_end, built from non-negative terms only
    return np.sqrt(offset * offset + (x_end - x) * (x_end + x))


def _corner_antiderivative(x: FloatArray, x_max: FloatArray, b: FloatArray, c: FloatArray) -> FloatArray:
    """
    Antiderivative in ``x`` of the area of ``{y >= b, z >= c, y^2 + z^2 <= 1 - x^2}``.

    Every arcsine of the textbook form is written as an ``atan2`` of the half chords
    ``s_b = sqrt(1 - b^2 - x^2)`` and ``s_c = sqrt(1 - c^2 - x^2)``, which are exact at
    ``x = x_max`` (``s_b = c``, ``s_c = b``).
    """
    s_b = _chord(x, x_max, c)
    s_c = _chord(x, x_max, b)
    cubic = x - x**3 / 3.0

    def strip(s: FloatArray, k2: FloatArray) -> FloatArray:
        # integral of sqrt(k^2 - t^2) from 0 to x
        return 0.5 * (x * s + k2 * np.arctan2(x, s))

    def moment(offset: FloatArray, s: FloatArray, k2: FloatArray) -> FloatArray:
        # integral of (1 - t^2) * asin(offset / sqrt(1 - t^2)) from 0 to x
        boundary = (offset / 3.0) * ((0.5 * k2 - 2.0) * np.arctan2(x, s) - 0.5 * x * s)
        return cubic * np.arctan2(offset, s) - boundary - (2.0 / 3.0) * np.arctan2(offset * x, s)

    k2_b = 1.0 - b * b
    k2_c = 1.0 - c * c
    return (
        -0.5 * c * strip(s_c, k2_c)
        + b * c * x
        - 0.5 * b * strip(s_b, k2_b)
        + 0.25 * math.pi * cubic
        - 0.5 * moment(c, s_c, k2_c)
        - 0.5 * moment(b, s_b, k2_b)
    )


def _octant_volume(a: FloatArray, b: FloatArray, c: FloatArray) -> FloatArray:
    """Volume of the unit ball inside ``{x >= a, y >= b, z >= c}`` for non-negative ``a, b, c``."""
    x_max = np.sqrt(np.maximum(1.0 - b * b - c * c, 0.0))
    x_min = np.minimum(a, x_max)
    return _corner_antiderivative(x_max, x_max, b, c) - _corner_antiderivative(x_min, x_max, b, c)


def _quadrant_area(b: FloatArray, c: FloatArray) -> FloatArray:
    """Area of the unit disk inside ``{y >= b, z >= c}`` for non-negative ``b, c``."""
    y_max = np.sqrt(np.maximum(1.0 - c * c, 0.0))
    y_min = np.minimum(b, y_max)

    def primitive(y: FloatArray) -> FloatArray:
        w = _chord(y, y_max, c)
        return 0.5 * (y * w + np.arctan2(y, w))

    return primitive(y_max) - primitive(y_min) - c * (y_max - y_min)


def _half_space_operator(nodes: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
    """
    Express the half-spaces ``{x >= u}`` at every node ``u`` through non-negative thresholds.

    For ``u < 0`` the half-space is the whole ball minus the mirrored ``{x >= -u}`` region, i.e.
    ``2 * f(0) - f(|u|)``. Returns ``(values, coefficients)`` where ``values[..., 0] == 0``,
    ``values[..., 1 + i] == |u_i|`` and ``coefficients[..., i, :]`` combines them for node ``i``.
    """
    nodes = np.clip(nodes, -1.0, 1.0)
    *batch, n_nodes = nodes.shape
    values = np.concatenate([np.zeros((*batch, 1)), np.abs(nodes)], axis=-1)

    negative = nodes < 0.0
    coefficients = np.zeros((*batch, n_nodes, n_nodes + 1))
    diagonal = np.arange(n_nodes)
    coefficients[..., diagonal, diagonal + 1] = np.where(negative, -1.0, 1.0)
    coefficients[..., diagonal, 0] = np.where(negative, 2.0, 0.0)
    return values, coefficients


def _cell_operator(nodes: FloatArray) -> t.Tuple[FloatArray, FloatArray]:
    # cell i spans [node_i, node_{i+1}): indicator = 1[x >= node_i] - 1[x >= node_{i+1}]
    values, coefficients = _half_space_operator(nodes)
    return values, coefficients[..., :-1, :] - coefficients[..., 1:, :]


def sphere_grid_fractions(nodes_x: FloatArray, nodes_y: FloatArray, nodes_z: FloatArray) -> FloatArray:
    """
    Exact fractions of unit balls falling in each cell of per-ball rectilinear grids.

    Args:
        nodes_x (numpy.ndarray): ``(P, mx + 1)`` cell boundaries along x, already shifted to the
            ball centre and divided by its radius; likewise ``nodes_y`` and ``nodes_z``.

    Returns:
        ``(P, mx, my, mz)`` array of kernel fractions.
    """
    vx, mx = _cell_operator(np.asarray(nodes_x, dtype=np.float64))
    vy, my = _cell_operator(np.asarray(nodes_y, dtype=np.float64))
    vz, mz = _cell_operator(np.asarray(nodes_z, dtype=np.float64))

    corner = _octant_volume(vx[:, :, None, None], vy[:, None, :, None], vz[:, None, None, :])
    partial = np.einsum("pkc,pabc->pabk", mz, corner)
    partial = np.einsum("pjb,pabk->pajk", my, partial)
    volumes = np.einsum("pia,pajk->pijk", mx, partial)
    fractions = volumes / BALL_VOLUME
    # cells outside the ball come out of the differencing as signed rounding residue
    return np.where(np.abs(fractions) < FRACTION_FLOOR, 0.0, fractions)


def sphere_voxel_overlap(kernel: Kernel3D, voxel_min: t.Sequence[float], voxel_edge: float) -> float:
    """
    Fraction of a uniform-sphere kernel falling inside a cubic voxel.

    A zero radius is a point mass: the result is 1 when the centre lies in the half-open voxel
    ``[min, min + edge)`` on every axis and 0 otherwise.
    """
    if not voxel_edge > 0:
        raise ValueError("voxel_edge must be positive")
    if kernel.radius < 0:
        raise ValueError("radius must be non-negative")

    center = np.asarray(kernel.center, dtype=np.float64)
    lower = np.asarray(voxel_min, dtype=np.float64)
    upper = lower + voxel_edge

    if kernel.radius == 0:
        return float(bool(np.all((center >= lower) & (center < upper))))

    nodes = (np.stack([lower, upper], axis=-1) - center[:, None]) / kernel.radius
    fraction = sphere_grid_fractions(nodes[0:1], nodes[1:2], nodes[2:3])
    return float(np.clip(fraction[0, 0, 0, 0], 0.0, 1.0))


def circle_rect_area(
    center: t.Sequence[float], radius: float, rect_min: t.Sequence[float], rect_edge: float
) -> float:
    """Exact area of the intersection of a disk with an axis-aligned square."""
    if not rect_edge > 0:
        raise ValueError("rect_edge must be positive")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius == 0:
        return 0.0

    cx, cy = (float(v) for v in center)
    lower = np.array([rect_min[0] - cx, rect_min[1] - cy]) / radius
    nodes = np.stack([lower, lower + rect_edge / radius], axis=-1)

    vy, my = _cell_operator(nodes[0:1])
    vz, mz = _cell_operator(nodes[1:2])
    corner = _quadrant_area(vy[0][:, None], vz[0][None, :])
    area = (my[0] @ corner @ mz[0].T).item()
    return min(max(area, 0.0), math.pi) * radius * radius


def tracer_points(n: int = 1000) -> FloatArray:
    """
    Deterministic equal-area sunflower lattice in the unit disk.

    Point ``j`` sits at radius ``sqrt((j + 0.5) / n)`` and angle ``j`` times the golden angle.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    j = np.arange(n, dtype=np.float64)
    radius = np.sqrt((j + 0.5) / n)
    angle = j * GOLDEN_ANGLE
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


def tracer_weights(n: int, mode: Kernel2DMode = Kernel2DMode.UNIFORM_DISK) -> FloatArray:
    if n < 1:
        raise ValueError("n must be at least 1")
    if mode is Kernel2DMode.UNIFORM_DISK:
        return np.full(n, 1.0 / n)

    # projected sphere: column length through the ball, sqrt(1 - r^2)
    r2 = (np.arange(n, dtype=np.float64) + 0.5) / n
    weights = np.sqrt(1.0 - r2)
    return weights / weights.sum()
