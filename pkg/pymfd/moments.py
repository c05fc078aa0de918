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
"""Posterior moments, the moment-network losses with their gradients, and the train/validation/test split."""
from __future__ import annotations

import enum
import logging
import math
import os
import typing as t

import numpy as np
import numpy.typing as npt

from pymfd import errors

__all__ = [
    "DEFAULT_EPSILON",
    "DEFAULT_FRACTIONS",
    "LossVariant",
    "MomentsBatch",
    "posterior_moments",
    "loss_moments_log",
    "loss_moments_sum",
    "loss_gradients",
    "split_by_simulation",
    "read_predictions",
]

_LOGGER = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-12
DEFAULT_FRACTIONS = (0.90, 0.05, 0.05)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
PathLike = t.Union[str, "os.PathLike[str]"]


class LossVariant(enum.Enum):
    LOG = "log"
    SUM = "sum"


class MomentsBatch:
    """
    True parameters and predicted posterior means and standard deviations, each ``B x P``.

    Parameters are expected on the normalised ``[0, 1]`` scale of :func:`pymfd.params.normalize`.
    """

    __slots__ = ("theta", "mu", "sigma")

    def __init__(self, theta: npt.ArrayLike, mu: npt.ArrayLike, sigma: npt.ArrayLike) -> None:
        self.theta: FloatArray = np.atleast_2d(np.asarray(theta, dtype=np.float64))
        self.mu: FloatArray = np.atleast_2d(np.asarray(mu, dtype=np.float64))
        self.sigma: FloatArray = np.atleast_2d(np.asarray(sigma, dtype=np.float64))

        if not self.theta.shape == self.mu.shape == self.sigma.shape or self.theta.ndim != 2:
            raise errors.ShapeMismatch(
                f"theta {self.theta.shape}, mu {self.mu.shape} and sigma {self.sigma.shape} must share one B x P shape"
            )
        if self.theta.shape[0] < 1 or self.theta.shape[1] < 1:
            raise errors.EmptyInput("A moments batch needs at least one row and one parameter")
        if (self.sigma < 0).any():
            raise errors.DataError("Posterior standard deviations must be non-negative")

    def __repr__(self) -> str:
        return f"MomentsBatch(B={self.batch_size}, P={self.n_params})"

    @property
    def batch_size(self) -> int:
        return int(self.theta.shape[0])

    @property
    def n_params(self) -> int:
        return int(self.theta.shape[1])

    def terms(self) -> t.Tuple[FloatArray, FloatArray]:
        """Per-parameter sums over the batch of the squared residual and of the variance mismatch."""
        residual2 = (self.theta - self.mu) ** 2
        mismatch = residual2 - self.sigma**2
        return residual2.sum(axis=0), (mismatch**2).sum(axis=0)


def posterior_moments(
    samples: npt.ArrayLike, weights: t.Optional[npt.ArrayLike] = None
) -> t.Tuple[FloatArray, FloatArray]:
    """
    Marginal posterior mean and standard deviation of every parameter from ``N x P`` samples.

    These are the two quantities the moment network is trained to predict.
    """
    draws = np.asarray(samples, dtype=np.float64)
    if draws.ndim == 1:
        draws = draws[:, None]
    if draws.shape[0] == 0:
        raise errors.EmptyInput("No posterior samples")
    w = np.ones(draws.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (draws.shape[0],) or (w < 0).any() or not w.sum() > 0:
        raise errors.ShapeMismatch("weights must be one non-negative value per sample with a positive sum")

    mean = np.average(draws, axis=0, weights=w)
    variance = np.average((draws - mean) ** 2, axis=0, weights=w)
    return mean, np.sqrt(variance)


def loss_moments_log(batch: MomentsBatch, epsilon: float = DEFAULT_EPSILON) -> float:
    """
    Sum over parameters of the log of each loss term, each clamped below at ``epsilon``.

    Taking logs puts every parameter's terms on the same footing regardless of how well the
    parameter is constrained.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    first, second = batch.terms()
    return float(np.log(np.maximum(epsilon, first)).sum() + np.log(np.maximum(epsilon, second)).sum())


def loss_moments_sum(batch: MomentsBatch) -> float:
    first, second = batch.terms()
    return float(first.sum() + second.sum())


def loss_gradients(
    batch: MomentsBatch, which: t.Union[LossVariant, str] = LossVariant.LOG, epsilon: float = DEFAULT_EPSILON
) -> t.Tuple[FloatArray, FloatArray]:
    """
    Analytic gradients of a loss with respect to the predicted means and standard deviations.

    Args:
        batch (:obj:`MomentsBatch`): Batch to differentiate at.
        which: ``"log"`` or ``"sum"``.
        epsilon (:obj:`float`): Clamp of the log variant; clamped terms have zero gradient.

    Returns:
        ``(dL/dmu, dL/dsigma)``, both ``B x P``.
    """
    variant = LossVariant(which)
    residual = batch.theta - batch.mu
    mismatch = residual**2 - batch.sigma**2

    d_first_d_mu = -2.0 * residual
    d_second_d_mu = -4.0 * residual * mismatch
    d_second_d_sigma = -4.0 * batch.sigma * mismatch

    if variant is LossVariant.SUM:
        return d_first_d_mu + d_second_d_mu, d_second_d_sigma

    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    first, second = batch.terms()
    scale_first = np.divide(1.0, first, out=np.zeros_like(first), where=first > epsilon)
    scale_second = np.divide(1.0, second, out=np.zeros_like(second), where=second > epsilon)
    return d_first_d_mu * scale_first + d_second_d_mu * scale_second, d_second_d_sigma * scale_second


def split_by_simulation(
    group_ids: npt.ArrayLike,
    fractions: t.Tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 0,
) -> t.Tuple[IntArray, IntArray, IntArray]:
    """
    Split items into training, validation and test sets without ever separating a group.

    Groups (simulations) are shuffled with ``seed``; the validation and test sets take
    ``round(fraction * n_groups)`` groups each and the training set keeps the rest.

    Returns:
        Sorted item indices of the training, validation and test sets.
    """
    ids = np.asarray(group_ids)
    if ids.size == 0:
        raise errors.EmptyInput("No items to split")
    if len(fractions) != 3 or any(f < 0 for f in fractions) or not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise ValueError(f"fractions must be three non-negative numbers summing to 1, got {fractions}")

    groups = np.unique(ids)
    n_groups = len(groups)
    n_validation = min(n_groups, math.floor(fractions[1] * n_groups + 0.5))
    n_test = min(n_groups - n_validation, math.floor(fractions[2] * n_groups + 0.5))

    shuffled = groups[np.random.default_rng(seed).permutation(n_groups)]
    validation_groups = shuffled[:n_validation]
    test_groups = shuffled[n_validation : n_validation + n_test]

    validation = np.flatnonzero(np.isin(ids, validation_groups))
    test = np.flatnonzero(np.isin(ids, test_groups))
    train = np.flatnonzero(~np.isin(ids, shuffled[: n_validation + n_test]))
    _LOGGER.debug("split %d groups into %d/%d/%d", n_groups, n_groups - n_validation - n_test, n_validation, n_test)
    return train, validation, test


def read_predictions(path: PathLike) -> MomentsBatch:
    """
    Read a whitespace separated prediction table.

    Each row holds ``P`` true values, ``P`` predicted means and ``P`` predicted standard
    deviations; ``#`` starts a comment.
    """
    source = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fp:
            lines = fp.read().split("\n")
    except OSError as ex:
        raise errors.IoFailure(f"Could not read predictions {source!r}: {ex}") from ex

    rows: t.List[t.List[float]] = []
    for line_no, line in enumerate(lines, start=1):
        content = line.split("#", 1)[0]
        if not content.strip():
            continue
        items = content.split()
        width = len(rows[0]) if rows else None
        if len(items) % 3 or (width is not None and len(items) != width):
            expected = "a multiple of 3" if width is None else str(width)
            raise errors.ParseError(f"expected {expected} values, found {len(items)}", line_no, line, (), source)
        try:
            rows.append([float(v) for v in items])
        except ValueError:
            bad = next(v for v in items if not _is_float(v))
            start = content.index(bad)
            at = range(start, start + len(bad))
            raise errors.ParseError(f"{bad!r} is not a number", line_no, line, at, source) from None

    if not rows:
        raise errors.EmptyInput(f"{source} holds no predictions")
    table = np.array(rows)
    p = table.shape[1] // 3
    return MomentsBatch(table[:, :p], table[:, p : 2 * p], table[:, 2 * p :])


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True
