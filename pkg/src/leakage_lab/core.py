"""Finite probability plumbing: priors, channels, joints and per-outcome PML.

All quantities are in nats.  Matrices are row-major with rows indexed by the
secret ``x`` and columns by the output ``y``.  Outcome indices in the API are
0-based; the default outcome labels are the 1-based strings ``"1"``, ``"2"``, ...
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotAProbabilityVector, OutcomeOutsideSupport

TOL = float(os.environ.get("LEAKAGE_LAB_TOL", "1e-9"))
SIM_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Prior:
    """Probability vector over the secret alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise NotAProbabilityVector(f"prior must be a non-empty vector, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise NotAProbabilityVector("prior has negative or non-finite entries")
        if abs(p.sum() - 1.0) > TOL:
            raise NotAProbabilityVector(f"prior sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", _frozen(p))

    def __len__(self):
        return self.probs.size

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    @property
    def min_positive(self) -> float:
        return float(self.probs[self.support].min())


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix ``P_{Y|X}`` (also used for post-processings)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise NotAProbabilityVector(f"channel must be a non-empty matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise NotAProbabilityVector("channel has negative or non-finite entries")
        sums = m.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > TOL)
        if bad.size:
            raise NotAProbabilityVector(f"channel row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Channel":
        return cls(np.eye(n))


def as_prior(p) -> Prior:
    return p if isinstance(p, Prior) else Prior(p)


def as_channel(c) -> Channel:
    return c if isinstance(c, Channel) else Channel(c)


def _default_labels(n: int) -> tuple[str, ...]:
    return tuple(str(i + 1) for i in range(n))


@dataclass(frozen=True, eq=False)
class Joint:
    """A validated (prior, channel) pair.

    Use :func:`make_joint` rather than the constructor.  Outcomes with zero
    output probability stay in the channel (so post-processings keep their
    shape) but are excluded from every leakage query via ``support``.
    """

    prior: Prior
    channel: Channel
    marginal: np.ndarray
    support: np.ndarray
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]

    @property
    def n_inputs(self) -> int:
        return self.channel.n_inputs

    @property
    def n_outputs(self) -> int:
        return self.channel.n_outputs

    @property
    def n_dropped(self) -> int:
        """Number of outcomes with zero probability."""
        return int(self.n_outputs - self.support.sum())

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.support)

    @cached_property
    def active_rows(self) -> np.ndarray:
        """Channel restricted to prior-supported secrets."""
        return self.channel.matrix[self.prior.support]

    @cached_property
    def ratios(self) -> np.ndarray:
        """``channel(x, y) / P_Y(y)`` for all x, with NaN on unsupported columns."""
        out = np.full(self.channel.matrix.shape, np.nan)
        s = self.support
        out[:, s] = self.channel.matrix[:, s] / self.marginal[s]
        out.setflags(write=False)
        return out

    @cached_property
    def leakages(self) -> np.ndarray:
        """Per-outcome PML; NaN for outcomes outside the support."""
        out = np.full(self.n_outputs, np.nan)
        r = self.ratios[self.prior.support][:, self.support]
        out[self.support] = np.log(r.max(axis=0))
        out.setflags(write=False)
        return out


def make_joint(prior, channel, x_labels: Sequence[str] | None = None,
               y_labels: Sequence[str] | None = None) -> Joint:
    """Validate a prior/channel pair and build the joint distribution.

    Examples
    --------
    >>> j = make_joint([0.5, 0.5], [[0.9, 0, 0.1], [0, 0.9, 0.1]])
    >>> j.marginal.round(12).tolist()
    [0.45, 0.45, 0.1]
    """
    prior = as_prior(prior)
    channel = as_channel(channel)
    if len(prior) != channel.n_inputs:
        raise DimensionMismatch(
            f"prior has {len(prior)} entries but channel has {channel.n_inputs} rows")
    x_labels = tuple(x_labels) if x_labels is not None else _default_labels(channel.n_inputs)
    y_labels = tuple(y_labels) if y_labels is not None else _default_labels(channel.n_outputs)
    if len(x_labels) != channel.n_inputs:
        raise DimensionMismatch(f"{len(x_labels)} x labels for {channel.n_inputs} rows")
    if len(y_labels) != channel.n_outputs:
        raise DimensionMismatch(f"{len(y_labels)} y labels for {channel.n_outputs} columns")
    marginal = prior.probs @ channel.matrix
    support = marginal > 0
    support.setflags(write=False)
    return Joint(prior, channel, _frozen(marginal), support, x_labels, y_labels)


def compose(joint: Joint, post, y_labels: Sequence[str] | None = None) -> Joint:
    """Post-process the output: ``P_{Z|X} = P_{Z|Y} o P_{Y|X}``."""
    post = as_channel(post)
    if post.n_inputs != joint.n_outputs:
        raise DimensionMismatch(
            f"post-processing has {post.n_inputs} rows, joint has {joint.n_outputs} outcomes")
    m = joint.channel.matrix @ post.matrix
    # re-normalise away rounding so the product passes validation at any size
    m = np.clip(m, 0.0, None)
    m /= m.sum(axis=1, keepdims=True)
    return make_joint(joint.prior, Channel(m), joint.x_labels, y_labels)


def _check_outcome(joint: Joint, y: int) -> int:
    y = int(y)
    if not 0 <= y < joint.n_outputs or not joint.support[y]:
        raise OutcomeOutsideSupport(f"outcome {y} is not in the support of P_Y")
    return y


def posterior(joint: Joint, y: int) -> Prior:
    y = _check_outcome(joint, y)
    post = joint.prior.probs * joint.channel.matrix[:, y] / joint.marginal[y]
    return Prior(post / post.sum())


def info_density(joint: Joint) -> np.ndarray:
    """Matrix of ``i(x;y) = log(channel(x,y) / P_Y(y))``.

    Unsupported columns are NaN (absent); zero channel entries on supported
    columns are ``-inf``.
    """
    with np.errstate(divide="ignore"):
        out = np.log(joint.ratios)
    out.setflags(write=False)
    return out


def pml(joint: Joint, y: int) -> float:
    """Pointwise maximal leakage of outcome ``y``."""
    return float(joint.leakages[_check_outcome(joint, y)])


def pml_max(joint: Joint) -> float:
    """Smallest epsilon for which the joint satisfies epsilon-PML."""
    return float(np.nanmax(joint.leakages))


def _similar(a: np.ndarray, b: np.ndarray) -> bool:
    # cross-ratio test: a = t*b  iff  a_i b_j == a_j b_i for all i, j
    return bool(np.all(np.abs(np.outer(a, b) - np.outer(b, a)) <= SIM_TOL))


def reduce(joint: Joint) -> Joint:
    """Merge similar (proportional) outcomes by summing their columns.

    Similarity is judged on prior-supported rows only.  Outcomes outside the
    support, if any, are pooled into one trailing column labelled by
    concatenation like every other merged group.
    """
    rows = joint.prior.support
    m = joint.channel.matrix
    groups: list[list[int]] = []
    for y in joint.support_indices:
        col = m[rows, y]
        for g in groups:
            if _similar(col, m[rows, g[0]]):
                g.append(int(y))
                break
        else:
            groups.append([int(y)])
    dead = np.flatnonzero(~joint.support).tolist()
    if dead:
        groups.append(dead)
    cols = np.stack([m[:, g].sum(axis=1) for g in groups], axis=1)
    labels = ["+".join(joint.y_labels[i] for i in g) for g in groups]
    return make_joint(joint.prior, Channel(cols), joint.x_labels, labels)
