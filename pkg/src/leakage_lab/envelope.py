"""Bounds on the PML envelope and the post-processing search oracle.

The envelope at ``delta`` is the largest ``delta``-quantile of the leakage that
any post-processing of ``Y`` can produce.  It is bracketed here by

* an upper bound, ``min(maximal_leakage + log(1/delta), pml_max)``, and
* a lower bound, ``max(right quantile of Y, binary envelope)``,

and probed from below by :func:`search_envelope`, which evaluates an explicit
family of post-processings (deterministic partitions and the two-outcome
randomized merges of :func:`gap_closing_post`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import chain, permutations
from typing import Iterator, Sequence

import numpy as np

from .core import TOL, Channel, Joint, compose, pml_max, reduce
from .errors import (BudgetExceeded, EtaOutOfRange, OutcomeOutsideSupport, PriorMismatch,
                     ThetaOutOfRange, ValidationError, ZeroProbabilityEvent)
from .quantiles import (_check_delta, failure_probability, leakage_distribution, left_quantile,
                        right_quantile)


def maximal_leakage(joint: Joint) -> float:
    """``log sum_y max_x channel(x, y)`` over prior-supported x."""
    return float(math.log(joint.active_rows.max(axis=0).sum()))


def _check_weights(joint: Joint, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (joint.n_outputs,):
        raise ValidationError(f"event weights need shape ({joint.n_outputs},), got {w.shape}")
    if np.any(w < -TOL) or np.any(w > 1 + TOL):
        raise ValidationError("event weights must lie in [0, 1]")
    return np.clip(w, 0.0, 1.0)


def event_probability(joint: Joint, w) -> float:
    return float(_check_weights(joint, w) @ joint.marginal)


def event_leakage(joint: Joint, w) -> float:
    """Leakage of a (possibly randomized) event with inclusion weights ``w``."""
    w = _check_weights(joint, w)
    mass = float(w @ joint.marginal)
    if mass <= TOL:
        raise ZeroProbabilityEvent(f"event has probability {mass!r}")
    return float(math.log((joint.active_rows @ w).max() / mass))


@dataclass(frozen=True)
class BinaryEvent:
    """Optimal randomized event found by the greedy prefix construction."""

    value: float
    x: int
    weights: np.ndarray


def binary_envelope_event(joint: Joint, delta: float) -> BinaryEvent:
    """Greedy construction behind :func:`binary_envelope`, with its witness.

    For each secret the outcomes are ranked by ``channel(x,y)/P_Y(y)``
    (descending, ties by index) and filled in order until the event mass is
    ``delta``; the boundary outcome is included fractionally.
    """
    delta = _check_delta(delta)
    ys = joint.support_indices
    py = joint.marginal[ys]
    best = None
    for x in np.flatnonzero(joint.prior.support):
        row = joint.channel.matrix[x, ys]
        order = np.argsort(-(row / py), kind="stable")
        cum = np.cumsum(py[order])
        k = int(np.argmax(cum >= delta - TOL))
        p = cum[k - 1] if k else 0.0
        zeta = min(max((delta - p) / py[order[k]], 0.0), 1.0)
        v = (row[order[:k]].sum() + zeta * row[order[k]]) / delta
        if best is None or v > best[0]:
            w = np.zeros(joint.n_outputs)
            w[ys[order[:k]]] = 1.0
            w[ys[order[k]]] = zeta
            best = (v, int(x), w)
    v, x, w = best
    w.setflags(write=False)
    return BinaryEvent(float(math.log(v)), x, w)


def binary_envelope(joint: Joint, delta: float) -> float:
    """Largest leakage of a randomized event of probability ``delta``."""
    return binary_envelope_event(joint, delta).value


def envelope_upper_terms(joint: Joint, delta: float) -> tuple[float, float]:
    """The maximal-leakage term and the PML term of the upper bound."""
    delta = _check_delta(delta)
    return maximal_leakage(joint) - math.log(delta), pml_max(joint)


def envelope_upper(joint: Joint, delta: float) -> float:
    return min(envelope_upper_terms(joint, delta))


def envelope_lower(joint: Joint, delta: float) -> float:
    delta = _check_delta(delta)
    return max(right_quantile(leakage_distribution(joint), delta), binary_envelope(joint, delta))


@dataclass(frozen=True)
class EnvelopeBracket:
    delta: float
    lower: float
    upper: float
    lower_witness: str
    upper_source: str

    @property
    def tight(self) -> bool:
        return self.upper - self.lower <= TOL


def _describe_weights(joint: Joint, w: np.ndarray) -> str:
    parts = []
    for y in np.flatnonzero(w > 0):
        lab = joint.y_labels[y]
        parts.append(lab if w[y] >= 1.0 else f"{lab}@{w[y]:.6g}")
    return "{" + ", ".join(parts) + "}"


def envelope_bracket(joint: Joint, delta: float) -> EnvelopeBracket:
    delta = _check_delta(delta)
    ml_term, pml_term = envelope_upper_terms(joint, delta)
    rq = right_quantile(leakage_distribution(joint), delta)
    ev = binary_envelope_event(joint, delta)
    if rq >= ev.value:
        lower, witness = rq, "right quantile of the unprocessed output"
    else:
        lower = ev.value
        witness = (f"binary event {_describe_weights(joint, ev.weights)} "
                   f"at x={joint.x_labels[ev.x]}")
    if ml_term < pml_term:
        upper, source = ml_term, "maximal leakage + log(1/delta)"
    else:
        upper, source = pml_term, "pml_max"
    return EnvelopeBracket(delta, lower, upper, witness, source)


def gap_closing_post(joint: Joint, y1: int, y2: int, eta: float) -> Channel:
    """Randomized merge ``h_eta``: y1 -> bot; y2 -> bot w.p. eta, else diamond.

    The output alphabet has the same size as ``Y``: column ``y1`` plays the
    role of bot and column ``y2`` that of diamond; every other outcome is
    passed through unchanged.
    """
    y1, y2 = int(y1), int(y2)
    for y in (y1, y2):
        if not 0 <= y < joint.n_outputs or not joint.support[y]:
            raise OutcomeOutsideSupport(f"outcome {y} is not in the support of P_Y")
    if y1 == y2:
        raise ValidationError("y1 and y2 must differ")
    if not 0.0 < eta < 1.0:
        raise EtaOutOfRange(f"eta must lie in (0, 1), got {eta!r}")
    m = np.eye(joint.n_outputs)
    m[y2, y2] = 1.0 - eta
    m[y2, y1] = eta
    return Channel(m)


def gap_closing_labels(joint: Joint, y1: int, y2: int) -> list[str]:
    labels = list(joint.y_labels)
    labels[y1] = "bot"
    labels[y2] = "diamond"
    return labels


def composition_upper(joints: Sequence[Joint], delta: float) -> float:
    """Envelope upper bound for the non-adaptive composition of mechanisms on one secret."""
    delta = _check_delta(delta)
    if not joints:
        raise ValidationError("need at least one mechanism")
    p0 = joints[0].prior.probs
    for j in joints[1:]:
        p = j.prior.probs
        if p.shape != p0.shape or np.max(np.abs(p - p0)) > TOL:
            raise PriorMismatch("all mechanisms must share the same prior")
    return sum(maximal_leakage(j) for j in joints) - math.log(delta)


def lemma4_subset_witness(joint: Joint, w, theta_prime: float) -> np.ndarray:
    """Shrink an event to probability ``theta_prime`` without lowering its leakage.

    Keeps the outcomes with the highest information density for the secret
    that attains the event's leakage, splitting the boundary outcome.
    """
    w = _check_weights(joint, w)
    mass = float(w @ joint.marginal)
    if not 0.0 < theta_prime <= mass + TOL:
        raise ThetaOutOfRange(f"theta' must lie in (0, {mass!r}], got {theta_prime!r}")
    xs = np.flatnonzero(joint.prior.support)
    x = xs[int(np.argmax(joint.channel.matrix[xs] @ w))]
    ys = np.flatnonzero(joint.support & (w > 0))
    order = ys[np.argsort(-joint.ratios[x, ys], kind="stable")]
    out = np.zeros_like(w)
    remaining = min(theta_prime, mass)
    for y in order:
        take = min(w[y] * joint.marginal[y], remaining)
        out[y] = min(take / joint.marginal[y], w[y])
        remaining -= take
        if remaining <= 0:
            break
    return out


# -- search oracle -------------------------------------------------------------

@dataclass(frozen=True)
class OracleBudget:
    """Search family and size limits for the post-processing oracle.

    ``max_cells`` caps the number of cells in the deterministic partitions
    (``None`` for no cap).  The identity post-processing is always included.
    ``binary_event`` adds the randomized two-cell map built from the optimal
    event of :func:`binary_envelope_event` (envelope searches only).
    """

    max_cells: int | None = None
    eta_grid: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    max_candidates: int = 100_000
    partitions: bool = True
    gap_closing: bool = True
    binary_event: bool = True


@dataclass(frozen=True)
class OracleResult:
    value: float
    witness: str
    candidates: int
    alphabet: str


def _stirling2_row(n: int) -> list[int]:
    """``S(n, j)`` for j = 0..n."""
    row = [1]
    for i in range(1, n + 1):
        new = [0] * (i + 1)
        for j in range(1, i + 1):
            new[j] = j * (row[j] if j < len(row) else 0) + row[j - 1]
        row = new
    return row


def count_partitions(n: int, max_cells: int | None = None) -> int:
    m = n if max_cells is None else min(max_cells, n)
    return sum(_stirling2_row(n)[1:m + 1])


def set_partitions(n: int, max_cells: int | None = None) -> Iterator[list[int]]:
    """Restricted growth strings of length ``n`` with at most ``max_cells`` blocks."""
    m = n if max_cells is None else min(max_cells, n)
    if n == 0:
        return
    a = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield list(a)
            return
        for b in range(min(used + 1, m)):
            a[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(1, 1)


def _partition_post(joint: Joint, cols: np.ndarray, blocks: list[int]) -> Channel:
    k = max(blocks) + 1
    m = np.zeros((joint.n_outputs, k))
    m[:, 0] = 1.0
    for y, b in zip(cols, blocks):
        m[y, 0] = 0.0
        m[y, b] = 1.0
    return Channel(m)


def _describe_partition(joint: Joint, cols: np.ndarray, blocks: list[int]) -> str:
    cells: dict[int, list[str]] = {}
    for y, b in zip(cols, blocks):
        cells.setdefault(b, []).append(joint.y_labels[y])
    return "partition " + "|".join("{" + ",".join(c) + "}" for c in cells.values())


def _plan(joint: Joint, budget: OracleBudget) -> tuple[Joint, int]:
    """Pick the alphabet to partition and size the search, or refuse it."""
    base = joint
    n_gap = 0
    if budget.gap_closing:
        n = len(joint.support_indices)
        n_gap = n * (n - 1) * len(budget.eta_grid)
    n_part = 0
    if budget.partitions:
        n_part = count_partitions(len(base.support_indices), budget.max_cells)
        if 1 + n_part + n_gap > budget.max_candidates:
            # merging similar outcomes first shrinks the partition count
            base = reduce(joint)
            n_part = count_partitions(len(base.support_indices), budget.max_cells)
    total = 1 + n_part + n_gap
    if total > budget.max_candidates:
        raise BudgetExceeded("oracle search family too large", total, budget.max_candidates)
    return base, total


def _candidates(joint: Joint, base: Joint, budget: OracleBudget):
    """Yield (description, post-processed joint) in a fixed order."""
    yield "identity", joint
    if budget.partitions:
        cols = base.support_indices
        for blocks in set_partitions(len(cols), budget.max_cells):
            post = _partition_post(base, cols, blocks)
            yield _describe_partition(base, cols, blocks), compose(base, post)
    if budget.gap_closing:
        for y1, y2 in permutations(joint.support_indices.tolist(), 2):
            for eta in budget.eta_grid:
                post = gap_closing_post(joint, y1, y2, eta)
                desc = (f"h_eta(y1={joint.y_labels[y1]}, y2={joint.y_labels[y2]}, "
                        f"eta={eta:g})")
                yield desc, compose(joint, post, gap_closing_labels(joint, y1, y2))


def _binary_event_candidate(joint: Joint, delta: float):
    ev = binary_envelope_event(joint, delta)
    post = Channel(np.column_stack([ev.weights, 1.0 - ev.weights]))
    desc = f"binary event {_describe_weights(joint, ev.weights)} at x={joint.x_labels[ev.x]}"
    return desc, compose(joint, post, ["E", "not E"])


def _search(joint: Joint, budget: OracleBudget, score, extra=()) -> OracleResult:
    base, total = _plan(joint, budget)
    total += len(extra)
    best_val, best_desc = -math.inf, ""
    for desc, z in chain(_candidates(joint, base, budget), extra):
        v = score(leakage_distribution(z))
        # strict improvement only: the first candidate in enumeration order wins ties
        if v > best_val:
            best_val, best_desc = v, desc
    return OracleResult(float(best_val), best_desc, total,
                        "reduced" if base is not joint else "original")


def search_envelope(joint: Joint, delta: float, budget: OracleBudget = OracleBudget(),
                    quantile: str = "right") -> OracleResult:
    """Largest ``delta``-quantile over the search family (a lower bound on the envelope).

    Either quantile's supremum over all post-processings is the envelope.
    Over a finite family the right quantile gives the larger bound and always
    includes the unprocessed output; ``quantile="left"`` probes how close the
    family gets to closing the left/right gap instead.
    """
    delta = _check_delta(delta)
    if quantile not in ("right", "left"):
        raise ValidationError(f"quantile must be 'right' or 'left', got {quantile!r}")
    q = right_quantile if quantile == "right" else left_quantile
    # the event's own right quantile is at least the binary envelope, which
    # keeps the search at or above the analytic lower bound
    extra = [_binary_event_candidate(joint, delta)] if budget.binary_event else []
    return _search(joint, budget, lambda ld: q(ld, delta), extra)


def oracle_envelope(joint: Joint, delta: float, budget: OracleBudget = OracleBudget(),
                    quantile: str = "right") -> float:
    return search_envelope(joint, delta, budget, quantile).value


def search_closed_delta(joint: Joint, eps: float, budget: OracleBudget = OracleBudget()) -> OracleResult:
    """Largest failure probability at ``eps`` over the search family."""
    if eps < 0:
        raise ValidationError(f"eps must be non-negative, got {eps!r}")
    return _search(joint, budget, lambda ld: failure_probability(ld, eps))


def oracle_closed_delta(joint: Joint, eps: float, budget: OracleBudget = OracleBudget()) -> float:
    return search_closed_delta(joint, eps, budget).value
