"""Brute-force reference implementations and random instance generators.

Everything here is written independently of the library's fast paths
(subset enumeration instead of sorted scans, LP vertex enumeration instead
of the greedy sort) and is only meant for small alphabets.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from leakage_lab import make_joint

SLACK = 1e-9


def subsets(n):
    for r in range(n + 1):
        yield from combinations(range(n), r)


def subset_left_quantile(values, masses, delta):
    """min over atom sets A with P(A) >= 1 - delta of max_A value."""
    best = math.inf
    for A in subsets(len(values)):
        if A and sum(masses[i] for i in A) >= 1 - delta - SLACK:
            best = min(best, max(values[i] for i in A))
    return best


def subset_right_quantile(values, masses, delta):
    """max over atom sets A with P(A) >= delta of min_A value."""
    best = -math.inf
    for A in subsets(len(values)):
        if A and sum(masses[i] for i in A) >= delta - SLACK:
            best = max(best, min(values[i] for i in A))
    return best


def event_form_psi2(joint, eps):
    """max over prior-supported x and events E of P(E | x) - e^eps P_Y(E)."""
    rows = joint.channel.matrix[joint.prior.probs > 0]
    py = joint.marginal
    best = 0.0
    for E in subsets(joint.n_outputs):
        E = list(E)
        for c in rows:
            best = max(best, c[E].sum() - math.exp(eps) * py[E].sum())
    return best


def event_form_profile(matrix, eps):
    """max over ordered row pairs and events of P(E | x) - e^eps P(E | x')."""
    m = np.asarray(matrix, dtype=float)
    best = 0.0
    for E in subsets(m.shape[1]):
        E = list(E)
        s = m[:, E].sum(axis=1)
        best = max(best, (s[:, None] - math.exp(eps) * s[None, :]).max())
    return best


def binary_envelope_vertices(joint, delta):
    """Largest event leakage over randomized events of probability exactly delta.

    For each x this is a fractional knapsack LP whose vertices have at most
    one fractional weight, so enumerating every subset S plus an optional
    boundary outcome covers all vertices.
    """
    rows = joint.channel.matrix[joint.prior.probs > 0]
    py = joint.marginal
    supp = [y for y in range(joint.n_outputs) if py[y] > 0]
    best = -math.inf
    for S in subsets(len(supp)):
        S = [supp[i] for i in S]
        mass = py[S].sum()
        if mass > delta + SLACK:
            continue
        num = rows[:, S].sum(axis=1)
        if abs(mass - delta) <= SLACK:
            best = max(best, num.max() / delta)
        for b in supp:
            if b in S:
                continue
            w = (delta - mass) / py[b]
            if -SLACK <= w <= 1 + SLACK:
                w = min(max(w, 0.0), 1.0)
                best = max(best, (num + w * rows[:, b]).max() / delta)
    return math.log(best)


def random_joint(rng, nx=None, ny=None, sparsity=0.25, zero_prior=0.0, similar=0.0):
    """Random (prior, channel) pair.

    ``sparsity`` zeroes channel entries, ``zero_prior`` is the chance one
    prior entry is set to 0, ``similar`` the chance of splitting a column into
    two proportional ones.
    """
    nx = int(nx if nx is not None else rng.integers(1, 6))
    ny = int(ny if ny is not None else rng.integers(1, 7))
    prior = rng.dirichlet(np.ones(nx))
    if nx > 1 and rng.random() < zero_prior:
        prior[rng.integers(nx)] = 0.0
        prior /= prior.sum()
    ch = rng.dirichlet(np.ones(ny), size=nx)
    ch[rng.random((nx, ny)) < sparsity] = 0.0
    for r in ch:
        if r.sum() == 0:
            r[rng.integers(ny)] = 1.0
    ch /= ch.sum(axis=1, keepdims=True)
    if ny > 1 and rng.random() < similar:
        y = rng.integers(ny)
        t = rng.uniform(0.2, 0.8)
        ch = np.column_stack([ch, (1 - t) * ch[:, y]])
        ch[:, y] *= t
    return make_joint(prior, ch)


def random_post(rng, n_in, n_out=None, deterministic=False):
    n_out = int(n_out if n_out is not None else rng.integers(1, 6))
    if deterministic:
        m = np.zeros((n_in, n_out))
        m[np.arange(n_in), rng.integers(n_out, size=n_in)] = 1.0
        return m
    return rng.dirichlet(np.ones(n_out), size=n_in)


def random_full_prior(rng, n):
    p = rng.dirichlet(np.ones(n))
    # keep entries away from 0 so thresholds stay well conditioned
    p = 0.8 * p + 0.2 / n
    return p / p.sum()
