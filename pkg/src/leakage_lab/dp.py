"""Differential-privacy side quantities and the two ADP-style PML candidates.

Channel-only quantities (privacy loss, pure-DP level, privacy profile,
probabilistic-DP failure probability) range over every row of the channel.
``psi1`` and ``psi2`` depend on the prior and range over prior-supported
secrets only.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .core import TOL, Joint, as_channel
from .errors import DeltaOutOfRange, InvalidParams


def privacy_loss(channel) -> np.ndarray:
    """Table ``L[x, x', y] = log(channel(x,y) / channel(x',y))``.

    ``+inf`` where only the denominator vanishes, ``-inf`` where only the
    numerator does, NaN where both do (the outcome is impossible under both).
    """
    m = as_channel(channel).matrix
    num = m[:, None, :]
    den = m[None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(num) - np.log(den)
    out[(num == 0) & (den == 0)] = np.nan
    return out


def pure_dp_level(channel) -> float:
    """Largest privacy loss; ``inf`` when some outcome separates two rows."""
    loss = privacy_loss(channel)
    return float(max(np.nanmax(loss), 0.0))


def privacy_profile(channel, eps: float) -> float:
    """Smallest delta for which the channel is (eps, delta)-DP.

    ``max_{x,x'} sum_y max(0, channel(x,y) - e^eps channel(x',y))``.
    """
    m = as_channel(channel).matrix
    num, den = m[:, None, :], m[None, :, :]
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = np.exp(eps) * den
    # e^eps may overflow; a zero denominator still contributes nothing
    scaled[den == 0] = 0.0
    return float(np.clip(num - scaled, 0.0, None).sum(axis=2).max())


def privacy_profile_inverse(channel, delta: float) -> float:
    """Smallest eps >= 0 with ``privacy_profile(channel, eps) <= delta``.

    Found by root bracketing on the (continuous, non-increasing) profile.
    Returns ``inf`` when no finite eps reaches ``delta``.
    """
    if not 0.0 <= delta < 1.0:
        raise DeltaOutOfRange(f"delta must lie in [0, 1), got {delta!r}")
    f = lambda e: privacy_profile(channel, e) - delta
    if f(0.0) <= 0:
        return 0.0
    hi = 1.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e4:
            return math.inf
    return float(brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-14))


def dp_failure_probability(channel, eps: float) -> float:
    """Worst-case ``P_{Y|X=x}{L_{x,x'}(Y) > eps}`` over ordered pairs."""
    m = as_channel(channel).matrix
    loss = privacy_loss(m)
    with np.errstate(invalid="ignore"):
        exceed = loss > eps + TOL
    return float((exceed * m[:, None, :]).sum(axis=2).max())


def adp_tail_bound(eps: float, delta: float, k: int) -> float:
    """Bound on ``P{L > k eps}`` implied by (eps, delta)-DP, clamped to 1."""
    if not 0.0 < delta < 1.0:
        raise DeltaOutOfRange(f"delta must lie in (0, 1), got {delta!r}")
    if eps <= 0 or int(k) != k or k < 2:
        raise InvalidParams(f"need eps > 0 and integer k >= 2, got eps={eps!r}, k={k!r}")
    return min(1.0, delta / -math.expm1(-(k - 1) * eps))


def psi1(joint: Joint, eps: float) -> float:
    """Expected penalty ``(1 - e^{eps - l(Y)})^+`` under ``P_Y``."""
    s = joint.support
    lk = joint.leakages[s]
    penalty = np.where(lk > eps, -np.expm1(eps - lk), 0.0)
    return float((joint.marginal[s] * penalty).sum())


def psi2(joint: Joint, eps: float) -> float:
    """``max_x sum_y (channel(x,y) - e^eps P_Y(y))^+`` over prior-supported x.

    Equal to the largest ``P_{Y|X=x}(E) - e^eps P_Y(E)`` over events ``E``.
    """
    gap = joint.active_rows - math.exp(eps) * joint.marginal
    return float(np.clip(gap, 0.0, None).sum(axis=1).max())
