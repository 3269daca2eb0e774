"""Concrete mechanisms with closed-form envelope results.

k-randomized response (k-RR) keeps the true symbol with probability
``alpha = e^r / (e^r + k - 1)`` and otherwise reports one of the other
``k - 1`` symbols uniformly (each with probability ``beta``).  Its output
marginal is ``q_j = beta + (alpha - beta) p_j`` and outcome ``j`` leaks
``log(alpha / q_j)``.

The envelope results below assume the prior sorted ascending.  Inputs need
not be sorted: :func:`krr_regime` sorts them and keeps the permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TOL, Channel, Joint, Prior, as_prior, make_joint
from .errors import (DeltaOutsideRegime, EpsOutsideHighPrivacyRegime, InvalidParams,
                     PriorConditionViolated, ZeroPriorEntry)
from .quantiles import _check_delta


@dataclass(frozen=True)
class KrrParams:
    k: int
    eps_r: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise InvalidParams(f"k must be an integer >= 2, got {self.k!r}")
        if not self.eps_r > 0 or not math.isfinite(self.eps_r):
            raise InvalidParams(f"eps_r must be positive and finite, got {self.eps_r!r}")

    @property
    def alpha(self) -> float:
        # divided through by e^r so large eps_r does not overflow
        return 1.0 / (1.0 + (self.k - 1) * math.exp(-self.eps_r))

    @property
    def beta(self) -> float:
        return math.exp(-self.eps_r) / (1.0 + (self.k - 1) * math.exp(-self.eps_r))


def krr_channel(params: KrrParams) -> Channel:
    m = np.full((params.k, params.k), params.beta)
    np.fill_diagonal(m, params.alpha)
    return Channel(m)


def krr_joint(params: KrrParams, prior) -> Joint:
    return make_joint(prior, krr_channel(params))


def extremal_threshold(prior) -> float:
    """Upper end of the high-privacy regime, ``-log(1 - min_x p_x)``."""
    return -math.log1p(-float(as_prior(prior).probs.min()))


def pml_extremal_channel(prior, eps: float) -> Channel:
    """Utility-optimal mechanism under eps-PML in the high-privacy regime.

    Diagonal ``1 - e^eps (1 - p_i)``, off-diagonal ``e^eps p_j``.  Every
    outcome of the resulting joint leaks exactly ``eps``.
    """
    p = as_prior(prior).probs
    if np.any(p <= 0):
        raise ZeroPriorEntry("the extremal mechanism needs a full-support prior")
    limit = extremal_threshold(p)
    if not 0 < eps < limit:
        raise EpsOutsideHighPrivacyRegime(
            f"eps={eps!r} is outside the high-privacy regime (0, -log(1 - min p)) = (0, {limit!r})")
    e = math.exp(eps)
    m = np.tile(e * p, (p.size, 1))
    np.fill_diagonal(m, 1.0 - e * (1.0 - p))
    return Channel(m)


def pml_extremal_joint(prior, eps: float) -> Joint:
    return make_joint(prior, pml_extremal_channel(prior, eps))


def four_level_prior(k: int, rho: float) -> Prior:
    """Prior constant on four equal blocks with masses ``(1 -+ 3rho, 1 -+ rho) / k``."""
    if int(k) != k or k < 4 or k % 4:
        raise InvalidParams(f"k must be a positive multiple of 4, got {k!r}")
    if not 0 < rho < 1 / 3:
        raise InvalidParams(f"rho must lie in (0, 1/3), got {rho!r}")
    levels = np.array([1 - 3 * rho, 1 - rho, 1 + rho, 1 + 3 * rho])
    r = (4 * np.arange(k)) // k
    return Prior(levels[r] / k)


@dataclass(frozen=True)
class KrrRegime:
    """Where ``delta`` falls relative to the sorted output marginal.

    ``N`` is 1-based: ``sum_{j<N} q_j < delta <= sum_{j<=N} q_j``, and
    ``delta = sum_{j<N} q_j + theta q_N``.
    """

    params: KrrParams
    p: np.ndarray
    perm: np.ndarray
    q: np.ndarray
    delta: float
    N: int
    theta: float
    theta1: float
    theta2: float
    condition_holds: bool

    @property
    def leak_prev(self) -> float:
        """Leakage of outcome N-1."""
        return math.log(self.params.alpha / self.q[self.N - 2])

    @property
    def leak_N(self) -> float:
        return math.log(self.params.alpha / self.q[self.N - 1])

    def middle(self, theta: float | None = None) -> float:
        """Middle piece ``log(((N-1) alpha + theta beta) / delta)``.

        With an explicit ``theta``, delta is taken as the one matching it.
        """
        a, b = self.params.alpha, self.params.beta
        if theta is None:
            theta, delta = self.theta, self.delta
        else:
            delta = self.q[: self.N - 1].sum() + theta * self.q[self.N - 1]
        return math.log(((self.N - 1) * a + theta * b) / delta)


def _sorted_q(params: KrrParams, prior) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = as_prior(prior).probs
    if p.size != params.k:
        raise InvalidParams(f"prior has {p.size} entries, k-RR needs {params.k}")
    perm = np.argsort(p, kind="stable")
    ps = p[perm]
    q = params.beta + (params.alpha - params.beta) * ps
    return ps, perm, q


def krr_q1(params: KrrParams, prior) -> float:
    return float(_sorted_q(params, prior)[2][0])


def krr_regime(params: KrrParams, prior, delta: float) -> KrrRegime:
    delta = _check_delta(delta)
    ps, perm, q = _sorted_q(params, prior)
    if delta <= q[0]:
        raise DeltaOutsideRegime(f"delta={delta!r} is not above q_1={q[0]!r}")
    a, b = params.alpha, params.beta
    cum = np.cumsum(q)
    N = max(int(np.argmax(cum >= delta - TOL)) + 1, 2)
    S_prev = cum[N - 2]
    theta = min(max((delta - S_prev) / q[N - 1], 0.0), 1.0)
    qN, qP = q[N - 1], q[N - 2]
    theta1 = a * ((N - 2) * qP - q[: N - 2].sum()) / (a * qN - b * qP)
    theta2 = a * ((N - 1) * qN - q[: N - 1].sum()) / (qN * (a - b))
    bound = (a * ps[: N - 1].sum() + b) / ((N - 2) * a + b)
    return KrrRegime(params, ps, perm, q, delta, N, float(theta), float(theta1),
                     float(theta2), bool(ps[N - 1] <= bound + TOL))


def krr_envelope_exact_small_delta(params: KrrParams, prior, delta: float) -> float:
    """Envelope for ``delta <= q_1``: the leakage of the least likely outcome."""
    delta = _check_delta(delta)
    q1 = krr_q1(params, prior)
    if delta > q1 + TOL:
        raise DeltaOutsideRegime(f"delta={delta!r} exceeds q_1={q1!r}")
    return math.log(params.alpha / q1)


def krr_envelope_upper_terms(params: KrrParams, prior, delta: float) -> tuple[float, float]:
    delta = _check_delta(delta)
    q1 = krr_q1(params, prior)
    return math.log(params.k * params.alpha / delta), math.log(params.alpha / q1)


def krr_envelope_upper(params: KrrParams, prior, delta: float) -> float:
    delta = _check_delta(delta)
    q1 = krr_q1(params, prior)
    if delta <= q1:
        raise DeltaOutsideRegime(f"delta={delta!r} is not above q_1={q1!r}")
    return min(krr_envelope_upper_terms(params, prior, delta))


@dataclass(frozen=True)
class KrrLowerBound:
    """Value of the piecewise lower bound and which piece produced it.

    ``piece`` is one of ``"first"``, ``"middle"``, ``"last"`` or
    ``"fallback"``; the fallback (the leakage of outcome N) is used when the
    prior condition fails.
    """

    value: float
    piece: str
    condition_holds: bool
    regime: KrrRegime


def krr_envelope_lower(params: KrrParams, prior, delta: float,
                       strict: bool = False) -> KrrLowerBound:
    """Piecewise lower bound ``h_delta(theta)`` for ``q_1 < delta < 1``.

    When the prior condition fails the fallback value is returned with
    ``condition_holds=False``, or :class:`PriorConditionViolated` (carrying
    the fallback) is raised if ``strict``.
    """
    r = krr_regime(params, prior, delta)
    if not r.condition_holds:
        if strict:
            raise PriorConditionViolated(
                f"prior condition fails at N={r.N}; fallback bound log(alpha/q_N)={r.leak_N!r}",
                r.leak_N)
        return KrrLowerBound(r.leak_N, "fallback", False, r)
    if r.theta <= r.theta1:
        return KrrLowerBound(r.leak_prev, "first", True, r)
    if r.theta <= r.theta2:
        return KrrLowerBound(r.middle(), "middle", True, r)
    return KrrLowerBound(r.leak_N, "last", True, r)


def krr_binary_envelope(params: KrrParams, prior, delta: float) -> float:
    r = krr_regime(params, prior, delta)
    a, b = params.alpha, params.beta
    return math.log((a + (r.N - 2 + r.theta) * b) / r.delta)


def krr_adp_curve(params: KrrParams, delta: float) -> float:
    """Smallest eps for which k-RR is (eps, delta)-DP."""
    delta = _check_delta(delta)
    a, b = params.alpha, params.beta
    if delta >= a - b:
        return 0.0
    return math.log((a - delta) / b)


def krr_breakpoints(params: KrrParams, prior) -> np.ndarray:
    """Every delta in (0, 1) where a k-RR curve changes formula.

    Cumulative output masses, the deltas where theta hits theta1 or theta2,
    the crossover of the two upper-bound terms and the point where the ADP
    curve reaches zero.
    """
    _, _, q = _sorted_q(params, prior)
    a, b = params.alpha, params.beta
    cum = np.cumsum(q)
    pts = list(cum[:-1])
    for N in range(2, params.k + 1):
        qN, qP = q[N - 1], q[N - 2]
        t1 = a * ((N - 2) * qP - q[: N - 2].sum()) / (a * qN - b * qP)
        t2 = a * ((N - 1) * qN - q[: N - 1].sum()) / (qN * (a - b))
        for t in (t1, t2):
            if 0 < t < 1:
                pts.append(cum[N - 2] + t * qN)
    pts.append(params.k * q[0])
    pts.append(a - b)
    pts = np.array(sorted(p for p in pts if 0 < p < 1))
    return pts
