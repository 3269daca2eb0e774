"""The leakage random variable: its distribution, tail and quantiles.

``left_quantile`` is the generalized inverse ``inf{t : C(t) >= 1 - delta}`` and
``right_quantile`` is ``sup{t : C(t) <= 1 - delta}``, where ``C`` is the CDF of
the per-outcome leakage under ``P_Y``.  The ``*_variational`` functions compute
the same numbers through their min-max / max-min set formulations and exist
as cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TOL, Joint
from .errors import DeltaOutOfRange, NotAProbabilityVector


@dataclass(frozen=True, eq=False)
class LeakageDistribution:
    """Atoms of the leakage distribution, ascending by value.

    Values closer than ``TOL`` are merged on construction (the smallest value
    of a cluster is kept and the masses are added).
    """

    values: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        m = np.asarray(self.masses, dtype=float).ravel()
        if v.shape != m.shape or v.size == 0:
            raise NotAProbabilityVector("values and masses must be non-empty and equally long")
        keep = m > 0
        v, m = v[keep], m[keep]
        if abs(m.sum() - 1.0) > TOL:
            raise NotAProbabilityVector(f"atom masses sum to {m.sum()!r}, not 1")
        order = np.argsort(v, kind="stable")
        v, m = v[order], m[order]
        vals, mass = [v[0]], [m[0]]
        for a, b in zip(v[1:], m[1:]):
            if a - vals[-1] <= TOL:
                mass[-1] += b
            else:
                vals.append(a)
                mass.append(b)
        vals, mass = np.array(vals), np.array(mass)
        vals.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "masses", mass)

    def __len__(self):
        return self.values.size

    @property
    def cdf(self) -> np.ndarray:
        """Cumulative mass up to and including each atom."""
        return np.cumsum(self.masses)

    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.masses.tolist()))


def leakage_distribution(joint: Joint) -> LeakageDistribution:
    s = joint.support
    return LeakageDistribution(joint.leakages[s], joint.marginal[s])


def failure_probability(ld: LeakageDistribution, eps: float) -> float:
    """``P{leakage > eps}``; atoms within ``TOL`` of ``eps`` do not count."""
    return float(ld.masses[ld.values > eps + TOL].sum())


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise DeltaOutOfRange(f"delta must lie in (0, 1), got {delta!r}")
    return delta


def left_quantile(ld: LeakageDistribution, delta: float) -> float:
    """Smallest atom whose cumulative mass reaches ``1 - delta``."""
    delta = _check_delta(delta)
    i = int(np.argmax(ld.cdf >= 1.0 - delta - TOL))
    return float(ld.values[i])


def right_quantile(ld: LeakageDistribution, delta: float) -> float:
    """Largest atom whose upper tail (atoms at or above it) carries mass >= ``delta``."""
    delta = _check_delta(delta)
    above = ld.cdf > 1.0 - delta + TOL
    # the last atom always qualifies since the cdf ends at 1
    i = int(np.argmax(above)) if above.any() else len(ld) - 1
    return float(ld.values[i])


def left_quantile_variational(ld: LeakageDistribution, delta: float) -> float:
    """min over sets A with P(A) >= 1 - delta of max_{A} leakage.

    For a fixed maximum ``v`` the heaviest admissible set is every atom at or
    below ``v``, so it suffices to scan those prefix sets.
    """
    delta = _check_delta(delta)
    best = np.inf
    for j in range(len(ld)):
        prefix_mass = sum(ld.masses[: j + 1])
        if prefix_mass >= 1.0 - delta - TOL:
            best = min(best, ld.values[j])
    return float(best)


def right_quantile_variational(ld: LeakageDistribution, delta: float) -> float:
    """max over sets A with P(A) >= delta of min_{A} leakage, scanning suffix sets."""
    delta = _check_delta(delta)
    best = -np.inf
    n = len(ld)
    for j in range(n):
        suffix_mass = sum(ld.masses[j:])
        if suffix_mass >= delta - TOL:
            best = max(best, ld.values[j])
    return float(best)
