"""Threshold selection: exhaustive integer scan for the one-unit battery,
closed-form rational thresholds plus mixing schedules for the unbounded one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .analytic import binf_min_threshold, closed_form_aoi, mixed_threshold_aoi
from .core import (
    AoiError,
    ParameterError,
    RationalThreshold,
    Scheme,
    SystemParams,
)

__all__ = [
    "MixingSchedule",
    "OptimizationResult",
    "mixing_schedule",
    "rationalize",
    "optimize_threshold_b1",
    "optimal_threshold_binf",
    "optimize_threshold",
]


@dataclass(frozen=True)
class MixingSchedule:
    """Deterministic floor/ceil alternation realizing a rational threshold.

    Over each cycle of ``cycle_length`` receptions, ``low_count`` renewals use
    ``low_threshold`` and ``high_count`` use ``high_threshold``; the count-
    weighted mean equals the rational threshold exactly.
    """

    low_threshold: int
    high_threshold: int
    low_count: int
    high_count: int
    cycle_length: int

    def __post_init__(self) -> None:
        if self.low_count + self.high_count != self.cycle_length:
            raise ParameterError("schedule counts must add up to the cycle length")
        if self.cycle_length <= 0:
            raise ParameterError("cycle length must be positive")

    def mean(self) -> Fraction:
        return Fraction(
            self.low_count * self.low_threshold + self.high_count * self.high_threshold,
            self.cycle_length,
        )


def mixing_schedule(tau: RationalThreshold) -> MixingSchedule:
    """Schedule applying floor(tau) and ceil(tau) in exact per-cycle counts.

    For tau = f_N / f_D in lowest terms the floor threshold is used for
    |f_N - ceil(tau) f_D| receptions per cycle of f_D and the ceil threshold
    for |f_N - floor(tau) f_D|.  Integer thresholds degenerate to a cycle of
    one.
    """
    if not isinstance(tau, RationalThreshold):
        raise ParameterError(f"expected RationalThreshold, got {tau!r}")
    if tau.is_integer:
        t = tau.numerator
        return MixingSchedule(t, t, 1, 0, 1)
    f_n, f_d = tau.numerator, tau.denominator
    lo = tau.floor()
    hi = tau.ceil()
    low_count = abs(f_n - hi * f_d)
    high_count = abs(f_n - lo * f_d)
    sched = MixingSchedule(lo, hi, low_count, high_count, f_d)
    if sched.mean() != tau.as_fraction():
        raise AoiError(f"mixing schedule mean {sched.mean()} != {tau}")
    return sched


def rationalize(x: float, max_denominator: int = 10**6) -> RationalThreshold:
    """Best rational approximation with bounded denominator (continued fractions)."""
    if not x >= 0.0:
        raise ParameterError(f"value must be >= 0, got {x!r}")
    if max_denominator < 1:
        raise ParameterError("max_denominator must be >= 1")
    frac = Fraction(x).limit_denominator(max_denominator)
    return RationalThreshold.from_fraction(frac)


@dataclass(frozen=True)
class OptimizationResult:
    """Optimal threshold and its average age.

    ``search_bound_used`` and ``ties`` are populated by the integer scan only;
    ``aoi_star`` always equals the analytic evaluation at ``tau_star``.
    """

    tau_star: int | RationalThreshold
    aoi_star: float
    search_bound_used: int | None = None
    ties: tuple[int, ...] | None = None


def optimize_threshold_b1(scheme: Scheme, params: SystemParams) -> OptimizationResult:
    """Exhaustive integer threshold scan for the one-unit-battery schemes.

    The age of any threshold tau is at least tau/2 (E[T^2] >= E[T]^2 and
    E[T] >= tau), so thresholds beyond roughly twice the tau=0 age are
    dominated; the scan bound ceil(4 * age(0)) + ceil(2/q) carries a factor
    two of margin plus one full expected energy gap.  Ties are broken toward
    the smallest threshold and recorded (exact float equality).
    """
    if scheme not in (Scheme.P1, Scheme.F1):
        raise ParameterError(f"integer threshold scan applies to P1/F1, not {scheme.value}")
    aoi_at_zero = closed_form_aoi(scheme, params, 0)
    tau_max = math.ceil(4.0 * aoi_at_zero) + math.ceil(2.0 / params.q)
    values = [closed_form_aoi(scheme, params, tau) for tau in range(tau_max + 1)]
    best = min(values)
    ties = tuple(tau for tau, v in enumerate(values) if v == best)
    # Safety check on the bound: the scanned curve must already be rising
    # over the last expected energy gap worth of points.
    guard = math.ceil(1.0 / params.q) + 1
    tail = values[-guard:]
    if any(b < a for a, b in zip(tail, tail[1:])):
        raise AoiError(
            f"threshold scan bound {tau_max} too small for {scheme.value} "
            f"at q={params.q}, lambda={params.lam}"
        )
    return OptimizationResult(
        tau_star=ties[0],
        aoi_star=best,
        search_bound_used=tau_max,
        ties=ties,
    )


def optimal_threshold_binf(scheme: Scheme, params: SystemParams) -> RationalThreshold:
    """Optimal rational threshold for the unbounded-battery schemes.

    The achieved age is increasing in the threshold, so the optimum sits at
    the feasibility boundary: 1/q - 1/lambda for partial power down and
    (1/lambda)(1/q - 1) for full power down, both exact rationals.  For
    q >= lambda the zero threshold is feasible and optimal.
    """
    if scheme not in (Scheme.PINF, Scheme.FINF):
        raise ParameterError(f"rational thresholds apply to Pinf/Finf, not {scheme.value}")
    if params.q >= params.lam:
        return RationalThreshold(0, 1)
    return RationalThreshold.from_fraction(binf_min_threshold(scheme, params))


def optimize_threshold(scheme: Scheme, params: SystemParams) -> OptimizationResult:
    """Dispatch to the integer scan or the rational boundary by battery class."""
    if scheme in (Scheme.P1, Scheme.F1):
        return optimize_threshold_b1(scheme, params)
    if scheme in (Scheme.PINF, Scheme.FINF):
        tau = optimal_threshold_binf(scheme, params)
        return OptimizationResult(tau_star=tau, aoi_star=mixed_threshold_aoi(scheme, params, tau))
    raise ParameterError(f"{scheme.value} has no threshold to optimize")
