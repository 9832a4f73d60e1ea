"""Exact average-age evaluation for the seven receiver policies.

Every value is assembled from first and second moments of the renewal
interval via ``aoi_from_moments``; no scheme carries its own hand-expanded
age formula beyond the moment level.  Threshold schemes with a one-unit
battery compose two building blocks:

* ``geometric_moments`` -- moments of a geometric waiting time, with the
  support convention (starting at 0 or at 1) made explicit because it
  differs between uses;
* ``threshold_wait_moments`` -- moments of ``max(tau, I)`` where I is the
  geometric gap (from 1) between energy arrivals, i.e. the time until the
  receiver is both willing (age >= tau) and able (energy stored) to act.

Unbounded-battery schemes use ``mixed_threshold_aoi``: a rational threshold
f_N/f_D is realized by applying floor(tau) and ceil(tau) in fixed counts per
cycle of f_D receptions, and the achieved average age mixes the integer
interval moments accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    InfeasibleThresholdError,
    ParameterError,
    RationalThreshold,
    Scheme,
    SystemParams,
    aoi_from_moments,
    exact_probability,
)

__all__ = [
    "Moments",
    "geometric_moments",
    "threshold_wait_moments",
    "renewal_moments",
    "closed_form_aoi",
    "battery_stationary",
    "mixed_threshold_aoi",
    "unmixed_threshold_aoi",
    "binf_min_threshold",
]


@dataclass(frozen=True)
class Moments:
    """First and second moment (slots, slots^2) of a nonnegative variable."""

    mean: float
    second_moment: float

    def __post_init__(self) -> None:
        # Any true random variable satisfies E[X^2] >= (E[X])^2; float slack.
        if self.second_moment < self.mean * self.mean * (1.0 - 1e-12):
            raise ParameterError("second moment below squared mean")

    def plus_independent(self, other: "Moments") -> "Moments":
        """Moments of the sum of two independent variables."""
        return Moments(
            self.mean + other.mean,
            self.second_moment + 2.0 * self.mean * other.mean + other.second_moment,
        )

    def random_sum(self, summand: "Moments") -> "Moments":
        """Moments of a sum of N iid copies of ``summand``, N with these moments.

        Wald for the mean; for the second moment
        E[S^2] = E[N] Var(X) + E[N^2] E[X]^2.
        """
        var = self.second_moment - self.mean * self.mean
        if var < 0.0:
            var = 0.0
        s_var = summand.second_moment - summand.mean * summand.mean
        if s_var < 0.0:
            s_var = 0.0
        return Moments(
            self.mean * summand.mean,
            self.mean * s_var + self.second_moment * summand.mean**2,
        )


def _check_prob(name: str, p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or not 0.0 < p <= 1.0:
        raise ParameterError(f"{name} must lie in (0, 1], got {p!r}")
    return p


def _pow_one_minus(q: float, tau: int) -> float:
    """(1-q)**tau, by repeated multiplication for small tau, exp/log above 64.

    The split avoids pow() underflow surprises at large tau without losing
    precision at small tau; target relative accuracy 1e-12.
    """
    if q >= 1.0:
        return 1.0 if tau == 0 else 0.0
    if tau <= 64:
        out = 1.0
        base = 1.0 - q
        for _ in range(tau):
            out *= base
        return out
    return math.exp(tau * math.log1p(-q))


def geometric_moments(p: float, support_start: int = 1) -> Moments:
    """Moments of a geometric waiting time with success probability p.

    ``support_start=1``: number of trials up to and including the first
    success, mean 1/p, second moment (2-p)/p^2.  ``support_start=0``: number
    of failures before the first success, mean (1-p)/p, second moment
    (1-p)(2-p)/p^2.
    """
    p = _check_prob("p", p)
    if support_start not in (0, 1):
        raise ParameterError(f"support_start must be 0 or 1, got {support_start!r}")
    if support_start == 1:
        return Moments(1.0 / p, (2.0 - p) / (p * p))
    return Moments((1.0 - p) / p, (1.0 - p) * (2.0 - p) / (p * p))


def threshold_wait_moments(q: float, tau: int) -> Moments:
    """Moments of max(tau, I) with I geometric (from 1) at rate q.

    This is the time from a reception to the slot where the receiver is
    armed: at least tau slots of forced waiting, and at least the wait for
    one unit of energy.  Closed forms:
    E[X] = (1-q)^tau / q + tau,
    E[X^2] = tau^2 + (2 tau/q + (2-q)/q^2) (1-q)^tau.
    """
    q = _check_prob("q", q)
    tau = _as_int_threshold(tau)
    w = _pow_one_minus(q, tau)
    mean = w / q + tau
    second = tau * tau + (2.0 * tau / q + (2.0 - q) / (q * q)) * w
    return Moments(mean, second)


def _as_int_threshold(tau) -> int:
    if isinstance(tau, bool) or not isinstance(tau, int):
        raise ParameterError(f"threshold must be a nonnegative integer, got {tau!r}")
    if tau < 0:
        raise ParameterError(f"threshold must be >= 0, got {tau}")
    return tau


def renewal_moments(scheme: Scheme, params: SystemParams, tau: int | None = None) -> Moments:
    """Renewal-interval moments for the schemes with a closed form.

    P1/F1 compose ``threshold_wait_moments`` with geometric waits; AA1 and B0
    evaluate their own displays so that the tau=0 reduction identities are
    genuine cross-checks rather than tautologies.  AAinf returns the
    stationary mixture over what an arriving update finds in the battery.
    """
    lam, q = params.lam, params.q
    if scheme in (Scheme.PINF, Scheme.FINF):
        raise ParameterError(
            f"no single closed form for {scheme.value}; use mixed_threshold_aoi"
        )
    if scheme in (Scheme.P1, Scheme.F1):
        if tau is None:
            raise ParameterError(f"{scheme.value} requires a threshold")
        wait = threshold_wait_moments(q, tau)
        if scheme is Scheme.P1:
            # Armed wait plus the residual update wait (same-slot update counts).
            return wait.plus_independent(geometric_moments(lam, support_start=0))
        # Full power down: after the first trial, each retry waits one energy
        # gap; the number of failed trials is geometric starting at 0.
        retries = geometric_moments(lam, support_start=0).random_sum(
            geometric_moments(q, support_start=1)
        )
        return wait.plus_independent(retries)
    if tau is not None:
        raise ParameterError(f"{scheme.value} does not take a threshold")
    if scheme is Scheme.B0:
        # Reception needs same-slot energy and update: geometric at rate q*lambda.
        return geometric_moments(q * lam, support_start=1)
    if scheme is Scheme.AA1:
        mean = 1.0 / q + (1.0 - lam) / lam
        second = (
            (2.0 - lam) * (1.0 - lam) / (lam * lam)
            + (2.0 - q) / (q * q)
            + 2.0 * (1.0 - lam) / (lam * q)
        )
        return Moments(mean, second)
    if scheme is Scheme.AAINF:
        pi0, pi1 = battery_stationary(q, lam)
        w_deep = 1.0 - pi0 - pi1  # update finds two or more units stored
        norm = w_deep + pi1
        # Found exactly one unit: battery empties, wait for energy then update.
        from_empty = geometric_moments(q, 1).plus_independent(geometric_moments(lam, 0))
        # Found two or more: only the next update matters.
        from_charged = geometric_moments(lam, 1)
        return Moments(
            (w_deep * from_charged.mean + pi1 * from_empty.mean) / norm,
            (w_deep * from_charged.second_moment + pi1 * from_empty.second_moment) / norm,
        )
    raise ParameterError(f"unhandled scheme {scheme!r}")


def closed_form_aoi(scheme: Scheme, params: SystemParams, tau: int | None = None) -> float:
    """Exact average age for P1, F1, B0, AA1 or AAinf.

    ``tau`` is required for P1/F1 and forbidden otherwise.  AAinf requires
    q < lambda (otherwise the battery chain has no stationary distribution).
    """
    m = renewal_moments(scheme, params, tau)
    return aoi_from_moments(m.mean, m.second_moment)


def battery_stationary(q: float, lam: float) -> tuple[float, float]:
    """Stationary probabilities (pi0, pi1) of the always-accept battery chain.

    The unbounded battery under always-accept is a discrete-time single-server
    queue with arrival rate q and service rate lambda; requires q < lam and
    q < 1.  pi0 = 1 - q - q(1-lam)/lam (algebraically 1 - q/lam),
    pi1 = q / (lam (1-q)) * pi0.  These are the fractions of arriving updates
    that find zero or exactly one unit stored.
    """
    q = _check_prob("q", q)
    lam = _check_prob("lambda", lam)
    if q >= lam:
        raise ParameterError(
            f"stationary distribution requires q < lambda, got q={q}, lambda={lam}"
        )
    if q >= 1.0:
        raise ParameterError("stationary distribution requires q < 1")
    pi0 = 1.0 - q - q * (1.0 - lam) / lam
    pi1 = q / (lam * (1.0 - q)) * pi0
    return pi0, pi1


def _interval_second_moment(lam: float, tau: float) -> float:
    """E[T^2] for an interval of tau forced-off slots plus a geometric update wait."""
    return tau * tau + 2.0 * tau / lam + (2.0 - lam) / (lam * lam)


def binf_min_threshold(scheme: Scheme, params: SystemParams) -> Fraction:
    """Minimal feasible threshold for the unbounded-battery schemes, exact.

    Partial power down spends one unit per renewal, so E[T] >= 1/q gives
    tau >= 1/q - 1/lambda.  Full power down is ON for the whole update wait,
    so the ON fraction (1/lambda)/(tau + 1/lambda) <= q gives
    tau >= (1/lambda)(1/q - 1).  Probabilities are rationalized first so the
    bound is exact.
    """
    if scheme not in (Scheme.PINF, Scheme.FINF):
        raise ParameterError(f"feasibility bound applies to Pinf/Finf, not {scheme.value}")
    fq = exact_probability(params.q)
    fl = exact_probability(params.lam)
    if scheme is Scheme.PINF:
        bound = 1 / fq - 1 / fl
    else:
        bound = (1 / fq - 1) / fl
    return bound if bound > 0 else Fraction(0)


def mixed_threshold_aoi(scheme: Scheme, params: SystemParams, tau: RationalThreshold) -> float:
    """Achieved average age of the floor/ceil mixing scheme at rational tau.

    With alpha = ceil(tau) - tau (computed exactly), the achieved value is
    (alpha g(floor) + (1-alpha) g(ceil)) / (2 tau + 2/lambda) where g is the
    integer-threshold second moment.  Integer tau degenerates to
    g(tau) / (2 tau + 2/lambda).  The threshold must satisfy the scheme's
    feasibility constraint, or the params must carry the always-on marker
    (q >= lambda) with tau = 0.
    """
    if scheme not in (Scheme.PINF, Scheme.FINF):
        raise ParameterError(f"mixed thresholds apply to Pinf/Finf, not {scheme.value}")
    if not isinstance(tau, RationalThreshold):
        raise ParameterError(f"tau must be a RationalThreshold, got {tau!r}")
    frac = tau.as_fraction()
    bound = binf_min_threshold(scheme, params)
    if frac < bound and not (params.always_on and frac == 0):
        raise InfeasibleThresholdError(
            f"threshold {tau} infeasible for {scheme.value}: energy feasibility "
            f"requires tau >= {bound} (= {float(bound):.6g})"
        )
    lam = params.lam
    lo = tau.floor()
    hi = tau.ceil()
    alpha = hi - frac  # exact rational weight on the floor threshold
    num = float(alpha) * _interval_second_moment(lam, lo) + float(1 - alpha) * _interval_second_moment(lam, hi)
    den = 2.0 * float(frac) + 2.0 / lam
    return num / den


def unmixed_threshold_aoi(lam: float, tau: float) -> float:
    """Idealized average age with a real-valued threshold plugged in directly.

    Not achievable for fractional tau (slots are integers); exposed for the
    comparison against the mixing scheme, whose curves it tracks closely.
    """
    lam = _check_prob("lambda", lam)
    if not tau >= 0.0:
        raise ParameterError(f"threshold must be >= 0, got {tau!r}")
    return _interval_second_moment(lam, tau) / (2.0 * (tau + 1.0 / lam))
