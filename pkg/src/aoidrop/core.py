"""Shared domain types, parameter validation, and the renewal-reward age identity.

Time is slotted.  Updates arrive per slot with probability ``lambda``, energy
units with probability ``q``.  The average age of information of a reception
process with renewal intervals T is ``E[T^2] / (2 E[T])``; the extra half-slot
term of the integer grid is omitted everywhere so that analytic, simulated and
enumerated values are directly comparable (it does not affect any ordering
between policies).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

__all__ = [
    "AoiError",
    "ParameterError",
    "InfeasibleThresholdError",
    "SimulationError",
    "OracleTruncationError",
    "Battery",
    "Scheme",
    "Provenance",
    "SystemParams",
    "RationalThreshold",
    "RenewalStats",
    "AoIEstimate",
    "validate_params",
    "aoi_from_moments",
    "exact_probability",
    "DEFAULT_MAX_DENOMINATOR",
]

#: Denominator bound used when a decimal probability has to be treated as an
#: exact rational (unbounded-battery thresholds, mixing schedules).
DEFAULT_MAX_DENOMINATOR = 10**6


class AoiError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(AoiError, ValueError):
    """A rate, capacity class, threshold or scheme combination is invalid."""


class InfeasibleThresholdError(AoiError, ValueError):
    """A threshold violates the scheme's energy feasibility constraint."""


class SimulationError(AoiError, RuntimeError):
    """A simulation run could not produce the requested estimate."""


class OracleTruncationError(AoiError, RuntimeError):
    """Certifying the requested tolerance would exceed the enumeration cap."""


class Battery(Enum):
    """Battery capacity class.  Finite capacities above one are out of scope."""

    ZERO = "zero"
    ONE = "one"
    UNBOUNDED = "unbounded"


class Scheme(Enum):
    """Receiver energy-management policy.

    ``P1``/``F1``: age-threshold partial/full power down with a one-unit
    battery.  ``Pinf``/``Finf``: the unbounded-battery variants (rational
    thresholds realized by floor/ceil mixing).  ``B0``: no battery, receive
    only when energy arrives in the same slot.  ``AA1``/``AAinf``: accept
    every update whenever the battery is nonempty.
    """

    P1 = "P1"
    F1 = "F1"
    PINF = "Pinf"
    FINF = "Finf"
    B0 = "B0"
    AA1 = "AA1"
    AAINF = "AAinf"

    @property
    def required_battery(self) -> Battery:
        return _SCHEME_BATTERY[self]

    @property
    def takes_threshold(self) -> bool:
        return self in (Scheme.P1, Scheme.F1, Scheme.PINF, Scheme.FINF)

    @property
    def unbounded_battery(self) -> bool:
        return self.required_battery is Battery.UNBOUNDED


_SCHEME_BATTERY = {
    Scheme.P1: Battery.ONE,
    Scheme.F1: Battery.ONE,
    Scheme.PINF: Battery.UNBOUNDED,
    Scheme.FINF: Battery.UNBOUNDED,
    Scheme.B0: Battery.ZERO,
    Scheme.AA1: Battery.ONE,
    Scheme.AAINF: Battery.UNBOUNDED,
}


class Provenance(Enum):
    ANALYTIC = "analytic"
    SIMULATED = "simulated"
    ORACLE = "oracle"


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or not 0.0 < value <= 1.0:
        raise ParameterError(f"{name} must lie in (0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class SystemParams:
    """Validated per-slot rates plus the battery capacity class.

    ``always_on`` marks the regime q >= lambda for unbounded-battery threshold
    schemes, where a zero threshold is feasible and optimal.
    """

    lam: float
    q: float
    battery: Battery
    always_on: bool = False

    def __post_init__(self) -> None:
        _check_probability("lambda", self.lam)
        _check_probability("q", self.q)
        if not isinstance(self.battery, Battery):
            raise ParameterError(f"battery must be a Battery, got {self.battery!r}")


def validate_params(lam: float, q: float, battery: Battery, scheme: Scheme) -> SystemParams:
    """Validation gate for a (rates, battery, scheme) combination.

    Returns immutable params; a pure function of its inputs.  For Pinf/Finf
    with q >= lambda the result carries the ``always_on`` marker: the zero
    threshold is feasible (the device can afford to stay reactive) and
    optimal.
    """
    lam = _check_probability("lambda", lam)
    q = _check_probability("q", q)
    if scheme.required_battery is not battery:
        raise ParameterError(
            f"scheme {scheme.value} requires battery class "
            f"{scheme.required_battery.value!r}, got {battery.value!r}"
        )
    always_on = scheme in (Scheme.PINF, Scheme.FINF) and q >= lam
    return SystemParams(lam=lam, q=q, battery=battery, always_on=always_on)


def aoi_from_moments(mean_t: float, mean_t2: float) -> float:
    """Average age from the first two moments of the renewal interval.

    Positively homogeneous of degree one: scaling ``mean_t`` by c and
    ``mean_t2`` by c^2 scales the result by c.  ``mean_t2 >= mean_t**2`` is
    deliberately not required; callers may pass sample moments of a single
    degenerate interval.
    """
    if not mean_t > 0.0:
        raise ParameterError(f"mean interval must be positive, got {mean_t!r}")
    return mean_t2 / (2.0 * mean_t)


def exact_probability(p: float, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Fraction:
    """Best rational with bounded denominator for a probability given as a decimal."""
    _check_probability("probability", p)
    return Fraction(p).limit_denominator(max_denominator)


@dataclass(frozen=True)
class RationalThreshold:
    """Exact nonnegative rational threshold, stored in lowest terms."""

    numerator: int
    denominator: int = 1

    def __post_init__(self) -> None:
        num, den = self.numerator, self.denominator
        if not (isinstance(num, int) and isinstance(den, int)):
            raise ParameterError("threshold numerator/denominator must be integers")
        if num < 0 or den <= 0:
            raise ParameterError(f"threshold must be >= 0 with positive denominator, got {num}/{den}")
        g = math.gcd(num, den)
        object.__setattr__(self, "numerator", num // g)
        object.__setattr__(self, "denominator", den // g)

    @classmethod
    def from_fraction(cls, frac: Fraction) -> "RationalThreshold":
        return cls(frac.numerator, frac.denominator)

    @property
    def coprime(self) -> bool:
        return math.gcd(self.numerator, self.denominator) == 1

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def is_integer(self) -> bool:
        return self.denominator == 1

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def floor(self) -> int:
        return self.numerator // self.denominator

    def ceil(self) -> int:
        return -((-self.numerator) // self.denominator)

    def plus_int(self, k: int) -> "RationalThreshold":
        return RationalThreshold(self.numerator + k * self.denominator, self.denominator)

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class RenewalStats:
    """Accumulated renewal sums: sum of T, sum of T^2, and the sample count."""

    sum_t: float
    sum_t2: float
    count: int

    def __post_init__(self) -> None:
        if self.sum_t < 0 or self.sum_t2 < 0 or self.count < 0:
            raise ParameterError("renewal sums and count must be nonnegative")
        if self.count > 0:
            # Cauchy-Schwarz for any real sample, with float slack.
            if self.sum_t2 * self.count < self.sum_t**2 * (1.0 - 1e-12):
                raise ParameterError("sum_t2 * count < sum_t^2 violates Cauchy-Schwarz")
        elif self.sum_t or self.sum_t2:
            raise ParameterError("zero count requires zero sums")

    def merged(self, other: "RenewalStats") -> "RenewalStats":
        """Combine disjoint sample batches; every field is nondecreasing."""
        return RenewalStats(
            self.sum_t + other.sum_t,
            self.sum_t2 + other.sum_t2,
            self.count + other.count,
        )

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise ParameterError("no samples accumulated")
        return self.sum_t / self.count

    @property
    def mean_square(self) -> float:
        if self.count == 0:
            raise ParameterError("no samples accumulated")
        return self.sum_t2 / self.count


@dataclass(frozen=True)
class AoIEstimate:
    """Point estimate of average age with provenance.

    ``ci_halfwidth`` is zero for analytic values.  ``slots_or_terms`` holds
    the sample size for simulated estimates and the truncation depth for
    enumerated ones.
    """

    value: float
    ci_halfwidth: float
    provenance: Provenance
    slots_or_terms: int

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ParameterError(f"average age cannot be negative, got {self.value!r}")
        if self.ci_halfwidth < 0.0:
            raise ParameterError("confidence halfwidth cannot be negative")
