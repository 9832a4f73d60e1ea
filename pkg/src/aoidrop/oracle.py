"""Brute-force renewal moments by truncated enumeration over the latent waits.

This module certifies the closed forms in :mod:`aoidrop.analytic` without
using them: every expectation is a finite lattice sum over the latent
geometric variables (energy gaps, update waits, trial counts), truncated
where an exact closed-form tail bound drops below the requested tolerance.
Lattices of independent variables are combined with nothing beyond linearity
of expectation and independence, so no geometric moment formula enters the
computed values.

Tail bounds used, with x = 1-p and A_j(K) = sum_{k>K} k^j p x^(k-1):

    A_0 = x^K
    A_1 = x^K (K p + 1) / p
    A_2 = x^K ((K+1)^2 - K(K+2) x) / p + 2 x^(K+1) ((K+1) - K x) / p^2
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import OracleTruncationError, ParameterError, Scheme

__all__ = ["TruncatedMoments", "enum_renewal_moments", "HARD_RANGE_CAP", "geometric_tail"]

#: Largest enumeration range allowed per latent variable.
HARD_RANGE_CAP = 100_000


@dataclass(frozen=True)
class TruncatedMoments:
    """Enumerated mean and second moment with a certified truncation bound."""

    mean: float
    second_moment: float
    truncation_error_bound: float


def geometric_tail(p: float, k: int, order: int) -> float:
    """Exact value of sum_{i>k} i^order * p * (1-p)^(i-1) for order in {0, 1, 2}."""
    x = 1.0 - p
    if x <= 0.0:
        # Deterministic unit gap: the whole mass sits at i = 1.
        return 0.0 if k >= 1 else 1.0
    xk = x**k
    if order == 0:
        return xk
    if order == 1:
        return xk * (k * p + 1.0) / p
    if order == 2:
        lead = xk * ((k + 1.0) ** 2 - k * (k + 2.0) * x) / p
        return lead + 2.0 * xk * x * ((k + 1.0) - k * x) / (p * p)
    raise ParameterError(f"tail order must be 0, 1 or 2, got {order!r}")


def _pick_range(p: float, tol: float, at_least: int = 1) -> int:
    """Smallest power-of-two-ish range whose second-moment tail is below tol."""
    k = max(16, at_least)
    while geometric_tail(p, k, 2) > tol:
        k *= 2
        if k > HARD_RANGE_CAP:
            raise OracleTruncationError(
                f"range needed to certify tolerance {tol:g} at rate {p:g} "
                f"exceeds the cap of {HARD_RANGE_CAP} points per variable"
            )
    return k


def _enum_geometric(p: float, support_start: int, tol: float):
    """Truncated lattice moments of a geometric variable.

    Returns (m1, m2, e1, e2): moments computed on the finite lattice and
    certified bounds on the neglected tail mass contribution of each.
    """
    k = _pick_range(p, tol)
    if support_start == 1:
        vals = np.arange(1.0, k + 1.0)
        pmf = p * (1.0 - p) ** (vals - 1.0)
        e1 = geometric_tail(p, k, 1)
        e2 = geometric_tail(p, k, 2)
    else:
        vals = np.arange(0.0, k + 1.0)
        pmf = p * (1.0 - p) ** vals
        e1 = (1.0 - p) * geometric_tail(p, k, 1)
        e2 = (1.0 - p) * geometric_tail(p, k, 2)
    m1 = float(vals @ pmf)
    m2 = float((vals * vals) @ pmf)
    return m1, m2, e1, e2


def _enum_threshold_wait(q: float, tau: int, tol: float):
    """Truncated lattice moments of max(tau, I), I geometric from 1 at rate q."""
    k = _pick_range(q, tol, at_least=tau + 1)
    if k > HARD_RANGE_CAP:
        raise OracleTruncationError(f"threshold {tau} exceeds the enumeration cap")
    gaps = np.arange(1.0, k + 1.0)
    pmf = q * (1.0 - q) ** (gaps - 1.0)
    vals = np.maximum(float(tau), gaps)
    m1 = float(vals @ pmf)
    m2 = float((vals * vals) @ pmf)
    # Beyond the range max(tau, a) = a because k >= tau.
    return m1, m2, geometric_tail(q, k, 1), geometric_tail(q, k, 2)


def _prod_bound(a: float, ea: float, b: float, eb: float) -> float:
    """Bound on |AB - ab| when |A - a| <= ea and |B - b| <= eb."""
    return (abs(a) + ea) * eb + abs(b) * ea


def _combine_sum(x, w):
    """Moments of an independent sum from two (m1, m2, e1, e2) tuples."""
    x1, x2, ex1, ex2 = x
    w1, w2, ew1, ew2 = w
    m1 = x1 + w1
    m2 = x2 + 2.0 * x1 * w1 + w2
    e1 = ex1 + ew1
    e2 = ex2 + ew2 + 2.0 * _prod_bound(x1, ex1, w1, ew1)
    return m1, m2, e1, e2


def _enum_retry_total(q: float, lam: float, tol: float):
    """Truncated moments of the total retry wait in the full power-down scheme.

    The number of failed trials M is geometric starting at 0 (each trial sees
    an update with probability lambda); each failure costs one fresh energy
    gap.  Enumerate the M-lattice and the gap lattice, then combine with
    E[sum of m gaps] = m mu and E[(sum of m gaps)^2] = m var + m^2 mu^2,
    which is plain independence algebra, not a distributional formula.
    """
    mu1, mu2, emu1, emu2 = _enum_geometric(q, 1, tol)
    kn = _pick_range(lam, tol)
    n = np.arange(0.0, kn + 1.0)
    pmf = lam * (1.0 - lam) ** n
    c1 = float(n @ pmf)
    c2 = float((n * n) @ pmf)
    ec1 = (1.0 - lam) * geometric_tail(lam, kn, 1)
    ec2 = (1.0 - lam) * geometric_tail(lam, kn, 2)

    var = mu2 - mu1 * mu1
    evar = emu2 + (2.0 * mu1 + emu1) * emu1
    musq = mu1 * mu1
    emusq = (2.0 * mu1 + emu1) * emu1

    w1 = c1 * mu1
    ew1 = _prod_bound(c1, ec1, mu1, emu1)
    w2 = c1 * var + c2 * musq
    ew2 = _prod_bound(c1, ec1, var, evar) + _prod_bound(c2, ec2, musq, emusq)
    return w1, w2, ew1, ew2


def enum_renewal_moments(
    scheme: Scheme,
    q: float,
    lam: float,
    tau: int | None = None,
    tol: float = 1e-10,
) -> TruncatedMoments:
    """Renewal-interval moments of P1, F1, AA1 or B0 by direct enumeration.

    ``tol`` is an absolute certified bound on each returned moment; the
    returned ``truncation_error_bound`` never exceeds it.  Raises
    :class:`OracleTruncationError` when certification would need more than
    ``HARD_RANGE_CAP`` lattice points for some variable.
    """
    if not 0.0 < q <= 1.0 or not 0.0 < lam <= 1.0:
        raise ParameterError(f"rates must lie in (0, 1], got q={q!r}, lambda={lam!r}")
    if not tol > 0.0:
        raise ParameterError(f"tolerance must be positive, got {tol!r}")
    if scheme in (Scheme.P1, Scheme.F1):
        if tau is None or tau < 0 or not isinstance(tau, int):
            raise ParameterError(f"{scheme.value} needs a nonnegative integer threshold")
    elif scheme in (Scheme.AA1, Scheme.B0):
        if tau is not None:
            raise ParameterError(f"{scheme.value} does not take a threshold")
    else:
        raise ParameterError(f"enumeration oracle covers P1, F1, AA1, B0; got {scheme.value}")

    tol_c = tol / 8.0
    for _ in range(3):
        if scheme is Scheme.B0:
            m1, m2, e1, e2 = _enum_geometric(q * lam, 1, tol_c)
        elif scheme is Scheme.AA1:
            x = _enum_geometric(q, 1, tol_c)
            b = _enum_geometric(lam, 0, tol_c)
            m1, m2, e1, e2 = _combine_sum(x, b)
        elif scheme is Scheme.P1:
            x = _enum_threshold_wait(q, tau, tol_c)
            b = _enum_geometric(lam, 0, tol_c)
            m1, m2, e1, e2 = _combine_sum(x, b)
        else:  # F1
            x = _enum_threshold_wait(q, tau, tol_c)
            w = _enum_retry_total(q, lam, tol_c)
            m1, m2, e1, e2 = _combine_sum(x, w)
        bound = max(e1, e2)
        if bound <= tol:
            return TruncatedMoments(m1, m2, bound)
        tol_c /= 16.0
    raise OracleTruncationError(
        f"could not certify tolerance {tol:g} for {scheme.value} at q={q}, lambda={lam}"
    )
