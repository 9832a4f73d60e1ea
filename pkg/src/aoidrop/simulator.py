"""Seed-deterministic slotted Monte Carlo engine for all seven policies.

A run draws the update stream and the energy stream from two independent
substreams of one seeded generator, so changing the policy (or the threshold)
never perturbs the arrival sample paths; comparisons across schemes share
common random numbers.  The per-slot policy loops live in the kernel backend:
the compiled extension when built, otherwise the pure-Python reference
(``AOIDROP_PURE_PYTHON=1`` forces the fallback).

A single run is strictly sequential; identical configs (including the seed)
produce bit-identical results on either backend.  Independent runs can
execute concurrently, nothing here is shared or mutable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import _kernels_py
from .core import (
    AoIEstimate,
    Battery,
    ParameterError,
    Provenance,
    RationalThreshold,
    RenewalStats,
    Scheme,
    SimulationError,
    SystemParams,
)
from .optimizer import MixingSchedule, mixing_schedule

__all__ = [
    "SimConfig",
    "SimResult",
    "simulate",
    "empirical_battery_occupancy",
    "write_trace",
    "active_backend",
]

if os.environ.get("AOIDROP_PURE_PYTHON") == "1":
    _kern = _kernels_py
    _BACKEND = "python"
else:
    try:
        from . import _kernels as _kern  # type: ignore[attr-defined]

        _BACKEND = "compiled"
    except ImportError:
        _kern = _kernels_py
        _BACKEND = "python"

#: Slots generated per kernel call; fixed so results never depend on chunking.
BLOCK_SLOTS = 1 << 20

#: Upper bound keeping interval sums exactly representable in 64-bit integers.
MAX_SLOTS = 1 << 30

_Z975 = NormalDist().inv_cdf(0.975)


def active_backend() -> str:
    """Name of the kernel backend selected at import: 'compiled' or 'python'."""
    return _BACKEND


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: policy, threshold, horizon and seed.

    Exactly one of ``slots`` (horizon in slots) and ``target_renewals`` (run
    until this many completed intervals) must be set.  ``tau`` is required
    for threshold schemes and forbidden otherwise; unbounded-battery schemes
    accept a rational threshold, realized by its floor/ceil mixing schedule.
    """

    params: SystemParams
    scheme: Scheme
    tau: int | RationalThreshold | None = None
    slots: int | None = None
    target_renewals: int | None = None
    seed: int = 0
    initial_battery: int = 0
    track_battery: bool = False
    record_intervals: bool = False

    def __post_init__(self) -> None:
        if self.params.battery is not self.scheme.required_battery:
            raise ParameterError(
                f"params battery {self.params.battery.value!r} does not match "
                f"scheme {self.scheme.value}"
            )
        if (self.slots is None) == (self.target_renewals is None):
            raise ParameterError("set exactly one of slots and target_renewals")
        if self.slots is not None and not 1 <= self.slots <= MAX_SLOTS:
            raise ParameterError(f"slots must lie in [1, {MAX_SLOTS}]")
        if self.target_renewals is not None and self.target_renewals < 1:
            raise ParameterError("target_renewals must be >= 1")
        if self.scheme.takes_threshold:
            if self.tau is None:
                raise ParameterError(f"{self.scheme.value} requires tau")
            if isinstance(self.tau, RationalThreshold):
                if not self.scheme.unbounded_battery and not self.tau.is_integer:
                    raise ParameterError("one-unit battery thresholds must be integers")
            elif not isinstance(self.tau, int) or isinstance(self.tau, bool) or self.tau < 0:
                raise ParameterError(f"tau must be a nonnegative integer, got {self.tau!r}")
        elif self.tau is not None:
            raise ParameterError(f"{self.scheme.value} does not take tau")
        if self.initial_battery < 0:
            raise ParameterError("initial_battery must be >= 0")
        if self.params.battery is Battery.ZERO and self.initial_battery != 0:
            raise ParameterError("no battery to preload for this scheme")
        if self.params.battery is Battery.ONE and self.initial_battery > 1:
            raise ParameterError("initial battery exceeds the one-unit capacity")


@dataclass(eq=False)
class SimResult:
    """Outcome of a run.

    ``estimate.value`` equals ``sum_t2 / (2 sum_t)`` over completed renewal
    intervals (the trailing partial interval is discarded, as is everything
    before the first reception).  ``causality_deferrals`` counts receptions
    or ON slots postponed because the battery was empty; it is zero by
    construction for every bounded-battery scheme.  ``battery_histogram``
    maps post-credit battery level to the fraction of slots (levels of 255
    and above are aggregated).
    """

    estimate: AoIEstimate
    renewal_stats: RenewalStats
    slots_run: int
    causality_deferrals: int
    battery_histogram: dict[int, float] | None = None
    intervals: np.ndarray | None = None
    thresholds_used: np.ndarray | None = None
    backend: str = ""


def _schedule_for(config: SimConfig) -> MixingSchedule:
    tau = config.tau
    if isinstance(tau, int):
        tau = RationalThreshold(tau, 1)
    return mixing_schedule(tau)


def _integer_tau(config: SimConfig) -> int:
    tau = config.tau
    if isinstance(tau, RationalThreshold):
        return tau.numerator  # is_integer validated on construction
    return tau


def simulate(config: SimConfig) -> SimResult:
    """Run the slot loop and return the renewal-reward estimate.

    The 95% confidence halfwidth comes from the delta method for the ratio
    sum(T^2) / (2 sum(T)) over per-renewal samples.
    """
    ss = np.random.SeedSequence(config.seed)
    upd_seq, energy_seq = ss.spawn(2)
    gen_s = np.random.Generator(np.random.PCG64(upd_seq))
    gen_e = np.random.Generator(np.random.PCG64(energy_seq))

    scheme = config.scheme
    lam, q = config.params.lam, config.params.q
    hist = np.zeros(256, dtype=np.int64) if config.track_battery else None

    chunks: list[np.ndarray] = []
    tau_chunks: list[np.ndarray] = []
    deferrals = 0
    count = 0
    slots_run = 0

    if scheme is Scheme.B0:
        state = (0, 0)
    elif scheme in (Scheme.P1, Scheme.F1, Scheme.AA1):
        b0 = min(config.initial_battery, 1)
        state = (b0, 0, 0) if scheme is not Scheme.F1 else (b0, 0, 0, 0)
    else:
        sched = _schedule_for(config) if scheme in (Scheme.PINF, Scheme.FINF) else None
        state = (config.initial_battery, 0, 0, 0)

    while True:
        if config.slots is not None:
            block = min(BLOCK_SLOTS, config.slots - slots_run)
            if block == 0:
                break
        else:
            if count >= config.target_renewals:
                break
            if slots_run >= MAX_SLOTS:
                raise SimulationError(
                    f"no {config.target_renewals} renewals within {MAX_SLOTS} slots"
                )
            block = BLOCK_SLOTS
        s = (gen_s.random(block) < lam).astype(np.uint8)
        e = (gen_e.random(block) < q).astype(np.uint8)

        if scheme is Scheme.B0:
            ivals, *state = _kern.run_b0(s, e, *state, hist)
        elif scheme in (Scheme.P1, Scheme.AA1):
            tau = _integer_tau(config) if scheme is Scheme.P1 else 0
            ivals, *state = _kern.run_b1_partial(s, e, tau, *state, hist)
        elif scheme is Scheme.F1:
            ivals, *state = _kern.run_b1_full(s, e, _integer_tau(config), *state, hist)
        elif scheme is Scheme.PINF or scheme is Scheme.AAINF:
            if scheme is Scheme.AAINF:
                low, high, low_count, cycle, count_defer = 0, 0, 1, 1, 0
            else:
                low, high = sched.low_threshold, sched.high_threshold
                low_count, cycle, count_defer = sched.low_count, sched.cycle_length, 1
            ivals, taus, block_defer, *state = _kern.run_binf_partial(
                s, e, low, high, low_count, cycle, count_defer, *state, hist
            )
            deferrals += block_defer
            tau_chunks.append(taus)
        else:  # FINF
            ivals, taus, block_defer, *state = _kern.run_binf_full(
                s, e, sched.low_threshold, sched.high_threshold,
                sched.low_count, sched.cycle_length, *state, hist
            )
            deferrals += block_defer
            tau_chunks.append(taus)
        chunks.append(ivals)
        count += len(ivals)
        slots_run += block

    intervals = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    n = len(intervals)
    if n == 0:
        raise SimulationError(
            "no completed renewal intervals within the horizon; increase slots"
        )

    sum_t = int(intervals.sum())
    sum_t2 = int((intervals * intervals).sum())
    value = sum_t2 / (2.0 * sum_t)
    half = _ratio_ci_halfwidth(intervals, n)

    histogram = None
    if hist is not None:
        histogram = {level: cnt / slots_run for level, cnt in enumerate(hist.tolist()) if cnt}

    taus_used = np.concatenate(tau_chunks) if tau_chunks else None
    return SimResult(
        estimate=AoIEstimate(value, half, Provenance.SIMULATED, n),
        renewal_stats=RenewalStats(sum_t, sum_t2, n),
        slots_run=slots_run,
        causality_deferrals=deferrals,
        battery_histogram=histogram,
        intervals=intervals if config.record_intervals else None,
        thresholds_used=taus_used if config.record_intervals else None,
        backend=_BACKEND,
    )


def _ratio_ci_halfwidth(intervals: np.ndarray, n: int) -> float:
    """Delta-method 95% halfwidth for sum(T^2)/(2 sum(T)) over renewal batches."""
    if n < 2:
        return math.inf
    t = intervals.astype(np.float64)
    m1 = t.mean()
    t2 = t * t
    m2 = t2.mean()
    var_t = m2 - m1 * m1
    var_t2 = float((t2 * t2).mean() - m2 * m2)
    cov = float((t2 * t).mean() - m1 * m2)
    g1 = -m2 / (2.0 * m1 * m1)
    g2 = 1.0 / (2.0 * m1)
    var_hat = (g1 * g1 * var_t + 2.0 * g1 * g2 * cov + g2 * g2 * var_t2) / n
    if var_hat < 0.0:
        var_hat = 0.0
    return _Z975 * math.sqrt(var_hat)


def empirical_battery_occupancy(config: SimConfig) -> dict[int, float]:
    """Slot fractions of the post-credit battery level under always-accept.

    The post-credit level is what an arriving update sees, which is the
    quantity the stationary probabilities describe.  Requires q < lambda
    (otherwise the chain is unstable) and a long horizon.
    """
    if config.scheme is not Scheme.AAINF:
        raise ParameterError("battery occupancy is defined for the AAinf scheme")
    if config.params.q >= config.params.lam:
        raise ParameterError(
            f"occupancy needs a stable chain: q < lambda, got "
            f"q={config.params.q}, lambda={config.params.lam}"
        )
    if not config.track_battery:
        config = SimConfig(
            params=config.params, scheme=config.scheme, tau=config.tau,
            slots=config.slots, target_renewals=config.target_renewals,
            seed=config.seed, initial_battery=config.initial_battery,
            track_battery=True, record_intervals=config.record_intervals,
        )
    result = simulate(config)
    return result.battery_histogram


def write_trace(config: SimConfig, stream, limit: int | None = None) -> int:
    """Emit per-slot records ``t,S,E,B,D,received,age`` for debugging.

    Runs on the pure-Python backend regardless of the compiled extension;
    the format is documented but not part of the stable output contract.
    Returns the number of slots traced.
    """
    slots = config.slots if limit is None else min(limit, config.slots or limit)
    if slots is None or slots > 1_000_000:
        raise ParameterError("tracing is meant for short horizons (<= 1e6 slots)")
    cfg = SimConfig(
        params=config.params, scheme=config.scheme, tau=config.tau,
        slots=slots, seed=config.seed, initial_battery=config.initial_battery,
    )
    ss = np.random.SeedSequence(cfg.seed)
    upd_seq, energy_seq = ss.spawn(2)
    s = (np.random.Generator(np.random.PCG64(upd_seq)).random(slots) < cfg.params.lam).astype(np.uint8)
    e = (np.random.Generator(np.random.PCG64(energy_seq)).random(slots) < cfg.params.q).astype(np.uint8)

    def emit(t, s_t, e_t, b, on, received, age):
        stream.write(f"{t},{s_t},{e_t},{b},{on},{received},{age}\n")

    scheme = cfg.scheme
    if scheme is Scheme.B0:
        _kernels_py.run_b0(s, e, 0, 0, None, trace=emit)
    elif scheme in (Scheme.P1, Scheme.AA1):
        tau = _integer_tau(cfg) if scheme is Scheme.P1 else 0
        _kernels_py.run_b1_partial(s, e, tau, min(cfg.initial_battery, 1), 0, 0, None, trace=emit)
    elif scheme is Scheme.F1:
        _kernels_py.run_b1_full(s, e, _integer_tau(cfg), min(cfg.initial_battery, 1), 0, 0, 0, None, trace=emit)
    elif scheme is Scheme.AAINF:
        _kernels_py.run_binf_partial(s, e, 0, 0, 1, 1, 0, cfg.initial_battery, 0, 0, 0, None, trace=emit)
    else:
        sched = _schedule_for(cfg)
        if scheme is Scheme.PINF:
            _kernels_py.run_binf_partial(
                s, e, sched.low_threshold, sched.high_threshold, sched.low_count,
                sched.cycle_length, 1, cfg.initial_battery, 0, 0, 0, None, trace=emit,
            )
        else:
            _kernels_py.run_binf_full(
                s, e, sched.low_threshold, sched.high_threshold, sched.low_count,
                sched.cycle_length, cfg.initial_battery, 0, 0, 0, None, trace=emit,
            )
    return slots
