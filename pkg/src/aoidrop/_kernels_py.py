"""Pure-Python slot-loop kernels: the reference backend.

Each kernel advances one block of slots for one policy family and returns the
completed renewal intervals plus the carried state, so the driver can chain
blocks without the kernels knowing about horizons or targets.  The compiled
backend (``_kernels.pyx``) is a line-for-line translation and must produce
bit-identical output; when in doubt, this file is the semantics.

Slot order (same everywhere): the age counter and the slot's energy are
applied first (energy arriving in a slot is usable in that slot, stored
amounts are capped by the battery class), then the policy decides, then a
reception resets the age and debits one unit.  ``d`` counts slots since the
last reception; receptions before the first completed warmup interval are
not recorded.

Only this backend supports the optional per-slot ``trace`` callback, invoked
as ``trace(t, s, e, battery, on, received, age)`` with the post-credit
battery level and the post-reception age.
"""

from __future__ import annotations

import numpy as np


def run_b0(s, e, d, warm, hist=None, trace=None, t0=0):
    """No battery: an update is received iff energy arrives in the same slot."""
    sb = s.tobytes()
    eb = e.tobytes()
    out = []
    append = out.append
    slots = 0
    for t in range(len(sb)):
        d += 1
        received = 0
        if sb[t] and eb[t]:
            received = 1
            if warm:
                append(d)
            else:
                warm = 1
            d = 0
        slots += 1
        if trace is not None:
            trace(t0 + t, sb[t], eb[t], 0, received, received, d)
    if hist is not None:
        hist[0] += slots
    return np.array(out, dtype=np.int64), d, warm


def run_b1_partial(s, e, tau, b, d, warm, hist=None, trace=None, t0=0):
    """One-unit battery, update arrivals visible: fire at the first update at
    or after the armed slot (age >= tau and energy stored)."""
    sb = s.tobytes()
    eb = e.tobytes()
    out = []
    append = out.append
    h0 = 0
    h1 = 0
    for t in range(len(sb)):
        d += 1
        if b == 0 and eb[t]:
            b = 1
        if b:
            h1 += 1
        else:
            h0 += 1
        received = 0
        if b and sb[t] and d >= tau:
            received = 1
            if warm:
                append(d)
            else:
                warm = 1
            d = 0
            b = 0
        if trace is not None:
            trace(t0 + t, sb[t], eb[t], b + received, received, received, d)
    if hist is not None:
        hist[0] += h0
        hist[1] += h1
    return np.array(out, dtype=np.int64), b, d, warm


def run_b1_full(s, e, tau, b, d, warm, phase, hist=None, trace=None, t0=0):
    """One-unit battery, blind receiver: one-slot paid trials.

    Phases: 0 = waiting for the first energy unit of the interval, 1 =
    holding a unit until the age reaches tau, 2 = recharging after a failed
    trial (the next trial happens in the slot the energy arrives).
    """
    sb = s.tobytes()
    eb = e.tobytes()
    out = []
    append = out.append
    h0 = 0
    h1 = 0
    for t in range(len(sb)):
        d += 1
        if b == 0 and eb[t]:
            b = 1
        if b:
            h1 += 1
        else:
            h0 += 1
        trial = 0
        if phase == 0:
            if b:
                if d >= tau:
                    trial = 1
                else:
                    phase = 1
        elif phase == 1:
            if d >= tau:
                trial = 1
        elif b:
            trial = 1
        received = 0
        if trial:
            b = 0  # the ON slot costs one unit whether or not an update is there
            if sb[t]:
                received = 1
                if warm:
                    append(d)
                else:
                    warm = 1
                d = 0
                phase = 0
            else:
                phase = 2
        if trace is not None:
            trace(t0 + t, sb[t], eb[t], b + trial, trial, received, d)
    if hist is not None:
        hist[0] += h0
        hist[1] += h1
    return np.array(out, dtype=np.int64), b, d, warm, phase


def run_binf_partial(s, e, low, high, low_count, cycle, count_defer,
                     b, d, warm, pos, hist=None, trace=None, t0=0):
    """Unbounded battery, update arrivals visible.

    Receives the first update once the age exceeds the current threshold and
    a unit is stored.  With ``count_defer`` set, updates missed only for lack
    of energy at an eligible slot are counted as causality deferrals.  The
    threshold schedule advances one position per reception.
    """
    sb = s.tobytes()
    eb = e.tobytes()
    out = []
    taus = []
    append = out.append
    tappend = taus.append
    defer = 0
    hloc = [0] * 256 if hist is not None else None
    for t in range(len(sb)):
        d += 1
        b += eb[t]
        if hloc is not None:
            hloc[b if b < 255 else 255] += 1
        cur = low if pos < low_count else high
        received = 0
        if d > cur and sb[t]:
            if b:
                received = 1
                if warm:
                    append(d)
                    tappend(cur)
                else:
                    warm = 1
                d = 0
                b -= 1
                pos += 1
                if pos == cycle:
                    pos = 0
            elif count_defer:
                defer += 1
        if trace is not None:
            trace(t0 + t, sb[t], eb[t], b + received, received, received, d)
    if hist is not None:
        for level, cnt in enumerate(hloc):
            hist[level] += cnt
    return (np.array(out, dtype=np.int64), np.array(taus, dtype=np.int64),
            defer, b, d, warm, pos)


def run_binf_full(s, e, low, high, low_count, cycle,
                  b, d, warm, pos, hist=None, trace=None, t0=0):
    """Unbounded battery, blind receiver: ON every slot past the threshold
    while energy lasts, one unit per ON slot, until an update is caught.
    Slots where the device wanted ON but the battery was empty are counted
    as causality deferrals."""
    sb = s.tobytes()
    eb = e.tobytes()
    out = []
    taus = []
    append = out.append
    tappend = taus.append
    defer = 0
    hloc = [0] * 256 if hist is not None else None
    for t in range(len(sb)):
        d += 1
        b += eb[t]
        if hloc is not None:
            hloc[b if b < 255 else 255] += 1
        cur = low if pos < low_count else high
        on = 0
        received = 0
        if d > cur:
            if b:
                on = 1
                b -= 1
                if sb[t]:
                    received = 1
                    if warm:
                        append(d)
                        tappend(cur)
                    else:
                        warm = 1
                    d = 0
                    pos += 1
                    if pos == cycle:
                        pos = 0
            else:
                defer += 1
        if trace is not None:
            trace(t0 + t, sb[t], eb[t], b + on, on, received, d)
    if hist is not None:
        for level, cnt in enumerate(hloc):
            hist[level] += cnt
    return (np.array(out, dtype=np.int64), np.array(taus, dtype=np.int64),
            defer, b, d, warm, pos)
