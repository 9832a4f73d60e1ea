"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion lines
and measured runtimes.  Criterion 9 asserts a pointwise-relative bound that
the two closed forms it compares do not satisfy at small thresholds (the
mixing scheme's second moment exceeds the ideal one by alpha(1-alpha), which
is above 1% of g(tau) for tau < 1 at lambda = 0.7); it is expected to fail
and prints the exact violating points.
"""

import time
from fractions import Fraction

import pytest

from aoidrop import (
    RationalThreshold,
    Scheme,
    battery_stationary,
    closed_form_aoi,
    mixed_threshold_aoi,
    simulate,
    unmixed_threshold_aoi,
    validate_params,
    SimConfig,
    empirical_battery_occupancy,
)
from aoidrop.analytic import renewal_moments
from aoidrop.cli import SweepSpec, run_sweep, sweep_rows
from aoidrop.optimizer import optimal_threshold_binf, optimize_threshold_b1
from aoidrop.oracle import enum_renewal_moments

BASE_SEED = 20260809

ORACLE_Q = (0.1, 0.3, 0.5, 0.7, 0.9)
ORACLE_LAM = (0.2, 0.5, 0.7, 1.0)
ORACLE_TAU = (0, 1, 2, 5, 10)
SWEEP_Q = tuple(i / 10 for i in range(1, 10))
FIGURE_Q = tuple(i / 100 for i in range(5, 100, 5))


def params_for(scheme, q, lam):
    return validate_params(lam, q, scheme.required_battery, scheme)


def report(num: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}")


def test_criterion_01_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    cases = 0
    for q in ORACLE_Q:
        for lam in ORACLE_LAM:
            for scheme in (Scheme.P1, Scheme.F1, Scheme.AA1, Scheme.B0):
                taus = ORACLE_TAU if scheme.takes_threshold else (None,)
                for tau in taus:
                    oracle = enum_renewal_moments(scheme, q, lam, tau, tol=1e-10)
                    analytic = renewal_moments(scheme, params_for(scheme, q, lam), tau)
                    worst = max(
                        worst,
                        abs(oracle.mean - analytic.mean) / analytic.mean,
                        abs(oracle.second_moment - analytic.second_moment)
                        / analytic.second_moment,
                    )
                    cases += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    report(1, ok, f"{cases} cases, max relative moment error {worst:.3g} "
                  f"(<= 1e-9), runtime {elapsed:.2f}s (< 10s)")
    assert worst <= 1e-9
    assert elapsed < 10.0


def test_criterion_02_scheme_reduction_identities():
    worst = 0.0
    for q in ORACLE_Q:
        for lam in ORACLE_LAM:
            p1 = closed_form_aoi(Scheme.P1, params_for(Scheme.P1, q, lam), 0)
            aa1 = closed_form_aoi(Scheme.AA1, params_for(Scheme.AA1, q, lam))
            f1 = closed_form_aoi(Scheme.F1, params_for(Scheme.F1, q, lam), 0)
            b0 = closed_form_aoi(Scheme.B0, params_for(Scheme.B0, q, lam))
            direct = (2.0 - q * lam) / (2.0 * q * lam)
            worst = max(worst, abs(p1 - aa1) / aa1, abs(f1 - b0) / b0,
                        abs(b0 - direct) / direct)
    ok = worst <= 1e-13
    report(2, ok, f"P1(tau=0)=AA1 and F1(tau=0)=B0=(2-q*lam)/(2*q*lam): "
                  f"max relative deviation {worst:.3g} (<= 1e-13)")
    assert ok


def _criterion3_cases():
    """(scheme, q, lam, tau, rel_tol) in a fixed order for seeding."""
    cases = []
    for lam in (0.2, 0.7):
        for q in SWEEP_Q:
            cases.append((Scheme.B0, q, lam, None, 0.01))
            cases.append((Scheme.AA1, q, lam, None, 0.01))
            for scheme in (Scheme.P1, Scheme.F1):
                tau = optimize_threshold_b1(scheme, params_for(scheme, q, lam)).tau_star
                cases.append((scheme, q, lam, tau, 0.01))
            if q < lam:
                cases.append((Scheme.AAINF, q, lam, None, 0.01))
            params = params_for(Scheme.PINF, q, lam)
            tau = optimal_threshold_binf(Scheme.PINF, params)
            boundary = q <= lam  # tau* sits exactly on the feasibility boundary
            cases.append((Scheme.PINF, q, lam, tau, 0.03 if boundary else 0.01))
            if boundary:
                cases.append((Scheme.PINF, q, lam, tau.plus_int(1), 0.01))
            if q < lam:
                # Full power down above lambda has no reachable analytic value
                # under hard causality (always-on needs q = 1), so only the
                # stable region is simulated.
                params = params_for(Scheme.FINF, q, lam)
                tau = optimal_threshold_binf(Scheme.FINF, params)
                cases.append((Scheme.FINF, q, lam, tau, 0.03))
                cases.append((Scheme.FINF, q, lam, tau.plus_int(1), 0.01))
    return cases


def _analytic_for(scheme, q, lam, tau):
    params = params_for(scheme, q, lam)
    if scheme in (Scheme.PINF, Scheme.FINF):
        rt = tau if isinstance(tau, RationalThreshold) else RationalThreshold(tau)
        return mixed_threshold_aoi(scheme, params, rt)
    if scheme.takes_threshold:
        return closed_form_aoi(scheme, params, tau)
    return closed_form_aoi(scheme, params)


def test_criterion_03_simulation_agreement():
    start = time.perf_counter()
    failures = []
    cases = _criterion3_cases()
    for index, (scheme, q, lam, tau, rel_tol) in enumerate(cases):
        analytic = _analytic_for(scheme, q, lam, tau)
        result = simulate(SimConfig(
            params=params_for(scheme, q, lam), scheme=scheme, tau=tau,
            slots=10**6, seed=BASE_SEED + index,
        ))
        delta = abs(result.estimate.value - analytic)
        tolerance = max(3.0 * result.estimate.ci_halfwidth, rel_tol * analytic)
        if delta > tolerance:
            failures.append(
                f"{scheme.value} q={q:g} lam={lam:g} tau={tau}: "
                f"|{result.estimate.value:.5g}-{analytic:.5g}|={delta:.3g}>{tolerance:.3g}"
            )
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60.0
    report(3, ok, f"{len(cases)} runs at 1e6 slots, {len(cases) - len(failures)} within "
                  f"max(3*CI, stated rel tol), runtime {elapsed:.1f}s (< 60s)"
                  + ("" if not failures else "; failures: " + "; ".join(failures)))
    assert not failures, failures
    assert elapsed < 60.0


def test_criterion_04_stationary_distribution():
    occupancy = empirical_battery_occupancy(SimConfig(
        params=params_for(Scheme.AAINF, 0.2, 0.5), scheme=Scheme.AAINF,
        slots=10**6, seed=BASE_SEED,
    ))
    gap0 = abs(occupancy.get(0, 0.0) - 0.6)
    gap1 = abs(occupancy.get(1, 0.0) - 0.3)

    worst = 0.0
    for q in (0.05, 0.1, 0.2, 0.3, 0.45, 0.6):
        for lam in (0.3, 0.5, 0.7, 0.9, 1.0):
            if q >= lam:
                continue
            pi0, _ = battery_stationary(q, lam)
            worst = max(worst, abs(pi0 - (1.0 - q / lam)))
    ok = gap0 <= 0.01 and gap1 <= 0.01 and worst <= 1e-13
    report(4, ok, f"occupancy gaps to (0.6, 0.3): ({gap0:.4f}, {gap1:.4f}) <= 0.01; "
                  f"pi0 two-form max deviation {worst:.2g} (<= 1e-13)")
    assert gap0 <= 0.01 and gap1 <= 0.01
    assert worst <= 1e-13


def test_criterion_05_spot_values():
    values = {
        "B0(0.5, 0.7)": (
            closed_form_aoi(Scheme.B0, params_for(Scheme.B0, 0.5, 0.7)), 2.3571429),
        "AAinf(0.2, 0.5)": (
            closed_form_aoi(Scheme.AAINF, params_for(Scheme.AAINF, 0.2, 0.5)), 4.5),
        "Pinf(0.25, 0.5, tau=2)": (
            mixed_threshold_aoi(Scheme.PINF, params_for(Scheme.PINF, 0.25, 0.5),
                                RationalThreshold(2)), 2.25),
        "Finf(0.25, 0.5, tau=6)": (
            mixed_threshold_aoi(Scheme.FINF, params_for(Scheme.FINF, 0.25, 0.5),
                                RationalThreshold(6)), 4.125),
        "P1(0.5, 0.7, tau=0)": (
            closed_form_aoi(Scheme.P1, params_for(Scheme.P1, 0.5, 0.7), 0), 1.7521008),
    }
    worst = max(abs(got - want) for got, want in values.values())
    ok = worst <= 1e-7
    report(5, ok, f"five spot values, max absolute error {worst:.3g} (<= 1e-7)")
    assert ok


def test_criterion_06_optimal_thresholds():
    exact_ok = True
    for q, lam in [(0.25, 0.5), (0.3, 0.7), (0.1, 0.2), (0.123, 0.456)]:
        fq = Fraction(q).limit_denominator(10**6)
        fl = Fraction(lam).limit_denominator(10**6)
        tp = optimal_threshold_binf(Scheme.PINF, params_for(Scheme.PINF, q, lam))
        tf = optimal_threshold_binf(Scheme.FINF, params_for(Scheme.FINF, q, lam))
        exact_ok &= tp.as_fraction() == 1 / fq - 1 / fl
        exact_ok &= tf.as_fraction() == (1 / fq - 1) / fl

    p_case = optimize_threshold_b1(Scheme.P1, params_for(Scheme.P1, 1.0, 0.7))
    f_case = optimize_threshold_b1(Scheme.F1, params_for(Scheme.F1, 0.5, 1.0))
    ties_ok = (
        p_case.ties == (0, 1)
        and abs(p_case.aoi_star - 13 / 14) <= 1e-12
        and f_case.ties == (0, 1, 2)
        and abs(f_case.aoi_star - 1.5) <= 1e-12
    )
    ok = exact_ok and ties_ok
    report(6, ok, "rational thresholds exactly 1/q-1/lam and (1/lam)(1/q-1); "
                  f"tie cases (P1,1,0.7)->13/14 ties {p_case.ties}, "
                  f"(F1,0.5,1)->1.5 ties {f_case.ties}")
    assert exact_ok
    assert ties_ok


def _figure_curves(lam):
    spec_rows = sweep_rows(SweepSpec(
        lam=lam, q_grid=FIGURE_Q,
        schemes=(Scheme.P1, Scheme.F1, Scheme.PINF, Scheme.FINF,
                 Scheme.B0, Scheme.AA1, Scheme.AAINF),
        sim_slots=0, seed=1,
    ))
    curves = {}
    for row in spec_rows:
        curves.setdefault(row["scheme"], {})[row["q"]] = row
    return curves


def test_criterion_07_figure4_claims():
    lam = 0.2
    curves = _figure_curves(lam)
    value_range = max(
        row["aoi_analytic"]
        for per_scheme in curves.values()
        for row in per_scheme.values()
        if row["aoi_analytic"] is not None
    )
    q_inf = [q for q in FIGURE_Q if q <= lam - 0.01]

    gap_f1 = max(
        abs(curves["F1"][q]["aoi_analytic"] - curves["B0"][q]["aoi_analytic"])
        / curves["B0"][q]["aoi_analytic"]
        for q in FIGURE_Q
    )
    # The always-accept curves coincide at figure scale; their pointwise
    # relative gaps reach ~30% (printed), which no implementation can change.
    gap_aa_range = max(
        abs(curves["AA1"][q]["aoi_analytic"] - curves["AAinf"][q]["aoi_analytic"])
        / value_range
        for q in q_inf
    )
    gap_aa_rel = max(
        abs(curves["AA1"][q]["aoi_analytic"] - curves["AAinf"][q]["aoi_analytic"])
        / curves["AAinf"][q]["aoi_analytic"]
        for q in q_inf
    )
    order_p1 = all(
        curves["P1"][q]["aoi_analytic"] <= curves["AA1"][q]["aoi_analytic"] * (1 + 1e-12)
        for q in FIGURE_Q
    )
    order_pinf = all(
        curves["Pinf"][q]["aoi_analytic"] <= curves["AAinf"][q]["aoi_analytic"] * (1 + 1e-12)
        for q in q_inf
    )
    ok = gap_f1 <= 0.02 and gap_aa_range <= 0.02 and order_p1 and order_pinf
    report(7, ok, f"(i) F1* vs B0 max rel gap {gap_f1:.3%} (<= 2%); "
                  f"(ii) AA1 vs AAinf max gap {gap_aa_range:.3%} of figure range "
                  f"(<= 2%; pointwise-relative reaches {gap_aa_rel:.1%}); "
                  f"(iii) P1*<=AA1: {order_p1}, Pinf*<=AAinf: {order_pinf}")
    assert gap_f1 <= 0.02
    assert gap_aa_range <= 0.02
    assert order_p1 and order_pinf


def test_criterion_08_figure3_claims():
    lam = 0.7
    curves = _figure_curves(lam)
    order_p1 = all(
        curves["P1"][q]["aoi_analytic"] <= curves["AA1"][q]["aoi_analytic"] * (1 + 1e-12)
        for q in FIGURE_Q
    )
    q_inf = [q for q in FIGURE_Q if q < lam]
    order_pinf = all(
        curves["Pinf"][q]["aoi_analytic"] <= curves["AAinf"][q]["aoi_analytic"] * (1 + 1e-12)
        for q in q_inf
    )
    gap_f1 = max(
        abs(curves["F1"][q]["aoi_analytic"] - curves["B0"][q]["aoi_analytic"])
        / curves["B0"][q]["aoi_analytic"]
        for q in FIGURE_Q
    )
    ok = order_p1 and order_pinf and gap_f1 <= 0.10
    report(8, ok, f"P1*<=AA1: {order_p1}; Pinf*<=AAinf (q<0.7): {order_pinf}; "
                  f"F1* within 10% of B0: max rel gap {gap_f1:.3%}")
    assert order_p1 and order_pinf
    assert gap_f1 <= 0.10


def test_criterion_09_real_vs_mixed_threshold():
    """Strict pointwise-relative comparison of the achieved (mixed) curve and
    the ideal real-threshold curve at the optimal threshold.

    Expected to fail: the achieved second moment exceeds the ideal one by
    exactly alpha(1-alpha) (convexity), which is 5.3% of g(4/7) at
    (q=0.5, lam=0.7).  The curves do coincide at figure scale (checked by the
    figures report); the 1% pointwise-relative bound asserted here is not
    satisfiable by these two formulas.
    """
    violations = []
    worst = 0.0
    for lam in (0.2, 0.7):
        for scheme in (Scheme.PINF, Scheme.FINF):
            for q in SWEEP_Q:
                params = params_for(scheme, q, lam)
                tau = optimal_threshold_binf(scheme, params)
                mixed = mixed_threshold_aoi(scheme, params, tau)
                ideal = unmixed_threshold_aoi(lam, float(tau))
                rel = abs(mixed - ideal) / ideal
                worst = max(worst, rel)
                if rel > 0.01:
                    violations.append(
                        f"{scheme.value} q={q:g} lam={lam:g} tau*={tau}: "
                        f"mixed {mixed:.5f} vs real {ideal:.5f} ({rel:.2%})"
                    )
    ok = not violations
    report(9, ok, f"max pointwise-relative gap {worst:.2%} (bound 1%)"
                  + ("" if ok else "; violations: " + "; ".join(violations)))
    assert not violations, (
        "mixed-vs-real gap exceeds 1% pointwise-relative at: " + "; ".join(violations)
    )


def test_criterion_10_sweep_determinism(tmp_path):
    spec_args = dict(
        lam=0.7, q_grid=(0.2, 0.5, 0.8),
        schemes=(Scheme.P1, Scheme.PINF, Scheme.B0, Scheme.AAINF),
        sim_slots=50_000, seed=BASE_SEED,
    )
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    run_sweep(SweepSpec(out_path=first, **spec_args))
    run_sweep(SweepSpec(out_path=second, **spec_args))
    identical = first.read_bytes() == second.read_bytes()
    report(10, identical, "identical spec and seed produce byte-identical sweep CSV")
    assert identical
