"""Command line front end: point evaluation, threshold search, parameter
sweeps, figure reproduction and validation reports.

Output contract: CSV with 9 significant digits, ``.`` decimal separator, LF
line endings, rows sorted by (scheme, q); byte-identical files for identical
spec and seed.  Exit codes: 0 success, 1 assertion failure, 2 usage or
config error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .analytic import (
    battery_stationary,
    closed_form_aoi,
    mixed_threshold_aoi,
    renewal_moments,
    unmixed_threshold_aoi,
)
from .core import (
    AoiError,
    ParameterError,
    RationalThreshold,
    Scheme,
    validate_params,
)
from .optimizer import optimal_threshold_binf, optimize_threshold, optimize_threshold_b1
from .oracle import enum_renewal_moments
from .simulator import SimConfig, active_backend, empirical_battery_occupancy, simulate, write_trace

SCHEME_ORDER = [
    Scheme.P1, Scheme.F1, Scheme.PINF, Scheme.FINF,
    Scheme.B0, Scheme.AA1, Scheme.AAINF,
]

_FIGURE_GRID = tuple(i / 100 for i in range(5, 100, 5))
_SWEEP_GRID = tuple(i / 10 for i in range(1, 10))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (str, RationalThreshold, int)):
        return str(x)
    return f"{x:.9g}"


def parse_probability(text: str) -> float:
    """Probability as a decimal or an ``a/b`` fraction."""
    try:
        if "/" in text:
            frac = Fraction(text)
            return frac.numerator / frac.denominator
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad probability {text!r}: {exc}") from None


def parse_scheme(text: str) -> Scheme:
    for scheme in Scheme:
        if scheme.value.lower() == text.lower():
            return scheme
    raise argparse.ArgumentTypeError(
        f"unknown scheme {text!r}; choose from {', '.join(s.value for s in Scheme)}"
    )


def parse_tau(text: str) -> int | RationalThreshold:
    if "/" in text:
        num, den = text.split("/", 1)
        return RationalThreshold(int(num), int(den))
    return int(text)


def _parse_grid(text: str) -> tuple[float, ...]:
    """Comma list ``0.1,0.2`` or range ``0.1:0.9:0.1`` of probabilities."""
    if ":" in text:
        start, stop, step = (parse_probability(p) for p in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        out = []
        k = 0
        while True:
            v = round(start + k * step, 12)
            if v > stop + 1e-12:
                break
            out.append(v)
            k += 1
        return tuple(out)
    return tuple(parse_probability(p) for p in text.split(","))


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a lambda, a q grid, schemes, and the simulation budget."""

    lam: float
    q_grid: tuple[float, ...]
    schemes: tuple[Scheme, ...]
    sim_slots: int
    seed: int
    out_path: Path | None = None

    def __post_init__(self) -> None:
        if not self.q_grid:
            raise ParameterError("q grid must be nonempty")
        if any(b <= a for a, b in zip(self.q_grid, self.q_grid[1:])):
            raise ParameterError("q grid must be strictly increasing")
        if not all(0.0 < q < 1.0 for q in self.q_grid):
            raise ParameterError("q grid values must lie in (0, 1)")
        if not 0.0 < self.lam <= 1.0:
            raise ParameterError("lambda must lie in (0, 1]")
        if self.sim_slots < 0:
            raise ParameterError("sim_slots must be >= 0")


def _point_seed(base: int, scheme_index: int, q_index: int) -> int:
    return base + 7919 * (scheme_index + 1) + 104729 * (q_index + 1)


def _sweep_point(args: tuple) -> dict:
    """One (scheme, q) sweep row; module level so process pools can pickle it."""
    scheme_value, q, lam, sim_slots, base_seed, scheme_index, q_index = args
    scheme = Scheme(scheme_value)
    params = validate_params(lam, q, scheme.required_battery, scheme)

    tau_star: int | RationalThreshold | None = None
    aoi_analytic: float | None = None
    if scheme in (Scheme.P1, Scheme.F1):
        res = optimize_threshold_b1(scheme, params)
        tau_star, aoi_analytic = res.tau_star, res.aoi_star
    elif scheme in (Scheme.PINF, Scheme.FINF):
        tau_star = optimal_threshold_binf(scheme, params)
        aoi_analytic = mixed_threshold_aoi(scheme, params, tau_star)
    elif scheme is Scheme.AAINF:
        if q < lam:
            aoi_analytic = closed_form_aoi(scheme, params)
    else:
        aoi_analytic = closed_form_aoi(scheme, params)

    aoi_sim = ci = None
    if sim_slots > 0:
        config = SimConfig(
            params=params, scheme=scheme, tau=tau_star, slots=sim_slots,
            seed=_point_seed(base_seed, scheme_index, q_index),
        )
        result = simulate(config)
        aoi_sim = result.estimate.value
        ci = result.estimate.ci_halfwidth
    return {
        "scheme": scheme.value,
        "q": q,
        "lambda": lam,
        "tau_star": tau_star,
        "aoi_analytic": aoi_analytic,
        "aoi_sim": aoi_sim,
        "ci_halfwidth": ci,
        "seed": base_seed,
        "slots": sim_slots,
        "_order": (scheme_index, q_index),
    }


def sweep_rows(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Compute all sweep rows, sorted by (scheme, q) whatever the job count."""
    points = [
        (scheme.value, q, spec.lam, spec.sim_slots, spec.seed, si, qi)
        for si, scheme in enumerate(sorted(spec.schemes, key=SCHEME_ORDER.index))
        for qi, q in enumerate(spec.q_grid)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    rows.sort(key=lambda r: r.pop("_order"))
    return rows


_CSV_COLUMNS = ["scheme", "q", "lambda", "tau_star", "aoi_analytic",
                "aoi_sim", "ci_halfwidth", "seed", "slots"]


def write_csv(rows: list[dict], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(_CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in _CSV_COLUMNS) + "\n")


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    if spec.out_path is None:
        raise ParameterError("sweep spec needs an output path")
    rows = sweep_rows(spec, jobs=jobs)
    write_csv(rows, spec.out_path)
    return rows


# ---------------------------------------------------------------------------
# Figure reproduction

def _curve(rows: list[dict], scheme: Scheme) -> dict[float, dict]:
    return {r["q"]: r for r in rows if r["scheme"] == scheme.value}


def reproduce_figures(out_dir: Path, sim_slots: int = 0, seed: int = 42,
                      jobs: int = 1) -> tuple[bool, str]:
    """Write fig3.csv (lambda=0.7) and fig4.csv (lambda=0.2) plus report.txt.

    The report asserts the qualitative curve relationships the two figures
    show; the metric for each check is stated inline.  Returns overall
    success and the report text.
    """
    out_dir = Path(out_dir)
    checks: list[tuple[str, bool, str]] = []
    lines = [
        "figure reproduction report",
        f"grid: q in {{0.05, 0.10, ..., 0.95}}, analytic curves"
        + (f", simulation at {sim_slots} slots" if sim_slots else ""),
        "",
    ]

    data = {}
    for lam, name in ((0.7, "fig3"), (0.2, "fig4")):
        spec = SweepSpec(
            lam=lam, q_grid=_FIGURE_GRID, schemes=tuple(SCHEME_ORDER),
            sim_slots=sim_slots, seed=seed, out_path=out_dir / f"{name}.csv",
        )
        data[name] = run_sweep(spec, jobs=jobs)

    for lam, name in ((0.7, "fig3"), (0.2, "fig4")):
        rows = data[name]
        p1 = _curve(rows, Scheme.P1)
        f1 = _curve(rows, Scheme.F1)
        pinf = _curve(rows, Scheme.PINF)
        finf = _curve(rows, Scheme.FINF)
        b0 = _curve(rows, Scheme.B0)
        aa1 = _curve(rows, Scheme.AA1)
        aainf = _curve(rows, Scheme.AAINF)
        value_range = max(r["aoi_analytic"] for r in rows if r["aoi_analytic"] is not None)
        q_all = list(_FIGURE_GRID)
        q_infty = [q for q in q_all if q <= lam - 0.01]

        worst = max(abs(f1[q]["aoi_analytic"] - b0[q]["aoi_analytic"]) / b0[q]["aoi_analytic"]
                    for q in q_all)
        tol = 0.10 if name == "fig3" else 0.02
        checks.append((
            f"{name}: F1* within {tol:.0%} of B0 pointwise (relative)",
            worst <= tol,
            f"max relative gap {worst:.4%}",
        ))

        ok = all(p1[q]["aoi_analytic"] <= aa1[q]["aoi_analytic"] * (1 + 1e-12) for q in q_all)
        checks.append((f"{name}: P1* <= AA1 pointwise", ok, "optimal threshold never hurts"))

        ok = all(pinf[q]["aoi_analytic"] <= aainf[q]["aoi_analytic"] * (1 + 1e-12)
                 for q in q_infty)
        checks.append((f"{name}: Pinf* <= AAinf pointwise (q < lambda)", ok,
                       f"checked over q <= {lam - 0.01:g}"))

        if name == "fig4":
            worst = max(abs(aa1[q]["aoi_analytic"] - aainf[q]["aoi_analytic"]) / value_range
                        for q in q_infty)
            checks.append((
                "fig4: AA1 and AAinf coincide (gap <= 2% of figure value range)",
                worst <= 0.02,
                f"max gap {worst:.4%} of range {value_range:.6g}; "
                "pointwise-relative gaps reach "
                + f"{max(abs(aa1[q]['aoi_analytic'] - aainf[q]['aoi_analytic']) / aainf[q]['aoi_analytic'] for q in q_infty):.2%}",
            ))

        for scheme, curve in ((Scheme.PINF, pinf), (Scheme.FINF, finf)):
            gaps = []
            rel_gaps = []
            for q in q_all:
                mixed = curve[q]["aoi_analytic"]
                real = unmixed_threshold_aoi(lam, float(curve[q]["tau_star"]))
                gaps.append(abs(mixed - real))
                rel_gaps.append(abs(mixed - real) / real)
            checks.append((
                f"{name}: {scheme.value} mixed vs real threshold curves coincide "
                "(gap <= 1% of figure value range)",
                max(gaps) / value_range <= 0.01,
                f"max gap {max(gaps):.4g} = {max(gaps) / value_range:.4%} of range; "
                f"max pointwise-relative {max(rel_gaps):.2%}",
            ))

    ok_all = True
    for label, ok, detail in checks:
        ok_all &= ok
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    lines.append("")
    lines.append(f"overall: {'PASS' if ok_all else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(text)
    return ok_all, text


# ---------------------------------------------------------------------------
# Validation report

_ORACLE_Q = (0.1, 0.3, 0.5, 0.7, 0.9)
_ORACLE_LAM = (0.2, 0.5, 0.7, 1.0)
_ORACLE_TAU = (0, 1, 2, 5, 10)


def _sim_tolerance_cases(lam: float) -> list[tuple[Scheme, float, object, float]]:
    """(scheme, q, tau, relative tolerance) cases for the simulation check."""
    cases: list[tuple[Scheme, float, object, float]] = []
    for q in _SWEEP_GRID:
        for scheme in (Scheme.B0, Scheme.AA1):
            cases.append((scheme, q, None, 0.01))
        for scheme in (Scheme.P1, Scheme.F1):
            params = validate_params(lam, q, scheme.required_battery, scheme)
            cases.append((scheme, q, optimize_threshold_b1(scheme, params).tau_star, 0.01))
        if q < lam:
            cases.append((Scheme.AAINF, q, None, 0.01))
        params = validate_params(lam, q, Scheme.PINF.required_battery, Scheme.PINF)
        tau = optimal_threshold_binf(Scheme.PINF, params)
        # At q = lambda the zero threshold sits exactly on the feasibility
        # boundary (null-recurrent battery), so the tolerance is loosened and
        # the strictly feasible tau*+1 is checked tightly instead.
        boundary = q <= lam
        cases.append((Scheme.PINF, q, tau, 0.03 if boundary else 0.01))
        if boundary:
            cases.append((Scheme.PINF, q, tau.plus_int(1), 0.01))
        if q < lam:
            params = validate_params(lam, q, Scheme.FINF.required_battery, Scheme.FINF)
            tau = optimal_threshold_binf(Scheme.FINF, params)
            cases.append((Scheme.FINF, q, tau, 0.03))
            cases.append((Scheme.FINF, q, tau.plus_int(1), 0.01))
    return cases


def _analytic_value(scheme: Scheme, params, tau) -> float:
    if scheme in (Scheme.PINF, Scheme.FINF):
        rt = tau if isinstance(tau, RationalThreshold) else RationalThreshold(tau)
        return mixed_threshold_aoi(scheme, params, rt)
    if scheme in (Scheme.P1, Scheme.F1):
        return closed_form_aoi(scheme, params, tau)
    return closed_form_aoi(scheme, params)


def run_validation(out_path: Path, sim_slots: int = 250_000, seed: int = 42) -> tuple[bool, str]:
    """Three-way agreement report: oracle vs closed forms, reduction
    identities, spot values, and simulation vs analytic."""
    lines = [f"validation report (backend: {active_backend()}, sim slots: {sim_slots})", ""]
    ok_all = True

    worst = 0.0
    for q in _ORACLE_Q:
        for lam in _ORACLE_LAM:
            for scheme in (Scheme.P1, Scheme.F1, Scheme.AA1, Scheme.B0):
                taus = _ORACLE_TAU if scheme.takes_threshold else (None,)
                for tau in taus:
                    om = enum_renewal_moments(scheme, q, lam, tau, tol=1e-10)
                    params = validate_params(lam, q, scheme.required_battery, scheme)
                    am = renewal_moments(scheme, params, tau)
                    worst = max(
                        worst,
                        abs(om.mean - am.mean) / am.mean,
                        abs(om.second_moment - am.second_moment) / am.second_moment,
                    )
    ok = worst <= 1e-9
    ok_all &= ok
    lines.append(f"[{'PASS' if ok else 'FAIL'}] oracle vs closed forms: "
                 f"max relative moment error {worst:.3g} (tolerance 1e-9)")

    worst = 0.0
    for q in _ORACLE_Q:
        for lam in _ORACLE_LAM:
            p1 = validate_params(lam, q, Scheme.P1.required_battery, Scheme.P1)
            a1 = closed_form_aoi(Scheme.P1, p1, 0)
            a2 = closed_form_aoi(Scheme.AA1, validate_params(lam, q, Scheme.AA1.required_battery, Scheme.AA1))
            f0 = closed_form_aoi(Scheme.F1, validate_params(lam, q, Scheme.F1.required_battery, Scheme.F1), 0)
            b0 = closed_form_aoi(Scheme.B0, validate_params(lam, q, Scheme.B0.required_battery, Scheme.B0))
            direct = (2.0 - q * lam) / (2.0 * q * lam)
            worst = max(worst, abs(a1 - a2) / a2, abs(f0 - b0) / b0, abs(b0 - direct) / direct)
    ok = worst <= 1e-13
    ok_all &= ok
    lines.append(f"[{'PASS' if ok else 'FAIL'}] reduction identities P1(0)=AA1, "
                 f"F1(0)=B0=(2-q*lambda)/(2*q*lambda): max relative {worst:.3g}")

    worst = 0.0
    for q in (0.05, 0.15, 0.3, 0.5, 0.69):
        for lam in (0.3, 0.5, 0.7, 0.9, 1.0):
            if q >= lam:
                continue
            pi0, _ = battery_stationary(q, lam)
            worst = max(worst, abs(pi0 - (1.0 - q / lam)))
    ok = worst <= 1e-13
    ok_all &= ok
    lines.append(f"[{'PASS' if ok else 'FAIL'}] pi0 display equals 1 - q/lambda: "
                 f"max absolute {worst:.3g}")

    spots = [
        ("B0(q=0.5, lambda=0.7)", _analytic_value(
            Scheme.B0, validate_params(0.7, 0.5, Scheme.B0.required_battery, Scheme.B0), None),
            2.3571429),
        ("AAinf(q=0.2, lambda=0.5)", _analytic_value(
            Scheme.AAINF, validate_params(0.5, 0.2, Scheme.AAINF.required_battery, Scheme.AAINF), None),
            4.5),
        ("Pinf(q=0.25, lambda=0.5, tau=2)", _analytic_value(
            Scheme.PINF, validate_params(0.5, 0.25, Scheme.PINF.required_battery, Scheme.PINF), 2),
            2.25),
        ("Finf(q=0.25, lambda=0.5, tau=6)", _analytic_value(
            Scheme.FINF, validate_params(0.5, 0.25, Scheme.FINF.required_battery, Scheme.FINF), 6),
            4.125),
        ("P1(q=0.5, lambda=0.7, tau=0)", _analytic_value(
            Scheme.P1, validate_params(0.7, 0.5, Scheme.P1.required_battery, Scheme.P1), 0),
            1.7521008),
    ]
    worst = max(abs(v - target) for _, v, target in spots)
    ok = worst <= 1e-7
    ok_all &= ok
    lines.append(f"[{'PASS' if ok else 'FAIL'}] spot values: max absolute error {worst:.3g}")

    lines.append("")
    sim_fail = 0
    sim_count = 0
    for lam in (0.2, 0.7):
        for scheme, q, tau, rel_tol in _sim_tolerance_cases(lam):
            params = validate_params(lam, q, scheme.required_battery, scheme)
            analytic = _analytic_value(scheme, params, tau)
            config = SimConfig(
                params=params, scheme=scheme, tau=tau, slots=sim_slots,
                seed=_point_seed(seed, SCHEME_ORDER.index(scheme), int(q * 100)),
            )
            result = simulate(config)
            delta = abs(result.estimate.value - analytic)
            tol = max(3.0 * result.estimate.ci_halfwidth, rel_tol * analytic)
            sim_count += 1
            if delta > tol:
                sim_fail += 1
                lines.append(
                    f"[FAIL] sim {scheme.value} q={q:g} lambda={lam:g} tau={tau}: "
                    f"|{result.estimate.value:.6g} - {analytic:.6g}| = {delta:.3g} > {tol:.3g}"
                )
    ok = sim_fail == 0
    ok_all &= ok
    lines.append(f"[{'PASS' if ok else 'FAIL'}] simulation vs analytic: "
                 f"{sim_count - sim_fail}/{sim_count} cases within max(3*CI, stated relative tolerance)")

    lines.append("")
    lines.append(f"overall: {'PASS' if ok_all else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text)
    return ok_all, text


# ---------------------------------------------------------------------------
# Argument plumbing

def _load_config(path: str) -> dict[str, str]:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"bad config line {raw!r}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_config(args: argparse.Namespace, parsers: dict[str, object]) -> None:
    """Fill options the command line left at None from the config file."""
    if not getattr(args, "config", None):
        return
    values = _load_config(args.config)
    for key, raw in values.items():
        if key not in parsers:
            raise ParameterError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None:
            setattr(args, key, parsers[key](raw))


def _add_common(sub: argparse.ArgumentParser, *names: str) -> dict[str, object]:
    converters: dict[str, object] = {}

    def add(flag, conv, **kwargs):
        dest = flag.lstrip("-").replace("-", "_")
        sub.add_argument(flag, dest=dest, type=conv, default=None, **kwargs)
        converters[dest] = conv

    if "lambda" in names:
        add("--lambda", parse_probability, help="per-slot update probability")
    if "q" in names:
        add("--q", parse_probability, help="per-slot energy probability")
    if "scheme" in names:
        add("--scheme", parse_scheme, help="policy (P1, F1, Pinf, Finf, B0, AA1, AAinf)")
    if "schemes" in names:
        add("--schemes", lambda t: tuple(parse_scheme(x) for x in t.split(",")),
            help="comma-separated policies (default: all seven)")
    if "tau" in names:
        add("--tau", parse_tau, help="age threshold (integer, or a/b for unbounded battery)")
    if "slots" in names:
        add("--slots", int, help="simulation horizon in slots (0 disables simulation)")
    if "seed" in names:
        add("--seed", int, help="base RNG seed")
    if "jobs" in names:
        add("--jobs", int, help="concurrent sweep evaluations")
    if "q-grid" in names:
        add("--q-grid", _parse_grid, help="comma list or start:stop:step of q values")
    if "out" in names:
        add("--out", str, help="output path")
    sub.add_argument("--config", default=None,
                     help="key=value file supplying defaults for any flag")
    return converters


def _require(args, **defaults):
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            if value is _REQUIRED:
                raise ParameterError(f"missing required option --{key.replace('_', '-')}")
            setattr(args, key, value)


_REQUIRED = object()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="aoidrop",
        description="Age-threshold packet-drop control at an energy-harvesting "
                    "receiver: exact curves, simulation, validation.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    conv = {}
    p_eval = subs.add_parser("eval", help="evaluate one scheme at one point")
    conv["eval"] = _add_common(p_eval, "lambda", "q", "scheme", "tau", "slots", "seed")

    p_opt = subs.add_parser("optimize", help="optimal threshold for a threshold scheme")
    conv["optimize"] = _add_common(p_opt, "lambda", "q", "scheme")

    p_sweep = subs.add_parser("sweep", help="CSV of analytic and simulated age over a q grid")
    conv["sweep"] = _add_common(p_sweep, "lambda", "q-grid", "schemes", "slots", "seed", "jobs", "out")

    p_fig = subs.add_parser("figures", help="reproduce both comparison figures and the ordering report")
    conv["figures"] = _add_common(p_fig, "slots", "seed", "jobs", "out")

    p_val = subs.add_parser("validate", help="oracle/analytic/simulation agreement report")
    conv["validate"] = _add_common(p_val, "slots", "seed", "out")

    p_trace = subs.add_parser("trace", help="per-slot debug trace (pure-Python backend)")
    conv["trace"] = _add_common(p_trace, "lambda", "q", "scheme", "tau", "slots", "seed", "out")

    try:
        args = parser.parse_args(argv)
        _merge_config(args, conv[args.command])
        return _dispatch(args)
    except (AoiError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "eval":
        return _cmd_eval(args)
    if args.command == "optimize":
        return _cmd_optimize(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    if args.command == "figures":
        return _cmd_figures(args)
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "trace":
        return _cmd_trace(args)
    raise ParameterError(f"unknown command {args.command!r}")


def _cmd_eval(args) -> int:
    _require(args, q=_REQUIRED, scheme=_REQUIRED, tau=None, slots=0, seed=42)
    lam = getattr(args, "lambda")
    if lam is None:
        raise ParameterError("missing required option --lambda")
    scheme = args.scheme
    params = validate_params(lam, args.q, scheme.required_battery, scheme)
    if scheme.takes_threshold != (args.tau is not None):
        raise ParameterError(
            f"{scheme.value} {'requires' if scheme.takes_threshold else 'does not take'} --tau"
        )
    analytic = _analytic_value(scheme, params, args.tau)
    print(f"scheme={scheme.value} q={_fmt(args.q)} lambda={_fmt(lam)} "
          f"tau={_fmt(args.tau)} aoi_analytic={_fmt(analytic)}")
    if args.slots:
        result = simulate(SimConfig(params=params, scheme=scheme, tau=args.tau,
                                    slots=args.slots, seed=args.seed))
        print(f"aoi_sim={_fmt(result.estimate.value)} "
              f"ci_halfwidth={_fmt(result.estimate.ci_halfwidth)} "
              f"renewals={result.renewal_stats.count} "
              f"deferrals={result.causality_deferrals} backend={result.backend}")
    return 0


def _cmd_optimize(args) -> int:
    _require(args, q=_REQUIRED, scheme=_REQUIRED)
    lam = getattr(args, "lambda")
    if lam is None:
        raise ParameterError("missing required option --lambda")
    scheme = args.scheme
    if not scheme.takes_threshold:
        raise ParameterError(f"{scheme.value} has no threshold to optimize")
    params = validate_params(lam, args.q, scheme.required_battery, scheme)
    res = optimize_threshold(scheme, params)
    print(f"scheme={scheme.value} q={_fmt(args.q)} lambda={_fmt(lam)} "
          f"tau_star={_fmt(res.tau_star)} aoi_star={_fmt(res.aoi_star)}")
    if res.ties is not None:
        print(f"search_bound={res.search_bound_used} ties={','.join(map(str, res.ties))}")
    if isinstance(res.tau_star, RationalThreshold):
        from .optimizer import mixing_schedule

        sched = mixing_schedule(res.tau_star)
        print(f"schedule: {sched.low_count} x tau={sched.low_threshold} + "
              f"{sched.high_count} x tau={sched.high_threshold} per {sched.cycle_length} receptions")
        print(f"aoi_real_threshold={_fmt(unmixed_threshold_aoi(lam, float(res.tau_star)))}")
    return 0


def _cmd_sweep(args) -> int:
    _require(args, q_grid=_SWEEP_GRID, schemes=tuple(SCHEME_ORDER), slots=0,
             seed=42, jobs=1, out="sweep.csv")
    lam = getattr(args, "lambda")
    if lam is None:
        raise ParameterError("missing required option --lambda")
    spec = SweepSpec(lam=lam, q_grid=args.q_grid, schemes=args.schemes,
                     sim_slots=args.slots, seed=args.seed, out_path=Path(args.out))
    run_sweep(spec, jobs=args.jobs)
    print(f"wrote {spec.out_path}")
    return 0


def _cmd_figures(args) -> int:
    _require(args, slots=0, seed=42, jobs=1, out="figures")
    ok, text = reproduce_figures(Path(args.out), sim_slots=args.slots,
                                 seed=args.seed, jobs=args.jobs)
    print(text, end="")
    return 0 if ok else 1


def _cmd_validate(args) -> int:
    _require(args, slots=250_000, seed=42, out="validation.txt")
    ok, text = run_validation(Path(args.out), sim_slots=args.slots, seed=args.seed)
    print(text, end="")
    return 0 if ok else 1


def _cmd_trace(args) -> int:
    _require(args, q=_REQUIRED, scheme=_REQUIRED, tau=None, slots=50, seed=42, out="-")
    lam = getattr(args, "lambda")
    if lam is None:
        raise ParameterError("missing required option --lambda")
    scheme = args.scheme
    params = validate_params(lam, args.q, scheme.required_battery, scheme)
    config = SimConfig(params=params, scheme=scheme, tau=args.tau,
                       slots=args.slots, seed=args.seed)
    if args.out == "-":
        sys.stdout.write("t,S,E,B,D,received,age\n")
        write_trace(config, sys.stdout)
    else:
        with open(args.out, "w", newline="\n") as fh:
            fh.write("t,S,E,B,D,received,age\n")
            write_trace(config, fh)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
