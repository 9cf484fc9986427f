"""Command-line front end: ``leibniz-euler <command> [options]``.

Exit status is 0 when the report passes, 1 when a check or evaluation
fails, and 2 for usage and parse errors.  Reports go to standard output,
diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, TextIO

from .errors import DivergenceDetected, NonArchError, PrerequisiteFailed
from .euler import (
    DerivationReport,
    StepRecord,
    basel_partial,
    check_step2_factorization,
    check_step4_replacement,
    derive_exp_series,
    derive_sine_product,
    fraction_text,
    lhopital_protolimit,
    wallis_partial,
    wallis_partials,
)
from .expr import EvaluationFailure, ParseError, evaluate, format_number, parse
from .nonarch import DEFAULT_TRUNCATION, LaurentNumber, format_laurent, is_archimedean_pair
from .rules import integrand, term_rule
from .sequence import InfiniteIndex, econvergence_check, hyperfinite_integral, seq_shadow, termwise_transfer_check

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- configuration ------------------------------------------------------------------

# tolerance names each command understands, with defaults
TOLERANCES: dict[str, dict[str, float]] = {
    "eval": {},
    "derive exp": {"coefficient": 5e-5, "cumulative": 1e-4},
    "derive sine-product": {"factorization": 1e-9, "normalization": 1e-12},
    "wallis": {"bound": 1.0},
    "basel": {"bound": 1.0},
    "lhopital": {"shadow": 1e-12},
    "integrate": {"shadow": 1e-8, "target": 1e-6},
    "check econv": {"tail": 1e-5},
    "check transfer": {"gap": 1e-4},
    "check factorization": {"relative": 1e-9},
    "check step4": {"validation": 1e-6},
    "check archimedean": {},
}


@dataclass
class RunConfig:
    truncation: int = DEFAULT_TRUNCATION
    schedule: tuple[int, int, int] = (10, 2, 15)
    tolerances: dict[str, float] = field(default_factory=dict)
    format: str = "text"
    mode: str = "exact"

    def __post_init__(self):
        if self.truncation < 2:
            raise UsageError("truncation must be at least 2")
        base, ratio, count = self.schedule
        if count < 5:
            raise UsageError("schedule count must be at least 5")
        if base < 1 or ratio < 2:
            raise UsageError("schedule needs base >= 1 and ratio >= 2")
        for name, v in self.tolerances.items():
            if not v > 0:
                raise UsageError(f"tolerance {name} must be positive")
        if self.format not in ("text", "json"):
            raise UsageError("format must be text or json")
        if self.mode not in ("exact", "approx"):
            raise UsageError("mode must be exact or approx")

    @property
    def index(self) -> InfiniteIndex:
        return InfiniteIndex.geometric(*self.schedule)

    def tol(self, name: str) -> float:
        return self.tolerances[name]


def _parse_schedule(text: str) -> tuple[int, int, int]:
    try:
        base, ratio, count = (int(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"schedule must be base:ratio:count, got {text!r}") from None
    return base, ratio, count


def _parse_tol(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise UsageError(f"tolerance must be name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise UsageError(f"tolerance {name!r} has a non-numeric value {value!r}") from None


def _read_config_file(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def build_config(args: argparse.Namespace, command: str) -> RunConfig:
    """Merge defaults, the ``--config`` file, and explicit flags, in that order."""
    known = TOLERANCES[command]
    values: dict = {}
    tols = dict(known)
    if args.config:
        for key, value in _read_config_file(args.config).items():
            if key == "truncation":
                values["truncation"] = _int(value, key)
            elif key == "schedule":
                values["schedule"] = _parse_schedule(value)
            elif key in ("format", "mode"):
                values[key] = value
            elif key.startswith("tol."):
                name = key[4:]
                # tolerances for other commands may share one config file
                if name in known:
                    tols[name] = _parse_tol(f"{name}={value}")[1]
            else:
                raise UsageError(f"unknown config key {key!r}")
    if args.truncation is not None:
        values["truncation"] = args.truncation
    if args.schedule is not None:
        values["schedule"] = _parse_schedule(args.schedule)
    if args.format is not None:
        values["format"] = args.format
    if args.mode is not None:
        values["mode"] = args.mode
    for item in args.tol or ():
        name, value = _parse_tol(item)
        if name not in known:
            choices = ", ".join(known) or "none"
            raise UsageError(f"unknown tolerance {name!r} for {command} (known: {choices})")
        tols[name] = value
    return RunConfig(tolerances=tols, **values)


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{key} must be an integer, got {text!r}") from None


# --- output -------------------------------------------------------------------------


def _emit(obj: dict, text: str, cfg: RunConfig, out: TextIO):
    if cfg.format == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
    else:
        out.write(text + "\n")


def _emit_report(report: DerivationReport, cfg: RunConfig, out: TextIO) -> int:
    _emit(report.to_dict(), report.to_text(), cfg, out)
    return EXIT_PASS if report.overall else EXIT_FAIL


# --- commands -----------------------------------------------------------------------


def _eval_one(src: str, cfg: RunConfig, constants: dict, out: TextIO, err: TextIO) -> int:
    record = {"input": src, "value": None, "kind": None, "diagnostics": []}
    status = EXIT_PASS
    try:
        value = evaluate(parse(src), cfg.truncation, cfg.mode, constants)
    except ParseError as exc:
        record["kind"] = "error"
        record["diagnostics"].append(exc.to_dict())
        status = EXIT_USAGE
    except EvaluationFailure as exc:
        record["kind"] = "error"
        record["diagnostics"].append(exc.to_dict())
        status = EXIT_FAIL
    else:
        record["value"] = format_number(value)
        record["kind"] = "boolean" if isinstance(value, bool) else "laurent"
    if status != EXIT_PASS:
        d = record["diagnostics"][0]
        span = d["span"]
        caret = " " * len(src.encode("utf-8")[: span["start"]].decode("utf-8", "replace")) + "^" * max(
            1, span["end"] - span["start"]
        )
        exp = f" (expected {', '.join(d['expected'])})" if d["expected"] else ""
        err.write(f"error: {d['kind']}: {d['message']}{exp}\n  {src}\n  {caret}\n")
    if cfg.format == "json":
        out.write(json.dumps(record) + "\n")
    elif status == EXIT_PASS:
        out.write(record["value"] + "\n")
    return status


def cmd_eval(args, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    constants = {}
    for item in args.const or ():
        name, sep, value = item.partition("=")
        if not sep or not name.isidentifier():
            raise UsageError(f"constant must be name=value, got {item!r}")
        try:
            constants[name] = evaluate(parse(value), cfg.truncation, cfg.mode)
        except (ParseError, EvaluationFailure) as exc:
            raise UsageError(f"constant {name!r}: {exc}") from None
    lines = [args.expression] if args.expression is not None else [ln.rstrip("\n") for ln in sys.stdin]
    status = EXIT_PASS
    for src in lines:
        if not src.strip():
            continue
        status = max(status, _eval_one(src, cfg, constants, out, err))
    return status


def cmd_derive(args, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    if args.derivation == "exp":
        report = derive_exp_series(
            _number(args.k), _number(args.z), args.r_max, cfg.index,
            coefficient_tolerance=cfg.tol("coefficient"), cumulative_tolerance=cfg.tol("cumulative"),
        )
    else:
        report = derive_sine_product(
            args.x, args.which, args.factors, cfg.index, cfg.truncation,
            factorization_tolerance=cfg.tol("factorization"), normalization_tolerance=cfg.tol("normalization"),
        )
    return _emit_report(report, cfg, out)


def _number(text: str):
    try:
        return Fraction(text)
    except ValueError:
        raise UsageError(f"not a rational number: {text!r}") from None


def cmd_wallis(args, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    N = args.N
    target = math.pi / 2
    value = wallis_partial(N) if cfg.mode == "exact" else float(wallis_partials(N)[-1])
    partials = wallis_partials(N)
    increasing = bool(N == 1 or (partials[1:] > partials[:-1]).all())
    bounded = bool((partials <= target + 1e-12).all())
    gap = abs(target - float(value))
    # pi/2 - P_N behaves like pi/(8N); twice that is a safe envelope
    bound = cfg.tol("bound") * math.pi / (4 * N)
    steps = [
        StepRecord("partial", "pi/2 = (2/1)(2/3)(4/3)(4/5)(6/5)(6/7) ...",
                   f"the product of the first {N} factor pairs is within pi/(4N) of pi/2",
                   gap, bound, gap <= bound, {"value": value}),
        StepRecord("monotone", "4n^2/(4n^2 - 1) > 1",
                   f"partial products increase over N = 1..{N} and stay below pi/2",
                   0.0 if increasing and bounded else 1.0, 0.0, increasing and bounded,
                   {"increasing": increasing, "bounded": bounded}),
    ]
    report = DerivationReport("wallis", steps, {"N": N, "mode": cfg.mode})
    obj = report.to_dict()
    obj["value"] = _value_json(value)
    text = f"wallis N={N}: {_value_text(value)}\n" + report.to_text()
    _emit(obj, text, cfg, out)
    return EXIT_PASS if report.overall else EXIT_FAIL


def _value_json(v):
    return fraction_text(v) if isinstance(v, Fraction) else v


def _value_text(v) -> str:
    if isinstance(v, Fraction):
        return f"{float(v)!r} (exact {v.numerator.bit_length()}-bit rational)"
    return repr(v)


def cmd_basel(args, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    value, report = basel_partial(args.N, args.route)
    obj = report.to_dict()
    obj["value"] = _value_json(value)
    _emit(obj, f"basel N={args.N} ({args.route}): {float(value)!r}\n" + report.to_text(), cfg, out)
    return EXIT_PASS if report.overall else EXIT_FAIL


def cmd_lhopital(args, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    expansion, sh = lhopital_protolimit(args.x, cfg.truncation)
    target = -math.log(args.x)
    gap = abs(sh - target)
    ok = gap <= cfg.tol("shadow")
    obj = {"x": args.x, "expansion": format_laurent(expansion), "shadow": sh, "target": target,
           "residual": gap, "overall": "pass" if ok else "fail"}
    text = (f"(1 - x^z)/z at x={args.x!r}: {format_laurent(expansion)}\n"
            f"shadow {sh!r}, -log x = {target!r}, residual {gap:.3e}: {'pass' if ok else 'fail'}")
    _emit(obj, text, cfg, out)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_integrate(args, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    f = integrand(args.integrand)
    # exact Riemann sums over the whole schedule are slow; exact only on request
    mode = "exact" if args.mode == "exact" and f.exact_ok else "approx"
    a, b = (_number(args.a), _number(args.b)) if mode == "exact" else (float(_number(args.a)), float(_number(args.b)))
    seq = hyperfinite_integral(f.f, a, b, cfg.index, mode=mode)
    est = seq_shadow(seq, cfg.tol("shadow"))
    ok = est.converged
    obj = {"integrand": args.integrand, "a": args.a, "b": args.b, "mode": mode,
           "shadow": est.value, "error_bound": est.error_bound, "method": est.method, "order": est.order,
           "converged": est.converged}
    if args.expect is not None:
        gap = abs(est.value - float(_number(args.expect)))
        obj["expected"] = args.expect
        obj["residual"] = gap
        ok = ok and gap <= cfg.tol("target")
    obj["overall"] = "pass" if ok else "fail"
    text = (f"integral of {args.integrand} over [{args.a}, {args.b}]: shadow {est.value!r} "
            f"(+- {est.error_bound:.1e}, {est.method} order {est.order}): {'pass' if ok else 'fail'}")
    _emit(obj, text, cfg, out)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_check(args, cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    return _CHECKS[args.check](args, cfg, out, err)


def _check_econv(args, cfg, out, err) -> int:
    rule = term_rule(args.rule, x=args.x)
    kind = args.kind or rule.default_kind
    n_fixed = cfg.index.schedule[-1] if rule.uses_n else None
    verdict = econvergence_check(kind, rule.frozen(n_fixed), cfg.index, cfg.tol("tail"))
    obj = {"rule": args.rule, **verdict.to_dict()}
    lines = [f"E-convergence of {kind} with rule {args.rule}"]
    for label, c in (("(i)", verdict.condition_i), ("(ii)", verdict.condition_ii), ("(iii)", verdict.condition_iii)):
        lines.append(f"  {label:5} {c.status:12} {c.evidence}")
    if verdict.shadow is not None:
        lines.append(f"  shadow {verdict.shadow.value!r} (+- {verdict.shadow.error_bound:.1e})")
    lines.append(f"overall: {verdict.overall}")
    _emit(obj, "\n".join(lines), cfg, out)
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def _check_transfer(args, cfg, out, err) -> int:
    a, b = term_rule(args.rule_a, x=args.x), term_rule(args.rule_b, x=args.x)
    kind = args.kind or a.default_kind
    try:
        rep = termwise_transfer_check(a, b, cfg.index, cfg.tol("gap"), kind=kind,
                                      coefficient_orders=args.coefficient_orders)
    except PrerequisiteFailed as exc:
        obj = {"kind": kind, "overall": "fail", "diagnostics": [str(exc)]}
        _emit(obj, f"transfer check not applicable: {exc}\noverall: fail", cfg, out)
        return EXIT_FAIL
    obj = {"rule_a": args.rule_a, "rule_b": args.rule_b, **rep.to_dict(), "overall": "pass" if rep.passed else "fail"}
    text = (f"transfer {args.rule_a} vs {args.rule_b} ({kind}): final gap {rep.final_gap:.3e} "
            f"(tolerance {rep.tolerance:g}), decreasing={rep.decreasing}\n"
            f"overall: {'pass' if rep.passed else 'fail'}")
    _emit(obj, text, cfg, out)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _check_factorization(args, cfg, out, err) -> int:
    a = _number(args.a) if cfg.mode == "exact" else float(_number(args.a))
    b = _number(args.b) if cfg.mode == "exact" else float(_number(args.b))
    chk = check_step2_factorization(args.i, a, b, cfg.tol("relative"))
    obj = {"i": args.i, "a": args.a, "b": args.b, "residual": _value_json(chk.residual) if chk.exact else chk.residual,
           "relative": float(chk.relative), "exact": chk.exact, "overall": "pass" if chk.passed else "fail"}
    text = (f"a^i - b^i factorisation, i={args.i}: residual {float(chk.residual):.3e} "
            f"(relative {float(chk.relative):.3e}, {'exact' if chk.exact else 'double precision'})\n"
            f"overall: {'pass' if chk.passed else 'fail'}")
    _emit(obj, text, cfg, out)
    return EXIT_PASS if chk.passed else EXIT_FAIL


def _check_step4(args, cfg, out, err) -> int:
    lemma = check_step4_replacement(args.x, args.factors, cfg.index, validation_slack=cfg.tol("validation"))
    obj = lemma.to_dict()
    obj["overall"] = "pass" if lemma.passed else "fail"
    lines = [
        f"cosine replacement, x={args.x!r}, K={args.factors}",
        f"  gamma = {lemma.gamma:.6f}, held-out excess {lemma.fit_residual:.3e}, validated={lemma.validated}",
    ]
    for a, b, r in lemma.p1_ratios:
        lines.append(f"  p_1({a})/p_1({b}) = {r:.6f}")
    for n in sorted(lemma.perturbation):
        lines.append(f"  n={n}: product perturbation {lemma.perturbation[n]:.3e} "
                     f"(bound {lemma.perturbation_bound[n]:.3e})")
    lines.append(f"overall: {'pass' if lemma.passed else 'fail'}")
    _emit(obj, "\n".join(lines), cfg, out)
    return EXIT_PASS if lemma.passed else EXIT_FAIL


def _check_archimedean(args, cfg, out, err) -> int:
    vals = []
    for src in (args.x, args.y):
        try:
            v = evaluate(parse(src), cfg.truncation, cfg.mode)
        except ParseError as exc:
            raise UsageError(f"{src!r}: {exc}") from None
        if not isinstance(v, LaurentNumber):
            raise UsageError(f"{src!r} is not a number")
        vals.append(v)
    archimedean, n = is_archimedean_pair(*vals)
    ok = args.expect is None or (args.expect == "true") == archimedean
    obj = {"x": args.x, "y": args.y, "archimedean": archimedean, "witness": n, "overall": "pass" if ok else "fail"}
    if archimedean:
        text = f"{n} * ({args.x}) > {args.y}: the pair is Archimedean"
    else:
        text = f"no finite multiple of {args.x} exceeds {args.y}: the pair violates the Archimedean property"
    _emit(obj, text + f"\noverall: {'pass' if ok else 'fail'}", cfg, out)
    return EXIT_PASS if ok else EXIT_FAIL


_CHECKS: dict[str, Callable] = {
    "econv": _check_econv,
    "transfer": _check_transfer,
    "factorization": _check_factorization,
    "step4": _check_step4,
    "archimedean": _check_archimedean,
}


# --- argument parsing ---------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--truncation", type=int, help="retained orders beyond the leading one (default 16)")
    g.add_argument("--schedule", metavar="BASE:RATIO:COUNT", help="index schedule (default 10:2:15)")
    g.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a named tolerance")
    g.add_argument("--format", choices=("text", "json"))
    g.add_argument("--mode", choices=("exact", "approx"))
    g.add_argument("--config", metavar="PATH", help="key=value file; flags take precedence")
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="leibniz-euler", description="Infinitesimal calculus toolkit: evaluate, derive, check.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="evaluate an expression (or stdin lines)")
    p.add_argument("expression", nargs="?")
    p.add_argument("--const", action="append", metavar="NAME=EXPR", help="user constant, e.g. dy=3*eps")

    p = sub.add_parser("derive", help="replay a classical derivation")
    dsub = p.add_subparsers(dest="derivation", required=True, parser_class=_Parser)
    d = dsub.add_parser("exp", parents=[common], help="binomial route to the exponential series")
    d.add_argument("--k", default="1")
    d.add_argument("--z", default="1")
    d.add_argument("--r-max", type=int, default=10)
    d = dsub.add_parser("sine-product", parents=[common], help="product formula for sin or sinh")
    d.add_argument("--x", type=float, required=True)
    d.add_argument("--which", choices=("sin", "sinh"), default="sin")
    d.add_argument("--factors", type=int, default=100)

    p = sub.add_parser("wallis", parents=[common], help="partial Wallis product")
    p.add_argument("--N", type=int, default=1000)

    p = sub.add_parser("basel", parents=[common], help="partial sums of 1/k^2")
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--route", choices=("direct-sum", "coefficient-comparison"), default="direct-sum")

    p = sub.add_parser("lhopital", parents=[common], help="(1 - x^z)/z at infinitesimal z")
    p.add_argument("--x", type=float, required=True)

    p = sub.add_parser("integrate", parents=[common], help="shadow of a hyperfinite Riemann sum")
    p.add_argument("--integrand", required=True, help="c*x^m, exp, sin, cos or inverse")
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="1")
    p.add_argument("--expect", help="expected value, compared at tolerance 'target'")

    p = sub.add_parser("check", help="convergence and identity checks")
    csub = p.add_subparsers(dest="check", required=True, parser_class=_Parser)
    rule_help = "harmonic, inverse-square, geometric, wallis-pair, sine-factor, or c1*k^a/(c2*N^b)"
    c = csub.add_parser("econv", parents=[common], help="E-convergence conditions (i)-(iii)")
    c.add_argument("--kind", choices=("sum", "product"))
    c.add_argument("--rule", required=True, help=rule_help)
    c.add_argument("--x", type=float, help="x for the sine-factor rule")
    c = csub.add_parser("transfer", parents=[common], help="termwise transfer between two rules")
    c.add_argument("--rule-a", required=True, help=rule_help)
    c.add_argument("--rule-b", required=True, help=rule_help)
    c.add_argument("--kind", choices=("sum", "product"))
    c.add_argument("--x", type=float)
    c.add_argument("--coefficient-orders", type=int)
    c = csub.add_parser("factorization", parents=[common], help="a^i - b^i factorisation identity")
    c.add_argument("--i", type=int, required=True)
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c = csub.add_parser("step4", parents=[common], help="cosine replacement bound")
    c.add_argument("--x", type=float, required=True)
    c.add_argument("--factors", type=int, default=100)
    c = csub.add_parser("archimedean", parents=[common], help="is some n*x > y?")
    c.add_argument("x")
    c.add_argument("y")
    c.add_argument("--expect", choices=("true", "false"))
    return top


_COMMANDS = {
    "eval": cmd_eval,
    "derive": cmd_derive,
    "wallis": cmd_wallis,
    "basel": cmd_basel,
    "lhopital": cmd_lhopital,
    "integrate": cmd_integrate,
    "check": cmd_check,
}


def _command_name(args) -> str:
    if args.command == "derive":
        return f"derive {args.derivation}"
    if args.command == "check":
        return f"check {args.check}"
    return args.command


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = build_config(args, _command_name(args))
        return _COMMANDS[args.command](args, cfg, out, err)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_PASS if not exc.code else EXIT_USAGE
    except (ValueError, NonArchError) as exc:
        # domain problems in the inputs (bad rule text, x <= 0, too few factors, ...)
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except (ArithmeticError, DivergenceDetected) as exc:
        err.write(f"check failed: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())
