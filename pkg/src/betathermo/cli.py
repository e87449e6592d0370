"""Command-line interface: ``betathermo <command> ...``.

Exit status 0 on success, 1 on usage errors, 2 on domain errors (with a
JSON error object on stderr).  JSON output has sorted keys and floats with
12 significant digits, so identical inputs give byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import importlib.resources
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import gibbs, language, thermo
from .digits import (DigitSeq, beta_from_digits, expand_one, format_digit_file, parse_digit_file,
                     validate_admissible)
from .errors import BetaThermoError, NotInLanguage
from .numbers import parse_beta
from .presets import BETA_PRESETS, PRESETS


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class Result:
    report: dict
    rows: list | None = None      # header first, for --format csv
    text: str | None = None


# ---------------------------------------------------------------------------
# input helpers


def load_digits(source: str, depth: int | None = None) -> DigitSeq:
    if source in PRESETS:
        seq = PRESETS[source]() if depth is None or source == "tribonacci" else PRESETS[source](depth)
    else:
        path = Path(source)
        if not path.is_file():
            raise UsageError(f"--digits: {source!r} is neither a preset {sorted(PRESETS)} nor a file")
        try:
            seq = parse_digit_file(path.read_text())
        except ValueError as exc:
            raise UsageError(f"{source}: {exc}") from None
    if depth is not None and seq.generative:
        seq = seq.extended(depth)
    return seq


def load_potential(source: str, alphabet: int) -> thermo.Potential:
    name, _, arg = source.partition(":")
    if name == "zero":
        return thermo.Potential.zero(alphabet)
    if name == "indicator":
        return thermo.Potential.indicator(alphabet, int(arg) if arg else 1)
    if name == "constant":
        return thermo.Potential.constant(alphabet, float(arg))
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"--potential: {source!r} is not zero, indicator[:a], constant:v or a file")
    try:
        phi = thermo.Potential.from_json(path.read_text())
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{source}: {exc}") from None
    if phi.alphabet != alphabet:
        raise UsageError(f"potential alphabet {phi.alphabet} != digits alphabet {alphabet}")
    return phi


def parse_word(text: str) -> tuple:
    text = text.strip()
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    if not text.isdigit():
        raise UsageError(f"bad word {text!r}")
    return tuple(int(t) for t in text)


def word_str(w, alphabet: int = 2) -> str:
    return ("," if alphabet > 10 else "").join(map(str, w))


def beta_value(seq: DigitSeq):
    """Best-effort numerical beta for reports (None when not determined)."""
    try:
        return float(beta_from_digits(seq, tol=Fraction(1, 10 ** 9)))
    except (BetaThermoError, ValueError):
        return None


def _clean(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def schema(name: str) -> dict:
    """Published JSON schema for the ``name`` report (expand, validate, lang,
    pressure, gibbs, error)."""
    return json.loads(importlib.resources.files(__package__).joinpath("schemas", f"{name}.json").read_text())


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# commands


def cmd_expand(args) -> Result:
    text = BETA_PRESETS.get(args.beta, args.beta)
    try:
        beta = parse_beta(text)
    except (SyntaxError, ValueError) as exc:
        raise UsageError(f"cannot parse beta {args.beta!r}: {exc}") from None
    seq = expand_one(beta, args.depth)
    digits = seq.prefix(args.depth)
    report = {
        "command": "expand",
        "beta": beta.describe(),
        "exact": beta.is_exact,
        "alphabet": seq.alphabet,
        "digits": list(digits),
        "period": list(seq.period) if seq.period else None,
        "source": seq.source,
    }
    rows = [["index", "digit"]] + [[i + 1, d] for i, d in enumerate(digits)]
    text_out = ("," if seq.alphabet > 10 else "").join(map(str, digits))
    if args.save:
        Path(args.save).write_text(format_digit_file(seq))
    return Result(report, rows, text_out)


def cmd_validate(args) -> Result:
    seq = load_digits(args.digits, args.depth)
    adm = validate_admissible(seq)
    report = {
        "command": "validate",
        "admissible": adm.ok,
        "shift": adm.shift,
        "position": adm.position,
        "warnings": list(adm.warnings),
        "alphabet": seq.alphabet,
        "depth": seq.depth,
        "period": list(seq.period) if seq.period else None,
        "schedule": seq.schedule.describe() if seq.schedule else None,
        "beta": beta_value(seq) if adm.ok else None,
    }
    text = "admissible" if adm.ok else f"not admissible: shift {adm.shift}, digit index {adm.position}"
    return Result(report, [["admissible", "shift", "position"], [adm.ok, adm.shift, adm.position]], text)


def cmd_lang(args) -> Result:
    seq = load_digits(args.digits, args.depth)
    aut = language.as_automaton(seq)
    b = seq.alphabet
    report = {"command": f"lang {args.lang_command}", "alphabet": b}
    if args.lang_command == "count":
        counts = [(n, language.count_words(aut, n)) for n in range(1, args.n + 1)]
        report["counts"] = [{"n": n, "count": c} for n, c in counts]
        rows = [["n", "count"]] + [list(r) for r in counts]
        return Result(report, rows, "\n".join(f"{n} {c}" for n, c in counts))
    if args.lang_command == "enum":
        words = [word_str(w, b) for w in language.enumerate_words(aut, args.n)]
        report.update(n=args.n, words=words)
        return Result(report, [["word"]] + [[w] for w in words], "\n".join(words))
    if args.lang_command == "member":
        w = parse_word(args.word)
        report["word"] = word_str(w, b)
        try:
            report.update(in_language=True, q=language.end_state(aut, w))
        except NotInLanguage as exc:
            report.update(in_language=False, position=exc.position, suffix_start=exc.suffix_start)
        text = "in language" if report["in_language"] else f"rejected at index {report['position']}"
        return Result(report, [["word", "in_language"], [report["word"], report["in_language"]]], text)
    if args.lang_command == "suffix":
        info = language.suffix_info(aut, parse_word(args.word))
        report.update(word=word_str(info.word, b), in_language=True, s=word_str(info.s, b),
                      v=word_str(info.v, b), z=info.z, hat=word_str(info.hat, b), q=len(info.s))
        rows = [["word", "s", "v", "z", "hat"],
                [report["word"], report["s"], report["v"], info.z, report["hat"]]]
        return Result(report, rows, f"s={report['s']} v={report['v']} z={info.z} hat={report['hat']}")
    if args.lang_command == "zbar":
        prof = language.zbar_profile(aut, args.n)
        report.update(verdict=prof.verdict, bound=prof.bound, limsup=prof.limsup, trend=prof.trend,
                      points=[{"n": n, "zbar": z, "ratio": float(r)} for n, z, r in prof.points])
        rows = [["n", "zbar", "ratio"]] + [[n, z, float(r)] for n, z, r in prof.points]
        return Result(report, rows, f"{prof.verdict}")
    raise UsageError(f"unknown lang command {args.lang_command}")


def cmd_pressure(args) -> Result:
    seq = load_digits(args.digits, args.depth)
    phi = load_potential(args.potential, seq.alphabet)
    mode = thermo.FULL if args.mode in ("full", "both") else thermo.LOOP
    est = thermo.pressure(phi, args.nmax, mode, seq)
    report = {
        "command": "pressure",
        "beta": beta_value(seq),
        "potential": phi.name,
        "mode": args.mode,
        "extrapolated": est.extrapolated,
        "uncertainty": est.uncertainty,
        "values": [{"n": n, "P": p} for n, p in est.values],
    }
    if args.mode == "both":
        report["loop_values"] = [{"n": n, "P": p} for n, p in est.companion]
        report["loop_extrapolated"] = est.companion_extrapolated
        rows = [["n", "full", "loop"]] + [[n, p, q] for (n, p), (_, q) in zip(est.values, est.companion)]
    else:
        rows = [["n", "P_n"]] + [[n, p] for n, p in est.values]
    return Result(report, rows, f"{est.extrapolated:.12g} +- {est.uncertainty:.3g}")


def _gibbs_base(args, seq, mode) -> dict:
    return {"command": f"gibbs {mode}", "beta": beta_value(seq), "mode": mode, "m": args.m,
            "n": args.n, "defects": [], "verdict": None, "witnesses": []}


def _defect_dict(rep: gibbs.DefectReport, b: int) -> dict:
    return {"m": rep.m, "n": rep.n, "defect": rep.defect, "lower": rep.lower, "upper": rep.upper,
            "correction": rep.correction, "p_hat": rep.p_hat, "p_uncertainty": rep.p_uncertainty,
            "source": rep.mode, "argmax": word_str(rep.argmax, b) if rep.table else None,
            "anomalies": [word_str(w, b) for w in rep.anomalies]}


def _witness_dicts(family, rows, b) -> list:
    by_word = {r.word: r for r in rows}
    out = []
    for w, m, z, wt in zip(family.words, family.lengths, family.zeros, family.padded):
        entry = {"word": word_str(w, b), "m": m, "z": z, "ratio": z / m, "padded": word_str(wt, b)}
        if w in by_word:
            r = by_word[w]
            entry.update(measure=r.measure, defect=r.defect, predicted_lower=r.predicted_lower)
        out.append(entry)
    return out


def cmd_gibbs(args) -> Result:
    seq = load_digits(args.digits, args.depth)
    phi = load_potential(args.potential, seq.alphabet)
    b = seq.alphabet
    sub = args.gibbs_command
    report = _gibbs_base(args, seq, sub)
    report["potential"] = phi.name
    if sub == "estimate":
        words = [parse_word(args.word)] if args.word else list(language.enumerate_words(seq, args.m))
        ests = [gibbs.cylinder_estimate(phi, w, args.n, seq, args.windows) for w in words]
        report["estimates"] = [{"word": word_str(e.word, b), "value": e.value} for e in ests]
        rows = [["word", "value"]] + [[word_str(e.word, b), e.value] for e in ests]
        return Result(report, rows, "\n".join(f"{r[0]} {r[1]:.12g}" for r in rows[1:]))
    if sub == "defect":
        reps = [gibbs.weak_gibbs_defect(phi, m, args.n, seq, oracle=args.oracle)
                for m in range(1, args.m + 1)]
        report["defects"] = [_defect_dict(r, b) for r in reps]
        rows = [["m", "defect", "lower", "upper"]] + [[r.m, r.defect, r.lower, r.upper] for r in reps]
        return Result(report, rows, "\n".join(f"{r.m} {r.defect:.12g}" for r in reps))
    if sub == "envelope":
        p_hat = thermo.pressure(phi, args.n, thermo.FULL, seq).extrapolated
        words = [parse_word(args.word)] if args.word else list(language.enumerate_words(seq, args.m))
        envs = [gibbs.k_envelope(phi, w, seq, args.eps, n=args.n, p_hat=p_hat) for w in words]
        report["p_hat"] = p_hat
        report["envelopes"] = [{"word": word_str(e.word, b), "k_plus": e.k_plus, "k_minus": e.k_minus,
                                "g": e.g, "measured": e.measured, "contained": e.contained}
                               for e in envs]
        report["verdict"] = "contained" if all(e.contained for e in envs) else "violated"
        rows = [["word", "lower", "measured", "upper", "contained"]] + [
            [word_str(e.word, b), e.lower, e.measured, e.upper, e.contained] for e in envs]
        return Result(report, rows, report["verdict"])
    if sub == "witness":
        family = gibbs.make_witnesses(seq, args.depth or seq.depth)
        report["witnesses"] = _witness_dicts(family, [], b)
        report["a"] = family.a
        rows = [["word", "m", "z", "ratio"]] + [[word_str(w, b), m, z, z / m] for w, m, z in
                                                zip(family.words, family.lengths, family.zeros)]
        return Result(report, rows, "\n".join(",".join(map(str, r)) for r in rows[1:]))
    if sub == "classify":
        rep = gibbs.classify(seq, args.depth or seq.depth, phi, m=args.m, n=args.n, epsilon=args.eps)
        report.update(verdict=rep.verdict, reason=rep.reason, p_hat=rep.p_hat,
                      p_uncertainty=rep.p_uncertainty, zbar_verdict=rep.zbar_verdict,
                      zbar_certified=rep.zbar_certified,
                      defects=[_defect_dict(r, b) for r in rep.defects])
        if rep.witnesses is not None:
            report["witnesses"] = _witness_dicts(rep.witnesses, rep.witness_defects, b)
        rows = [["m", "defect"]] + ([[r.m, r.defect] for r in rep.defects] or
                                    [[r.m, r.defect] for r in rep.witness_defects])
        return Result(report, rows, rep.verdict)
    raise UsageError(f"unknown gibbs command {sub}")


# ---------------------------------------------------------------------------
# parser


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    fmt = _Parser(add_help=False)
    fmt.add_argument("--format", choices=("json", "csv", "text"), default="json")

    digits = _Parser(add_help=False)
    digits.add_argument("--digits", required=True, help=f"digit file or preset {sorted(PRESETS)}")
    digits.add_argument("--depth", type=_positive, help="digits to use (presets and generative inputs)")

    parser = _Parser(prog="betathermo", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subs.add_parser("expand", parents=[fmt], help="digits of the expansion of 1")
    p.add_argument("--beta", required=True, help="expression such as '(1+sqrt 5)/2', or a preset")
    p.add_argument("--depth", type=_positive, default=20)
    p.add_argument("--save", help="also write the digits to this file")
    p.set_defaults(func=cmd_expand)

    p = subs.add_parser("validate", parents=[fmt, digits], help="admissibility of a digit sequence")
    p.set_defaults(func=cmd_validate)

    p = subs.add_parser("lang", help="language queries")
    lang = p.add_subparsers(dest="lang_command", required=True, parser_class=_Parser)
    for name in ("count", "enum", "zbar"):
        q = lang.add_parser(name, parents=[fmt, digits])
        q.add_argument("--n", type=_positive, required=True)
        q.set_defaults(func=cmd_lang)
    for name in ("member", "suffix"):
        q = lang.add_parser(name, parents=[fmt, digits])
        q.add_argument("--word", required=True, help="letters, e.g. 1001 (comma-separated if b > 10)")
        q.set_defaults(func=cmd_lang)

    p = subs.add_parser("pressure", parents=[fmt, digits], help="pressure estimates")
    p.add_argument("--potential", default="zero", help="zero, indicator[:a], constant:v or a JSON file")
    p.add_argument("--nmax", type=_positive, default=15)
    p.add_argument("--mode", choices=("full", "loop", "both"), default="full")
    p.set_defaults(func=cmd_pressure)

    p = subs.add_parser("gibbs", help="equilibrium-measure diagnostics")
    gsub = p.add_subparsers(dest="gibbs_command", required=True, parser_class=_Parser)
    for name in ("estimate", "defect", "envelope", "classify", "witness"):
        q = gsub.add_parser(name, parents=[fmt, digits])
        q.add_argument("--potential", default="zero")
        q.add_argument("--m", type=_positive, default=4)
        q.add_argument("--n", type=_positive, default=12)
        q.add_argument("--eps", type=float, default=0.05)
        if name in ("estimate", "envelope"):
            q.add_argument("--word", help="a single cylinder word (default: all of L_m)")
        if name == "estimate":
            q.add_argument("--windows", choices=(gibbs.INTERIOR, gibbs.ALL), default=gibbs.INTERIOR)
        if name == "defect":
            q.add_argument("--oracle", action="store_true",
                           help="exact maximal-entropy measure (zero potential, periodic digits)")
        q.set_defaults(func=cmd_gibbs)
    return parser


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return dumps(result.report) + "\n"
    if fmt == "csv":
        if result.rows is None:
            raise UsageError("this command has no CSV form")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in result.rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
        return buf.getvalue()
    return (result.text if result.text is not None else dumps(result.report)) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = render(args.func(args), args.format)
    except UsageError as exc:
        print(f"betathermo: error: {exc}", file=sys.stderr)
        return 1
    except BetaThermoError as exc:
        print(dumps(exc.to_dict()), file=sys.stderr)
        return 2
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
