"""``qlw`` command line.

Exit codes: 0 affirmative verdict, 1 negative verdict (with a witness when
one exists), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import effects, hilbert, measurement, omlattice, semantics
from ._numeric import decode_complex, set_default_tol
from .formula import ParseError, elementaries, is_sequential, parse, render, to_dict

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(text)


def _parse_formula(text: str):
    try:
        return parse(text)
    except ParseError as exc:
        raise InputError(f"{exc}\n{exc.pointer()}") from None


def _tree_lines(node: dict, depth: int = 0) -> list[str]:
    pad = "  " * depth
    kind = node["type"]
    if kind == "Elementary":
        return [f"{pad}Elementary {node['name']}"]
    if kind in ("Top", "Bottom"):
        return [f"{pad}{kind}"]
    if kind == "Not":
        return [f"{pad}Not", *_tree_lines(node["child"], depth + 1)]
    return [f"{pad}{kind}", *_tree_lines(node["left"], depth + 1), *_tree_lines(node["right"], depth + 1)]


# --------------------------------------------------------------------------
# Subcommands


def cmd_parse(args) -> int:
    f = _parse_formula(args.formula)
    tree = to_dict(f)
    payload = {"formula": render(f), "tree": tree, "elementaries": sorted(elementaries(f)),
               "sequential": is_sequential(f)}
    text = "\n".join([f"formula:      {render(f)}",
                      f"elementaries: {', '.join(sorted(elementaries(f))) or '-'}",
                      "tree:", *_tree_lines(tree, 1)])
    _emit(args, payload, text)
    return EXIT_OK


def _family(args) -> semantics.ModelFamily:
    return semantics.model_family(args.family, seed=args.seed or 0)


def cmd_check(args) -> int:
    f = _parse_formula(args.formula)
    if is_sequential(f):
        raise InputError("sequential conjunction (&>) has no lattice value; use `qlw simulate`")
    family = _family(args)
    report = semantics.find_countermodel(f, family, args.budget)
    payload = report.to_dict()
    payload["models"] = [L.name for L in family.models]
    lines = [f"formula:  {report.formula}", f"family:   {family.describe()}",
             f"scanned:  {report.models_scanned} models, {report.valuations_scanned} valuations"]
    if report.status == "valid":
        lines.append("verdict:  VALID")
    elif report.status == "invalid":
        cm = report.countermodel
        assignment = ", ".join(f"{k} -> {v}" for k, v in cm.assignment.items()) or "(none)"
        lines += ["verdict:  INVALID", f"countermodel: {cm.model}: {assignment}; value {cm.value}"]
    else:
        lines.append("verdict:  INCONCLUSIVE (valuation budget exhausted)")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if report.status == "valid" else EXIT_NEGATIVE


def _load_catalogue(path: str | None) -> list[tuple]:
    if path is None:
        text = resources.files("qlw").joinpath("data/laws.json").read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read catalogue: {exc}") from None
    try:
        data = json.loads(text)
        laws = data["laws"]
        return [(str(e["name"]), str(e["formula"]), e.get("expected")) for e in laws]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"malformed law catalogue: {exc}") from None


def cmd_classify(args) -> int:
    family = _family(args)
    if args.catalogue is not None or args.formula is None:
        if args.formula is not None:
            raise InputError("give either a formula or --catalogue, not both")
        entries = _load_catalogue(args.catalogue if args.catalogue != "builtin" else None)
    else:
        entries = [(None, args.formula, None)]

    rows, mismatches = [], 0
    for name, text, expected in entries:
        f = _parse_formula(text)
        if is_sequential(f):
            raise InputError(f"{text!r}: sequential formulas cannot be classified")
        try:
            verdict = semantics.classify_law(f, family=family, budget=args.budget)
        except semantics.BudgetExhausted as exc:
            raise InputError(str(exc)) from None
        row = {"formula": render(f), "classification": verdict.value}
        if name is not None:
            row["name"] = name
        if expected is not None:
            row["expected"] = expected
            row["match"] = expected == verdict.value
            mismatches += not row["match"]
        rows.append(row)

    if len(rows) == 1 and entries[0][0] is None:
        _emit(args, {**rows[0], "family": family.name}, rows[0]["classification"])
        return EXIT_OK
    width = max(len(r.get("name", "")) for r in rows)
    lines = [f"{r.get('name', ''):<{width}}  {r['classification']:<18}  "
             f"{'ok' if r.get('match', True) else 'MISMATCH (expected ' + r['expected'] + ')'}  {r['formula']}"
             for r in rows]
    _emit(args, {"family": family.name, "laws": rows, "mismatches": mismatches}, "\n".join(lines))
    return EXIT_OK if mismatches == 0 else EXIT_NEGATIVE


def cmd_lattice(args) -> int:
    try:
        L = omlattice.load_lattice(args.path)
    except OSError as exc:
        raise InputError(f"cannot read lattice file: {exc}") from None
    except omlattice.LatticeError as exc:
        raise InputError(f"invalid lattice: {exc}") from None
    laws = args.law or list(omlattice.LAWS)
    verdicts = [omlattice.check_law(L, law) for law in laws]
    payload = {"lattice": L.name, "size": len(L), "verdicts": [v.to_dict() for v in verdicts]}
    lines = [f"lattice: {L.name} ({len(L)} elements)"]
    for v in verdicts:
        status = "HOLDS" if v.holds else f"FAILS  witness ({', '.join(v.witness)})"
        lines.append(f"  {v.law:<13} {status}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if all(v.holds for v in verdicts) else EXIT_NEGATIVE


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _state_arg(spec: str) -> measurement.PureState:
    if spec.replace("−", "-") in hilbert.NAMED_RAYS:
        return measurement.make_state(hilbert.named_ray(spec))
    data = _read_json(spec)
    try:
        return measurement.make_state(decode_complex(data["vector"], 1), normalize=True)
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad state file {spec}: {exc}") from None


def _test_arg(spec: str) -> tuple[str, hilbert.Subspace]:
    if spec.replace("−", "-") in hilbert.NAMED_RAYS:
        return spec, hilbert.ray(hilbert.named_ray(spec))
    data = _read_json(spec)
    try:
        return Path(spec).stem, hilbert.subspace_from_json(data)
    except ValueError as exc:
        raise InputError(f"bad subspace file {spec}: {exc}") from None


def cmd_simulate(args) -> int:
    if args.policy == "sample" and args.seed is None:
        raise InputError("--policy sample needs --seed")
    state = _state_arg(args.state)
    tests = [_test_arg(t) for t in args.tests.split(",") if t.strip()]
    if not tests:
        raise InputError("--tests needs at least one test")
    for label, sub in tests:
        if sub.d != state.d:
            raise InputError(f"test {label} lives in C^{sub.d} but the state is in C^{state.d}")
    try:
        record = measurement.run_sequence(state, tests, args.policy, seed=args.seed)
    except measurement.ImpossibleBranchError as exc:
        payload = {"error": "impossible branch", "step": exc.step, "label": tests[exc.step][0],
                   "probability": exc.probability}
        _emit(args, payload, f"impossible branch at step {exc.step} ({tests[exc.step][0]}): "
                             f"pass probability {exc.probability:.6g}")
        return EXIT_NEGATIVE
    data = measurement.record_to_json(record)
    if args.out:
        Path(args.out).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    payload = {
        "policy": args.policy,
        "initial": data["initial"],
        "steps": [{k: s[k] for k in ("label", "outcome", "probability")} for s in data["steps"]],
        "final": data["final"],
    }
    lines = [f"{'step':>4}  {'test':<8} {'outcome':<7} probability"]
    for i, s in enumerate(record.steps):
        lines.append(f"{i:>4}  {s.label:<8} {s.outcome.value:<7} {s.probability:.12g}")
    final = measurement.canonical_phase(record.final.vector)
    lines.append("final state: [" + ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in final) + "]")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _vector_arg(text: str, flag: str) -> list[float]:
    try:
        vec = [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"{flag} expects three comma-separated numbers, got {text!r}") from None
    if len(vec) != 3:
        raise InputError(f"{flag} expects three comma-separated numbers, got {text!r}")
    return vec


def cmd_coexist(args) -> int:
    a, b = _vector_arg(args.a, "--a"), _vector_arg(args.b, "--b")
    try:
        e1, e2 = effects.unsharp_qubit(a), effects.unsharp_qubit(b)
    except effects.EffectError as exc:
        raise InputError(f"invalid effect: {exc}") from None
    result = effects.coexistent(e1, e2)
    payload = {"a": a, "b": b, **result.to_dict()}
    rel = "<=" if result.coexistent else ">"
    lines = [f"|a+b| + |a-b| = {result.value:.4f} {rel} 2",
             "verdict: COEXISTENT" if result.coexistent else "verdict: NOT COEXISTENT"]
    if result.certificate is not None:
        lines.append(f"joint POVM certificate (c = {result.c:.6g}):")
        for (mu, nu), g in result.certificate.items():
            m = g.matrix
            lines.append(f"  G[{mu:+d},{nu:+d}] = [[{m[0, 0].real:.4f}, {m[0, 1]:.4f}], "
                         f"[{m[1, 0]:.4f}, {m[1, 1].real:.4f}]]")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if result.coexistent else EXIT_NEGATIVE


# --------------------------------------------------------------------------
# Argument parsing


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("--tol", type=float, default=d(None), help="numeric tolerance (default 1e-9 or $QLW_TOL)")
    p.add_argument("--seed", type=int, default=d(None), help="seed for sampling and random models")
    p.add_argument("--budget", type=int, default=d(semantics.DEFAULT_BUDGET),
                   help="maximum number of valuations scanned")
    p.add_argument("--family", choices=semantics.FAMILIES, default=d("default"),
                   help="model family for validity checks")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="qlw", description="Quantum logic workbench.",
                             parents=[_global_flags(False)])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    common = [_global_flags(True)]

    p = sub.add_parser("parse", parents=common, help="parse a formula and print its tree")
    p.add_argument("formula")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", parents=common, help="formal truth over a model family")
    p.add_argument("formula")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", parents=common,
                       help="quantum_valid | classical_only | invalid_everywhere")
    p.add_argument("formula", nargs="?")
    p.add_argument("--catalogue", nargs="?", const="builtin", default=None,
                   help="classify every law in a catalogue file (built-in catalogue if no path)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("lattice", parents=common, help="load a lattice file and check laws")
    p.add_argument("path")
    p.add_argument("--law", action="append", choices=omlattice.LAWS,
                   help="law to check (repeatable; default all)")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("simulate", parents=common, help="run a sequence of projective tests")
    p.add_argument("--state", required=True, help="z+, z-, x+, x-, y+, y- or a state JSON file")
    p.add_argument("--tests", required=True, help="comma-separated shorthands or subspace JSON files")
    p.add_argument("--policy", choices=("all_pass", "sample"), default="all_pass")
    p.add_argument("--out", help="write the full measurement record JSON here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coexist", parents=common, help="joint measurability of two unbiased qubit effects")
    p.add_argument("--a", required=True, help="Bloch vector ax,ay,az")
    p.add_argument("--b", required=True, help="Bloch vector bx,by,bz")
    p.set_defaults(func=cmd_coexist)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.tol is not None:
            set_default_tol(args.tol)
        if args.budget < 1:
            raise InputError("--budget must be positive")
        try:
            return args.func(args)
        finally:
            set_default_tol(None)
    except InputError as exc:
        print(f"qlw: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:  # validation failures inside the library, e.g. a bad QLW_TOL
        print(f"qlw: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
