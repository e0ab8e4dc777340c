"""Command-line front door: parse, verify, compile, encode, simulate."""

from __future__ import annotations

import argparse
import sys

from . import analysis
from .analysis import (Budgets, DispatchWitness, LassoWitness, UndecidableQuery,
                       Verdict, fair_lasso_check, replay_witness,
                       starvation_lasso_check)
from .compile import stitch, stitch_cancel
from .encoders import encode_pn, encode_pn_fairterm
from .multiset import Multiset
from .parser import ParseError, format_program, parse_program
from .petri import format_net, karp_miller, net_to_dot, parse_net
from .program import Configuration, Simulator, enumerate_reachable

EXIT_HOLDS = 0
EXIT_VIOLATED = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3


def _budget_args(sp):
    sp.add_argument("--max-states", type=int, default=analysis.DEFAULT_MAX_STATES,
                    help="bound on explored configurations")
    sp.add_argument("--max-depth", type=int, default=analysis.DEFAULT_MAX_DEPTH,
                    help="bound on search depth")
    sp.add_argument("--post-budget", type=int, default=analysis.DEFAULT_POST_BUDGET,
                    help="bound on the multiset posted by one dispatch")


def _check_args(sp):
    _budget_args(sp)
    sp.add_argument("--emit", choices=["text", "record"], default="text")
    sp.add_argument("--no-self-audit", action="store_true",
                    help="skip replaying witnesses before printing")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="asyncver",
        description="Verify finite-data asynchronous programs by compiling "
                    "them to Petri nets.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("check-safety", help="is a global state reachable?")
    sp.add_argument("input")
    sp.add_argument("--state", required=True, help="target global state")
    _check_args(sp)

    sp = sub.add_parser("check-bound", help="is the task buffer bounded?")
    sp.add_argument("input")
    _check_args(sp)

    sp = sub.add_parser("check-term", help="do all runs terminate?")
    sp.add_argument("input")
    _check_args(sp)

    sp = sub.add_parser("check-fair-term", help="do all fair runs terminate?")
    sp.add_argument("input")
    _check_args(sp)

    sp = sub.add_parser("check-starvation",
                        help="can a fair run starve a pending instance?")
    sp.add_argument("input")
    sp.add_argument("--handler", required=True)
    _check_args(sp)

    sp = sub.add_parser("check-reach", help="is a configuration reachable?")
    sp.add_argument("input")
    sp.add_argument("--state", required=True)
    sp.add_argument("--buffer", default="",
                    help="target buffer, e.g. 'h1:2 h2:1' (empty for no tasks)")
    _check_args(sp)

    sp = sub.add_parser("compile", help="emit the compiled Petri net")
    sp.add_argument("input")
    sp.add_argument("--emit", choices=["text", "dot"], default="text")
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("coverability-graph",
                        help="emit the coverability graph of a net file")
    sp.add_argument("input")
    sp.add_argument("--emit", choices=["dot"], default="dot")
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("encode-pn", help="simulate a Boolean net as a program")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("encode-pn-fairterm",
                        help="fair-termination encoding of a Boolean net")
    sp.add_argument("input")
    sp.add_argument("--place", required=True,
                    help="place whose emptiability is encoded")
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("simulate", help="stream bounded reachable configurations")
    sp.add_argument("input")
    _budget_args(sp)
    return ap


def _load_program(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_program(fh.read())


def _load_net(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_net(fh.read())


def _write(text: str, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _step_line(program, s) -> str:
    name = program.symbols.name_of
    out = f"dispatch {name(s.handler)} -> {name(s.to_state)}; post {s.posted.fmt(name)}"
    if s.cancelled:
        out += "; cancel {" + ",".join(name(h) for h in sorted(s.cancelled)) + "}"
    return out


def _witness_records(program, witness) -> list[str]:
    lines = []
    if isinstance(witness, DispatchWitness):
        lines.append("witness.kind: dispatches")
        lines.append(f"witness.length: {len(witness.steps)}")
        for i, s in enumerate(witness.steps, 1):
            lines.append(f"witness.{i}: {_step_line(program, s)}")
    elif isinstance(witness, LassoWitness):
        lines.append("witness.kind: lasso")
        lines.append(f"witness.stem.length: {len(witness.stem)}")
        for i, s in enumerate(witness.stem, 1):
            lines.append(f"witness.stem.{i}: {_step_line(program, s)}")
        lines.append(f"witness.period.length: {len(witness.period)}")
        for i, s in enumerate(witness.period, 1):
            lines.append(f"witness.period.{i}: {_step_line(program, s)}")
    return lines


def _self_audit(program, verdict: Verdict, args) -> str | None:
    """Replay every emitted witness; returns an error line on failure."""
    w = verdict.witness
    if w is None:
        return None
    if isinstance(w, DispatchWitness):
        ok = replay_witness(program, w)
    elif isinstance(w, LassoWitness):
        ok = replay_witness(program, w)
        if ok and verdict.query == "fair-termination":
            ok = fair_lasso_check(program, w)
        if ok and verdict.query == "fair-starvation":
            ok = starvation_lasso_check(program, w,
                                        program.symbols.id_of(args.handler))
    else:
        return None
    if not ok:
        return "self-audit failed: witness does not replay"
    return None


def _emit_verdict(program, verdict: Verdict, args, input_path: str) -> int:
    audit_error = None if args.no_self_audit else _self_audit(program, verdict, args)
    if audit_error:
        print(audit_error, file=sys.stderr)
        return EXIT_ERROR
    if args.emit == "record":
        lines = [f"query: {verdict.query}",
                 f"input: {input_path}",
                 f"answer: {verdict.answer}",
                 f"label: {verdict.label}"]
        if verdict.witness is not None:
            lines += _witness_records(program, verdict.witness)
        if verdict.certificate:
            lines.append(f"certificate: {verdict.certificate}")
        if verdict.budgets_hit:
            lines.append("budgets_hit: " + " ".join(verdict.budgets_hit))
        print("\n".join(lines))
    else:
        print(f"{verdict.label}")
        if verdict.witness is not None:
            print(verdict.witness.fmt(program))
        if verdict.certificate:
            print(f"certificate: {verdict.certificate}")
        if verdict.budgets_hit:
            print("budgets hit: " + " ".join(verdict.budgets_hit))
    holds = verdict.holds()
    if holds is None:
        return EXIT_UNKNOWN
    return EXIT_HOLDS if holds else EXIT_VIOLATED


def _parse_buffer(program, text: str) -> Multiset:
    counts = {}
    for part in text.replace(",", " ").split():
        if ":" in part:
            name, _, num = part.partition(":")
            count = int(num, 0)
        else:
            name, count = part, 1
        hid = program.symbols.id_of(name)
        counts[hid] = counts.get(hid, 0) + count
    return Multiset(counts)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ParseError, UndecidableQuery, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _run(args) -> int:
    cmd = args.command
    if cmd == "compile":
        program = _load_program(args.input)
        compiled = stitch_cancel(program) if program.has_cancel else stitch(program)
        text = compiled.to_dot() if args.emit == "dot" else format_net(compiled.net)
        _write(text, args.output)
        return EXIT_HOLDS
    if cmd == "coverability-graph":
        net = _load_net(args.input)
        _write(karp_miller(net).to_dot(), args.output)
        return EXIT_HOLDS
    if cmd == "encode-pn":
        net = _load_net(args.input)
        enc = encode_pn(net)
        header = "".join(f"# handler {h} stands for place {p}\n"
                         for p, h in sorted(enc.handler_map.items()))
        _write(header + format_program(enc.program), args.output)
        return EXIT_HOLDS
    if cmd == "encode-pn-fairterm":
        net = _load_net(args.input)
        enc = encode_pn_fairterm(net, args.place)
        header = "".join(f"# handler {h} stands for place {p}\n"
                         for p, h in sorted(enc.handler_map.items()))
        _write(header + format_program(enc.program), args.output)
        return EXIT_HOLDS
    if cmd == "simulate":
        program = _load_program(args.input)
        configs, exhausted = enumerate_reachable(program, args.max_states,
                                                 args.post_budget)
        for c in sorted(configs, key=lambda c: (c.state, c.buffer.items())):
            print(c.fmt(program))
        print(f"exhausted: {'true' if exhausted else 'false'}")
        return EXIT_HOLDS

    program = _load_program(args.input)
    budgets = Budgets(max_states=args.max_states, max_depth=args.max_depth,
                      post_budget=args.post_budget)
    if cmd == "check-safety":
        verdict = analysis.check_safety(
            program, program.symbols.id_of(args.state), budgets)
    elif cmd == "check-bound":
        verdict = analysis.check_boundedness(program, budgets)
    elif cmd == "check-term":
        verdict = analysis.check_termination(program, budgets)
    elif cmd == "check-fair-term":
        verdict = analysis.check_fair_termination(program, budgets)
    elif cmd == "check-starvation":
        verdict = analysis.check_fair_starvation(
            program, program.symbols.id_of(args.handler), budgets)
    elif cmd == "check-reach":
        target = Configuration(program.symbols.id_of(args.state),
                               _parse_buffer(program, args.buffer))
        verdict = analysis.check_config_reachability(program, target, budgets)
    else:
        raise ValueError(f"unknown command {cmd!r}")
    return _emit_verdict(program, verdict, args, args.input)


if __name__ == "__main__":
    sys.exit(main())
