"""``frfold`` command line: fold, bench and recognize.

Exit status: 0 success, 1 input error, 2 scaling-gate failure,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import _backend
from .bench import SPACE_TOL, TIME_TOL, render_csv, run_bench, scaling_verdicts
from .cfl import parse_grammar, recognize_naive, recognize_packed
from .fr import fold_fr
from .fr2 import AUTO, CACHED, DENSE, fold_fr2
from .model import (
    ALPHABET,
    FoldResult,
    InputError,
    PairingRule,
    RnaSequence,
    SecondaryStructure,
    TableFault,
    check_w,
    validate_structure,
)
from .oracle import fold_oracle

EXIT_OK, EXIT_INPUT, EXIT_GATE, EXIT_INVARIANT = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "fr"
    w_override: int | None = None
    min_loop: int = 0
    wobble: bool = False
    output_format: str = "dotbracket"
    seed: int = 0
    backend: str | None = None

    def __post_init__(self):
        if self.algorithm not in ("oracle", "fr", "fr2"):
            raise InputError(f"unknown algorithm {self.algorithm!r}")
        if self.output_format not in ("dotbracket", "json"):
            raise InputError(f"unknown output format {self.output_format!r}")
        if self.w_override is not None:
            check_w(self.w_override)

    @property
    def rule(self) -> PairingRule:
        return PairingRule(self.wobble, self.min_loop)


def parse_fasta(text: str) -> list[tuple[str, RnaSequence]]:
    """Records as (id, sequence); a file without headers is one record with id ''."""
    records: list[tuple[str, list[str]]] = []
    for line in text.splitlines():
        if line.startswith(">"):
            records.append((line[1:].strip(), []))
        elif line.strip():
            if not records:
                records.append(("", []))
            records[-1][1].append("".join(line.split()))
    out = []
    for rid, chunks in records:
        raw = "".join(chunks).upper().replace("T", "U")
        for offset, ch in enumerate(raw, start=1):
            if ch not in ALPHABET:
                name = rid or "<anonymous>"
                raise InputError(f"record {name}: invalid residue {ch!r} at offset {offset}")
        out.append((rid, RnaSequence(raw)))
    return out


def emit_dotbracket(seq: RnaSequence, structure: SecondaryStructure,
                    rule: PairingRule | None = None) -> str:
    report = validate_structure(seq, rule or PairingRule(wobble_enabled=True), structure)
    if not report.ok:
        raise TableFault("invalid structure: " + "; ".join(report.violations))
    marks = ["."] * len(seq)
    for i, j in structure.pairs:
        marks[i - 1] = "("
        marks[j - 1] = ")"
    return f"{seq}\n{''.join(marks)}\n"


def fold_one(config: RunConfig, seq: RnaSequence) -> FoldResult:
    if config.algorithm == "oracle":
        return fold_oracle(seq, config.rule)
    if config.algorithm == "fr":
        return fold_fr(seq, config.rule, config.w_override, config.backend)
    return fold_fr2(seq, config.rule, config.w_override, config.backend)


def run_fold(config: RunConfig, inputs: list[tuple[str, RnaSequence]]) -> str:
    chunks = []
    for rid, seq in inputs:
        res = fold_one(config, seq)
        report = validate_structure(seq, config.rule, res.structure)
        if not report.ok:
            raise TableFault(f"record {rid or '<anonymous>'}: " + "; ".join(report.violations))
        if config.output_format == "dotbracket":
            header = f">{rid}\n" if rid else ""
            chunks.append(header + emit_dotbracket(seq, res.structure, config.rule))
        else:
            doc = {
                "id": rid,
                "sequence": str(seq),
                "algorithm": config.algorithm,
                "w": res.w,
                "score": res.score,
                "pairs": [list(p) for p in res.structure.sorted_pairs()],
                "counters": res.counters.as_dict(),
            }
            chunks.append(json.dumps(doc, sort_keys=True) + "\n")
    return "".join(chunks)


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is reserved for the scaling gate
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not sizes or min(sizes) < 0:
        raise argparse.ArgumentTypeError("sizes must be non-negative integers")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frfold", description="Four-Russians RNA folding and CNF recognition")
    parser.add_argument("--backend", choices=sorted(_backend.BACKENDS),
                        help=f"kernel implementation (default {_backend.DEFAULT})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fold = sub.add_parser("fold", help="fold FASTA records")
    fold.add_argument("--alg", choices=["oracle", "fr", "fr2"], default="fr")
    fold.add_argument("--w", type=int)
    fold.add_argument("--min-loop", type=int, default=0)
    fold.add_argument("--wobble", action="store_true")
    fold.add_argument("--format", choices=["dotbracket", "json"], default="dotbracket")
    fold.add_argument("--input", help="FASTA file (stdin if omitted)")

    bench = sub.add_parser("bench", help="counter-based scaling benchmark")
    bench.add_argument("--alg", choices=["fr", "fr2", "all"], default="all")
    bench.add_argument("--sizes", type=_sizes, required=True)
    bench.add_argument("--w", type=int)
    bench.add_argument("--reps", type=int, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--csv", required=True)
    bench.add_argument("--min-loop", type=int, default=0)
    bench.add_argument("--wobble", action="store_true")
    bench.add_argument("--updation", choices=[AUTO, DENSE, CACHED], default=AUTO)
    bench.add_argument("--time-tol", type=float, default=TIME_TOL,
                       help="allowed relative deviation of query-count ratios")
    bench.add_argument("--space-tol", type=float, default=SPACE_TOL,
                       help="allowed factor between observed and predicted space ratios")
    bench.add_argument("--omit-timing", action="store_true",
                       help="leave wall_time_ms empty so CSVs compare byte-for-byte")

    rec = sub.add_parser("recognize", help="CNF grammar membership, one string per line")
    rec.add_argument("--grammar", required=True)
    rec.add_argument("--input")
    mode = rec.add_mutually_exclusive_group()
    mode.add_argument("--packed", dest="packed", action="store_true", default=True)
    mode.add_argument("--naive", dest="packed", action="store_false")
    return parser


def _read(path: str | None) -> str:
    if path is None:
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _cmd_fold(args) -> int:
    config = RunConfig(args.alg, args.w, args.min_loop, args.wobble, args.format,
                       backend=args.backend)
    sys.stdout.write(run_fold(config, parse_fasta(_read(args.input))))
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.w is not None:
        check_w(args.w)
    if args.seed < 0:
        raise InputError("seed must be unsigned")
    algs = ["fr", "fr2"] if args.alg == "all" else [args.alg]
    records, modes = run_bench(algs, args.sizes, args.reps, args.seed, args.w,
                               PairingRule(args.wobble, args.min_loop), args.backend,
                               args.updation)
    with open(args.csv, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_csv(records, modes, args.omit_timing))
    verdicts, skipped = scaling_verdicts(records, args.time_tol, args.space_tol)
    for line in skipped:
        print(line)
    for v in verdicts:
        print(v.line())
    return EXIT_OK if all(v.ok for v in verdicts) else EXIT_GATE


def _cmd_recognize(args) -> int:
    grammar = parse_grammar(_read(args.grammar))
    text = _read(args.input)
    lines = text.split("\n") if text else []
    if text.endswith("\n"):
        lines.pop()
    out = []
    for line in lines:
        line = line.rstrip("\r")
        if args.packed:
            ok = recognize_packed(grammar, line, backend=args.backend)
        else:
            ok = recognize_naive(grammar, line)
        out.append("accept\n" if ok else "reject\n")
    sys.stdout.write("".join(out))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"fold": _cmd_fold, "bench": _cmd_bench, "recognize": _cmd_recognize}[args.command]
    try:
        return handler(args)
    except InputError as exc:
        print(f"frfold: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TableFault as exc:
        print(f"frfold: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
