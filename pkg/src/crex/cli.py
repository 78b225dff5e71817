"""Command-line interface.

Subcommands: ``match`` (membership test, exit 0/1/2), ``classify``
(JSON classification of a pattern or corpus), ``export`` (DOT/JSON of a
construction stage) and ``bench`` (instrumented timing table).
Construction caps honor the CREX_STATE_CAP environment variable.
"""

from __future__ import annotations

import argparse
import json
import random
import statistics
import sys
import time

from . import augmented as AU
from . import ca as CA
from . import classifier as CL
from . import csa as CS
from . import matcher as M
from . import oracle as O
from . import parser as P
from .errors import CrexError
from .offset_list import Stats


def _compile(pattern: str, dotall: bool, unanchored: bool):
    if unanchored:
        pattern = f".*({pattern}).*"
    return P.normalize(P.parse(pattern, dotall=dotall))


def _read_input(path: str | None) -> bytes:
    if path is None or path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as handle:
        return handle.read()


def _error_exit(err: CrexError) -> int:
    payload = {"error": {"code": err.code, "message": str(err)}}
    extra = getattr(err, "witness", None)
    if extra:
        payload["error"]["witness_prefix"] = extra.decode("latin1")
    carrier = getattr(err, "carrier", "")
    if carrier:
        payload["error"]["carrier"] = carrier
    print(json.dumps(payload), file=sys.stderr)
    return 2


def cmd_match(args) -> int:
    try:
        ast = _compile(args.pattern, args.dotall, args.unanchored)
        data = _read_input(args.input)
        stats = Stats()
        if args.engine == "oracle":
            accepted = O.oracle_match(CA.build_ca(ast), data)
        elif args.engine == "basic":
            csa = CS.BasicCsa(CA.build_ca(ast))
            accepted = csa.match_set(data)
        else:
            csa = AU.AugmentedCsa(CA.build_ca(ast))
            if not args.lazy:
                csa.explore_all()
            accepted = M.match_word(csa, data, stats=stats).accepted
            if args.stats:
                payload = stats.as_dict()
                payload["states_built"] = csa.states_built
                print(json.dumps(payload), file=sys.stderr)
    except CrexError as err:
        return _error_exit(err)
    print("match" if accepted else "no-match")
    return 0 if accepted else 1


def cmd_classify(args) -> int:
    try:
        if args.corpus:
            with open(args.corpus, "r", encoding="utf-8",
                      errors="replace") as handle:
                report = CL.classify_corpus(
                    handle, threshold=args.threshold, state_cap=args.state_cap)
        else:
            report = {
                "schema_version": 1,
                "threshold": args.threshold,
                "patterns": [CL.classify_pattern(
                    args.pattern, threshold=args.threshold,
                    state_cap=args.state_cap).as_dict()],
            }
    except OSError as err:
        print(json.dumps({"error": {"code": "IO", "message": str(err)}}),
              file=sys.stderr)
        return 2
    sys.stdout.write(CL.report_json(report))
    return 0


def cmd_export(args) -> int:
    try:
        ast = _compile(args.pattern, args.dotall, False)
        ca = CA.build_ca(ast)
        if args.stage == "ca":
            out = CA.to_dot(ca)
        else:
            csa = (CS.determinize_basic(ca) if args.stage == "csa-basic"
                   else AU.determinize_augmented(ca))
            if args.format == "json" and args.stage == "csa-augmented":
                out = json.dumps(csa.summary(), indent=2) + "\n"
            else:
                out = CS.to_dot(csa, title=args.stage.replace("-", "_"))
    except CrexError as err:
        return _error_exit(err)
    sys.stdout.write(out)
    return 0


def _bench_text(args) -> bytes:
    if args.text:
        return _read_input(args.text)
    rng = random.Random(args.seed)
    return bytes(rng.getrandbits(8) for _ in range(args.random_bytes))


def cmd_bench(args) -> int:
    data = _bench_text(args)
    patterns = list(args.patterns)
    if args.pattern_file:
        with open(args.pattern_file, "r", encoding="utf-8") as handle:
            patterns.extend(
                line.strip() for line in handle
                if line.strip() and not line.startswith("#"))
    rows = []
    for pattern in patterns:
        row = {"pattern": pattern, "bytes": len(data)}
        try:
            ast = _compile(pattern, args.dotall, args.unanchored)
            if args.engine == "oracle":
                start = time.perf_counter()
                row["accepted"] = O.oracle_match(CA.build_ca(ast), data)
                row["seconds"] = round(time.perf_counter() - start, 6)
            else:
                csa = AU.AugmentedCsa(CA.build_ca(ast))
                timings = []
                outcome = None
                for _ in range(args.repeat):
                    stats = Stats()
                    start = time.perf_counter()
                    outcome = M.match_word(csa, data, stats=stats)
                    timings.append(time.perf_counter() - start)
                row["accepted"] = outcome.accepted
                row["seconds"] = round(statistics.median(timings), 6)
                row["bytes_per_second"] = int(len(data) / max(row["seconds"], 1e-9))
                row.update(outcome.stats.as_dict())
                row.pop("bytes", None)
                row["bytes"] = len(data)
                row["states_built"] = csa.states_built
        except CrexError as err:
            row["error"] = {"code": err.code, "message": str(err)}
        rows.append(row)
    if args.json:
        print(json.dumps({"rows": rows}, indent=2))
    else:
        for row in rows:
            if "error" in row:
                print(f"{row['pattern']!r}: {row['error']['code']}")
            else:
                print(f"{row['pattern']!r}: {row['seconds']}s  "
                      f"{row.get('bytes_per_second', 0)} B/s  "
                      f"touches={row.get('element_touches')}  "
                      f"accepted={row['accepted']}")
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="crex",
        description="counting-set automata regex engine")
    sub = top.add_subparsers(dest="command", required=True)

    match = sub.add_parser("match", help="test whether the input matches")
    match.add_argument("pattern")
    match.add_argument("input", nargs="?", default=None,
                       help="input file ('-' or absent = stdin)")
    match.add_argument("--engine", choices=("augmented", "basic", "oracle"),
                       default="augmented")
    match.add_argument("--lazy", action="store_true",
                       help="construct automaton states on demand while "
                            "matching instead of up front")
    match.add_argument("--unanchored", action="store_true",
                       help="wrap the pattern in .*( ).*")
    match.add_argument("--dotall", action="store_true",
                       help="let '.' match newline")
    match.add_argument("--stats", action="store_true",
                       help="print instrumentation JSON to stderr")
    match.set_defaults(func=cmd_match)

    classify = sub.add_parser("classify", help="classify patterns")
    group = classify.add_mutually_exclusive_group(required=True)
    group.add_argument("pattern", nargs="?")
    group.add_argument("--corpus", help="file with one pattern per line")
    classify.add_argument("--threshold", type=int, default=20,
                          help="sum-of-upper-bounds filter (default 20)")
    classify.add_argument("--state-cap", type=int, default=None)
    classify.set_defaults(func=cmd_classify)

    export = sub.add_parser("export", help="dump a construction stage")
    export.add_argument("pattern")
    export.add_argument("--stage", choices=("ca", "csa-basic", "csa-augmented"),
                        default="ca")
    export.add_argument("--format", choices=("dot", "json"), default="dot")
    export.add_argument("--dotall", action="store_true")
    export.set_defaults(func=cmd_export)

    bench = sub.add_parser("bench", help="time patterns over a text")
    bench.add_argument("patterns", nargs="*")
    bench.add_argument("--pattern-file")
    bench.add_argument("--text", help="input file (default: random bytes)")
    bench.add_argument("--random-bytes", type=int, default=1 << 20)
    bench.add_argument("--seed", type=int, default=0xC0FFEE)
    bench.add_argument("--repeat", type=int, default=3)
    bench.add_argument("--engine", choices=("augmented", "oracle"),
                       default="augmented")
    bench.add_argument("--unanchored", action="store_true")
    bench.add_argument("--dotall", action="store_true")
    bench.add_argument("--json", action="store_true")
    bench.set_defaults(func=cmd_bench)
    return top


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
