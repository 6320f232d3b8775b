"""Command-line front end: generation, solving, verification, oracle
comparison, and ratio benchmarking.

Output is plain text, one datum per line; identical invocations produce
byte-identical output.  Exit codes: 0 success, 1 malformed input,
2 verification failure, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from .errors import InternalInvariantError, MalformedInputError, VerificationError
from .instances import (Instance, gen_planted, gen_random, parse_instance,
                        tour_to_text, write_instance)
from .oracle import held_karp_max, held_karp_min12
from .tour import SolveOptions, certificate_to_text, solve, solve_min12, verify_certificate


def _read_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _cmd_gen(args) -> int:
    if args.planted:
        inst, _order = gen_planted(args.n, args.extra, args.seed)
    else:
        inst = gen_random(args.n, args.p, args.seed)
    text = write_instance(inst)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_solve(args) -> int:
    inst = _read_instance(args.input)
    opts = SolveOptions(odd_strategy=args.odd_strategy, mode=args.mode)
    tour, cert = solve(inst, opts)
    sys.stdout.write(tour_to_text(tour))
    if args.cert:
        with open(args.cert, "w", encoding="utf-8") as fh:
            fh.write(certificate_to_text(cert))
    return 0


def _cmd_verify(args) -> int:
    inst = _read_instance(args.input)
    with open(args.cert, "r", encoding="utf-8") as fh:
        text = fh.read()
    issues = verify_certificate(inst, text)
    if issues:
        for issue in issues:
            print(f"FAIL {issue}")
        raise VerificationError(f"{len(issues)} issue(s)")
    print("OK")
    return 0


def _cmd_oracle(args) -> int:
    inst = _read_instance(args.input)
    if args.min12:
        print(f"OPT {held_karp_min12(inst).value}")
    else:
        print(f"OPT {held_karp_max(inst).value}")
    return 0


def _cmd_min12(args) -> int:
    inst = _read_instance(args.input)
    opts = SolveOptions(odd_strategy=args.odd_strategy, mode=args.mode)
    tour, cost, cert = solve_min12(inst, opts)
    print(f"cost {cost}")
    print(" ".join(str(v) for v in tour.order))
    if args.cert:
        with open(args.cert, "w", encoding="utf-8") as fh:
            fh.write(certificate_to_text(cert))
    return 0


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    opts = SolveOptions(odd_strategy=args.odd_strategy)
    print("n\ttrials\tmin_ratio\tmean_ratio")
    seed = args.seed
    for n in sizes:
        ratios = []
        for _trial in range(args.trials):
            if args.planted:
                inst, _ = gen_planted(n, 3 * n, seed)
                opt = n
            else:
                if n > 16:
                    raise MalformedInputError(
                        "non-planted bench needs n <= 16 for the exact oracle")
                inst = gen_random(n, args.p, seed)
                opt = held_karp_max(inst).value
            seed += 1
            tour, _cert = solve(inst, opts)
            ratios.append(tour.weight / opt if opt else 1.0)
        print(f"{n}\t{args.trials}\t{min(ratios):.4f}"
              f"\t{sum(ratios) / len(ratios):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atsp01",
        description="3/4-approximation solver for Max (0,1)-ATSP")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--planted", action="store_true")
    p.add_argument("--extra", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("--input", required=True)
    p.add_argument("--odd-strategy", choices=("dummy", "contract"),
                   default="dummy")
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--cert", help="write the certificate here")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="re-verify a certificate")
    p.add_argument("--input", required=True)
    p.add_argument("--cert", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("oracle", help="print the exact optimum (n <= 16)")
    p.add_argument("--input", required=True)
    p.add_argument("--min12", action="store_true")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("bench", help="ratio table over seeded instances")
    p.add_argument("--sizes", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--planted", action="store_true")
    p.add_argument("--odd-strategy", choices=("dummy", "contract"),
                   default="dummy")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("min12", help="5/4-approximation for Min (1,2)-ATSP")
    p.add_argument("--input", required=True)
    p.add_argument("--odd-strategy", choices=("dummy", "contract"),
                   default="dummy")
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--cert")
    p.set_defaults(func=_cmd_min12)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MalformedInputError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
