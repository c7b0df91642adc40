"""Command-line entry point: ``dualtest <subcommand> [options]``.

Examples::

    dualtest tolerant-l1 --family uniform --n 10000 --eps1 0.1 --eps2 0.3 --trials 400
    dualtest estimate-entropy --family random --n 4096 --delta 0.5 --out run.jsonl
    dualtest gen-instance --family uniformity --n 10000 --eps 0.1 --out hard.json
    dualtest sweep test-uniformity --axis epsilon --values 0.4,0.2,0.1,0.05 --n 1000
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from dualtest.hard_instances import generate
from dualtest.harness import ALGORITHMS, SWEEP_AXES, ExperimentConfig, run_experiment, sweep


def _parse_value(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def _params(pairs: list[str]) -> dict[str, Any]:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise SystemExit(f"--param expects key=value, got {pair!r}")
        out[key] = _parse_value(value)
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="domain size for generated fixtures")
    p.add_argument("--eps", type=float, dest="epsilon", help="distance or accuracy parameter")
    p.add_argument("--eps1", type=float)
    p.add_argument("--eps2", type=float)
    p.add_argument("--delta", type=float, help="additive entropy accuracy, in bits")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--dist", help="distribution file (.json or .bin)")
    p.add_argument("--ref", help="reference distribution file (known D* or second unknown)")
    p.add_argument("--family", help="fixture family: uniform, point-mass, uniform-prefix, random, "
                   "random-monotone, or a hard-instance family")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="extra fixture parameter, repeatable")
    p.add_argument("--noise-tau", type=float, help="multiplicative EVAL noise")
    p.add_argument("--noise-mode", choices=("random", "up", "down"), default="random")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="record wall times (reports stop being byte-stable)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _config(args: argparse.Namespace, algorithm: str) -> ExperimentConfig:
    return ExperimentConfig(
        algorithm=algorithm,
        trials=args.trials,
        master_seed=args.seed,
        dist_path=args.dist,
        family=args.family,
        family_params=_params(args.param),
        ref_path=args.ref,
        n=args.n,
        epsilon=args.epsilon,
        eps1=args.eps1,
        eps2=args.eps2,
        delta=args.delta,
        noise_tau=args.noise_tau,
        noise_mode=args.noise_mode,
        workers=args.workers,
        timing=args.timing,
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualtest", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ALGORITHMS:
        _add_common(sub.add_parser(name, help=f"run seeded trials of {name}"))

    gen = sub.add_parser("gen-instance", help="write a hard instance and its certificate")
    gen.add_argument("--family", required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--eps", type=float, dest="epsilon")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    gen.add_argument("--out", required=True, help="distribution path; a .meta.json sidecar is written next to it")

    sw = sub.add_parser("sweep", help="one aggregate row per parameter value")
    sw.add_argument("algorithm", choices=sorted(ALGORITHMS))
    sw.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    sw.add_argument("--values", required=True, help="comma-separated, e.g. 0.4,0.2,0.1")
    _add_common(sw)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-instance":
            params = {"n": args.n, **_params(args.param)}
            if args.epsilon is not None:
                params["epsilon"] = args.epsilon
            inst = generate(args.family, params, seed=args.seed)
            inst.save(args.out)
            print(json.dumps(inst.provenance(), sort_keys=True))
        elif args.command == "sweep":
            values = [_parse_value(v) for v in args.values.split(",") if v.strip()]
            if not values:
                raise ValueError("values: sweep needs at least one value")
            # the base config must validate, so seed the swept field with the first value
            if args.axis == "gap":
                args.eps2 = (args.eps1 or 0.0) + values[0]
            else:
                setattr(args, SWEEP_AXES[args.axis], values[0])
            rows = sweep(_config(args, args.algorithm), args.axis, values)
            if args.format == "csv":
                cols = list(rows[0])
                lines = [",".join(cols)] + [",".join(str(r.get(c, "")) for c in cols) for r in rows]
                _emit("\n".join(lines) + "\n", args.out)
            else:
                _emit("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), args.out)
        else:
            report = run_experiment(_config(args, args.command))
            _emit(report.to_csv() if args.format == "csv" else report.to_jsonl(), args.out)
            if args.out is not None:
                print(json.dumps(report.aggregate, sort_keys=True))
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
