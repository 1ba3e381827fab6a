"""Batch front end: build stages or schedules, verify, export certificates.

Outputs are deterministic given the arguments: JSON is emitted with sorted
keys and fixed indentation, every mass appears as an exact mantissa/scale
pair, and all sampling is seeded.  Exit codes: 0 on success, 2 for
configuration problems, 3 when a verification suite finds a violation (a
counterexample artifact is written in that case).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .adapters import DEFAULT_SCAN_CAP, make_adapter
from .certificates import (
    build_partition,
    certify_boundary,
    certify_max_decay,
    check_additivity,
    check_conservation,
    check_consistency,
    check_positivity,
)
from .dyadic import DyadicMass
from .errors import (
    ConfigError,
    DyadicMeasureError,
    InvariantViolation,
    VerificationViolation,
)
from .scheduling import build_schedule
from .stages import StageBuilder

VIOLATION_ARTIFACT = "dyadicmeasure-violation.json"


def _make_adapter(args: argparse.Namespace):
    injected = []
    if args.basis_file:
        try:
            with open(args.basis_file, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read basis file: {exc}") from exc
        probe = make_adapter(args.adapter)
        for line in lines:
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            injected.append(probe.parse_region(text))
    return make_adapter(args.adapter, injected=injected)


def _signature_text(flags) -> str:
    return "".join("I" if f else "E" for f in flags)


def _stage_rows(stage, adapter) -> dict:
    cells = []
    for cid in sorted(stage.cells):
        cell = stage.cells[cid]
        cells.append(
            {
                "cell": cid,
                "signature": _signature_text(stage.signature_of(cid)),
                "region": adapter.format_region(cell.region),
                "mass": cell.mass.to_json(),
            }
        )
    return {
        "stage": stage.index,
        "cells": cells,
        "total": stage.total_mass.to_json(),
    }


def _cmd_build(args: argparse.Namespace) -> dict:
    if args.stages < 1:
        raise ConfigError(f"--stages must be >= 1, got {args.stages}")
    adapter = _make_adapter(args)
    builder = StageBuilder(adapter)
    table = []
    for index in range(1, args.stages + 1):
        builder.insert(adapter.enumerate(index))
        table.append(_stage_rows(builder.snapshot(), adapter))
    return {"adapter": adapter.name, "command": "build", "stages": table}


def _cmd_schedule(args: argparse.Namespace) -> dict:
    adapter = _make_adapter(args)
    schedule, _ = build_schedule(adapter, args.depth, args.scan_cap)
    blocks = [
        {
            "i": b.i,
            "j": b.j,
            "F": list(b.holes),
            "G": list(b.cover),
            "H": list(b.remainder),
            "g": b.g,
        }
        for b in schedule.blocks
    ]
    return {
        "adapter": adapter.name,
        "command": "schedule",
        "depth": args.depth,
        "blocks": blocks,
    }


def _cmd_verify(args: argparse.Namespace) -> dict:
    adapter = _make_adapter(args)
    schedule, trace = build_schedule(adapter, args.depth, args.scan_cap)
    certificates = [
        certify_boundary(schedule, trace, i).to_json()
        for i in sorted({b.i for b in schedule.blocks})
    ]
    decay = [
        {"m": m, "value": certify_max_decay(schedule, trace, m).to_json()}
        for m in range(1, args.depth + 1)
    ]
    reports = [check_conservation(trace).to_json()]
    reports.append(
        check_additivity(
            trace.stage_at(min(12, len(trace))), 1000, seed=args.seed
        ).to_json()
    )
    reports.append(
        check_consistency(
            list(trace.stages(1, min(8, len(trace)))), 50, seed=args.seed
        ).to_json()
    )
    reports.append(check_positivity(adapter, 50).to_json())
    return {
        "adapter": adapter.name,
        "command": "verify",
        "depth": args.depth,
        "seed": args.seed,
        "boundary_certificates": certificates,
        "max_decay": decay,
        "reports": reports,
    }


def _parse_epsilon(text: str) -> DyadicMass:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad epsilon literal {text!r}: {exc}") from exc
    if not 0 < value <= 1:
        raise ConfigError(f"epsilon must be in (0, 1], got {text!r}")
    try:
        return DyadicMass.from_fraction(value)
    except InvariantViolation as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_partition(args: argparse.Namespace) -> dict:
    epsilon = _parse_epsilon(args.epsilon)
    m = 1
    while DyadicMass.pow2(m - 1) > epsilon:
        m += 1
    depth = args.depth if args.depth is not None else m
    adapter = _make_adapter(args)
    schedule, trace = build_schedule(adapter, depth, args.scan_cap)
    certificate = build_partition(schedule, trace, epsilon)
    return {
        "adapter": adapter.name,
        "command": "partition",
        "depth": depth,
        "certificate": certificate.to_json(),
    }


def _to_csv(payload: dict) -> str:
    if payload.get("command") != "build":
        raise ConfigError("csv export exists for the build stage table only")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["stage", "cell", "signature", "region", "mantissa", "scale"])
    for stage in payload["stages"]:
        for cell in stage["cells"]:
            writer.writerow(
                [
                    stage["stage"],
                    cell["cell"],
                    cell["signature"],
                    cell["region"],
                    cell["mass"]["mantissa"],
                    cell["mass"]["scale"],
                ]
            )
        writer.writerow(
            [
                stage["stage"],
                "TOTAL",
                "",
                "",
                stage["total"]["mantissa"],
                stage["total"]["scale"],
            ]
        )
    return out.getvalue()


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--adapter",
        choices=("rational-line", "cantor"),
        default="rational-line",
        help="which space to run on",
    )
    sub.add_argument(
        "--basis-file",
        default=None,
        help="file with one region literal per line, injected ahead of the "
        "canonical enumeration",
    )
    sub.add_argument(
        "--scan-cap",
        type=int,
        default=DEFAULT_SCAN_CAP,
        help="largest basis index a hole or cover scan may inspect",
    )
    sub.add_argument("--seed", type=int, default=0, help="sampling seed")
    sub.add_argument("--out", default=None, help="output path (default stdout)")
    sub.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="output format; csv is available for the build stage table",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadicmeasure",
        description="Exact dyadic premeasure construction at finite stage.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    build = subs.add_parser("build", help="insert basis sets and print stages")
    build.add_argument(
        "--stages", type=int, default=3, help="number of insertions"
    )
    _add_common(build)
    build.set_defaults(handler=_cmd_build)

    schedule = subs.add_parser(
        "schedule", help="run the diagonal block schedule"
    )
    schedule.add_argument(
        "--depth", type=int, default=3, help="number of diagonals"
    )
    _add_common(schedule)
    schedule.set_defaults(handler=_cmd_schedule)

    verify = subs.add_parser("verify", help="run every verification suite")
    verify.add_argument(
        "--depth", type=int, default=3, help="number of diagonals"
    )
    _add_common(verify)
    verify.set_defaults(handler=_cmd_verify)

    partition = subs.add_parser(
        "partition", help="emit a partition certificate"
    )
    partition.add_argument(
        "epsilon", help="dyadic mass bound for every piece, e.g. 1/8"
    )
    partition.add_argument(
        "--depth",
        type=int,
        default=None,
        help="number of diagonals (default: what epsilon requires)",
    )
    _add_common(partition)
    partition.set_defaults(handler=_cmd_partition)

    return parser


def main(argv=None) -> int:
    # stage totals at depth have mantissas beyond the default str limit
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.handler(args)
        if args.format == "csv":
            text = _to_csv(payload)
        else:
            text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    except VerificationViolation as exc:
        artifact = json.dumps(
            {"error": type(exc).__name__, "message": str(exc)},
            indent=2,
            sort_keys=True,
        )
        path = args.out or VIOLATION_ARTIFACT
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(artifact + "\n")
        print(f"verification violation: {exc}", file=sys.stderr)
        print(f"counterexample written to {path}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DyadicMeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
