"""Command-line front end.

Exit codes: 0 = checked and clean (or command succeeded); 2 = a violation
was found (certificate written); 1 = usage or domain errors.  Reports are
JSON, plot data CSV; all numeric output uses exact literals, and a run
with an identical configuration produces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .analysis import ViolationCertificate, jensen_check, wright_check
from .decomposition import decompose, verify_against_truth
from .domain import make_grid
from .errors import NotJensenConvexError, WrightDecompError
from .exactreal import ExactReal, parse_rational
from .extension import ExtensionHandle
from .funcspec import dumps_instance, generate, load_instance


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the convention here
    # reserves 2 for found violations.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run; embedded in every report."""

    subcommand: str
    instance: str | None = None
    eps: str | None = None
    seed: int = 0
    grid_n: int | None = None
    irrational_n: int | None = None
    steps: tuple[str, ...] = ()
    out: str | None = None
    csv: str | None = None
    extra: tuple[tuple[str, object], ...] = ()

    def to_jsonable(self) -> dict:
        doc = {
            "subcommand": self.subcommand,
            "instance": self.instance,
            "eps": self.eps,
            "seed": self.seed,
            "grid_n": self.grid_n,
            "irrational_n": self.irrational_n,
            "steps": list(self.steps),
            "out": self.out,
            "csv": self.csv,
        }
        doc.update({k: v for k, v in self.extra})
        return doc


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent) or ".", prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report_text(config: RunConfig, payload: dict) -> str:
    doc = {"config": config.to_jsonable()}
    doc.update(payload)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(config: RunConfig, payload: dict, out: str | None) -> None:
    text = _report_text(config, payload)
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wrightdecomp", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", parents=[], help="generate a seeded instance file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--variant",
        default="decomposable",
        choices=["decomposable", "abs-additive", "abs_additive", "spiked"],
    )
    p.add_argument("--basis", default=None, help="comma-separated squarefree radicals, e.g. 2,3")
    p.add_argument("--basis-size", type=int, default=2)
    p.add_argument("--hinges", type=int, default=4, help="maximum hinge count")
    p.add_argument("--nonzero-c1", action="store_true", help="additive part not vanishing on Q")
    p.add_argument("--out", default=None)

    p = sub.add_parser("eval", help="evaluate an instance at a span point")
    p.add_argument("instance")
    p.add_argument("--at", required=True, help="ExactReal literal")

    p = sub.add_parser("check-wright", help="exact double-difference sweep")
    p.add_argument("instance")
    p.add_argument("--grid-n", type=int, default=12)
    p.add_argument("--irrational-n", type=int, default=0)
    p.add_argument("--steps", default=None, help="comma-separated ExactReal step literals")
    p.add_argument("--max-grid-steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("check-jensen", help="exact midpoint-convexity sweep")
    p.add_argument("instance")
    p.add_argument("--grid-n", type=int, default=12)
    p.add_argument("--irrational-n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("decompose", help="recover the additive part vanishing on Q")
    p.add_argument("instance")
    p.add_argument("--eps", default="1/100000000")
    p.add_argument("--grid-n", type=int, default=8)
    p.add_argument("--irrational-n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="check a decomposition against ground truth")
    p.add_argument("result", help="decomposition result JSON")
    p.add_argument("--truth", required=True, help="instance file with known ground truth")
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify-certificate", help="re-check an emitted certificate")
    p.add_argument("report", help="report JSON containing a certificate")
    p.add_argument("--instance", default=None, help="instance file (defaults to the report's)")

    p = sub.add_parser("report", help="emit extension enclosures as CSV plot data")
    p.add_argument("instance")
    p.add_argument("--grid-n", type=int, default=12)
    p.add_argument("--irrational-n", type=int, default=6)
    p.add_argument("--eps", default="1/10000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", required=True)
    p.add_argument("--out", default=None)
    return parser


def _cmd_gen(args) -> int:
    basis = tuple(int(b) for b in args.basis.split(",")) if args.basis else None
    inst = generate(
        args.seed,
        kind=args.variant.replace("-", "_"),
        basis_size=args.basis_size,
        basis=basis,
        max_hinges=args.hinges,
        nonzero_rational_part=args.nonzero_c1,
    )
    text = dumps_instance(inst)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_eval(args) -> int:
    inst = load_instance(args.instance)
    x = ExactReal.parse(args.at)
    value = inst.evaluate(x)
    sys.stdout.write(value.literal() + "\n")
    return 0


def _certificate_payload(report) -> dict:
    return report.to_jsonable()


def _cmd_check_wright(args) -> int:
    inst = load_instance(args.instance)
    grid = make_grid(inst.interval, args.grid_n, args.irrational_n, inst.basis, args.seed)
    steps = tuple(ExactReal.parse(s) for s in args.steps.split(",")) if args.steps else ()
    report = wright_check(inst, grid, steps, max_grid_steps=args.max_grid_steps)
    config = RunConfig(
        subcommand="check-wright",
        instance=args.instance,
        seed=args.seed,
        grid_n=args.grid_n,
        irrational_n=args.irrational_n,
        steps=tuple(s.literal() for s in steps),
        out=args.out,
        extra=(("max_grid_steps", args.max_grid_steps),),
    )
    _emit(config, {"check": "wright", "report": _certificate_payload(report)}, args.out)
    return 0 if report.passed else 2


def _cmd_check_jensen(args) -> int:
    inst = load_instance(args.instance)
    grid = make_grid(inst.interval, args.grid_n, args.irrational_n, inst.basis, args.seed)
    report = jensen_check(inst, grid)
    config = RunConfig(
        subcommand="check-jensen",
        instance=args.instance,
        seed=args.seed,
        grid_n=args.grid_n,
        irrational_n=args.irrational_n,
        out=args.out,
    )
    _emit(config, {"check": "jensen", "report": _certificate_payload(report)}, args.out)
    return 0 if report.passed else 2


def _cmd_decompose(args) -> int:
    inst = load_instance(args.instance)
    eps = parse_rational(args.eps)
    grid = make_grid(inst.interval, args.grid_n, args.irrational_n, inst.basis, args.seed)
    config = RunConfig(
        subcommand="decompose",
        instance=args.instance,
        eps=str(eps),
        seed=args.seed,
        grid_n=args.grid_n,
        irrational_n=args.irrational_n,
        out=args.out,
    )
    try:
        result = decompose(inst, eps, grid)
    except NotJensenConvexError as exc:
        payload = {
            "error": "not midpoint convex on sampled rationals",
            "certificate": exc.certificate.to_jsonable() if exc.certificate else None,
        }
        _emit(config, payload, args.out)
        return 2
    _emit(config, result.to_jsonable(), args.out)
    return 0


def _cmd_verify(args) -> int:
    truth = load_instance(args.truth)
    with open(args.result, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    eps = parse_rational(doc["eps"])
    seed = int(doc["seed"])
    grid_n = doc["config"]["grid_n"] if "config" in doc else 8
    irrational_n = doc["config"]["irrational_n"] if "config" in doc else 4
    grid = make_grid(truth.interval, grid_n, irrational_n, truth.basis, seed)
    result = decompose(truth, eps, grid)
    stored = {
        m: (enc["lo"], enc["hi"])
        for m, enc in ((int(k), v) for k, v in doc["additive"].items())
    }
    recomputed = {
        m: (enc.lo.literal(), enc.hi.literal()) for m, enc in result.additive_hat.items()
    }
    report = verify_against_truth(result, truth)
    failures = list(report.failures)
    if stored != recomputed:
        failures.append("stored additive enclosures do not match a reproduced run")
    config = RunConfig(
        subcommand="verify",
        instance=args.truth,
        eps=str(eps),
        seed=seed,
        grid_n=grid_n,
        irrational_n=irrational_n,
        out=args.out,
        extra=(("result", args.result),),
    )
    payload = {
        "passed": report.passed and stored == recomputed,
        "failures": failures,
        "radicals_checked": report.radicals_checked,
        "probes_checked": report.probes_checked,
    }
    _emit(config, payload, args.out)
    return 0 if payload["passed"] else 2


def _cmd_verify_certificate(args) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    cert_doc = None
    if "report" in doc and isinstance(doc["report"], dict):
        cert_doc = doc["report"].get("certificate")
    if cert_doc is None:
        cert_doc = doc.get("certificate")
    if cert_doc is None:
        sys.stderr.write("report carries no certificate\n")
        return 1
    instance_path = args.instance or (doc.get("config") or {}).get("instance")
    if not instance_path:
        sys.stderr.write("no instance available to re-check against\n")
        return 1
    inst = load_instance(instance_path)
    cert = ViolationCertificate.from_jsonable(cert_doc)
    if cert.verify(inst):
        sys.stdout.write("certificate verified: violation reproduces exactly\n")
        return 0
    sys.stdout.write("certificate REJECTED: violation does not reproduce\n")
    return 2


def _cmd_report(args) -> int:
    inst = load_instance(args.instance)
    eps = parse_rational(args.eps)
    grid = make_grid(inst.interval, args.grid_n, args.irrational_n, inst.basis, args.seed)
    try:
        handle = ExtensionHandle(inst, precheck_grid=grid)
    except NotJensenConvexError as exc:
        config = RunConfig(
            subcommand="report",
            instance=args.instance,
            eps=str(eps),
            seed=args.seed,
            grid_n=args.grid_n,
            irrational_n=args.irrational_n,
            out=args.out,
            csv=args.csv,
        )
        payload = {
            "error": "not midpoint convex on sampled rationals",
            "certificate": exc.certificate.to_jsonable() if exc.certificate else None,
        }
        _emit(config, payload, args.out)
        return 2
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x_literal", "lo", "hi", "width"])
    for x in grid.points():
        enc = handle.extend_eval(x, eps)
        writer.writerow([x.literal(), enc.lo.literal(), enc.hi.literal(), enc.width.literal()])
    _atomic_write(args.csv, buf.getvalue())
    config = RunConfig(
        subcommand="report",
        instance=args.instance,
        eps=str(eps),
        seed=args.seed,
        grid_n=args.grid_n,
        irrational_n=args.irrational_n,
        out=args.out,
        csv=args.csv,
    )
    _emit(config, {"rows": len(grid.points()), "csv": args.csv}, args.out)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "eval": _cmd_eval,
    "check-wright": _cmd_check_wright,
    "check-jensen": _cmd_check_jensen,
    "decompose": _cmd_decompose,
    "verify": _cmd_verify,
    "verify-certificate": _cmd_verify_certificate,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except WrightDecompError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
