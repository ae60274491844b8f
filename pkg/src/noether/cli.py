"""Command-line entry point.

Exit codes: 0 success, 1 error, 2 inconclusive (search bound exhausted or
a witness that certifies only the entry formula).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .cyclotomic import norm, parse
from .errors import NoetherError, ReproductionError
from .fuzz import IDENTITIES, default_seed, run_identity
from .reduction import (
    GroupSpec,
    Verdict,
    Witness,
    certificate_from_dict,
    certify,
    run_reduction,
    trace_to_dict,
    verify_certificate,
)
from .search import (
    SearchConfig,
    candidate_count,
    prime_power_family,
    find_witness,
    reproduce_examples,
    select_triples,
    solve_norm_equation,
    write_csv,
)

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2
OUTCOMES = {EXIT_OK: "ok", EXIT_ERROR: "error", EXIT_INCONCLUSIVE: "inconclusive"}


@dataclass
class RunReport:
    command: list[str]
    inputs: dict[str, Any]
    outcome: str = "ok"
    payload: Any = None
    search_bounds: dict[str, Any] | None = None
    wall_time: float | None = None  # only recorded with --timing
    messages: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "command": self.command,
            "inputs": self.inputs,
            "outcome": self.outcome,
            "payload": self.payload,
            "search_bounds": self.search_bounds,
            "messages": self.messages,
        }
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunReport:
        if d["outcome"] not in OUTCOMES.values():
            raise ValueError(f"bad outcome {d['outcome']!r}")
        return cls(
            command=list(d["command"]),
            inputs=dict(d["inputs"]),
            outcome=d["outcome"],
            payload=d.get("payload"),
            search_bounds=d.get("search_bounds"),
            wall_time=d.get("wall_time"),
            messages=list(d.get("messages", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


class _Parser(argparse.ArgumentParser):
    # usage errors are errors (1), not "inconclusive" (2)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _dims(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO..HI, got {text!r}") from None
    return a, b


def parse_witness(text: str) -> Witness:
    """``"a1; alpha_0, alpha_1, ..."``."""
    head, sep, tail = text.partition(";")
    if not sep:
        raise argparse.ArgumentTypeError(f"witness must look like 'a1; a0, a1, ...', got {text!r}")
    try:
        return Witness(int(head), tuple(int(t) for t in tail.split(",")))
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-integer in witness {text!r}") from None


def _search_cfg(args) -> SearchConfig:
    return SearchConfig(
        coeff_bound=args.bound,
        max_candidates=args.max_candidates,
        dedupe=getattr(args, "dedupe", False),
        limit=getattr(args, "limit", None),
        jobs=args.jobs,
    )


def _bounds(cfg: SearchConfig, q: int) -> dict[str, Any]:
    return {
        "coeff_bound": cfg.coeff_bound,
        "max_candidates": cfg.max_candidates,
        "inspected": candidate_count(q, cfg),
    }


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands; each returns an exit code and fills the report
# ---------------------------------------------------------------------------

def cmd_norm(args, rep: RunReport) -> int:
    x = parse(args.x, args.q)
    value = norm(x)
    print(value)
    rep.payload = {"x": str(x), "norm": str(value)}
    return EXIT_OK


def cmd_solve_norm(args, rep: RunReport) -> int:
    cfg = _search_cfg(args)
    sols = solve_norm_equation(args.q, args.target, cfg)
    for x in sols:
        print(x)
    rep.payload = {"solutions": [str(x) for x in sols]}
    rep.search_bounds = _bounds(cfg, args.q)
    if not sols:
        rep.messages.append("no solution inside the search box")
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _witness_for(args, spec: GroupSpec, rep: RunReport) -> Witness | None:
    if args.witness is not None:
        return args.witness
    cfg = _search_cfg(args)
    rep.search_bounds = _bounds(cfg, spec.n)
    return find_witness(spec, cfg)


def cmd_certify(args, rep: RunReport) -> int:
    spec = GroupSpec(args.m, args.n, args.r)
    w = _witness_for(args, spec, rep)
    if w is None:
        print(f"inconclusive: no witness with |coeff| <= {args.bound}", file=sys.stderr)
        rep.messages.append("witness search exhausted")
        return EXIT_INCONCLUSIVE
    cert = certify(run_reduction(spec, w), w, spec)
    data = cert.to_dict()
    if args.out:
        _write(args.out, json.dumps(data, indent=2) + "\n")
    print(f"{cert.verdict.value} m={spec.m} n={spec.n} r={spec.r} m'={spec.mprime} "
          f"x={w.element()} a1={w.a1}")
    rep.payload = data
    return EXIT_OK if cert.verdict is Verdict.RATIONAL else EXIT_INCONCLUSIVE


def cmd_verify(args, rep: RunReport) -> int:
    with open(args.certificate) as fh:
        cert = certificate_from_dict(json.load(fh))
    verdict, problems = verify_certificate(cert)
    print(verdict.value)
    for p in problems:
        print(f"  {p}", file=sys.stderr)
    rep.payload = {"verdict": verdict.value, "problems": problems}
    if verdict is Verdict.INVALID:
        return EXIT_ERROR
    return EXIT_OK if verdict is Verdict.RATIONAL else EXIT_INCONCLUSIVE


def cmd_family(args, rep: RunReport) -> int:
    spec, w = prime_power_family(args.q, args.alpha, args.k)
    cert = certify(run_reduction(spec, w), w, spec)
    print(f"{cert.verdict.value} m={spec.m} n={spec.n} r={spec.r} m'={spec.mprime} "
          f"x={w.element()} a1={w.a1}")
    if args.out:
        _write(args.out, cert.to_json(indent=2) + "\n")
    rep.payload = cert.to_dict()
    return EXIT_OK if cert.verdict is Verdict.RATIONAL else EXIT_ERROR


def cmd_examples(args, rep: RunReport) -> int:
    triples = select_triples(args.q, args.use_errata)
    if not triples:
        print(f"warning: no published triple has q={args.q}", file=sys.stderr)
        rep.messages.append("empty selection")
        _write(args.csv, write_csv([]))
        rep.payload = {"records": [], "failures": []}
        return EXIT_OK
    try:
        records = reproduce_examples(triples=triples, jobs=args.jobs)
        failures = []
    except ReproductionError as exc:
        records, failures = exc.records, exc.failures
    _write(args.csv, write_csv(records))
    for q, p, x, why in failures:
        print(f"FAILED (q={q}, p={p}, x={x}): {why}", file=sys.stderr)
    ok = len(triples) - len(failures)
    print(f"{ok}/{len(triples)} Rational", file=sys.stderr)
    rep.payload = {
        "records": [r.csv_row() for r in records],
        "failures": [list(map(str, f)) for f in failures],
    }
    return EXIT_ERROR if failures else EXIT_OK


def cmd_fuzz(args, rep: RunReport) -> int:
    names = list(IDENTITIES) if args.id == "all" else [args.id]
    seed = default_seed() if args.seed is None else args.seed
    code = EXIT_OK
    reports = []
    for name in names:
        r = run_identity(name, trials=args.trials, seed=seed, dims=args.dims, jobs=args.jobs)
        if r.trials == 0:
            print(f"warning: {name}: zero trials, nothing checked", file=sys.stderr)
        status = "pass" if r.ok else "FAIL"
        print(f"{name}: {r.passed}/{r.trials} {status} (seed {seed}, dims {r.dims[0]}..{r.dims[1]})")
        for f in r.failures:
            print(json.dumps(f), file=sys.stderr)
        if not r.ok:
            code = EXIT_ERROR
        reports.append(r.to_dict())
    rep.payload = reports
    return code


def cmd_reduce(args, rep: RunReport) -> int:
    spec = GroupSpec(args.m, args.n, args.r)
    w = _witness_for(args, spec, rep)
    if w is None:
        print(f"inconclusive: no witness with |coeff| <= {args.bound}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    trace = run_reduction(spec, w)
    data = {"spec": spec.to_dict(), "witness": w.to_dict(), "trace": trace_to_dict(trace)}
    _write(args.out, json.dumps(data, indent=2) + "\n")
    rep.payload = data
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noether", description="Integral certificates for C_m x| C_n.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--report", metavar="FILE", help="write a JSON run report")
    p.add_argument("--timing", action="store_true", help="record wall time in the report")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def search_flags(sp, bound_default=2):
        sp.add_argument("--bound", type=int, default=bound_default, help="coefficient box half-width")
        sp.add_argument("--max-candidates", type=int, default=10**6)
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("norm", help="norm of an element of Z[zeta_q]")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--x", required=True, help='element such as "1 + z + z^4"')
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("solve-norm", help="search for elements of given norm")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("--dedupe", action="store_true", help="one element per {+-zeta^j sigma_k(x)} class")
    sp.add_argument("--limit", type=int, help="stop after this many solutions")
    search_flags(sp)
    sp.set_defaults(func=cmd_solve_norm)

    for name, func, helptext in (
        ("certify", cmd_certify, "find a witness and certify a spec"),
        ("reduce", cmd_reduce, "dump the full reduction trace as JSON"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--m", type=int, required=True)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--r", type=int, required=True)
        sp.add_argument("--witness", type=parse_witness, help="'a1; alpha_0, ..., alpha_{n-2}' (skips the search)")
        sp.add_argument("--out", help="output file (default: stdout for reduce, none for certify)")
        search_flags(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("verify", help="re-check a certificate file")
    sp.add_argument("certificate")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("family", help="certify m = alpha q^k, r = alpha q^(k-1) + 1")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--alpha", type=int, default=1)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_family)

    sp = sub.add_parser("examples", help="reproduce the published (q, p, x) triples")
    sp.add_argument("--q", type=int, help="only rows with this q")
    sp.add_argument("--use-errata", action="store_true", help="substitute corrected elements for known misprints")
    sp.add_argument("--csv", help="CSV output file (default stdout)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_examples)

    sp = sub.add_parser("fuzz", help="randomized exact identity checks")
    sp.add_argument("--id", required=True, choices=list(IDENTITIES) + ["all"])
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int, help="default from NOETHER_SEED or a fixed constant")
    sp.add_argument("--dims", type=_dims, help="LO..HI")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_fuzz)
    return p


def _inputs(args) -> dict[str, Any]:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "report", "timing"):
            continue
        if isinstance(v, Witness):
            v = v.to_dict()
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    rep = RunReport(command=["noether"] + argv, inputs=_inputs(args))
    start = time.perf_counter()
    try:
        code = args.func(args, rep)
    except NoetherError as exc:
        print(f"error: {exc}", file=sys.stderr)
        rep.messages.append(str(exc))
        code = EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        rep.messages.append(str(exc))
        code = EXIT_ERROR
    rep.outcome = OUTCOMES[code]
    if args.timing:
        rep.wall_time = round(time.perf_counter() - start, 6)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(rep.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
