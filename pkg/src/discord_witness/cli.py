"""Command-line front end.

Every subcommand reads exactly one input (``--state FILE`` or ``--gen SPEC``)
and writes a JSON report (or CSV for ``sweep``) to stdout or ``--out``.

Generator specs: ``bell``, ``mixed:DAxDB``, ``werner:P``,
``random:DAxDB:SEED[:RANK]``, ``cq:DAxDB:SEED``.

Sweep CSV schema (version 1): index, family, param, dA, dB, witness_R,
witness_perm, q, discord_lb, geo_discord_lb, rank_R, nonpositive_ok, routes_ok.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import circuit, dqc1, oracle, qnum, serialization, witness
from .errors import (
    DidNotConverge,
    ParseError,
    RegimeViolation,
    RouteDisagreement,
    SizeOverflow,
    ValidationError,
    WitnessError,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_ROUTE = 5
EXIT_CONVERGENCE = 6

ROUTE_GAP = 1e-6
CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "index", "family", "param", "dA", "dB", "witness_R", "witness_perm", "q",
    "discord_lb", "geo_discord_lb", "rank_R", "nonpositive_ok", "routes_ok",
]
THREADS_ENV = "DISCORD_WITNESS_THREADS"


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _dims(text: str):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise ParseError(f"dimensions must look like 2x3, got {text!r}") from exc


def generate(spec: str) -> qnum.BipartiteState:
    name, *args = spec.split(":")
    try:
        if name == "bell":
            return qnum.bell_state()
        if name == "mixed":
            return qnum.maximally_mixed(*_dims(args[0]))
        if name == "werner":
            return qnum.werner_state(float(args[0]))
        if name == "random":
            dA, dB = _dims(args[0])
            rank = int(args[2]) if len(args) > 2 else None
            return qnum.random_state(dA, dB, rank, seed=int(args[1]))
        if name == "cq":
            dA, dB = _dims(args[0])
            return oracle.random_classical_quantum_state(dA, dB, seed=int(args[1]))
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"bad generator spec {spec!r}: {exc}") from exc
    raise ParseError(f"unknown generator {name!r}")


def _tolerances(args) -> qnum.Tolerances:
    return qnum.DEFAULT_TOL.override(herm=args.tol_herm, trace=args.tol_trace, psd=args.tol_psd)


def load_input(args):
    if bool(args.state) == bool(args.gen):
        raise ParseError("give exactly one of --state or --gen")
    tol = _tolerances(args)
    if args.state:
        return serialization.read_state(args.state, tol), {"path": args.state}
    return generate(args.gen), {"generator": args.gen}


def _input_block(state, source) -> dict:
    return {"fingerprint": serialization.fingerprint(state), "dims": [state.dA, state.dB], **source}


def _report(command: str, body: dict, timings: dict | None) -> dict:
    out = {"toolkit": "discord-witness", "version": _version(), "command": command, **body}
    if timings is not None:
        out["timings"] = timings
    return out


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.values = {}

    def run(self, key, fn, *a, **kw):
        t0 = time.perf_counter()
        out = fn(*a, **kw)
        self.values[key] = time.perf_counter() - t0
        return out

    def result(self):
        return self.values if self.enabled else None


# ---------------------------------------------------------------------------
# subcommands


ROUTES = [r.value for r in witness.Route]


def cmd_witness(args) -> dict:
    state, source = load_input(args)
    timer = _Timer(args.timings)
    routes = ROUTES if args.route == "all" else [args.route]
    values = {}
    for r in routes:
        try:
            values[r] = timer.run(r, witness.evaluate_witness, state, r)
        except SizeOverflow as exc:
            if args.route != "all":
                raise
            values[r] = None
            print(f"route {r} skipped: {exc}", file=sys.stderr)
    present = [v for v in values.values() if v is not None]
    gap = float(max(present) - min(present)) if len(present) > 1 else 0.0
    report = witness.witness_report(state, routes[0])
    body = {
        "input": _input_block(state, source),
        "witness": values,
        "maxRouteDiscrepancy": gap,
        "report": report,
    }
    if gap > ROUTE_GAP:
        raise RouteDisagreement(f"routes disagree by {gap:.3e}")
    return _report("witness", body, timer.result())


def _optimizer_config(args) -> oracle.OptimizerConfig:
    grid = None
    if getattr(args, "grid", None):
        grid = tuple(int(x) for x in args.grid.split("x"))
    return oracle.OptimizerConfig(restarts=args.restarts, seed=args.seed, grid=grid, refine=grid is not None)


def cmd_bounds(args) -> dict:
    state, source = load_input(args)
    timer = _Timer(args.timings)
    w = witness.witness_via_R(state)
    body = {
        "input": _input_block(state, source),
        "route": witness.Route.R_MATRIX.value,
        "entropyA": qnum.von_neumann_entropy(qnum.partial_trace(state, "A")),
        "entropy": qnum.von_neumann_entropy(state.rho),
        "witness": w,
        "q": witness.q_value(state, w),
        "discordLowerBound": witness.discord_lower_bound(state, w),
        "geoDiscordLowerBound": witness.geometric_discord_lower_bound(state, w),
        "boundMeasurementClass": "von-neumann",
    }
    if args.oracle:
        cfg = _optimizer_config(args)
        d = timer.run("discord_vn", oracle.discord_vn, state, cfg)
        g = timer.run("geometric_discord", oracle.geometric_discord, state, cfg)
        body["oracle"] = {
            "discordVN": d,
            "geometricDiscord": g,
            "discordGap": d.value - body["discordLowerBound"],
            "geoDiscordGap": g.value - body["geoDiscordLowerBound"],
        }
    return _report("bounds", body, timer.result())


def cmd_oracle(args) -> dict:
    state, source = load_input(args)
    timer = _Timer(args.timings)
    cfg = _optimizer_config(args)
    body = {
        "input": _input_block(state, source),
        "discordVN": timer.run("discord_vn", oracle.discord_vn, state, cfg),
        "geometricDiscord": timer.run("geometric_discord", oracle.geometric_discord, state, cfg),
    }
    return _report("oracle", body, timer.result())


def cmd_dqc1(args) -> dict:
    if args.unitary_file:
        with open(args.unitary_file, encoding="utf-8") as fh:
            doc = serialization.loads_json(fh.read())
        u = serialization.matrix_from_json(doc["matrix"] if isinstance(doc, dict) else doc)
    else:
        u = dqc1.named_unitary(args.unitary, args.n)
    cfg = dqc1.Dqc1Config(args.n, args.alpha, u)
    w = dqc1.dqc1_witness_closed_form(cfg)
    phi, residual = dqc1.square_phase_fit(cfg)
    tau, (sx, sy) = dqc1.normalized_trace(cfg)
    body = {
        "n": args.n,
        "alpha": args.alpha,
        "unitary": args.unitary_file or args.unitary,
        "witnessClosedForm": w,
        "normalizedTrace": {"re": tau.real, "im": tau.imag},
        "controlSigmaX": sx,
        "controlSigmaY": sy,
        "squarePhase": phi,
        "squareResidual": residual,
        "flags": ["U^2 proportional to identity"] if residual <= 1e-10 else [],
        "warnings": [],
    }
    if args.n <= 2:
        rho = dqc1.dqc1_output_state(cfg)
        body["witnessPermutation"] = witness.witness_via_permutation(rho)
        body["witnessRMatrix"] = witness.witness_via_R(rho)
    try:
        body["discordBound"] = dqc1.dqc1_discord_bound(cfg, w)
    except RegimeViolation as exc:
        body["discordBound"] = None
        body["warnings"].append(f"RegimeViolation: {exc}")
    return _report("dqc1", body, None)


def cmd_circuit(args) -> dict:
    state, source = load_input(args)
    body = {"input": _input_block(state, source), "mode": args.mode}
    if args.mode == "exact":
        e = circuit.exact_ancilla_expectations(state)
        body.update(expectations=e, witness=circuit.reconstruct_witness(e, state.dA), route="circuit")
    elif args.mode == "sampled":
        rec = circuit.sample_circuit(state, args.shots, args.seed)
        body.update(
            expectations=rec.means,
            standardErrors=rec.standard_errors,
            witness=rec.witness,
            witnessStandardError=rec.witness_standard_error,
            shots=rec.shots,
            seed=rec.seed,
            route="circuit-sampled",
        )
    else:
        ta, tb, w = circuit.two_setting_measurement(state)
        body.update(outcomeTables=[ta, tb], witness=w, route="two-setting")
    return _report("circuit", body, None)


def sweep_states(family: str, count: int, dA: int, dB: int, seed: int):
    """Yield (param, state) for a sweep family."""
    if family == "werner":
        for p in np.linspace(0, 1, count):
            yield float(p), qnum.werner_state(float(p))
    elif family == "random":
        seeds = np.random.SeedSequence(seed).spawn(count)
        for i, ss in enumerate(seeds):
            yield i, qnum.random_state(dA, dB, seed=np.random.default_rng(ss))
    elif family == "cq":
        seeds = np.random.SeedSequence(seed).spawn(count)
        for i, ss in enumerate(seeds):
            yield i, oracle.random_classical_quantum_state(dA, dB, seed=np.random.default_rng(ss))
    else:
        raise ParseError(f"unknown sweep family {family!r}")


def _sweep_row(index, family, param, state) -> dict:
    w_r = witness.witness_via_R(state)
    try:
        w_p = witness.witness_via_permutation(state)
    except SizeOverflow:
        w_p = None
    return {
        "index": index,
        "family": family,
        "param": param,
        "dA": state.dA,
        "dB": state.dB,
        "witness_R": w_r,
        "witness_perm": w_p,
        "q": witness.q_value(state, w_r),
        "discord_lb": witness.discord_lower_bound(state, w_r),
        "geo_discord_lb": witness.geometric_discord_lower_bound(state, w_r),
        "rank_R": witness.correlation_matrix(state).rank(),
        "nonpositive_ok": w_r <= witness.WITNESS_TOL,
        "routes_ok": w_p is None or abs(w_r - w_p) <= 1e-9,
    }


def run_sweep(family: str, count: int, dA: int = 2, dB: int = 2, seed: int = 0, threads: int | None = None):
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    items = list(sweep_states(family, count, dA, dB, seed))
    rows = []
    errors = []

    def work(i_item):
        i, (param, state) = i_item
        try:
            return _sweep_row(i, family, param, state)
        except WitnessError as exc:
            return {"index": i, "error": f"{type(exc).__name__}: {exc}"}

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for row in pool.map(work, enumerate(items)):
            (errors if "error" in row else rows).append(row)
    summary = {
        "count": count,
        "evaluated": len(rows),
        "failures": len(errors),
        "nonpositivityViolations": sum(not r["nonpositive_ok"] for r in rows),
        "routeViolations": sum(not r["routes_ok"] for r in rows),
        "maxAbsWitness": max((abs(r["witness_R"]) for r in rows), default=0.0),
    }
    return rows, errors, summary


def _csv_value(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return "" if v is None else str(v)


def sweep_csv(rows, summary) -> str:
    buf = io.StringIO()
    buf.write(f"# discord-witness sweep schema v{CSV_SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([_csv_value(r[c]) for c in CSV_COLUMNS])
    buf.write("# summary " + " ".join(f"{k}={_csv_value(v)}" for k, v in summary.items()) + "\n")
    return buf.getvalue()


def cmd_sweep(args):
    rows, errors, summary = run_sweep(args.family, args.count, args.dA, args.dB, args.seed, args.threads)
    if args.format == "csv":
        return sweep_csv(rows, summary)
    return _report("sweep", {"rows": rows, "errors": errors, "summary": summary}, None)


def cmd_gen(args):
    state, _ = load_input(args)
    return serialization.state_to_json(state)


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser, needs_input: bool = True):
    if needs_input:
        p.add_argument("--state", help="state file (JSON)")
        p.add_argument("--gen", help="generator spec, e.g. random:2x2:7")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-herm", type=float)
    p.add_argument("--tol-trace", type=float)
    p.add_argument("--tol-psd", type=float)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identity)")


def _oracle_flags(p):
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--grid", help="Bloch grid NTHETAxNPHI for a qubit A (refined locally)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discord-witness", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("witness", help="evaluate Tr(W rho^x4) by one or all routes")
    _common(p)
    p.add_argument("--route", choices=ROUTES + ["all"], default="R-matrix")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("bounds", help="entropic and geometric discord lower bounds")
    _common(p)
    p.add_argument("--oracle", action="store_true", help="also run the brute-force oracles")
    _oracle_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("oracle", help="brute-force discord and geometric discord")
    _common(p)
    _oracle_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("dqc1", help="DQC1 output state witness and bound")
    _common(p, needs_input=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--unitary", default="identity")
    p.add_argument("--unitary-file")
    p.set_defaults(func=cmd_dqc1)

    p = sub.add_parser("circuit", help="simulate the ancilla circuit or the two-setting scheme")
    _common(p)
    p.add_argument("--mode", choices=["exact", "sampled", "two-setting"], default="exact")
    p.add_argument("--shots", type=int, default=10000)
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("sweep", help="property campaign over a state family")
    _common(p, needs_input=False)
    p.add_argument("--family", choices=["werner", "random", "cq"], required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--dA", type=int, default=2)
    p.add_argument("--dB", type=int, default=2)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write a generated state file")
    _common(p)
    p.set_defaults(func=cmd_gen)
    return parser


def _emit(result, out_path):
    text = result if isinstance(result, str) else serialization.dumps(result) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _emit(args.func(args), args.out)
    except ParseError as exc:
        print(f"ParseError: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RouteDisagreement as exc:
        print(f"RouteDisagreement: {exc}", file=sys.stderr)
        return EXIT_ROUTE
    except DidNotConverge as exc:
        print(f"DidNotConverge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (WitnessError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
