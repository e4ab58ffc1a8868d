"""Command-line entry point: table and data emitters for every module.

Exit codes: 0 success, 2 invalid input, 3 numerical guard tripped, 64 usage.
CSV outputs are written under --out together with a sibling manifest.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .errors import NumericalGuardError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


######################################################################
# Argument helpers
######################################################################


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated indices")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _db_range(text: str) -> list[float]:
    parts = text.split(":")
    try:
        lo, hi, step = (float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO:HI:STEP") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("need STEP > 0 and HI >= LO")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("GRIDFORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"GRIDFORGE_THREADS must be an integer, got {env!r}") from None
    return 1


def _load_code(args):
    from .io import read_lattice
    from .lattice import catalog

    if getattr(args, "lattice", None):
        return read_lattice(args.lattice, args.tol)
    return catalog(args.code)


######################################################################
# Output
######################################################################


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.TimeoutExpired):
        return "unknown"
    return out.stdout.strip() or "unknown"


class Emitter:
    """Writes CSV files with a manifest next to each one."""

    def __init__(self, args, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.out = Path(args.out)

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence], code: str, grid: dict, target: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"{name}.csv"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
        path.write_text(buf.getvalue(), encoding="utf-8", newline="")
        manifest = {
            "command": ["gridforge"] + self.argv,
            "seed": self.args.seed,
            "code": code,
            "grid": grid,
            "target": target,
            "version": __version__,
            "git": _git_describe(),
            "outputs": [str(path)],
        }
        path.with_suffix(".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        print(path)
        return path


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


######################################################################
# Subcommands
######################################################################


def cmd_catalog(args, emit: Emitter) -> int:
    from .io import lattice_to_dict
    from .lattice import CATALOG_NAMES, catalog

    if args.name is None:
        for name in CATALOG_NAMES:
            print(name)
        return EXIT_OK
    params = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        params[key] = float(value)
    lat, frame = catalog(args.name, **params)
    if args.json:
        print(json.dumps(lattice_to_dict(lat, frame), indent=2))
    else:
        print(f"{lat.name}: m={lat.m} d={lat.d}")
        for row in np.asarray(lat.S):
            print("  " + " ".join(f"{x: .6f}" for x in row))
    return EXIT_OK


def cmd_analyze(args, emit: Emitter) -> int:
    from .classical import hessian_rates
    from .gauge import valid_gauges
    from .lattice import packing_report

    lat, frame = _load_code(args)
    rep = packing_report(lat)
    hess = hessian_rates(lat)
    report = {
        "name": lat.name,
        "m": lat.m,
        "d": lat.d,
        "A": np.asarray(lat.A).tolist(),
        "min_stabilizer_length": rep.min_stab_len,
        "min_pauli_length": rep.min_pauli_len,
        "packing_ratio": rep.packing_ratio,
        "max_correctable_radius": rep.max_correctable_radius,
        "hessian_eigenvalues": [float(x) for x in hess.eigenvalues],
        "hessian_note": hess.note,
        "valid_gauges": len(valid_gauges(lat)) if lat.dim <= 8 else None,
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_search(args, emit: Emitter) -> int:
    from .search import FAMILIES

    fn = FAMILIES[args.family]
    rows = []
    for d in range(1, args.dmax + 1):
        sols = fn(d)
        witnesses = " ".join("({},{},{})".format(*s.abc) for s in sols)
        rows.append((d, len(sols), witnesses))
    emit.csv(
        f"search_{args.family}",
        ("d", "count", "witnesses"),
        rows,
        args.family,
        {"dmax": args.dmax},
        "allowed code dimensions of the four-dimensional integral-lattice families",
    )
    return EXIT_OK


def cmd_flowmap(args, emit: Emitter) -> int:
    from .classical import error_map_grid

    lat, frame = _load_code(args)
    i, j = args.plane
    uv, labels = error_map_grid(lat, frame, (i - 1, j - 1), args.res)
    emit.csv(
        f"flowmap_{args.code}_{i}_{j}",
        ("u", "v", "label"),
        [(u, v, lab) for (u, v), lab in zip(uv, labels)],
        lat.name,
        {"plane": [i, j], "resolution": args.res},
        "final logical class of the classical flow over a plane of translation errors",
    )
    return EXIT_OK


def cmd_ancilla_sweep(args, emit: Emitter) -> int:
    from .classical import SmearConfig, ancilla_decay_error_prob, isthmus_waypoints

    lat, frame = _load_code(args)
    gens = [j - 1 for j in args.generators] if args.generators else list(range(lat.dim))
    paths = {j: (isthmus_waypoints(lat, frame, j) if args.zigzag else []) for j in gens}
    jobs = [(eps, j) for eps in args.eps_grid for j in gens]

    def run(job):
        eps, j = job
        smear = SmearConfig(eps, mc_samples=args.samples, seed=args.seed)
        est = ancilla_decay_error_prob(lat, j, smear, paths[j] or None, stream=j)
        return (eps, j + 1, est.estimate, est.stderr, est.estimate / math.sqrt(eps), len(paths[j]))

    rows = _parallel_map(run, jobs, _threads(args))
    emit.csv(
        f"ancilla_sweep_{args.code}",
        ("epsilon", "generator", "probability", "stderr", "ratio_sqrt_eps", "corners"),
        rows,
        lat.name,
        {"eps": args.eps_grid, "generators": [j + 1 for j in gens], "samples": args.samples, "zigzag": args.zigzag},
        "logical error probability caused by an ancilla flip during a controlled translation",
    )
    return EXIT_OK


def cmd_homodyne(args, emit: Emitter) -> int:
    from .homodyne import NoiseModel, run_trials

    lat, frame = _load_code(args)
    if lat.d != 2:
        raise ValidationError("homodyne trials need a qubit code")

    def run(db):
        res = run_trials(lat, NoiseModel.from_db(db, args.noisy_ancilla), args.trials, args.seed)
        return (db, res.p_logical, res.stderr)

    rows = _parallel_map(run, args.db_range, _threads(args))
    emit.csv(
        f"homodyne_{args.code}{'_noisy' if args.noisy_ancilla else ''}",
        ("db", "p", "stderr"),
        rows,
        lat.name,
        {"db": args.db_range, "trials": args.trials, "noisy_ancilla": args.noisy_ancilla},
        "logical error rate of one homodyne correction round versus squeezing",
    )
    return EXIT_OK


def cmd_concat(args, emit: Emitter) -> int:
    from .code_switch import QubitStabilizerCode, concatenate, same_lattice
    from .io import lattice_to_dict, read_stabilizer_code
    from .lattice import catalog

    base, _ = catalog(args.base)
    if args.stabilizers:
        code = read_stabilizer_code(args.stabilizers)
    elif args.repetition:
        n, _, axis = args.repetition.partition(",")
        code = QubitStabilizerCode.repetition(int(n), axis or "Z")
    else:
        raise ValidationError("give --stabilizers FILE or --repetition N,AXIS")
    result = concatenate(base, code)
    out = lattice_to_dict(result.lattice, result.frame)
    out["d"] = result.lattice.d
    if args.compare:
        other, _ = catalog(args.compare)
        out["same_lattice_as"] = {args.compare: bool(same_lattice(result.lattice.S, other.S))}
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_fock(args, emit: Emitter) -> int:
    if args.fock_command == "verify":
        from .verify import run_suite

        results = run_suite(args.suite, seed=args.seed)
        print(json.dumps(results, indent=2))
        return EXIT_OK if all(r["passed"] for r in results) else EXIT_NUMERICAL
    from .classical import SmearConfig, smeared_error_prob
    from .fock import quantum_error_prob

    lat, frame = _load_code(args)
    direction = np.asarray(lat.S)[args.generator - 1]
    dims = tuple(args.truncation) if args.truncation else None

    def run(eta):
        q = quantum_error_prob(lat, frame, eta * direction, args.epsilon, args.rounds, args.trials, args.seed, dims)
        c = smeared_error_prob(lat, eta * direction, SmearConfig(args.epsilon, seed=args.seed))
        return (eta, q.probability, q.stderr, c.estimate, c.stderr)

    rows = _parallel_map(run, args.eta_grid, _threads(args))
    emit.csv(
        f"fock_sweep_{args.code}",
        ("eta", "quantum", "quantum_stderr", "classical", "classical_stderr"),
        rows,
        lat.name,
        {"eta": args.eta_grid, "epsilon": args.epsilon, "rounds": args.rounds, "trials": args.trials, "generator": args.generator},
        "quantum versus classical logical error after a colinear translation error",
    )
    return EXIT_OK


######################################################################
# Parser
######################################################################


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridforge", description="Multimode grid-code toolkit.")
    p.add_argument("--version", action="version", version=f"gridforge {__version__}")
    p.add_argument("--seed", type=_seed, default=0, help="RNG seed (unsigned 64-bit, default 0)")
    p.add_argument("--threads", type=_positive_int, default=None, help="worker threads (default: $GRIDFORGE_THREADS or 1)")
    p.add_argument("--out", default="gridforge_out", help="directory for CSV outputs and manifests")
    p.add_argument("--tol", type=float, default=1e-9, help="integrality tolerance for lattice checks")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def code_args(sp, default="square"):
        sp.add_argument("--code", default=default, help="catalog code name")
        sp.add_argument("--lattice", help="lattice JSON file (overrides --code)")

    c = sub.add_parser("catalog", help="list catalog codes or print one")
    c.add_argument("--name")
    c.add_argument("--json", action="store_true", help="print the lattice JSON record")
    c.add_argument("--param", action="append", metavar="KEY=VALUE", help="catalog parameter (eta, m, a)")
    c.set_defaults(func=cmd_catalog)

    a = sub.add_parser("analyze", help="lengths, packing, Hessian rates and gauge count")
    code_args(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("search", help="allowed dimensions of the tesseract and D4 families")
    s.add_argument("--family", choices=("tesseract", "d4"), required=True)
    s.add_argument("--dmax", type=_positive_int, default=50)
    s.set_defaults(func=cmd_search)

    f = sub.add_parser("flowmap", help="error-map grid of the classical flow")
    code_args(f)
    f.add_argument("--plane", type=_int_pair, default=(1, 2), help="generator indices i,j (1-based)")
    f.add_argument("--res", type=int, default=64)
    f.set_defaults(func=cmd_flowmap)

    w = sub.add_parser("ancilla-sweep", help="ancilla-flip error probability versus epsilon")
    code_args(w)
    w.add_argument("--eps-grid", type=_float_list, default=[0.01, 0.02, 0.044, 0.1])
    w.add_argument("--generators", type=lambda t: [int(x) for x in t.split(",")], help="1-based generator indices")
    w.add_argument("--samples", type=_positive_int, default=20000)
    w.add_argument("--zigzag", action="store_true", help="route translations around logical regions")
    w.set_defaults(func=cmd_ancilla_sweep)

    h = sub.add_parser("homodyne", help="Monte Carlo homodyne correction")
    code_args(h)
    h.add_argument("--db-range", type=_db_range, default=_db_range("10:16:1"), help="LO:HI:STEP in dB, HI inclusive")
    h.add_argument("--trials", type=_positive_int, default=100000)
    h.add_argument("--noisy-ancilla", action="store_true", help="noisy GKP ancillas")
    h.set_defaults(func=cmd_homodyne)

    k = sub.add_parser("concat", help="concatenate a qubit stabilizer code over a single-mode code")
    k.add_argument("--base", default="square")
    k.add_argument("--stabilizers", help="file with one Pauli string per line")
    k.add_argument("--repetition", help="N,AXIS repetition code, e.g. 2,Y")
    k.add_argument("--compare", help="catalog code to test for lattice equality")
    k.set_defaults(func=cmd_concat)

    q = sub.add_parser("fock", help="truncated Fock-space verification and sweeps")
    fsub = q.add_subparsers(dest="fock_command", required=True, parser_class=_Parser)
    v = fsub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=("codewords", "gates", "sbs", "decay"), required=True)
    sw = fsub.add_parser("sweep", help="quantum vs classical error along a generator")
    code_args(sw)
    sw.add_argument("--eta-grid", type=_float_list, default=[0.0, 0.125, 0.25, 0.375, 0.5])
    sw.add_argument("--epsilon", type=float, default=0.1)
    sw.add_argument("--rounds", type=_positive_int, default=20)
    sw.add_argument("--trials", type=_positive_int, default=60)
    sw.add_argument("--generator", type=_positive_int, default=1)
    sw.add_argument("--truncation", type=lambda t: [int(x) for x in t.split(",")], help="Fock levels per mode")
    q.set_defaults(func=cmd_fock)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return int(exc.code or 0)
    try:
        if not math.isfinite(args.tol) or args.tol <= 0:
            raise ValidationError("--tol must be positive")
        _threads(args)
        return args.func(args, Emitter(args, argv))
    except ValidationError as exc:
        print(f"gridforge: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalGuardError as exc:
        print(f"gridforge: numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())
