"""Command-line front end: ``spintomo <command> ...``.

Exit codes: 0 success, 2 usage or malformed input, 3 infeasible design,
4 inconsistent inputs.  Every command that writes ``--out`` also writes
``<out>.manifest.json`` recording argv, resolved config and file digests;
``spintomo replay <manifest>`` reruns it and checks the digests.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .formats import (
    FormatError,
    axes_from_json,
    axes_to_json,
    density_from_json,
    density_to_json,
    dumps,
    encode_float,
    read_json,
    record_from_json,
    record_to_json,
    sha256_of,
    write_csv,
    write_json,
)
from .measurement import AxisSet, error_scales
from .optimize import (
    SearchConfig,
    beta_sweep,
    fit_theta_opt,
    newton_young_axes,
    optimize_axes,
    random_axes,
    random_search,
    theta_scan,
)
from .polarization import QuditDim
from .reconstruct import (
    DensityMatrix,
    estimate_polarization,
    exact_error,
    mle_project,
    random_density_matrix,
    reconstruct_state,
    simulate_measurements,
)

log = logging.getLogger("spintomo")

EXIT_USAGE, EXIT_INFEASIBLE, EXIT_INCONSISTENT = 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- flag parsing --------------------------------------------------------


def angle(text: str) -> float:
    """Radians, or degrees with a ``deg`` suffix."""
    text = text.strip()
    try:
        if text.endswith("deg"):
            return math.radians(float(text[:-3]))
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def dim_range(text: str) -> list[int]:
    """``4`` or an inclusive range ``3..10``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
            dims = list(range(lo, hi + 1))
        else:
            dims = [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a dimension or range: {text!r}") from None
    if not dims or min(dims) < 2:
        raise argparse.ArgumentTypeError("dimensions must be at least 2")
    return dims


def dimension(text: str) -> int:
    dims = dim_range(text)
    if len(dims) != 1:
        raise argparse.ArgumentTypeError("a single dimension is required here")
    return dims[0]


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def nonnegative_int(text: str) -> int:
    value = int(text) if text.lstrip("-").isdigit() else None
    if value is None or value < 0:
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {text!r}")
    return value


# -- file helpers --------------------------------------------------------


def _load(path, parse, what):
    try:
        return parse(read_json(path))
    except FileNotFoundError:
        raise CliError(EXIT_USAGE, f"{what} file not found: {path}") from None
    except (FormatError, ValueError) as exc:
        raise CliError(EXIT_USAGE, f"{path}: {exc}") from None


def _check_dim(expected, actual, what):
    if expected is not None and expected != actual:
        raise CliError(EXIT_INCONSISTENT, f"{what} has d={actual} but d={expected} was requested")


def _design(axes: AxisSet):
    design = error_scales(axes)
    if not design.feasible:
        bad = [b.ell for b in design.blocks if not b.full_rank]
        raise CliError(EXIT_INFEASIBLE, f"axis set is infeasible: blocks {bad} are rank deficient")
    return design


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.6g}"


def _summary(axes: AxisSet) -> str:
    design = error_scales(axes)
    return (
        f"d={axes.dim.d} r={len(axes)} feasible={str(design.feasible).lower()} "
        f"S_V={_fmt(design.classical_scale)} eps_V={_fmt(design.quantum_scale)}"
    )


def _config(args) -> dict:
    skip = {"func", "argv", "command_name", "verbose"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _write_manifest(args, inputs, outputs):
    manifest = {
        "command": args.command_name,
        "argv": args.argv,
        "config": _config(args),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "inputs": {str(p): sha256_of(p) for p in inputs},
        "outputs": {str(p): sha256_of(p) for p in outputs},
    }
    write_json(_manifest_path(outputs[0]), manifest)


def _manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def _emit(args, obj):
    text = dumps(obj)
    sys.stdout.write(text)
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
        _write_manifest(args, _inputs(args), [args.out])


def _inputs(args):
    return [Path(getattr(args, k)) for k in ("axes", "state", "record") if getattr(args, k, None)]


# -- commands ------------------------------------------------------------


def cmd_axes(args):
    d = args.dim
    if args.kind == "newton-young":
        if args.theta is None:
            raise CliError(EXIT_USAGE, "newton-young needs --theta")
        axes = newton_young_axes(d, args.theta)
    else:
        if args.count is None and not (args.kind == "optimize" and args.axes):
            raise CliError(EXIT_USAGE, f"axes {args.kind} needs --count")
        if args.require_feasible and args.count is not None and args.count < 2 * d - 1:
            raise CliError(
                EXIT_INFEASIBLE,
                f"{args.count} axes cannot be informationally complete for d={d} (need {2 * d - 1})",
            )
        if args.kind == "random":
            axes = random_axes(d, args.count, args.seed)
        elif args.axes:
            axes = _load(args.axes, axes_from_json, "axes")
            _check_dim(d, axes.dim.d, args.axes)
            config = SearchConfig(d, len(axes), 1, args.iters, args.seed)
            axes = optimize_axes(axes, config)
        else:
            config = SearchConfig(d, args.count, args.candidates, args.iters, args.seed, args.time_budget)
            axes, _ = random_search(config)
    if args.require_feasible and not error_scales(axes).feasible:
        raise CliError(EXIT_INFEASIBLE, "generated axis set is infeasible")
    write_json(args.out, axes_to_json(axes))
    _write_manifest(args, _inputs(args) if args.kind == "optimize" else [], [args.out])
    print(_summary(axes))


def cmd_scales(args):
    axes = _load(args.axes, axes_from_json, "axes")
    _check_dim(args.dim, axes.dim.d, args.axes)
    design = error_scales(axes)
    report = {
        "dim": axes.dim.d,
        "axis_count": len(axes),
        "feasible": design.feasible,
        "S_V": encode_float(design.classical_scale),
        "eps_V": encode_float(design.quantum_scale),
        "per_ell": [
            {"ell": b.ell, "S": encode_float(math.sqrt(b.s_squared)), "Gamma": float(design.gamma.gamma[b.ell])}
            for b in design.blocks
        ],
    }
    _emit(args, report)


def cmd_state(args):
    dim = QuditDim(args.dim)
    if args.kind == "mixed":
        rho = DensityMatrix.maximally_mixed(dim)
    elif args.kind == "up":
        psi = np.zeros(dim.d)
        psi[0] = 1
        rho = DensityMatrix.pure(psi)
    else:
        rho = random_density_matrix(dim, np.random.default_rng(args.seed), args.rank)
    write_json(args.out, density_to_json(rho))
    _write_manifest(args, [], [args.out])


def _load_state(path, dim=None):
    rho = _load(path, density_from_json, "state")
    _check_dim(dim, rho.dim.d, path)
    return rho


def cmd_simulate(args):
    axes = _load(args.axes, axes_from_json, "axes")
    _check_dim(args.dim, axes.dim.d, args.axes)
    rho = _load_state(args.state)
    _check_dim(axes.dim.d, rho.dim.d, args.state)
    record = simulate_measurements(rho, axes, args.shots, args.seed)
    write_json(args.out, record_to_json(record))
    _write_manifest(args, _inputs(args), [args.out])
    print(f"simulated {args.shots} shots on each of {len(axes)} axes (d={axes.dim.d})")


def _reconstruct(record):
    design = _design(record.axis_set)
    raw = reconstruct_state(design, estimate_polarization(record))
    return design, raw, mle_project(raw)


def cmd_reconstruct(args):
    record = _load(args.record, record_from_json, "record")
    _check_dim(args.dim, record.axis_set.dim.d, args.record)
    _, raw, mle = _reconstruct(record)
    distance = float(np.linalg.norm(raw.matrix - mle.matrix))
    write_json(
        args.out,
        {
            "dim": record.axis_set.dim.d,
            "shots": record.shots,
            "raw": density_to_json(raw),
            "mle": density_to_json(mle),
            "distance": distance,
        },
    )
    _write_manifest(args, _inputs(args), [args.out])
    print(f"min eigenvalue of raw estimate {_fmt(float(raw.eigenvalues().min()))}; distance to MLE {_fmt(distance)}")


def cmd_error(args):
    if not (args.state or args.record):
        raise CliError(EXIT_USAGE, "error needs --state or --record")
    report = {}
    if args.record:
        record = _load(args.record, record_from_json, "record")
        _check_dim(args.dim, record.axis_set.dim.d, args.record)
        axes = record.axis_set
        if args.axes:
            other = _load(args.axes, axes_from_json, "axes")
            if len(other) != len(axes) or not np.array_equal(other.angles(), axes.angles()):
                raise CliError(EXIT_INCONSISTENT, "--axes does not match the axes in --record")
        if args.shots is not None and args.shots != record.shots:
            raise CliError(EXIT_INCONSISTENT, f"--shots {args.shots} disagrees with record ({record.shots})")
        n = record.shots
        design, raw, mle = _reconstruct(record)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report["E_raw"] = exact_error(design, raw, n)
        report["E_mle"] = exact_error(design, mle, n)
    else:
        if not args.axes or args.shots is None:
            raise CliError(EXIT_USAGE, "error with --state needs --axes and --shots")
        axes = _load(args.axes, axes_from_json, "axes")
        _check_dim(args.dim, axes.dim.d, args.axes)
        n = args.shots
        design = _design(axes)
    if args.state:
        rho = _load_state(args.state)
        _check_dim(axes.dim.d, rho.dim.d, args.state)
        report["E"] = exact_error(design, rho, n)
        if args.record:
            report["actual_raw"] = float(np.linalg.norm(raw.matrix - rho.matrix))
    report = {
        "dim": axes.dim.d,
        "shots": n,
        "eps_V": design.quantum_scale,
        "bound": design.quantum_scale / math.sqrt(n),
        **report,
    }
    _emit(args, report)


def cmd_sweep(args):
    out = Path(args.out)
    stem = out.with_suffix("")
    outputs = [out]
    if args.kind == "beta":
        rows, summary = [], []
        for d in args.dim:
            pmax = 2 * d if args.pmax is None else args.pmax
            config = SearchConfig(d, 2 * d - 1, args.candidates, args.iters, args.seed, args.time_budget)
            result = beta_sweep(d, pmax, config)
            for p, beta, axes, count in zip(result.p_values, result.beta_tilde, result.best_axes, result.evaluated):
                axes_path = stem.with_name(f"{stem.name}.d{d}.p{p}.axes.json")
                write_json(axes_path, axes_to_json(axes))
                outputs.append(axes_path)
                rows.append((d, p, len(axes), float(beta), axes_path.name))
                summary.append(
                    {"dim": d, "p": p, "axis_count": len(axes), "beta_tilde": encode_float(beta),
                     "candidates_evaluated": count, "axes_file": axes_path.name}
                )
        write_csv(out, ["dim", "p", "axis_count", "beta_tilde", "axes_file"], rows)
        companion = {"kind": "beta", "seed": args.seed, "candidates": args.candidates, "rows": summary}
    else:
        grid = np.linspace(np.pi / 2 / args.grid, np.pi / 2, args.grid)
        rows, opts = [], []
        for d in args.dim:
            scan = theta_scan(d, grid)
            rows.extend((d, float(th), float(e)) for th, e in zip(scan.theta_grid, scan.eps_theta))
            opts.append({"dim": d, "theta_opt": scan.theta_opt, "eps_opt": scan.eps_opt})
        write_csv(out, ["dim", "theta", "eps_theta"], rows)
        companion = {"kind": "theta", "grid_points": args.grid, "optima": opts}
        if args.fit:
            if len(args.dim) < 1:
                raise CliError(EXIT_USAGE, "--fit needs at least one dimension")
            x = fit_theta_opt([o["dim"] for o in opts], [o["theta_opt"] for o in opts])
            companion["fit_x"] = x
            print(f"theta_opt = (pi/2)(1 - 1/(x d)) fit: x = {x:.4f}")
    json_path = stem.with_name(stem.name + ".json")
    write_json(json_path, companion)
    outputs.insert(1, json_path)
    _write_manifest(args, [], outputs)
    print(f"wrote {len(rows)} rows to {out}")


def cmd_replay(args):
    manifest = _load(args.manifest, lambda x: x, "manifest")
    try:
        argv, expected = manifest["argv"], manifest["outputs"]
    except (KeyError, TypeError):
        raise CliError(EXIT_USAGE, f"{args.manifest}: not a run manifest") from None
    code = main(argv)
    if code:
        return code
    bad = [p for p, digest in expected.items() if not Path(p).exists() or sha256_of(p) != digest]
    if bad:
        raise CliError(EXIT_INCONSISTENT, f"replay produced different outputs: {', '.join(bad)}")
    print(f"replayed {manifest['command']}: {len(expected)} outputs identical")


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spintomo", description="Spin-qudit tomography design and analysis")
    parser.add_argument("--version", action="version", version=f"spintomo {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("axes", help="generate an axis set")
    p.add_argument("kind", choices=["random", "optimize", "newton-young"])
    p.add_argument("--dim", type=dimension, required=True)
    p.add_argument("--count", type=positive_int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=angle, help="polar angle; radians or e.g. 80deg")
    p.add_argument("--axes", type=Path, help="starting axes for optimize")
    p.add_argument("--candidates", type=positive_int, default=1000)
    p.add_argument("--iters", type=nonnegative_int, default=0, help="simplex iterations (0: 200 r)")
    p.add_argument("--time-budget", type=float)
    p.add_argument("--require-feasible", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_axes)

    p = sub.add_parser("scales", help="error-scale report for an axis set")
    p.add_argument("--axes", type=Path, required=True)
    p.add_argument("--dim", type=dimension)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_scales)

    p = sub.add_parser("state", help="write a test state")
    p.add_argument("kind", choices=["mixed", "up", "random"])
    p.add_argument("--dim", type=dimension, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=positive_int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("simulate", help="simulate spin-projection counts")
    p.add_argument("--axes", type=Path, required=True)
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--shots", type=positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=dimension)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="linear reconstruction plus MLE projection")
    p.add_argument("--record", type=Path, required=True)
    p.add_argument("--dim", type=dimension)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("error", help="shot-noise error and its a priori bound")
    p.add_argument("--axes", type=Path)
    p.add_argument("--state", type=Path)
    p.add_argument("--record", type=Path)
    p.add_argument("--shots", type=positive_int)
    p.add_argument("--dim", type=dimension)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_error)

    p = sub.add_parser("sweep", help="beta(p) or theta sweeps as CSV + JSON")
    p.add_argument("kind", choices=["beta", "theta"])
    p.add_argument("--dim", type=dim_range, required=True, help="d or a range like 3..10")
    p.add_argument("--pmax", type=nonnegative_int, help="largest number of extra axes (default 2d)")
    p.add_argument("--candidates", type=positive_int, default=1000)
    p.add_argument("--iters", type=nonnegative_int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-budget", type=float)
    p.add_argument("--grid", type=positive_int, default=400, help="theta grid points on (0, pi/2]")
    p.add_argument("--fit", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="rerun a manifest and verify its output digests")
    p.add_argument("manifest", type=Path)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.argv = argv
    args.command_name = args.command + (f" {args.kind}" if hasattr(args, "kind") else "")
    try:
        return int(args.func(args) or 0)
    except CliError as exc:
        print(f"spintomo: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"spintomo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
