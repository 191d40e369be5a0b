"""Command-line entry point: ``lacuna <command> [options]``.

Every run writes a manifest (command, parameters, package versions, wall
time, outputs) next to its first output, or to ``--manifest``.  Outputs are
written atomically, and a failing run removes whatever it already wrote.
CSV uses a header row and Python's locale-independent float repr; JSON is
pretty-printed with sorted keys, so reruns with the same options and seed
reproduce the same bytes (the manifest aside, since it records wall time).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

FAMILIES = ("nsw", "carbery", "rational", "rotated", "besicovitch")
CHECKS = ("emptiness", "vanishing", "inclusion-exclusion", "square-function", "overlap")


class CliError(Exception):
    """Invalid parameters or inputs."""


# parsing helpers


def int_range(text: str) -> list[int]:
    """``"2..6"`` (inclusive), ``"2..8:2"`` (with step) or ``"1,3,5"``."""
    try:
        if ".." in text:
            lo, rest = text.split("..", 1)
            hi, _, step = rest.partition(":")
            out = list(range(int(lo), int(hi) + 1, int(step or 1)))
        else:
            out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def float_list(text: str) -> list[float]:
    try:
        return [float(Fraction(x)) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def matrix(text: str) -> np.ndarray:
    """Rows separated by ``;``, entries by ``,``."""
    try:
        rows = [[float(Fraction(x)) for x in r.split(",")] for r in text.split(";") if r.strip()]
        return np.array(rows, dtype=float)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad matrix {text!r}") from None


# output plumbing


class Outputs:
    """Tracks files written by a run so a failure can remove them."""

    def __init__(self):
        self.paths: list[Path] = []

    def write_bytes(self, path, data: bytes) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.paths.append(path)
        return path

    def write_json(self, path, obj) -> Path:
        return self.write_bytes(path, dumps(obj).encode("utf-8"))

    def write_csv(self, path, header, rows) -> Path:
        return self.write_bytes(path, csv_text(header, rows).encode("utf-8"))

    def cleanup(self):
        for p in self.paths:
            try:
                p.unlink()
            except FileNotFoundError:
                pass
        self.paths.clear()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _versions() -> dict:
    import numba
    import scipy

    return {
        "lacuna": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
    }


# direction families


def _sequence(theta: str):
    from .directions import LacunarySequence

    try:
        q = Fraction(theta)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"bad theta {theta!r}") from None
    if not 0 < q < 1:
        raise CliError("theta must lie in (0, 1)")
    return LacunarySequence.geometric(q)


def build_directions(args):
    from . import generators as g

    fam = args.family
    n = args.n
    if fam == "nsw":
        a = args.a or list(range(1, n + 1))
        return g.nsw_directions(a, _sequence(args.theta), args.count)
    if fam == "carbery":
        return g.carbery_directions(n, range(args.k_range[0], args.k_range[-1] + 1))
    if fam == "rational":
        return g.rational_slope_set(n, args.count)
    if fam == "rotated":
        return g.rotated_accumulating_set(n, args.count, args.delta)
    raise CliError(f"family {fam!r} does not produce a direction set")


def _load_directions(path):
    from .directions import DirectionSet

    try:
        return DirectionSet.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise CliError(f"cannot read directions from {path}: {e}") from None


def _directions_arg(args):
    if getattr(args, "input", None):
        return _load_directions(args.input)
    if not getattr(args, "family", None):
        raise CliError("give --input or --family")
    return build_directions(args)


def _lift(N: int, n: int):
    from .generators import besicovitch_family, kakeya_lift, rational_slope_set

    omega = rational_slope_set(n, 2**N)
    fam = besicovitch_family(N, np.eye(n)[:2], omega)
    return kakeya_lift(fam, omega)


# commands


def cmd_generate(args, out: Outputs):
    if args.family == "besicovitch":
        from .generators import besicovitch_family

        if args.N is None:
            raise CliError("--N is required for the besicovitch family")
        if args.lift:
            obj = _lift(args.N, args.n).to_json()
        else:
            slopes = _load_directions(args.directions) if args.directions else None
            obj = besicovitch_family(args.N, None, slopes).to_json()
    else:
        obj = build_directions(args).to_json()
    if args.out:
        out.write_json(args.out, obj)
    else:
        sys.stdout.write(dumps(obj))
    return {}


def cmd_classify(args, out: Outputs):
    from .certificates import LacunaryCertificate, auto_certificate, verify_lacunary_certificate

    omega = _directions_arg(args)
    spec = args.certificate
    if spec == "auto":
        cert = auto_certificate(omega, seed=args.seed)
    elif spec == "canonical":
        from .generators import carbery_certificate, nsw_certificate

        fam = omega.meta.get("family") if omega.meta else None
        if fam == "nsw":
            cert = nsw_certificate(omega)
        elif fam == "carbery":
            cert = carbery_certificate(omega)
        else:
            raise CliError("no canonical certificate for this direction set")
    else:
        try:
            cert = LacunaryCertificate.from_json(json.loads(Path(spec).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, KeyError) as e:
            raise CliError(f"cannot read certificate {spec}: {e}") from None
    check = verify_lacunary_certificate(omega, cert)
    if args.out:
        out.write_json(args.out, cert.to_json())
    if check.valid:
        print(f"order {check.order}")
        return {"order": check.order, "max_lambda": check.max_lambda}
    print(f"invalid: {check.witness}")
    return {"invalid": check.witness, "exit": 1}


def cmd_shadow(args, out: Outputs):
    from .directions import shadow

    omega = _directions_arg(args)
    if args.plane is None:
        raise CliError("--plane is required")
    sh = shadow(omega, args.plane)
    if args.out:
        out.write_json(args.out, sh.to_json())
    else:
        sys.stdout.write(dumps(sh.to_json()))
    return {"size": len(sh)}


def cmd_maxop(args, out: Outputs):
    from .grid import GridFunction, RadiusSet
    from .maximal import brute_oracle, directional_maximal

    try:
        f = GridFunction.load(args.input)
    except (OSError, ValueError) as e:
        raise CliError(f"cannot read grid {args.input}: {e}") from None
    omega = _load_directions(args.directions)
    if omega.n != f.n:
        raise CliError(f"directions live in R^{omega.n} but the grid is {f.n}-dimensional")
    radii = RadiusSet.parse(args.radii, f)
    res = (brute_oracle if args.oracle else directional_maximal)(f, omega, radii)
    out.write_bytes(args.out, res.to_bytes())
    return {"max": float(res.data.max())}


def _resolution(args, n):
    if args.resolution is not None:
        return args.resolution
    return 512 if n == 2 else 128


def cmd_norm_sweep(args, out: Outputs):
    from .generators import besicovitch_family, kakeya_lift, nsw_directions, planar_slopes, rational_slope_set
    from .maximal import directional_maximal, norm_ratio
    from .raster import rasterize_lift

    res = _resolution(args, args.n)
    rows = []
    if args.family == "besicovitch":
        header = ["N", "directions", "ratio", "region_min"]
        for N in args.N:
            lr = rasterize_lift(_lift(N, args.n), res, args.zcells)
            M = directional_maximal(lr.f, lr.directions)
            rmin = float(M.data[lr.region].min()) if lr.region.any() else float("nan")
            rows.append([N, 2**N, norm_ratio(lr.f, M, args.p), rmin])
    elif args.family in ("nsw", "rational"):
        header = ["count", "max_ratio", "argmax_N"]
        for count in args.counts:
            if args.family == "nsw":
                omega = nsw_directions(args.a or list(range(1, args.n + 1)), _sequence(args.theta), count)
            else:
                omega = rational_slope_set(args.n, count)
            best, arg = -1.0, 0
            top = int(math.log2(len(planar_slopes(omega, np.eye(args.n)[:2]))))
            for N in range(1, top + 1):
                fam = besicovitch_family(N, np.eye(args.n)[:2], omega)
                lr = rasterize_lift(kakeya_lift(fam, omega), res, args.zcells)
                r = norm_ratio(lr.f, directional_maximal(lr.f, lr.directions), args.p)
                if r > best:
                    best, arg = r, N
            rows.append([count, best, arg])
    else:
        raise CliError(f"norm-sweep does not support family {args.family!r}")
    if args.csv:
        out.write_csv(args.csv, header, rows)
    else:
        sys.stdout.write(csv_text(header, rows))
    return {"rows": len(rows)}


def cmd_besicovitch(args, out: Outputs):
    from .generators import besicovitch_family
    from .raster import measure_union

    rows = []
    for N in args.N:
        fam = besicovitch_family(N)
        a1 = measure_union(fam, args.resolution, 1)
        a3 = measure_union(fam, args.resolution, 3)
        rows.append([N, a1, a3, a1 / a3])
        if args.out:
            out.write_json(f"{args.out}.N{N}.json", fam.to_json())
    header = ["N", "union", "union3", "ratio"]
    if args.csv:
        out.write_csv(args.csv, header, rows)
    else:
        sys.stdout.write(csv_text(header, rows))
    return {"rows": len(rows)}


def _random_omega(rng, n):
    w = np.abs(rng.standard_normal(n)) + 0.05
    return w / np.linalg.norm(w)


def run_check(check: str, n: int, seed: int = 7, trials: int | None = None, resolution: int | None = None) -> dict:
    """Run one of the frequency-side checks and return the report dict."""
    from .directions import LacunarySequence, refine_sequence, segment_index, sigma_pairs
    from .grid import GridFunction
    from .multipliers import (
        FrequencyGrid,
        MultiplierStack,
        cone_count_bound,
        inclusion_exclusion_residual,
        overlap_count,
        region_emptiness_search,
        square_function_p2,
        vanishing_check,
    )

    if n < 2:
        raise CliError("--n must be at least 2")
    rng = np.random.default_rng(seed)
    params = {"n": n, "seed": seed}
    if check == "emptiness":
        resolution = resolution or {2: 512, 3: 128, 4: 48}.get(n, 32)
        hits = region_emptiness_search(n, resolution=resolution, seed=seed)
        params["resolution"] = resolution
        return {"check": check, "parameters": params, "witnesses": hits.tolist(), "pass": len(hits) == 0}
    seq = refine_sequence(LacunarySequence.dyadic())
    if check == "vanishing":
        trials = trials or 25
        resolution = resolution or 256
        grid = FrequencyGrid((resolution,) * n)
        stack = MultiplierStack.uniform(n, seq, grid)
        worst = 0.0
        for _ in range(trials):
            w = _random_omega(rng, n)
            idx = {s: segment_index(tuple(w), s, seq) for s in sigma_pairs(n)}
            for e in range(-10, 11):
                worst = max(worst, vanishing_check(2.0**e, w, idx, stack, grid))
        params.update(trials=trials, resolution=resolution, radii="2^-10..2^10")
        return {"check": check, "parameters": params, "max_residual": worst, "pass": worst == 0.0}
    if check == "inclusion-exclusion":
        trials = trials or 10
        resolution = resolution or 32
        worst = 0.0
        for _ in range(trials):
            f = GridFunction(rng.standard_normal((resolution,) * n))
            w = _random_omega(rng, n)
            idx = {s: int(rng.integers(-6, 7)) for s in sigma_pairs(n)}
            stack = MultiplierStack.uniform(n, seq)
            r = float(2.0 ** rng.uniform(0, 4))
            worst = max(worst, inclusion_exclusion_residual(f, r, w, idx, stack))
        params.update(trials=trials, resolution=resolution)
        return {"check": check, "parameters": params, "max_residual": worst, "pass": worst <= 1e-10}
    dyadic = LacunarySequence.dyadic()
    if check == "overlap":
        resolution = resolution or 64
        grid = FrequencyGrid((resolution,) * n)
        stack = MultiplierStack.uniform(n, dyadic, grid)
        counts = {f"{s.j},{s.k}": overlap_count(stack, s, grid) for s in sigma_pairs(n)}
        oracle = max(cone_count_bound(dyadic, n, float(rho)) for rho in np.geomspace(1e-3, 1e3, 4001))
        params["resolution"] = resolution
        return {
            "check": check,
            "parameters": params,
            "counts": counts,
            "oracle": oracle,
            "pass": all(c == oracle for c in counts.values()),
        }
    if check == "square-function":
        trials = trials or 100
        resolution = resolution or 32
        grid = FrequencyGrid((resolution,) * n)
        stack = MultiplierStack.uniform(n, dyadic, grid)
        bound = overlap_count(stack, (1, 2), grid)
        worst = 0.0
        for _ in range(trials):
            f = GridFunction(rng.standard_normal((resolution,) * n))
            lhs, rhs = square_function_p2(f, stack, (1, 2))
            worst = max(worst, lhs / rhs)
        params.update(trials=trials, resolution=resolution)
        return {"check": check, "parameters": params, "max_ratio": worst, "overlap": bound, "pass": worst <= bound}
    raise CliError(f"unknown check {check!r}")


def cmd_verify(args, out: Outputs):
    rep = run_check(args.check, args.n, args.seed, args.trials, args.resolution)
    if args.out:
        out.write_json(args.out, rep)
    if args.report == "json":
        sys.stdout.write(dumps(rep))
    else:
        print(f"{rep['check']}: {'pass' if rep['pass'] else 'FAIL'}")
    return {"pass": rep["pass"], "exit": 0 if rep["pass"] else 1}


def cmd_report(args, out: Outputs):
    rows = []
    for p in sorted(Path(args.runs).glob("*.manifest.json")):
        try:
            m = json.loads(p.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        rows.append([p.name, m.get("command", ""), m.get("status", ""), m.get("wall_time", ""), ";".join(m.get("outputs", []))])
    header = ["manifest", "command", "status", "wall_time", "outputs"]
    if args.csv:
        out.write_csv(args.csv, header, rows)
    else:
        sys.stdout.write(csv_text(header, rows))
    return {"runs": len(rows)}


# parser


def _family_options(p, required=False):
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--n", type=int, default=2, help="ambient dimension (default 2)")
    p.add_argument("--count", type=int, default=16, help="number of directions")
    p.add_argument("--a", type=float_list, help="NSW exponents, default 1..n")
    p.add_argument("--theta", default="1/2", help="NSW ratio, theta_i = theta^i (default 1/2)")
    p.add_argument("--k-range", type=int_range, default=[0, 2], help="Carbery exponent range, e.g. 0..2")
    p.add_argument("--delta", type=float, default=0.1, help="tilt of the rotated set")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lacuna", description="Lacunary direction sets and directional maximal operators.")
    ap.add_argument("--version", action="version", version=f"lacuna {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--threads", type=int, help="worker cap (default: LACUNA_THREADS or all cores)")
    common.add_argument("--manifest", help="manifest path (default: next to the first output)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="build a direction set or rectangle family")
    _family_options(p, required=True)
    p.add_argument("--N", type=int, help="tree levels (besicovitch)")
    p.add_argument("--lift", action="store_true", help="emit the Kakeya lift with rational-slope directions")
    p.add_argument("--directions", help="slopes for the besicovitch family (JSON)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("classify", parents=[common], help="verify a lacunarity certificate")
    _family_options(p)
    p.add_argument("--input", help="direction set JSON")
    p.add_argument("--certificate", default="auto", help="auto, canonical or a certificate JSON path")
    p.add_argument("--out", help="write the certificate used")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("shadow", parents=[common], help="project a direction set onto a subspace")
    _family_options(p)
    p.add_argument("--input")
    p.add_argument("--plane", type=matrix, help="orthonormal rows, e.g. '1,0,0;0,1,0'")
    p.add_argument("--out")
    p.set_defaults(func=cmd_shadow)

    p = sub.add_parser("maxop", parents=[common], help="directional maximal function of a grid")
    p.add_argument("--input", required=True, help="LACGRID1 grid")
    p.add_argument("--directions", required=True, help="direction set JSON")
    p.add_argument("--radii", default="dyadic", help="dyadic or explicit:r1,r2,...")
    p.add_argument("--oracle", action="store_true", help="use the reference triple loop")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_maxop)

    p = sub.add_parser("norm-sweep", parents=[common], help="L^p norm ratios on Kakeya sets")
    p.add_argument("--family", choices=("besicovitch", "nsw", "rational"), default="besicovitch")
    p.add_argument("--N", type=int_range, default=[2, 3, 4, 5, 6])
    p.add_argument("--counts", type=int_range, default=[4, 8, 16, 32, 64])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--a", type=float_list)
    p.add_argument("--theta", default="1/2")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--resolution", type=int, help="cells per planar axis (default 512 in 2D, 128 otherwise)")
    p.add_argument("--zcells", type=int, default=16)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_norm_sweep)

    p = sub.add_parser("besicovitch", parents=[common], help="|U R| / |U 3R| for the tree families")
    p.add_argument("--N", type=int_range, default=list(range(1, 9)))
    p.add_argument("--resolution", type=int, default=4096)
    p.add_argument("--csv")
    p.add_argument("--out", help="prefix for per-N family JSON files")
    p.set_defaults(func=cmd_besicovitch)

    p = sub.add_parser("verify", parents=[common], help="frequency-side checks")
    p.add_argument("--check", choices=CHECKS, required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--report", choices=("json", "text"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", parents=[common], help="summarize the manifests in a directory")
    p.add_argument("--runs", default=".")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_report)
    return ap


def _manifest_path(args, out: Outputs) -> Path:
    if args.manifest:
        return Path(args.manifest)
    if out.paths:
        first = out.paths[0]
        return first.with_name(first.name + ".manifest.json")
    return Path(f"lacuna-{args.command}.manifest.json")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .directions import InvalidSequenceError
    from .generators import ConstructionError
    from .maximal import set_threads
    from .multipliers import PreconditionError

    set_threads(args.threads)
    out = Outputs()
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    t0 = time.perf_counter()
    try:
        info = args.func(args, out) or {}
        manifest = {
            "command": args.command,
            "parameters": params,
            "versions": _versions(),
            "wall_time": time.perf_counter() - t0,
            "outputs": [str(p) for p in out.paths],
            "result": {k: v for k, v in info.items() if k != "exit"},
            "status": "ok",
        }
        out.write_json(_manifest_path(args, out), manifest)
        return int(info.get("exit", 0))
    except (CliError, ValueError, KeyError, OSError, PreconditionError, ConstructionError, InvalidSequenceError) as e:
        out.cleanup()
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"lacuna: error: {msg}", file=sys.stderr)
        return 2
    except BaseException:
        out.cleanup()
        raise


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
