"""Command-line interface: ``zrp <subcommand>``.

One JSON document goes to stdout, diagnostics to stderr.  Exit codes:
0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .ascale import fundamental_solution
from .errors import NumericalFailure, ValidationError, ZRPError
from .exppoly import mean_jump

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

DEFAULTS = {
    "scan": {"emin": -10.0, "emax": 0.999, "step": 0.01, "refinement_tol": 1e-12},
    "oracle": {"L": 20.0, "h": 0.01, "k": 3},
    "green_check": {"trials": 100},
    "seed": 0,
}


# -- deterministic JSON ------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise NumericalFailure(f"non-finite value {x} in output")
    s = "%.17g" % x
    if s == "-0":
        s = "0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written as %.17g; byte-identical for identical inputs."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def cmatrix(M) -> list:
    return [[cplx(v) for v in row] for row in np.atleast_2d(M)]


# -- input parsing -------------------------------------------------------------


def parse_matrix(text: str, name: str) -> np.ndarray:
    """Row-major JSON matrix; entries are reals or [re, im] pairs.  Hermiticity is checked later."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{name}: invalid JSON ({exc.msg})") from exc
    if isinstance(data, (int, float)) and not isinstance(data, bool):
        data = [[data]]
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ValidationError(f"{name}: expected a non-empty list of rows")
    n = len(data)
    M = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(data):
        if len(row) != n:
            raise ValidationError(f"{name}: row {i} has {len(row)} entries, expected {n} (square matrix)")
        for j, v in enumerate(row):
            if isinstance(v, bool):
                raise ValidationError(f"{name}: entry ({i},{j}) is not a number")
            if isinstance(v, (int, float)):
                M[i, j] = v
            elif isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
                M[i, j] = complex(v[0], v[1])
            else:
                raise ValidationError(f"{name}: entry ({i},{j}) must be a real or an [re, im] pair")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name}: entries must be finite")
    return M


def parse_rect(text: str, name: str) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{name}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ValidationError(f"{name}: expected a non-empty list of rows")
    width = len(data[0])
    if any(len(r) != width for r in data):
        raise ValidationError(f"{name}: rows differ in length")
    out = np.zeros((len(data), width), dtype=complex)
    for i, row in enumerate(data):
        for j, v in enumerate(row):
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                out[i, j] = v
            elif isinstance(v, list) and len(v) == 2:
                out[i, j] = complex(v[0], v[1])
            else:
                raise ValidationError(f"{name}: entry ({i},{j}) must be a real or an [re, im] pair")
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ValidationError(f"config has unknown keys: {sorted(unknown)}")
    return cfg


def setting(args, cfg: dict, section: str, key: str):
    """CLI flag, else config file, else built-in default."""
    v = getattr(args, key, None)
    if v is not None:
        return v
    return cfg.get(section, {}).get(key, DEFAULTS[section][key])


def thread_cap() -> int:
    raw = os.environ.get("ZRP_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"ZRP_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"ZRP_THREADS must be a positive integer, got {raw!r}")
    return n


def manifest(command: str, seed: int, effective: dict, timings: dict | None) -> dict:
    digest = hashlib.sha256(json.dumps(effective, sort_keys=True, default=str).encode()).hexdigest()
    out = {"command": command, "seed": int(seed), "config_digest": digest, "outputs": []}
    if timings is not None:
        out["timings"] = timings
    return out


# -- subcommands ------------------------------------------------------------------


def cmd_msol(args, cfg):
    m = fundamental_solution(args.index)
    terms = [{"coeff": t.coeff.real, "power": t.power, "rate": t.rate.real} for t in m.right]
    _, jump = mean_jump(m, args.index - 1)
    return {
        "index": args.index,
        "parity": "even" if args.index % 2 == 0 else "odd",
        "terms": terms,
        "function": m.to_json(),
        "quasi_jump": {"order": args.index - 1, "value": cplx(jump)},
    }, {"index": args.index}


def _spec_from_args(args, family: str):
    from .extensions import ExtensionSpec

    B = parse_matrix(args.B, "B")
    R = parse_matrix(args.R, "R") if getattr(args, "R", None) else None
    if family == "l2":
        return ExtensionSpec.l2(B, R)
    if family == "sobolev":
        if args.p is None:
            raise ValidationError("--p is required for the sobolev family")
        return ExtensionSpec.sobolev(B, args.p)
    if family == "nonlocal":
        return ExtensionSpec.nonlocal_(B, args.q_index)
    if family == "3d":
        if B.shape != (1, 1) or B[0, 0].imag != 0:
            raise ValidationError("3d family takes a real 1x1 B")
        return ExtensionSpec.point3d(B[0, 0].real, args.mu)
    raise ValidationError(f"unknown family {family}")


def cmd_spectrum(args, cfg):
    from .spectral import Scan, bound_state_3d, bound_states

    spec = _spec_from_args(args, args.family)
    scan = Scan(
        float(setting(args, cfg, "scan", "emin")),
        float(setting(args, cfg, "scan", "emax")),
        float(setting(args, cfg, "scan", "step")),
        float(setting(args, cfg, "scan", "refinement_tol")),
    )
    if args.family == "3d":
        report = bound_state_3d(spec.B[0, 0].real, spec.mu)
    else:
        report = bound_states(spec, scan)
    bad = [r for r in report.residuals if not r <= 1e-8]
    if bad:
        raise NumericalFailure(f"eigenpair residual {max(bad):.3g} exceeds 1e-8")
    out = report.to_json()
    if args.family == "3d":
        out["scan"] = None
    eff = {"family": args.family, "B": cmatrix(spec.B), "p": args.p, "mu": args.mu, "scan": scan.to_json()}
    return out, eff


def cmd_green_check(args, cfg):
    from .bvs import green_residual_l2, green_residual_powers, green_residual_sobolev
    from .sampling import random_exppoly, random_hermitian
    from .suites import _sobolev_pair

    trials = int(setting(args, cfg, "green_check", "trials"))
    seed = args.seed if args.seed is not None else cfg.get("seed", DEFAULTS["seed"])
    if trials < 1:
        raise ValidationError("--trials must be positive")
    rng = np.random.default_rng(seed)
    worst = 0.0
    fam = args.family
    p = args.p
    if fam in ("powers",) and (p is None or p < 1):
        raise ValidationError("--p >= 1 is required for the powers family")
    if fam == "sobolev" and (p is None or p < 2 or p % 2):
        raise ValidationError("--p must be even and >= 2 for the sobolev family")
    for _ in range(trials):
        if fam == "l2":
            r = green_residual_l2(random_exppoly(rng), random_exppoly(rng), random_hermitian(rng, 2), relative=True)
        elif fam == "powers":
            r = green_residual_powers(random_exppoly(rng), random_exppoly(rng), p, relative=True)
        else:
            f, g = _sobolev_pair(rng, p)
            r = green_residual_sobolev(f, g, p, relative=True)
        worst = max(worst, r)
    tol = 1e-9
    out = {"family": fam, "p": p, "trials": trials, "max_relative_residual": worst, "tolerance": tol, "pass": worst <= tol}
    if worst > tol:
        print(dumps({"result": out}), file=sys.stderr)
        raise NumericalFailure(f"Green residual {worst:.3g} exceeds {tol}")
    return out, {"family": fam, "p": p, "trials": trials, "seed": seed}


def cmd_admissible(args, cfg):
    from .extensions import AdmissibilityData, admissibility_witness

    gram = parse_rect(args.gram, "gram")
    dim = args.dim if args.dim is not None else gram.shape[1]
    emb = parse_rect(args.embedding, "embedding") if args.embedding else None
    data = AdmissibilityData(gram, dim, emb)
    B = parse_matrix(args.B, "B")
    R = parse_matrix(args.R, "R") if args.R else np.zeros_like(B)
    eta = admissibility_witness(B, R, data)
    out = {"admissible": eta is None, "dim_intersection": dim, "witness": None, "witness_residual": None}
    if eta is not None:
        # eta lives in N coordinates; recover its N cap D(A) coordinates to re-verify
        c, *_ = np.linalg.lstsq(data.embedding, eta, rcond=None)
        res = float(np.abs(B @ data.gram @ c - (np.eye(data.n) + B @ R) @ eta).max())
        out["witness"] = [cplx(v) for v in eta]
        out["witness_residual"] = res
    return out, {"B": cmatrix(B), "R": cmatrix(R), "gram": cmatrix(gram), "dim": dim}


def cmd_invert(args, cfg):
    from .extensions import ExtensionSpec, recover_potential

    if args.family == "l2":
        R = parse_matrix(args.R, "R") if args.R else None
        spec = ExtensionSpec.l2(np.zeros((2, 2)), R)
    else:
        if args.p is None:
            raise ValidationError("--p is required for the sobolev family")
        spec = ExtensionSpec.sobolev(np.zeros((args.p + 2, args.p + 2)), args.p)
    rec = recover_potential(spec)
    psi = [{"delta_coeffs": [cplx(c) for c in d.delta_coeffs]} for d in rec.psi]
    out = {
        "family": args.family,
        "p": args.p if args.family == "sobolev" else None,
        "psi": psi,
        "coefficient_matrix": cmatrix(rec.coeff_matrix),
        "convention": "<u, delta^(k)> = (-1)^k u^(k)(0); rows index k, columns index psi_j",
        "boundary_map": rec.note,
    }
    return out, {"family": args.family, "p": args.p, "R": args.R}


def cmd_oracle_compare(args, cfg):
    from .extensions import ExtensionSpec
    from .oracle import discretize, lowest_eigenvalues
    from .spectral import Scan, bound_states

    B = parse_matrix(args.B, "B")
    spec = ExtensionSpec.l2(B) if args.family == "l2-delta" else ExtensionSpec.nonlocal_(B, args.q_index)
    L = float(setting(args, cfg, "oracle", "L"))
    h = float(setting(args, cfg, "oracle", "h"))
    k = int(setting(args, cfg, "oracle", "k"))
    gop = discretize(spec, L, h)
    oracle = lowest_eigenvalues(gop, k)
    emin = min(oracle[0] - 1.0, -1.0) if oracle else -1.0
    report = bound_states(spec, Scan(emin, 0.999, float(setting(args, cfg, "scan", "step"))))
    analytic = report.eigenvalues
    diffs = [o - a for o, a in zip(oracle, analytic)]
    out = {
        "family": args.family,
        "L": L,
        "h": h,
        "k": k,
        "analytic": analytic,
        "oracle": oracle,
        "diffs": diffs,
        "hermiticity_defect": gop.hermiticity_defect(),
        "note": "nonlocal eigenvalues are those of A_q + 1" if args.family == "nonlocal" else "",
    }
    return out, {"family": args.family, "B": cmatrix(B), "L": L, "h": h, "k": k}


def cmd_selftest(args, cfg):
    from .suites import SUITES, run_suite

    seed = args.seed if args.seed is not None else cfg.get("seed", DEFAULTS["seed"])
    if seed < 0:
        raise ValidationError("seed must be nonnegative")
    names = list(SUITES)
    with ThreadPoolExecutor(max_workers=min(thread_cap(), len(names))) as pool:
        results = list(pool.map(lambda n: run_suite(n, seed), names))
    out = {"seed": seed, "suites": {r.name: r.to_json() for r in results}, "pass": all(r.passed for r in results)}
    return out, {"seed": seed}


COMMANDS = {
    "msol": cmd_msol,
    "spectrum": cmd_spectrum,
    "green-check": cmd_green_check,
    "admissible": cmd_admissible,
    "invert": cmd_invert,
    "oracle-compare": cmd_oracle_compare,
    "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings in the manifest")

    p = _Parser(prog="zrp", description="Zero-range perturbations: boundary triples, spectra and checks.")
    p.add_argument("--version", action="version", version=f"zrp {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("msol", parents=[common], help="closed form of a fundamental solution m_j")
    s.add_argument("--index", type=int, required=True)

    s = sub.add_parser("spectrum", parents=[common], help="bound states of a realization")
    s.add_argument("--family", choices=["l2", "sobolev", "nonlocal", "3d"], required=True)
    s.add_argument("--B", required=True, help="Hermitian coupling matrix as JSON")
    s.add_argument("--R", help="Hermitian regularization matrix (l2 family)")
    s.add_argument("--p", type=int)
    s.add_argument("--q-index", type=int, default=1, help="k in q = m_{2k} (nonlocal family)")
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--emin", type=float)
    s.add_argument("--emax", type=float)
    s.add_argument("--step", type=float)
    s.add_argument("--refinement-tol", dest="refinement_tol", type=float)
    s.add_argument("--csv", action="store_true", help="emit eigenvalue rows as CSV instead of JSON")

    s = sub.add_parser("green-check", parents=[common], help="seeded Green-identity residuals")
    s.add_argument("--family", choices=["l2", "powers", "sobolev"], required=True)
    s.add_argument("--p", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)

    s = sub.add_parser("admissible", parents=[common], help="admissibility of (B, R)")
    s.add_argument("--B", required=True)
    s.add_argument("--R")
    s.add_argument("--gram", required=True, help="P_N A on N cap D(A) in coordinates (n x d)")
    s.add_argument("--embedding", help="coordinates of the N cap D(A) basis in N (n x d)")
    s.add_argument("--dim", type=int)

    s = sub.add_parser("invert", parents=[common], help="recover the potential basis psi")
    s.add_argument("--family", choices=["l2", "sobolev"], required=True)
    s.add_argument("--p", type=int)
    s.add_argument("--R")

    s = sub.add_parser("oracle-compare", parents=[common], help="analytic vs finite-difference eigenvalues")
    s.add_argument("--family", choices=["l2-delta", "nonlocal"], required=True)
    s.add_argument("--B", required=True)
    s.add_argument("--q-index", type=int, default=1)
    s.add_argument("--L", type=float)
    s.add_argument("--h", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--step", type=float)

    s = sub.add_parser("selftest", parents=[common], help="run all property suites")
    s.add_argument("--seed", type=int)
    return p


def _csv(report: dict) -> str:
    lines = ["index,E,residual,tangent_root"]
    for i, (e, r, t) in enumerate(zip(report["eigenvalues"], report["residuals"], report["tangent_root"])):
        lines.append(f"{i},{_fmt_float(e)},{_fmt_float(r)},{str(t).lower()}")
    return "\n".join(lines) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        thread_cap()
        cfg = load_config(args.config)
        result, effective = COMMANDS[args.command](args, cfg)
        seed = getattr(args, "seed", None)
        seed = seed if seed is not None else cfg.get("seed", DEFAULTS["seed"])
        timings = {"total_s": time.perf_counter() - t0} if args.timings else None
        if args.command == "spectrum" and args.csv:
            sys.stdout.write(_csv(result))
            return EXIT_OK
        doc = {"manifest": manifest(args.command, seed, effective, timings), "result": result}
        sys.stdout.write(dumps(doc) + "\n")
        if args.command == "selftest" and not result["pass"]:
            failed = [k for k, v in result["suites"].items() if not v["pass"]]
            print(f"zrp: selftest failed: {', '.join(failed)}", file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK
    except NumericalFailure as exc:
        print(f"zrp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        print(f"zrp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ZRPError, ValueError) as exc:
        print(f"zrp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
