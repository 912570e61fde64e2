"""Command-line front end: eval, classify, verify and mesh."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Iterable, Optional, Sequence

import numpy as np

from .checks import CHECK_NAMES, CHECKS, CheckResult, SceneRun, image_segments
from .config import ConfigError, SceneConfig, load_config
from .expr import ExprError
from .image import ConoidalError, image_surface
from .laplace import gamma_curvature, sample
from .relnorm import equiaffine_normal, relative_normal

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MESH_TARGETS = ("surface", "image-surface", "gamma")


def fmt(x: float) -> str:
    return "%.12g" % (x + 0.0)  # + 0.0 folds -0.0 into 0.0


def _canonical(obj):
    """Recursively turn floats into %.12g strings so reports are byte-stable."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(float(obj))
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_canonical(report), sort_keys=True, indent=2) + "\n"


# --- eval ---------------------------------------------------------------------------

EVAL_COLUMNS = (
    ["u", "v"]
    + [f"x_{c}" for c in "123"]
    + [f"xi_{c}" for c in "123"]
    + [f"n_{c}" for c in "123"]
    + ["K", "q", "q_aff"]
    + [f"y_{c}" for c in "123"]
    + ["y_e", "y_n", "y_z"]
    + [f"y_aff_{c}" for c in "123"]
    + ["L1", "L2"]
    + [f"L_{c}" for c in "123"]
)


def default_points(cfg: SceneConfig) -> list[tuple[float, float]]:
    us, vs = cfg.grid()
    return [(float(u), float(v)) for u in us for v in vs]


def cmd_eval(cfg: SceneConfig, points: Optional[Iterable[tuple[float, float]]] = None) -> list[list[str]]:
    """One CSV row per point: patch, normalizations and Laplace normal."""
    surface = cfg.surface()
    q = cfg.support()
    rows = [list(EVAL_COLUMNS)]
    for u, v in points if points is not None else default_points(cfg):
        pt = surface.point(u, v)
        frame = surface.frame_at(u)
        rs = relative_normal(pt, frame, surface.inv, q)
        y_aff, q_aff = equiaffine_normal(pt, frame, surface.inv)
        lap = sample(surface, q, u, v)
        values = (
            [u, v, *pt.x, *pt.xi, *frame.n, pt.K, rs.q.value, q_aff, *rs.y, *rs.y_frame, *y_aff, lap.L1, lap.L2, *lap.L]
        )
        rows.append([fmt(float(x)) for x in values])
    return rows


def gamma_rows(cfg: SceneConfig) -> list[list[str]]:
    """Gamma(u) = L(u, 0) with its curvature; the curvature column is empty when undefined."""
    run = SceneRun(cfg)
    rows = [["u", "x", "y", "z", "k"]]
    for u in run.us:
        L = sample(run.surface, run.q, u, 0.0).L
        try:
            k = fmt(gamma_curvature(run.inv, run.q.f, u)) if run.q.kind == "conoidal" else ""
        except (ValueError, ArithmeticError):
            k = ""
        rows.append([fmt(float(u)), *(fmt(float(c)) for c in L), k])
    return rows


def write_csv(rows: list[list[str]]) -> str:
    return "".join(",".join(r) + "\n" for r in rows)


# --- classify / verify ---------------------------------------------------------------


def _result_dict(r: CheckResult) -> dict:
    return {"status": r.status, "measured": r.measured, "message": r.message}


def cmd_classify(cfg: SceneConfig) -> dict:
    run = SceneRun(cfg)
    rep = run.classification
    oracle = CHECKS["oracle"](run)
    return {
        "scene": cfg.name,
        "verdict": rep.verdict,
        "scale": rep.scale,
        "evidence": {name: {"measured": value, "threshold": thr} for name, value, thr in rep.evidence},
        "oracle": _result_dict(oracle),
    }


def cmd_verify(cfg: SceneConfig, which: Sequence[str] = CHECK_NAMES) -> dict:
    run = SceneRun(cfg)
    checks = {}
    for name in which:
        try:
            result = CHECKS[name](run)
        except (ArithmeticError, ValueError) as exc:
            result = CheckResult(name, "fail", {}, f"{type(exc).__name__}: {exc}")
        checks[name] = _result_dict(result)
    try:
        verdict = run.classification.verdict
        evidence = {name: {"measured": v, "threshold": t} for name, v, t in run.classification.evidence}
    except (ArithmeticError, ValueError) as exc:
        verdict, evidence = "error", {"error": str(exc)}
    return {
        "scene": cfg.name,
        "seed": cfg.seed,
        "classification": {"verdict": verdict, "evidence": evidence},
        "checks": checks,
        "image_segments": image_segments(run),
        "passed": all(c["status"] != "fail" for c in checks.values()),
    }


# --- mesh -----------------------------------------------------------------------------


def quad_triangles(nu: int, nv: int) -> list[tuple[int, int, int]]:
    """1-based triangles splitting each grid quad (a, b, c, d) into (a, b, d) and (a, d, c)."""
    tris = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            a = i * nv + j + 1
            b, c, d = a + 1, a + nv, a + nv + 1
            tris += [(a, b, d), (a, d, c)]
    return tris


def cmd_mesh(cfg: SceneConfig, target: str = "surface") -> str:
    if target not in MESH_TARGETS:
        raise ValueError(f"unknown mesh target {target!r}")
    surface = cfg.surface()
    us, vs = cfg.grid()
    lines = [f"# {target} of scene {cfg.name}"]
    if target == "gamma":
        q = cfg.support()
        for u in us:
            lines.append("v " + " ".join(fmt(float(c)) for c in sample(surface, q, u, 0.0).L))
        lines += [f"l {i} {i + 1}" for i in range(1, len(us))]
        return "\n".join(lines) + "\n"

    if target == "image-surface":
        if cfg.support_kind != "conoidal":
            raise ConoidalError("image-surface needs a conoidal-form support (support.kind = 'conoidal')")
        f = cfg.support().f
        for u in us:
            pt, _ = image_surface(surface.inv, f, surface.frame_at(u))
            for v in vs:
                lines.append("v " + " ".join(fmt(float(c)) for c in pt.r_star + v * pt.ruling))
    else:
        for u in us:
            for v in vs:
                lines.append("v " + " ".join(fmt(float(c)) for c in surface.point(u, v).x))
    lines += ["f %d %d %d" % t for t in quad_triangles(len(us), len(vs))]
    return "\n".join(lines) + "\n"


# --- argument parsing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ruled-laplace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scene JSON file or builtin scene name")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("eval", help="evaluate normals and the Laplace normal at points (CSV)")
    common(p)
    p.add_argument("--point", nargs=2, type=float, action="append", metavar=("U", "V"), help="repeatable; default is the config grid")
    p.add_argument("--target", choices=("points", "gamma"), default="points", help="'gamma' writes Gamma samples (u, x, y, z, k)")

    p = sub.add_parser("classify", help="classify the Laplace normal image (JSON report)")
    common(p)

    p = sub.add_parser("verify", help="run geometric and oracle checks (JSON report)")
    common(p)
    p.add_argument("--check", default=",".join(CHECK_NAMES), help="comma-separated subset of " + ",".join(CHECK_NAMES))

    p = sub.add_parser("mesh", help="export an OBJ mesh or polyline")
    common(p)
    p.add_argument("--target", choices=MESH_TARGETS, default="surface")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE

    if args.command == "verify":
        which = [c.strip() for c in args.check.split(",") if c.strip()]
        unknown = [c for c in which if c not in CHECKS]
        if unknown or not which:
            print(f"error: --check takes a subset of {','.join(CHECK_NAMES)}", file=sys.stderr)
            return EXIT_USAGE

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "eval":
            rows = gamma_rows(cfg) if args.target == "gamma" else cmd_eval(cfg, args.point)
            _emit(write_csv(rows), args.out)
            return EXIT_PASS
        if args.command == "classify":
            report = cmd_classify(cfg)
            _emit(dump_report(report), args.out)
            print(f"verdict: {report['verdict']}", file=sys.stderr)
            return EXIT_PASS
        if args.command == "verify":
            report = cmd_verify(cfg, which)
            _emit(dump_report(report), args.out)
            for name, c in report["checks"].items():
                print(f"{name}: {c['status']}" + (f" ({c['message']})" if c["message"] else ""), file=sys.stderr)
            return EXIT_PASS if report["passed"] else EXIT_FAIL
        _emit(cmd_mesh(cfg, args.target), args.out)
        return EXIT_PASS
    except ExprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
