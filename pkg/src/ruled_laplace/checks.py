"""Verification checks run by ``ruled-laplace verify`` and ``classify``.

Every check compares an observed geometric fact with the closed-form
prediction for the same configuration, so a check passes on negative
examples too, as long as both sides agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .config import SceneConfig
from .expr import Jet3, eval_jet3
from .image import check_prop4, check_prop5, check_prop6, image_surface, segment_invariants
from .laplace import ClassificationReport, Tolerances, classify_image, line_delta_residual, gamma_curvature, sample
from .oracle import OracleConfig, fit_line, laplacian_oracle
from .relnorm import equiaffine_support, local_jets, relative_normal

CHECK_NAMES = ("prop1", "prop2", "prop3", "prop4", "prop5", "prop6", "oracle", "examples")


@dataclass
class CheckResult:
    name: str
    status: str  # pass | fail | skip
    measured: dict = field(default_factory=dict)
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"


class SceneRun:
    """Lazily computed artefacts of one scene, shared between checks."""

    def __init__(self, cfg: SceneConfig):
        self.cfg = cfg
        self.tol = cfg.tolerances
        self.inv = cfg.invariants()
        self.q = cfg.support()
        self.us, self.vs = cfg.grid()

    @cached_property
    def surface(self):
        return self.cfg.surface()

    @cached_property
    def samples(self):
        return [[sample(self.surface, self.q, u, v) for v in self.vs] for u in self.us]

    @cached_property
    def classification(self) -> ClassificationReport:
        tol = Tolerances(relative=self.tol["classify"], rank=self.tol["rank"])
        return classify_image(self.surface, self.q, (self.us, self.vs), tol)

    @cached_property
    def max_abs_kappa(self) -> float:
        return max(abs(self.inv.values(u)[0]) for u in self.us)

    @cached_property
    def min_abs_kappa(self) -> float:
        return min(abs(self.inv.values(u)[0]) for u in self.us)

    @property
    def conoidal(self) -> bool:
        return self.max_abs_kappa <= self.tol["kappa"]

    @cached_property
    def scale(self) -> float:
        return max(float(np.linalg.norm(s.L)) for row in self.samples for s in row)

    @cached_property
    def ruling_variation(self) -> tuple[float, float]:
        """(max |L_v|, max |L_v| / max |L|) over the grid."""
        m = max(float(np.linalg.norm(s.L_v)) for row in self.samples for s in row)
        return m, m / self.scale

    @cached_property
    def qw_variation(self) -> float:
        """max |d(q w)/dv| / max |q w|; zero exactly when q = f(u)/w."""
        if self.q.kind == "conoidal":
            return 0.0
        num, den = 0.0, 0.0
        for u in self.us:
            for v in self.vs:
                J = local_jets(self.inv, self.q, u, v)
                qw = J.Q * J.W
                num = max(num, abs(qw.dv))
                den = max(den, abs(qw.value))
        return num / den

    @property
    def has_support_form(self) -> bool:
        return self.qw_variation <= self.tol["ruling"]

    def f_jet(self, u: float) -> Jet3:
        """f = q w as a function of u (meaningful when q has the form f/w)."""
        if self.q.kind == "conoidal":
            return self.q.f_jet(u)
        J = local_jets(self.inv, self.q, u, 0.0)
        F = J.Q * J.W
        return Jet3(F.value, F.du, F.duu, math.nan)

    @property
    def image_applicable(self) -> bool:
        return self.q.kind == "conoidal" and self.min_abs_kappa > self.tol["kappa"]


def check_prop1(run: SceneRun) -> CheckResult:
    lv_abs, lv_rel = run.ruling_variation
    observed = lv_rel <= run.tol["ruling"]
    predicted = run.conoidal and run.has_support_form
    measured = {
        "max_abs_L_v": lv_abs,
        "relative_L_v": lv_rel,
        "max_abs_kappa": run.max_abs_kappa,
        "qw_v_variation": run.qw_variation,
        "constant_along_rulings": observed,
        "predicted": predicted,
    }
    ok = observed == predicted
    msg = "" if ok else "ruling constancy disagrees with kappa = 0 and q = f/w"
    return CheckResult("prop1", "pass" if ok else "fail", measured, msg)


def _point_condition_residual(run: SceneRun) -> float:
    worst, scale = 0.0, 0.0
    for u in run.us:
        d = eval_jet3(run.inv.delta, u, run.inv.constants)
        f = run.f_jet(u)
        p = d.derivative() * f / (d * d)
        g = f / d
        worst = max(worst, abs(p.d1 - 2.0 * g.value), abs(p.value + 2.0 * g.d1))
        scale = max(scale, abs(g.value))
    return worst / scale


def check_prop2(run: SceneRun) -> CheckResult:
    rep = run.classification
    observed = rep.verdict == "point"
    r_point = _point_condition_residual(run) if run.conoidal and run.has_support_form else math.inf
    predicted = r_point <= run.tol["closed_form"]
    measured = {"verdict": rep.verdict, "point_condition_residual": r_point, "predicted_point": predicted}
    ok = observed == predicted
    msg = "" if ok else "point verdict disagrees with the closed-form conditions"
    if observed:
        # improper relative sphere: y = L = const and q / q_AFF = const
        dev, ratios = 0.0, []
        for u in run.us:
            for v in run.vs:
                pt = run.surface.point(u, v)
                fr = run.surface.frame_at(u)
                rs = relative_normal(pt, fr, run.inv, run.q)
                L = sample(run.surface, run.q, u, v).L
                dev = max(dev, float(np.linalg.norm(rs.y - L)))
                ratios.append(rs.q.value / equiaffine_support(pt))
        ratios = np.array(ratios)
        spread = float((ratios.max() - ratios.min()) / np.max(np.abs(ratios)))
        centre = np.mean(np.array(rep.gamma_samples), axis=0)
        measured.update(
            relative_normal_minus_L=dev / run.scale,
            q_over_qaff_spread=spread,
            point=[float(c) for c in centre],
        )
        if dev / run.scale > run.tol["classify"] or spread > run.tol["classify"]:
            ok, msg = False, "image is a point but y != L or q is not a multiple of q_AFF"
    return CheckResult("prop2", "pass" if ok else "fail", measured, msg)


def check_prop3(run: SceneRun) -> CheckResult:
    rep = run.classification
    observed = rep.verdict != "surface"
    r_line = max(line_delta_residual(eval_jet3(run.inv.delta, u, run.inv.constants)) for u in run.us)
    line_family = r_line <= run.tol["closed_form"]
    predicted = run.conoidal and (run.has_support_form or line_family)
    measured = {"verdict": rep.verdict, "line_delta_residual": r_line, "predicted_curve": predicted}
    problems = []
    if observed != predicted:
        problems.append("curve verdict disagrees with the closed-form conditions")
    if rep.verdict == "space-curve":
        problems.append("Gamma is not planar")
    if predicted and line_family and rep.verdict not in ("point", "straight-line"):
        problems.append("delta satisfies 2 d d'' - 3 d'^2 - 4 d^2 = 0 but Gamma is not a line")
    return CheckResult("prop3", "fail" if problems else "pass", measured, "; ".join(problems))


def _skip_image(name: str, run: SceneRun) -> Optional[CheckResult]:
    if run.image_applicable:
        return None
    reason = "needs kappa != 0 on the grid and a conoidal-form support q = f/w"
    return CheckResult(name, "skip", {}, reason)


def check_prop4_result(run: SceneRun) -> CheckResult:
    skip = _skip_image("prop4", run)
    if skip:
        return skip
    rep = check_prop4(run.surface, run.q.f, run.us, run.tol["closed_form"])
    measured = {
        "parallel_everywhere": bool(rep.parallel.all()),
        "orthogonal_everywhere": bool(rep.orthogonal.all()),
        "max_sin_angle": float(rep.parallel_residual.max()),
        "min_sin_angle": float(rep.parallel_residual.min()),
        "max_cos_angle": float(rep.orthogonal_residual.max()),
        "min_cos_angle": float(rep.orthogonal_residual.min()),
    }
    return CheckResult("prop4", "pass" if rep.ok else "fail", measured, "; ".join(rep.mismatches[:5]))


def check_prop5_result(run: SceneRun) -> CheckResult:
    skip = _skip_image("prop5", run)
    if skip:
        return skip
    rep = check_prop5(run.surface, run.q.f, run.us)
    measured = {
        "coincide": rep.coincide,
        "ratio_constant": rep.condition,
        "max_distance": rep.distance,
        "max_ratio_derivative": rep.ratio_derivative,
    }
    msg = "" if rep.ok else "directrix/striction coincidence disagrees with f/delta = const"
    return CheckResult("prop5", "pass" if rep.ok else "fail", measured, msg)


def check_prop6_result(run: SceneRun) -> CheckResult:
    skip = _skip_image("prop6", run)
    if skip:
        return skip
    rep = check_prop6(run.surface, run.q.f, run.tol["closed_form"], run.tol["geometric"])
    measured = {}
    for name, c in rep.checks.items():
        measured[name] = {
            "holds": c.holds,
            "closed_form": c.closed_form,
            "closed_residual": c.closed_residual,
            "geometric": c.geometric,
            "geometric_residual": c.geometric_residual,
        }
    msg = "" if rep.ok else "routes disagree on: " + ", ".join(rep.mismatches)
    return CheckResult("prop6", "pass" if rep.ok else "fail", measured, msg)


def oracle_points(cfg: SceneConfig, count: int = 5) -> list[tuple[float, float]]:
    span = cfg.u_max - cfg.u_min
    margin = max(20 * cfg.tolerances["fd_step"], 0.05 * span)
    us = np.linspace(cfg.u_min + margin, cfg.u_max - margin, count)
    vs = np.linspace(cfg.v_min, cfg.v_max, count)
    return [(float(u), float(v)) for u in us for v in vs]


def check_oracle(run: SceneRun) -> CheckResult:
    richardson = bool(run.tol["richardson"])
    ocfg = OracleConfig(fd_step=run.tol["fd_step"], richardson=richardson)
    bound = run.tol["oracle"] if richardson else run.tol["oracle_plain"]
    worst, worst_z = 0.0, 0.0
    points = oracle_points(run.cfg)
    for u, v in points:
        L = sample(run.surface, run.q, u, v).L
        O = laplacian_oracle(run.surface, run.q, u, v, ocfg)
        worst = max(worst, float(np.linalg.norm(O - L)) / (1.0 + float(np.linalg.norm(L))))
        worst_z = max(worst_z, abs(float(O @ run.surface.frame_at(u).z)))
    measured = {
        "points": len(points),
        "richardson": richardson,
        "max_relative_deviation": worst,
        "bound": bound,
        "max_abs_z_component": worst_z,
    }
    ok = worst <= bound
    return CheckResult("oracle", "pass" if ok else "fail", measured, "" if ok else "oracle deviates from the closed form")


def gamma_straightness(run: SceneRun) -> dict:
    f = run.q.f if run.q.kind == "conoidal" else None
    if f is None or not run.conoidal:
        raise ValueError("gamma straightness needs kappa = 0 and a conoidal-form support")
    ks = [gamma_curvature(run.inv, f, u) for u in run.us]
    gamma = [sample(run.surface, run.q, u, 0.0).L for u in run.us]
    line_res, direction = fit_line(gamma)
    return {"max_curvature": float(max(ks)), "line_residual": line_res}


def check_examples(run: SceneRun) -> CheckResult:
    exp = run.cfg.expect
    if not exp:
        return CheckResult("examples", "skip", {}, "scene has no expectations")
    measured, problems = {}, []
    if "verdict" in exp:
        got = run.classification.verdict
        measured["verdict"] = got
        if got != exp["verdict"]:
            problems.append(f"verdict {got} != expected {exp['verdict']}")
    if "point" in exp:
        rep = run.classification
        if rep.gamma_samples is None:
            problems.append("no point: image is 2-dimensional")
        else:
            centre = np.mean(np.array(rep.gamma_samples), axis=0)
            dev = float(np.linalg.norm(centre - np.asarray(exp["point"], dtype=float)))
            measured["point_deviation"] = dev
            if dev > 1e-6:
                problems.append(f"point deviates from {exp['point']} by {dev:.3g}")
    if "gamma_straight" in exp:
        g = gamma_straightness(run)
        measured.update(gamma_max_curvature=g["max_curvature"], gamma_line_residual=g["line_residual"])
        straight = g["max_curvature"] <= run.tol["gamma"] and g["line_residual"] <= run.tol["gamma"]
        if straight != bool(exp["gamma_straight"]):
            problems.append(f"Gamma straight = {straight}, expected {exp['gamma_straight']}")
    if "prop4" in exp:
        rep = check_prop4(run.surface, run.q.f, run.us, run.tol["closed_form"])
        got = {"parallel": bool(rep.parallel.all()), "orthogonal": bool(rep.orthogonal.all())}
        measured["prop4"] = got
        for key, want in exp["prop4"].items():
            if got[key] != bool(want):
                problems.append(f"prop4 {key} = {got[key]}, expected {want}")
    if "prop5" in exp:
        rep = check_prop5(run.surface, run.q.f, run.us)
        measured["prop5"] = rep.coincide
        if rep.coincide != bool(exp["prop5"]):
            problems.append(f"prop5 coincide = {rep.coincide}, expected {exp['prop5']}")
    if "prop6" in exp:
        rep = check_prop6(run.surface, run.q.f, run.tol["closed_form"], run.tol["geometric"])
        got = {name: rep[name].holds for name in exp["prop6"]}
        measured["prop6"] = got
        for key, want in exp["prop6"].items():
            if got[key] != bool(want):
                problems.append(f"prop6 {key} = {got[key]}, expected {want}")
    if "kappa_star_equals_lambda_star" in exp:
        worst = 0.0
        for u in run.us:
            _, inv_star = image_surface(run.inv, run.q.f, run.surface.frame_at(u))
            worst = max(worst, abs(inv_star.kappa_star - inv_star.lambda_star))
        measured["max_abs_kappa_star_minus_lambda_star"] = worst
        holds = worst <= run.tol["closed_form"]
        if holds != bool(exp["kappa_star_equals_lambda_star"]):
            problems.append(f"kappa* = lambda* holds = {holds}, expected {exp['kappa_star_equals_lambda_star']}")
    return CheckResult("examples", "fail" if problems else "pass", measured, "; ".join(problems))


CHECKS = {
    "prop1": check_prop1,
    "prop2": check_prop2,
    "prop3": check_prop3,
    "prop4": check_prop4_result,
    "prop5": check_prop5_result,
    "prop6": check_prop6_result,
    "oracle": check_oracle,
    "examples": check_examples,
}


def image_segments(run: SceneRun) -> list[dict]:
    if not run.image_applicable:
        return []
    return [
        {
            "u_range": [s.u_start, s.u_end],
            "sign": s.sign,
            "delta_star": list(s.delta_star),
            "kappa_star": list(s.kappa_star),
            "lambda_star": list(s.lambda_star),
        }
        for s in segment_invariants(run.inv, run.q.f, run.us)
    ]


# --- random configurations ---------------------------------------------------------


def random_config(rng: np.random.Generator, name: str = "random") -> SceneConfig:
    """A smooth skew surface with a nonvanishing general support function."""

    def c(lo, hi):
        return float(rng.uniform(lo, hi))

    d0 = c(0.5, 2.0) * (1 if rng.random() < 0.7 else -1)
    doc = {
        "name": name,
        "invariants": {
            "kappa": f"{c(-1, 1):.6f} + {c(-0.5, 0.5):.6f}*sin({c(0.5, 2):.6f}*u)",
            "delta": f"{d0:.6f}*(1 + {c(-0.4, 0.4):.6f}*cos({c(0.5, 2):.6f}*u))",
            "lambda": f"{c(-1, 1):.6f} + {c(-0.5, 0.5):.6f}*u",
        },
        "support": {
            "kind": "general",
            "q": (
                f"({c(0.8, 1.5):.6f} + {c(-0.3, 0.3):.6f}*sin(u + {c(0, 3):.6f})"
                f" + {c(-0.3, 0.3):.6f}*v/(1 + v^2))*w^({c(-1.0, 0.5):.6f})"
            ),
        },
        "constants": {},
        "domain": {"u_min": 0.0, "u_max": 1.0, "v_min": -2.0, "v_max": 2.0, "nu": 5, "nv": 5},
        "seed": 0,
    }
    return SceneConfig.from_dict(doc)
