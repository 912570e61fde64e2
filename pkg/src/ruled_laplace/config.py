"""Scene configuration: one JSON document per experiment."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .expr import ExprError, parse
from .relnorm import SupportField
from .surface import DEFAULT_STEP, InvariantTriple, RuledSurface

DEFAULT_TOLERANCES = {
    "classify": 1e-6,  # relative point / line / plane residuals
    "rank": 1e-6,
    "ruling": 1e-9,  # max |L_v| / max |L| for "constant along rulings"
    "kappa": 1e-12,  # |kappa| below this counts as conoidal
    "closed_form": 1e-8,
    "geometric": 1e-4,
    "gamma": 1e-8,  # max curvature of Gamma for a straight line
    "fd_step": 1e-4,
    "richardson": True,
    "oracle": 1e-6,  # oracle deviation bound (relative to 1 + |L|) with Richardson
    "oracle_plain": 1e-4,  # ... and without
}


class ConfigError(ValueError):
    pass


def builtin_names() -> list[str]:
    root = resources.files("ruled_laplace") / "scenes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _builtin_text(name: str) -> str:
    return (resources.files("ruled_laplace") / "scenes" / f"{name}.json").read_text()


@dataclass
class SceneConfig:
    name: str
    kappa: str
    delta: str
    lam: str
    support_kind: str
    support_expr: str
    constants: dict
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    nu: int
    nv: int
    u0: Optional[float] = None
    step: float = DEFAULT_STEP
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    expect: dict = field(default_factory=dict)
    description: str = ""

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "SceneConfig":
        try:
            inv = doc["invariants"]
            sup = doc["support"]
            dom = doc["domain"]
            kind = sup.get("kind", "general")
            if kind not in ("general", "conoidal"):
                raise ConfigError(f"support.kind must be 'general' or 'conoidal', got {kind!r}")
            expr = sup["f"] if kind == "conoidal" else sup["q"]
            tol = dict(DEFAULT_TOLERANCES)
            tol.update(doc.get("tolerances") or {})
            cfg = cls(
                name=str(doc.get("name", "scene")),
                kappa=str(inv["kappa"]),
                delta=str(inv["delta"]),
                lam=str(inv["lambda"]),
                support_kind=kind,
                support_expr=str(expr),
                constants={k: float(v) for k, v in (doc.get("constants") or {}).items()},
                u_min=float(dom["u_min"]),
                u_max=float(dom["u_max"]),
                v_min=float(dom["v_min"]),
                v_max=float(dom["v_max"]),
                nu=int(dom["nu"]),
                nv=int(dom["nv"]),
                u0=None if dom.get("u0") is None else float(dom["u0"]),
                step=float(dom.get("step", DEFAULT_STEP)),
                tolerances=tol,
                seed=int(doc.get("seed", 0)),
                expect=dict(doc.get("expect") or {}),
                description=str(doc.get("description", "")),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc.args[0]!r}") from None
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        support = {"kind": self.support_kind, ("f" if self.support_kind == "conoidal" else "q"): self.support_expr}
        domain = {
            "u_min": self.u_min,
            "u_max": self.u_max,
            "v_min": self.v_min,
            "v_max": self.v_max,
            "nu": self.nu,
            "nv": self.nv,
            "step": self.step,
        }
        if self.u0 is not None:
            domain["u0"] = self.u0
        return {
            "name": self.name,
            "description": self.description,
            "invariants": {"kappa": self.kappa, "delta": self.delta, "lambda": self.lam},
            "support": support,
            "constants": dict(self.constants),
            "domain": domain,
            "tolerances": dict(self.tolerances),
            "seed": self.seed,
            "expect": dict(self.expect),
        }

    def validate(self) -> None:
        if self.nu < 2 or self.nv < 2:
            raise ConfigError("nu and nv must be at least 2")
        if not self.u_min < self.u_max:
            raise ConfigError("u_min must be below u_max")
        if not self.v_min <= self.v_max:
            raise ConfigError("v_min must not exceed v_max")
        if self.u0 is not None and not self.u_min <= self.u0 <= self.u_max:
            raise ConfigError("u0 must lie in [u_min, u_max]")
        for label, text in (("kappa", self.kappa), ("delta", self.delta), ("lambda", self.lam), ("support", self.support_expr)):
            try:
                parse(text, self.constants)
            except ExprError as exc:
                raise ConfigError(f"{label}: {exc}") from exc

    def with_changes(self, **changes) -> "SceneConfig":
        doc = self.to_dict()
        for key, value in changes.items():
            section, _, sub = key.partition(".")
            if sub:
                doc[section][sub] = value
            else:
                doc[section] = value
        return SceneConfig.from_dict(doc)

    # --- runtime objects ---

    def invariants(self) -> InvariantTriple:
        return InvariantTriple.from_strings(self.kappa, self.delta, self.lam, (self.u_min, self.u_max), self.constants)

    def support(self) -> SupportField:
        if self.support_kind == "conoidal":
            return SupportField.conoidal(self.support_expr, self.constants)
        return SupportField.general(self.support_expr, self.constants)

    def surface(self) -> RuledSurface:
        return RuledSurface(self.invariants(), step=self.step, u0=self.u0)

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(self.u_min, self.u_max, self.nu), np.linspace(self.v_min, self.v_max, self.nv)


def load_config(source: str) -> SceneConfig:
    """Load a scene from a JSON file path or a builtin scene name."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
    elif source in builtin_names():
        text = _builtin_text(source)
    else:
        raise ConfigError(f"no config file or builtin scene named {source!r} (builtins: {', '.join(builtin_names())})")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {source}: {exc}") from exc
    return SceneConfig.from_dict(doc)


def builtin(name: str) -> SceneConfig:
    if name not in builtin_names():
        raise ConfigError(f"unknown builtin scene {name!r}")
    return SceneConfig.from_dict(json.loads(_builtin_text(name)))
