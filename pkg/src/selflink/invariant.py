"""Self-linking number of a framed curve, certified against the pushoff linking number.

sl = writhe + twist is rounded only together with its residual; the
combinatorial linking number of the curve with a small pushoff is the
independent integer it is checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import geometry as geo
from .diagram import combinatorial_linking
from .errors import (
    CurvatureVanishes,
    InvarianceViolated,
    NontrivialClass,
    PushoffCollision,
    ReportFailed,
    SelfIntersection,
)
from .framing import (
    Framing,
    normal,
    pushoff,
    shift_framing,
    so3_lift_class,
    total_torsion,
    twist_integral,
)
from .geometry import CurveSpec
from .quadrature import QuadratureConfig, linking_integral, writhe_integral

SCHEMA_VERSION = 1
ORACLE_DIRECTION = (0.2718, 0.1414, 1.0)
PUSHOFF_SAMPLES = 1024


@dataclass
class SelfLinkReport:
    writhe: float
    twist: float
    total_torsion: float | None
    sl_real: float
    sl: int
    residual: float
    framing_class: str
    quadrature: QuadratureConfig
    writhe_error_estimate: float = 0.0
    oracle_sl: int | None = None
    oracle_agrees: bool | None = None
    epsilon: float | None = None
    status: str = "ok"

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "status": self.status,
            "writhe": self.writhe,
            "writhe_error_estimate": self.writhe_error_estimate,
            "twist": self.twist,
            "total_torsion": self.total_torsion,
            "sl_real": self.sl_real,
            "sl": self.sl,
            "residual": self.residual,
            "framing_class": self.framing_class,
            "oracle_sl": self.oracle_sl,
            "oracle_agrees": self.oracle_agrees,
            "epsilon": self.epsilon,
            "quadrature": self.quadrature.to_json(),
        }


def _twist_n(cfg: QuadratureConfig) -> int:
    return max(cfg.n, 64)


def _maybe_total_torsion(curve: CurveSpec, n: int) -> float | None:
    try:
        return total_torsion(curve, n)
    except CurvatureVanishes:
        return None


def pushoff_linking(curve: CurveSpec, framing: Framing, epsilon: float, direction=ORACLE_DIRECTION, n: int = 1024) -> int:
    return combinatorial_linking(curve, pushoff(curve, framing, epsilon, PUSHOFF_SAMPLES), direction, n)


def auto_epsilon(curve: CurveSpec, framing: Framing, direction=ORACLE_DIRECTION, n: int = 1024, max_halvings: int = 8) -> tuple[float, int]:
    """Start at 1% of the diameter and halve until the pushoff linking number survives one more halving."""
    eps = 0.01 * geo.diameter(curve)
    previous = None
    for _ in range(max_halvings + 1):
        try:
            lk = pushoff_linking(curve, framing, eps, direction, n)
        except PushoffCollision:
            eps /= 2
            previous = None
            continue
        if previous is not None and previous[1] == lk:
            return previous
        previous = (eps, lk)
        eps /= 2
    raise PushoffCollision("pushoff linking number did not stabilize while shrinking epsilon")


def self_link(
    curve: CurveSpec,
    framing: Framing,
    cfg: QuadratureConfig | None = None,
    *,
    oracle: bool = False,
    epsilon: float | str = "auto",
    diagram_n: int = 1024,
    direction=ORACLE_DIRECTION,
    strict: bool = True,
) -> SelfLinkReport:
    """Writhe + twist, rounded with its residual, optionally checked against the pushoff oracle."""
    cfg = cfg or QuadratureConfig()
    wr = writhe_integral(curve, cfg)
    tw = twist_integral(framing, _twist_n(cfg))
    sl_real = wr.value + tw
    sl = int(round(sl_real))
    residual = abs(sl_real - sl)
    report = SelfLinkReport(
        writhe=wr.value,
        twist=tw,
        total_torsion=_maybe_total_torsion(curve, _twist_n(cfg)),
        sl_real=sl_real,
        sl=sl,
        residual=residual,
        framing_class=so3_lift_class(framing),
        quadrature=cfg,
        writhe_error_estimate=wr.error_estimate,
    )
    if oracle:
        if epsilon == "auto":
            eps, lk = auto_epsilon(curve, framing, direction, diagram_n)
        else:
            eps = float(epsilon)
            lk = pushoff_linking(curve, framing, eps, direction, diagram_n)
        report.epsilon = eps
        report.oracle_sl = lk
        report.oracle_agrees = lk == sl
    if residual >= 0.5:
        report.status = "FAILED"
        if strict:
            raise ReportFailed(report)
    return report


def swaddle_correction(framing: Framing, cfg: QuadratureConfig | None = None) -> float:
    """Correction term of a framing whose frame loop lifts to S^3.

    Equal to the twist of the framing; frame loops in the nontrivial class of
    pi_1(SO(3)) admit no such correction and raise NontrivialClass.
    """
    cfg = cfg or QuadratureConfig()
    if so3_lift_class(framing) != "trivial":
        raise NontrivialClass("frame loop is in the nontrivial class of pi_1(SO(3))")
    return twist_integral(framing, _twist_n(cfg))


def verify_calugareanu(
    curve: CurveSpec,
    framing: Framing,
    epsilon: float,
    cfg: QuadratureConfig | None = None,
    *,
    tol: float = 1e-2,
    direction=ORACLE_DIRECTION,
    diagram_n: int = 1024,
) -> dict:
    """Compare writhe + twist, the Gauss integral of (curve, pushoff) and the crossing count.

    Passes when writhe + twist is within ``tol`` of the crossing count and the
    Gauss integral rounds to the same integer.  The Gauss integral of a curve
    and its pushoff is nearly singular at scale epsilon, so its gap is
    reported but only required to round correctly.
    """
    cfg = cfg or QuadratureConfig()
    push = pushoff(curve, framing, epsilon, PUSHOFF_SAMPLES)
    wr = writhe_integral(curve, cfg).value
    tw = twist_integral(framing, _twist_n(cfg))
    analytic = wr + tw
    lk_int = linking_integral(curve, push, cfg).value
    lk = combinatorial_linking(curve, push, direction, diagram_n)
    gaps = {
        "analytic_vs_oracle": abs(analytic - lk),
        "integral_vs_oracle": abs(lk_int - lk),
        "analytic_vs_integral": abs(analytic - lk_int),
    }
    ok = gaps["analytic_vs_oracle"] < tol and int(round(lk_int)) == lk
    return {
        "check": "calugareanu",
        "pass": bool(ok),
        "epsilon": epsilon,
        "n": cfg.n,
        "writhe": wr,
        "twist": tw,
        "writhe_plus_twist": analytic,
        "linking_integral": lk_int,
        "oracle": lk,
        "gaps": gaps,
        "tolerance": tol,
    }


@dataclass(frozen=True)
class IsotopyFamily:
    """gamma_u(t) = gamma(t) + u * amplitude * sin(2 pi mode t + phase) * axis, u in [0, 1]."""

    base: CurveSpec
    mode: int = 2
    amplitude: float = 0.1
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    phase: float = 0.0
    check_u: tuple[float, ...] = field(default=(0.0, 0.25, 0.5, 0.75, 1.0))

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        if not np.linalg.norm(ax) > 0:
            raise ValueError("axis must be nonzero")
        object.__setattr__(self, "axis", tuple(float(x) for x in ax / np.linalg.norm(ax)))

    def curve_at(self, u: float) -> CurveSpec:
        base = self.base
        amp = u * self.amplitude
        plain = base.kind != "sampled" and "amplitude" not in base.params
        plain = plain and all(
            base.params.get(k, dflt) == dflt for k, dflt in (("shift", 0.0), ("orientation", 1.0), ("mirror", 0.0))
        )
        if plain:
            if amp == 0.0:
                return base
            ax = self.axis
            return base.with_params(
                amplitude=amp, mode=self.mode, phase=self.phase, axis_x=ax[0], axis_y=ax[1], axis_z=ax[2]
            )
        t = geo.grid(PUSHOFF_SAMPLES)
        bump = np.sin(2 * math.pi * self.mode * t + self.phase)[:, None] * np.asarray(self.axis)
        return geo.sampled(geo.evaluate(base, t) + amp * bump)

    def validate(self, n: int = 512) -> None:
        for u in self.check_u:
            if geo.self_distance(self.curve_at(u), n) <= 1e-6:
                raise SelfIntersection(f"family member u={u} is not embedded")


FramingRule = Callable[[CurveSpec], Framing]


def framing_rule(spec: Mapping | FramingRule) -> FramingRule:
    """A per-curve framing constructor from a framing JSON object (or a callable, returned as is)."""
    if callable(spec):
        return spec
    return lambda curve: Framing.from_json(spec, curve)


def verify_invariance(
    family: IsotopyFamily,
    rule,
    cfg: QuadratureConfig | None = None,
    u_samples: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
    *,
    raise_on_fail: bool = True,
) -> dict:
    """sl along an isotopy family, with the framing re-derived from ``rule`` at every u."""
    cfg = cfg or QuadratureConfig()
    rule = framing_rule(rule)
    family.validate(cfg.n)
    us = [float(u) for u in u_samples]
    writhes, twists, sls, residuals, framings = [], [], [], [], []
    for u in us:
        curve = family.curve_at(u)
        fr = rule(curve)
        rep = self_link(curve, fr, cfg)
        writhes.append(rep.writhe)
        twists.append(rep.twist)
        sls.append(rep.sl)
        residuals.append(rep.residual)
        framings.append(fr)
    t = geo.grid(256)
    continuity = [
        float(np.min(np.sum(normal(a, t) * normal(b, t), axis=-1))) for a, b in zip(framings, framings[1:])
    ]
    verdict = {
        "check": "invariance",
        "u": us,
        "sl": sls,
        "writhe": writhes,
        "twist": twists,
        "residual": residuals,
        "writhe_spread": max(abs(w - writhes[0]) for w in writhes),
        "twist_spread": max(abs(x - twists[0]) for x in twists),
        "min_normal_overlap": min(continuity) if continuity else 1.0,
        "continuous": all(c > 0 for c in continuity),
    }
    verdict["pass"] = len(set(sls)) == 1 and verdict["continuous"]
    if raise_on_fail and not verdict["pass"]:
        raise InvarianceViolated(f"sl varies along the family: {sls}", verdict)
    return verdict


def reparametrization_check(
    curve: CurveSpec,
    framing: Framing,
    shifts: Sequence[float],
    cfg: QuadratureConfig | None = None,
    *,
    tol: float = 1e-6,
    raise_on_fail: bool = True,
) -> dict:
    """sl, writhe and twist under t -> t + c."""
    cfg = cfg or QuadratureConfig()
    if any(not 0 <= c < 1 for c in shifts):
        raise ValueError("shifts must lie in [0, 1)")
    ref = self_link(curve, framing, cfg)
    rows = []
    for c in shifts:
        fr = shift_framing(framing, c) if c else framing
        rep = self_link(fr.base, fr, cfg)
        rows.append(
            {
                "shift": float(c),
                "sl": rep.sl,
                "writhe_gap": abs(rep.writhe - ref.writhe),
                "twist_gap": abs(rep.twist - ref.twist),
            }
        )
    ok = all(r["sl"] == ref.sl and r["writhe_gap"] < tol and r["twist_gap"] < tol for r in rows)
    verdict = {"check": "reparametrization", "pass": ok, "sl": ref.sl, "shifts": rows, "tolerance": tol}
    if raise_on_fail and not ok:
        raise InvarianceViolated("reparametrization changed the self-linking data", verdict)
    return verdict


def twist_shift_check(curve: CurveSpec, framing: Framing, ks: Sequence[int], cfg: QuadratureConfig | None = None) -> dict:
    """sl(add_twists(f, k)) - sl(f) must equal k exactly."""
    from .framing import add_twists

    cfg = cfg or QuadratureConfig()
    ref = self_link(curve, framing, cfg)
    rows = []
    for k in ks:
        rep = self_link(curve, add_twists(framing, k), cfg)
        rows.append({"k": int(k), "sl": rep.sl, "shift": rep.sl - ref.sl, "twist_shift": rep.twist - ref.twist})
    ok = all(r["shift"] == r["k"] for r in rows)
    return {"check": "twist-shift", "pass": ok, "sl": ref.sl, "rows": rows}


def frenet_check(curve: CurveSpec, n: int = 2048, tol: float = 1e-6) -> dict:
    from .framing import frenet_framing

    tw = twist_integral(frenet_framing(curve), n)
    tt = total_torsion(curve, n)
    return {"check": "frenet", "pass": abs(tw - tt) < tol, "twist": tw, "total_torsion": tt, "gap": abs(tw - tt), "tolerance": tol}


def blackboard_check(curve: CurveSpec, directions, cfg: QuadratureConfig | None = None, diagram_n: int = 1024) -> dict:
    from .diagram import diagram_writhe
    from .framing import projection_framing

    cfg = cfg or QuadratureConfig()
    rows = []
    for d in directions:
        rep = self_link(curve, projection_framing(curve, d), cfg)
        dw = diagram_writhe(curve, d, diagram_n)
        rows.append({"direction": [float(x) for x in d], "sl": rep.sl, "diagram_writhe": dw, "residual": rep.residual})
    return {"check": "blackboard", "pass": all(r["sl"] == r["diagram_writhe"] for r in rows), "rows": rows}

