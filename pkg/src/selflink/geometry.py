"""Closed space curves on the parameter circle [0, 1) and their Frenet apparatus.

Built-in analytic kinds are compiled to a finite trigonometric polynomial

    gamma(t) = offset + sum_k amp_k * cos(2*pi*freq_k*t + phase_k)

so every derivative is exact.  Sampled curves are periodic cubic splines
through uniformly spaced samples.

Parametrizations (t in [0, 1)):

* ``circle``: ``center + radius*(cos(2 pi t) u + sin(2 pi t) v)`` with params
  ``radius`` (1), ``cx, cy, cz`` (0), ``ux, uy, uz`` (1, 0, 0), ``vx, vy, vz`` (0, 1, 0).
* ``torus_knot``: ``((R + r cos 2 pi q t) cos 2 pi p t, (R + r cos 2 pi q t) sin 2 pi p t,
  r sin 2 pi q t)`` with params ``p, q, R, r``.
* ``perturbed_circle``: a circle plus the perturbation below (``amplitude`` required).

Every analytic kind accepts the additive perturbation
``amplitude * sin(2 pi mode t + phase) * axis`` (params ``amplitude``, ``mode``,
``phase``, ``axis_x, axis_y, axis_z``; axis defaults to (0, 0, 1), normalized).
Every kind accepts the reparametrization params ``shift`` (t -> t + shift),
``orientation`` (+1 or -1, t -> -t) and ``mirror`` (1 negates z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import FrameUndefined, InvalidCurve, TorsionUndefined

KINDS = ("circle", "torus_knot", "perturbed_circle", "sampled")
TWO_PI = 2.0 * math.pi
TORSION_TOL = 1e-9

_PERTURBATION_KEYS = {"amplitude", "mode", "phase", "axis_x", "axis_y", "axis_z"}
_TRANSFORM_KEYS = {"shift", "orientation", "mirror"}
_ALLOWED = {
    "circle": {"radius", "cx", "cy", "cz", "ux", "uy", "uz", "vx", "vy", "vz"},
    "torus_knot": {"p", "q", "R", "r"},
    "perturbed_circle": {"radius", "cx", "cy", "cz", "ux", "uy", "uz", "vx", "vy", "vz"},
    "sampled": set(),
}


@dataclass(frozen=True)
class _TrigPoly:
    offset: np.ndarray  # (3,)
    amps: np.ndarray  # (K, 3)
    freqs: np.ndarray  # (K,)
    phases: np.ndarray  # (K,)

    def derivative(self, t: np.ndarray, order: int) -> np.ndarray:
        omega = TWO_PI * self.freqs
        arg = np.multiply.outer(t, omega) + self.phases + order * (math.pi / 2)
        out = (np.cos(arg) * omega**order) @ self.amps
        if order == 0:
            out = out + self.offset
        return out


@dataclass(frozen=True, eq=False)
class CurveSpec:
    """A closed curve: ``kind`` plus named real ``params`` (and ``samples`` for sampled curves)."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidCurve(f"unknown curve kind {self.kind!r}; expected one of {KINDS}")
        params = {str(k): float(v) for k, v in dict(self.params).items()}
        allowed = _ALLOWED[self.kind] | _TRANSFORM_KEYS
        if self.kind != "sampled":
            allowed = allowed | _PERTURBATION_KEYS
        unknown = set(params) - allowed
        if unknown:
            raise InvalidCurve(f"unknown params for {self.kind}: {sorted(unknown)}")
        if params.get("orientation", 1.0) not in (1.0, -1.0):
            raise InvalidCurve("orientation must be +1 or -1")
        if params.get("mirror", 0.0) not in (0.0, 1.0):
            raise InvalidCurve("mirror must be 0 or 1")
        object.__setattr__(self, "params", params)

        if self.kind == "sampled":
            if self.samples is None:
                raise InvalidCurve("sampled curve needs samples")
            pts = np.array(self.samples, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 8:
                raise InvalidCurve("samples must be an (N, 3) array with N >= 8")
            if not np.all(np.isfinite(pts)):
                raise InvalidCurve("samples must be finite")
            pts.setflags(write=False)
            object.__setattr__(self, "samples", pts)
        elif self.samples is not None:
            raise InvalidCurve("samples are only allowed for the sampled kind")
        if self.kind == "torus_knot":
            p, q = params.get("p"), params.get("q")
            R, r = params.get("R"), params.get("r")
            if None in (p, q, R, r):
                raise InvalidCurve("torus_knot needs p, q, R, r")
            if p != int(p) or q != int(q) or p == 0 or q == 0:
                raise InvalidCurve("torus_knot p, q must be nonzero integers")
            if math.gcd(int(p), int(q)) != 1:
                raise InvalidCurve("torus_knot needs gcd(p, q) = 1")
            if not 0 < r < R:
                raise InvalidCurve("torus_knot needs 0 < r < R")
        if self.kind == "perturbed_circle" and "amplitude" not in params:
            raise InvalidCurve("perturbed_circle needs an amplitude")
        if self.kind in ("circle", "perturbed_circle") and params.get("radius", 1.0) <= 0:
            raise InvalidCurve("radius must be positive")

    # -- construction helpers -------------------------------------------------

    def with_params(self, **updates: float) -> "CurveSpec":
        params = dict(self.params)
        params.update(updates)
        return CurveSpec(self.kind, params, self.samples)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": dict(self.params)}
        if self.samples is not None:
            out["samples"] = self.samples.tolist()
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "CurveSpec":
        unknown = set(data) - {"kind", "params", "samples"}
        if unknown:
            raise InvalidCurve(f"unknown curve keys: {sorted(unknown)}")
        if "kind" not in data:
            raise InvalidCurve("curve needs a kind")
        return cls(data["kind"], data.get("params", {}), data.get("samples"))

    # -- internal evaluation --------------------------------------------------

    @cached_property
    def _trig(self) -> _TrigPoly:
        P = self.params
        amps, freqs, phases = [], [], []
        offset = np.zeros(3)

        def term(vec, f, ph):
            amps.append(np.asarray(vec, dtype=float))
            freqs.append(float(f))
            phases.append(float(ph))

        if self.kind in ("circle", "perturbed_circle"):
            rad = P.get("radius", 1.0)
            offset = np.array([P.get("cx", 0.0), P.get("cy", 0.0), P.get("cz", 0.0)])
            u = np.array([P.get("ux", 1.0), P.get("uy", 0.0), P.get("uz", 0.0)])
            v = np.array([P.get("vx", 0.0), P.get("vy", 1.0), P.get("vz", 0.0)])
            term(rad * u, 1, 0.0)
            term(rad * v, 1, -math.pi / 2)
        elif self.kind == "torus_knot":
            p, q, R, r = P["p"], P["q"], P["R"], P["r"]
            term((R, 0, 0), p, 0.0)
            term((0, R, 0), p, -math.pi / 2)
            for f in (p + q, p - q):
                term((r / 2, 0, 0), f, 0.0)
                term((0, r / 2, 0), f, -math.pi / 2)
            term((0, 0, r), q, -math.pi / 2)
        amp = P.get("amplitude", 0.0)
        if amp != 0.0:
            axis = np.array([P.get("axis_x", 0.0), P.get("axis_y", 0.0), P.get("axis_z", 1.0)])
            norm = np.linalg.norm(axis)
            if norm == 0:
                raise InvalidCurve("perturbation axis must be nonzero")
            term(amp * axis / norm, P.get("mode", 1.0), P.get("phase", 0.0) - math.pi / 2)

        amps_a = np.array(amps, dtype=float).reshape(-1, 3)
        freqs_a = np.array(freqs, dtype=float)
        phases_a = np.array(phases, dtype=float)
        o, c = P.get("orientation", 1.0), P.get("shift", 0.0)
        phases_a = phases_a + TWO_PI * o * freqs_a * c
        freqs_a = o * freqs_a
        if P.get("mirror", 0.0) == 1.0:
            amps_a[:, 2] *= -1
            offset = offset * np.array([1.0, 1.0, -1.0])
        return _TrigPoly(offset, amps_a, freqs_a, phases_a)

    @cached_property
    def _spline(self) -> CubicSpline:
        pts = self.samples
        n = len(pts)
        knots = np.arange(n + 1) / n
        closed = np.vstack([pts, pts[:1]])
        return CubicSpline(knots, closed, axis=0, bc_type="periodic")

    def _sampled_derivative(self, t: np.ndarray, order: int) -> np.ndarray:
        P = self.params
        o, c = P.get("orientation", 1.0), P.get("shift", 0.0)
        teff = np.mod(o * (t + c), 1.0)
        out = self._spline(teff, order) * (o**order)
        if P.get("mirror", 0.0) == 1.0:
            out = out * np.array([1.0, 1.0, -1.0])
        return out

    def derivative_array(self, t, order: int) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "sampled":
            return self._sampled_derivative(t, order)
        return self._trig.derivative(t, order)


def evaluate(curve: CurveSpec, t) -> np.ndarray:
    """Position gamma(t); ``t`` may be a scalar or an array (result has trailing axis 3)."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("parameter must be finite")
    return curve.derivative_array(np.mod(t, 1.0), 0)


def derivative(curve: CurveSpec, t, order: int = 1) -> np.ndarray:
    """d^order gamma / dt^order (parameter derivative, not arclength)."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    t = np.asarray(t, dtype=float)
    return curve.derivative_array(np.mod(t, 1.0), order)


def _norm(v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(v, axis=-1)


def curvature(curve: CurveSpec, t) -> np.ndarray:
    d1, d2 = derivative(curve, t, 1), derivative(curve, t, 2)
    speed = _norm(d1)
    if np.any(speed <= 1e-9):
        raise FrameUndefined("curve is singular (zero speed)")
    return _norm(np.cross(d1, d2)) / speed**3


def torsion(curve: CurveSpec, t) -> np.ndarray:
    d1, d2, d3 = (derivative(curve, t, k) for k in (1, 2, 3))
    c = np.cross(d1, d2)
    cn2 = np.sum(c * c, axis=-1)
    if np.any(np.sqrt(cn2) < TORSION_TOL):
        raise TorsionUndefined("torsion undefined where curvature vanishes")
    return np.sum(c * d3, axis=-1) / cn2


@dataclass(frozen=True)
class FrameTriple:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    def check(self, tol: float = 1e-10) -> bool:
        vecs = (self.e1, self.e2, self.e3)
        unit = all(np.all(np.abs(_norm(e) - 1) <= tol) for e in vecs)
        orth = all(
            np.all(np.abs(np.sum(a * b, axis=-1)) < tol)
            for a, b in ((self.e1, self.e2), (self.e1, self.e3), (self.e2, self.e3))
        )
        det = np.sum(np.cross(self.e1, self.e2) * self.e3, axis=-1)
        return bool(unit and orth and np.all(det > 0))


def unit_tangent(curve: CurveSpec, t) -> np.ndarray:
    d1 = derivative(curve, t, 1)
    return d1 / _norm(d1)[..., None]


def frenet_frame(curve: CurveSpec, t) -> FrameTriple:
    d1, d2 = derivative(curve, t, 1), derivative(curve, t, 2)
    e1 = d1 / _norm(d1)[..., None]
    perp = d2 - np.sum(d2 * e1, axis=-1)[..., None] * e1
    pn = _norm(perp)
    if np.any(_norm(np.cross(d1, d2)) < TORSION_TOL):
        raise FrameUndefined("Frenet frame undefined where curvature vanishes")
    e2 = perp / pn[..., None]
    return FrameTriple(e1, e2, np.cross(e1, e2))


def grid(n: int) -> np.ndarray:
    return np.arange(n) / n


def arclength(curve: CurveSpec, n_samples: int = 1024) -> float:
    """Length by the periodic trapezoid rule on ``n_samples`` uniform points."""
    if n_samples < 16:
        raise ValueError("n_samples must be >= 16")
    return float(np.mean(_norm(derivative(curve, grid(n_samples), 1))))


def diameter(curve: CurveSpec, n_samples: int = 256) -> float:
    pts = evaluate(curve, grid(n_samples))
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))


def min_nonadjacent_distance(curve: CurveSpec, n: int) -> float:
    """Smallest distance between samples i, j with cyclic index gap >= 2."""
    pts = evaluate(curve, grid(n))
    best = np.inf
    idx = np.arange(n)
    for i0 in range(0, n, 256):
        block = pts[i0 : i0 + 256]
        d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        gap = np.abs(idx[i0 : i0 + 256, None] - idx[None, :])
        gap = np.minimum(gap, n - gap)
        d2[gap < 2] = np.inf
        best = min(best, float(d2.min()))
    return math.sqrt(best)


def self_distance(curve: CurveSpec, n: int = 512, candidates: int = 16) -> float:
    """Distance of closest approach between non-neighbouring arcs of the curve.

    The sample scan of :func:`min_nonadjacent_distance` only sees a transverse
    self-crossing to within a grid spacing, so the closest sample pairs are
    refined by Gauss-Newton on gamma(s) - gamma(t) = 0.
    """
    t = grid(n)
    pts = evaluate(curve, t)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    gap = np.minimum(gap, n - gap)
    d2[gap < 4] = np.inf
    cols = np.argmin(d2, axis=1)
    rows = np.argsort(d2[idx, cols])[:candidates]
    best = math.sqrt(float(d2[rows[0], cols[rows[0]]]))
    h = 1.0 / n
    for i in rows:
        s0, t0 = t[i], t[cols[i]]
        s_, t_ = s0, t0
        for _ in range(30):
            r = evaluate(curve, s_) - evaluate(curve, t_)
            J = np.column_stack([derivative(curve, s_, 1), -derivative(curve, t_, 1)])
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
            step = np.clip(step, -h, h)
            s_, t_ = s_ + step[0], t_ + step[1]
            if np.max(np.abs(step)) < 1e-14:
                break
        sep = abs((s_ - t_ + 0.5) % 1.0 - 0.5)
        if sep >= 2 * h and abs((s_ - s0 + 0.5) % 1.0 - 0.5) <= 4 * h:
            best = min(best, float(np.linalg.norm(evaluate(curve, s_) - evaluate(curve, t_))))
    return best


# Convenience constructors


def circle(radius: float = 1.0, **params: float) -> CurveSpec:
    return CurveSpec("circle", {"radius": radius, **params})


def torus_knot(p: int, q: int, R: float, r: float, **params: float) -> CurveSpec:
    return CurveSpec("torus_knot", {"p": p, "q": q, "R": R, "r": r, **params})


def sampled(points, **params: float) -> CurveSpec:
    return CurveSpec("sampled", params, np.asarray(points, dtype=float))


def shifted(curve: CurveSpec, c: float) -> CurveSpec:
    return curve.with_params(shift=curve.params.get("shift", 0.0) + c)


def reversed_curve(curve: CurveSpec) -> CurveSpec:
    # t -> -t composed with any existing shift: o' = -o, shift' = -shift keeps the same point set
    o = curve.params.get("orientation", 1.0)
    return curve.with_params(orientation=-o, shift=-curve.params.get("shift", 0.0))


def mirrored(curve: CurveSpec) -> CurveSpec:
    return curve.with_params(mirror=1.0 - curve.params.get("mirror", 0.0))
