"""Unit-normal framings of closed curves: twist, total torsion, pushoffs and SO(3) lift class.

A framing evaluates to the normal field n(t) and its parameter derivative
n'(t).  All kinds other than ``frenet`` are obtained by projecting some
generator field a(t) onto the normal plane and normalizing; the derivative is
carried through that projection by the chain rule, so it is analytic for
``projection`` and ``twisted`` framings and spectral for ``sampled`` ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.spatial.transform import Rotation

from . import geometry as geo
from .errors import (
    CurvatureVanishes,
    DirectionDegenerate,
    LiftAmbiguous,
    PushoffCollision,
)
from .geometry import TWO_PI, CurveSpec

FRAMING_KINDS = ("frenet", "projection", "twisted", "sampled")
SCAN_N = 1024
KAPPA_MIN = 1e-6
DIRECTION_MIN = 1e-6


@dataclass(frozen=True, eq=False)
class Framing:
    """A unit normal field along ``base``.

    ``twisted`` framings wrap ``inner`` and rotate it ``twists`` full turns about
    the tangent.  ``sampled`` framings hold unit normals at t = i/N.
    """

    base: CurveSpec
    kind: str
    direction: np.ndarray | None = None
    twists: int = 0
    inner: "Framing | None" = None
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in FRAMING_KINDS:
            raise ValueError(f"unknown framing kind {self.kind!r}")
        if self.kind == "projection":
            d = np.asarray(self.direction, dtype=float)
            nd = np.linalg.norm(d)
            if d.shape != (3,) or not np.isfinite(nd) or nd < 1e-12:
                raise ValueError("projection direction must be a nonzero 3-vector")
            object.__setattr__(self, "direction", d / nd)
        if self.kind == "twisted":
            if self.inner is None:
                raise ValueError("twisted framing needs an inner framing")
            if int(self.twists) != self.twists:
                raise ValueError("twist count must be an integer")
            object.__setattr__(self, "twists", int(self.twists))
        if self.kind == "sampled":
            s = np.array(self.samples, dtype=float)
            if s.ndim != 2 or s.shape[1] != 3 or len(s) < 8:
                raise ValueError("sampled framing needs an (N, 3) array of normals")
            s.setflags(write=False)
            object.__setattr__(self, "samples", s)

    def __call__(self, t) -> np.ndarray:
        return normal(self, t)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "projection":
            out["direction"] = self.direction.tolist()
        elif self.kind == "twisted":
            out["twists"] = self.twists
            out["base"] = self.inner.to_json()
        elif self.kind == "sampled":
            out["samples"] = self.samples.tolist()
        return out

    @classmethod
    def from_json(cls, data: Mapping, curve: CurveSpec) -> "Framing":
        kind = data.get("kind")
        allowed = {
            "frenet": {"kind"},
            "projection": {"kind", "direction"},
            "twisted": {"kind", "twists", "base"},
            "sampled": {"kind", "samples"},
        }
        if kind not in allowed:
            raise ValueError(f"unknown framing kind {kind!r}")
        unknown = set(data) - allowed[kind]
        if unknown:
            raise ValueError(f"unknown framing keys: {sorted(unknown)}")
        if kind == "frenet":
            return frenet_framing(curve)
        if kind == "projection":
            if "direction" not in data:
                raise ValueError("projection framing needs a direction")
            return projection_framing(curve, data["direction"])
        if kind == "twisted":
            if "base" not in data or "twists" not in data:
                raise ValueError("twisted framing needs base and twists")
            tw = data["twists"]
            if isinstance(tw, bool) or not isinstance(tw, int):
                raise ValueError("twists must be an integer")
            return add_twists(cls.from_json(data["base"], curve), tw)
        if "samples" not in data:
            raise ValueError("sampled framing needs samples")
        return cls(curve, "sampled", samples=np.asarray(data["samples"], dtype=float))


# -- evaluation ----------------------------------------------------------------


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _tangent_and_rate(curve: CurveSpec, t):
    """Unit tangent and its parameter derivative."""
    d1, d2 = geo.derivative(curve, t, 1), geo.derivative(curve, t, 2)
    speed = np.linalg.norm(d1, axis=-1)[..., None]
    that = d1 / speed
    dthat = (d2 - _dot(d2, that)[..., None] * that) / speed
    return that, dthat


def _project_normalize(a, da, that, dthat):
    """n = normalize(a - (a.T)T) and its derivative, given a, a', T, T'."""
    at = _dot(a, that)[..., None]
    m = a - at * that
    dm = da - (_dot(da, that)[..., None] + _dot(a, dthat)[..., None]) * that - at * dthat
    mn = np.linalg.norm(m, axis=-1)[..., None]
    n = m / mn
    dn = (dm - _dot(n, dm)[..., None] * n) / mn
    return n, dn


def _trig_interp(samples: np.ndarray, t: np.ndarray, order: int) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic uniform samples (or its derivative)."""
    N = len(samples)
    coef = np.fft.rfft(samples, axis=0) / N
    k = np.arange(coef.shape[0], dtype=float)
    weight = np.full(coef.shape[0], 2.0)
    weight[0] = 1.0
    if N % 2 == 0:
        weight[-1] = 1.0  # Nyquist mode counted once (cosine part)
    arg = TWO_PI * np.multiply.outer(np.asarray(t, dtype=float), k)
    ik = (1j * TWO_PI * k) ** order
    basis = np.exp(1j * arg) * ik * weight
    return np.real(basis @ coef)


def normal_and_derivative(framing: Framing, t) -> tuple[np.ndarray, np.ndarray]:
    """n(t) and dn/dt for a framing."""
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    curve = framing.base
    if framing.kind == "frenet":
        d1, d2, d3 = (geo.derivative(curve, t, k) for k in (1, 2, 3))
        speed = np.linalg.norm(d1, axis=-1)
        c = np.cross(d1, d2)
        cn = np.linalg.norm(c, axis=-1)
        that = d1 / speed[..., None]
        b = c / cn[..., None]
        n = np.cross(b, that)
        kappa = cn / speed**3
        tau = _dot(c, d3) / cn**2
        dn = speed[..., None] * (-kappa[..., None] * that + tau[..., None] * b)
        return n, dn
    that, dthat = _tangent_and_rate(curve, t)
    if framing.kind == "projection":
        a = np.broadcast_to(framing.direction, that.shape)
        return _project_normalize(a, np.zeros_like(that), that, dthat)
    if framing.kind == "sampled":
        a = _trig_interp(framing.samples, t, 0)
        da = _trig_interp(framing.samples, t, 1)
        return _project_normalize(a, da, that, dthat)
    n0, dn0 = normal_and_derivative(framing.inner, t)
    theta = TWO_PI * framing.twists * t
    cos, sin = np.cos(theta)[..., None], np.sin(theta)[..., None]
    w = np.cross(that, n0)
    dw = np.cross(dthat, n0) + np.cross(that, dn0)
    n = cos * n0 + sin * w
    dn = TWO_PI * framing.twists * (-sin * n0 + cos * w) + cos * dn0 + sin * dw
    return n, dn


def normal(framing: Framing, t) -> np.ndarray:
    return normal_and_derivative(framing, t)[0]


def frame_matrices(framing: Framing, t) -> np.ndarray:
    """Rotation matrices with columns (T, n, T x n)."""
    that = geo.unit_tangent(framing.base, t)
    n = normal(framing, t)
    return np.stack([that, n, np.cross(that, n)], axis=-1)


# -- constructors ----------------------------------------------------------------


def _check_curvature(curve: CurveSpec, n_scan: int = SCAN_N) -> None:
    t = geo.grid(n_scan)
    d1, d2 = geo.derivative(curve, t, 1), geo.derivative(curve, t, 2)
    speed = np.linalg.norm(d1, axis=-1)
    cn = np.linalg.norm(np.cross(d1, d2), axis=-1)
    kappa = cn / speed**3
    bad = np.flatnonzero(kappa <= KAPPA_MIN)
    # A sign flip of the principal normal between neighbours means kappa crossed zero in between.
    perp = d2 - _dot(d2, d1 / speed[..., None])[..., None] * d1 / speed[..., None]
    flips = np.flatnonzero(_dot(perp, np.roll(perp, -1, axis=0)) < 0)
    hits = np.union1d(bad, flips)
    if hits.size:
        raise CurvatureVanishes(t[hits[0]])


def frenet_framing(curve: CurveSpec) -> Framing:
    _check_curvature(curve)
    return Framing(curve, "frenet")


def projection_framing(curve: CurveSpec, direction) -> Framing:
    d = np.asarray(direction, dtype=float)
    nd = np.linalg.norm(d)
    if d.shape != (3,) or not np.isfinite(nd) or nd < 1e-12:
        raise ValueError("direction must be a nonzero finite 3-vector")
    d = d / nd
    t = geo.grid(SCAN_N)
    that = geo.unit_tangent(curve, t)
    sines = np.linalg.norm(np.cross(d, that), axis=-1)
    bad = np.flatnonzero(sines <= DIRECTION_MIN)
    if bad.size:
        raise DirectionDegenerate(t[bad[0]])
    return Framing(curve, "projection", direction=d)


def add_twists(framing: Framing, k: int) -> Framing:
    """Rotate the normal ``k`` full turns about the tangent (right-handed for k > 0)."""
    k = int(k)
    if k == 0:
        return framing
    if framing.kind == "twisted":
        total = framing.twists + k
        return framing.inner if total == 0 else Framing(framing.base, "twisted", twists=total, inner=framing.inner)
    return Framing(framing.base, "twisted", twists=k, inner=framing)


def sampled_framing(curve: CurveSpec, normals) -> Framing:
    return Framing(curve, "sampled", samples=np.asarray(normals, dtype=float))


def reframe(framing: Framing, curve: CurveSpec) -> Framing:
    """The same framing rule applied to another curve (samples are reused as generators)."""
    if framing.kind == "frenet":
        return frenet_framing(curve)
    if framing.kind == "projection":
        return projection_framing(curve, framing.direction)
    if framing.kind == "sampled":
        return sampled_framing(curve, framing.samples)
    return add_twists(reframe(framing.inner, curve), framing.twists)


def shift_framing(framing: Framing, c: float) -> Framing:
    """Framing on the curve reparametrized by t -> t + c."""
    curve = geo.shifted(framing.base, c)
    if framing.kind == "sampled":
        N = len(framing.samples)
        return sampled_framing(curve, _trig_interp(framing.samples, geo.grid(N) + c, 0))
    return reframe(framing, curve)


# -- integrals -------------------------------------------------------------------------


def twist_integral(framing: Framing, n_samples: int = 1024) -> float:
    """Twist (1/2pi) * integral of det(T, n, n') dt by the periodic trapezoid rule."""
    if n_samples < 64:
        raise ValueError("n_samples must be >= 64")
    t = geo.grid(n_samples)
    that = geo.unit_tangent(framing.base, t)
    n, dn = normal_and_derivative(framing, t)
    integrand = _dot(np.cross(that, n), dn)
    return float(np.mean(integrand) / TWO_PI)


def total_torsion(curve: CurveSpec, n_samples: int = 1024) -> float:
    """(1/2pi) * integral of torsion * |gamma'| dt."""
    _check_curvature(curve)
    t = geo.grid(n_samples)
    speed = np.linalg.norm(geo.derivative(curve, t, 1), axis=-1)
    return float(np.mean(geo.torsion(curve, t) * speed) / TWO_PI)


# -- pushoff ---------------------------------------------------------------------------


def pushoff(curve: CurveSpec, framing: Framing, epsilon: float, n: int = 1024) -> CurveSpec:
    """Sampled curve gamma + epsilon * n at ``n`` uniform parameters."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    t = geo.grid(n)
    base = geo.evaluate(curve, t)
    pts = base + epsilon * normal(framing, t)
    for i0 in range(0, n, 256):
        blk = pts[i0 : i0 + 256]
        d2 = np.sum((blk[:, None, :] - base[None, :, :]) ** 2, axis=-1)
        if np.sqrt(d2.min()) <= epsilon / 2:
            raise PushoffCollision(f"pushoff at epsilon={epsilon:g} comes within epsilon/2 of the curve")
    return geo.sampled(pts)


# -- SO(3) lift -------------------------------------------------------------------------


def _lift(mats: np.ndarray) -> tuple[np.ndarray, float]:
    """Sign-continuous unit quaternions along a closed loop of rotations.

    Returns the lifted quaternions (N + 1 of them: the last one closes the loop
    at t = 1) and the largest rotation angle between consecutive frames.
    """
    q = Rotation.from_matrix(mats).as_quat()
    q = np.vstack([q, q[:1]])
    dots = np.abs(np.sum(q[1:] * q[:-1], axis=1))
    max_angle = float(2 * np.arccos(np.clip(dots.min(), -1.0, 1.0)))
    for i in range(1, len(q)):
        if np.dot(q[i - 1], q[i]) < 0:
            q[i] = -q[i]
    return q, max_angle


def so3_lift_class(framing: Framing, n_samples: int = 1024, max_samples: int = 16384) -> str:
    """Homotopy class of the frame loop t -> (T, n, T x n) in pi_1(SO(3)) = Z/2.

    ``trivial`` if the loop lifts to a closed loop of unit quaternions,
    ``nontrivial`` if the lift ends at minus its start.
    """
    n = n_samples
    while True:
        mats = frame_matrices(framing, geo.grid(n))
        q, max_angle = _lift(mats)
        if max_angle < math.pi / 2:
            if np.linalg.norm(q[-1] - q[0]) < 0.5:
                return "trivial"
            if np.linalg.norm(q[-1] + q[0]) < 0.5:
                return "nontrivial"
        if n * 2 > max_samples:
            raise LiftAmbiguous(f"no consistent lift with {n} samples")
        n *= 2

