"""Planar diagrams of closed curves: signed crossings, diagram writhe, linking, cross-tangents.

Crossings are first located on the projected polylines, then refined on the
exact curves by Newton iteration, so the integers returned do not depend on
the polyline resolution once it resolves every crossing.

Sign convention: looking down the projection axis ``d`` (from +d towards -d),
with in-plane basis (a, b) satisfying a x b = d, a crossing is positive when
the under-strand direction is obtained from the over-strand direction by a
counterclockwise turn of less than pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import (
    CurvatureVanishes,
    DegenerateCrossing,
    DirectionDegenerate,
    NonGenericDirection,
    NonIsolatedZero,
    OddCrossingParity,
    ZeroOnGridLine,
)
from .geometry import CurveSpec

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
MAX_RETRIES = 32
VERTEX_TOL = 1e-9
TANGENT_TOL = 1e-9
HEIGHT_REL = 1e-6
PARAM_TOL = 1e-10


class _NonGeneric(Exception):
    """Raised inside one projection attempt; triggers the next direction."""


@dataclass(frozen=True)
class Crossing:
    s: float
    t: float
    strands: tuple[int, int]
    sign: int
    over: int  # 0: the s-branch is over, 1: the t-branch is over

    def to_json(self) -> dict:
        return {"s": self.s, "t": self.t, "strands": list(self.strands), "sign": self.sign, "over": self.over}


@dataclass(frozen=True, eq=False)
class Diagram:
    direction: np.ndarray
    basis: np.ndarray  # rows a, b
    curves: tuple[CurveSpec, ...]
    strands: tuple[np.ndarray, ...]  # (n, 2) projected points
    heights: tuple[np.ndarray, ...]
    crossings: tuple[Crossing, ...] = field(default_factory=tuple)

    @property
    def writhe(self) -> int:
        return sum(c.sign for c in self.crossings if c.strands[0] == c.strands[1])

    def to_json(self) -> dict:
        return {
            "direction": self.direction.tolist(),
            "crossings": [c.to_json() for c in self.crossings],
            "writhe": self.writhe,
        }


def plane_basis(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    helper = np.eye(3)[int(np.argmin(np.abs(d)))]
    a = helper - np.dot(helper, d) * d
    a /= np.linalg.norm(a)
    return np.array([a, np.cross(d, a)])


def _unit(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float).reshape(-1)
    nd = np.linalg.norm(d)
    if d.shape != (3,) or not np.isfinite(nd) or nd < 1e-12:
        raise ValueError("direction must be a nonzero finite 3-vector")
    return d / nd


def retry_directions(direction, count: int = MAX_RETRIES) -> list[np.ndarray]:
    """The deterministic perturbation schedule tried when a direction is not generic."""
    d = _unit(direction)
    a, b = plane_basis(d)
    out = [d]
    for k in range(1, count + 1):
        ang = k * GOLDEN_ANGLE
        v = d + 1e-3 * math.sqrt(k) * (math.cos(ang) * a + math.sin(ang) * b)
        out.append(v / np.linalg.norm(v))
    return out


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _segment_hits(P, Q, same: bool):
    """Index/fraction pairs (i, lam, j, mu) where segment i of P crosses segment j of Q."""
    n, m = len(P), len(Q)
    eP = np.roll(P, -1, axis=0) - P
    eQ = np.roll(Q, -1, axis=0) - Q
    hits = []
    for i0 in range(0, n, 128):
        rows = np.arange(i0, min(i0 + 128, n))
        w = Q[None, :, :] - P[rows, None, :]
        den = _cross2(eP[rows, None, :], eQ[None, :, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = _cross2(w, eQ[None, :, :]) / den
            mu = _cross2(w, eP[rows, None, :]) / den
        ok = (den != 0) & (lam >= 0) & (lam < 1) & (mu >= 0) & (mu < 1)
        if same:
            j = np.arange(m)[None, :]
            gap = (j - rows[:, None]) % n
            ok &= (gap >= 2) & (gap <= n - 2) & (j > rows[:, None])
        ii, jj = np.nonzero(ok)
        for a, b in zip(ii, jj):
            hits.append((int(rows[a]), float(lam[a, b]), int(b), float(mu[a, b])))
    return hits


def _refine(c0, c1, basis, s, t):
    """Newton solve of proj(c0(s)) = proj(c1(t)) on the exact curves."""
    for _ in range(60):
        F = basis @ (geo.evaluate(c0, s) - geo.evaluate(c1, t))
        J = np.column_stack([basis @ geo.derivative(c0, s, 1), -(basis @ geo.derivative(c1, t, 1))])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise _NonGeneric("singular crossing Jacobian")
        s, t = s + step[0], t + step[1]
        if np.max(np.abs(step)) < 1e-13:
            break
    if np.max(np.abs(step)) > PARAM_TOL:
        raise _NonGeneric("crossing refinement did not converge")
    return s % 1.0, t % 1.0


def _sign(c0, c1, basis, s, t, over):
    u = basis @ geo.derivative(c0, s, 1)
    v = basis @ geo.derivative(c1, t, 1)
    det = _cross2(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    if abs(det) < TANGENT_TOL:
        raise DegenerateCrossing("projected tangents are parallel at the crossing")
    # det(u, v) > 0 means v is counterclockwise from u; u is over iff over == 0.
    return int(np.sign(det)) * (1 if over == 0 else -1)


def _attempt(curves, d, n, include_self, h_min):
    basis = plane_basis(d)
    t = geo.grid(n)
    pts3 = [geo.evaluate(c, t) for c in curves]
    strands = tuple(p @ basis.T for p in pts3)
    heights = tuple(p @ d for p in pts3)
    pairs = []
    if include_self:
        pairs += [(k, k) for k in range(len(curves))]
    pairs += [(k, l) for k in range(len(curves)) for l in range(k + 1, len(curves))]
    crossings = []
    for k, l in pairs:
        for i, lam, j, mu in _segment_hits(strands[k], strands[l], k == l):
            if min(lam, 1 - lam, mu, 1 - mu) < VERTEX_TOL:
                raise _NonGeneric("crossing at a polyline vertex")
            s0, t0 = (i + lam) / n, (j + mu) / n
            s, tt = _refine(curves[k], curves[l], basis, s0, t0)
            ds = abs((s - s0 + 0.5) % 1.0 - 0.5)
            dt = abs((tt - t0 + 0.5) % 1.0 - 0.5)
            if max(ds, dt) > 2.0 / n:
                raise _NonGeneric("refined crossing left its segment pair")
            hs = float(geo.evaluate(curves[k], s) @ d)
            ht = float(geo.evaluate(curves[l], tt) @ d)
            if abs(hs - ht) <= h_min:
                raise _NonGeneric("strands meet in space or nearly so")
            over = 0 if hs > ht else 1
            try:
                sign = _sign(curves[k], curves[l], basis, s, tt, over)
            except DegenerateCrossing as exc:
                raise _NonGeneric(str(exc))
            crossings.append(Crossing(float(s), float(tt), (k, l), sign, over))
    _check_distinct(crossings)
    return Diagram(d, basis, tuple(curves), strands, heights, tuple(crossings))


def _check_distinct(crossings):
    keyed = {}
    for c in crossings:
        keyed.setdefault(c.strands, []).append((c.s, c.t))
    for pts in keyed.values():
        arr = np.array(pts)
        for a in range(len(arr)):
            diff = np.abs((arr[a + 1 :] - arr[a] + 0.5) % 1.0 - 0.5)
            if diff.size and np.any(np.max(diff, axis=1) < 1e-8):
                raise _NonGeneric("two polyline crossings refine to the same point")


def project(curves, direction=(0.0, 0.0, 1.0), n: int = 1024, include_self: bool = True) -> Diagram:
    """Project one or two curves along ``direction`` and collect every signed crossing."""
    if isinstance(curves, CurveSpec):
        curves = [curves]
    curves = list(curves)
    if not 1 <= len(curves) <= 2:
        raise ValueError("a diagram holds one or two curves")
    if n < 256:
        raise ValueError("n must be >= 256")
    diam = max(geo.diameter(c) for c in curves)
    if len(curves) == 2:
        both = geo.sampled(np.vstack([geo.evaluate(c, geo.grid(256)) for c in curves]))
        diam = max(diam, geo.diameter(both, 512))
    h_min = HEIGHT_REL * diam
    attempted = []
    for d in retry_directions(direction):
        attempted.append(d)
        try:
            return _attempt(curves, d, n, include_self, h_min)
        except _NonGeneric:
            continue
    raise NonGenericDirection(f"no generic direction after {MAX_RETRIES} retries", attempted)


def crossing_sign(diagram: Diagram, crossing: Crossing) -> int:
    c0 = diagram.curves[crossing.strands[0]]
    c1 = diagram.curves[crossing.strands[1]]
    return _sign(c0, c1, diagram.basis, crossing.s, crossing.t, crossing.over)


def diagram_writhe(curve: CurveSpec, direction=(0.0, 0.0, 1.0), n: int = 1024) -> int:
    """Sum of crossing signs of the single-curve diagram."""
    return project([curve], direction, n).writhe


def inter_strand_sum(diagram: Diagram) -> int:
    return sum(c.sign for c in diagram.crossings if c.strands[0] != c.strands[1])


def combinatorial_linking(c0: CurveSpec, c1: CurveSpec, direction=(0.0, 0.0, 1.0), n: int = 1024) -> int:
    """Half the signed count of crossings between the two curves."""
    diagram = project([c0, c1], direction, n, include_self=False)
    total = inter_strand_sum(diagram)
    if total % 2:
        raise OddCrossingParity(f"inter-strand crossing sum {total} is odd")
    return total // 2


# -- cross-tangents ---------------------------------------------------------------------


@dataclass(frozen=True)
class CrossTangentResult:
    count: int
    zeros: tuple[tuple[float, float, int], ...]  # (s, t, sign)
    reliable: bool
    n_grid: int

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "zeros": [list(z) for z in self.zeros],
            "reliable": self.reliable,
            "n_grid": self.n_grid,
        }


def _normal_frame(curve: CurveSpec):
    from .framing import frenet_framing, projection_framing

    try:
        return frenet_framing(curve)
    except CurvatureVanishes:
        pass
    for d in retry_directions((0.31, 0.47, 0.83), 8):
        try:
            return projection_framing(curve, d)
        except DirectionDegenerate:
            continue
    raise NonGenericDirection("no smooth normal frame found for the cross-tangent map")


def _reduced_map(curve, framing, s, t, jacobian=False):
    """F(s, t) = (Phi.u(s), Phi.v(s)) and Phi.T(s); optionally the 2x2 Jacobian."""
    from .framing import normal_and_derivative

    ps, pt = geo.evaluate(curve, s), geo.evaluate(curve, t)
    r = pt - ps
    dist = np.linalg.norm(r, axis=-1)[..., None]
    phi = r / dist
    d1 = geo.derivative(curve, s, 1)
    speed = np.linalg.norm(d1, axis=-1)[..., None]
    that = d1 / speed
    u, du = normal_and_derivative(framing, s)
    v = np.cross(that, u)
    F = np.stack([np.sum(phi * u, -1), np.sum(phi * v, -1)], axis=-1)
    forward = np.sum(phi * that, -1)
    if not jacobian:
        return F, forward
    d2 = geo.derivative(curve, s, 2)
    dthat = (d2 - np.sum(d2 * that, -1)[..., None] * that) / speed
    dv = np.cross(dthat, u) + np.cross(that, du)
    gt = geo.derivative(curve, t, 1)
    dphi_dt = (gt - np.sum(phi * gt, -1)[..., None] * phi) / dist
    dphi_ds = -(d1 - np.sum(phi * d1, -1)[..., None] * phi) / dist
    J = np.array(
        [
            [np.dot(dphi_ds, u) + np.dot(phi, du), np.dot(dphi_dt, u)],
            [np.dot(dphi_ds, v) + np.dot(phi, dv), np.dot(dphi_dt, v)],
        ]
    )
    return F, forward, J


def _scan(curve, framing, n, offset):
    g = (np.arange(n) + offset) / n
    S, T = np.meshgrid(g, g, indexing="ij")
    F, fwd = _reduced_map(curve, framing, S.ravel(), np.where(S == T, T + 0.5 / n, T).ravel())
    F = F.reshape(n, n, 2)
    fwd = fwd.reshape(n, n)
    corners = [F, np.roll(F, -1, 0), np.roll(F, -1, 1), np.roll(np.roll(F, -1, 0), -1, 1)]
    stack = np.stack(corners)
    f_ok = np.stack([fwd, np.roll(fwd, -1, 0), np.roll(fwd, -1, 1), np.roll(np.roll(fwd, -1, 0), -1, 1)])
    changes = (stack.min(0) <= 0) & (stack.max(0) >= 0)
    cand = changes[..., 0] & changes[..., 1] & (f_ok.max(0) > 0)
    i = np.arange(n)
    gap = (i[None, :] - i[:, None]) % n
    cand &= (gap >= 2) & (gap <= n - 2)
    return g, np.argwhere(cand)


def cross_tangent_count(curve: CurveSpec, n_grid: int = 256, max_offsets: int = 8) -> CrossTangentResult:
    """Signed count of ordered pairs (s, t) with the tangent at s pointing straight at gamma(t)."""
    if n_grid < 256:
        raise ValueError("n_grid must be >= 256")
    framing = _normal_frame(curve)
    h = 1.0 / n_grid
    for attempt in range(max_offsets):
        offset = (attempt * (math.sqrt(5.0) - 1) / 2) % 1.0
        g, cells = _scan(curve, framing, n_grid, offset)
        zeros: list[tuple[float, float, int]] = []
        reliable = True
        try:
            for ci, cj in cells:
                s, t = g[ci] + 0.5 * h, g[cj] + 0.5 * h
                for _ in range(50):
                    F, fwd, J = _reduced_map(curve, framing, s, t, jacobian=True)
                    try:
                        step = np.linalg.solve(J, -F)
                    except np.linalg.LinAlgError:
                        break
                    s, t = s + step[0], t + step[1]
                    if np.max(np.abs(step)) < 1e-14:
                        break
                F, fwd, J = _reduced_map(curve, framing, s, t, jacobian=True)
                if np.max(np.abs(F)) > 1e-10 or fwd <= 0:
                    continue
                ds = ((s - g[ci]) % 1.0) / h
                dt = ((t - g[cj]) % 1.0) / h
                if not (-1e-9 <= ds <= 1 + 1e-9 and -1e-9 <= dt <= 1 + 1e-9):
                    continue  # converged outside its cell; that cell will report it
                if min(ds, 1 - ds, dt, 1 - dt) < 1e-9:
                    raise ZeroOnGridLine(f"zero at ({s:.12f}, {t:.12f}) lies on a grid line")
                det = float(np.linalg.det(J))
                if abs(det) < 1e-10:
                    reliable = False
                    continue
                s, t = s % 1.0, t % 1.0
                if any(abs((s - a + 0.5) % 1 - 0.5) < 1e-8 and abs((t - b + 0.5) % 1 - 0.5) < 1e-8 for a, b, _ in zeros):
                    continue
                zeros.append((float(s), float(t), 1 if det > 0 else -1))
        except ZeroOnGridLine:
            continue
        zeros.sort()
        return CrossTangentResult(sum(z[2] for z in zeros), tuple(zeros), reliable, n_grid)
    raise NonIsolatedZero("zeros kept landing on grid lines; count unreliable")
