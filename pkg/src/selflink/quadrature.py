"""Gauss linking and writhe double integrals on a uniform periodic grid.

The integrand is the pullback of the normalized area form of S^2 under the
Gauss map, in coordinates

    w(s, t) = det(g0'(s), g1'(t), g0(s) - g1(t)) / |g0(s) - g1(t)|^3

summed by the two-dimensional periodic trapezoid rule.  For the writhe
(g0 = g1) the diagonal cells are set to zero: the integrand extends
continuously to the diagonal with value 0, and the first-order kink there
limits the rule to second-order convergence.

Rows are evaluated in fixed-size blocks.  Each row is reduced on its own and
row sums are accumulated in row order, so the threaded path returns exactly
the same bits as the single-threaded one.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import geometry as geo
from .errors import CoincidentPoints, CurvesIntersect, SelfIntersection
from .geometry import CurveSpec

FOUR_PI = 4.0 * math.pi
ROW_BLOCK = 32
MIN_SEPARATION = 1e-6


@dataclass(frozen=True)
class QuadratureConfig:
    n: int = 512
    diagonal_policy: str = "zero"
    richardson: bool = True
    parallel: bool = False
    threads: int | None = None

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 32 or self.n % 2:
            raise ValueError("quadrature n must be an even integer >= 32")
        if self.diagonal_policy != "zero":
            raise ValueError("only the 'zero' diagonal policy is supported")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be >= 1")

    def with_n(self, n: int) -> "QuadratureConfig":
        return QuadratureConfig(n, self.diagonal_policy, self.richardson, self.parallel, self.threads)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    n_used: int

    def to_json(self) -> dict:
        return asdict(self)


# -- Gauss map ---------------------------------------------------------------------


def gauss_map(c0: CurveSpec, c1: CurveSpec, s, t) -> np.ndarray:
    """Unit vector from c0(s) to c1(t)."""
    r = geo.evaluate(c1, t) - geo.evaluate(c0, s)
    dist = np.linalg.norm(r, axis=-1)
    if np.any(dist <= 1e-12):
        raise CoincidentPoints("gauss map undefined at coincident points")
    return r / dist[..., None]


def gauss_map_extended(curve: CurveSpec, s, side: str = "plus") -> np.ndarray:
    """Boundary value of the Gauss map on the compactified diagonal: +/- unit tangent."""
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    d1 = geo.derivative(curve, s, 1)
    speed = np.linalg.norm(d1, axis=-1)
    if np.any(speed <= 1e-9):
        raise ValueError("curve is singular")
    sign = 1.0 if side == "plus" else -1.0
    return sign * d1 / speed[..., None]


# -- summation core ------------------------------------------------------------------


def _block(rows, p0, d0, p1, d1, self_pairs):
    """Row sums of the integrand for rows ``rows`` plus the minimum relevant distance."""
    n = len(p1)
    r = p0[rows, None, :] - p1[None, :, :]
    dist = np.sqrt(np.sum(r * r, axis=-1))
    cross = np.cross(d0[rows, None, :], d1[None, :, :])
    num = np.sum(cross * r, axis=-1)
    if self_pairs:
        gap = np.abs(rows[:, None] - np.arange(n)[None, :])
        gap = np.minimum(gap, n - gap)
        diag = gap == 0
        dist_check = np.where(gap < 2, np.inf, dist)
        dist = np.where(diag, 1.0, dist)
        num = np.where(diag, 0.0, num)
    else:
        dist_check = dist
    # coincident samples are reported by the caller through the minimum distance
    with np.errstate(divide="ignore", invalid="ignore"):
        w = num / dist**3
    return w.sum(axis=1), float(dist_check.min())


def _grid_sum(p0, d0, p1, d1, self_pairs: bool, threads: int | None):
    n = len(p0)
    blocks = [np.arange(i, min(i + ROW_BLOCK, n)) for i in range(0, n, ROW_BLOCK)]

    def work(rows):
        return _block(rows, p0, d0, p1, d1, self_pairs)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, blocks))
    else:
        parts = [work(rows) for rows in blocks]
    total = 0.0
    for row_sums, _ in parts:
        for v in row_sums:
            total += float(v)
    min_dist = min(m for _, m in parts)
    return total, min_dist


def _threads(cfg: QuadratureConfig) -> int | None:
    if not cfg.parallel:
        return None
    if cfg.threads is not None:
        return cfg.threads
    import os

    return os.cpu_count() or 1


def _samples(curve: CurveSpec, n: int):
    t = geo.grid(n)
    return geo.evaluate(curve, t), geo.derivative(curve, t, 1)


def _linking_value(c0, c1, n, threads):
    p0, d0 = _samples(c0, n)
    p1, d1 = _samples(c1, n)
    total, min_dist = _grid_sum(p0, d0, p1, d1, False, threads)
    if min_dist <= MIN_SEPARATION:
        raise CurvesIntersect(f"curves come within {min_dist:.3g} of each other")
    return total / (n * n * FOUR_PI)


def _writhe_value(curve, n, threads):
    p, d = _samples(curve, n)
    total, min_dist = _grid_sum(p, d, p, d, True, threads)
    if min_dist <= MIN_SEPARATION:
        raise SelfIntersection(f"non-adjacent samples within {min_dist:.3g}")
    return total / (n * n * FOUR_PI)


def _with_estimate(fn, cfg: QuadratureConfig) -> IntegralResult:
    threads = _threads(cfg)
    value = fn(cfg.n, threads)
    err = 0.0
    if cfg.richardson:
        half = cfg.n // 2
        if half % 2:
            half += 1
        err = abs(value - fn(half, threads))
    return IntegralResult(value, err, cfg.n)


def linking_integral(c0: CurveSpec, c1: CurveSpec, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """Gauss linking integral of two disjoint closed curves."""
    cfg = cfg or QuadratureConfig()
    return _with_estimate(lambda n, th: _linking_value(c0, c1, n, th), cfg)


def writhe_integral(curve: CurveSpec, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """Writhe: the Gauss self-integral with the diagonal cells set to zero."""
    cfg = cfg or QuadratureConfig()
    return _with_estimate(lambda n, th: _writhe_value(curve, n, th), cfg)


def writhe_symmetry_gap(curve: CurveSpec, n: int) -> float:
    """|sum over i<j - sum over i>j| of the writhe integrand, normalized like the writhe."""
    p, d = _samples(curve, n)
    r = p[:, None, :] - p[None, :, :]
    dist = np.sqrt(np.sum(r * r, axis=-1))
    np.fill_diagonal(dist, 1.0)
    w = np.sum(np.cross(d[:, None, :], d[None, :, :]) * r, axis=-1) / dist**3
    np.fill_diagonal(w, 0.0)
    upper = np.triu(w, 1).sum()
    lower = np.tril(w, -1).sum()
    return float(abs(upper - lower) / (n * n * FOUR_PI))


def convergence_study(tag: str, subject, n_list, cfg: QuadratureConfig | None = None) -> list[tuple[int, float]]:
    """Values of an integral on a sequence of grids.

    ``tag`` is ``writhe`` (subject: a curve), ``linking`` (subject: a pair of
    curves) or ``twist`` (subject: a framing).
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ValueError("n_list must not be empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or any(n % 2 for n in n_list):
        raise ValueError("n_list must be strictly increasing even integers")
    cfg = cfg or QuadratureConfig()
    threads = _threads(cfg)
    out = []
    for n in n_list:
        if tag == "writhe":
            v = _writhe_value(subject, n, threads)
        elif tag == "linking":
            v = _linking_value(subject[0], subject[1], n, threads)
        elif tag == "twist":
            from .framing import twist_integral

            v = twist_integral(subject, n)
        else:
            raise ValueError(f"unknown convergence target {tag!r}")
        out.append((n, v))
    return out


def observed_orders(values: list[tuple[int, float]]) -> list[float | None]:
    """log2(|I_a - I_b| / |I_b - I_c|) for each consecutive triple; None where undefined."""
    vals = [v for _, v in values]
    orders: list[float | None] = [None, None]
    for a, b, c in zip(vals, vals[1:], vals[2:]):
        num, den = abs(a - b), abs(b - c)
        orders.append(math.log2(num / den) if num > 0 and den > 0 else None)
    return orders[: len(vals)]
