"""Closed trigonometric-polynomial curves, links, and their planar projections."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import InputError, NonGenericDirection

GRID = 2048


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Curve:
    """Map t -> const + sum_k cos_k cos(kt) + sin_k sin(kt), coordinatewise.

    ``cos`` and ``sin`` have shape (3, degree); column k-1 holds harmonic k.
    """

    const: np.ndarray
    cos: np.ndarray
    sin: np.ndarray

    def __post_init__(self):
        const = _frozen(self.const).reshape(3)
        c = _frozen(self.cos)
        s = _frozen(self.sin)
        if c.ndim != 2 or c.shape[0] != 3 or c.shape != s.shape:
            raise InputError(f"coefficient arrays must be 3 x degree, got {c.shape} and {s.shape}")
        object.__setattr__(self, "const", const)
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    @property
    def degree(self) -> int:
        return self.cos.shape[1]

    def _harmonics(self, t):
        t = np.asarray(t, dtype=float)
        k = np.arange(1, self.degree + 1)
        ang = t[..., None] * k
        return t, k, np.cos(ang), np.sin(ang)

    def __call__(self, t):
        return evaluate(self, t)

    def derivative(self) -> Curve:
        k = np.arange(1, self.degree + 1)
        return Curve(np.zeros(3), self.sin * k, -self.cos * k)

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return (np.array_equal(self.const, other.const) and np.array_equal(self.cos, other.cos)
                and np.array_equal(self.sin, other.sin))

    def __hash__(self):
        return hash((self.const.tobytes(), self.cos.tobytes(), self.sin.tobytes()))

    def to_dict(self) -> dict:
        return {"const": self.const.tolist(), "cos": self.cos.tolist(), "sin": self.sin.tolist()}

    @classmethod
    def from_dict(cls, d) -> Curve:
        try:
            return cls(d["const"], d["cos"], d["sin"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed curve record: {exc}") from exc

    @classmethod
    def from_samples(cls, points, degree: int) -> Curve:
        """Least-squares trigonometric fit of equispaced samples over one period."""
        points = np.asarray(points, dtype=float)
        m = points.shape[0]
        if degree >= m // 2:
            raise InputError("degree must be below half the sample count")
        f = np.fft.rfft(points, axis=0) / m
        const = f[0].real
        cos = 2 * f[1:degree + 1].real.T
        sin = -2 * f[1:degree + 1].imag.T
        return cls(const, cos, sin)


def evaluate(curve: Curve, t):
    """Point(s) on ``curve``; ``t`` may be a scalar or any array shape."""
    _, _, c, s = curve._harmonics(t)
    return curve.const + c @ curve.cos.T + s @ curve.sin.T


def tangent(curve: Curve, t):
    _, k, c, s = curve._harmonics(t)
    return (c * k) @ curve.sin.T - (s * k) @ curve.cos.T


def second_derivative(curve: Curve, t):
    _, k, c, s = curve._harmonics(t)
    k2 = k * k
    return -(c * k2) @ curve.cos.T - (s * k2) @ curve.sin.T


def grid(n: int = GRID):
    return np.arange(n) * (2 * np.pi / n)


@dataclass(frozen=True)
class LinkEmbedding:
    components: tuple[Curve, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise InputError("a link needs at least one component")
        object.__setattr__(self, "components", comps)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i) -> Curve:
        return self.components[i]

    def to_json(self) -> str:
        return json.dumps({"components": [c.to_dict() for c in self.components]})

    @classmethod
    def from_json(cls, text: str) -> LinkEmbedding:
        try:
            data = json.loads(text)
            comps = data["components"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"malformed link JSON: {exc}") from exc
        return cls(tuple(Curve.from_dict(c) for c in comps))

    @classmethod
    def load(cls, path) -> LinkEmbedding:
        return cls.from_json(Path(path).read_text())


def as_link(obj) -> LinkEmbedding:
    if isinstance(obj, LinkEmbedding):
        return obj
    if isinstance(obj, Curve):
        return LinkEmbedding((obj,))
    raise TypeError(f"expected a Curve or LinkEmbedding, got {type(obj).__name__}")


def embedding_margins(link, n: int = GRID) -> dict:
    """Grid certificate of embeddedness.

    Returns the minimum sample distance within each component (parameter
    neighbours excluded), between components, and the minimum speed. All must
    be positive for the link to pass; this is a sampled heuristic only.
    """
    link = as_link(link)
    t = grid(n)
    pts = [evaluate(c, t) for c in link.components]
    speed = min(float(np.linalg.norm(tangent(c, t), axis=1).min()) for c in link.components)
    idx = np.arange(n)
    self_min = np.inf
    for p in pts:
        for lo in range(0, n, 256):
            blk = p[lo:lo + 256]
            d = np.linalg.norm(blk[:, None, :] - p[None, :, :], axis=-1)
            gap = np.abs(idx[lo:lo + 256, None] - idx[None, :])
            gap = np.minimum(gap, n - gap)
            d[gap <= 1] = np.inf
            self_min = min(self_min, float(d.min()))
    cross_min = np.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            for lo in range(0, n, 256):
                d = np.linalg.norm(pts[i][lo:lo + 256, None, :] - pts[j][None, :, :], axis=-1)
                cross_min = min(cross_min, float(d.min()))
    return {"self": self_min, "between": cross_min, "speed": speed}


def is_embedded(link, n: int = GRID) -> bool:
    m = embedding_margins(link, n)
    return m["self"] > 0 and m["between"] > 0 and m["speed"] > 0


def shrink(link, lam: float):
    """Horizontal scaling (x, y, z) -> (lam x, lam y, z) applied to coefficients."""
    if not lam > 0:
        raise InputError("shrink factor must be positive")
    scale = np.array([lam, lam, 1.0])

    def one(c: Curve) -> Curve:
        return Curve(c.const * scale, c.cos * scale[:, None], c.sin * scale[:, None])

    if isinstance(link, Curve):
        return one(link)
    return LinkEmbedding(tuple(one(c) for c in link.components))


# --- projections -----------------------------------------------------------

def projection_basis(direction):
    """Orthonormal (e1, e2, d) with e1 x e2 = d."""
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0:
        raise InputError("projection direction must be nonzero")
    d = d / norm
    a = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(a, d)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2, d


@dataclass(frozen=True)
class Crossing:
    """A transverse double point of a planar projection.

    ``over`` and ``under`` are (component, parameter) pairs; the over point is
    the one farther along the projection direction.
    """

    over: tuple[int, float]
    under: tuple[int, float]
    sign: int

    @property
    def components(self) -> tuple[int, int]:
        return self.over[0], self.under[0]


@dataclass(frozen=True)
class CrossingDiagram:
    crossings: tuple[Crossing, ...]
    direction: tuple[float, float, float]
    n_components: int = 1

    def self_crossings(self, i: int):
        return [c for c in self.crossings if c.over[0] == i and c.under[0] == i]


def _coarse_candidates(pts2d, n):
    comp = np.repeat(np.arange(len(pts2d)), n)
    first = np.arange(len(pts2d)) * n
    count = np.full(len(pts2d), n)
    xy = np.ascontiguousarray(np.concatenate(pts2d))
    cap = 4096
    while True:
        idx, frac, found = _kernels.segment_crossings(xy, comp, first, count, cap)
        if found <= cap:
            return idx, frac
        cap = found


def project_crossings(link, direction, n_samples: int = GRID, tol: float = 1e-9,
                      separation: float = 1e-6) -> CrossingDiagram:
    """All transverse double points of the projection along ``direction``.

    Candidates come from intersecting the projected sample polygons; each is
    polished by Newton iteration on the planar separation. Crossing sign is
    +1 when turning the over tangent to the under tangent is counterclockwise
    as seen from the tip of ``direction``.
    """
    link = as_link(link)
    e1, e2, d = projection_basis(direction)
    plane = np.stack([e1, e2])
    n = n_samples
    h = 2 * np.pi / n
    t = grid(n)
    for c in link.components:
        tan = tangent(c, t)
        flat = np.linalg.norm(tan @ plane.T, axis=1) / np.linalg.norm(tan, axis=1)
        if flat.min() < separation:
            raise NonGenericDirection("a tangent is parallel to the projection direction")
    pts2d = [evaluate(c, t) @ plane.T for c in link.components]
    idx, frac = _coarse_candidates(pts2d, n)
    if len(idx) == 0:
        return CrossingDiagram((), tuple(d), len(link))

    ca, ia = np.divmod(idx[:, 0], n)
    cb, ib = np.divmod(idx[:, 1], n)
    s = (ia + frac[:, 0]) * h
    u = (ib + frac[:, 1]) * h
    s0, u0 = s.copy(), u.copy()
    curves = link.components

    def planar(ci, tt, fn):
        out = np.empty((len(tt), 2))
        for c in np.unique(ci):
            m = ci == c
            out[m] = fn(curves[c], tt[m]) @ plane.T
        return out

    for _ in range(60):
        f = planar(ca, s, evaluate) - planar(cb, u, evaluate)
        ja = planar(ca, s, tangent)
        jb = -planar(cb, u, tangent)
        det = ja[:, 0] * jb[:, 1] - ja[:, 1] * jb[:, 0]
        if np.any(det == 0):
            raise NonGenericDirection("projected tangents are parallel at a crossing")
        ds = (f[:, 0] * jb[:, 1] - f[:, 1] * jb[:, 0]) / det
        du = (ja[:, 0] * f[:, 1] - ja[:, 1] * f[:, 0]) / det
        s -= ds
        u -= du
        if max(np.abs(ds).max(), np.abs(du).max()) < 1e-14:
            break
    resid = np.linalg.norm(planar(ca, s, evaluate) - planar(cb, u, evaluate), axis=1)
    if resid.max() > tol or np.abs(s - s0).max() > 3 * h or np.abs(u - u0).max() > 3 * h:
        raise NonGenericDirection("Newton refinement of a crossing did not settle")

    ta = planar(ca, s, tangent)
    tb = planar(cb, u, tangent)
    sin_angle = (ta[:, 0] * tb[:, 1] - ta[:, 1] * tb[:, 0]) / (
        np.linalg.norm(ta, axis=1) * np.linalg.norm(tb, axis=1))
    if np.abs(sin_angle).min() < separation:
        raise NonGenericDirection("projection is nearly tangent at a crossing")
    s %= 2 * np.pi
    u %= 2 * np.pi

    # candidates hitting a shared polygon vertex are found twice
    keep = []
    seen = []
    for k in range(len(s)):
        key = (ca[k], cb[k], s[k], u[k])
        if any(a == key[0] and b == key[1] and _close(x, key[2]) and _close(y, key[3])
               for a, b, x, y in seen):
            continue
        seen.append(key)
        keep.append(k)
    keep = np.array(keep)
    ca, cb, s, u = ca[keep], cb[keep], s[keep], u[keep]

    where = planar(ca, s, evaluate)
    if len(where) > 1:
        gaps = np.linalg.norm(where[:, None] - where[None], axis=-1)
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() < separation:
            raise NonGenericDirection("two crossings nearly coincide in the projection")

    crossings = []
    for k in range(len(s)):
        pa = evaluate(curves[ca[k]], s[k])
        pb = evaluate(curves[cb[k]], u[k])
        gap = float((pa - pb) @ d)
        if abs(gap) < separation:
            raise NonGenericDirection("strands nearly meet above a crossing")
        a = (int(ca[k]), float(s[k]))
        b = (int(cb[k]), float(u[k]))
        over, under = (a, b) if gap > 0 else (b, a)
        t_over = tangent(curves[over[0]], over[1])
        t_under = tangent(curves[under[0]], under[1])
        sign = 1 if np.cross(t_over, t_under) @ d > 0 else -1
        crossings.append(Crossing(over, under, sign))
    crossings.sort(key=lambda c: (min(c.over, c.under), max(c.over, c.under)))
    return CrossingDiagram(tuple(crossings), tuple(float(x) for x in d), len(link))


def _close(a, b, eps=1e-7):
    diff = abs(a - b) % (2 * np.pi)
    return min(diff, 2 * np.pi - diff) < eps


def linking_from_crossings(diagram: CrossingDiagram, i: int, j: int) -> int:
    """Signed count of the crossings where component ``j`` passes over ``i``."""
    if i == j:
        raise InputError("linking needs two distinct components")
    return sum(c.sign for c in diagram.crossings if c.over[0] == j and c.under[0] == i)


def linking_half_sum(diagram: CrossingDiagram, i: int, j: int) -> float:
    if i == j:
        raise InputError("linking needs two distinct components")
    return 0.5 * sum(c.sign for c in diagram.crossings if set(c.components) == {i, j})


def writhe_from_crossings(diagram: CrossingDiagram, i: int = 0) -> int:
    return sum(c.sign for c in diagram.self_crossings(i))


# --- polygon Gauss sums ----------------------------------------------------

def polygon_points(curve: Curve, n: int):
    return np.ascontiguousarray(evaluate(curve, grid(n)))


def polygon_writhe(curve: Curve, n: int) -> float:
    return float(_kernels.polygon_writhe(polygon_points(curve, n)))


def polygon_linking(a: Curve, b: Curve, n: int) -> float:
    return float(_kernels.polygon_linking(polygon_points(a, n), polygon_points(b, n)))
