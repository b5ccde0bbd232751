"""Configuration-space integrals of Jacobi diagrams over links.

A configuration places each leg of a diagram on its link component (by curve
parameter) and each trivalent vertex in space. Every edge contributes the
direction from its origin to its endpoint; the integrand is the pullback of
the product of unit-area sphere forms, computed as a Jacobian determinant
against positively oriented tangent frames of the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geom
from .errors import DegenerateConfiguration, InputError, UnsupportedDiagram
from .geom import Curve, LinkEmbedding, as_link, evaluate, tangent
from .jacobi import CIRCLE, JacobiDiagram, Support, _assemble, x_diagram, y_diagram
from .sampling import IntegralEstimate, SamplerConfig, combine, estimate

FOUR_PI = 4 * math.pi
MAX_INTEGRATION_DEGREE = 3
_X_SEED_SHIFT = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class EdgeOrientationPlan:
    """An order on the edges and a direction on each.

    ``reverse[e]`` flips edge ``e`` of the diagram (stored as a sorted pair)
    so that its larger half-edge becomes the origin.
    """

    edge_order: tuple[int, ...]
    reverse: tuple[bool, ...]

    @classmethod
    def default(cls, g: JacobiDiagram) -> EdgeOrientationPlan:
        return cls(tuple(range(g.n_edges)), (False,) * g.n_edges)

    @classmethod
    def random(cls, g: JacobiDiagram, rng: np.random.Generator) -> EdgeOrientationPlan:
        order = tuple(int(i) for i in rng.permutation(g.n_edges))
        return cls(order, tuple(bool(b) for b in rng.integers(0, 2, g.n_edges)))

    def directed_edges(self, g: JacobiDiagram) -> list[tuple[int, int]]:
        out = []
        for e in self.edge_order:
            a, b = g.edges[e]
            out.append((b, a) if self.reverse[e] else (a, b))
        return out

    def coordinate_order(self, g: JacobiDiagram) -> list[int]:
        return [h for edge in self.directed_edges(g) for h in edge]

    def reversed_all(self) -> EdgeOrientationPlan:
        return EdgeOrientationPlan(self.edge_order, tuple(not r for r in self.reverse))


@dataclass(frozen=True)
class Configuration:
    leg_params: tuple[float, ...]
    vertex_points: tuple[tuple[float, float, float], ...] = ()

    def arrays(self):
        legs = np.asarray(self.leg_params, dtype=float).reshape(1, -1)
        verts = np.asarray(self.vertex_points, dtype=float).reshape(1, -1, 3)
        return legs, verts


def node_of(g: JacobiDiagram, h: int) -> int:
    """Legs are nodes 0..U-1, vertex v is node U + v."""
    U = g.n_legs
    return h if h < U else U + (h - U) // 3


def sphere_frame(u):
    """Tangent frame (e1, e2) at unit vectors u with e1 x e2 = u."""
    a = np.zeros_like(u)
    polar = np.abs(u[..., 2]) > 0.9
    a[..., 2] = np.where(polar, 0.0, 1.0)
    a[..., 0] = np.where(polar, 1.0, 0.0)
    e1 = np.cross(a, u)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(u, e1)
    return e1, e2


def pullback_jacobian(edges, pos, derivs, ncols, degenerate=1e-12):
    """Jacobian of the product of edge directions against sphere frames.

    ``edges`` lists (origin node, end node) in row order; ``pos`` has shape
    (n, nodes, 3); ``derivs[node]`` lists (column, dP/dcolumn) with the vector
    broadcastable to (n, 3). Returns (J, unit directions, lengths).
    """
    n = pos.shape[0]
    E = len(edges)
    J = np.zeros((n, 2 * E, ncols))
    units = np.empty((n, E, 3))
    lengths = np.empty((n, E))
    for m, (o, e) in enumerate(edges):
        r = pos[:, e] - pos[:, o]
        length = np.linalg.norm(r, axis=-1)
        if np.any(length < degenerate):
            raise DegenerateConfiguration("an edge has coincident endpoints")
        u = r / length[:, None]
        e1, e2 = sphere_frame(u)
        units[:, m] = u
        lengths[:, m] = length
        for node, sgn in ((e, 1.0), (o, -1.0)):
            for col, vec in derivs[node]:
                vec = np.broadcast_to(vec, (n, 3))
                J[:, 2 * m, col] += sgn * np.einsum("ij,ij->i", e1, vec) / length
                J[:, 2 * m + 1, col] += sgn * np.einsum("ij,ij->i", e2, vec) / length
    return J, units, lengths


_AXES = np.eye(3)


def _check_support(g: JacobiDiagram, L: LinkEmbedding):
    if len(g.support) != len(L) or any(k != CIRCLE for k in g.support.kinds):
        raise InputError("diagram support must be one circle per link component")


def _positions(g, L, legs, verts):
    """Node positions (n, U+T, 3) and leg tangents (n, U, 3) for batched configs."""
    n = legs.shape[0]
    U, T = g.n_legs, g.n_vertices
    pos = np.empty((n, U + T, 3))
    tan = np.empty((n, U, 3))
    for h, (comp, _) in enumerate(g.legs):
        pos[:, h] = evaluate(L[comp], legs[:, h])
        tan[:, h] = tangent(L[comp], legs[:, h])
    if T:
        pos[:, U:] = verts
    return pos, tan


def _batched_density(g, L, plan, legs, verts, degenerate=1e-12):
    U = g.n_legs
    pos, tan = _positions(g, L, legs, verts)
    col = {h: i for i, h in enumerate(plan.coordinate_order(g))}
    derivs = [[(col[h], tan[:, h])] for h in range(U)]
    for v in range(g.n_vertices):
        derivs.append([(col[U + 3 * v + k], _AXES[k]) for k in range(3)])
    edges = [(node_of(g, a), node_of(g, b)) for a, b in plan.directed_edges(g)]
    J, units, lengths = pullback_jacobian(edges, pos, derivs, 2 * g.n_edges, degenerate)
    return np.linalg.det(J) / FOUR_PI ** g.n_edges, units, lengths


def gauss_map(c: Configuration, g: JacobiDiagram, L, plan: EdgeOrientationPlan | None = None):
    """Unit direction of every edge, in plan order, from origin to endpoint."""
    L = as_link(L)
    _check_support(g, L)
    plan = plan or EdgeOrientationPlan.default(g)
    legs, verts = c.arrays()
    pos, _ = _positions(g, L, legs, verts)
    out = []
    for a, b in plan.directed_edges(g):
        r = pos[0, node_of(g, b)] - pos[0, node_of(g, a)]
        length = np.linalg.norm(r)
        if length < 1e-12:
            raise DegenerateConfiguration("an edge has coincident endpoints")
        out.append(r / length)
    return np.array(out)


def density(c: Configuration, g: JacobiDiagram, L, plan: EdgeOrientationPlan | None = None) -> float:
    L = as_link(L)
    _check_support(g, L)
    plan = plan or EdgeOrientationPlan.default(g)
    legs, verts = c.arrays()
    return float(_batched_density(g, L, plan, legs, verts)[0][0])


def chord_kernel(x: Curve, y: Curve, s, t):
    """Integrand of a chord from x(s) to y(t): det(x'(s), y'(t), x(s) - y(t)) / (4 pi |.|^3)."""
    r = evaluate(x, s) - evaluate(y, t)
    num = np.einsum("...i,...i->...", np.cross(tangent(x, s), tangent(y, t)), r)
    return num / (FOUR_PI * np.linalg.norm(r, axis=-1) ** 3)


# --- sampling a configuration ------------------------------------------------

def _link_scale(L: LinkEmbedding):
    pts = np.concatenate([evaluate(c, geom.grid(256)) for c in L.components])
    center = pts.mean(axis=0)
    return center, float(np.sqrt(((pts - center) ** 2).sum(axis=1).mean()))


def _radial_draw(u, sigma):
    """Points around the origin with density sigma / (4 pi r^2 (sigma + r)^2)."""
    s = u[:, 0]
    r = sigma * s / (1 - s)
    cz = 2 * u[:, 1] - 1
    phi = 2 * math.pi * u[:, 2]
    sz = np.sqrt(np.maximum(0.0, 1 - cz * cz))
    return r[:, None] * np.stack([sz * np.cos(phi), sz * np.sin(phi), cz], -1)


def _radial_density(d, sigma):
    r = np.linalg.norm(d, axis=-1)
    with np.errstate(divide="ignore"):
        return sigma / (FOUR_PI * r * r * (sigma + r) ** 2)


class _DiagramSampler:
    """Draws configurations of ``g`` on ``L`` from uniforms and weights them.

    Legs are uniform in the cyclic cell of each component. Vertices come from
    a mixture of radial proposals centred at the link barycentre and at every
    point placed before them, so that collisions along edges are well covered.
    """

    hub_weight = 0.4
    local_scale = 0.15

    def __init__(self, g, L, plan, reject_delta):
        self.g, self.L, self.plan = g, L, plan
        self.delta = reject_delta
        self.per_comp = [g.legs_on(c) for c in range(len(g.support))]
        self.cell_volume = 1.0
        for hs in self.per_comp:
            m = len(hs)
            if m:
                self.cell_volume *= (2 * math.pi) ** m / math.factorial(m - 1)
        self.center, self.scale = _link_scale(L)
        self.dim = g.n_legs + 4 * g.n_vertices

    def __call__(self, u):
        g = self.g
        n = u.shape[0]
        U, T = g.n_legs, g.n_vertices
        legs = np.empty((n, U))
        col = 0
        for hs in self.per_comp:
            m = len(hs)
            if not m:
                continue
            start = 2 * math.pi * u[:, col]
            offs = np.sort(u[:, col + 1:col + m], axis=1) * 2 * math.pi
            legs[:, hs[0]] = start
            for k in range(1, m):
                legs[:, hs[k]] = (start + offs[:, k - 1]) % (2 * math.pi)
            col += m
        log_q = np.zeros(n)
        verts = np.empty((n, T, 3))
        if T:
            anchors = [evaluate(self.L[g.legs[h][0]], legs[:, h]) for h in range(U)]
            for v in range(T):
                centers = [np.broadcast_to(self.center, (n, 3))] + anchors + [verts[:, w] for w in range(v)]
                sigmas = [self.scale] + [self.local_scale * self.scale] * (len(centers) - 1)
                weights = np.array([self.hub_weight] + [(1 - self.hub_weight) / (len(centers) - 1)] * (len(centers) - 1))
                cum = np.cumsum(weights)
                pick = np.minimum(np.searchsorted(cum, u[:, col] * cum[-1], side="right"), len(centers) - 1)
                p = np.empty((n, 3))
                for j, (cj, sj) in enumerate(zip(centers, sigmas)):
                    m = pick == j
                    if m.any():
                        p[m] = cj[m] + _radial_draw(u[m, col + 1:col + 4], sj)
                q = np.zeros(n)
                for cj, sj, wj in zip(centers, sigmas, weights):
                    q += wj * _radial_density(p - cj, sj)
                verts[:, v] = p
                log_q += np.log(q)
                col += 4
        ok = np.isfinite(log_q)
        pos, _ = _positions(g, self.L, legs, verts)
        for a, b in g.edges:
            d = np.linalg.norm(pos[:, node_of(g, a)] - pos[:, node_of(g, b)], axis=-1)
            ok &= d > self.delta
        w = np.zeros(n)
        if ok.any():
            f, _, _ = _batched_density(g, self.L, self.plan, legs[ok], verts[ok], degenerate=0.0)
            w[ok] = f * self.cell_volume * np.exp(-log_q[ok])
        return w


def integrate(L, g: JacobiDiagram, cfg: SamplerConfig,
              plan: EdgeOrientationPlan | None = None) -> IntegralEstimate:
    """Monte Carlo estimate of the configuration-space integral of ``g`` on ``L``."""
    L = as_link(L)
    _check_support(g, L)
    if g.degree > MAX_INTEGRATION_DEGREE:
        raise UnsupportedDiagram(f"integration is capped at degree {MAX_INTEGRATION_DEGREE}")
    if cfg.method == "quadrature":
        raise InputError("quadrature is only available for two-point integrals")
    sampler = _DiagramSampler(g, L, plan or EdgeOrientationPlan.default(g), cfg.reject_delta)
    return estimate(sampler, sampler.dim, cfg)


def linking_chord() -> JacobiDiagram:
    """The chord from component 0 to component 1 of a two-circle support."""
    return _assemble(Support.circles(2), [(0, 0), (1, 0)], 0, [(("L", 0), ("L", 1))])


def _trapezoid_linking(x: Curve, y: Curve, n: int) -> float:
    t = geom.grid(n)
    h = 2 * math.pi / n
    total = 0.0
    for lo in range(0, n, 256):
        total += chord_kernel(x, y, t[lo:lo + 256, None], t[None, :]).sum()
    return float(total * h * h)


def gauss_linking(L, i: int, j: int, cfg: SamplerConfig) -> IntegralEstimate:
    """Linking integral of components ``i`` and ``j``.

    With ``method="quadrature"`` ``cfg.samples`` is the grid size per circle;
    the trapezoid rule on the torus is combined with its half-grid value.
    """
    L = as_link(L)
    if i == j:
        raise InputError("linking needs two distinct components")
    x, y = L[i], L[j]
    if cfg.method == "quadrature":
        n = int(cfg.samples)
        if n < 8 or n % 2:
            raise InputError("quadrature grid must be an even size of at least 8")
        fine = _trapezoid_linking(x, y, n)
        coarse = _trapezoid_linking(x, y, n // 2)
        value = fine + (fine - coarse) / 3
        return IntegralEstimate(value, abs(fine - coarse), n, cfg.seed, "quadrature")
    return integrate(LinkEmbedding((x, y)), linking_chord(), cfg)


def writhe_integral(K, cfg: SamplerConfig | None = None) -> IntegralEstimate:
    """Self-linking Gauss integral of a knot.

    Quadrature integrates exactly over inscribed polygons with ``cfg.samples``
    and half as many vertices, then extrapolates the second-order error away.
    """
    cfg = cfg or SamplerConfig(method="quadrature", samples=8192)
    curve = K if isinstance(K, Curve) else as_link(K)[0]
    if cfg.method == "quadrature":
        n = int(cfg.samples)
        if n < 16 or n % 2:
            raise InputError("quadrature polygon size must be even and at least 16")
        fine = geom.polygon_writhe(curve, n)
        coarse = geom.polygon_writhe(curve, n // 2)
        value = fine + (fine - coarse) / 3
        return IntegralEstimate(value, abs(fine - coarse) / 3, n, cfg.seed, "quadrature")
    from .jacobi import theta
    return integrate(LinkEmbedding((curve,)), theta(), cfg)


def degree2_invariant(K, cfg: SamplerConfig) -> IntegralEstimate:
    """-(1/3) I(K;Y) + (1/4) I(K;X) + 1/24 with root-sum-square error.

    The two integrals use independent streams (distinct seeds).
    """
    curve = K if isinstance(K, Curve) else as_link(K)[0]
    L = LinkEmbedding((curve,))
    iy = integrate(L, y_diagram(), cfg)
    ix = integrate(L, x_diagram(), cfg.with_(seed=(cfg.seed + _X_SEED_SHIFT) % 2 ** 64))
    return combine([(-1 / 3, iy), (1 / 4, ix)], 1 / 24, samples=2 * cfg.samples, seed=cfg.seed,
                   method=cfg.method)


def shrink_limit(K, lambdas, cfg: SamplerConfig | None = None):
    """Writhe integrals of the horizontally squashed knot, one per factor."""
    curve = K if isinstance(K, Curve) else as_link(K)[0]
    return [(float(lam), writhe_integral(geom.shrink(curve, lam), cfg)) for lam in lambdas]
