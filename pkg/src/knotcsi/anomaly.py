"""Two-strand anomaly: configurations on two antiparallel vertical lines.

Strand 1 is the line (0, 0, t); strand 2 is (x, y, -t) for a horizontal offset
w = (x, y). Configurations are taken modulo vertical translation by pinning one
leg (the gauge leg) at parameter 0. Letting w range over the plane gives a
space P on which the edge directions are invariant under dilation; the
density used here is the coefficient f of the basic form

    pullback of the sphere forms = f * (contraction of the Euler field with dV_P),

which restricted to |w| = 1 is the density over the circle of frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .csint import FOUR_PI, EdgeOrientationPlan, node_of, pullback_jacobian
from .errors import InputError, WrongLegCount
from .jacobi import JacobiDiagram, Support, _assemble, automorphism_count, enumerate_connected, to_text
from .sampling import IntegralEstimate, SamplerConfig, estimate

_AXES = np.eye(3)


@dataclass(frozen=True)
class TwoStrandFrame:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def offset(self) -> tuple[float, float]:
        return math.cos(self.theta), math.sin(self.theta)


@dataclass(frozen=True)
class AnomalyConfiguration:
    """Strand-2 offset, one parameter per leg, one point per trivalent vertex.

    ``gauge`` is the leg pinned at parameter 0.
    """

    offset: tuple[float, float]
    leg_params: tuple[float, ...]
    vertex_points: tuple[tuple[float, float, float], ...] = ()
    gauge: int = 0

    @classmethod
    def on_frame(cls, frame: TwoStrandFrame, leg_params, vertex_points=(), gauge=0):
        return cls(frame.offset, tuple(leg_params), tuple(map(tuple, vertex_points)), gauge)

    def batch(self) -> _Batch:
        return _Batch(np.array([self.offset], dtype=float),
                      np.array([self.leg_params], dtype=float),
                      np.asarray(self.vertex_points, dtype=float).reshape(1, -1, 3), self.gauge)

    @property
    def frame(self) -> TwoStrandFrame:
        return TwoStrandFrame(math.atan2(self.offset[1], self.offset[0]))


@dataclass
class _Batch:
    w: np.ndarray       # (n, 2)
    legs: np.ndarray    # (n, U)
    verts: np.ndarray   # (n, T, 3)
    gauge: int

    def __len__(self):
        return self.w.shape[0]

    def item(self, i) -> AnomalyConfiguration:
        return AnomalyConfiguration(tuple(self.w[i]), tuple(self.legs[i]),
                                    tuple(map(tuple, self.verts[i])), self.gauge)


def _check(g: JacobiDiagram):
    if len(g.support) != 2:
        raise InputError("anomaly diagrams live on two strands")


def _positions(g, b: _Batch):
    n = len(b)
    U, T = g.n_legs, g.n_vertices
    pos = np.empty((n, U + T, 3))
    for h, (strand, _) in enumerate(g.legs):
        if strand == 0:
            pos[:, h] = np.stack([np.zeros(n), np.zeros(n), b.legs[:, h]], -1)
        else:
            pos[:, h] = np.stack([b.w[:, 0], b.w[:, 1], -b.legs[:, h]], -1)
    if T:
        pos[:, U:] = b.verts
    return pos


def _orientation_sign(g, order, gauge):
    tau = 1 if g.legs[gauge][0] == 0 else -1
    return tau * (-1) ** order.index(gauge)


def _p_density(g, plan, b: _Batch, degenerate=1e-12):
    """Basic density on P and its Hadamard-normalized magnitude."""
    U = g.n_legs
    order = plan.coordinate_order(g)
    rest = [h for h in order if h != b.gauge]
    col = {h: 2 + i for i, h in enumerate(rest)}
    derivs = []
    for h, (strand, _) in enumerate(g.legs):
        d = []
        if h != b.gauge:
            d.append((col[h], _AXES[2] if strand == 0 else -_AXES[2]))
        if strand == 1:
            d += [(0, _AXES[0]), (1, _AXES[1])]
        derivs.append(d)
    for v in range(g.n_vertices):
        derivs.append([(col[U + 3 * v + k], _AXES[k]) for k in range(3)])
    edges = [(node_of(g, a), node_of(g, c)) for a, c in plan.directed_edges(g)]
    pos = _positions(g, b)
    ncols = 2 * g.n_edges + 1
    J, units, _ = pullback_jacobian(edges, pos, derivs, ncols, degenerate)
    xi = np.empty((len(b), ncols))
    xi[:, :2] = b.w
    for h in rest:
        if h < U:
            xi[:, col[h]] = b.legs[:, h]
        else:
            v, k = divmod(h - U, 3)
            xi[:, col[h]] = b.verts[:, v, k]
    M = np.concatenate([J, xi[:, None, :]], axis=1)
    det = np.linalg.det(M)
    sign = _orientation_sign(g, order, b.gauge)
    f = sign * det / ((xi ** 2).sum(axis=1) * FOUR_PI ** g.n_edges)
    scale = np.prod(np.linalg.norm(M, axis=2), axis=1)
    norm = np.divide(np.abs(det), scale, out=np.zeros_like(det), where=scale > 0)
    return f, norm, units


def _theta_density(g, plan, b: _Batch):
    """Density in (theta, remaining coordinates) on unit-offset configurations."""
    U = g.n_legs
    order = plan.coordinate_order(g)
    rest = [h for h in order if h != b.gauge]
    col = {h: 1 + i for i, h in enumerate(rest)}
    radial = np.stack([-b.w[:, 1], b.w[:, 0], np.zeros(len(b))], -1)
    derivs = []
    for h, (strand, _) in enumerate(g.legs):
        d = []
        if h != b.gauge:
            d.append((col[h], _AXES[2] if strand == 0 else -_AXES[2]))
        if strand == 1:
            d.append((0, radial))
        derivs.append(d)
    for v in range(g.n_vertices):
        derivs.append([(col[U + 3 * v + k], _AXES[k]) for k in range(3)])
    edges = [(node_of(g, a), node_of(g, c)) for a, c in plan.directed_edges(g)]
    J, _, _ = pullback_jacobian(edges, _positions(g, b), derivs, 2 * g.n_edges)
    return _orientation_sign(g, order, b.gauge) * np.linalg.det(J) / FOUR_PI ** g.n_edges


def anomaly_density(c: AnomalyConfiguration, g: JacobiDiagram,
                    plan: EdgeOrientationPlan | None = None) -> float:
    _check(g)
    plan = plan or EdgeOrientationPlan.default(g)
    return float(_p_density(g, plan, c.batch())[0][0])


def gauss_map(c: AnomalyConfiguration, g: JacobiDiagram, plan: EdgeOrientationPlan | None = None):
    _check(g)
    plan = plan or EdgeOrientationPlan.default(g)
    return _p_density(g, plan, c.batch())[2][0]


# --- symmetries -------------------------------------------------------------------

def _neighbour_node(g, h):
    return node_of(g, g.partner[h])


def _sigma_batch(g, b: _Batch) -> _Batch:
    strand2 = g.legs_on(1)
    if len(strand2) != 2:
        raise WrongLegCount(f"sigma needs exactly two legs on strand 2, found {len(strand2)}")
    if not g.legs_on(0):
        raise WrongLegCount("sigma needs a leg on strand 1 to carry the gauge")
    u1, u2 = strand2
    pos = _positions(g, b)
    total = pos[:, _neighbour_node(g, u1)] + pos[:, _neighbour_node(g, u2)]
    legs = b.legs.copy()
    legs[:, u1] = -total[:, 2] - b.legs[:, u2]
    legs[:, u2] = -total[:, 2] - b.legs[:, u1]
    return _Batch(total[:, :2] - b.w, legs, b.verts.copy(), b.gauge)


def sigma(c: AnomalyConfiguration, g: JacobiDiagram) -> AnomalyConfiguration:
    """Reflect the two strand-2 legs through the midpoint of their neighbours.

    With strand-2 legs u1, u2 and neighbours t1, t2 the new points are
    c(t1) + c(t2) - c(u2) and c(t1) + c(t2) - c(u1); everything else stays.
    """
    _check(g)
    if g.legs[c.gauge][0] != 0:
        raise WrongLegCount("sigma keeps the gauge leg on strand 1")
    return _sigma_batch(g, c.batch()).item(0)


def _mu_batch(g, b: _Batch, mu) -> _Batch:
    """Scale the single strand-2 leg away from its neighbour by ``mu``."""
    (u,) = g.legs_on(1)
    pos = _positions(g, b)
    t = pos[:, _neighbour_node(g, u)]
    new = t + mu[:, None] * (pos[:, u] - t)
    legs = b.legs.copy()
    legs[:, u] = -new[:, 2]
    return _Batch(new[:, :2], legs, b.verts.copy(), b.gauge)


def swap_strands(g: JacobiDiagram) -> tuple[JacobiDiagram, list[int]]:
    """The diagram with strands exchanged, and the new index of each old leg."""
    keys = [(1 - c, r) for c, r in g.legs]
    order = sorted(range(g.n_legs), key=lambda i: keys[i])
    new_index = [0] * g.n_legs
    for new, old in enumerate(order):
        new_index[old] = new
    U = g.n_legs

    def ref(h):
        if h < U:
            return ("L", h)
        v, k = divmod(h - U, 3)
        return ("V", v, k)

    h = _assemble(g.support, keys, g.n_vertices, [(ref(a), ref(b)) for a, b in g.edges])
    return h, new_index


def _chi_batch(g, b: _Batch):
    """Point reflection through (w/2, 0) viewed as a configuration of the swapped diagram."""
    h, new_index = swap_strands(g)
    legs = np.empty_like(b.legs)
    legs[:, new_index] = b.legs
    verts = np.empty_like(b.verts)
    if g.n_vertices:
        verts[..., :2] = b.w[:, None, :] - b.verts[..., :2]
        verts[..., 2] = -b.verts[..., 2]
    return h, _Batch(b.w.copy(), legs, verts, new_index[b.gauge])


def coplanar_vertex(g: JacobiDiagram) -> bool:
    """Some trivalent vertex has two legs on the same strand."""
    U = g.n_legs
    for v in range(g.n_vertices):
        strands = [g.legs[p][0] for p in (g.partner[U + 3 * v + k] for k in range(3)) if p < U]
        if len(strands) != len(set(strands)):
            return True
    return False


def random_batch(g: JacobiDiagram, n: int, rng: np.random.Generator, gauge: int | None = None) -> _Batch:
    """Generic configurations: offsets and vertices Gaussian, leg orders respected."""
    U, T = g.n_legs, g.n_vertices
    if gauge is None:
        on1 = g.legs_on(0)
        gauge = on1[0] if on1 else g.legs_on(1)[0]
    w = rng.standard_normal((n, 2))
    legs = np.empty((n, U))
    for strand in (0, 1):
        hs = g.legs_on(strand)
        if hs:
            legs[:, hs] = np.sort(rng.standard_normal((n, len(hs))) * 1.5, axis=1)
    legs -= legs[:, [gauge]] * np.where(
        np.array([c for c, _ in g.legs]) == g.legs[gauge][0], 1.0, -1.0)
    verts = rng.standard_normal((n, T, 3)) * 1.2
    return _Batch(w, legs, verts, gauge)


ZERO_TOL = 1e-12
FLOOR = 1e-6


def _pair_residual(a, b, norms):
    """Relative gap between two density samples that should agree.

    A diagram whose normalized density never exceeds ``ZERO_TOL`` vanishes
    identically, and the largest normalized value is returned. Otherwise the
    gap is measured per configuration against the larger of the two values,
    floored at ``FLOOR`` times the batch maximum so sign changes of the
    integrand do not divide by zero.
    """
    worst = max(float(np.max(n)) for n in norms)
    if worst < ZERO_TOL:
        return worst
    mag = np.maximum(np.abs(a), np.abs(b))
    den = np.maximum(mag, FLOOR * mag.max())
    return float((np.abs(a - b) / den).max())


def sigma_residual(g: JacobiDiagram, n: int, rng: np.random.Generator, chunk: int = 2000) -> float:
    """Largest relative violation of f(sigma c) = -f(c) over ``n`` random configurations."""
    plan = EdgeOrientationPlan.default(g)
    worst = 0.0
    for lo in range(0, n, chunk):
        b = random_batch(g, min(chunk, n - lo), rng)
        f, nf, _ = _p_density(g, plan, b)
        fs, ns, _ = _p_density(g, plan, _sigma_batch(g, b))
        worst = max(worst, _pair_residual(fs, -f, (nf, ns)))
    return worst


def central_residual(g: JacobiDiagram, n: int, rng: np.random.Generator) -> float:
    """Largest relative violation of f_swapped(chi c) = (-1)^(n+1) f(c)."""
    b = random_batch(g, n, rng)
    f, nf, _ = _p_density(g, EdgeOrientationPlan.default(g), b)
    h, bc = _chi_batch(g, b)
    fh, nh, _ = _p_density(h, EdgeOrientationPlan.default(h), bc)
    return _pair_residual(fh, (-1) ** (g.degree + 1) * f, (nf, nh))


def vanishing_residual(g: JacobiDiagram, n: int, rng: np.random.Generator, gauge=None) -> float:
    """Largest Hadamard-normalized |density|; zero for identically vanishing integrands."""
    b = random_batch(g, n, rng, gauge)
    return float(_p_density(g, EdgeOrientationPlan.default(g), b)[1].max())


def mu_residual(g: JacobiDiagram, n: int, rng: np.random.Generator) -> float:
    """Edge directions under the one-leg scaling, plus the normalized density."""
    plan = EdgeOrientationPlan.default(g)
    b = random_batch(g, n, rng)
    mu = np.exp(rng.standard_normal(n))
    _, norm, units = _p_density(g, plan, b)
    _, _, moved = _p_density(g, plan, _mu_batch(g, b, mu))
    return float(max(np.abs(units - moved).max(), norm.max()))


# --- filters ----------------------------------------------------------------------

@dataclass
class FilterRecord:
    diagram: str
    legs: tuple[int, int]
    mechanism: str
    residual: float

    def to_dict(self):
        return {"diagram": self.diagram, "legs": list(self.legs), "mechanism": self.mechanism,
                "residual": self.residual}


@dataclass
class FilterReport:
    degree: int
    samples: int
    records: list[FilterRecord] = field(default_factory=list)

    @property
    def survivors(self) -> list[FilterRecord]:
        return [r for r in self.records if r.mechanism == "survivor"]

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.records if r.mechanism != "survivor"), default=0.0)

    def counts(self) -> dict:
        out = {}
        for r in self.records:
            out[r.mechanism] = out.get(r.mechanism, 0) + 1
        return dict(sorted(out.items()))

    def to_dict(self):
        return {"degree": self.degree, "samples_per_diagram": self.samples,
                "diagrams": [r.to_dict() for r in self.records],
                "counts": self.counts(),
                "survivors": [r.diagram for r in self.survivors],
                "max_residual": self.max_residual}


def classify(g: JacobiDiagram, n: int, rng: np.random.Generator) -> FilterRecord:
    """Decide why the integral of ``g`` vanishes and test that reason pointwise."""
    u1, u2 = g.leg_counts()
    text = to_text(g)
    if u1 == 0 or u2 == 0:
        return FilterRecord(text, (u1, u2), "zero_legs", vanishing_residual(g, n, rng))
    if g.degree > 1 and min(u1, u2) < 3:
        if u2 < 3:
            h, extra = g, 0.0
        else:
            h, _ = swap_strands(g)
            extra = central_residual(g, n, rng)
        if h.leg_counts()[1] == 1:
            return FilterRecord(text, (u1, u2), "one_leg", max(extra, mu_residual(h, n, rng)))
        return FilterRecord(text, (u1, u2), "two_legs_sigma", max(extra, sigma_residual(h, n, rng)))
    if coplanar_vertex(g):
        return FilterRecord(text, (u1, u2), "coplanarity", vanishing_residual(g, n, rng))
    if g.degree % 2 == 0:
        return FilterRecord(text, (u1, u2), "central_symmetry", central_residual(g, n, rng))
    return FilterRecord(text, (u1, u2), "survivor", 0.0)


def check_vanishing_filters(n: int, samples: int = 64, seed: int = 0) -> FilterReport:
    """Classify every connected two-strand diagram of degree ``n``."""
    rng = np.random.default_rng(seed)
    report = FilterReport(n, samples)
    for g in enumerate_connected(n, Support.two_lines()):
        report.records.append(classify(g, samples, rng))
    return report


# --- degree one ---------------------------------------------------------------------

def cross_chord() -> JacobiDiagram:
    return _assemble(Support.two_lines(), [(0, 0), (1, 0)], 0, [(("L", 0), ("L", 1))])


def estimate_alpha1(cfg: SamplerConfig) -> IntegralEstimate:
    """Coefficient of the single chord in the degree-one anomaly.

    Integrates the strand-crossing chord over the frame angle and the strand-2
    parameter (Cauchy-distributed proposal), divides by its automorphism count
    and flips the sign, as the one-strand anomaly is minus the closure of the
    two-strand one.
    """
    g = cross_chord()
    plan = EdgeOrientationPlan.default(g)

    def weights(u):
        theta = 2 * math.pi * u[:, 0]
        s = np.tan(math.pi * (u[:, 1] - 0.5))
        n = len(theta)
        b = _Batch(np.stack([np.cos(theta), np.sin(theta)], -1),
                   np.stack([np.zeros(n), s], -1), np.zeros((n, 0, 3)), 0)
        f, _, _ = _p_density(g, plan, b)
        return f * (2 * math.pi) * math.pi * (1 + s * s)

    est = estimate(weights, 2, cfg)
    aut = automorphism_count(g)
    return IntegralEstimate(-est.value / aut, est.std_error / aut, est.samples, est.seed, est.method)
