"""Combinatorial oracles: Gauss codes, the Conway polynomial, directional writhe."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InconsistentDiagram, InputError, NonGenericDirection, ResolutionBudgetExceeded
from .geom import CrossingDiagram, as_link, project_crossings, writhe_from_crossings
from .sampling import IntegralEstimate

SKEIN_BUDGET = 1 << 20


@dataclass(frozen=True)
class Visit:
    crossing: int
    over: bool
    sign: int

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.crossing}{'O' if self.over else 'U'}"


@dataclass(frozen=True)
class GaussCode:
    components: tuple[tuple[Visit, ...], ...]

    def __post_init__(self):
        comps = tuple(tuple(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        visits: dict[int, list[Visit]] = {}
        for comp in comps:
            for v in comp:
                if v.sign not in (1, -1):
                    raise InconsistentDiagram(f"crossing {v.crossing} has sign {v.sign}")
                visits.setdefault(v.crossing, []).append(v)
        for c, vs in visits.items():
            if len(vs) != 2 or vs[0].over == vs[1].over or vs[0].sign != vs[1].sign:
                raise InconsistentDiagram(f"crossing {c} must be visited once over and once under with one sign")

    @property
    def crossings(self) -> set[int]:
        return {v.crossing for comp in self.components for v in comp}

    def mirror(self) -> GaussCode:
        return GaussCode(tuple(tuple(Visit(v.crossing, not v.over, -v.sign) for v in comp)
                               for comp in self.components))

    def rotated(self, shifts) -> GaussCode:
        return GaussCode(tuple(comp[s % len(comp):] + comp[:s % len(comp)] if comp else comp
                               for comp, s in zip(self.components, shifts)))

    def relabeled(self, mapping) -> GaussCode:
        return GaussCode(tuple(tuple(Visit(mapping[v.crossing], v.over, v.sign) for v in comp)
                               for comp in self.components))

    def to_text(self) -> str:
        return "\n".join(",".join(str(v) for v in comp) for comp in self.components)

    @classmethod
    def from_text(cls, text: str) -> GaussCode:
        comps = []
        for line in re.split(r"[;\n]", text.strip()):
            toks = [t for t in line.replace(" ", "").split(",") if t]
            comp = []
            for tok in toks:
                m = re.fullmatch(r"([+-])(\d+)([OU])", tok)
                if not m:
                    raise InputError(f"bad Gauss code token {tok!r}")
                comp.append(Visit(int(m.group(2)), m.group(3) == "O", 1 if m.group(1) == "+" else -1))
            comps.append(tuple(comp))
        return cls(tuple(comps))


def gauss_code(d: CrossingDiagram) -> GaussCode:
    """Visits of every component ordered by curve parameter."""
    per = [[] for _ in range(d.n_components)]
    for k, c in enumerate(d.crossings):
        per[c.over[0]].append((c.over[1], Visit(k, True, c.sign)))
        per[c.under[0]].append((c.under[1], Visit(k, False, c.sign)))
    return GaussCode(tuple(tuple(v for _, v in sorted(p, key=lambda x: x[0])) for p in per))


@dataclass(frozen=True)
class ConwayPolynomial:
    """Coefficients of 1, z, z^2, ... ."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(int(x) for x in c))

    def coefficient(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def alexander(self, t: float) -> float:
        """Symmetrized Alexander polynomial via z = t^(1/2) - t^(-1/2)."""
        z = math.sqrt(t) - 1 / math.sqrt(t)
        return sum(c * z ** k for k, c in enumerate(self.coeffs))

    def __str__(self):
        terms = [f"{c}" if k == 0 else f"{c}*z^{k}" for k, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


# --- skein resolution ----------------------------------------------------------
# Internally a diagram is a tuple of components, each a tuple of
# (crossing, over, sign) triples.

def _locate(comps, cid):
    return [(i, j) for i, comp in enumerate(comps) for j, v in enumerate(comp) if v[0] == cid]


def _drop(comps, ids):
    return tuple(tuple(v for v in comp if v[0] not in ids) for comp in comps)


def _reidemeister_pass(comps):
    for comp in comps:
        n = len(comp)
        for j in range(n):
            if n >= 2 and comp[j][0] == comp[(j + 1) % n][0]:
                return _drop(comps, {comp[j][0]})
    where = {}
    for i, comp in enumerate(comps):
        for j, v in enumerate(comp):
            where.setdefault(v[0], []).append((i, j, v[1]))
    for i, comp in enumerate(comps):
        n = len(comp)
        if n < 2:
            continue
        for j in range(n):
            a, b = comp[j], comp[(j + 1) % n]
            if a[0] == b[0] or a[1] != b[1] or a[2] != -b[2]:
                continue
            (pa,) = [w for w in where[a[0]] if w[2] != a[1]]
            (pb,) = [w for w in where[b[0]] if w[2] != b[1]]
            if pa[0] != pb[0]:
                continue
            m = len(comps[pa[0]])
            if (pa[1] - pb[1]) % m in (1, m - 1):
                return _drop(comps, {a[0], b[0]})
    return None


def _simplify(comps):
    while True:
        nxt = _reidemeister_pass(comps)
        if nxt is None:
            return comps
        comps = nxt


def _key(comps):
    rename = {}
    out = []
    for comp in comps:
        row = []
        for c, over, sign in comp:
            if c not in rename:
                rename[c] = len(rename)
            row.append((rename[c], over, sign))
        out.append(tuple(row))
    return tuple(out)


def _switch(comps, cid):
    return tuple(tuple((c, not o, -s) if c == cid else (c, o, s) for c, o, s in comp) for comp in comps)


def _smooth(comps, cid):
    (i, j), (k, l) = _locate(comps, cid)
    if i == k:
        seq = comps[i]
        new = (seq[j + 1:l], seq[l + 1:] + seq[:j])
        return comps[:i] + new + comps[i + 1:]
    a, b = comps[i], comps[k]
    merged = a[:j] + b[l + 1:] + b[:l] + a[j + 1:]
    rest = tuple(c for idx, c in enumerate(comps) if idx not in (i, k))
    return (merged,) + rest


def _first_undercrossing(comps):
    seen = set()
    for comp in comps:
        for c, over, _ in comp:
            if c not in seen:
                if not over:
                    return c
                seen.add(c)
    return None


def _poly_add(a, b):
    n = max(len(a), len(b))
    return tuple((a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n))


class _Resolver:
    def __init__(self, budget, pick=_first_undercrossing):
        self.budget = budget
        self.nodes = 0
        self.memo = {}
        self.pick = pick

    def __call__(self, comps):
        comps = _simplify(comps)
        key = _key(comps)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.nodes > self.budget:
            raise ResolutionBudgetExceeded(f"skein tree exceeded {self.budget} nodes")
        target = self.pick(comps)
        if target is None:
            # descending diagram: an unlink
            result = (1,) if len(comps) == 1 else ()
        else:
            sign = next(s for comp in comps for c, _, s in comp if c == target)
            switched = self(_switch(comps, target))
            smoothed = self(_smooth(comps, target))
            result = _poly_add(switched, (0,) + tuple(sign * x for x in smoothed))
        self.memo[key] = result
        return result


def conway(code: GaussCode, budget: int = SKEIN_BUDGET, pick=None) -> ConwayPolynomial:
    """Conway polynomial by the skein relation.

    Each step switches the first crossing met from below when the components
    are walked in order from their base points; once none is left the diagram
    is descending, hence an unlink. Reidemeister I and II reductions and a
    memo table keep the tree small.
    """
    comps = tuple(tuple((v.crossing, v.over, v.sign) for v in comp) for comp in code.components)
    resolver = _Resolver(budget, pick or _first_undercrossing)
    return ConwayPolynomial(resolver(comps))


def a2(code: GaussCode) -> int:
    """Second Conway coefficient of a knot."""
    if len(code.components) != 1:
        raise InputError("a2 is defined for knots")
    return conway(code).coefficient(2)


# --- directional writhe -----------------------------------------------------------

def fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = k * math.pi * (3 - math.sqrt(5))
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], -1)


def writhe_along(K, direction, n_samples: int = 1024, rng: np.random.Generator | None = None,
                 retries: int = 8) -> tuple[int, np.ndarray]:
    """Crossing writhe seen along ``direction``, nudging it if it is not generic."""
    link = as_link(K)
    d = np.asarray(direction, dtype=float)
    rng = rng or np.random.default_rng(0)
    for _ in range(retries):
        try:
            return writhe_from_crossings(project_crossings(link, d, n_samples), 0), d
        except NonGenericDirection:
            d = d + 1e-4 * rng.standard_normal(3)
            d /= np.linalg.norm(d)
    raise NonGenericDirection("could not find a generic direction nearby")


def directional_writhe(K, n_directions: int = 10_000, seed: int = 0, replicates: int = 10,
                       n_samples: int = 1024, directions=None) -> IntegralEstimate:
    """Average crossing writhe over projection directions.

    Directions form ``replicates`` randomly rotated Fibonacci lattices; the
    spread of the per-lattice means gives the error bar. Passing explicit
    ``directions`` averages over exactly those instead.
    """
    if directions is not None:
        vals = [writhe_along(K, d, n_samples)[0] for d in np.atleast_2d(directions)]
        return IntegralEstimate(float(np.mean(vals)), 0.0, len(vals), seed, "quadrature")
    if n_directions < 100:
        raise InputError("directional writhe needs at least 100 directions")
    rng = np.random.default_rng(seed)
    per = n_directions // replicates
    base = fibonacci_sphere(per)
    means = []
    for _ in range(replicates):
        rot = Rotation.random(random_state=rng)
        dirs = rot.apply(base)
        means.append(np.mean([writhe_along(K, d, n_samples, rng)[0] for d in dirs]))
    means = np.array(means)
    err = float(means.std(ddof=1) / math.sqrt(replicates))
    return IntegralEstimate(float(means.mean()), err, per * replicates, seed, "quasi_mc")
