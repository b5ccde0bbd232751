"""Jacobi diagrams on oriented one-manifolds and their low-degree algebra.

Half-edges are integers. Legs come first (``0 .. U-1``); half-edge ``k`` of
trivalent vertex ``v`` is ``U + 3 v + k`` and the vertex orientation is the
cyclic order ``(0, 1, 2)``. A leg's position on the support is a pair
``(component, rank)``: ranks run ``0 .. m-1`` along the component, and on a
circle they are only meaningful up to rotation.
"""

from __future__ import annotations

import itertools
import random
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from .errors import InvalidDiagram, UnsupportedDegree

CIRCLE = "circle"
LINE = "line"


@dataclass(frozen=True)
class Support:
    kinds: tuple[str, ...]
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        kinds = tuple(self.kinds)
        if not kinds or any(k not in (CIRCLE, LINE) for k in kinds):
            raise InvalidDiagram(f"bad support {kinds!r}")
        tags = tuple(self.tags) or tuple(str(i + 1) for i in range(len(kinds)))
        if len(tags) != len(kinds) or len(set(tags)) != len(tags):
            raise InvalidDiagram("support tags must be unique, one per component")
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "tags", tags)

    @classmethod
    def circle(cls) -> Support:
        return cls((CIRCLE,))

    @classmethod
    def line(cls) -> Support:
        return cls((LINE,))

    @classmethod
    def circles(cls, k: int) -> Support:
        return cls((CIRCLE,) * k)

    @classmethod
    def two_lines(cls) -> Support:
        return cls((LINE, LINE))

    def __len__(self):
        return len(self.kinds)


@dataclass(frozen=True)
class JacobiDiagram:
    support: Support
    legs: tuple[tuple[int, int], ...]
    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        legs = tuple((int(c), int(r)) for c, r in self.legs)
        edges = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in self.edges))
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "edges", edges)
        self._validate()

    def _validate(self):
        U, T = len(self.legs), self.n_vertices
        H = U + 3 * T
        if T < 0:
            raise InvalidDiagram("negative vertex count")
        seen = [0] * H
        for a, b in self.edges:
            if not (0 <= a < H and 0 <= b < H):
                raise InvalidDiagram(f"half-edge out of range in edge {(a, b)}")
            if a == b:
                raise InvalidDiagram("an edge joins a half-edge to itself")
            if a >= U and b >= U and (a - U) // 3 == (b - U) // 3:
                raise InvalidDiagram("simple loop at a trivalent vertex")
            seen[a] += 1
            seen[b] += 1
        if any(s != 1 for s in seen):
            raise InvalidDiagram("every half-edge must lie on exactly one edge")
        per_comp = defaultdict(list)
        for c, r in self.legs:
            if not 0 <= c < len(self.support):
                raise InvalidDiagram(f"leg on unknown support component {c}")
            per_comp[c].append(r)
        for c, ranks in per_comp.items():
            if sorted(ranks) != list(range(len(ranks))):
                raise InvalidDiagram(f"leg ranks on component {c} must be 0..m-1")
        # every dashed component must reach a leg
        reached = set(range(U))
        frontier = list(range(U))
        partner = self.partner
        while frontier:
            h = frontier.pop()
            for x in self._siblings(partner[h]):
                if x not in reached:
                    reached.add(x)
                    frontier.append(x)
        if len(reached) != H:
            raise InvalidDiagram("a dashed component carries no leg")

    def _siblings(self, h):
        U = len(self.legs)
        if h < U:
            return (h,)
        base = U + 3 * ((h - U) // 3)
        return (base, base + 1, base + 2)

    @cached_property
    def partner(self) -> tuple[int, ...]:
        out = [0] * (len(self.legs) + 3 * self.n_vertices)
        for a, b in self.edges:
            out[a] = b
            out[b] = a
        return tuple(out)

    @property
    def n_legs(self) -> int:
        return len(self.legs)

    @property
    def degree(self) -> int:
        return (self.n_legs + self.n_vertices) // 2

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_leg(self, h: int) -> bool:
        return h < len(self.legs)

    def vertex_of(self, h: int) -> int:
        return (h - len(self.legs)) // 3

    def legs_on(self, comp: int) -> list[int]:
        """Leg half-edges on ``comp`` sorted by rank."""
        return sorted((h for h, (c, _) in enumerate(self.legs) if c == comp),
                      key=lambda h: self.legs[h][1])

    def leg_counts(self) -> tuple[int, ...]:
        counts = [0] * len(self.support)
        for c, _ in self.legs:
            counts[c] += 1
        return tuple(counts)

    def flipped(self, vertex: int) -> JacobiDiagram:
        """Same graph with the cyclic order at ``vertex`` reversed."""
        U = len(self.legs)
        a, b = U + 3 * vertex + 1, U + 3 * vertex + 2
        swap = {a: b, b: a}
        edges = tuple((swap.get(x, x), swap.get(y, y)) for x, y in self.edges)
        return JacobiDiagram(self.support, self.legs, self.n_vertices, edges)

    def relabeled(self, leg_perm, vertex_perm, rotations) -> JacobiDiagram:
        """Isomorphic copy: legs and vertices renumbered, vertex half-edges rotated.

        ``leg_perm[i]`` is the new index of leg ``i``; ``vertex_perm[v]`` the new
        index of vertex ``v``; ``rotations[v]`` a cyclic shift of its half-edges.
        """
        U = len(self.legs)
        legs = [None] * U
        for i, pos in enumerate(self.legs):
            legs[leg_perm[i]] = pos

        def image(h):
            if h < U:
                return leg_perm[h]
            v, k = divmod(h - U, 3)
            return U + 3 * vertex_perm[v] + (k + rotations[v]) % 3

        edges = tuple((image(a), image(b)) for a, b in self.edges)
        return JacobiDiagram(self.support, tuple(legs), self.n_vertices, edges)

    def components(self) -> list[set[int]]:
        """Connected components of the dashed graph as sets of half-edges."""
        partner = self.partner
        H = len(partner)
        seen = [False] * H
        out = []
        for start in range(H):
            if seen[start]:
                continue
            comp = set()
            stack = [start]
            while stack:
                h = stack.pop()
                for x in self._siblings(h) + self._siblings(partner[h]):
                    if not seen[x]:
                        seen[x] = True
                        comp.add(x)
                        stack.append(x)
            out.append(comp)
        return out

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def __str__(self):
        return to_text(self)


# --- construction helpers ----------------------------------------------------

def _assemble(support, leg_keys, n_vertices, edges) -> JacobiDiagram:
    """Build a diagram from legs given by sortable keys.

    ``leg_keys[i] = (component, key)`` positions leg ``i``; keys only need to
    be ordered. Endpoints in ``edges`` are ``("L", i)`` or ``("V", v, k)``.
    """
    order = sorted(range(len(leg_keys)), key=lambda i: leg_keys[i])
    label = {}
    legs = []
    rank = defaultdict(int)
    for new, old in enumerate(order):
        comp = leg_keys[old][0]
        label[old] = new
        legs.append((comp, rank[comp]))
        rank[comp] += 1
    U = len(legs)

    def h(ref):
        return label[ref[1]] if ref[0] == "L" else U + 3 * ref[1] + ref[2]

    return JacobiDiagram(support, tuple(legs), n_vertices, tuple((h(a), h(b)) for a, b in edges))


def _parts(g: JacobiDiagram):
    U = len(g.legs)

    def ref(h):
        if h < U:
            return ("L", h)
        v, k = divmod(h - U, 3)
        return ("V", v, k)

    return [ref(a) for a, _ in g.edges], [ref(b) for _, b in g.edges]


def chord(support: Support, a: tuple[int, int], b: tuple[int, int]) -> JacobiDiagram:
    """A single chord joining leg positions ``a`` and ``b`` (component, key)."""
    return _assemble(support, [a, b], 0, [(("L", 0), ("L", 1))])


def chord_diagram(support: Support, pairs) -> JacobiDiagram:
    """Chord diagram on a single component from pairs of endpoint keys."""
    keys, edges = [], []
    for a, b in pairs:
        keys += [(0, a), (0, b)]
        edges.append((("L", len(keys) - 2), ("L", len(keys) - 1)))
    return _assemble(support, keys, 0, edges)


def theta() -> JacobiDiagram:
    return chord_diagram(Support.circle(), [(0, 1)])


def y_diagram() -> JacobiDiagram:
    """One trivalent vertex whose three legs sit on a circle in cyclic order."""
    return _assemble(Support.circle(), [(0, 0), (0, 1), (0, 2)], 1,
                     [(("L", k), ("V", 0, k)) for k in range(3)])


def x_diagram() -> JacobiDiagram:
    return chord_diagram(Support.circle(), [(0, 2), (1, 3)])


# --- canonical form ----------------------------------------------------------

def _leg_orders(g: JacobiDiagram):
    """Leg relabelings allowed by orientation-preserving self-maps of the support."""
    per_comp = [g.legs_on(c) for c in range(len(g.support))]
    choices = []
    for c, hs in enumerate(per_comp):
        if g.support.kinds[c] == CIRCLE and hs:
            choices.append([hs[o:] + hs[:o] for o in range(len(hs))])
        else:
            choices.append([hs])
    for combo in itertools.product(*choices):
        yield [h for part in combo for h in part]


def _refined_colors(g: JacobiDiagram, leg_label):
    """Colour refinement of vertices seeded by the leg labels."""
    U, T = g.n_legs, g.n_vertices
    partner = g.partner
    color = [0] * T
    for _ in range(T + 1):
        sigs = []
        for v in range(T):
            nb = []
            for k in range(3):
                p = partner[U + 3 * v + k]
                nb.append((0, leg_label[p]) if p < U else (1, color[(p - U) // 3]))
            sigs.append(tuple(sorted(nb)))
        table = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [table[s] for s in sigs]
        if new == color:
            break
        color = new
    return color


def _labelings(g: JacobiDiagram):
    """Yield (encoding, parity) for every canonical traversal of ``g``.

    Legs are labelled by an allowed leg order, then vertices breadth first.
    Entering a vertex fixes its first half-edge; the other two are ordered by
    an isomorphism-invariant key and branched over only when keys tie.
    """
    U, T = g.n_legs, g.n_vertices
    H = U + 3 * T
    partner = g.partner
    for order in _leg_orders(g):
        new = [-1] * H
        old_of = [-1] * H
        for i, h in enumerate(order):
            new[h] = i
            old_of[i] = h
        leg_label = {h: new[h] for h in range(U)}
        color = _refined_colors(g, leg_label)
        yield from _walk(g, partner, new, old_of, 0, 0, 0, color)


def _walk(g, partner, new, old_of, x, nv, parity, color):
    U = g.n_legs
    H = len(new)
    while x < H:
        h = old_of[x]
        if h < 0:
            x += 1
            continue
        p = partner[h]
        if new[p] >= 0:
            x += 1
            continue
        v, k = divmod(p - U, 3)
        base = U + 3 * v
        y, z = base + (k + 1) % 3, base + (k + 2) % 3

        def key(q):
            r = partner[q]
            if new[r] >= 0:
                return (0, new[r])
            return (1, color[(r - U) // 3])

        ky, kz = key(y), key(z)
        if ky < kz:
            options = ((y, z, 0),)
        elif kz < ky:
            options = ((z, y, 1),)
        else:
            options = ((y, z, 0), (z, y, 1))
        slot = U + 3 * nv
        if len(options) == 1:
            a, b, flip = options[0]
            for q, lab in ((p, slot), (a, slot + 1), (b, slot + 2)):
                new[q] = lab
                old_of[lab] = q
            nv += 1
            parity ^= flip
            x += 1
            continue
        for a, b, flip in options:
            n2, o2 = new[:], old_of[:]
            for q, lab in ((p, slot), (a, slot + 1), (b, slot + 2)):
                n2[q] = lab
                o2[lab] = q
            yield from _walk(g, partner, n2, o2, x + 1, nv + 1, parity ^ flip, color)
        return
    yield tuple(sorted(tuple(sorted((new[a], new[b]))) for a, b in g.edges)), parity


@lru_cache(maxsize=200_000)
def _canonical(g: JacobiDiagram):
    best = None
    parities = set()
    count = 0
    for enc, par in _labelings(g):
        if best is None or enc < best:
            best, parities, count = enc, {par}, 1
        elif enc == best:
            parities.add(par)
            count += 1
    legs = tuple((c, r) for c in range(len(g.support))
                 for r in range(sum(1 for cc, _ in g.legs if cc == c)))
    canon = JacobiDiagram(g.support, legs, g.n_vertices, best)
    sign = 0 if len(parities) == 2 else (-1 if 1 in parities else 1)
    return canon, sign, count


def canonical_form(g: JacobiDiagram) -> tuple[JacobiDiagram, int]:
    """Canonical representative and the AS sign relating ``g`` to it.

    ``g`` equals ``sign * canonical`` in the diagram space; sign 0 means an
    orientation-reversing automorphism forces ``g`` to vanish.
    """
    canon, sign, _ = _canonical(g)
    return canon, sign


def automorphism_count(g: JacobiDiagram) -> int:
    """Automorphisms fixing each support component and its orientation.

    Vertex orientations are ignored; on a line the leg order is fixed, on a
    circle it may rotate.
    """
    return _canonical(g)[2]


# --- formal sums -------------------------------------------------------------

class DiagramSum:
    """Finite rational combination of canonical diagrams of one degree."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[JacobiDiagram, Fraction] = {}
        for g, c in (terms or {}).items():
            self._add(g, Fraction(c))

    def _add(self, g, c):
        if c == 0:
            return
        canon, sign = canonical_form(g)
        if sign == 0:
            return
        if self.terms and next(iter(self.terms)).degree != canon.degree:
            raise InvalidDiagram("all terms of a sum must share one degree")
        v = self.terms.get(canon, Fraction(0)) + sign * c
        if v:
            self.terms[canon] = v
        else:
            self.terms.pop(canon, None)

    @classmethod
    def of(cls, g: JacobiDiagram, coeff=1) -> DiagramSum:
        return cls({g: coeff})

    @property
    def degree(self) -> int | None:
        return next(iter(self.terms)).degree if self.terms else None

    def copy(self) -> DiagramSum:
        out = DiagramSum()
        out.terms = dict(self.terms)
        return out

    def __iadd__(self, other):
        for g, c in other.terms.items():
            self._add(g, c)
        return self

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    def __neg__(self):
        out = DiagramSum()
        out.terms = {g: -c for g, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        k = Fraction(k)
        out = DiagramSum()
        if k:
            out.terms = {g: c * k for g, c in self.terms.items()}
        return out

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, DiagramSum) and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def __repr__(self):
        body = " + ".join(f"({c})*[{to_text(g).replace(chr(10), '; ')}]" for g, c in self.terms.items())
        return f"DiagramSum({body or '0'})"


# --- STU ---------------------------------------------------------------------

def stu_candidates(g: JacobiDiagram) -> list[int]:
    """Legs whose neighbour is a trivalent vertex."""
    return [h for h in range(g.n_legs) if not g.is_leg(g.partner[h])]


def stu_step(g: JacobiDiagram, leg: int) -> list[tuple[int, JacobiDiagram]]:
    """Expand the vertex next to ``leg``: vertex = parallel - crossed.

    With the vertex read counterclockwise as (leg side, right, left), the
    parallel term attaches the left edge first along the support.
    """
    U = g.n_legs
    partner = g.partner
    a = partner[leg]
    if a < U:
        raise InvalidDiagram("STU needs a leg attached to a trivalent vertex")
    v, k = divmod(a - U, 3)
    right = U + 3 * v + (k + 1) % 3
    left = U + 3 * v + (k + 2) % 3
    pr, pl = partner[right], partner[left]
    comp, rank = g.legs[leg]

    keys = []
    old_leg = {}
    for h, (c, r) in enumerate(g.legs):
        if h != leg:
            old_leg[h] = len(keys)
            keys.append((c, r))
    first, second = len(keys), len(keys) + 1
    keys += [(comp, rank - 0.5), (comp, rank)]
    vmap = {w: i for i, w in enumerate(x for x in range(g.n_vertices) if x != v)}

    def ref(h):
        if h < U:
            return ("L", old_leg[h])
        w, kk = divmod(h - U, 3)
        return ("V", vmap[w], kk)

    skip = {leg, a, right, left}
    base = [(ref(x), ref(y)) for x, y in g.edges if x not in skip and y not in skip]
    parallel = base + [(("L", first), ref(pl)), (("L", second), ref(pr))]
    crossed = base + [(("L", first), ref(pr)), (("L", second), ref(pl))]
    T = g.n_vertices - 1
    return [(1, _assemble(g.support, keys, T, parallel)),
            (-1, _assemble(g.support, keys, T, crossed))]


def stu_reduce(g: JacobiDiagram, rng: random.Random | None = None) -> DiagramSum:
    """Rewrite ``g`` as a combination of chord diagrams.

    Each step expands a vertex next to a leg; the first candidate leg is used
    unless ``rng`` is given, in which case the leg is drawn at random.
    """
    done = DiagramSum()
    todo = DiagramSum.of(g)
    while todo.terms:
        nxt = DiagramSum()
        for d, c in todo.items():
            if d.n_vertices == 0:
                done += DiagramSum.of(d, c)
                continue
            cands = stu_candidates(d)
            leg = rng.choice(cands) if rng else cands[0]
            for s, e in stu_step(d, leg):
                nxt += DiagramSum.of(e, s * c)
        todo = nxt
    return done


# --- chord diagrams and the quotient by STU ---------------------------------

def _matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        for m in _matchings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + m


def chord_diagrams(n: int, support: Support) -> list[JacobiDiagram]:
    """All degree-``n`` chord diagrams on a one-component support, canonical and sorted."""
    seen = set()
    for m in _matchings(list(range(2 * n))):
        legs = tuple((0, i) for i in range(2 * n))
        canon, _ = canonical_form(JacobiDiagram(support, legs, 0, tuple(m)))
        seen.add(canon)
    return sorted(seen, key=lambda d: d.edges)


def one_vertex_diagrams(n: int, support: Support) -> list[JacobiDiagram]:
    out = []
    positions = list(range(2 * n - 1))
    for trio in itertools.combinations(positions, 3):
        rest = [p for p in positions if p not in trio]
        for m in _matchings(rest):
            edges = [(("L", p), ("V", 0, k)) for k, p in enumerate(trio)]
            edges += [(("L", a), ("L", b)) for a, b in m]
            out.append(_assemble(support, [(0, p) for p in positions], 1, edges))
    return out


def _rref(rows, pivot_rule=min):
    """Exact reduced row echelon form of sparse rows (dicts col -> Fraction)."""
    pivots: dict[int, dict[int, Fraction]] = {}
    for row in rows:
        r = {c: Fraction(v) for c, v in row.items() if v}
        for c in [c for c in r if c in pivots]:
            f = r.get(c)
            if f:
                for cc, vv in pivots[c].items():
                    nv = r.get(cc, 0) - f * vv
                    if nv:
                        r[cc] = nv
                    else:
                        r.pop(cc, None)
        if not r:
            continue
        p = pivot_rule(r)
        inv = 1 / r[p]
        r = {c: v * inv for c, v in r.items()}
        for q, prow in pivots.items():
            f = prow.get(p)
            if f:
                for cc, vv in r.items():
                    nv = prow.get(cc, 0) - f * vv
                    if nv:
                        prow[cc] = nv
                    else:
                        prow.pop(cc, None)
        pivots[p] = r
    return pivots


@dataclass
class QuotientBasis:
    degree: int
    support: Support
    chords: list[JacobiDiagram]
    basis: list[JacobiDiagram]
    pivots: dict

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def project(self, s: DiagramSum) -> tuple[Fraction, ...]:
        """Coordinates of ``s`` (after STU reduction) in the quotient basis."""
        index = {d: i for i, d in enumerate(self.chords)}
        vec = defaultdict(Fraction)
        for g, c in s.items():
            if g.n_vertices:
                for h, cc in stu_reduce(g).items():
                    vec[index[h]] += c * cc
            else:
                vec[index[g]] += c
        for p, row in self.pivots.items():
            f = vec.get(p)
            if f:
                for cc, vv in row.items():
                    vec[cc] -= f * vv
        free = [index[b] for b in self.basis]
        return tuple(vec.get(i, Fraction(0)) for i in free)


MAX_QUOTIENT_DEGREE = 4


def quotient_basis(n: int, support: Support, seed: int | None = None) -> QuotientBasis:
    """Basis of degree-``n`` chord diagrams modulo the relations coming from STU.

    Each one-vertex diagram expands in three ways (one per leg); their
    pairwise differences span the four-term relations. ``seed`` shuffles the
    relation rows and pivot preference, which must not change the dimension.
    """
    if n > MAX_QUOTIENT_DEGREE or n < 0:
        raise UnsupportedDegree(f"quotient basis is capped at degree {MAX_QUOTIENT_DEGREE}")
    if len(support) != 1:
        raise UnsupportedDegree("quotient basis supports a single circle or line")
    chords = chord_diagrams(n, support)
    index = {d: i for i, d in enumerate(chords)}
    rows = []
    if n >= 2:
        for g in one_vertex_diagrams(n, support):
            exps = []
            for leg in stu_candidates(g):
                vec = defaultdict(Fraction)
                for s, d in stu_step(g, leg):
                    canon, sign = canonical_form(d)
                    vec[index[canon]] += s * sign
                exps.append(vec)
            for other in exps[1:]:
                rows.append({c: exps[0].get(c, 0) - other.get(c, 0)
                             for c in set(exps[0]) | set(other)})
    pivot_rule = min
    if seed is not None:
        rnd = random.Random(seed)
        rnd.shuffle(rows)
        pref = list(range(len(chords)))
        rnd.shuffle(pref)
        rank = {c: i for i, c in enumerate(pref)}

        def pivot_rule(r):
            return min(r, key=rank.__getitem__)

    pivots = _rref(rows, pivot_rule)
    basis = [d for i, d in enumerate(chords) if i not in pivots]
    return QuotientBasis(n, support, chords, basis, pivots)


# --- enumeration on several lines --------------------------------------------

MAX_ENUMERATION_DEGREE = 5


def _stubs_connected(edges) -> bool:
    # legs may open new vertices, so reachability is checked on the finished graph
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ka = a[:2] if a[0] == "V" else a
        kb = b[:2] if b[0] == "V" else b
        parent[find(ka)] = find(kb)
    return len({find(x) for x in list(parent)}) == 1


def _stub_graphs(U, T):
    """Connected uni-trivalent multigraphs with U labelled legs and T vertices.

    Vertices are introduced in increasing order and the stubs of one vertex
    choose non-decreasing partners, which removes most relabelled duplicates.
    Disconnected outcomes are discarded at the end.
    Returns edge lists over ("L", i) / ("V", v, k) endpoints.
    """
    leg_partner = [None] * U
    free = [3] * T
    used = [0] * T
    edges = []
    results = []

    def vstub(v):
        k = used[v]
        used[v] += 1
        free[v] -= 1
        return ("V", v, k)

    def unstub(v):
        used[v] -= 1
        free[v] += 1

    def rec(introduced, last_choice):
        # first open leg, else first vertex with open stubs
        cur = next((i for i in range(U) if leg_partner[i] is None), None)
        if cur is not None:
            leg_partner[cur] = True
            if T == 0:
                for j in range(cur + 1, U):
                    if leg_partner[j] is None:
                        leg_partner[j] = True
                        edges.append((("L", cur), ("L", j)))
                        rec(introduced, None)
                        edges.pop()
                        leg_partner[j] = None
            else:
                for w in range(min(introduced + 1, T)):
                    if free[w] == 0:
                        continue
                    edges.append((("L", cur), vstub(w)))
                    rec(max(introduced, w + 1), None)
                    edges.pop()
                    unstub(w)
            leg_partner[cur] = None
            return
        v = next((w for w in range(T) if free[w]), None)
        if v is None:
            if introduced == T and _stubs_connected(edges):
                results.append(list(edges))
            return
        if v >= introduced:
            return  # an unreached vertex: the graph would be disconnected
        lo = last_choice[1] if last_choice and last_choice[0] == v else 0
        for w in range(lo, min(introduced + 1, T)):
            if w == v or free[w] == 0:
                continue
            a = vstub(v)
            b = vstub(w)
            edges.append((a, b))
            rec(max(introduced, w + 1), (v, w) if free[v] else None)
            edges.pop()
            unstub(w)
            unstub(v)

    rec(0, None)
    return results


def enumerate_connected(n: int, support: Support | None = None, min_legs_per_line: int = 0,
                        trees_only: bool = False) -> list[JacobiDiagram]:
    """Every connected degree-``n`` diagram on a union of lines, up to isomorphism.

    Diagrams equal to minus themselves are included (with their canonical
    representative) so the list is exhaustive as graphs.
    """
    support = support or Support.two_lines()
    if n > MAX_ENUMERATION_DEGREE or n < 1:
        raise UnsupportedDegree(f"enumeration is capped at degree {MAX_ENUMERATION_DEGREE}")
    if any(k != LINE for k in support.kinds):
        raise UnsupportedDegree("enumeration supports line components only")
    ncomp = len(support)
    found = set()
    for U in range(1, 2 * n + 1):
        T = 2 * n - U
        if T == 0 and U != 2:
            continue
        if trees_only and U != n + 1:
            continue
        graphs = _stub_graphs(U, T)
        if not graphs:
            continue
        for dist in itertools.product(range(U + 1), repeat=ncomp):
            if sum(dist) != U or min(dist) < min_legs_per_line:
                continue
            keys = [(c, r) for c in range(ncomp) for r in range(dist[c])]
            for edges in graphs:
                g = _assemble(support, keys, T, edges)
                found.add(canonical_form(g)[0])
    return sorted(found, key=lambda d: (d.leg_counts(), d.n_vertices, d.edges))


# --- text format ---------------------------------------------------------------

_TOKEN = re.compile(r"^(L)(\d+)\.(\d+)$|^(T)(\d+)\.(\d+)$")


def to_text(g: JacobiDiagram) -> str:
    """Support line, one line per edge, then vertex cyclic orders."""
    U = g.n_legs

    def name(h):
        if h < U:
            c, r = g.legs[h]
            return f"L{c}.{r}"
        v, k = divmod(h - U, 3)
        return f"T{v}.{k}"

    lines = ["support: " + " ".join(g.support.kinds)]
    lines += [f"{name(a)} {name(b)}" for a, b in g.edges]
    lines += [f"T{v}: 0 1 2" for v in range(g.n_vertices)]
    return "\n".join(lines)


def from_text(text: str) -> JacobiDiagram:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("support:"):
        raise InvalidDiagram("diagram text must start with a support line")
    support = Support(tuple(lines[0].split(":", 1)[1].split()))
    pairs = []
    orders = {}
    for ln in lines[1:]:
        if ":" in ln:
            head, rest = ln.split(":", 1)
            if not head.startswith("T"):
                raise InvalidDiagram(f"bad cyclic-order line {ln!r}")
            order = [int(x) for x in rest.split()]
            if sorted(order) != [0, 1, 2]:
                raise InvalidDiagram(f"bad cyclic order {ln!r}")
            orders[int(head[1:])] = order
            continue
        toks = ln.split()
        if len(toks) != 2:
            raise InvalidDiagram(f"bad edge line {ln!r}")
        parsed = []
        for tok in toks:
            m = _TOKEN.match(tok)
            if not m:
                raise InvalidDiagram(f"bad half-edge {tok!r}")
            if m.group(1):
                parsed.append(("L", int(m.group(2)), int(m.group(3))))
            else:
                parsed.append(("T", int(m.group(5)), int(m.group(6))))
        pairs.append(parsed)
    leg_pos = sorted({(c, r) for p in pairs for kind, c, r in p if kind == "L"})
    verts = sorted({v for p in pairs for kind, v, _ in p if kind == "T"})
    vindex = {v: i for i, v in enumerate(verts)}
    lindex = {pos: i for i, pos in enumerate(leg_pos)}

    def ref(item):
        kind, a, b = item
        if kind == "L":
            return ("L", lindex[(a, b)])
        if b not in (0, 1, 2):
            raise InvalidDiagram(f"vertex half-edge index {b} out of range")
        local = orders.get(a, [0, 1, 2]).index(b)
        return ("V", vindex[a], local)

    return _assemble(support, leg_pos, len(verts), [(ref(x), ref(y)) for x, y in pairs])
