"""Named example links.

Each factory returns a fresh :class:`LinkEmbedding`. Curves that are not
trigonometric polynomials by construction (the kinked and twisted trefoils)
are fitted from dense samples and carry a fit error far below any tolerance
used downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from math import gcd

import numpy as np
from scipy.optimize import brentq

from .errors import InputError
from .geom import Curve, LinkEmbedding, evaluate, grid, second_derivative, tangent


def _curve(points_fn, degree, samples=None):
    m = samples or max(64, 8 * degree)
    return Curve.from_samples(points_fn(grid(m)), degree)


def circle() -> LinkEmbedding:
    return LinkEmbedding((Curve([0, 0, 0], [[1], [0], [0]], [[0], [1], [0]]),))


def hopf(tilt: float = np.pi / 4) -> LinkEmbedding:
    """Two unit circles, each through the other's centre, linking number +1."""
    a = Curve([0, 0, 0], [[1], [0], [0]], [[0], [1], [0]])
    b = Curve([1, 0, 0], [[1], [0], [0]], [[0], [-np.sin(tilt)], [-np.cos(tilt)]])
    return LinkEmbedding((a, b))


def torus(p: int, q: int, major: float = 2.0, minor: float = 1.0,
          mirror: bool = False) -> LinkEmbedding:
    """The (p, q) torus knot or link on the standard torus.

    Component k winds p/g times around the axis and q/g times around the
    core, offset by 2 pi k / g in the meridian angle, where g = gcd(p, q).
    ``mirror`` reflects through the horizontal plane.
    """
    g = gcd(p, q)
    if g == 0:
        raise InputError("torus type needs a nonzero entry")
    if g > 1 and p // g != 1:
        raise InputError("torus links are supported only when p divides q")
    pp, qq = p // g, q // g
    flip = -1.0 if mirror else 1.0
    comps = []
    for k in range(g):
        off = 2 * np.pi * k / g

        def pts(t, off=off):
            ring = major + minor * np.cos(qq * t + off)
            return np.stack([ring * np.cos(pp * t), ring * np.sin(pp * t),
                             flip * minor * np.sin(qq * t + off)], -1)

        comps.append(_curve(pts, pp + qq))
    return LinkEmbedding(tuple(comps))


def trefoil() -> LinkEmbedding:
    return torus(2, 3)


def trefoil_alt() -> LinkEmbedding:
    """A trefoil with a different parametrization: (sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)."""
    return LinkEmbedding((Curve([0, 0, 0],
                                [[0, 0, 0], [1, -2, 0], [0, 0, 0]],
                                [[1, 2, 0], [0, 0, 0], [0, 0, -1]]),))


def figure_eight() -> LinkEmbedding:
    """((2 + cos 2t) cos 3t, (2 + cos 2t) sin 3t, sin 4t)."""
    def pts(t):
        ring = 2 + np.cos(2 * t)
        return np.stack([ring * np.cos(3 * t), ring * np.sin(3 * t), np.sin(4 * t)], -1)
    return LinkEmbedding((_curve(pts, 5),))


def flat_trefoil(height: float = 0.01) -> LinkEmbedding:
    """The torus trefoil squashed vertically so it is almost horizontal."""
    (c,) = trefoil().components
    scale = np.array([1.0, 1.0, height])
    return LinkEmbedding((Curve(c.const * scale, c.cos * scale[:, None], c.sin * scale[:, None]),))


def split_circles() -> LinkEmbedding:
    """Two coplanar unit circles side by side."""
    a = Curve([0, 0, 0], [[1], [0], [0]], [[0], [1], [0]])
    b = Curve([3, 0, 0], [[1], [0], [0]], [[0], [1], [0]])
    return LinkEmbedding((a, b))


def separated_circles() -> LinkEmbedding:
    """Two unit circles on either side of the plane x = 1.5, not coplanar."""
    a = Curve([0, 0, 0], [[1], [0], [0]], [[0], [1], [0]])
    tilt = 0.3
    b = Curve([3, 0, 0.5], [[1], [0], [0]], [[0], [np.cos(tilt)], [np.sin(tilt)]])
    return LinkEmbedding((a, b))


def _trefoil_points(t):
    ring = 2 + np.cos(3 * t)
    return np.stack([ring * np.cos(2 * t), ring * np.sin(2 * t), np.sin(3 * t)], -1)


def _trefoil_tangent(t):
    ring = 2 + np.cos(3 * t)
    dr = -3 * np.sin(3 * t)
    return np.stack([dr * np.cos(2 * t) - 2 * ring * np.sin(2 * t),
                     dr * np.sin(2 * t) + 2 * ring * np.cos(2 * t),
                     3 * np.cos(3 * t)], -1)


def kinked_trefoil(handedness: int = 1, center: float = np.pi / 3, width: float = 0.08,
                   radius: float = 0.1, hop: float = 0.003, degree: int = 1024) -> LinkEmbedding:
    """The torus trefoil with one small Reidemeister-I curl added.

    Inside a window of half-width ``width`` around ``center`` the curve is
    displaced around a loop of radius ``radius`` in the plane spanned by the
    tangent and a horizontal normal, with a small out-of-plane ``hop`` so the
    loop clears itself. ``handedness`` picks which way the loop turns.
    """
    tan0 = _trefoil_tangent(np.array(center))
    tan0 = tan0 / np.linalg.norm(tan0)
    n1 = np.cross(tan0, [0.0, 0.0, 1.0])
    n1 /= np.linalg.norm(n1)
    n2 = np.cross(tan0, n1)

    def pts(t):
        d = np.angle(np.exp(1j * (t - center)))
        inside = np.abs(d) < width
        s = np.clip(d / width, -1 + 1e-15, 1 - 1e-15)
        step = np.where(inside, 0.5 * (1 + np.tanh(2 * s / (1 - s * s))), (d > 0) * 1.0)
        psi = 2 * np.pi * step
        bump = np.where(inside, np.exp(1 - 1 / (1 - s * s)), 0.0)
        disp = (radius * (np.sin(psi)[:, None] * tan0
                          + handedness * (1 - np.cos(psi))[:, None] * n1)
                - hop * (bump * np.cos(psi / 2))[:, None] * n2)
        return _trefoil_points(t) + disp

    return LinkEmbedding((_curve(pts, degree, samples=8 * degree),))


# --- Morse presets for the shrinking experiment ----------------------------

def _morse_points(t, eps=0.3):
    ring = 2 + np.cos(3 * t)
    x = ring * np.cos(2 * t)
    z = ring * np.sin(2 * t)
    dz = -3 * np.sin(3 * t) * np.sin(2 * t) + 2 * ring * np.cos(2 * t)
    y = eps * dz ** 2 * np.sin(3 * t) / 25
    return np.stack([x, y, z], -1)


def morse_trefoil() -> LinkEmbedding:
    """Trefoil drawn on the xz blackboard with y only a small depth offset.

    Where the height z is extremal the depth has a double zero in its
    derivative, so every horizontal tangent points along +x or -x.
    """
    return LinkEmbedding((_curve(_morse_points, 16, samples=128),))


def _twist(points, rate):
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    c, s = np.cos(rate * z), np.sin(rate * z)
    return np.stack([c * x - s * y, s * x + c * y, z], -1)


def morse_trefoil_rotated() -> LinkEmbedding:
    """The blackboard trefoil twisted about the vertical axis, linearly in height.

    The twist rate is chosen so the horizontal-tangent angles move by amounts
    whose max/min imbalance is exactly pi/2, which shifts the shrinking limit
    by one half.
    """
    base = morse_trefoil().components[0]
    ext = horizontal_extrema(base)
    imbalance = sum(e.height for e in ext if e.kind == "max") - sum(
        e.height for e in ext if e.kind == "min")
    rate = (np.pi / 2) / imbalance
    return LinkEmbedding((_curve(lambda t: _twist(_morse_points(t), rate), 48, samples=512),))


@dataclass(frozen=True)
class Extremum:
    param: float
    kind: str  # "max" or "min"
    height: float
    angle: float  # direction of the horizontal tangent, atan2(y', x')


def horizontal_extrema(curve: Curve, n: int = 4096) -> list[Extremum]:
    """Critical points of the height function, located by bracketing z'."""
    t = np.linspace(0.0, 2 * np.pi, n + 1)
    dz = tangent(curve, t)[:, 2]
    out = []
    for i in np.nonzero(np.sign(dz[:-1]) * np.sign(dz[1:]) < 0)[0]:
        r = brentq(lambda s: float(tangent(curve, s)[2]), t[i], t[i + 1], xtol=1e-14)
        zz = float(second_derivative(curve, r)[2])
        tan = tangent(curve, r)
        out.append(Extremum(float(r), "max" if zz < 0 else "min", float(evaluate(curve, r)[2]),
                            float(np.arctan2(tan[1], tan[0]))))
    return out


def predicted_shrink_limit(curve: Curve) -> float:
    """(1/pi)(sum of min angles - sum of max angles) reduced to [0, 1)."""
    ext = horizontal_extrema(curve)
    val = (sum(e.angle for e in ext if e.kind == "min")
           - sum(e.angle for e in ext if e.kind == "max")) / np.pi
    return float(val % 1.0)


PRESETS = {
    "circle": circle,
    "hopf": hopf,
    "trefoil": trefoil,
    "trefoil_alt": trefoil_alt,
    "figure_eight": figure_eight,
    "torus_2_4": lambda: torus(2, 4, mirror=True),
    "kinked_trefoil": kinked_trefoil,
    "flat_trefoil": flat_trefoil,
    "split_circles": split_circles,
    "separated_circles": separated_circles,
    "morse_trefoil": morse_trefoil,
    "morse_trefoil_rotated": morse_trefoil_rotated,
}

MORSE_PRESETS = frozenset({"morse_trefoil", "morse_trefoil_rotated"})


@cache
def preset(name: str) -> LinkEmbedding:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise InputError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
    return factory()
