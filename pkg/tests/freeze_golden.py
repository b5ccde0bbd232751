"""Regenerate golden.json from the independent oracles in _oracles.py.

Run from the repository root: python tests/freeze_golden.py
"""

import json
import math
from pathlib import Path

import numpy as np

from _oracles import brute_crossings, brute_gauss_linking
from knotcsi import presets
from knotcsi.geom import evaluate, grid, tangent


def naive_writhe(curve, n):
    """Trapezoid double sum of the self-linking kernel, diagonal dropped."""
    t = grid(n)
    P, dP = evaluate(curve, t), tangent(curve, t)
    h = 2 * math.pi / n
    total = 0.0
    for lo in range(0, n, 500):
        r = P[lo:lo + 500, None, :] - P[None, :, :]
        num = np.einsum("ijk,ijk->ij", np.cross(dP[lo:lo + 500, None, :], dP[None, :, :]), r)
        d = np.linalg.norm(r, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(d > 0, num / d ** 3, 0.0)
        total += k.sum()
    return total * h * h / (4 * math.pi)


def main():
    out = {}
    for name in ("hopf", "torus_2_4", "split_circles"):
        link = presets.preset(name)
        cr = brute_crossings(link, 800)
        out[f"{name}_z_crossing_signs"] = sorted(s for _, s in cr)
        out[f"{name}_midpoint_linking_600"] = brute_gauss_linking(link[0], link[1], 600)
    for name in ("trefoil", "figure_eight", "kinked_trefoil"):
        link = presets.preset(name)
        n = 4800 if name != "kinked_trefoil" else 16000
        out[f"{name}_z_writhe"] = int(sum(s for _, s in brute_crossings(link, 800 if name != "kinked_trefoil" else 4000)))
        out[f"{name}_writhe_integral"] = naive_writhe(link[0], n)
    Path(__file__).with_name("golden.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
