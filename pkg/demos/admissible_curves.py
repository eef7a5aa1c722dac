"""Integrate semisprays, measure admissibility and homogeneity, and lift to a tower.

Run with ``python3 demos/admissible_curves.py``.
"""
import math

import numpy as np

from lietower.algebroid import tangent_algebroid
from lietower.checks import sample_box
from lietower.dynamics import (admissibility_residual, homogeneity_check, integrate,
                               make_semispray, tower_semispray)
from lietower.fields import Chart
from lietower.tower import nijenhuis_tower


def main():
    line = tangent_algebroid(Chart(("x",)))
    harmonic = make_semispray(line, ["-x"])
    curve = integrate(harmonic, [1.0], [0.0], math.pi / 2, 1e-3)
    x, v = curve.end
    print(f"harmonic spray at t = pi/2: x = {x[0]:.3e}, v = {v[0]:.12f}")
    print(f"admissibility residual: {admissibility_residual(line, curve).max_residual:.2e}")

    # Quadratic accelerations are homogeneous; the harmonic one is not.
    pts = sample_box(2, 50, seed=0)
    for name, xi in (("geodesic", "0"), ("quadratic", "-e1^2"), ("harmonic", "-x")):
        rep = homogeneity_check(make_semispray(line, [xi]), [2.0, -0.5], pts)
        print(f"  {name:<9} homogeneity residual {rep.max_residual:.2e}  {'spray' if rep.passed else 'semispray only'}")

    # Per-level sprays on the oscillator tower that agree on surviving coordinates.
    T = nijenhuis_tower(2)
    sprays = [make_semispray(T.algebroid(1), ["-x1", "-y1"]),
              make_semispray(T.algebroid(2), ["-x1", "-y1", "e3*e4", "-x2"])]
    L = tower_semispray(T, sprays)
    curves = L.integrate([0.4, 0.1, -0.3, 0.2], [0.0, 0.5, 0.1, -0.2], 1.0, 1e-2)
    print(f"\ntower spray compatibility residual {L.max_residual:.2e}")
    print(f"levelwise curves: coherence residual {L.coherence_residual(curves):.2e}")
    print("level-2 curve, first rows (t, base, fiber):")
    print(np.round(curves[1].to_table()[:3], 5))


if __name__ == "__main__":
    main()
