"""Walk through the oscillator tower: levels, compatibility, faults, limit brackets.

Run with ``python3 demos/oscillator_tower.py``.
"""
import numpy as np

from lietower import harmonic_oscillator_N, nijenhuis_torsion
from lietower.checks import random_polynomial, sample_box
from lietower.fields import VectorField
from lietower.tower import (coherent_sections, limit_bracket, limit_section, nijenhuis_tower,
                            verify_system)


def main():
    # Each level carries the recursion operator of an i-mode oscillator.
    N2 = harmonic_oscillator_N(2)
    print("N_2 at (1, 0, 0, 1):")
    print(N2.at([1.0, 0.0, 0.0, 1.0])[0])

    # Its torsion vanishes on arbitrary fields, so the deformed bracket is a Lie bracket.
    rng = np.random.default_rng(0)
    X = VectorField(N2.chart, [random_polynomial(N2.chart.names, rng) for _ in range(4)])
    Y = VectorField(N2.chart, [random_polynomial(N2.chart.names, rng) for _ in range(4)])
    pts = sample_box(4, 100, seed=0)
    print(f"torsion of random fields: {np.max(np.abs(nijenhuis_torsion(N2, X, Y)(pts))):.2e}")

    # Stack three levels with coordinate projections between them.
    T = nijenhuis_tower(3)
    report = verify_system(T, samples=100, morphisms=True)
    print("\nverify_system on the depth-3 tower")
    print(report)

    # Doubling one bundle map breaks anchor compatibility immediately.
    broken = verify_system(T.scaled_morphism(1, 2.0), samples=100)
    print("\nafter doubling f_1^2:")
    for e in broken.failing():
        print(f"  {e.kind} ({e.lower},{e.upper}) residual {e.report.max_residual:.3f}")

    # A coherent family of sections and the levelwise bracket of two of them.
    s1 = limit_section(T, coherent_sections(T, rng))
    s2 = limit_section(T, coherent_sections(T, rng))
    br = limit_bracket(T, s1, s2)
    print(f"\nbracket of two coherent families stays coherent: residual {br.max_residual:.2e}")

    thread = T.system.push_down([0.3, -0.1, 0.5, 0.2, -0.4, 0.7])
    for label, value in zip(T.labels, br.evaluate(thread)):
        print(f"  level {label}: {np.round(value, 6)}")


if __name__ == "__main__":
    main()
