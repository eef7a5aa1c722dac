"""Mean-free directions of truncated Fourier data as a tower of distributions.

Level i has coordinates (a0, a1, b1, .., ai, bi). The mean functional reads
off a0; the algebroid at each level is its kernel, spanned by the other
coordinate fields. Truncation keeps the leading coefficients.

Run with ``python3 demos/fourier_corank1.py``.
"""
from lietower.tower import alpha_compatibility, corank1_tower, verify_system


def main():
    T = corank1_tower(4)
    for label in T.labels:
        A = T.algebroid(label)
        print(f"level {label}: base {A.chart.names}, fiber dim {A.fiber_dim}")
    rep = verify_system(T, samples=50, morphisms=True)
    print(f"\nverify_system: {'pass' if rep.passed else 'FAIL'}, max residual {rep.max_residual:.1e}")
    alpha = alpha_compatibility(T, samples=50)
    print(f"mean survives truncation and kills the anchor: residual {alpha.max_residual:.1e}")
    bad = verify_system(T.scaled_morphism(2, 0.5), samples=50)
    print(f"halving f_2^3: {len(bad.failing())} failing entries, max residual {bad.max_residual:.2f}")


if __name__ == "__main__":
    main()
