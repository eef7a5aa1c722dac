"""First-order systems u_x = phi, u_y = psi: integrability, involutivity, prolongation.

Run with ``python3 demos/jet_integrability.py``.
"""
from lietower.checks import sample_box
from lietower.expr import is_zero, to_string
from lietower.jets import (PDESystem1, cartan_contact_forms, contact_on_graph_residual,
                           integrability_residual, involutivity_check, prolong,
                           prolong_bracket_check, system_fields)


def main():
    pts = sample_box(3, 100, seed=0)
    for phi, psi in (("y", "x"), ("u", "u"), ("y", "0"), ("x*u", "y*u")):
        S = PDESystem1(phi, psi)
        ci = to_string(integrability_residual(S))
        rep = involutivity_check(S, pts)
        print(f"phi = {phi:<4} psi = {psi:<4} condition = {ci:<10} "
              f"[X,Y] residual {rep.max_residual:.2e} -> {'involutive' if rep.passed else 'not involutive'}")

    # The fields of an integrable system stay commuting after prolongation.
    X, Y = system_fields(PDESystem1("y", "x"))
    print(f"\npr(2)[X,Y] - [pr(2)X, pr(2)Y]: {prolong_bracket_check(X, Y, 2, 100).max_residual:.2e}")

    pr = prolong(X, 2)
    print("second prolongation of X:")
    for name, c in zip(pr.chart.names, pr.components):
        print(f"  d/d{name}: {to_string(c)}")

    print("\ncontact forms at order 2:")
    for name, coeffs in cartan_contact_forms(2):
        terms = [f"{to_string(c)} d{n}" for c, n in zip(coeffs, pr.chart.names) if not is_zero(c)]
        print(f"  theta_{name}: " + " + ".join(terms))
    print(f"pulled back along the 2-jet of sin(x)*y: "
          f"{contact_on_graph_residual('sin(x)*y', 2, sample_box(2, 50)).max_residual:.2e}")


if __name__ == "__main__":
    main()
