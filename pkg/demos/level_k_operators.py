"""Quantizable operators acting on holomorphic sections at level k.

A function f and a holomorphic vector field xi give flat Weyl sections; at
hbar = i/k they act on the flat lifts of holomorphic sections of the twisted
bundles.  The left action reproduces multiplication and differentiation; the
right action produces the transpose operator s -> -xi(s) - div(xi) s.
"""

from kahler_fedosov.coeff import render
from kahler_fedosov.geom import builtin_model
from kahler_fedosov.modact import (
    LineBundle, module_connection, quantizable_function, quantizable_xi, tdo_apply,
)

F = module_connection(builtin_model("cp1"), N=6)
ring = F.ring

for k in (1, 2):
    for sign in "+-":
        L = LineBundle(F, k, sign)
        print(f"level {k}, action {sign}")
        for label, Q, section in [
            ("f = z", quantizable_function("z1", L), "1"),
            ("xi = d/dz", quantizable_xi(("1",), L), "z1^3"),
            ("xi = z d/dz", quantizable_xi(("z1",), L), "z1^2"),
            ("xi = z^2 d/dz", quantizable_xi(("z1^2",), L), "z1"),
        ]:
            out = tdo_apply(Q, ring.parse(section), L)
            print(f"  {label:14s} on {section:5s} -> {render(out)}")
