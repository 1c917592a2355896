"""The bimodule bundle and the pairing of flat lifts on CP^1 at level 1.

A holomorphic section s of the '+' bundle and an antiholomorphic section t
of the conjugate '-' bundle are lifted to flat Weyl sections; their frame
product is flat for the bimodule connection and equals the lift of s t.
"""

from kahler_fedosov.geom import builtin_model
from kahler_fedosov.modact import PairingSetup, module_connection, pairing

F = module_connection(builtin_model("cp1"), N=6)
P = PairingSetup(F, 1)
B = P.bimodule
cap = B.cap - 1

for s0, t0 in [("z1", "zb1"), ("z1^2+1", "zb1^3")]:
    s = P.lift_plus(s0, cap)
    t = P.lift_conj_minus(t0, cap)
    product = pairing(s, t)
    lifted = B.lift(f"({s0})*({t0})", cap)
    print(f"s = {s0}, t = {t0}")
    print("  D(pairing) vanishes:", B.D(product).truncate(cap - 2).is_zero())
    print("  pairing equals lift of product:", (product - lifted).truncate(cap - 1).is_zero())
    print("  weights present in the pairing:", product.weights())
