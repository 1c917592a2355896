"""Star products on the Fubini-Study chart of CP^1.

Prints the first coefficients C_r(f, g) of f * g for a few pairs and checks
two things by eye: holomorphic functions on the left (antiholomorphic on the
right) multiply pointwise, and C_1(f, g) - C_1(g, f) is the Poisson bracket.
"""

from kahler_fedosov.coeff import render
from kahler_fedosov.fedosov import fedosov_kahler, normalization_of, star
from kahler_fedosov.geom import builtin_model

chart = builtin_model("cp1")
F = fedosov_kahler(chart, N=6)
ring = chart.ring

for f, g in [("z", "zb"), ("zb", "z"), ("zb^2", "z"), ("z*zb", "z*zb")]:
    coeffs = star(f, g, F)
    print(f"{f} * {g}:")
    for r, c in enumerate(coeffs):
        print(f"  hbar^{r}: {render(c)}")

f, g = ring.parse("zb^2"), ring.parse("z*zb")
commutator = star(f, g, F)[1] - star(g, f, F)[1]
print("C_1 antisymmetrized minus Poisson bracket:", render(commutator - chart.poisson(f, g)))

# the normalization s = delta^{-1}(A + hbar B) of the closed-form connection
s = normalization_of(F)
print("lowest terms of s on CP^1:")
print(s.truncate(4).render())
