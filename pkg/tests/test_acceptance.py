"""The twelve acceptance criteria, one test each, exact tolerances.

Every test prints one line ``CRITERION <n> PASS|FAIL <detail>``.
"""

import random
import subprocess
import sys
import time

from kahler_fedosov.coeff import GaussianRational, chart_ring, swap_variables
from kahler_fedosov.fedosov import (
    O_holomorphic, O_xi_rho, fedosov_holomorphic, fedosov_kahler, fedosov_real, flat_section, vector_field_bracket_check,
    moyal_equivalence_check, random_element, random_low_weight_element, restrict_to_real, star, tilde_delta_A_check,
)
from kahler_fedosov.geom import RealSymplecticChart, builtin_model, covariant_derivative_of_form, torsion
from kahler_fedosov.modact import (
    bimodule_checks, curvature_action_check, weight_one_action_check, module_checks, module_connection,
)
from kahler_fedosov.report import describe_residual
from kahler_fedosov.weyl import (
    WeylElement, delta, delta01, delta01_inv, delta10, delta10_inv, delta_inv, pi0, pi0star, pistar0,
    star as weyl_star, tilde_delta,
)

N = 6


def verdict(number: int, failures: list, extra: str = ""):
    status = "PASS" if not failures else "FAIL"
    detail = extra if not failures else "; ".join(failures[:6])
    print(f"CRITERION {number} {status} {detail}".rstrip())
    assert not failures, detail


def nonzero(label, residual):
    ok, desc = describe_residual(residual)
    return [] if ok else [f"{label}: {desc}"]


def random_function(ring, rng, names):
    f = ring.const(rng.randint(-3, 3))
    for _ in range(rng.randint(1, 3)):
        term = ring.const(GaussianRational(rng.randint(-2, 2) or 1, rng.randint(-1, 1)))
        for _ in range(rng.randint(1, 2)):
            term = term * ring.var(rng.choice(names))
        f = f + term
    return f


def test_criterion_01_kernel_algebra():
    start = time.time()
    cp1 = builtin_model("cp1")
    real = RealSymplecticChart.planar(chart_ring("real", 1).parse("1+x^2"))
    kernels = [("moyal-real", real.moyal()), ("moyal-holomorphic", cp1.complexify().moyal()),
               ("anti-wick", cp1.anti_wick())]
    failures = []
    for label, kernel in kernels:
        rng = random.Random(label)
        ring = kernel.ring
        one = WeylElement.function(ring.one, N)
        for i in range(200):
            a, b, c = (random_low_weight_element(ring, N, rng) for _ in range(3))
            lhs = weyl_star(weyl_star(a, b, kernel), c, kernel)
            rhs = weyl_star(a, weyl_star(b, c, kernel), kernel)
            failures += nonzero(f"{label} associativity #{i}", lhs - rhs)
            failures += nonzero(f"{label} unit #{i}", [weyl_star(one, a, kernel) - a, weyl_star(a, one, kernel) - a])
    elapsed = time.time() - start
    if elapsed >= 60:
        failures.append(f"runtime {elapsed:.1f}s exceeds 60s")
    verdict(1, failures, f"600 triples in {elapsed:.1f}s")


def test_criterion_02_homotopy_identities():
    failures = []
    rings = [("real", chart_ring("real", 1), [("", delta, delta_inv, pi0)]),
             ("kahler", builtin_model("flat-c2").ring,
              [("", delta, delta_inv, pi0), ("(1,0)", delta10, delta10_inv, pi0star),
               ("(0,1)", delta01, delta01_inv, pistar0)])]
    for label, ring, ops in rings:
        rng = random.Random(label)
        for i in range(200):
            a = random_element(ring, N + 1, rng, terms=4, form_degree=rng.randint(0, 2))
            for name, d, dinv, proj in ops:
                res = (a - proj(a) - d(dinv(a)) - dinv(d(a))).truncate(N)
                failures += nonzero(f"{label}{name} #{i}", res)
    verdict(2, failures, "200 elements per ring and polarization")


def test_criterion_03_fedosov_residuals():
    failures = []
    start = time.time()
    F8 = fedosov_kahler(builtin_model("cp1"), 8)
    failures += nonzero("cp1 N=8", F8.residual())
    cp1_time = time.time() - start
    if cp1_time >= 120:
        failures.append(f"cp1 N=8 took {cp1_time:.1f}s")
    failures += nonzero("disk N=8", fedosov_kahler(builtin_model("disk"), 8).residual())
    real = RealSymplecticChart.planar(chart_ring("real", 1).parse("1+x^2"))
    failures += nonzero("real chart N=6", fedosov_real(real, N=N).residual())
    failures += nonzero("holomorphic mode N=6", fedosov_holomorphic(builtin_model("cp1").complexify(), N=N).residual())
    verdict(3, failures, f"cp1 N=8 in {cp1_time:.1f}s")


def test_criterion_04_star_product_axioms():
    cp1 = builtin_model("cp1")
    F = fedosov_kahler(cp1, N)
    ring = cp1.ring
    rng = random.Random(4)
    failures = []
    for i in range(100):
        f = random_function(ring, rng, ["z1", "zb1"])
        g = random_function(ring, rng, ["z1", "zb1"])
        fg, gf = star(f, g, F), star(g, f, F)
        failures += nonzero(f"C0 #{i}", fg[0] - f * g)
        failures += nonzero(f"Poisson #{i}", fg[1] - gf[1] - cp1.poisson(f, g))
    for i in range(20):
        h = random_function(ring, rng, ["z1"])
        g = random_function(ring, rng, ["z1", "zb1"])
        hb = swap_variables(random_function(ring, rng, ["z1"]))
        left = star(h, g, F)
        right = star(g, hb, F)
        failures += nonzero(f"holomorphic-left #{i}", [left[0] - h * g] + left[1:])
        failures += nonzero(f"antiholomorphic-right #{i}", [right[0] - g * hb] + right[1:])
    verdict(4, failures, "100 pairs, 20 separation cases")


def test_criterion_05_holomorphic_flat_sections():
    cp1 = builtin_model("cp1")
    F = fedosov_kahler(cp1, N)
    rng = random.Random(5)
    failures = []
    for i in range(20):
        f = random_function(cp1.ring, rng, ["z1"])
        if i % 4 == 0:
            f = f / (cp1.ring.const(3) - cp1.ring.var("z1"))
        failures += nonzero(f"O_holomorphic #{i}", O_holomorphic(f, F, N).O - flat_section(f, F, N).O)
    for xi in (["1"], ["z1"], ["z1^2"]):
        failures += nonzero(f"D O_xi {xi[0]}", F.D(O_xi_rho(xi, F, N + 1).O))
    verdict(5, failures, "20 holomorphic f, 3 vector fields")


def test_criterion_06_vector_field_sections():
    F = fedosov_kahler(builtin_model("cp1"), N)
    triple = (["1"], ["z1"], ["z1^2"])
    failures = []
    for f in ("z1", "z1^3+2*z1", "1/(2-z1)"):
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                for r in vector_field_bracket_check(triple[i], triple[j], f, F):
                    if not r.passed:
                        failures.append(f"{r.check_id} ({i},{j}) f={f}: {r.residual}")
    verdict(6, failures, "sl2 triple, all ordered pairs")


def test_criterion_07_tilde_laplacian_suite():
    cp1 = builtin_model("cp1")
    F = fedosov_kahler(cp1, 8)
    failures = []
    R = cp1.weyl_R(8)
    failures += nonzero("Delta~ R", tilde_delta(R, cp1.G) - cp1.weyl_omega1(8).scale(GaussianRational(0, -2)))
    if max(F.A_parts) < 8:
        failures.append("A_(r) not computed up to r = 8")
    failures += nonzero("Delta~ A_(r) = 2 B_(r-1)", tilde_delta_A_check(F))
    for r in moyal_equivalence_check(F):
        if not r.passed:
            failures.append(f"{r.check_id}: {r.residual}")
    verdict(7, failures, f"r <= {max(F.A_parts)}")


def test_criterion_08_module_layer():
    failures = []
    for name in ("flat-c1", "cp1", "disk"):
        F = module_connection(builtin_model(name), N)
        results = [("", r) for r in curvature_action_check(F) + weight_one_action_check(F)]
        for k in (1, 2):
            results += [(f" k={k}", r) for r in module_checks(F, k)]
        for level, r in results:
            if not r.passed:
                failures.append(f"{name}{level} {r.check_id}: {r.residual}")
    verdict(8, failures, "flatness, Leibniz, curvature actions, frames")


def test_criterion_09_bimodule():
    F = module_connection(builtin_model("cp1"), N)
    failures = [f"{r.check_id}: {r.residual}" for r in bimodule_checks(F, 1) if not r.passed]
    verdict(9, failures, "cp1, k = 1")


def test_criterion_10_restriction():
    cp1 = builtin_model("cp1")
    Fh = fedosov_holomorphic(cp1.complexify(), N=N)
    Fm = fedosov_real(cp1, N=N)
    verdict(10, nonzero("A = restriction of A~", restrict_to_real(Fh.A, cp1) - Fm.A))


def test_criterion_11_symplectic_connection():
    ring = chart_ring("real", 1)
    failures = []
    for density in ("1+x^2", "1+x^2+y^2", "2+x*y^2"):
        chart = RealSymplecticChart.planar(ring.parse(density))
        if torsion(chart.connection):
            failures.append(f"{density}: torsion")
        if covariant_derivative_of_form(chart.form, chart.connection, ring):
            failures.append(f"{density}: nabla omega != 0")
    verdict(11, failures, "3 planar forms")


def test_criterion_12_determinism():
    cmd = [sys.executable, "-m", "kahler_fedosov", "verify", "--model", "cp1", "--weight", "6", "--format", "json"]
    first = subprocess.run(cmd, capture_output=True)
    second = subprocess.run(cmd, capture_output=True)
    failures = []
    if first.stdout != second.stdout or not first.stdout:
        failures.append("reports differ")
    if first.returncode != second.returncode:
        failures.append("exit codes differ")
    verdict(12, failures, f"{len(first.stdout)} bytes identical")
