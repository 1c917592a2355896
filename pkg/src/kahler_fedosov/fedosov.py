"""Fedosov connections, flat sections and the star products they induce.

Every object is computed modulo a weight cap ``N``.  A :class:`FedosovData`
keeps its connection form a little above ``N`` (``work_cap``) so that
identities which lose weight (brackets with the weight-one part, ``D`` itself)
can still be checked exactly up to ``N``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from .coeff import ChartRational, GaussianRational, I, transfer
from .geom import ChartError, HolomorphicChart, KahlerChart, SymplecticChart
from .report import CheckResult, check
from .weyl import (
    WeylElement, ProductKernel, bracket, delta, delta_inv, delta10_inv, evaluate_hbar,
    exp_scaled_tilde_delta, exterior_derivative, nabla, nabla10, pi0, star as weyl_star, tilde_delta,
)

HEADROOM = 2


class NotQuantizable(ValueError):
    """Raised when an element does not look polynomial in wb and hbar."""


# ================================================================ data

class FedosovData:
    """A connection D = nabla + (1/hbar)[gamma, .] solving a curvature equation.

    ``gamma = -omega_tilde + correction`` where the weight-one part
    ``-omega_tilde`` produces ``-delta``.  In Kahler mode ``correction`` is
    ``A + hbar*B``; otherwise ``B`` is zero.
    """

    def __init__(self, chart: SymplecticChart, kernel: ProductKernel, kind: str, cap: int,
                 A: WeylElement, B: WeylElement, omega_h: WeylElement, curvature: WeylElement,
                 s: Optional[WeylElement] = None, A_parts=None, B_parts=None):
        self.chart = chart
        self.kernel = kernel
        self.kind = kind
        self.cap = cap
        self.work_cap = A.cap
        self.A = A
        self.B = B
        self.correction = A + B.times_hbar(1)
        self.omega_h = omega_h
        self.curvature = curvature
        self.s = s
        self.A_parts = A_parts or {}
        self.B_parts = B_parts or {}
        self.gamma_one = -chart.weyl_omega_tilde(self.work_cap)
        self.gamma = self.gamma_one + self.correction

    @property
    def ring(self):
        return self.chart.ring

    @property
    def model(self) -> str:
        return self.chart.name

    def target(self, cap: Optional[int] = None) -> WeylElement:
        cap = self.cap if cap is None else cap
        return (self.omega_h - self.chart.weyl_omega(cap)).truncate(cap)

    def D(self, a: WeylElement) -> WeylElement:
        """nabla a + (1/hbar)[gamma, a], exact up to weight a.cap - 1."""
        if a.cap > self.work_cap:
            raise ValueError(f"element cap {a.cap} exceeds the connection's working cap {self.work_cap}")
        g = self.gamma.with_cap(a.cap)
        out = nabla(a, self.chart.connection) + bracket(g, a, self.kernel)
        return out.truncate(a.cap - 1)

    def residual(self, cap: Optional[int] = None) -> WeylElement:
        """R + nabla gamma + (1/2hbar)[gamma, gamma] - target, modulo weight > cap."""
        cap = self.cap if cap is None else cap
        if cap + 1 > self.work_cap:
            raise ValueError("residual cap too large for this connection")
        g = self.gamma.with_cap(cap + 1)
        total = (self.curvature.with_cap(cap) + nabla(g, self.chart.connection).truncate(cap)
                 + bracket(g, g, self.kernel).scale(Fraction(1, 2)).truncate(cap) - self.target(cap))
        return total.truncate(cap)

    def at_level(self, k) -> "LevelConnection":
        return LevelConnection(self, k)

    def describe(self) -> dict:
        return {"model": self.model, "kind": self.kind, "cap": self.cap, "kernel": self.kernel.name}


def hbar_at_level(k) -> GaussianRational:
    k = GaussianRational.coerce(k)
    if not k:
        raise ValueError("level k must be nonzero")
    return I / k


class LevelConnection:
    """D_k: the connection with hbar evaluated at i/k.

    gamma has hbar-degree at most one in every mode built here, so the
    evaluated form is exact up to fiber degree ``work_cap - 2``.
    """

    def __init__(self, F: FedosovData, k):
        self.F = F
        self.k = GaussianRational.coerce(k)
        self.hbar = hbar_at_level(self.k)
        J = F.gamma.max_hbar_power()
        self.cap = F.work_cap - 2 * J
        self.gamma = evaluate_hbar(F.gamma, self.hbar, self.cap)
        self.A = evaluate_hbar(F.A, self.hbar, self.cap)
        self.correction = evaluate_hbar(F.correction, self.hbar, self.cap)

    @property
    def chart(self):
        return self.F.chart

    @property
    def kernel(self):
        return self.F.kernel

    def D(self, a: WeylElement) -> WeylElement:
        if a.hbar != self.hbar:
            raise ValueError("element is not evaluated at this level")
        if a.cap > self.cap:
            raise ValueError(f"element cap {a.cap} exceeds the level connection's cap {self.cap}")
        g = self.gamma.with_cap(a.cap)
        out = nabla(a, self.chart.connection) + bracket(g, a, self.kernel)
        return out.truncate(a.cap - 1)


# ========================================================== the solvers

def _require_closed(omega_h: WeylElement):
    if any(sum(e) for (_, e, _) in omega_h.terms):
        raise ChartError("omega_h must be fiber-free")
    if any(len(f) != 2 for (_, _, f) in omega_h.terms):
        raise ChartError("omega_h must be a 2-form")
    if any(r == 0 for (r, _, _) in omega_h.terms):
        raise ChartError("omega_h must vanish at hbar = 0")
    if not exterior_derivative(omega_h).is_zero():
        raise ChartError("omega_h is not closed")


def _check_normalization_input(s: WeylElement):
    for (r, e, f), _ in s.terms.items():
        if f:
            raise ChartError("s must be a 0-form")
        if 2 * r + sum(e) < 3:
            raise ChartError("s must lie in weight 3 and above")
        if r == 0 and not sum(e):
            raise ChartError("s must have no component in the image of pi0")
    if not pi0(s).is_zero():
        raise ChartError("pi0(s) must vanish")


def solve_connection(chart: SymplecticChart, kernel: ProductKernel, curvature: WeylElement,
                     omega_h: Optional[WeylElement], s: Optional[WeylElement], N: int, kind: str,
                     headroom: int = HEADROOM) -> FedosovData:
    """Solve  delta A = R + nabla A + (1/2hbar)[A, A] - omega_h  with  delta^{-1} A = s.

    The fixed point A = delta s + delta^{-1}(...) is triangular in weight, so
    one sweep per weight level determines it.
    """
    if N < 2:
        raise ValueError("weight cap must be at least 2")
    ring = chart.ring
    work = N + headroom
    omega_h = WeylElement.zero(ring, work) if omega_h is None else omega_h.with_cap(work)
    if not omega_h.is_zero():
        _require_closed(omega_h)
    if s is None:
        s = WeylElement.zero(ring, work + 1)
    else:
        _check_normalization_input(s)
        s = s.with_cap(work + 1)
    ds = delta(s)
    R = curvature.with_cap(work)
    A = WeylElement.zero(ring, work)
    conn = chart.connection
    for w in range(2, work + 1):
        known = A.with_cap(w - 1)
        rhs = (R.with_cap(w - 1) + nabla(known, conn) + bracket(known, known, kernel).scale(Fraction(1, 2))
               - omega_h.with_cap(w - 1))
        level = (ds.with_cap(w) + delta_inv(rhs.with_cap(w))).weight_component(w)
        A = (A + level.with_cap(work)).with_cap(work)
    return FedosovData(chart, kernel, kind, N, A, WeylElement.zero(ring, work), omega_h.with_cap(N),
                       curvature.with_cap(N), s=s)


def fedosov_real(chart: SymplecticChart, omega_h: Optional[WeylElement] = None,
                 s: Optional[WeylElement] = None, N: int = 6) -> FedosovData:
    """Moyal-kernel Fedosov connection with target -omega + omega_h.

    Works on any chart carrying a symplectic connection; on a Kahler chart it
    uses the Chern connection and complex coordinates.
    """
    return solve_connection(chart, chart.moyal(), chart.weyl_curvature(N + HEADROOM), omega_h, s, N, "moyal")


def fedosov_holomorphic(chart: HolomorphicChart, omega_h: Optional[WeylElement] = None, N: int = 6) -> FedosovData:
    if chart.mode != "holomorphic":
        raise ChartError("fedosov_holomorphic needs a holomorphic-mode chart")
    return solve_connection(chart, chart.moyal(), chart.weyl_curvature(N + HEADROOM), omega_h, None, N,
                            "moyal-holomorphic")


def tilde_nabla10(a: WeylElement, chart: KahlerChart) -> WeylElement:
    """(delta^{1,0})^{-1} composed with nabla^{1,0}; raises weight by one."""
    return delta10_inv(nabla10(a, chart.connection))


def fedosov_kahler(chart: KahlerChart, N: int = 6, headroom: int = HEADROOM) -> FedosovData:
    """Anti-Wick connection assembled from the closed forms of A and B.

    A_(r) has weight r + 1 and B_(r) has fiber degree r; A_(r+1) and B_(r+1)
    are obtained from their predecessors by one application of
    (delta^{1,0})^{-1} nabla^{1,0}.
    """
    if not isinstance(chart, KahlerChart):
        raise ChartError("fedosov_kahler needs a Kahler chart")
    work = N + headroom
    ring = chart.ring
    A_parts, B_parts = {}, {}
    cur = delta10_inv(chart.weyl_R(work))
    r = 2
    while r + 1 <= work:
        A_parts[r] = cur
        r += 1
        cur = tilde_nabla10(cur, chart)
    cur = delta10_inv(chart.weyl_omega1(work).scale(-I))
    r = 1
    while r + 2 <= work:
        B_parts[r] = cur
        r += 1
        cur = tilde_nabla10(cur, chart)
    A = WeylElement.zero(ring, work)
    for part in A_parts.values():
        A = A + part
    B = WeylElement.zero(ring, work)
    for part in B_parts.values():
        B = B + part
    omega_h = chart.weyl_omega1(N).times_hbar(1).scale(I)
    return FedosovData(chart, chart.anti_wick(), "anti-wick", N, A, B, omega_h, chart.weyl_R(N),
                       A_parts=A_parts, B_parts=B_parts)


def fedosov_kahler_generic(chart: KahlerChart, N: int = 6, normalization: Optional[WeylElement] = None) -> FedosovData:
    """The anti-Wick connection from the generic solver.

    With ``normalization = delta^{-1}(A + hbar B)`` taken from the closed
    forms this must reproduce them; it is the independent cross-check.
    """
    omega_h = chart.weyl_omega1(N + HEADROOM).times_hbar(1).scale(I)
    return solve_connection(chart, chart.anti_wick(), chart.weyl_R(N + HEADROOM), omega_h, normalization, N,
                            "anti-wick-generic")


def moyal_from_kahler(F: FedosovData) -> FedosovData:
    """gamma_M = -omega_tilde + A with the Moyal kernel and omega_h = 0."""
    chart = F.chart
    zero = WeylElement.zero(chart.ring, F.work_cap)
    return FedosovData(chart, chart.moyal(), "moyal-from-kahler", F.cap, F.A, zero,
                       WeylElement.zero(chart.ring, F.cap), chart.weyl_R(F.cap), A_parts=F.A_parts)


def normalization_of(F: FedosovData) -> WeylElement:
    """s = delta^{-1}(A + hbar B), reported but not asserted on curved charts."""
    return delta_inv(F.correction.with_cap(F.work_cap + 1))


def restrict_to_real(a: WeylElement, chart: KahlerChart) -> WeylElement:
    """Pull a holomorphic-mode element back along u^a -> z^a, u^{n+a} -> zb^a."""
    if a.mode != "holomorphic":
        raise ValueError("restrict_to_real expects a holomorphic-mode element")
    if a.ring.n != chart.n:
        raise ValueError("dimension mismatch")
    ring = chart.ring
    return WeylElement(ring, {k: transfer(c, ring) for k, c in a.terms.items()}, a.cap, a.hbar)


# ======================================================== flat sections

@dataclass(frozen=True)
class FlatSection:
    f: object
    O: WeylElement

    @property
    def cap(self) -> int:
        return self.O.cap


def _as_function_element(f, ring, cap: int) -> WeylElement:
    if isinstance(f, WeylElement):
        if any(sum(e) or fm for (_, e, fm) in f.terms):
            raise ValueError("the prescribed projection must be fiber-free")
        return f.with_cap(cap)
    if isinstance(f, str):
        f = ring.parse(f)
    if not isinstance(f, ChartRational):
        f = ring.const(f)
    return WeylElement.function(f, cap)


def flat_section(f, F: FedosovData, cap: Optional[int] = None) -> FlatSection:
    """The D-flat section with pi0 = f, solved weight by weight.

    O = f + delta^{-1}(nabla O + (1/hbar)[correction, O]) since the weight-one
    part of gamma contributes -delta.
    """
    cap = F.cap if cap is None else cap
    if cap > F.work_cap:
        raise ValueError(f"cap {cap} exceeds the connection's working cap {F.work_cap}")
    base = _as_function_element(f, F.ring, cap)
    conn = F.chart.connection
    O = base.with_cap(0)
    for w in range(1, cap + 1):
        prev = O.with_cap(w - 1)
        rhs = nabla(prev, conn) + bracket(F.correction.with_cap(w), prev, F.kernel)
        O = base.with_cap(w) + delta_inv(rhs.with_cap(w))
    return FlatSection(f, O)


def O_holomorphic(f, F: FedosovData, cap: Optional[int] = None) -> FlatSection:
    """Sum of (delta^{1,0})^{-1} nabla^{1,0} powers of a holomorphic f."""
    chart = F.chart
    cap = F.cap if cap is None else cap
    base = _as_function_element(f, chart.ring, cap)
    for (_, _, _), c in base.terms.items():
        if not chart.is_holomorphic(c):
            raise ValueError("f is not holomorphic")
    return FlatSection(f, _tilde_series(base, chart))


def _tilde_series(a: WeylElement, chart: KahlerChart) -> WeylElement:
    total = a
    cur = a
    while True:
        cur = tilde_nabla10(cur, chart)
        if cur.is_zero():
            return total
        total = total + cur


def xi_of(xi: Sequence, f: ChartRational) -> ChartRational:
    """Holomorphic vector field xi^a d/dz^a applied to f."""
    out = f.ring.zero
    for a, c in enumerate(xi):
        if not c.is_zero():
            out = out + c * f.derive(a)
    return out


def lie_bracket(xi1: Sequence, xi2: Sequence) -> list:
    return [xi_of(xi1, xi2[m]) - xi_of(xi2, xi1[m]) for m in range(len(xi1))]


def _coerce_field(xi, chart: KahlerChart) -> list:
    ring = chart.ring
    if len(xi) != chart.n:
        raise ValueError(f"vector field needs {chart.n} components")
    out = []
    for c in xi:
        if isinstance(c, str):
            c = ring.parse(c)
        elif not isinstance(c, ChartRational):
            c = ring.const(c)
        if not chart.is_holomorphic(c):
            raise ValueError("vector field components must be holomorphic")
        out.append(c)
    return out


def xi_rho(xi, chart: KahlerChart, cap: int) -> WeylElement:
    """-i xi(rho0) - hbar xi(rho1) as a fiber-free element."""
    chart._require_drho0()
    xi = _coerce_field(xi, chart)
    ring = chart.ring
    r0 = ring.zero
    r1 = ring.zero
    for a in range(chart.n):
        r0 = r0 + xi[a] * chart.drho0[a]
        r1 = r1 + xi[a] * chart.drho1[a]
    zero = (0,) * ring.nvars
    terms = {(0, zero, ()): r0 * (-I), (1, zero, ()): -r1}
    return WeylElement(ring, terms, cap)


def O_xi_rho(xi, F: FedosovData, cap: Optional[int] = None) -> FlatSection:
    """Flat section attached to the holomorphic vector field xi."""
    chart = F.chart
    cap = F.cap if cap is None else cap
    xi = _coerce_field(xi, chart)
    start = xi_rho(xi, chart, cap) + chart.xi_hat(xi, cap)
    return FlatSection(("xi", tuple(xi)), _tilde_series(start, chart))


def star(f, g, F: FedosovData, cap: Optional[int] = None) -> List[ChartRational]:
    """Coefficients C_0, C_1, ... of the induced star product up to hbar^(cap//2)."""
    cap = F.cap if cap is None else cap
    Of = flat_section(f, F, cap).O
    Og = flat_section(g, F, cap).O
    prod = pi0(weyl_star(Of, Og, F.kernel))
    ring = F.ring
    zero = (0,) * ring.nvars
    return [prod.terms.get((r, zero, ()), ring.zero) for r in range(cap // 2 + 1)]


# =================================================== non-formal evaluation

def subalgebra_bounds(O: WeylElement) -> tuple:
    """(max wb-degree, max hbar power) seen below the top two weights.

    An element of the subalgebra polynomial in wb and hbar has bounded
    degrees; the truncation can only be tested by requiring that the top
    weights introduce nothing new.
    """
    n = O.ring.n
    wbar = range(n, 2 * n)
    low = [(k, sum(k[1][j] for j in wbar), k[0]) for k in O.terms if O.weight(k) <= O.cap - 2]
    q = max((x[1] for x in low), default=0)
    j = max((x[2] for x in low), default=0)
    return q, j


def check_subalgebra(O: WeylElement, max_wbar: Optional[int] = None, max_hbar: Optional[int] = None) -> tuple:
    if O.mode != "kahler":
        raise ValueError("evaluation at a level needs a Kahler chart")
    q, j = subalgebra_bounds(O)
    q = q if max_wbar is None else max_wbar
    j = j if max_hbar is None else max_hbar
    n = O.ring.n
    for key in O.terms:
        dq = sum(key[1][n:])
        if dq > q or key[0] > j:
            raise NotQuantizable(
                f"term {key} exceeds wb-degree {q} or hbar power {j}; not polynomial in wb and hbar")
    return q, j


def ev_k(O: WeylElement, k, max_wbar: Optional[int] = None, max_hbar: Optional[int] = None) -> WeylElement:
    """Evaluate hbar = i/k.  The result is exact up to fiber degree cap - 2J."""
    value = hbar_at_level(k)
    if not O.formal:
        raise ValueError("element is already evaluated")
    _, j = check_subalgebra(O, max_wbar, max_hbar)
    J = max(j, O.max_hbar_power())
    cap = O.cap - 2 * J
    if cap < 0:
        raise ValueError("cap too small to evaluate")
    return evaluate_hbar(O, value, cap)


# ============================================================== checks

def random_element(ring, cap: int, rng: random.Random, terms: int = 4, form_degree: Optional[int] = None,
                   max_fiber: Optional[int] = None, hbar=None) -> WeylElement:
    """A small random element with polynomial coefficients."""
    d = ring.nvars
    names = ring.names
    out = {}
    max_fiber = cap if max_fiber is None else max_fiber
    for _ in range(terms):
        deg = rng.randint(0, min(cap, max_fiber))
        exps = [0] * d
        for _ in range(deg):
            exps[rng.randrange(d)] += 1
        r = 0
        if hbar is None:
            r = rng.randint(0, max(0, (cap - deg) // 2))
        p = rng.randint(0, 2) if form_degree is None else form_degree
        forms = tuple(sorted(rng.sample(range(d), min(p, d))))
        poly = ring.const(GaussianRational(rng.randint(-3, 3), rng.randint(-2, 2)))
        for _ in range(rng.randint(0, 2)):
            poly = poly * (ring.var(rng.choice(names)) + ring.const(rng.randint(-2, 2)))
        key = (r, tuple(exps), forms)
        out[key] = out.get(key, ring.zero) + poly
    return WeylElement(ring, out, cap, hbar)


def random_low_weight_element(ring, cap: int, rng: random.Random, form_degree: Optional[int] = None) -> WeylElement:
    """Mostly weight 2-3 terms plus one arbitrary term, so products of three stay below the cap."""
    fd = (lambda: rng.randint(0, 1)) if form_degree is None else (lambda: form_degree)
    low = random_element(ring, rng.choice((2, 3)), rng, terms=3, form_degree=fd()).with_cap(cap)
    return low + random_element(ring, cap, rng, terms=1, form_degree=fd())


def residual_check(F: FedosovData) -> CheckResult:
    return check(f"curvature-equation/{F.kind}", F.model, F.cap, F.residual(), low_cap_below=4)


def flatness_residual(section: WeylElement, F) -> WeylElement:
    return F.D(section)


def tilde_delta_A_check(F: FedosovData) -> list:
    """Delta~ A_(r) = 2 B_(r-1) for every stored r >= 3."""
    G = F.chart.G
    out = []
    for r, Ar in sorted(F.A_parts.items()):
        if r < 3 or (r - 1) not in F.B_parts:
            continue
        out.append(tilde_delta(Ar, G) - F.B_parts[r - 1].scale(2))
    return out


def vector_field_bracket_check(xi1, xi2, f, F: FedosovData) -> List[CheckResult]:
    """(1/hbar)[O_xi(rho), O_f] = O_xi(f) and the commutator of two such sections."""
    N = F.cap
    c = N + 1
    chart = F.chart
    xi1 = _coerce_field(xi1, chart)
    xi2 = _coerce_field(xi2, chart)
    if isinstance(f, str):
        f = chart.ring.parse(f)
    O1 = O_xi_rho(xi1, F, c).O
    O2 = O_xi_rho(xi2, F, c).O
    Of = flat_section(f, F, c).O
    lhs1 = bracket(O1, Of, F.kernel).truncate(N)
    rhs1 = O_holomorphic(xi_of(xi1, f), F, N).O
    lhs2 = bracket(O1, O2, F.kernel).truncate(N)
    rhs2 = O_xi_rho(lie_bracket(xi1, xi2), F, N).O
    return [check("vector-field-derivation", F.model, N, lhs1 - rhs1),
            check("vector-field-closure", F.model, N, lhs2 - rhs2)]


def moyal_equivalence_check(F: FedosovData, samples: int = 3, seed: int = 0) -> List[CheckResult]:
    """The exp(-(hbar/2) Delta~) equivalence between the anti-Wick and Moyal pictures."""
    N = F.cap
    chart = F.chart
    G = chart.G
    half = Fraction(-1, 2)
    e_corr = exp_scaled_tilde_delta(F.correction.with_cap(N), G, half)
    r1 = e_corr - F.A.with_cap(N)
    R = chart.weyl_R(N)
    r2 = exp_scaled_tilde_delta(R, G, half) - (R + chart.weyl_omega1(N).times_hbar(1).scale(I))
    M = moyal_from_kahler(F)
    r3 = M.residual()
    rng = random.Random(seed)
    r4 = []
    for _ in range(samples):
        a = random_element(chart.ring, N + 1, rng, terms=3, form_degree=rng.randint(0, 1))
        lhs = exp_scaled_tilde_delta(F.D(a), G, half)
        rhs = M.D(exp_scaled_tilde_delta(a, G, half))
        r4.append((lhs - rhs).truncate(N))
    return [check("moyal-equivalence-correction", F.model, N, r1),
            check("moyal-equivalence-curvature", F.model, N, r2),
            check("moyal-equivalence-curvature-equation", F.model, N, r3),
            check("moyal-equivalence-intertwining", F.model, N, r4)]


def D_squared_check(F, samples: int = 3, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    N = F.cap
    res = []
    for _ in range(samples):
        a = random_element(F.ring, N + 2, rng, terms=3, form_degree=rng.randint(0, 1))
        res.append(F.D(F.D(a)).truncate(N))
    return check(f"D-squared/{F.kind}", F.model, N, res)
