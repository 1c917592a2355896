"""Weight-truncated Weyl bundle algebra on a single chart.

A term is keyed by ``(r, exps, forms)``: the power of hbar, the exponent of
each fiber slot, and the strictly increasing tuple of form slots.  Slot ``j``
is the fiber covector (and the form ``dx^j``) dual to chart variable ``j``, so
in Kahler mode slots ``0..n-1`` are ``w``/``dz`` and ``n..2n-1`` are
``wb``/``dzb``.

Elements are either formal (hbar is a symbol of weight 2) or evaluated at a
fixed value of hbar, in which case ``r`` is always 0 and the weight is the
fiber degree.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Optional, Sequence

from .coeff import ChartRational, ChartRing, GaussianRational, swap_variables, conjugate


@lru_cache(maxsize=None)
def merge_forms(fa: tuple, fb: tuple):
    """Return (sign, merged) for dx^fa wedge dx^fb, or (0, None) if they overlap."""
    if not fa:
        return 1, fb
    if not fb:
        return 1, fa
    if set(fa) & set(fb):
        return 0, None
    inversions = sum(1 for x in fa for y in fb if x > y)
    return (-1 if inversions & 1 else 1), tuple(sorted(fa + fb))


@lru_cache(maxsize=None)
def _insert_front(k: int, forms: tuple):
    """dx^k wedge dx^forms -> (sign, merged) or (0, None)."""
    if k in forms:
        return 0, None
    below = sum(1 for x in forms if x < k)
    return (-1 if below & 1 else 1), tuple(sorted(forms + (k,)))


@lru_cache(maxsize=None)
def _contract(k: int, forms: tuple):
    """Interior product with d/dx^k: (sign, remaining) or (0, None)."""
    if k not in forms:
        return 0, None
    pos = forms.index(k)
    return (-1 if pos & 1 else 1), forms[:pos] + forms[pos + 1:]


class WeylElement:
    """Immutable truncated element of forms-valued Weyl bundle sections."""

    __slots__ = ("ring", "terms", "cap", "hbar")

    def __init__(self, ring: ChartRing, terms: dict, cap: int, hbar: Optional[GaussianRational] = None):
        self.ring = ring
        self.cap = cap
        self.hbar = hbar
        self.terms = {k: c for k, c in terms.items() if not c.is_zero() and self._weight(k) <= cap}

    # ------------------------------------------------------------ basics
    @property
    def formal(self) -> bool:
        return self.hbar is None

    @property
    def mode(self) -> str:
        return self.ring.mode

    @property
    def dim(self) -> int:
        return self.ring.nvars

    def _weight(self, key) -> int:
        r, exps, _ = key
        return 2 * r + sum(exps) if self.hbar is None else sum(exps)

    def weight(self, key) -> int:
        return self._weight(key)

    def like(self, terms: dict, cap: Optional[int] = None) -> "WeylElement":
        return WeylElement(self.ring, terms, self.cap if cap is None else cap, self.hbar)

    @classmethod
    def zero(cls, ring: ChartRing, cap: int, hbar=None) -> "WeylElement":
        return cls(ring, {}, cap, hbar)

    @classmethod
    def function(cls, f: ChartRational, cap: int, hbar=None) -> "WeylElement":
        return cls(f.ring, {(0, (0,) * f.ring.nvars, ()): f}, cap, hbar)

    @classmethod
    def monomial(cls, ring: ChartRing, cap: int, exps: Sequence[int] = None, forms: Iterable[int] = (),
                 coeff=1, r: int = 0, hbar=None) -> "WeylElement":
        exps = tuple(exps) if exps is not None else (0,) * ring.nvars
        forms = tuple(forms)
        sign = 1
        if list(forms) != sorted(forms):
            sign, merged = 1, ()
            for k in reversed(forms):
                s, merged = _insert_front(k, merged)
                if s == 0:
                    return cls(ring, {}, cap, hbar)
                sign *= s
            forms = merged
        elif len(set(forms)) != len(forms):
            return cls(ring, {}, cap, hbar)
        c = ring.const(coeff) * sign
        return cls(ring, {(r, exps, forms): c}, cap, hbar)

    def fiber_var(self, slot: int) -> "WeylElement":
        exps = [0] * self.dim
        exps[slot] = 1
        return WeylElement.monomial(self.ring, self.cap, exps, hbar=self.hbar)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other: "WeylElement"):
        if not isinstance(other, WeylElement):
            raise TypeError("expected a WeylElement")
        if other.ring is not self.ring:
            raise ValueError(f"mode mismatch: {self.ring!r} vs {other.ring!r}")
        if (self.hbar is None) != (other.hbar is None) or (self.hbar is not None and self.hbar != other.hbar):
            raise ValueError("cannot combine elements with different hbar evaluations")

    def __add__(self, other):
        if not isinstance(other, WeylElement):
            return self + WeylElement.function(self.ring.const(other), self.cap, self.hbar)
        self._check(other)
        cap = min(self.cap, other.cap)
        out = dict(self.terms)
        for k, c in other.terms.items():
            prev = out.get(k)
            out[k] = c if prev is None else prev + c
        return WeylElement(self.ring, out, cap, self.hbar)

    __radd__ = __add__

    def __neg__(self):
        return self.like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, WeylElement):
            return self + (-self.ring.const(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "WeylElement":
        c = self.ring.const(c)
        if c.is_zero():
            return self.like({})
        return self.like({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        """Scalar multiplication only; use the product functions for Weyl products."""
        if isinstance(other, WeylElement):
            raise TypeError("use star() or classical_product() for products of Weyl elements")
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return (self.ring is other.ring and self.terms.keys() == other.terms.keys()
                and all(self.terms[k] == other.terms[k] for k in self.terms))

    def __hash__(self):
        return hash(tuple(sorted(self.terms)))

    def truncate(self, cap: int) -> "WeylElement":
        return self.like(self.terms, cap=min(cap, self.cap))

    def with_cap(self, cap: int) -> "WeylElement":
        return self.like(self.terms, cap=cap)

    def times_hbar(self, power: int = 1) -> "WeylElement":
        if self.hbar is None:
            out = {}
            for (r, e, f), c in self.terms.items():
                if r + power < 0:
                    raise ValueError("negative power of hbar")
                out[(r + power, e, f)] = c
            return self.like(out)
        return self.scale(self.hbar ** power)

    def form_degrees(self) -> set:
        return {len(f) for (_, _, f) in self.terms}

    def by_form_degree(self) -> dict:
        parts = {}
        for k, c in self.terms.items():
            parts.setdefault(len(k[2]), {})[k] = c
        return {p: self.like(t) for p, t in parts.items()}

    def weights(self) -> list:
        return sorted({self._weight(k) for k in self.terms})

    def max_fiber_degree(self, slots: Iterable[int] = None) -> int:
        slots = range(self.dim) if slots is None else list(slots)
        return max((sum(e[j] for j in slots) for (_, e, _) in self.terms), default=0)

    def max_hbar_power(self) -> int:
        return max((r for (r, _, _) in self.terms), default=0)

    def weight_component(self, w: int) -> "WeylElement":
        return self.like({k: c for k, c in self.terms.items() if self._weight(k) == w})

    def function_part(self) -> ChartRational:
        """Coefficient of the fiber-free, form-free, hbar-free term."""
        return self.terms.get((0, (0,) * self.dim, ()), self.ring.zero)

    # ------------------------------------------------------------ display
    def fiber_names(self) -> list:
        return fiber_names(self.ring)

    def sorted_keys(self) -> list:
        return sorted(self.terms, key=lambda k: (self._weight(k), k[0], -sum(k[1]),
                                                  tuple(-e for e in k[1]), k[2]))

    def render(self) -> str:
        if not self.terms:
            return "0"
        lines = []
        for key in self.sorted_keys():
            lines.append(f"{render_key(self.ring, key)} : {self.terms[key]}")
        return "\n".join(lines)

    def __str__(self):
        return self.render()

    def __repr__(self):
        kind = "formal" if self.hbar is None else f"hbar={self.hbar}"
        return f"<WeylElement {self.ring.mode} n={self.ring.n} cap={self.cap} {kind} terms={len(self.terms)}>"

    def serialize(self) -> list:
        names = fiber_names(self.ring)
        out = []
        for key in self.sorted_keys():
            r, e, f = key
            out.append({
                "hbar": r,
                "fiber": {names[0][j]: e[j] for j in range(len(e)) if e[j]},
                "forms": [names[1][j] for j in f],
                "coeff": str(self.terms[key]),
            })
        return out


def fiber_names(ring: ChartRing):
    n = ring.n
    if ring.mode == "kahler":
        fib = [f"w{a}" for a in range(1, n + 1)] + [f"wb{a}" for a in range(1, n + 1)]
        frm = [f"dz{a}" for a in range(1, n + 1)] + [f"dzb{a}" for a in range(1, n + 1)]
    elif ring.mode == "real":
        fib = [f"y{a}" for a in range(1, 2 * n + 1)]
        frm = [f"dx{a}" for a in range(1, 2 * n + 1)]
    else:
        fib = [f"y{a}" for a in range(1, 2 * n + 1)]
        frm = [f"du{a}" for a in range(1, 2 * n + 1)]
    return fib, frm


def render_key(ring: ChartRing, key) -> str:
    r, e, f = key
    fib, frm = fiber_names(ring)
    parts = []
    if r:
        parts.append("h" if r == 1 else f"h^{r}")
    for j, x in enumerate(e):
        if x:
            parts.append(fib[j] if x == 1 else f"{fib[j]}^{x}")
    text = "*".join(parts) if parts else "1"
    if f:
        text += " " + "/\\".join(frm[j] for j in f)
    return text


# ================================================================ kernels

class ProductKernel:
    """Pairing data of a fibrewise exponential product.

    The product of two monomials is the sum over nonnegative integer matrices
    m on the support of the pairing of
    prod (scale*hbar*P[u][v])^m_uv / m_uv!  d^{rows} a * d^{cols} b.
    """

    def __init__(self, name: str, ring: ChartRing, pairs: dict, scale: Fraction):
        self.name = name
        self.ring = ring
        self.pairs = tuple(sorted((u, v, c) for (u, v), c in pairs.items() if not c.is_zero()))
        self.scale = Fraction(scale)
        self._expansions = {}
        self._powers = {}

    def __repr__(self):
        return f"<ProductKernel {self.name} pairs={len(self.pairs)}>"

    def poisson_tensor(self):
        """Antisymmetric part scaled to the Poisson tensor: scale*(P - P^T)."""
        d = self.ring.nvars
        out = [[self.ring.zero] * d for _ in range(d)]
        for u, v, c in self.pairs:
            out[u][v] = out[u][v] + c * self.scale
            out[v][u] = out[v][u] - c * self.scale
        return out

    def _pairing_power(self, M: tuple) -> ChartRational:
        val = self._powers.get(M)
        if val is None:
            val = self.ring.one
            for (u, v, c), m in zip(self.pairs, M):
                if m:
                    val = val * c ** m
            self._powers[M] = val
        return val

    def expansions(self, ea: tuple, eb: tuple, hbar) -> list:
        """List of (r, exps_out, coefficient) for the product of two fiber monomials."""
        key = (ea, eb, None if hbar is None else (hbar.re, hbar.im))
        cached = self._expansions.get(key)
        if cached is not None:
            return cached
        active = [(i, u, v) for i, (u, v, _) in enumerate(self.pairs) if ea[u] and eb[v]]
        npairs = len(self.pairs)
        results = []

        def rec(idx, rows, cols, M, r, weight):
            if idx == len(active):
                exps = tuple(ea[j] - rows[j] + eb[j] - cols[j] for j in range(len(ea)))
                factor = Fraction(1) * weight * (self.scale ** r)
                for j in range(len(ea)):
                    if rows[j]:
                        factor *= Fraction(factorial(ea[j]), factorial(ea[j] - rows[j]))
                    if cols[j]:
                        factor *= Fraction(factorial(eb[j]), factorial(eb[j] - cols[j]))
                results.append((r, exps, factor, tuple(M)))
                return
            i, u, v = active[idx]
            top = min(ea[u] - rows[u], eb[v] - cols[v])
            for m in range(top + 1):
                rows[u] += m
                cols[v] += m
                M[i] = m
                rec(idx + 1, rows, cols, M, r + m, weight / factorial(m))
                rows[u] -= m
                cols[v] -= m
            M[i] = 0

        rec(0, [0] * len(ea), [0] * len(eb), [0] * npairs, 0, Fraction(1))
        out = []
        for r, exps, factor, M in results:
            coef = self._pairing_power(M) * self.ring.const(factor)
            if hbar is not None and r:
                coef = coef * self.ring.const(hbar ** r)
            out.append((r, exps, coef))
        out.sort(key=lambda t: t[0])
        self._expansions[key] = out
        return out


def moyal_kernel(ring: ChartRing, inverse_form) -> ProductKernel:
    """Moyal product from the inverse symplectic matrix omega^{ij}."""
    d = ring.nvars
    pairs = {(i, j): inverse_form[i][j] for i in range(d) for j in range(d)}
    name = "moyal-holomorphic" if ring.mode == "holomorphic" else "moyal"
    return ProductKernel(name, ring, pairs, Fraction(1, 2))


def anti_wick_kernel(ring: ChartRing, inv_metric) -> ProductKernel:
    """Anti-Wick product: left wb^nu paired with right w^mu through inv_metric[nu][mu]."""
    if ring.mode != "kahler":
        raise ValueError("the anti-Wick product needs a Kahler chart")
    n = ring.n
    pairs = {(n + nu, mu): inv_metric[nu][mu] for nu in range(n) for mu in range(n)}
    return ProductKernel("anti-wick", ring, pairs, Fraction(1))


def _star_terms(a: WeylElement, b: WeylElement, kernel: ProductKernel, cap_out: int, rmin: int,
                a_terms=None, b_terms=None) -> dict:
    formal = a.hbar is None
    hbar = a.hbar
    out = {}
    a_terms = a.terms if a_terms is None else a_terms
    b_terms = b.terms if b_terms is None else b_terms
    b_items = [(k, c, sum(k[1])) for k, c in b_terms.items()]
    for (ra, ea, fa), ca in a_terms.items():
        da = sum(ea)
        for (rb, eb, fb), cb, db in b_items:
            sign, forms = merge_forms(fa, fb)
            if not sign:
                continue
            if formal:
                if 2 * (ra + rb) + da + db > cap_out:
                    continue
                lo = rmin
            else:
                lo = max(rmin, -((cap_out - da - db) // 2))
            exps_list = kernel.expansions(ea, eb, hbar)
            if not exps_list or exps_list[-1][0] < lo:
                continue
            cc = ca * cb
            if sign < 0:
                cc = -cc
            for r, exps, coef in exps_list:
                if r < lo:
                    continue
                key = (ra + rb + r if formal else 0, exps, forms)
                val = cc * coef
                prev = out.get(key)
                out[key] = val if prev is None else prev + val
    return out


def _contraction_loss(a: WeylElement, b: WeylElement, kernel: ProductKernel, both_orders: bool) -> int:
    """Fiber-degree precision lost by an evaluated product.

    With hbar a number, a term of the product in degree e may come from input
    terms of degree up to e + m, m the number of contractions; m is bounded
    by the degrees the inputs carry in the paired slots.
    """
    if a.formal:
        return 0
    left = {u for u, _, _ in kernel.pairs}
    right = {v for _, v, _ in kernel.pairs}
    loss = min(a.max_fiber_degree(left), b.max_fiber_degree(right))
    if both_orders:
        loss = max(loss, min(b.max_fiber_degree(left), a.max_fiber_degree(right)))
    return loss


def star(a: WeylElement, b: WeylElement, kernel: ProductKernel) -> WeylElement:
    """Fibrewise product, forms multiplied by wedge product."""
    a._check(b)
    if kernel.ring is not a.ring:
        raise ValueError("kernel belongs to a different chart")
    cap = min(a.cap, b.cap) - _contraction_loss(a, b, kernel, False)
    return WeylElement(a.ring, _star_terms(a, b, kernel, cap, 0), cap, a.hbar)


def classical_product(a: WeylElement, b: WeylElement) -> WeylElement:
    """Undeformed graded-commutative product."""
    a._check(b)
    cap = min(a.cap, b.cap)
    out = {}
    formal = a.formal
    for (ra, ea, fa), ca in a.terms.items():
        for (rb, eb, fb), cb in b.terms.items():
            sign, forms = merge_forms(fa, fb)
            if not sign:
                continue
            exps = tuple(x + y for x, y in zip(ea, eb))
            key = (ra + rb, exps, forms)
            if (2 * key[0] if formal else 0) + sum(exps) > cap:
                continue
            val = ca * cb if sign > 0 else -(ca * cb)
            prev = out.get(key)
            out[key] = val if prev is None else prev + val
    return WeylElement(a.ring, out, cap, a.hbar)


def graded_commutator(a: WeylElement, b: WeylElement, kernel: ProductKernel) -> WeylElement:
    """a*b - (-1)^{|a||b|} b*a, summed over form-degree components."""
    a._check(b)
    cap = min(a.cap, b.cap) - _contraction_loss(a, b, kernel, True)
    out = {}
    for p, ap in a.by_form_degree().items():
        for q, bq in b.by_form_degree().items():
            left = _star_terms(ap, bq, kernel, cap, 1)
            right = _star_terms(bq, ap, kernel, cap, 1)
            sign = -1 if (p * q) & 1 else 1
            _accumulate(out, left, 1)
            _accumulate(out, right, -sign)
    return WeylElement(a.ring, out, cap, a.hbar)


def bracket(a: WeylElement, b: WeylElement, kernel: ProductKernel) -> WeylElement:
    """(1/hbar)[a, b], computed directly so no precision is lost to the division."""
    a._check(b)
    cap = min(a.cap, b.cap) - _contraction_loss(a, b, kernel, True)
    formal = a.formal
    inner_cap = cap + 2 if formal else cap
    out = {}
    for p, ap in a.by_form_degree().items():
        for q, bq in b.by_form_degree().items():
            left = _star_terms(ap, bq, kernel, inner_cap, 1)
            right = _star_terms(bq, ap, kernel, inner_cap, 1)
            sign = -1 if (p * q) & 1 else 1
            _accumulate(out, left, 1)
            _accumulate(out, right, -sign)
    if formal:
        shifted = {}
        for (r, e, f), c in out.items():
            if c.is_zero():
                continue
            if r < 1:
                raise ArithmeticError("commutator has an hbar-free term")
            shifted[(r - 1, e, f)] = c
        return WeylElement(a.ring, shifted, cap, None)
    inv = a.ring.const(a.hbar.inverse())
    return WeylElement(a.ring, {k: c * inv for k, c in out.items()}, cap, a.hbar)


def _accumulate(out: dict, terms: dict, sign: int):
    for k, c in terms.items():
        prev = out.get(k)
        val = c if sign > 0 else -c
        out[k] = val if prev is None else prev + val


# ============================================================ delta family

def _delta(a: WeylElement, slots) -> WeylElement:
    out = {}
    for (r, e, f), c in a.terms.items():
        for k in slots:
            if not e[k]:
                continue
            sign, forms = _insert_front(k, f)
            if not sign:
                continue
            exps = e[:k] + (e[k] - 1,) + e[k + 1:]
            val = c * (e[k] * sign)
            key = (r, exps, forms)
            prev = out.get(key)
            out[key] = val if prev is None else prev + val
    return a.like(out)


def _delta_inv(a: WeylElement, slots) -> WeylElement:
    slots = list(slots)
    out = {}
    for (r, e, f), c in a.terms.items():
        degree = sum(e[k] for k in slots) + sum(1 for k in f if k in slots)
        if degree == 0:
            continue
        for k in slots:
            sign, forms = _contract(k, f)
            if not sign:
                continue
            exps = e[:k] + (e[k] + 1,) + e[k + 1:]
            val = c * Fraction(sign, degree)
            key = (r, exps, forms)
            prev = out.get(key)
            out[key] = val if prev is None else prev + val
    # delta^{-1} raises weight by one; keep what the cap allows
    return a.like(out)


def _pi0(a: WeylElement, slots) -> WeylElement:
    slots = list(slots)
    return a.like({(r, e, f): c for (r, e, f), c in a.terms.items()
                   if not any(e[k] for k in slots) and not any(k in slots for k in f)})


def _all(a):
    return range(a.dim)


def _hol(a):
    _require_kahler(a)
    return range(a.ring.n)


def _antihol(a):
    _require_kahler(a)
    return range(a.ring.n, 2 * a.ring.n)


def _require_kahler(a: WeylElement):
    if a.ring.mode != "kahler":
        raise ValueError("polarized operators need a Kahler chart")


def delta(a):
    return _delta(a, _all(a))


def delta_inv(a):
    return _delta_inv(a, _all(a))


def pi0(a):
    return _pi0(a, _all(a))


def delta10(a):
    return _delta(a, _hol(a))


def delta10_inv(a):
    return _delta_inv(a, _hol(a))


def pi0star(a):
    """Projection killing every term with a w or a dz."""
    return _pi0(a, _hol(a))


def delta01(a):
    return _delta(a, _antihol(a))


def delta01_inv(a):
    return _delta_inv(a, _antihol(a))


def pistar0(a):
    """Projection killing every term with a wb or a dzb."""
    return _pi0(a, _antihol(a))


# ==================================================== fiber Laplacian

def tilde_delta(a: WeylElement, inv_metric) -> WeylElement:
    """sum_{nu,mu} inv_metric[nu][mu] d^2/dw^mu dwb^nu."""
    _require_kahler(a)
    n = a.ring.n
    out = {}
    for (r, e, f), c in a.terms.items():
        for nu in range(n):
            b = n + nu
            if not e[b]:
                continue
            for mu in range(n):
                if not e[mu] or inv_metric[nu][mu].is_zero():
                    continue
                exps = list(e)
                exps[mu] -= 1
                exps[b] -= 1
                val = c * inv_metric[nu][mu] * (e[mu] * e[b])
                key = (r, tuple(exps), f)
                prev = out.get(key)
                out[key] = val if prev is None else prev + val
    return a.like(out)


def exp_scaled_tilde_delta(a: WeylElement, inv_metric, t) -> WeylElement:
    """exp(t*hbar*tilde_delta) a for a scalar t; the hbar makes the series weight-preserving."""
    t = a.ring.const(t)
    total = a
    term = a
    m = 0
    while True:
        m += 1
        term = tilde_delta(term, inv_metric).times_hbar(1).scale(t * Fraction(1, m))
        if term.is_zero():
            break
        total = total + term
    return total


# ====================================================== covariant derivative

class Connection:
    """Christoffel symbols Gamma^k_{ij} (nabla_{d_i} d_j = Gamma^k_{ij} d_k) on a chart."""

    def __init__(self, ring: ChartRing, entries: dict):
        self.ring = ring
        self.entries = {key: c for key, c in entries.items() if not c.is_zero()}
        self.by_direction = {}
        for (k, i, j), c in self.entries.items():
            self.by_direction.setdefault(i, []).append((k, j, c))

    def gamma(self, k, i, j) -> ChartRational:
        return self.entries.get((k, i, j), self.ring.zero)

    def is_flat_zero(self) -> bool:
        return not self.entries


def nabla(a: WeylElement, connection: Connection, directions: Optional[Iterable[int]] = None) -> WeylElement:
    """Exterior covariant derivative sum_i dx^i wedge nabla_i.

    nabla_i differentiates coefficients and acts on the fiber covectors by
    nabla_i y^k = -Gamma^k_{ij} y^j.
    """
    if connection.ring is not a.ring:
        raise ValueError("connection belongs to a different chart")
    dirs = range(a.dim) if directions is None else list(directions)
    out = {}

    def add(key, val):
        prev = out.get(key)
        out[key] = val if prev is None else prev + val

    for (r, e, f), c in a.terms.items():
        for i in dirs:
            sign, forms = _insert_front(i, f)
            if not sign:
                continue
            dc = c.derive(i)
            if not dc.is_zero():
                add((r, e, forms), dc if sign > 0 else -dc)
            for k, j, g in connection.by_direction.get(i, ()):
                if not e[k]:
                    continue
                exps = list(e)
                exps[k] -= 1
                exps[j] += 1
                val = g * c * (-e[k] * sign)
                add((r, tuple(exps), forms), val)
    return a.like(out)


def nabla10(a: WeylElement, connection: Connection) -> WeylElement:
    return nabla(a, connection, _hol(a))


def nabla01(a: WeylElement, connection: Connection) -> WeylElement:
    return nabla(a, connection, _antihol(a))


def exterior_derivative(a: WeylElement) -> WeylElement:
    """d on coefficients only (fiber-free forms)."""
    return nabla(a, Connection(a.ring, {}))


# ============================================================ conjugation

def _swap_slots(a: WeylElement, coefficient_map) -> WeylElement:
    _require_kahler(a)
    n = a.ring.n

    def flip(j):
        return j + n if j < n else j - n

    out = {}
    for (r, e, f), c in a.terms.items():
        exps = tuple(e[flip(j)] for j in range(2 * n))
        sign, forms = 1, ()
        for k in reversed([flip(j) for j in f]):
            s, forms = _insert_front(k, forms)
            sign *= s
        val = coefficient_map(c)
        out[(r, exps, forms)] = val if sign > 0 else -val
    return a.like(out)


def bar_counterpart(a: WeylElement) -> WeylElement:
    """Swap w <-> wb, dz <-> dzb and z <-> zb, keeping coefficients.

    On a chart whose metric satisfies omega_{a b}(z, zb) = omega_{b a}(zb, z)
    (all built-in models) this maps objects built from (M, omega) to the
    objects built from the conjugate manifold with form -omega.
    """
    return _swap_slots(a, swap_variables)


def complex_conjugate(a: WeylElement) -> WeylElement:
    """Pointwise complex conjugation of a Weyl element (also conjugates hbar-free coefficients)."""
    return _swap_slots(a, conjugate)


def evaluate_hbar(a: WeylElement, value: GaussianRational, cap: Optional[int] = None) -> WeylElement:
    """Substitute a number for hbar; the result is graded by fiber degree only."""
    if not a.formal:
        raise ValueError("element is already evaluated")
    value = GaussianRational.coerce(value)
    out = {}
    ring = a.ring
    for (r, e, f), c in a.terms.items():
        key = (0, e, f)
        val = c * ring.const(value ** r) if r else c
        prev = out.get(key)
        out[key] = val if prev is None else prev + val
    return WeylElement(ring, out, a.cap if cap is None else cap, value)


def fiber_derivative(a: WeylElement, slot: int) -> WeylElement:
    out = {}
    for (r, e, f), c in a.terms.items():
        if e[slot]:
            exps = e[:slot] + (e[slot] - 1,) + e[slot + 1:]
            out[(r, exps, f)] = c * e[slot]
    return a.like(out)
