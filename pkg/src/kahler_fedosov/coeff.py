"""Exact coefficients: Gaussian rationals and rational functions over them.

A ``ChartRational`` is stored as ``(P + i*Q) / D`` with ``P, Q, D`` integer
polynomials (python-flint ``fmpz_mpoly``).  Because ``D`` is real, the triple
is canonical once ``gcd(P, Q, D) = 1`` and ``D`` has a positive leading
coefficient, so equality of values is equality of triples.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import flint

MODES = ("kahler", "real", "holomorphic")


class GaussianRational:
    """An exact number re + im*i with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction] = 0, im: Union[int, Fraction] = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = GaussianRational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        imag = "i" if self.im == 1 else "-i" if self.im == -1 else f"{self.im}*i"
        if self.re == 0:
            return imag
        sign = "" if imag.startswith("-") else "+"
        return f"({self.re}{sign}{imag})"

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"


I = GaussianRational(0, 1)


def variable_names(mode: str, n: int) -> tuple[str, ...]:
    if mode == "kahler":
        return tuple(f"z{a}" for a in range(1, n + 1)) + tuple(f"zb{a}" for a in range(1, n + 1))
    if mode == "real":
        return tuple(f"x{a}" for a in range(1, 2 * n + 1))
    if mode == "holomorphic":
        return tuple(f"u{a}" for a in range(1, 2 * n + 1))
    raise ValueError(f"unknown chart mode {mode!r}")


class ChartRing:
    """Field of rational functions in the 2n variables of one chart mode."""

    def __init__(self, mode: str, n: int):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.mode = mode
        self.n = n
        self.names = variable_names(mode, n)
        self.nvars = len(self.names)
        self.ctx = flint.fmpz_mpoly_ctx.get(self.names, "deglex")
        self._zero_poly = self.ctx.from_dict({})
        self._one_poly = self.ctx.from_dict({(0,) * self.nvars: 1})
        self.zero = ChartRational(self, self._zero_poly, self._zero_poly, self._one_poly)
        self.one = ChartRational(self, self._one_poly, self._zero_poly, self._one_poly)
        aliases = {}
        if n == 1 and mode == "kahler":
            aliases = {"z": 0, "zb": 1}
        elif n == 1 and mode == "real":
            aliases = {"x": 0, "y": 1}
        self._index = {name: j for j, name in enumerate(self.names)}
        self._index.update(aliases)

    def __repr__(self):
        return f"ChartRing({self.mode!r}, {self.n})"

    def __reduce__(self):
        return (chart_ring, (self.mode, self.n))

    def var_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown identifier {name!r}") from None

    def var(self, which: Union[int, str]) -> "ChartRational":
        j = which if isinstance(which, int) else self.var_index(which)
        g = self.ctx.gens()[j]
        return ChartRational(self, g, self._zero_poly, self._one_poly)

    def const(self, c) -> "ChartRational":
        if isinstance(c, ChartRational):
            if c.ring is not self:
                raise ValueError("ring mismatch")
            return c
        g = GaussianRational.coerce(c)
        den = math.lcm(g.re.denominator, g.im.denominator)
        p = g.re.numerator * (den // g.re.denominator)
        q = g.im.numerator * (den // g.im.denominator)
        return _make(self, self._poly_const(p), self._poly_const(q), self._poly_const(den))

    def _poly_const(self, c: int):
        return self.ctx.from_dict({(0,) * self.nvars: c}) if c else self._zero_poly

    def from_terms(self, terms: dict, denominator: dict | None = None) -> "ChartRational":
        """Build from {exponent tuple: GaussianRational} numerator (and real integer denominator)."""
        num = self.zero
        for mono, c in terms.items():
            num = num + self.const(c) * self.monomial(mono)
        if denominator is None:
            return num
        den = self.ctx.from_dict({tuple(k): int(v) for k, v in denominator.items()})
        return num / ChartRational(self, den, self._zero_poly, self._one_poly)

    def monomial(self, exps: Iterable[int]) -> "ChartRational":
        exps = tuple(exps)
        return ChartRational(self, self.ctx.from_dict({exps: 1}), self._zero_poly, self._one_poly)

    def parse(self, text: str) -> "ChartRational":
        return parse_expr(text, self.mode, self.n)


@lru_cache(maxsize=None)
def chart_ring(mode: str, n: int) -> ChartRing:
    """Shared ring instance for a chart mode and dimension."""
    if mode not in MODES:
        raise ValueError(f"unknown chart mode {mode!r}")
    return ChartRing(mode, n)


def _make(ring: ChartRing, P, Q, D) -> "ChartRational":
    if P.is_zero() and Q.is_zero():
        return ring.zero
    if not D.is_one():
        g = D.gcd(P) if not P.is_zero() else D.gcd(Q)
        if not Q.is_zero() and not g.is_one():
            g = g.gcd(Q)
        if not g.is_one():
            P = P / g
            Q = Q / g
            D = D / g
        if D.leading_coefficient() < 0:
            P, Q, D = -P, -Q, -D
    return ChartRational(ring, P, Q, D)


class ChartRational:
    """Exact rational function (P + i Q)/D in the variables of a ChartRing."""

    __slots__ = ("ring", "P", "Q", "D")

    def __init__(self, ring: ChartRing, P, Q, D):
        self.ring = ring
        self.P = P
        self.Q = Q
        self.D = D

    def _coerce(self, other) -> "ChartRational":
        if isinstance(other, ChartRational):
            if other.ring is not self.ring:
                raise ValueError(f"ring mismatch: {self.ring!r} vs {other.ring!r}")
            return other
        return self.ring.const(other)

    def is_zero(self) -> bool:
        return self.P.is_zero() and self.Q.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_one(self) -> bool:
        return self.D.is_one() and self.P.is_one() and self.Q.is_zero()

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.P == o.P and self.Q == o.Q and self.D == o.D

    def __hash__(self):
        return hash((tuple(sorted(self.P.to_dict().items())),
                     tuple(sorted(self.Q.to_dict().items())),
                     tuple(sorted(self.D.to_dict().items()))))

    def __neg__(self):
        return ChartRational(self.ring, -self.P, -self.Q, self.D)

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if self.D == o.D:
            return _make(self.ring, self.P + o.P, self.Q + o.Q, self.D)
        g = self.D.gcd(o.D)
        a = o.D / g
        b = self.D / g
        return _make(self.ring, self.P * a + o.P * b, self.Q * a + o.Q * b, self.D * a)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return self.ring.zero
        if self.Q.is_zero() and o.Q.is_zero():
            return _make(self.ring, self.P * o.P, self.Q, self.D * o.D)
        return _make(self.ring, self.P * o.P - self.Q * o.Q, self.P * o.Q + self.Q * o.P,
                     self.D * o.D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by the zero function")
        if o.Q.is_zero():
            return _make(self.ring, self.P * o.D, self.Q * o.D, self.D * o.P)
        norm = o.P * o.P + o.Q * o.Q
        re = (self.P * o.P + self.Q * o.Q) * o.D
        im = (self.Q * o.P - self.P * o.Q) * o.D
        return _make(self.ring, re, im, self.D * norm)

    def __rtruediv__(self, other):
        return self.ring.const(other) / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.ring.one / (self ** (-e))
        out = self.ring.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def derive(self, v: Union[int, str]) -> "ChartRational":
        j = v if isinstance(v, int) else self.ring.var_index(v)
        if self.is_zero():
            return self
        dP = self.P.derivative(j)
        dQ = self.Q.derivative(j)
        if self.D.is_one():
            return _make(self.ring, dP, dQ, self.D)
        dD = self.D.derivative(j)
        if dD.is_zero():
            return _make(self.ring, dP, dQ, self.D)
        return _make(self.ring, dP * self.D - self.P * dD, dQ * self.D - self.Q * dD,
                     self.D * self.D)

    def is_constant(self) -> bool:
        return (self.D.total_degree() <= 0 and self.P.total_degree() <= 0
                and self.Q.total_degree() <= 0)

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise ValueError("not a constant")
        zero = (0,) * self.ring.nvars
        d = int(self.D.to_dict().get(zero, 0))
        p = int(self.P.to_dict().get(zero, 0))
        q = int(self.Q.to_dict().get(zero, 0))
        return GaussianRational(Fraction(p, d), Fraction(q, d))

    def depends_on(self, j: int) -> bool:
        return not (self.P.derivative(j).is_zero() and self.Q.derivative(j).is_zero()
                    and self.D.derivative(j).is_zero())

    def conjugate(self) -> "ChartRational":
        return conjugate(self)

    def numerator_terms(self) -> dict:
        """Numerator over the monic denominator, as {exponents: GaussianRational}."""
        lc = int(self.D.leading_coefficient())
        out = {}
        pd = self.P.to_dict()
        qd = self.Q.to_dict()
        for mono in set(pd) | set(qd):
            out[mono] = GaussianRational(Fraction(int(pd.get(mono, 0)), lc),
                                         Fraction(int(qd.get(mono, 0)), lc))
        return out

    def denominator_terms(self) -> dict:
        lc = int(self.D.leading_coefficient())
        return {mono: Fraction(int(c), lc) for mono, c in self.D.to_dict().items()}

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"ChartRational({render(self)!r})"


def derive(f: ChartRational, v: Union[int, str]) -> ChartRational:
    return f.derive(v)


def conjugate(f: ChartRational) -> ChartRational:
    """Complex conjugate: swap z <-> zb and conjugate every coefficient."""
    ring = f.ring
    if ring.mode != "kahler":
        raise ValueError(f"conjugate() needs a Kahler chart, not {ring.mode!r} mode")
    gens = ring.ctx.gens()
    n = ring.n
    swapped = gens[n:] + gens[:n]
    return ChartRational(ring, f.P.compose(*swapped), -f.Q.compose(*swapped),
                         f.D.compose(*swapped))


def swap_variables(f: ChartRational) -> ChartRational:
    """Swap z <-> zb keeping the coefficients (no conjugation)."""
    ring = f.ring
    gens = ring.ctx.gens()
    n = ring.n
    swapped = gens[n:] + gens[:n]
    return ChartRational(ring, f.P.compose(*swapped), f.Q.compose(*swapped),
                         f.D.compose(*swapped))


def conjugate_coefficients(f: ChartRational) -> ChartRational:
    return ChartRational(f.ring, f.P, -f.Q, f.D)


def transfer(f: ChartRational, ring: ChartRing) -> ChartRational:
    """Rename variables positionally into another ring with the same variable count."""
    if ring.nvars != f.ring.nvars:
        raise ValueError("rings have different numbers of variables")
    gens = ring.ctx.gens()
    args = dict(ctx=ring.ctx)
    out = ChartRational(ring, f.P.compose(*gens, **args), f.Q.compose(*gens, **args),
                        f.D.compose(*gens, **args))
    if out.D.is_zero():
        raise ZeroDivisionError("substitution produces a zero denominator")
    return out


# ---------------------------------------------------------------- rendering

def _sorted_monos(monos):
    return sorted(monos, key=lambda m: (-sum(m), tuple(-e for e in m)))


def _render_mono(names, mono) -> str:
    parts = []
    for name, e in zip(names, mono):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _render_poly(names, terms: dict) -> str:
    pieces = []
    for mono in _sorted_monos([m for m, c in terms.items() if c]):
        c = terms[mono]
        m = _render_mono(names, mono)
        if not m:
            s = str(c)
        elif c == 1:
            s = m
        elif c == -1:
            s = "-" + m
        else:
            s = f"{c}*{m}"
        pieces.append(s)
    if not pieces:
        return "0"
    out = pieces[0]
    for s in pieces[1:]:
        out += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
    return out


def render(f: ChartRational) -> str:
    """Canonical text: numerator over a monic denominator, graded-lex order."""
    names = f.ring.names
    num = _render_poly(names, f.numerator_terms())
    den_terms = f.denominator_terms()
    if len(den_terms) == 1 and sum(next(iter(den_terms))) == 0:
        return num
    den = _render_poly(names, {k: GaussianRational(v) for k, v in den_terms.items()})
    if len([c for c in f.numerator_terms().values() if c]) > 1:
        num = f"({num})"
    return f"{num}/({den})"


# ------------------------------------------------------------------ parsing

class ExprError(ValueError):
    """Parse failure carrying the character position of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprError(f"unexpected character {text[start]!r}", start)
        num, ident, op = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            out.append(("num", num, start))
        elif ident is not None:
            out.append(("id", ident, start))
        else:
            out.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, ring: ChartRing):
        self.ring = ring
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] not in ("op",):
            raise ExprError(f"expected {value!r}", tok[2])
        return tok

    def parse(self) -> ChartRational:
        tok = self.peek()
        if tok[0] == "end":
            raise ExprError("empty expression", tok[2])
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprError(f"unexpected token {tok[1]!r}", tok[2])
        return value

    def expr(self):
        value = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ExprError("division by the zero function", pos)
                value = value / rhs
        return value

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            value = self.unary()
            return -value if tok[1] == "-" else value
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            sign = 1
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] in "+-":
                self.take()
                sign = -1 if nxt[1] == "-" else 1
            ex = self.take()
            if ex[0] != "num":
                raise ExprError("exponent must be an integer literal", ex[2])
            e = sign * int(ex[1])
            if e < 0 and base.is_zero():
                raise ExprError("division by the zero function", tok[2])
            return base ** e
        return base

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            return self.ring.const(int(value))
        if kind == "id":
            if value == "i":
                return self.ring.const(I)
            try:
                return self.ring.var(self.ring.var_index(value))
            except KeyError:
                raise ExprError(f"unknown identifier {value!r}", pos) from None
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "end":
            raise ExprError("unexpected end of expression", pos)
        raise ExprError(f"unexpected token {value!r}", pos)


def parse_expr(text: str, mode: str = "kahler", n: int = 1) -> ChartRational:
    """Parse an expression into the canonical rational function of the chart ring."""
    return _Parser(text, chart_ring(mode, n)).parse()
