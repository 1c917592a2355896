"""Charts and their geometric tensors.

Index conventions used throughout the package:

* ``omega = H[a][b] dz^a ^ dzb^b`` for a Kahler chart, and the inverse metric
  ``G`` satisfies ``sum_m G[v][m] H[m][l] = delta_{vl}`` (``G[v][m]`` is the
  component with a barred first index).
* ``omega = 1/2 form[i][j] dx^i ^ dx^j`` for any symplectic chart, with inverse
  ``inv[i][j]`` such that ``sum_j form[i][j] inv[j][k] = delta_{ik}``.
* ``nabla_{d_i} d_j = Gamma^k_{ij} d_k``; the Chern connection of a Kahler chart
  has ``Gamma^v_{am} = sum_b G[b][v] d_a H[m][b]`` and its conjugate block.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence

from .coeff import (ChartRational, ChartRing, GaussianRational, I, chart_ring, conjugate,
                    conjugate_coefficients, parse_expr, swap_variables, transfer)
from .weyl import (Connection, WeylElement, anti_wick_kernel, delta01_inv,
                   delta10_inv, delta_inv, moyal_kernel, nabla)


class ChartError(ValueError):
    pass


# ================================================================ matrices

def mat_inverse(M: Sequence[Sequence[ChartRational]], ring: ChartRing):
    """Gauss-Jordan inverse over the rational function field."""
    n = len(M)
    A = [list(row) + [ring.one if i == j else ring.zero for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not A[r][col].is_zero()), None)
        if piv is None:
            raise ChartError("matrix is not invertible (determinant vanishes identically)")
        A[col], A[piv] = A[piv], A[col]
        inv = ring.one / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and not A[r][col].is_zero():
                factor = A[r][col]
                A[r] = [x - factor * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


def determinant(M, ring: ChartRing) -> ChartRational:
    n = len(M)
    A = [list(row) for row in M]
    det = ring.one
    for col in range(n):
        piv = next((r for r in range(col, n) if not A[r][col].is_zero()), None)
        if piv is None:
            return ring.zero
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det = det * A[col][col]
        inv = ring.one / A[col][col]
        for r in range(col + 1, n):
            if not A[r][col].is_zero():
                factor = A[r][col] * inv
                A[r] = [x - factor * y for x, y in zip(A[r], A[col])]
    return det


# ======================================================= symplectic charts

class SymplecticChart:
    """A chart carrying a symplectic form and a torsion-free connection preserving it."""

    def __init__(self, ring: ChartRing, form, connection: Optional[Connection] = None, name: str = ""):
        self.ring = ring
        self.name = name or f"{ring.mode}-chart"
        self.form = [list(row) for row in form]
        d = ring.nvars
        if len(self.form) != d or any(len(row) != d for row in self.form):
            raise ChartError(f"symplectic form must be a {d}x{d} matrix")
        for i in range(d):
            for j in range(d):
                if self.form[i][j] != -self.form[j][i]:
                    raise ChartError(f"symplectic form is not antisymmetric at ({i}, {j})")
        if not is_closed_form(self.form, ring):
            raise ChartError("symplectic form is not closed")
        self.inverse_form = mat_inverse(self.form, ring)
        if connection is None:
            connection = symplectic_connection(self)
        self.connection = connection

    @property
    def mode(self) -> str:
        return self.ring.mode

    @property
    def n(self) -> int:
        return self.ring.n

    @property
    def dim(self) -> int:
        return self.ring.nvars

    def moyal(self):
        key = "_moyal"
        if not hasattr(self, key):
            setattr(self, key, moyal_kernel(self.ring, self.inverse_form))
        return getattr(self, key)

    def weyl_omega(self, cap: int, hbar=None) -> WeylElement:
        d = self.dim
        terms = {}
        for i in range(d):
            for j in range(i + 1, d):
                if not self.form[i][j].is_zero():
                    terms[(0, (0,) * d, (i, j))] = self.form[i][j]
        return WeylElement(self.ring, terms, cap, hbar)

    def weyl_omega_tilde(self, cap: int, hbar=None) -> WeylElement:
        """The element whose (1/hbar)-bracket is delta; equals -2 delta^{-1} omega."""
        return delta_inv(self.weyl_omega(cap + 1, hbar)).scale(-2).with_cap(cap)

    def weyl_curvature(self, cap: int, hbar=None) -> WeylElement:
        """R with nabla^2 = (1/hbar)[R, .], read off from nabla^2 on fiber generators."""
        d = self.dim
        ring = self.ring
        # C[k][c]: 2-form coefficients with nabla^2 y^k = C^k_c y^c
        C = {}
        for k in range(d):
            y = WeylElement.monomial(ring, 3, tuple(1 if j == k else 0 for j in range(d)))
            sq = nabla(nabla(y, self.connection), self.connection)
            for (r, e, f), coef in sq.terms.items():
                c = e.index(1)
                C[(k, c, f)] = coef
        terms = {}
        for (k, c, f), coef in C.items():
            for b in range(d):
                fkb = self.form[k][b]
                if fkb.is_zero():
                    continue
                exps = [0] * d
                exps[b] += 1
                exps[c] += 1
                key = (0, tuple(exps), f)
                val = fkb * coef * ring.const(GaussianRational(1, 0) / 2)
                terms[key] = terms.get(key, ring.zero) + val
        return WeylElement(ring, terms, cap, hbar)

    def poisson(self, f: ChartRational, g: ChartRational) -> ChartRational:
        """{f, g} = omega^{ij} d_i f d_j g."""
        out = self.ring.zero
        d = self.dim
        df = [f.derive(i) for i in range(d)]
        dg = [g.derive(j) for j in range(d)]
        for i in range(d):
            if df[i].is_zero():
                continue
            for j in range(d):
                if not self.inverse_form[i][j].is_zero() and not dg[j].is_zero():
                    out = out + self.inverse_form[i][j] * df[i] * dg[j]
        return out

    def describe(self) -> dict:
        return {"name": self.name, "mode": self.mode, "n": self.n,
                "form": [[str(x) for x in row] for row in self.form]}


def is_closed_form(form, ring: ChartRing) -> bool:
    d = ring.nvars
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(j + 1, d):
                s = form[j][k].derive(i) + form[k][i].derive(j) + form[i][j].derive(k)
                if not s.is_zero():
                    return False
    return True


def torsion(connection: Connection) -> dict:
    """Nonzero entries of Gamma^k_{ij} - Gamma^k_{ji}."""
    out = {}
    d = connection.ring.nvars
    for k in range(d):
        for i in range(d):
            for j in range(i + 1, d):
                t = connection.gamma(k, i, j) - connection.gamma(k, j, i)
                if not t.is_zero():
                    out[(k, i, j)] = t
    return out


def covariant_derivative_of_form(form, connection: Connection, ring: ChartRing) -> dict:
    """Nonzero entries of (nabla_i omega)_{jk}."""
    d = ring.nvars
    out = {}
    for i in range(d):
        for j in range(d):
            for k in range(d):
                v = form[j][k].derive(i)
                for l in range(d):
                    g1 = connection.gamma(l, i, j)
                    if not g1.is_zero():
                        v = v - g1 * form[l][k]
                    g2 = connection.gamma(l, i, k)
                    if not g2.is_zero():
                        v = v - g2 * form[j][l]
                if not v.is_zero():
                    out[(i, j, k)] = v
    return out


def symplectic_connection(chart: SymplecticChart, nabla0: Optional[Connection] = None) -> Connection:
    """Average a torsion-free connection into one preserving the symplectic form.

    With (nabla0_X omega)(Y, Z) = omega(N(X, Y), Z) the result is
    nabla0_X Y + (N(X, Y) + N(Y, X))/3.
    """
    ring = chart.ring
    d = ring.nvars
    if not is_closed_form(chart.form, ring):
        raise ChartError("symplectic form is not closed")
    if nabla0 is None:
        nabla0 = Connection(ring, {})
    elif torsion(nabla0):
        raise ChartError("starting connection has torsion")
    inv = chart.inverse_form if hasattr(chart, "inverse_form") else mat_inverse(chart.form, ring)
    dw = covariant_derivative_of_form(chart.form, nabla0, ring)
    N = {}
    for (i, j, k), v in dw.items():
        for m in range(d):
            if not inv[k][m].is_zero():
                N[(m, i, j)] = N.get((m, i, j), ring.zero) + v * inv[k][m]
    third = ring.const(GaussianRational(1, 0) / 3)
    entries = dict(nabla0.entries)
    for (m, i, j), v in N.items():
        entries[(m, i, j)] = entries.get((m, i, j), ring.zero) + v * third
        entries[(m, j, i)] = entries.get((m, j, i), ring.zero) + v * third
    return Connection(ring, entries)


class RealSymplecticChart(SymplecticChart):
    """Symplectic form in real coordinates x1..x2n."""

    def __init__(self, form, nabla0: Optional[Connection] = None, name: str = "", n: Optional[int] = None):
        n = n if n is not None else len(form) // 2
        ring = chart_ring("real", n)
        form = [[ring.const(x) if not isinstance(x, ChartRational) else x for x in row] for row in form]
        self.ring = ring
        self.form = form
        self.inverse_form = mat_inverse(form, ring)
        conn = symplectic_connection(self, nabla0)
        super().__init__(ring, form, conn, name or "real-chart")

    @classmethod
    def planar(cls, density: ChartRational, name: str = "") -> "RealSymplecticChart":
        """omega = density dx ^ dy on a 2-dimensional chart."""
        ring = density.ring
        return cls([[ring.zero, density], [-density, ring.zero]], name=name)


class HolomorphicChart(SymplecticChart):
    """Holomorphic symplectic chart in independent variables u1..u2n."""

    def __init__(self, form, connection: Optional[Connection] = None, name: str = ""):
        d = len(form)
        ring = chart_ring("holomorphic", d // 2)
        form = [[ring.const(x) if not isinstance(x, ChartRational) else x for x in row] for row in form]
        super().__init__(ring, form, connection, name or "holomorphic-chart")


# ============================================================ Kahler charts

class KahlerChart(SymplecticChart):
    """omega = H[a][b] dz^a ^ dzb^b with rational H and the first derivatives of a potential.

    ``drho0[a]`` is d(rho0)/dz^a for a potential with omega = -i d dbar rho0.
    """

    def __init__(self, n: int, omega, drho0: Optional[Sequence[ChartRational]] = None, name: str = "",
                 check_reality: bool = True):
        ring = chart_ring("kahler", n)
        H = [[ring.const(x) if not isinstance(x, ChartRational) else x for x in row] for row in omega]
        if len(H) != n or any(len(row) != n for row in H):
            raise ChartError(f"omega must be an {n}x{n} matrix")
        self.H = H
        self.ring = ring
        self.name = name or f"kahler-{n}"
        if determinant(H, ring).is_zero():
            raise ChartError("omega is not invertible (determinant vanishes identically)")
        self.G = mat_inverse(H, ring)
        if check_reality:
            for a in range(n):
                for b in range(n):
                    if conjugate(H[a][b]) != -H[b][a]:
                        raise ChartError(f"omega is not real: entry ({a + 1},{b + 1}) fails conj(H_ab) = -H_ba")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if H[a][b].derive(c) != H[c][b].derive(a):
                        raise ChartError("omega is not closed")
                    if H[a][b].derive(n + c) != H[a][c].derive(n + b):
                        raise ChartError("omega is not closed")
        self.drho0 = None
        if drho0 is not None:
            drho0 = [ring.const(x) if not isinstance(x, ChartRational) else x for x in drho0]
            if len(drho0) != n:
                raise ChartError(f"drho0 must have {n} entries")
            for a in range(n):
                for b in range(n):
                    if drho0[a].derive(n + b) * (-I) != H[a][b]:
                        raise ChartError(
                            f"drho0 is inconsistent with omega: -i dbar_{b + 1}(drho0_{a + 1}) != omega_{a + 1}{b + 1}")
            self.drho0 = drho0
        form = [[ring.zero] * (2 * n) for _ in range(2 * n)]
        for a in range(n):
            for b in range(n):
                form[a][n + b] = H[a][b]
                form[n + b][a] = -H[a][b]
        self._build_tensors()
        super().__init__(ring, form, self.chern_connection, self.name)

    # ---------------------------------------------------------- tensors
    def _build_tensors(self):
        ring, n, H, G = self.ring, self.n, self.H, self.G
        entries = {}
        self.gamma = [[[ring.zero] * n for _ in range(n)] for _ in range(n)]
        self.gamma_bar = [[[ring.zero] * n for _ in range(n)] for _ in range(n)]
        for v in range(n):
            for a in range(n):
                for m in range(n):
                    g = ring.zero
                    gb = ring.zero
                    for b in range(n):
                        g = g + G[b][v] * H[m][b].derive(a)
                        gb = gb + G[v][b] * H[b][m].derive(n + a)
                    self.gamma[v][a][m] = g
                    self.gamma_bar[v][a][m] = gb
                    entries[(v, a, m)] = g
                    entries[(n + v, n + a, n + m)] = gb
        self.chern_connection = Connection(ring, entries)
        # curvature R^v_{a bbar m} = -dbar_b Gamma^v_{am}; conjugate block d_a Gammabar^v_{bm}
        self.curvature = {}
        self.curvature_bar = {}
        for v in range(n):
            for a in range(n):
                for b in range(n):
                    for m in range(n):
                        r = -self.gamma[v][a][m].derive(n + b)
                        rb = self.gamma_bar[v][b][m].derive(a)
                        if not r.is_zero():
                            self.curvature[(v, a, b, m)] = r
                        if not rb.is_zero():
                            self.curvature_bar[(v, a, b, m)] = rb
        half_i = ring.const(GaussianRational(0, -1) / 2)
        self.ricci = [[sum((self.curvature.get((e, a, b, e), ring.zero) for e in range(n)), ring.zero) * half_i
                       for b in range(n)] for a in range(n)]
        self.drho1 = []
        for a in range(n):
            s = ring.zero
            for v in range(n):
                for m in range(n):
                    s = s + G[v][m] * H[m][v].derive(a)
            self.drho1.append(s * ring.const(GaussianRational(-1, 0) / 2))

    def drho1_alternative(self):
        """-1/2 G[v][m] d_m H[a][v], the second form of the same identity."""
        ring, n = self.ring, self.n
        out = []
        for a in range(n):
            s = ring.zero
            for v in range(n):
                for m in range(n):
                    s = s + self.G[v][m] * self.H[a][v].derive(m)
            out.append(s * ring.const(GaussianRational(-1, 0) / 2))
        return out

    def drho0_bar(self):
        """d rho0/dzb^a, using that rho0 is real."""
        self._require_drho0()
        return [conjugate(x) for x in self.drho0]

    def drho1_bar(self):
        return [conjugate(x) for x in self.drho1]

    def _require_drho0(self):
        if self.drho0 is None:
            raise ChartError(f"chart {self.name!r} has no potential derivative data (drho0)")

    def anti_wick(self):
        if not hasattr(self, "_anti_wick"):
            self._anti_wick = anti_wick_kernel(self.ring, self.G)
        return self._anti_wick

    def is_holomorphic(self, f: ChartRational) -> bool:
        return all(not f.depends_on(self.n + a) for a in range(self.n))

    def is_antiholomorphic(self, f: ChartRational) -> bool:
        return all(not f.depends_on(a) for a in range(self.n))

    # ---------------------------------------------------- Weyl-valued forms
    def weyl_omega1(self, cap: int, hbar=None) -> WeylElement:
        n = self.n
        terms = {}
        for a in range(n):
            for b in range(n):
                if not self.ricci[a][b].is_zero():
                    terms[(0, (0,) * (2 * n), (a, n + b))] = self.ricci[a][b]
        return WeylElement(self.ring, terms, cap, hbar)

    def weyl_R(self, cap: int, hbar=None) -> WeylElement:
        """R = -H[e][v] R^e_{a bbar m} dz^a ^ dzb^b w^m wb^v."""
        n = self.n
        terms = {}
        for (e, a, b, m), r in self.curvature.items():
            for v in range(n):
                if self.H[e][v].is_zero():
                    continue
                exps = [0] * (2 * n)
                exps[m] += 1
                exps[n + v] += 1
                key = (0, tuple(exps), (a, n + b))
                terms[key] = terms.get(key, self.ring.zero) - self.H[e][v] * r
        return WeylElement(self.ring, terms, cap, hbar)

    def weyl_omega_tilde(self, cap: int, hbar=None) -> WeylElement:
        om = self.weyl_omega(cap + 1, hbar)
        return (-(delta01_inv(om) + delta10_inv(om))).with_cap(cap)

    def xi_hat(self, xi, cap: int, hbar=None) -> WeylElement:
        """(delta^{0,1})^{-1} of the contraction of xi into omega: xi^e H[e][v] wb^v."""
        n = self.n
        terms = {}
        for v in range(n):
            c = self.ring.zero
            for e in range(n):
                c = c + xi[e] * self.H[e][v]
            if not c.is_zero():
                exps = [0] * (2 * n)
                exps[n + v] = 1
                terms[(0, tuple(exps), ())] = c
        return WeylElement(self.ring, terms, cap, hbar)

    # ------------------------------------------------------ conjugate chart
    def conjugate_chart(self) -> "KahlerChart":
        """The conjugate complex manifold with form -omega, in its own holomorphic coordinates.

        Its coordinate z^a is our zb^a.  The metric entries are
        Hc[a][b](z, zb) = H[b][a](zb, z); rho0 is unchanged, so its holomorphic
        derivative on the conjugate chart is d rho0/dzb rewritten in the new names.
        """
        n = self.n
        Hc = [[swap_variables(self.H[b][a]) for b in range(n)] for a in range(n)]
        drho0 = None
        if self.drho0 is not None:
            drho0 = [conjugate_coefficients(x) for x in self.drho0]
        return KahlerChart(n, Hc, drho0, name=f"{self.name}-conjugate")

    def self_conjugate(self) -> bool:
        """True when the conjugate chart has literally the same metric and potential data."""
        other = self.conjugate_chart()
        n = self.n
        same = all(other.H[a][b] == self.H[a][b] for a in range(n) for b in range(n))
        if self.drho0 is not None:
            same = same and all(x == y for x, y in zip(other.drho0, self.drho0))
        return same

    def complexify(self) -> HolomorphicChart:
        """Replace zb by independent variables: u^a = z^a, u^{n+a} = zb^a."""
        ring = chart_ring("holomorphic", self.n)
        form = [[transfer(x, ring) for x in row] for row in self.form]
        conn = Connection(ring, {k: transfer(v, ring) for k, v in self.connection.entries.items()})
        return HolomorphicChart(form, conn, name=f"{self.name}-complexified")

    def describe(self) -> dict:
        out = {"name": self.name, "mode": "kahler", "n": self.n,
               "omega": [[str(x) for x in row] for row in self.H]}
        if self.drho0 is not None:
            out["drho0"] = [str(x) for x in self.drho0]
        out["drho1"] = [str(x) for x in self.drho1]
        return out


# ================================================================= models

def _model_data():
    return {
        # rho0 = -|z|^2
        "flat-c1": (1, [["i"]], ["-zb1"]),
        "flat-c2": (2, [["i", "0"], ["0", "i"]], ["-zb1", "-zb2"]),
        # rho0 = -log(1 + |z|^2): Fubini-Study on the affine chart of CP^1
        "cp1": (1, [["i/(1+z1*zb1)^2"]], ["-zb1/(1+z1*zb1)"]),
        # rho0 = log(1 - |z|^2): Poincare disk
        "disk": (1, [["i/(1-z1*zb1)^2"]], ["-zb1/(1-z1*zb1)"]),
    }


BUILTIN_MODELS = tuple(_model_data())

_MODEL_CACHE = {}


def builtin_model(name: str) -> KahlerChart:
    data = _model_data()
    if name not in data:
        raise ChartError(f"unknown model {name!r}; built-ins are {', '.join(BUILTIN_MODELS)}")
    if name not in _MODEL_CACHE:
        n, omega, drho0 = data[name]
        _MODEL_CACHE[name] = KahlerChart(
            n, [[parse_expr(x, "kahler", n) for x in row] for row in omega],
            [parse_expr(x, "kahler", n) for x in drho0], name=name)
    return _MODEL_CACHE[name]


def model_source(name: str) -> dict:
    n, omega, drho0 = _model_data()[name]
    return {"name": name, "mode": "kahler", "n": n, "omega": omega, "drho0": drho0}


def load_model(source) -> SymplecticChart:
    """Build a chart from a model description (dict or JSON text)."""
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ChartError(f"model file is not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(source, dict):
        raise ChartError("model description must be an object")
    for field in ("mode", "n", "omega"):
        if field not in source:
            raise ChartError(f"model description: missing field {field!r}")
    mode = source["mode"]
    n = source["n"]
    if mode not in ("kahler", "real", "holomorphic"):
        raise ChartError(f"model description: field 'mode': unknown mode {mode!r}")
    if not isinstance(n, int) or n < 1:
        raise ChartError("model description: field 'n' must be a positive integer")
    size = n if mode == "kahler" else 2 * n
    rows = source["omega"]
    if not isinstance(rows, list) or len(rows) != size:
        raise ChartError(f"model description: field 'omega' must be a list of {size} rows")

    def parse_at(text, where):
        if not isinstance(text, str):
            raise ChartError(f"model description: {where}: expected an expression string")
        try:
            return parse_expr(text, mode, n)
        except ValueError as exc:
            raise ChartError(f"model description: {where}: {exc}") from None

    omega = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != size:
            raise ChartError(f"model description: omega[{i}] must have {size} entries")
        omega.append([parse_at(x, f"omega[{i}][{j}]") for j, x in enumerate(row)])
    name = source.get("name", "user-model")
    if mode == "kahler":
        drho0 = None
        if "drho0" in source:
            if not isinstance(source["drho0"], list) or len(source["drho0"]) != n:
                raise ChartError(f"model description: field 'drho0' must be a list of {n} expressions")
            drho0 = [parse_at(x, f"drho0[{i}]") for i, x in enumerate(source["drho0"])]
        return KahlerChart(n, omega, drho0, name=name)
    if mode == "real":
        return RealSymplecticChart(omega, name=name, n=n)
    return HolomorphicChart(omega, name=name)
