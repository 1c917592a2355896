"""The verification suite: every identity of the engine as a zero-residual check.

Checks are grouped into jobs.  A job rebuilds its chart from the model
description, so jobs can run in worker processes; the report is sorted by
check-id afterwards and does not depend on scheduling.
"""

from __future__ import annotations

import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence

from . import __version__
from .conventions import fingerprint
from .coeff import chart_ring, swap_variables
from .geom import (
    ChartError, KahlerChart, RealSymplecticChart, HolomorphicChart, builtin_model, covariant_derivative_of_form,
    load_model, model_source, torsion,
)
from .weyl import (
    WeylElement, delta, delta_inv, pi0, delta10, delta10_inv, pi0star, delta01, delta01_inv, pistar0, star as weyl_star,
)
from .fedosov import (
    D_squared_check, O_holomorphic, O_xi_rho, fedosov_holomorphic, fedosov_kahler, fedosov_kahler_generic,
    fedosov_real, flat_section, vector_field_bracket_check, moyal_equivalence_check, normalization_of, random_element,
    random_low_weight_element,
    residual_check, restrict_to_real, star, tilde_delta_A_check,
)
from .report import CheckResult, check, failed

SCHEMA_VERSION = 1
LOW_CAP = 4
SUITES = ("all", "kernel", "fedosov", "star", "module", "bimodule", "connection")

# planar symplectic densities for the symplectic-connection construction
PLANAR_DENSITIES = ("1+x^2", "1+x^2+y^2", "2+x*y^2")


@dataclass(frozen=True)
class RunConfig:
    model: dict
    weight: int = 6
    level: Optional[int] = None
    suite: str = "all"
    samples: int = 3

    def __post_init__(self):
        if self.weight < 2:
            raise ValueError("the weight cap must be at least 2")
        if self.level is not None and self.level == 0:
            raise ValueError("the level must be nonzero")
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")

    @property
    def model_name(self) -> str:
        return self.model.get("name", "user-model")


def config_for(model: str, **kw) -> RunConfig:
    """RunConfig for a built-in model name."""
    return RunConfig(model_source(model), **kw)


_CHARTS: Dict[str, object] = {}


def chart_of(source: dict):
    key = json.dumps(source, sort_keys=True)
    if key not in _CHARTS:
        name = source.get("name")
        from .geom import BUILTIN_MODELS
        if name in BUILTIN_MODELS and source == model_source(name):
            _CHARTS[key] = builtin_model(name)
        else:
            _CHARTS[key] = load_model(source)
    return _CHARTS[key]


# ================================================================ jobs

def kernel_checks(kernel, model: str, cap: int, samples: int, seed: int = 0, form_degrees=(0, 1)) -> List[CheckResult]:
    """Associativity and unit of a fiber product on random triples."""
    rng = random.Random(seed)
    ring = kernel.ring
    assoc, unit = [], []
    one = WeylElement.function(ring.one, cap)
    for _ in range(samples):
        a, b, c = (random_low_weight_element(ring, cap, rng, rng.choice(form_degrees)) for _ in range(3))
        assoc.append(weyl_star(weyl_star(a, b, kernel), c, kernel) - weyl_star(a, weyl_star(b, c, kernel), kernel))
        unit.append(weyl_star(one, a, kernel) - a)
        unit.append(weyl_star(a, one, kernel) - a)
    return [check(f"kernel-associativity/{kernel.name}", model, cap, assoc),
            check(f"kernel-unit/{kernel.name}", model, cap, unit)]


def homotopy_checks(ring, model: str, cap: int, samples: int, seed: int = 0) -> List[CheckResult]:
    """a - pi(a) = delta delta^{-1} a + delta^{-1} delta a for each polarization present."""
    rng = random.Random(seed)
    ops = [("", delta, delta_inv, pi0)]
    if ring.mode == "kahler":
        ops += [("-10", delta10, delta10_inv, pi0star), ("-01", delta01, delta01_inv, pistar0)]
    out = []
    for suffix, d, dinv, proj in ops:
        res = []
        for _ in range(samples):
            a = random_element(ring, cap + 1, rng, terms=4, form_degree=rng.randint(0, min(2, ring.nvars)))
            res.append((a - proj(a) - d(dinv(a)) - dinv(d(a))).truncate(cap))
        out.append(check(f"homotopy{suffix}", model, cap, res))
    return out


def job_kernel(cfg: RunConfig) -> List[CheckResult]:
    chart = chart_of(cfg.model)
    N, m, n = cfg.weight, cfg.model_name, cfg.samples
    out = homotopy_checks(chart.ring, m, N, n)
    out += kernel_checks(chart.moyal(), m, N, n)
    if isinstance(chart, KahlerChart):
        out += kernel_checks(chart.anti_wick(), m, N, n)
        hc = chart.complexify()
        out += kernel_checks(hc.moyal(), m, N, n)
    return out


def job_fedosov(cfg: RunConfig) -> List[CheckResult]:
    chart = chart_of(cfg.model)
    N, m = cfg.weight, cfg.model_name
    if isinstance(chart, HolomorphicChart):
        F = fedosov_holomorphic(chart, N=N)
        return [residual_check(F), D_squared_check(F, cfg.samples)]
    if isinstance(chart, RealSymplecticChart):
        F = fedosov_real(chart, N=N)
        return [residual_check(F), D_squared_check(F, cfg.samples)]
    F = fedosov_kahler(chart, N)
    out = [residual_check(F), D_squared_check(F, cfg.samples)]
    generic = fedosov_kahler_generic(chart, N, normalization_of(F))
    out.append(residual_check(generic))
    out.append(check("closed-forms-vs-recursion", m, N,
                     (generic.correction.with_cap(N) - F.correction.with_cap(N))))
    out.append(check("tilde-laplacian-A", m, N, tilde_delta_A_check(F)))
    out += moyal_equivalence_check(F, cfg.samples)
    # the same chart as real-analytic data, and its holomorphic extension
    Fm = fedosov_real(chart, N=N)
    out.append(residual_check(Fm))
    Fh = fedosov_holomorphic(chart.complexify(), N=N)
    out.append(residual_check(Fh))
    out.append(check("restriction-to-real", m, N, restrict_to_real(Fh.A, chart) - Fm.A))
    return out


def _random_function(ring, rng, holomorphic=False):
    names = list(ring.names[:ring.n]) if holomorphic else list(ring.names)
    f = ring.const(rng.randint(-3, 3))
    for _ in range(rng.randint(1, 2)):
        term = ring.const(rng.choice((1, 2, -1)))
        for _ in range(rng.randint(1, 2)):
            term = term * ring.var(rng.choice(names))
        f = f + term
    return f


def job_star(cfg: RunConfig) -> List[CheckResult]:
    chart = chart_of(cfg.model)
    N, m = cfg.weight, cfg.model_name
    ring = chart.ring
    rng = random.Random(1)
    if isinstance(chart, KahlerChart):
        F = fedosov_kahler(chart, N)
    elif isinstance(chart, HolomorphicChart):
        F = fedosov_holomorphic(chart, N=N)
    else:
        F = fedosov_real(chart, N=N)
    c0, poisson = [], []
    for _ in range(cfg.samples):
        f, g = _random_function(ring, rng), _random_function(ring, rng)
        fg = star(f, g, F)
        gf = star(g, f, F)
        c0.append(fg[0] - f * g)
        if len(fg) > 1:
            poisson.append(fg[1] - gf[1] - chart.poisson(f, g))
    out = [check("star-classical-limit", m, N, c0),
           check("star-poisson-bracket", m, N, poisson, low_cap_below=LOW_CAP)]
    if not isinstance(chart, KahlerChart):
        return out
    sep = []
    for _ in range(cfg.samples):
        f = _random_function(ring, rng, holomorphic=True)
        g = _random_function(ring, rng)
        h = swap_variables(_random_function(ring, rng, holomorphic=True))
        prod = star(f, g, F)
        sep.append([prod[0] - f * g] + prod[1:])
        prod = star(g, h, F)
        sep.append([prod[0] - g * h] + prod[1:])
    out.append(check("star-separation-of-variables", m, N, sep))
    agree = []
    for _ in range(cfg.samples):
        f = _random_function(ring, rng, holomorphic=True)
        agree.append(O_holomorphic(f, F, N).O - flat_section(f, F, N).O)
    out.append(check("flat-section-holomorphic", m, N, agree))
    if chart.drho0 is None:
        return out
    flat = [F.D(O_xi_rho(xi, F, N + 1).O) for xi in (["1"], ["z1"], ["z1^2"])] if chart.n == 1 else \
        [F.D(O_xi_rho(xi, F, N + 1).O) for xi in (["1"] + ["0"] * (chart.n - 1), ["z1"] + ["0"] * (chart.n - 1))]
    out.append(check("flat-section-vector-field", m, N, flat))
    if chart.n == 1:
        triple = (["1"], ["z1"], ["z1^2"])
        for i, j in ((0, 1), (0, 2), (1, 2)):
            for r in vector_field_bracket_check(triple[i], triple[j], "z1^3+2*z1", F):
                out.append(replace(r, check_id=f"{r.check_id}/{i}{j}"))
    return out


def job_module(cfg: RunConfig) -> List[CheckResult]:
    from .modact import curvature_action_check, weight_one_action_check, frame_divergence_check, module_checks, module_connection
    chart = chart_of(cfg.model)
    if not isinstance(chart, KahlerChart) or chart.drho0 is None:
        return []
    F = module_connection(chart, cfg.weight)
    out = curvature_action_check(F) + weight_one_action_check(F)
    levels = (cfg.level,) if cfg.level is not None else (1, 2)
    xis = _module_fields(chart)
    for k in levels:
        for r in module_checks(F, k, xis) + [frame_divergence_check(F, k, xis)]:
            out.append(replace(r, check_id=f"{r.check_id}@k={k}"))
    return out


def _module_fields(chart) -> tuple:
    pad = ("0",) * (chart.n - 1)
    return (("1",) + pad, ("z1",) + pad, ("z1^2",) + pad)


def job_bimodule(cfg: RunConfig) -> List[CheckResult]:
    from .modact import bimodule_checks, module_connection
    chart = chart_of(cfg.model)
    if not isinstance(chart, KahlerChart) or chart.drho0 is None:
        return []
    F = module_connection(chart, cfg.weight)
    k = cfg.level if cfg.level is not None else 1
    return [replace(r, check_id=f"{r.check_id}@k={k}") for r in bimodule_checks(F, k)]


def connection_check(chart, model: str) -> List[CheckResult]:
    conn = chart.connection
    return [check("connection-torsion-free", model, 0, [not torsion(conn)]),
            check("connection-preserves-form", model, 0,
                  [not covariant_derivative_of_form(chart.form, conn, chart.ring)])]


def job_connection(cfg: RunConfig) -> List[CheckResult]:
    chart = chart_of(cfg.model)
    out = []
    if not isinstance(chart, HolomorphicChart):
        out += connection_check(chart, cfg.model_name)
    ring = chart_ring("real", 1)
    for i, text in enumerate(PLANAR_DENSITIES):
        planar = RealSymplecticChart.planar(ring.parse(text), name=f"planar-{i}")
        for r in connection_check(planar, cfg.model_name):
            out.append(replace(r, check_id=f"{r.check_id}/planar:{text}"))
    return out


JOBS: Dict[str, Callable[[RunConfig], List[CheckResult]]] = {
    "kernel": job_kernel,
    "fedosov": job_fedosov,
    "star": job_star,
    "module": job_module,
    "bimodule": job_bimodule,
    "connection": job_connection,
}


def _run_job(args) -> List[CheckResult]:
    name, cfg = args
    try:
        results = JOBS[name](cfg)
    except (ChartError, ValueError, ZeroDivisionError, ArithmeticError) as exc:
        return [failed(f"{name}/error", cfg.model_name, cfg.weight, exc)]
    return [replace(r, low_cap=r.low_cap or (r.cap > 0 and (r.cap < LOW_CAP or cfg.weight < LOW_CAP))) for r in results]


def run_suite(cfg: RunConfig, jobs: Optional[int] = None) -> List[CheckResult]:
    """All checks of the selected suite, sorted by check-id."""
    names = list(JOBS) if cfg.suite == "all" else [cfg.suite]
    work = [(name, cfg) for name in names]
    if jobs is None:
        jobs = min(len(work), os.cpu_count() or 1)
    if jobs <= 1 or len(work) == 1:
        parts = [_run_job(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_job, work))
    results = [r for part in parts for r in part]
    return sorted(results, key=lambda r: (r.check_id, r.model, r.cap))


def build_report(cfg: RunConfig, results: Sequence[CheckResult]) -> dict:
    passed = sum(r.passed for r in results)
    return {
        "schema-version": SCHEMA_VERSION,
        "engine-version": __version__,
        "conventions-fingerprint": fingerprint(),
        "config": {"model": cfg.model_name, "weight": cfg.weight, "level": cfg.level, "suite": cfg.suite},
        "checks": [r.as_dict() for r in results],
        "summary": {"total": len(results), "passed": passed, "failed": len(results) - passed},
    }


def render_report(report: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    lines = [f"engine {report['engine-version']}  conventions {report['conventions-fingerprint']}",
             "config " + " ".join(f"{k}={v}" for k, v in report["config"].items())]
    for c in report["checks"]:
        flag = "PASS" if c["pass"] else "FAIL"
        extra = " [low-cap]" if c["low-cap"] else ""
        lines.append(f"{flag} {c['check-id']} cap={c['cap']} residual={c['residual-description']}{extra}")
    s = report["summary"]
    lines.append(f"{s['passed']}/{s['total']} checks passed")
    return "\n".join(lines) + "\n"
