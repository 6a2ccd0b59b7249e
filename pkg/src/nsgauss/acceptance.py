"""The acceptance suite: seven criteria with pinned seeds and fixed tolerances.

``run_acceptance`` evaluates every criterion, prints one PASS/FAIL line per
criterion and (optionally) writes one CSV per criterion plus
``acceptance.json``.  The CSVs hold every checked number at full precision,
so two runs agree byte for byte exactly when all estimates do.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import cantor, dynamics, experiments, growth
from .action import AffineZAction
from .experiments import check
from .report import fmt, write_csv, write_json
from .rng import substream

SEED = 20240607
MC_SAMPLES = 10**6


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list
    seconds: float = 0.0
    budget: float = math.inf
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def line(self) -> str:
        failed = [c["check"] for c in self.checks if not c["passed"]]
        tail = f"  failed: {'; '.join(failed)}" if failed else ""
        return (f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title} "
                f"({len(self.checks)} checks, {self.seconds:.1f}s){tail}")


def _runtime(res: CriterionResult) -> dict:
    return check("runtime", res.seconds, f"< {res.budget:g} s", res.seconds < res.budget)


# 1 ---------------------------------------------------------------------------

def criterion_identities() -> list[dict]:
    return experiments.exact_identity_checks(SEED, 100)


# 2 ---------------------------------------------------------------------------

def criterion_gaussian_mc() -> list[dict]:
    return experiments.gaussian_mc_checks(SEED, 4, MC_SAMPLES)


# 3 ---------------------------------------------------------------------------

def criterion_cantor() -> list[dict]:
    out = []
    p0, p1, e = cantor.PSequence.const(0.0), cantor.PSequence.const(1.0), cantor.PSequence.example83()

    rep = cantor.coboundary_report(p0, 60)
    out.append(check("p=0: sum r_m", rep.rows[-1][2], "== 9 and coboundary",
                     rep.rows[-1][2] == 9.0 and rep.verdict == cantor.HOLDS))

    rep1 = cantor.coboundary_report(p1, 60)
    cond1 = cantor.condition_ratio(p1, 0.5, 60)
    c1 = cantor.correlation(p1, 7, 40)[0]
    trivial = (rep1.rows[-1][2] == 0.0 and rep1.verdict == cantor.HOLDS
               and cond1.verdict == cantor.UNDETERMINED and c1 == 1.0)
    out.append(check("p=1: trivial verdicts", rep1.rows[-1][2],
                     "sum 0, coboundary, condition undetermined, correlation 1", trivial))

    cond = cantor.condition_ratio(e, 0.5, 900)
    at_sq = {row[0]: row for row in cond.rows}
    mins = [at_sq[k * k][3] for k in range(1, 31)]
    ratios = [at_sq[k * k][2] for k in range(1, 31)]
    strictly = all(b < a for a, b in zip(mins, mins[1:]))
    h30 = math.fsum(1.0 / k for k in range(1, 31))
    out.append(check("example: running min strictly decreasing over squares to 900", mins[-1],
                     "strict decrease", strictly))
    out.append(check("example: running min at n=900", mins[-1], "< 3.0", mins[-1] < 3.0,
                     expected_9H_over_K=9 * h30 / 30))
    out.append(check("example: ratio at 900 vs 9 H_30 / 30", ratios[-1], "rel 1e-3",
                     abs(ratios[-1] - 9 * h30 / 30) <= 1e-3 * 9 * h30 / 30))

    for tag, p in (("example", e), ("p=0", p0)):
        for i, a in enumerate((1, 3, 9, 27)):
            val, tail = cantor.correlation(p, a, 40)
            est = cantor.correlation_mc(p, a, MC_SAMPLES, SEED + 300 + i)
            out.append(check(f"{tag}: correlation a={a}", est.value, "3 sigma + tail",
                             est.within(val, 3.0, tail), product=val, stderr=est.stderr, tail=tail))

    for tag, p, a, level in (("p=0", p0, 3, 10), ("example", e, 2, 10), ("example", e, 5, 10),
                             ("p=0.2", cantor.PSequence.const(0.2), 4, 10)):
        cn = cantor.cocycle_norm(p, a, level, MC_SAMPLES, SEED + 400 + a)
        ok = cn.mc_agrees(3.0) and cn.in_bracket(cn.truncated) and cn.in_bracket(cn.mc.value, 3 * cn.mc.stderr)
        out.append(check(f"{tag}: |c_{a}|^2 level {level}", cn.truncated,
                         "truncated vs MC 3 sigma; both in bracket (MC with 3 sigma)", ok,
                         mc=cn.mc.value, stderr=cn.mc.stderr, bracket=list(cn.bracket)))

    worst = -math.inf
    rng = substream(SEED, 77)
    for p in (e, p0, cantor.PSequence.const(0.05), cantor.PSequence.const(0.3),
              cantor.PSequence.from_list([0.9, 0.1, 1.0, 0.4, 0.2, 1.0, 0.0], 1.0)):
        delta = 0.5
        level = 8
        atoms = cantor.truncate_to_spectral(p, level)
        r = cantor.r_terms(p, level)
        for n in range(1, level + 1):
            if p.value(n) > 1 - delta:
                continue
            bound = 4.0 / delta * math.fsum(r[:n])
            amax = 2 * 3**n
            cand = set(int(v) for v in rng.integers(-amax, amax + 1, 40)) | {amax, -amax, 1, 0}
            for a in cand:
                worst = max(worst, atoms.cocycle_norm_sq(a) - bound)
    out.append(check("4/delta sum r_m bound never violated", worst, "<= 1e-9", worst <= 1e-9))
    return out


# 4 ---------------------------------------------------------------------------

def criterion_hurewicz() -> list[dict]:
    out = []
    rng = substream(SEED, 4)
    act = AffineZAction.random(rng, n_rot=2, n_trivial=1, scale=1.5)
    x = rng.standard_normal(act.dim)
    rep = dynamics.hurewicz_average(act, experiments.FUNCTIONALS["one"], x, 20000)
    out.append(check("F=1 gives exactly 1", float(np.max(np.abs(rep.estimate - 1.0))), "== 0",
                     bool(np.all(rep.estimate == 1.0))))
    rot = AffineZAction(np.array([math.sqrt(2) - 1]), np.array([]), np.array([0.7, 0.2]), 0.0)
    for seed in range(5):
        x = substream(SEED + seed, 0).standard_normal(2)
        r = dynamics.hurewicz_average(rot, experiments.FUNCTIONALS["x1sq"], x, 10**5)
        out.append(check(f"pmp rotation x1^2 seed {seed}", r.final, "abs 0.05 of |x|^2/2",
                         abs(r.final - x @ x / 2) <= 0.05, target=float(x @ x / 2)))
    xi = np.array([0.8, -0.5])
    fp = dynamics.fixed_point_action(math.sqrt(2) - 1, xi)
    for seed in range(3):
        x = substream(SEED + 10 + seed, 0).standard_normal(2)
        r = dynamics.hurewicz_average(fp, experiments.FUNCTIONALS["x1"], x, 10**5)
        ora = dynamics.circle_quadrature_oracle(experiments.FUNCTIONALS["x1"], x, xi)
        out.append(check(f"fixed-point block x1 seed {seed}", r.final, "abs 0.05 of quadrature oracle",
                         abs(r.final - ora) <= 0.05, oracle=ora))
    return out


# 5 ---------------------------------------------------------------------------

def criterion_skew() -> list[dict]:
    out = []
    drift = AffineZAction(np.array([]), np.array([1.0]), np.array([1.0]))
    st = dynamics.skew_simulate(drift, 10**4, x0=np.array([1.0]), window=(-1.0, 1.0), burn_in=100)
    out.append(check("drift case: returns after burn-in 100", st.returns, "== 0", st.returns == 0))
    atoms = cantor.truncate_to_spectral(cantor.PSequence.example83(), 8)
    atk = AffineZAction.from_spectral(atoms).without_invariant_part()
    counts = [dynamics.skew_simulate(atk, 10**6, window=(-1.0, 1.0), seed=SEED + s).returns for s in range(5)]
    med = float(np.median(counts))
    out.append(check("Atkinson regime: median window returns", med, ">= 20", med >= 20, counts=counts))
    ss = [2.0**j for j in range(1, 21)]
    d1, v1 = growth.skew_delta(growth.z_profile("linear", ss))
    d2, v2 = growth.skew_delta(growth.z_profile("sqrt", ss))
    tower = growth.locally_finite_cocycle([2**k for k in range(9)], 8)
    d3, v3 = growth.skew_delta(tower.profile)
    out.append(check("skew_delta |c_a| = |a|", d1, "boundary", v1 == "boundary"))
    out.append(check("skew_delta |c_a|^2 = |a|", d2, "2 +- 0.05, conservative",
                     abs(d2 - 2) <= 0.05 and v2 == "conservative"))
    out.append(check("skew_delta tower", d3, "< 0.2, dissipative", d3 < 0.2 and v3 == "dissipative",
                     lower_bound_holds=tower.checks["lower_bound_holds"]))
    return out


# 6 ---------------------------------------------------------------------------

def criterion_exponents() -> list[dict]:
    out = []
    F2 = growth.FreeGroupModel(2)
    pe = growth.poincare_exponent(growth.tree_profile(F2, 12))
    out.append(check("Poincare exponent F2 r=12", pe.estimate, "log 3 +- 1e-6",
                     abs(pe.estimate - math.log(3)) <= 1e-6))
    w = growth.tdiss_window(math.log(3), tree=True, free_group=True)
    ok = abs(w.lo - 1.4823) <= 1e-4 and abs(w.hi - 2.9646) <= 1e-4 and w.tree_exact == w.hi
    out.append(check("t_diss window", w.lo, "(1.4823, 2.9646) +- 1e-4", ok, hi=w.hi))
    k20 = growth.koopman_l2_report(F2, 2.0, 40)
    k22 = growth.koopman_l2_report(F2, 2.2, 40)
    out.append(check("l2 Koopman flips between t=2.0 and 2.2", k22.shell_ratio, "2.0 diverges, 2.2 converges",
                     k20.verdict == "diverges" and k22.verdict == "converges", ratio_20=k20.shell_ratio))
    walk = growth.radial_entropy_drift(F2, 400)
    h = float(walk.entropy_rate[-1])
    d = float(walk.drift_rate[-1])
    out.append(check("H(mu^400)/400", h, "abs 0.03 of 0.54931", abs(h - 0.54931) <= 0.03))
    out.append(check("E|X_400|/400", d, "abs 0.01 of 0.5", abs(d - 0.5) <= 0.01))
    for n in (2, 3, 4):
        g = growth.guivarch_check(growth.FreeGroupModel(n), 400)
        out.append(check(f"Guivarch slack n={n}", g.slack, ">= -1e-9", g.holds(1e-9), h=g.h_est,
                         delta_drift=g.delta_drift))
    ev = growth.edge_indicator_validation(2, 4)
    out.append(check("edge indicators on radius-4 ball", ev["elements"], "|c_g|^2 = |g| exact",
                     ev["norm_identity"] and ev["cocycle_identity"] and ev["elements"] == ev["expected_elements"]))
    return out


CRITERIA: list[tuple[int, str, Callable[[], list], float]] = [
    (1, "exact algebraic identities", criterion_identities, 10.0),
    (2, "Gaussian analytics vs Monte Carlo", criterion_gaussian_mc, 120.0),
    (3, "Cantor certificates", criterion_cantor, 60.0),
    (4, "ratio-ergodic averages", criterion_hurewicz, 300.0),
    (5, "skew products", criterion_skew, 180.0),
    (6, "exponents and entropy", criterion_exponents, 120.0),
]


def _checks_rows(checks):
    return [(c["check"], c["value"], c["tolerance"], c["passed"]) for c in checks]


def write_tables(results: list[CriterionResult], out: Path) -> list[str]:
    """One CSV per criterion, timing excluded so that reruns compare byte for byte."""
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for res in results:
        fname = f"criterion{res.number}.csv"
        rows = [r for r, c in zip(_checks_rows(res.checks), res.checks) if c["check"] != "runtime"]
        write_csv(out / fname, ("check", "value", "tolerance", "passed"), rows)
        files.append(fname)
    return files


def determinism_probe(threads_a: int = 1, threads_b: int = 8) -> list[dict]:
    """Run the Monte-Carlo criteria under two thread counts and compare CSV bytes."""
    blobs = []
    saved = os.environ.get("NSGAUSS_THREADS")
    try:
        for th in (threads_a, threads_b):
            os.environ["NSGAUSS_THREADS"] = str(th)
            res = [CriterionResult(2, "", criterion_gaussian_mc()), CriterionResult(3, "", criterion_cantor())]
            with tempfile.TemporaryDirectory() as td:
                files = write_tables(res, Path(td))
                blobs.append({f: (Path(td) / f).read_bytes() for f in files})
    finally:
        if saved is None:
            os.environ.pop("NSGAUSS_THREADS", None)
        else:
            os.environ["NSGAUSS_THREADS"] = saved
    same = blobs[0] == blobs[1]
    return [check(f"CSV bytes identical for NSGAUSS_THREADS {threads_a} vs {threads_b}", len(blobs[0]),
                  "byte-identical", same)]


def run_acceptance(out: Path | None = None, determinism: bool = True, echo: Callable = print,
                   only: set | None = None) -> list[CriterionResult]:
    results = []
    for number, title, fn, budget in CRITERIA:
        if only and number not in only:
            continue
        t0 = time.perf_counter()
        checks = fn()
        res = CriterionResult(number, title, checks, time.perf_counter() - t0, budget)
        res.checks.append(_runtime(res))
        results.append(res)
        echo(res.line())
    if determinism and (not only or 7 in only):
        t0 = time.perf_counter()
        res = CriterionResult(7, "determinism across thread counts", determinism_probe())
        res.seconds = time.perf_counter() - t0
        results.append(res)
        echo(res.line())
    if out is not None:
        files = write_tables(results, Path(out))
        write_json(Path(out) / "acceptance.json", {
            "criteria": [{"number": r.number, "title": r.title, "passed": r.passed,
                          "checks": [{k: (fmt(v) if k == "value" else v) for k, v in c.items()}
                                     for c in r.checks if c["check"] != "runtime"]}
                         for r in results],
            "files": files,
            "seed": SEED,
        })
    return results
