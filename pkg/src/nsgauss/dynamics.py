"""Orbits, Radon-Nikodym cocycles and ratio averages of Gaussian Z-actions.

Conventions: ``omega(a, x) = d(a^{-1} mu)/d mu (x) = phi(a.x) / phi(x)`` for
the standard Gaussian density ``phi``, so that
``log omega(a, x) = -|t c_a|^2 / 2 + <x, t c_{-a}>`` and the chain rule reads
``omega(a + b, x) = omega(a, b.x) omega(b, x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .action import AffineZAction, GuardError
from .cantor import FAILS, HOLDS, UNDETERMINED, CertificateReport, PSequence, correlation
from .gaussian import MaharamPoint
from .rng import Estimate, chunk_sizes, gaussian_mc_mean, mc_mean, substream

MAX_ORBIT = 10**8   # orbit points held in memory at once


def _orbit_guard(n: int) -> None:
    if n > MAX_ORBIT:
        raise GuardError("orbit-length", f"{n} orbit points exceed the limit {MAX_ORBIT}")

__all__ = [
    "AffineZAction",
    "act",
    "rn_log",
    "rn_log_matrix",
    "moment_identity_check",
    "RatioAverageReport",
    "hurewicz_average",
    "circle_quadrature_oracle",
    "fixed_point_action",
    "maharam_step",
    "ratio_set_histogram",
    "SkewPoint",
    "SkewStats",
    "skew_path",
    "skew_simulate",
    "criterion_Z",
    "criterion_general",
    "criterion_Z_interval",
    "cantor_norms",
    "fraction_bound_check",
]


def act(action: AffineZAction, a, x):
    return action.act(a, x)


def rn_log(action: AffineZAction, a, x):
    return action.rn_log(a, x)


def rn_log_matrix(action: AffineZAction, a: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``log omega(a_j, x_i)`` as an ``(len(X), len(a))`` array."""
    a = np.asarray(a)
    t = action.scale
    c = action.cocycle(a)
    cm = action.cocycle(-a)
    quad = -0.5 * t * t * np.einsum("ij,ij->i", c, c)
    return quad[None, :] + t * (np.asarray(X, dtype=float) @ cm.T)


def moment_identity_check(action: AffineZAction, a: int, beta: float, n: int, seed: int,
                          log_omega: Callable | None = None) -> tuple[float, Estimate]:
    """``E[omega(a, .)^-beta]`` against ``exp(beta (beta + 1) |t c_a|^2 / 2)``.

    ``log_omega(a, X)`` may replace the action's own cocycle.
    """
    if not -2.0 <= beta <= 2.0:
        raise GuardError("beta-range", f"beta = {beta} outside [-2, 2]")
    C = action.scale**2 * float(action.cocycle_norm_sq(a))
    if C > 4.0:
        raise GuardError(
            "variance",
            f"|t c_a| = {math.sqrt(C):.3g} > 2: omega^-beta is lognormal with log-variance "
            f"{beta * beta * C:.3g}, too heavy-tailed for a reliable MC mean",
        )
    logw = log_omega or action.rn_log
    analytic = math.exp(0.5 * beta * (beta + 1.0) * C)
    est = gaussian_mc_mean(lambda X: np.exp(-beta * logw(a, X)), action.dim, n, seed)
    return analytic, est


# -- ratio averages -----------------------------------------------------------


@dataclass
class RatioAverageReport:
    """Ratio averages over ``A_n = [-n, n]``.

    ``numerator`` and ``denominator`` are the raw sums divided by
    ``exp(max_{|a|<=n} log omega(a, x))``; their ratio is the estimate.
    """

    n: np.ndarray
    numerator: np.ndarray
    denominator: np.ndarray
    estimate: np.ndarray

    @property
    def history(self) -> np.ndarray:
        return self.estimate

    @property
    def final(self) -> float:
        return float(self.estimate[-1])

    def rows(self):
        return zip(self.n.tolist(), self.numerator.tolist(), self.denominator.tolist(), self.estimate.tolist())


def _pair_accumulate(vals: np.ndarray) -> np.ndarray:
    """Running log-sum-exp over ``a = 0, then {-1, 1}, {-2, 2}, ...``.

    ``vals`` is indexed by ``a + n_max``.
    """
    n_max = (vals.size - 1) // 2
    centre = vals[n_max]
    pairs = np.logaddexp(vals[n_max - 1 :: -1], vals[n_max + 1 :])
    return np.logaddexp.accumulate(np.concatenate([[centre], pairs]))


def hurewicz_average(action: AffineZAction, F: Callable[[np.ndarray], np.ndarray], x, n_max: int,
                     bound: float | None = None, schedule: Sequence[int] | None = None,
                     block: int = 1 << 15) -> RatioAverageReport:
    """``sum_{|a|<=n} omega(a,x) F(a.x) / sum_{|a|<=n} omega(a,x)`` for ``n <= n_max``.

    Every orbit point and weight comes from the closed-form cocycle, so step
    ``a`` costs the same for ``a = 1`` and ``a = 10^6``.  Sums are carried in
    log space with ``F`` split into positive and negative parts; ``F == 1``
    reproduces the denominator bit for bit and gives exactly 1.
    """
    x = np.asarray(x, dtype=float)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    _orbit_guard(2 * n_max + 1)
    a = np.arange(-n_max, n_max + 1)
    logw = np.empty(a.size)
    fv = np.empty(a.size)
    for lo in range(0, a.size, block):
        sl = slice(lo, lo + block)
        logw[sl] = action.rn_log(a[sl], x)
        fv[sl] = np.asarray(F(action.act(a[sl], x)), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise GuardError("integrand", "F returned non-finite values")
    if bound is not None and np.max(np.abs(fv)) > bound:
        raise GuardError("integrand", f"|F| exceeds its declared bound {bound}")
    with np.errstate(divide="ignore"):
        lpos = np.where(fv > 0, np.log(np.where(fv > 0, fv, 1.0)), -np.inf) + logw
        lneg = np.where(fv < 0, np.log(np.where(fv < 0, -fv, 1.0)), -np.inf) + logw
        lpos = np.where(fv == 1.0, logw, lpos)
    D = _pair_accumulate(logw)
    P = _pair_accumulate(lpos)
    Q = _pair_accumulate(lneg)
    peak = np.maximum.accumulate(np.concatenate([[logw[n_max]],
                                                 np.maximum(logw[n_max - 1 :: -1], logw[n_max + 1 :])]))
    est = np.exp(P - D) - np.exp(Q - D)
    num = np.exp(P - peak) - np.exp(Q - peak)
    den = np.exp(D - peak)
    n = np.arange(n_max + 1)
    if schedule is not None:
        idx = np.asarray(sorted(set(int(s) for s in schedule if 0 <= s <= n_max)))
        n, num, den, est = n[idx], num[idx], den[idx], est[idx]
    return RatioAverageReport(n, num, den, est)


def fixed_point_action(turn: float, xi, scale: float = 1.0) -> AffineZAction:
    """Single rotation block whose cocycle is the coboundary of ``xi``.

    The orbit of ``x`` is the circle ``xi + R(a) (x - xi)``.
    """
    xi = np.asarray(xi, dtype=float)
    base = AffineZAction(np.array([turn]), np.array([]), np.zeros(2))
    gen = xi - base.linear(1, xi)
    return AffineZAction(np.array([turn]), np.array([]), gen / scale if scale else gen, scale)


def circle_quadrature_oracle(F: Callable[[np.ndarray], np.ndarray], x, xi, nodes: int = 4096) -> float:
    """Weighted circle average that the ratio averages of a fixed-point block reach.

    On the orbit circle ``y = xi + R_phi (x - xi)`` the weights are
    ``omega = phi(y) / phi(x)``, proportional to ``exp(-<y, xi>)``; the rotation
    is uniquely ergodic, so the limit is the ``exp(-<y, xi>) d phi`` average.
    Periodic trapezoid rule.
    """
    x, xi = np.asarray(x, dtype=float), np.asarray(xi, dtype=float)
    phi = 2 * np.pi * np.arange(nodes) / nodes
    d = x - xi
    y = np.stack([xi[0] + np.cos(phi) * d[0] - np.sin(phi) * d[1],
                  xi[1] + np.sin(phi) * d[0] + np.cos(phi) * d[1]], axis=1)
    lw = -(y @ xi)
    w = np.exp(lw - lw.max())
    return float(np.sum(w * F(y)) / np.sum(w))


# -- Maharam extension --------------------------------------------------------


def maharam_step(action: AffineZAction, a: int, p: MaharamPoint) -> MaharamPoint:
    """``(x, s) -> (a.x, s + log omega(a, x))``."""
    return MaharamPoint(action.act(a, p.x), p.s + float(action.rn_log(a, p.x)))


@dataclass
class RatioSetHistogram:
    """Diagnostic only: log-RN values along an orbit, reduced mod ``modulus``."""

    modulus: float
    counts: np.ndarray
    edges: np.ndarray
    in_window: float
    window: float
    span: tuple[float, float]
    label: str = "diagnostic"


def ratio_set_histogram(action: AffineZAction, x, steps: int, modulus: float, bins: int = 32,
                        window: float = 10.0) -> RatioSetHistogram:
    """Histogram of ``log omega(n, x) mod modulus`` for ``0 <= n < steps``.

    ``in_window`` is the fraction of ``n`` with ``|log omega(n, x)| <= window``.
    This is an empirical lattice/non-lattice indicator, not a classification.
    """
    if modulus <= 0:
        raise ValueError("modulus must be positive")
    s = np.concatenate([action.rn_log(np.arange(lo, lo + size), x)
                        for lo, size in zip(np.cumsum([0] + chunk_sizes(steps)[:-1]), chunk_sizes(steps))])
    counts, edges = np.histogram(np.mod(s, modulus), bins=bins, range=(0.0, modulus))
    return RatioSetHistogram(modulus, counts, edges, float(np.mean(np.abs(s) <= window)), window,
                             (float(s.min()), float(s.max())))


# -- skew products ------------------------------------------------------------


@dataclass(frozen=True)
class SkewPoint:
    x: np.ndarray
    s: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if not (np.all(np.isfinite(x)) and np.isfinite(self.s)):
            raise ValueError("skew point must be finite")
        object.__setattr__(self, "x", x)


def skew_step(action: AffineZAction, p: SkewPoint) -> SkewPoint:
    """``(x, s) -> (pi(1) x, s + <x, c_{-1}>)`` with the unscaled cocycle."""
    x1, s1 = action.scaled(1.0).skew_step(1, p.x, p.s)
    return SkewPoint(x1, float(s1))


def skew_path(action: AffineZAction, x0, steps: int, s0: float = 0.0) -> np.ndarray:
    """``s_n`` for ``n = 0..steps``; ``s_n = s_0 + <x_0, c_{-n}>`` in closed form."""
    x0 = np.asarray(x0, dtype=float)
    _orbit_guard(steps + 1)
    n = np.arange(steps + 1)
    out = np.empty(steps + 1)
    for lo in range(0, steps + 1, 1 << 16):
        sl = slice(lo, lo + (1 << 16))
        out[sl] = s0 + action.cocycle(-n[sl]) @ x0
    return out


@dataclass(frozen=True)
class SkewStats:
    steps: int
    burn_in: int
    window: tuple[float, float]
    returns: int
    gap_quantiles: dict
    s_range: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "burn_in": self.burn_in,
            "window": list(self.window),
            "returns": self.returns,
            "gap_quantiles": self.gap_quantiles,
            "s_range": list(self.s_range),
        }


def skew_simulate(action: AffineZAction, steps: int, x0=None, window=(-1.0, 1.0), seed: int | None = None,
                  s0: float = 0.0, burn_in: int = 0) -> SkewStats:
    """Recurrence of ``s_n`` to ``window`` along the skew-product orbit.

    ``x0`` defaults to a standard Gaussian draw from ``seed``.  A return is a
    time ``n > burn_in`` with ``s_n`` in ``window``; gaps are the differences
    of consecutive return times.
    """
    if x0 is None:
        if seed is None:
            raise ValueError("need x0 or a seed")
        x0 = substream(seed, 0).standard_normal(action.dim)
    lo, hi = window
    s = skew_path(action, x0, steps, s0)
    times = np.nonzero((s >= lo) & (s <= hi))[0]
    times = times[times > burn_in]
    gaps = np.diff(times)
    q = {str(k): (float(np.quantile(gaps, k)) if gaps.size else None) for k in (0.1, 0.5, 0.9)}
    return SkewStats(steps, burn_in, (float(lo), float(hi)), int(times.size), q, (float(s.min()), float(s.max())))


# -- ergodicity-criterion functionals ----------------------------------------


def _verdict(values: np.ndarray, hold_tol: float, fail_floor: float) -> str:
    run = np.minimum.accumulate(values)
    if run[-1] <= hold_tol and run[-1] < run[0]:
        return HOLDS
    if np.all(values >= fail_floor):
        return FAILS
    return UNDETERMINED


def cantor_norms(p: PSequence, k_max: int, terms: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Correlations ``corr(k)`` and ``|c_k|^2`` for ``0 <= k <= k_max``.

    ``|c_k|^2 = sum_{|d|<k} (k - |d|) corr(d)`` (Fejer kernel).
    """
    terms = terms or max(45, int(math.log(max(k_max, 1), 3)) + 40)
    corr = np.array([correlation(p, k, terms)[0] for k in range(k_max + 1)])
    k = np.arange(k_max + 1, dtype=float)
    # |c_k|^2 = k corr(0) + 2 sum_{d=1}^{k-1} (k - d) corr(d)
    S0 = np.concatenate([[0.0], np.cumsum(corr[1:])])            # sum_{d=1}^{k} corr(d)
    S1 = np.concatenate([[0.0], np.cumsum(np.arange(1, k_max + 1) * corr[1:])])
    S0m = np.concatenate([[0.0], S0[:-1]])                        # up to k-1
    S1m = np.concatenate([[0.0], S1[:-1]])
    norms = k * corr[0] + 2.0 * (k * S0m - S1m)
    return corr, np.maximum(norms, 0.0)


def criterion_Z(corr: np.ndarray, norms: np.ndarray, eps: float, kappa: float, radii: Sequence[int],
                hold_tol: float = 1e-2, fail_floor: float = 1.0) -> CertificateReport:
    """``|{|k| <= a : |corr(k)| >= eps}| / (2a+1) * max_{|k|<=a} exp(kappa |c_k|^2)``.

    ``corr`` and ``norms`` are indexed by ``k >= 0`` (both are even in ``k``).
    Verdicts are heuristics at the cutoff: "holds" when the running minimum
    has dropped below ``hold_tol``, "fails" when no value falls below
    ``fail_floor``.
    """
    corr, norms = np.asarray(corr, dtype=float), np.asarray(norms, dtype=float)
    big = np.abs(corr) >= eps
    cnt = np.cumsum(big) * 2 - big[0]  # k and -k, zero once
    cmax = np.maximum.accumulate(norms)
    rows, logs = [], []
    best = math.inf
    for a in radii:
        a = int(a)
        if a >= corr.size:
            raise ValueError(f"radius {a} beyond the supplied data")
        frac = cnt[a] / (2 * a + 1)
        logv = (math.log(frac) if frac > 0 else -math.inf) + kappa * cmax[a]
        val = math.exp(logv) if logv < 700 else math.inf
        best = min(best, val)
        rows.append((a, frac, cmax[a], val, best))
        logs.append(val)
    rep = CertificateReport("criterion-Z", ("a", "fraction", "max_norm_sq", "value", "running_min"), rows,
                            _verdict(np.array(logs), hold_tol, fail_floor), int(max(radii)),
                            "heuristic at cutoff")
    return rep


def criterion_Z_interval(corr: np.ndarray, norms: np.ndarray, eps: float, kappa: float, ns: Sequence[int],
                         hold_tol: float = 1e-2, fail_floor: float = 1.0) -> CertificateReport:
    """Pair-fraction functional for ``F_n = [0, n]`` via difference counting."""
    corr, norms = np.asarray(corr, dtype=float), np.asarray(norms, dtype=float)
    big = (np.abs(corr) >= eps).astype(float)
    cmax = np.maximum.accumulate(norms)
    rows, vals = [], []
    best = math.inf
    for n in ns:
        d = np.arange(n + 1)
        mult = np.where(d == 0, n + 1, 2 * (n + 1 - d))
        frac = float(np.sum(mult * big[: n + 1])) / (n + 1) ** 2
        val = frac * math.exp(min(kappa * cmax[n], 700.0))
        best = min(best, val)
        rows.append((n, frac, cmax[n], val, best))
        vals.append(val)
    return CertificateReport("criterion-general", ("n", "fraction", "s_n", "value", "running_min"), rows,
                             _verdict(np.array(vals), hold_tol, fail_floor), int(max(ns)), "heuristic at cutoff")


def criterion_general(sets: Sequence[Sequence], coeff: Callable, pair_norm_sq: Callable, eps: float,
                      kappa: float, hold_tol: float = 1e-2, fail_floor: float = 1.0) -> CertificateReport:
    """Pair-fraction times ``exp(kappa s_n)`` over enumerated finite sets ``F_n``.

    ``coeff(g, h)`` returns ``<pi(g) xi_1, pi(h) xi_2>`` and
    ``pair_norm_sq(g, h)`` returns ``|c_{g^-1 h}|^2``; ``s_n`` is the maximum
    of the latter over ``F_n x F_n``.
    """
    rows, vals = [], []
    best = math.inf
    for i, Fn in enumerate(sets):
        Fn = list(Fn)
        if not Fn:
            raise ValueError(f"F_{i} is empty")
        hits = 0
        s_n = 0.0
        for g in Fn:
            for h in Fn:
                if abs(coeff(g, h)) >= eps:
                    hits += 1
                s_n = max(s_n, float(pair_norm_sq(g, h)))
        frac = hits / len(Fn) ** 2
        val = frac * math.exp(min(kappa * s_n, 700.0))
        best = min(best, val)
        rows.append((i, frac, s_n, val, best))
        vals.append(val)
    return CertificateReport("criterion-general", ("n", "fraction", "s_n", "value", "running_min"), rows,
                             _verdict(np.array(vals), hold_tol, fail_floor), len(sets), "heuristic at cutoff")


# -- fraction bounds ----------------------------------------------------------


@dataclass
class FractionBound:
    lhs: Estimate
    rhs: float
    maharam_lhs: Estimate
    maharam_rhs: float
    rho: float
    details: dict = field(default_factory=dict)

    def holds(self, sigmas: float = 3.0) -> bool:
        ok = self.lhs.value <= self.rhs + sigmas * self.lhs.stderr
        return ok and self.maharam_lhs.value <= self.maharam_rhs + sigmas * self.maharam_lhs.stderr


def _lse(M: np.ndarray) -> np.ndarray:
    m = np.max(M, axis=1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return (m + np.log(np.sum(np.exp(M - m), axis=1, keepdims=True)))[:, 0]


def fraction_bound_check(action: AffineZAction, A: Sequence[int], B: Sequence[int], n: int, seed: int,
                         rho: float = 0.5) -> FractionBound:
    """``int sum_B omega / sum_A omega d mu`` against its square-root bound.

    The Maharam variant uses ``mu x (rho/2) e^{-rho |t|} dt`` with
    ``omega_rho(a, x, t) = omega(a, x) exp(-rho (|t + log omega| - |t|))``
    and the bound ``omega_rho^-1 <= omega^{-1+rho} + omega^{-1-rho}``.
    """
    A = np.asarray(sorted(set(int(a) for a in A)))
    Bset = set(int(b) for b in B)
    if not Bset <= set(A.tolist()):
        raise ValueError("B must be a subset of A")
    if A.size == 0:
        raise ValueError("A must be non-empty")
    inB = np.isin(A, list(Bset))
    t2 = action.scale**2
    C = t2 * action.cocycle_norm_sq(A)
    rhs = math.sqrt(inB.sum() / A.size**2 * float(np.sum(np.exp(C))))
    m1 = np.exp(0.5 * (1 - rho) * (2 - rho) * C)
    m2 = np.exp(0.5 * (1 + rho) * (2 + rho) * C)
    rhs_m = math.sqrt(inB.sum() / A.size**2 * float(np.sum(m1 + m2)))

    def frac(L):
        if not inB.any():
            return np.zeros(L.shape[0])
        return np.exp(_lse(L[:, inB]) - _lse(L))

    def plain(rng, size):
        X = rng.standard_normal((size, action.dim))
        return frac(rn_log_matrix(action, A, X))

    def maharam(rng, size):
        X = rng.standard_normal((size, action.dim))
        t = rng.laplace(0.0, 1.0 / rho, size)
        L = rn_log_matrix(action, A, X)
        return frac(L - rho * (np.abs(t[:, None] + L) - np.abs(t[:, None])))

    lhs = mc_mean(plain, n, seed)
    lhs_m = mc_mean(maharam, n, seed)
    return FractionBound(lhs, rhs, lhs_m, rhs_m, rho, {"sizes": (int(A.size), int(inB.sum()))})
