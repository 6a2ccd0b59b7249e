"""Ternary Cantor spectral measures and their cocycle certificates.

The measure is the infinite convolution of
``p_n delta_0 + (1 - p_n)/2 (delta_{3^-n} + delta_{-3^-n})``, i.e. the law of
``theta(x) = sum_n 3^-n x_n`` for independent digits ``x_n`` in ``{-1, 0, 1}``
with ``P(x_n = 0) = p_n``.  Quantities that decide infinite limits carry a
three-valued verdict and name the tail model used to reach it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import Estimate, mc_mean

HOLDS, FAILS, UNDETERMINED = "holds", "fails", "undetermined-at-cutoff"
LOG3 = math.log(3.0)
MAX_LEVEL = 13
MC_DEPTH = 40


# -- parameter sequences ------------------------------------------------------


@dataclass(frozen=True)
class PSequence:
    """Rule for ``p_1, p_2, ...``.

    ``rule`` is ``"example83"``, ``"const"`` (``p``), ``"list"`` (``values``
    then ``tail``) or ``"callable"`` (``fn``, no tail model).  ``offset``
    shifts the index: the sequence ``(p_{1+offset}, p_{2+offset}, ...)``.
    """

    rule: str
    p: float = 0.0
    values: tuple = ()
    tail: float = 1.0
    fn: Callable[[int], float] | None = field(default=None, compare=False)
    offset: int = 0

    def __post_init__(self):
        if self.rule not in ("example83", "const", "list", "callable"):
            raise ValueError(f"unknown p-sequence rule {self.rule!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for v in (self.p, self.tail, *self.values):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"p_n must lie in [0, 1], got {v}")
        if self.rule == "callable" and self.fn is None:
            raise ValueError("callable rule needs fn")

    @classmethod
    def const(cls, p: float) -> "PSequence":
        return cls("const", p=p)

    @classmethod
    def example83(cls) -> "PSequence":
        return cls("example83")

    @classmethod
    def from_list(cls, values, tail: float = 1.0) -> "PSequence":
        return cls("list", values=tuple(values), tail=tail)

    @classmethod
    def from_callable(cls, fn: Callable[[int], float]) -> "PSequence":
        return cls("callable", fn=fn)

    @classmethod
    def from_config(cls, cfg: dict) -> "PSequence":
        rule = cfg.get("rule")
        if rule == "example83":
            return cls.example83()
        if rule == "const":
            if "p" not in cfg:
                raise ValueError("const rule needs 'p'")
            return cls.const(float(cfg["p"]))
        if rule == "list":
            if "values" not in cfg:
                raise ValueError("list rule needs 'values'")
            return cls.from_list(cfg["values"], float(cfg.get("tail", 1.0)))
        raise ValueError(f"unknown p-sequence rule {rule!r}")

    def shifted(self, k: int = 1) -> "PSequence":
        return PSequence(self.rule, self.p, self.values, self.tail, self.fn, self.offset + k)

    def log_p(self, n: int) -> float:
        """``log p_n`` (``-inf`` when ``p_n = 0``)."""
        if n < 1:
            raise ValueError("indices start at 1")
        m = n + self.offset
        if self.rule == "example83":
            k = math.isqrt(m)
            if k * k != m:
                return 0.0
            return -(2 + 4 * k) * LOG3 + math.log(k / (k + 1))
        v = self.value(n)
        return math.log(v) if v > 0 else -math.inf

    def value(self, n: int) -> float:
        m = n + self.offset
        if self.rule == "example83":
            return math.exp(self.log_p(n))
        if self.rule == "const":
            return self.p
        if self.rule == "list":
            return self.values[m - 1] if m <= len(self.values) else self.tail
        v = float(self.fn(m))
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"p_{m} = {v} outside [0, 1]")
        return v

    def one_minus(self, n: int) -> float:
        """``1 - p_n`` without cancellation for tiny ``p_n``."""
        lp = self.log_p(n)
        return 1.0 if lp == -math.inf else -math.expm1(lp)

    def array(self, n: int) -> np.ndarray:
        return np.array([self.value(k) for k in range(1, n + 1)])

    # tail description: beyond index ``start`` every p equals ``q``
    def _tail(self):
        if self.rule == "const" and self.offset == 0:
            return 0, self.p
        if self.rule == "list":
            return max(len(self.values) - self.offset, 0), self.tail
        return None


# -- certificates -------------------------------------------------------------


@dataclass
class CertificateReport:
    name: str
    columns: tuple
    rows: list
    verdict: str
    cutoff: int
    model: str = ""
    notes: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "cutoff": self.cutoff,
            "model": self.model,
            "notes": list(self.notes),
            "rows": len(self.rows),
        }


def _kahan_cumsum(xs) -> np.ndarray:
    out = np.empty(len(xs))
    s = c = 0.0
    for i, x in enumerate(xs):
        if math.isinf(x) or math.isinf(s):
            s = s + x
        else:
            y = x - c
            t = s + y
            c = (t - s) - y
            s = t
        out[i] = s
    return out


def log_r_terms(p: PSequence, m_max: int) -> np.ndarray:
    """``log r_m`` for ``m = 1..m_max`` (``-inf`` where ``r_m = 0``)."""
    out = np.empty(m_max)
    logprod = 0.0
    for m in range(1, m_max + 1):
        q = p.one_minus(m)
        out[m - 1] = (2 * m * LOG3 + logprod + math.log(q)) if (q > 0 and logprod > -math.inf) else -math.inf
        logprod += p.log_p(m)
    return out


def r_term(p: PSequence, m: int) -> float:
    """``r_m = 3^{2m} p_1 ... p_{m-1} (1 - p_m)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return float(r_terms(p, m)[-1])


def r_terms(p: PSequence, m_max: int) -> np.ndarray:
    """``r_1..r_{m_max}``; plain products while they stay in range, else via logs."""
    lr = log_r_terms(p, m_max)
    with np.errstate(over="ignore"):
        out = np.exp(lr)
    prod = 1.0
    for m in range(1, min(m_max, 300) + 1):
        if prod < 1e-280:
            break
        if lr[m - 1] > -math.inf:
            out[m - 1] = 9.0**m * prod * p.one_minus(m)
        prod *= p.value(m)
    return out


def _prefix_zero(p: PSequence, upto: int) -> bool:
    return any(p.log_p(k) == -math.inf for k in range(1, upto + 1))


def _series_tail(p: PSequence):
    """(converges?, model) for ``sum r_m`` when a tail model applies, else None."""
    if p.rule == "example83" and p.offset == 0:
        return False, "harmonic (r_{n^2} ~ 9/n)"
    tail = p._tail()
    if tail is None:
        return None
    start, q = tail
    if _prefix_zero(p, start) or q == 0.0:
        return True, "eventually zero (a vanishing p_k kills later products)"
    if q == 1.0:
        return True, "eventually zero (p_n = 1 on the tail)"
    return 9.0 * q < 1.0, f"geometric (ratio 9 p = {9 * q:g})"


def coboundary_report(p: PSequence, cutoff: int) -> CertificateReport:
    """Partial sums of ``r_m``; the cocycle is a coboundary iff they converge."""
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    r = r_terms(p, cutoff)
    s = _kahan_cumsum(r)
    rows = [(m, r[m - 1], s[m - 1]) for m in range(1, cutoff + 1)]
    tail = _series_tail(p)
    if tail is None:
        verdict, model = UNDETERMINED, "none"
    else:
        verdict, model = (HOLDS if tail[0] else FAILS), tail[1]
    return CertificateReport("coboundary", ("m", "r_m", "partial_sum"), rows, verdict, cutoff, model)


def _count_small(p: PSequence, delta: float, n: int) -> np.ndarray:
    return np.cumsum([p.value(k) <= 1.0 - delta for k in range(1, n + 1)])


def condition_ratio(p: PSequence, delta: float, cutoff: int) -> CertificateReport:
    """``(n, N_n, (1/N_n) sum_{m<=n} r_m)`` with its running minimum.

    Verdict "holds" means the liminf of the ratio is 0.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    r = r_terms(p, cutoff)
    s = _kahan_cumsum(r)
    N = _count_small(p, delta, cutoff)
    rows = []
    best = math.inf
    for n in range(1, cutoff + 1):
        if N[n - 1] == 0:
            continue
        ratio = s[n - 1] / N[n - 1]
        best = min(best, ratio)
        rows.append((n, int(N[n - 1]), ratio, best))
    cols = ("n", "N_n", "ratio", "running_min")
    if not rows:
        return CertificateReport("condition-ratio", cols, rows, UNDETERMINED, cutoff, "none",
                                 ["N_n = 0 for every n up to the cutoff"])
    rep = CertificateReport("condition-ratio", cols, rows, UNDETERMINED, cutoff, "none")
    if p.rule == "example83" and p.offset == 0:
        if 3.0**-6 <= 1.0 - delta:
            rep.verdict, rep.model = HOLDS, "harmonic: ratio at n = K^2 equals 9 H_K / K -> 0"
        return rep
    tail = p._tail()
    if tail is None:
        return rep
    start, q = tail
    conv, _ = _series_tail(p)
    if q <= 1.0 - delta:
        # N_n grows linearly; the ratio dies iff the series converges
        rep.verdict = HOLDS if conv else FAILS
        rep.model = "linear N_n, " + ("convergent" if conv else "divergent") + " series"
    else:
        # N_n freezes at N_start; liminf = S_inf / N_start
        if conv:
            total = s[-1] if cutoff >= start + 60 else math.inf
            if total == 0.0:
                rep.verdict = HOLDS
            elif math.isfinite(total):
                rep.verdict = FAILS
        else:
            rep.verdict = FAILS
        rep.model = "N_n eventually constant"
    return rep


def near_one_window(p: PSequence, delta: float, k: int, cutoff: int) -> int | None:
    """Smallest ``n`` with ``p_n, ..., p_{n+k}`` all in ``[1 - delta, 1]``."""
    run = 0
    for n in range(1, cutoff + 1):
        run = run + 1 if p.value(n) >= 1.0 - delta else 0
        if run == k + 1:
            return n - k
    return None


# -- correlations -------------------------------------------------------------


def _frac_over_3m(a: int, m: int) -> float:
    """``(a mod 3^m) / 3^m`` exactly reduced before rounding."""
    den = 3**m
    return (a % den) / den


def correlation(p: PSequence, a: int, terms: int) -> tuple[float, float]:
    """``prod_{m<=terms} (1 - 2 (1 - p_m) sin^2(pi a 3^-m))`` and a bound on the tail.

    The neglected factors each differ from 1 by at most
    ``2 (pi a 3^-m)^2``, so the full product is within
    ``sum_{m>terms} 2 (pi a 3^-m)^2 = pi^2 a^2 9^{-terms} / 4`` of the value.
    """
    a = int(a)
    if a == 0:
        return 1.0, 0.0
    need = math.log(abs(a), 3) + 5
    if terms < need:
        raise ValueError(f"terms = {terms} too small for a = {a} (need >= {need:.2f})")
    logs, sign = [], 1
    for m in range(1, terms + 1):
        q = p.one_minus(m)
        if q == 0.0:
            continue
        f = 1.0 - 2.0 * q * math.sin(math.pi * _frac_over_3m(a, m)) ** 2
        if f == 0.0:
            return 0.0, 0.0
        sign *= 1 if f > 0 else -1
        logs.append(math.log(abs(f)))
    value = sign * math.exp(math.fsum(logs))
    tail = math.pi**2 * a * a * 9.0**-terms / 4.0
    return value, tail


def sample_theta(p: PSequence, rng: np.random.Generator, size: int, depth: int = MC_DEPTH):
    """Digits ``x_1..x_depth`` (shape ``(size, depth)``, int8) from the product law."""
    probs = p.array(depth)
    u = rng.random((size, depth))
    z = u < probs
    side = (u - probs) < 0.5 * (1.0 - probs)
    digits = np.where(z, 0, np.where(side, -1, 1)).astype(np.int8)
    return digits


def _a_theta_frac(a: int, digits: np.ndarray) -> np.ndarray:
    """``a * theta`` reduced mod 1 keeping relative precision near 0.

    The digits up to ``K = ceil(log3 |a|) + 1`` are combined exactly as an
    integer; the rest contribute less than 1/2 and are added in floating point.
    """
    depth = digits.shape[1]
    a = int(a)
    K = min(depth, max(1, math.ceil(math.log(abs(a), 3)) + 1 if a else 1))
    pw = 3 ** np.arange(K - 1, -1, -1, dtype=np.int64)
    N_hi = digits[:, :K].astype(np.int64) @ pw
    den = 3**K
    hi = ((a * N_hi) % den).astype(float) / den
    lo_w = 3.0 ** -np.arange(K + 1, depth + 1)
    lo = a * (digits[:, K:].astype(float) @ lo_w) if depth > K else 0.0
    return hi + lo


def correlation_mc(p: PSequence, a: int, n: int, seed: int, depth: int = MC_DEPTH) -> Estimate:
    """MC estimate of ``int e^{2 pi i a t} d nu`` (real by symmetry)."""

    def f(rng, size):
        u = _a_theta_frac(a, sample_theta(p, rng, size, depth)) if a else np.zeros(size)
        return np.cos(2 * np.pi * u)

    return mc_mean(f, n, seed)


# -- spectral truncation ------------------------------------------------------


@dataclass(frozen=True)
class SpectralAtomSet:
    """Atoms of a symmetric measure on ``[-1/2, 1/2]``, folded onto ``t >= 0``.

    ``w[j]`` is the mass at ``+t[j]`` (and also at ``-t[j]`` when
    ``t[j] > 0``).  ``num``/``level``, when set, give ``t = num / 3^level``
    exactly.
    """

    t: np.ndarray
    w: np.ndarray
    num: np.ndarray | None = None
    level: int | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if t.shape != w.shape:
            raise ValueError("t and w differ in length")
        if np.any((t < 0) | (t > 0.5)):
            raise ValueError("atoms must lie in [0, 1/2]")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        if np.unique(t).size != t.size:
            raise ValueError("atoms must be distinct")
        total = self.total_mass(t, w)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"total mass {total!r} differs from 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "w", w)

    @staticmethod
    def total_mass(t, w) -> float:
        zero = t == 0
        return math.fsum(w[zero]) + 2.0 * math.fsum(w[~zero])

    def __len__(self):
        return self.t.size

    def correlation(self, a: int) -> float:
        two = np.where(self.t == 0, 1.0, 2.0)
        if self.num is not None:
            u = (int(a) * self.num) % (3**self.level) / 3.0**self.level
        else:
            u = np.mod(a * self.t, 1.0)
        return float(np.sum(two * self.w * np.cos(2 * np.pi * u)))

    def cocycle_norm_sq(self, a: int) -> float:
        """``int |c_a(t)|^2 d nu`` with ``|c_a(0)|^2 = a^2``."""
        return float(np.sum(np.where(self.t == 0, 1.0, 2.0) * self.w * _ca_sq(a, self)))


def _ca_sq(a: int, atoms: SpectralAtomSet) -> np.ndarray:
    a = int(a)
    t = atoms.t
    if atoms.num is not None:
        den = 3**atoms.level
        u = ((a * atoms.num.astype(object)) % den).astype(float) / den
    else:
        u = np.mod(a * t, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sin(np.pi * u) ** 2 / np.sin(np.pi * t) ** 2
    return np.where(t == 0, float(a * a), val)


def truncate_to_spectral(p: PSequence, level: int) -> SpectralAtomSet:
    """Atoms of the first ``level`` convolution factors."""
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in [0, {MAX_LEVEL}]")
    N = np.zeros(1, dtype=np.int64)
    W = np.ones(1)
    for k in range(1, level + 1):
        pk = p.value(k)
        side = 0.5 * p.one_minus(k)
        parts_n, parts_w = [], []
        for d, wd in ((-1, side), (0, pk), (1, side)):
            if wd > 0:
                parts_n.append(3 * N + d)
                parts_w.append(W * wd)
        N = np.concatenate(parts_n)
        W = np.concatenate(parts_w)
        live = W > 0     # products below the double range carry no mass
        N, W = N[live], W[live]
    keep = N >= 0
    N, W = N[keep], W[keep]
    order = np.argsort(N, kind="stable")
    N, W = N[order], W[order]
    if np.unique(N).size != N.size:
        raise RuntimeError("internal error: ternary digit sums collided")
    return SpectralAtomSet(N / 3.0**level, W, N, level)


# -- cocycle norms ------------------------------------------------------------


@dataclass(frozen=True)
class CocycleNorm:
    a: int
    level: int
    truncated: float
    mc: Estimate
    bracket: tuple[float, float] | None
    delta_bound: float | None
    notes: tuple = ()

    def mc_agrees(self, sigmas: float = 3.0) -> bool:
        return abs(self.mc.value - self.truncated) <= sigmas * self.mc.stderr + self.lipschitz_gap

    @property
    def lipschitz_gap(self) -> float:
        return lipschitz_truncation_error(self.a, self.level)

    def in_bracket(self, value: float, slack: float = 0.0) -> bool:
        if self.bracket is None:
            return False
        lo, hi = self.bracket
        return lo - slack <= value <= hi + slack


def lipschitz_truncation_error(a: int, level: int) -> float:
    """Bound on ``|E g(theta) - E g(theta_level)|`` for ``g = |c_a|^2``.

    ``|g'| <= 2 pi (|a|^3 - |a|) / 3`` and the neglected digits move ``theta``
    by at most ``3^-level / 2``.
    """
    a = abs(int(a))
    return 2.0 * math.pi * (a**3 - a) / 3.0 * 0.5 * 3.0**-level


def cylinder_upper(p: PSequence, a: int) -> float:
    """``min_n a^2 p_1...p_{n-1} + 4 sum_{m<n} r_m``.

    On the cylinder where the first nonzero digit is ``x_m`` one has
    ``|c_a|^2 <= min(a^2, 4 * 9^m)``; the bound in ``n`` decreases until the
    first ``n`` with ``4 * 9^n >= a^2`` and increases afterwards.
    """
    a2 = float(a) ** 2
    n0 = 1
    while 4.0 * 9.0**n0 < a2:
        n0 += 1
    logprod = math.fsum(p.log_p(k) for k in range(1, n0))
    return a2 * math.exp(logprod) + 4.0 * math.fsum(r_terms(p, n0 - 1))


def delta_estimate(p: PSequence, a: int, delta: float, n_max: int = 200) -> float | None:
    """``4 delta^-1 sum_{m<=n} r_m`` at the first admissible ``n``.

    Admissible: ``p_n <= 1 - delta`` and ``|a| <= 2 * 3^n``.  ``None`` if no
    such ``n`` exists below ``n_max``.
    """
    for n in range(1, n_max + 1):
        if p.value(n) <= 1.0 - delta and abs(a) <= 2 * 3**n:
            return 4.0 / delta * float(np.sum(r_terms(p, n)))
    return None


def cocycle_norm_mc(p: PSequence, a: int, n: int, seed: int, depth: int = MC_DEPTH) -> Estimate:
    """MC estimate of ``int |c_a|^2 d nu`` over the full measure."""
    a = int(a)
    if abs(a) <= 1:
        return Estimate(float(a * a), 0.0, n)

    def f(rng, size):
        digits = sample_theta(p, rng, size, depth)
        u = _a_theta_frac(a, digits)
        theta = digits.astype(float) @ (3.0 ** -np.arange(1, depth + 1))
        th = np.abs(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sin(np.pi * u) ** 2 / np.sin(np.pi * th) ** 2
        return np.where(th == 0, float(a * a), val)

    return mc_mean(f, n, seed)


def cocycle_norm(p: PSequence, a: int, level: int, mc_n: int, seed: int,
                 delta: float = 0.5) -> CocycleNorm:
    """Truncated, MC and rigorously bracketed values of ``|c_a|^2``."""
    a = int(a)
    atoms = truncate_to_spectral(p, level)
    trunc = 0.0 if a == 0 else (1.0 if abs(a) == 1 else atoms.cocycle_norm_sq(a))
    mc = Estimate(0.0, 0.0, mc_n) if a == 0 else cocycle_norm_mc(p, a, mc_n, seed)
    notes = []
    if a == 0:
        bracket = (0.0, 0.0)
    elif abs(a) > 2 * 3**level:
        bracket = None
        notes.append(f"|a| > 2*3^level = {2 * 3**level}: bracket omitted")
    else:
        gap = lipschitz_truncation_error(a, level)
        hi = min(cylinder_upper(p, a), trunc + gap)
        lo = max(0.0, trunc - gap)
        bracket = (lo, hi)
    return CocycleNorm(a, level, trunc, mc, bracket, delta_estimate(p, a, delta), tuple(notes))
