"""Growth exponents, dissipation thresholds and free-group entropy.

The tree action of the free group ``F_n`` enters only through
``|c_g|^2 = |g|`` (word length).  Counts are exact Python integers; the
radial random-walk DP runs in extended precision.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Sequence

import numpy as np

from .cantor import FAILS, HOLDS

TAIL_WINDOWS = 5
MAX_STEPS = 5000


# -- models and profiles ------------------------------------------------------


@dataclass(frozen=True)
class FreeGroupModel:
    """Free group on ``n_gens`` generators, simple random walk."""

    n_gens: int

    def __post_init__(self):
        if self.n_gens < 2:
            raise ValueError("free groups here have at least two generators")

    @property
    def delta(self) -> float:
        return math.log(2 * self.n_gens - 1)

    def sphere_size(self, r: int) -> int:
        n = self.n_gens
        return 1 if r == 0 else 2 * n * (2 * n - 1) ** (r - 1)

    def log_sphere_size(self, r: int) -> float:
        n = self.n_gens
        return 0.0 if r == 0 else math.log(2 * n) + (r - 1) * math.log(2 * n - 1)


@dataclass(frozen=True)
class PointModel:
    """The trivial group: one state, no drift, no entropy."""

    n_gens: int = 0
    delta: float = 0.0


def ball_size(model: FreeGroupModel, r: int) -> int:
    """``1 + sum_{k<=r} 2n (2n-1)^{k-1}``, exact."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    n = model.n_gens
    return 1 + sum(2 * n * (2 * n - 1) ** (k - 1) for k in range(1, r + 1))


@dataclass(frozen=True)
class GrowthProfile:
    """Cumulative count (or Haar mass) of ``{g : |c_g|^2 <= s}`` (or ``|c_g| <= s``)."""

    s: tuple
    counts: tuple
    kind: str = "norm-squared"

    def __post_init__(self):
        if self.kind not in ("norm-squared", "norm"):
            raise ValueError("kind must be 'norm-squared' or 'norm'")
        s = tuple(float(v) for v in self.s)
        c = tuple(self.counts)
        if len(s) != len(c):
            raise ValueError("s and counts differ in length")
        if any(b < a for a, b in zip(s, s[1:])):
            raise ValueError("cutoffs must be increasing")
        if any(b < a for a, b in zip(c, c[1:])):
            raise ValueError("counts must be non-decreasing")
        if c and c[0] < 1:
            raise ValueError("counts include the identity, so start at >= 1")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "counts", c)

    def __len__(self):
        return len(self.s)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["s", "count"])
            for s, c in zip(self.s, self.counts):
                w.writerow([repr(s), c])

    @classmethod
    def from_csv(cls, path, kind: str = "norm-squared") -> "GrowthProfile":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        def num(v):
            try:
                return int(v)
            except ValueError:
                return float(v)
        return cls([float(r["s"]) for r in rows], [num(r["count"]) for r in rows], kind)


def tree_profile(model: FreeGroupModel, r_max: int) -> GrowthProfile:
    return GrowthProfile(range(r_max + 1), [ball_size(model, r) for r in range(r_max + 1)])


def _log(v) -> float:
    return math.log(v) if isinstance(v, int) else math.log(float(v))


# -- exponent estimators ------------------------------------------------------


@dataclass(frozen=True)
class ExponentEstimate:
    estimate: float
    slopes: tuple
    tail: tuple
    sensitivity: float
    crude: float


def poincare_exponent(profile: GrowthProfile, windows: int = TAIL_WINDOWS) -> ExponentEstimate:
    """Growth rate of ``log count`` in ``s`` from successive count increments.

    With increments ``D_k = c_k - c_{k-1}`` over ``s_{k-1} < s <= s_k``, the
    slope of ``log(D_k / (s_k - s_{k-1}))`` against the interval midpoints is
    exact for pure exponentials; the estimate is the max over the last
    ``windows`` slopes (a limsup).
    """
    if len(profile) < 4:
        raise ValueError("need at least 4 profile points")
    s, c = profile.s, profile.counts
    pts = []
    for k in range(1, len(s)):
        d = c[k] - c[k - 1]
        if d > 0:
            pts.append((0.5 * (s[k] + s[k - 1]), _log(d) - math.log(s[k] - s[k - 1])))
    slopes = tuple((b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(pts, pts[1:]))
    if not slopes:
        raise ValueError("profile has too few increasing steps")
    tail = slopes[-windows:]
    crude = _log(c[-1]) / s[-1] if s[-1] > 0 else math.nan
    return ExponentEstimate(max(tail), slopes, tail, max(tail) - min(tail), crude)


@dataclass(frozen=True)
class TdissWindow:
    lo: float
    hi: float
    tree_exact: float | None
    strong_erg_bound: float | None
    stable_III1_bound: float


def tdiss_window(delta: float, tree: bool = False, free_group: bool = False) -> TdissWindow:
    """``(sqrt(2 delta), 2 sqrt(2 delta))`` plus the tree, strong-ergodicity and stable bounds."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    lo = math.sqrt(2 * delta)
    return TdissWindow(lo, 2 * lo, 2 * lo if tree else None,
                       2 * math.sqrt(delta) if free_group else None, math.sqrt(delta))


@dataclass
class KoopmanReport:
    t: float
    radii: np.ndarray
    partial_sums: np.ndarray
    shell_ratio: float | None
    verdict: str


def koopman_l2_report(model, t: float, cutoff: int) -> KoopmanReport:
    """Partial sums of ``sum_g exp(-t^2 |c_g|^2 / 4)`` over balls.

    For a free-group model the shell terms form a geometric sequence with
    ratio ``(2n - 1) exp(-t^2/4)``, which decides convergence.  For a generic
    :class:`GrowthProfile` the comparison is ``t^2/4`` against the Poincare
    estimate.
    """
    if isinstance(model, FreeGroupModel):
        shells = [model.sphere_size(r) for r in range(cutoff + 1)]
        s = np.arange(cutoff + 1, dtype=float)
        terms = np.array([math.exp(_log(m) - t * t * r / 4) for r, m in zip(range(cutoff + 1), shells)])
        ratio = (2 * model.n_gens - 1) * math.exp(-t * t / 4)
        verdict = "converges" if ratio < 1 else "diverges"
        return KoopmanReport(t, s, np.cumsum(terms), ratio, verdict)
    prof: GrowthProfile = model
    s = np.asarray(prof.s)
    inc = [prof.counts[0]] + [b - a for a, b in zip(prof.counts, prof.counts[1:])]
    terms = np.array([math.exp(_log(d) - t * t * sv / 4) if d > 0 else 0.0 for d, sv in zip(inc, s)])
    delta = poincare_exponent(prof).estimate
    verdict = "converges" if t * t / 4 > delta else "diverges"
    return KoopmanReport(t, s, np.cumsum(terms), None, verdict)


def skew_delta(profile: GrowthProfile, margin: float = 0.1, windows: int = TAIL_WINDOWS) -> tuple[float, str]:
    """Exponent of ``log mass{|c(g)| <= s} / log s`` and the recurrence verdict.

    Log-log slopes between successive points, max over the last ``windows``.
    Below ``1 - margin`` the skew product is dissipative, above ``1 + margin``
    conservative, otherwise "boundary".
    """
    if len(profile) < 4:
        raise ValueError("need at least 4 profile points")
    pts = [(_log(c), math.log(s)) for s, c in zip(profile.s, profile.counts) if s > 1.0]
    slopes = [(b[0] - a[0]) / (b[1] - a[1]) for a, b in zip(pts, pts[1:]) if b[1] > a[1]]
    if not slopes:
        raise ValueError("profile has too few points with s > 1")
    est = max(slopes[-windows:])
    if est < 1 - margin:
        verdict = "dissipative"
    elif est > 1 + margin:
        verdict = "conservative"
    else:
        verdict = "boundary"
    return est, verdict


def z_profile(kind: str, s_values: Sequence[float]) -> GrowthProfile:
    """Counts of ``{a in Z : |c_a| <= s}`` for ``|c_a| = |a|`` or ``|c_a|^2 = |a|``."""
    out = []
    for s in s_values:
        if kind == "linear":
            out.append(2 * math.floor(s) + 1)
        elif kind == "sqrt":
            out.append(2 * math.floor(s * s) + 1)
        else:
            raise ValueError("kind must be 'linear' or 'sqrt'")
    return GrowthProfile(s_values, out, "norm")


# -- locally finite towers ----------------------------------------------------


@dataclass
class TowerCocycle:
    sizes: tuple
    alpha: tuple
    norms: tuple          # |c(g)| for g in K_{n+1} \ K_n
    lower_bounds: tuple   # lambda(K_{n+1})^{n+1}
    profile: GrowthProfile
    checks: dict = field(default_factory=dict)


def locally_finite_cocycle(sizes: Sequence[int], levels: int, precision: int = 80) -> TowerCocycle:
    """Dissipative cocycle on an increasing union of finite groups ``K_0 < K_1 < ...``.

    ``c(g) = sum_n alpha_n (1_{g K_n} - 1_{K_n})`` with
    ``alpha_n = lambda(K_{n+1})^{n+1} + sum_{k<n} alpha_k sqrt(2 lambda(K_k))``.
    For ``g`` in ``K_{n+1} \\ K_n`` the vectors ``1_{g K_k} - 1_{K_k}`` (k <= n)
    have Gram entries ``2 lambda(K_min(j,k))``, which gives ``|c(g)|^2``
    exactly.  Arithmetic is decimal with ``precision`` digits.
    """
    sizes = tuple(int(v) for v in sizes)
    if levels < 1 or levels > 12:
        raise ValueError("levels must be in [1, 12]")
    if len(sizes) < levels + 1:
        raise ValueError(f"need {levels + 1} subgroup sizes")
    if any(b < a or b % a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must form a divisibility chain")
    with localcontext() as ctx:
        ctx.prec = precision
        alpha = []
        for n in range(levels):
            a = Decimal(sizes[n + 1]) ** (n + 1)
            a += sum((alpha[k] * (Decimal(2 * sizes[k])).sqrt() for k in range(n)), Decimal(0))
            alpha.append(a)
        norms, lows = [], []
        for n in range(levels):
            sq = Decimal(0)
            for j in range(n + 1):
                for k in range(n + 1):
                    sq += alpha[j] * alpha[k] * 2 * sizes[min(j, k)]
            norms.append(sq.sqrt())
            lows.append(Decimal(sizes[n + 1]) ** (n + 1))
        ok = all(nm >= lo for nm, lo in zip(norms, lows))
    s = [0.0] + [float(v) for v in norms]
    counts = [sizes[0]] + [sizes[n + 1] for n in range(levels)]
    prof = GrowthProfile(s, counts, "norm")
    return TowerCocycle(sizes[: levels + 1], tuple(alpha), tuple(norms), tuple(lows), prof,
                        {"lower_bound_holds": ok})


# -- radial random walk -------------------------------------------------------


@dataclass
class RadialWalk:
    """Rows ``(k, H_k, H_k/k, E|X_k|, E|X_k|/k)`` plus the conditional-entropy part."""

    k: np.ndarray
    entropy: np.ndarray
    drift: np.ndarray
    cond_entropy: np.ndarray
    row_sum_error: float

    @property
    def entropy_rate(self) -> np.ndarray:
        return self.entropy / self.k

    @property
    def drift_rate(self) -> np.ndarray:
        return self.drift / self.k


def _xlogx(q: np.ndarray) -> np.ndarray:
    out = np.zeros_like(q)
    pos = q > 0
    out[pos] = q[pos] * np.log(q[pos])
    return out


def radial_entropy_drift(model, steps: int) -> RadialWalk:
    """Exact DP for ``|X_k|`` of the simple random walk on the free group.

    ``H(mu^{*k}) = H(|X_k|) + E log N(|X_k|)`` because ``X_k`` is uniform on
    each sphere.  Values in ``np.longdouble``.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if steps > MAX_STEPS:
        raise ValueError(f"steps must be at most {MAX_STEPS}")
    ks = np.arange(1, steps + 1)
    if isinstance(model, PointModel):
        z = np.zeros(steps)
        return RadialWalk(ks, z, z, z, 0.0)
    n = model.n_gens
    L = np.longdouble
    up = L(2 * n - 1) / L(2 * n)
    down = L(1) / L(2 * n)
    logN = np.array([model.log_sphere_size(r) for r in range(steps + 1)], dtype=L)
    logN[1:] = np.log(L(2 * n)) + np.arange(steps, dtype=L) * np.log(L(2 * n - 1))
    r = np.arange(steps + 1, dtype=L)
    q = np.zeros(steps + 1, dtype=L)
    q[0] = 1
    H = np.empty(steps, dtype=L)
    E = np.empty(steps, dtype=L)
    C = np.empty(steps, dtype=L)
    worst = 0.0
    for k in range(1, steps + 1):
        new = np.zeros_like(q)
        new[1] += q[0]
        new[2:] += up * q[1:-1]
        new[:-1] += down * q[1:]
        q = new
        worst = max(worst, float(abs(q.sum() - 1)))
        cond = np.sum(q * logN)
        H[k - 1] = -np.sum(_xlogx(q)) + cond
        E[k - 1] = np.sum(q * r)
        C[k - 1] = cond
    return RadialWalk(ks, H, E, C, worst)


@dataclass(frozen=True)
class GuivarchCheck:
    h_est: float
    delta_drift: float
    slack: float
    raw_entropy_rate: float
    raw_drift_rate: float
    delta: float

    def holds(self, tol: float = 1e-9) -> bool:
        return self.slack >= -tol


def guivarch_check(model, steps: int, drift_override: float | None = None) -> GuivarchCheck:
    """``h <= delta * |alpha|^2`` from the walk DP at ``steps``.

    ``h`` and the drift are estimated by two-step increments at ``k = steps``
    (same parity, so the period-2 oscillation cancels).  ``H(|X_k|)`` grows
    only logarithmically, so the entropy increment is taken on the
    conditional part ``E log N(|X_k|)``.  The drift is the basepoint-0 value
    ``sum mu^{*k}(g) |alpha_g(0)|^2``, an upper bound for the infimum over
    basepoints.
    """
    walk = radial_entropy_drift(model, steps)
    delta = float(model.delta)
    if isinstance(model, PointModel) or steps < 3:
        h = float(walk.entropy[-1] / walk.k[-1])
        d = float(walk.drift[-1] / walk.k[-1])
    else:
        h = float((walk.cond_entropy[-1] - walk.cond_entropy[-3]) / 2)
        d = float((walk.drift[-1] - walk.drift[-3]) / 2)
    if drift_override is not None:
        d = drift_override
    return GuivarchCheck(h, delta * d, delta * d - h, float(walk.entropy_rate[-1]),
                         float(walk.drift_rate[-1]), delta)


# -- edge-indicator embedding of the Cayley tree ------------------------------


def reduce_word(word) -> tuple:
    out = []
    for g in word:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


def ball_words(n: int, r: int) -> list[tuple]:
    gens = [g for i in range(1, n + 1) for g in (i, -i)]
    layer, out = [()], [()]
    for _ in range(r):
        nxt = [w + (g,) for w in layer for g in gens if not w or w[-1] != -g]
        out.extend(nxt)
        layer = nxt
    return out


def edge_cocycle(word) -> dict:
    """Signed oriented-edge indicators of the geodesic from ``e`` to ``word``.

    The edge ``(h, s)`` joins ``h`` to ``h s`` for a positive generator ``s``;
    stepping by ``s^-1`` runs edge ``(h s^-1, s)`` backwards.
    """
    c: dict = {}
    h: tuple = ()
    for g in reduce_word(word):
        if g > 0:
            key, sgn = (h, g), 1
        else:
            key, sgn = (reduce_word(h + (g,)), -g), -1
        c[key] = c.get(key, 0) + sgn
        h = reduce_word(h + (g,))
    return {k: v for k, v in c.items() if v}


def translate_edges(g, c: dict) -> dict:
    return {(reduce_word(tuple(g) + k[0]), k[1]): v for k, v in c.items()}


def edge_indicator_validation(n: int = 2, radius: int = 4) -> dict:
    """Exact checks of ``|c_g|^2 = |g|`` and ``c_{gh} = c_g + pi(g) c_h`` on a ball."""
    words = ball_words(n, radius)
    norm_ok = all(sum(v * v for v in edge_cocycle(w).values()) == len(w) for w in words)
    coc_ok = True
    for g in words:
        cg = edge_cocycle(g)
        for h in words:
            if len(g) + len(h) > radius:
                continue
            lhs = edge_cocycle(g + h)
            rhs = dict(cg)
            for k, v in translate_edges(g, edge_cocycle(h)).items():
                rhs[k] = rhs.get(k, 0) + v
            rhs = {k: v for k, v in rhs.items() if v}
            if lhs != rhs:
                coc_ok = False
    return {"elements": len(words), "norm_identity": norm_ok, "cocycle_identity": coc_ok,
            "expected_elements": ball_size(FreeGroupModel(n), radius)}


__all__ = [
    "FreeGroupModel", "PointModel", "ball_size", "GrowthProfile", "tree_profile", "poincare_exponent",
    "tdiss_window", "koopman_l2_report", "skew_delta", "z_profile", "locally_finite_cocycle",
    "radial_entropy_drift", "guivarch_check", "edge_indicator_validation", "HOLDS", "FAILS",
]
