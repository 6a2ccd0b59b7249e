"""Finite-dimensional Gaussian space: sampling, densities, coherent vectors.

Coherent vectors are stored as ``k * E(v)`` with the normalized exponential
``E(v)(w) = exp(<w, v> - B(v, v)/2)``, where ``B`` is the complex bilinear
extension of the inner product.  In this form ``exp_z(xi) = E(z xi)`` has
``k = 1`` and the second-quantized operators act without rescaling the
direction, so ``U(i)^4 = id`` holds bit for bit.  ``CoherentVector.scale``
gives the coefficient in the unnormalized form ``scale * exp(<w, v>)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .action import AffineZAction
from .rng import Estimate, chunk_sizes, gaussian_mc_mean, mc_mean, substream

__all__ = [
    "sample_gaussian",
    "log_rn_translation",
    "characteristic_check",
    "rn_moment_check",
    "CoherentVector",
    "exp_vector",
    "coherent_inner",
    "U",
    "M",
    "Rho",
    "Psi",
    "coherent_apply",
    "evaluate",
    "pointwise",
    "coherent_mc_inner",
    "psd_sqrt",
    "contraction_channel_mc",
    "MaharamPoint",
    "maharam_translate",
    "maharam_invariance_mc",
    "GriddedFunction",
    "gauss_convolve",
    "rotation_conjugacy_errors",
    "rotation_conjugacy_check",
]


def _vec(x, name="vector") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _same_dim(*vs):
    dims = {np.shape(v)[-1] for v in vs}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")


def sample_gaussian(dim: int, seed: int, n: int) -> np.ndarray:
    """``n`` i.i.d. standard Gaussian vectors in ``R^dim`` (shape ``(n, dim)``).

    Draws come from the same chunked substreams the MC estimators use, so
    ``sample_gaussian(d, s, n)`` is exactly the sample behind
    ``gaussian_mc_mean(..., d, n, s)``.
    """
    if dim < 1 or n < 1:
        raise ValueError("empty input: dim and n must be positive")
    parts = [substream(seed, i).standard_normal((size, dim)) for i, size in enumerate(chunk_sizes(n))]
    return np.concatenate(parts, axis=0)


def log_rn_translation(eta, x) -> np.ndarray | float:
    """``log d(mu_eta)/d mu`` at ``x``: ``-|eta|^2/2 + <x, eta>``."""
    eta = _vec(eta, "eta")
    x = np.asarray(x, dtype=float)
    _same_dim(eta, x)
    return -0.5 * eta @ eta + x @ eta


def characteristic_check(xi, eta, n: int, seed: int) -> tuple[float, Estimate]:
    """Analytic ``exp(-|xi+eta|^2/2)`` and the MC mean of ``cos <x, xi+eta>``."""
    xi, eta = _vec(xi, "xi"), _vec(eta, "eta")
    _same_dim(xi, eta)
    v = xi + eta
    analytic = float(np.exp(-0.5 * v @ v))
    return analytic, gaussian_mc_mean(lambda x: np.cos(x @ v), v.size, n, seed)


def rn_moment_check(c, beta: float, n: int, seed: int,
                    log_density: Callable | None = None) -> tuple[float, Estimate]:
    """``E[omega^-beta]`` for the translation density ``omega = d mu_c / d mu``.

    The analytic value is ``exp(beta (beta + 1) |c|^2 / 2)``.  ``log_density``
    replaces ``log_rn_translation(c, .)`` (used to show that a wrong density
    is caught).
    """
    c = _vec(c, "c")
    if not -2.0 <= beta <= 2.0:
        raise ValueError("beta outside [-2, 2]")
    if c @ c > 4.0:
        raise ValueError("|c| > 2: omega^-beta is too heavy-tailed for a 3-sigma MC check")
    logd = log_density or (lambda x: log_rn_translation(c, x))
    analytic = float(np.exp(0.5 * beta * (beta + 1.0) * (c @ c)))
    return analytic, gaussian_mc_mean(lambda x: np.exp(-beta * logd(x)), c.size, n, seed)


# -- coherent vectors ---------------------------------------------------------


@dataclass(frozen=True)
class CoherentVector:
    """``coef * E(direction)``; see the module docstring."""

    coef: complex
    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(d)) or not np.isfinite(self.coef):
            raise ValueError("non-finite coherent vector")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "coef", complex(self.coef))

    @property
    def dim(self) -> int:
        return self.direction.size

    @property
    def scale(self) -> complex:
        v = self.direction
        return self.coef * np.exp(-0.5 * (v @ v))

    def __eq__(self, other):
        return (
            isinstance(other, CoherentVector)
            and self.coef == other.coef
            and np.array_equal(self.direction, other.direction)
        )

    def __hash__(self):
        return hash((self.coef, self.direction.tobytes()))


def exp_vector(z: complex, xi) -> CoherentVector:
    """``exp_z(xi) = exp(-z^2 |xi|^2 / 2) e^{z xi^}``."""
    return CoherentVector(1.0, complex(z) * _vec(xi, "xi"))


def coherent_inner(a: CoherentVector, b: CoherentVector) -> complex:
    """``<a, b>`` in ``L^2(mu)``, linear in ``a``."""
    _same_dim(a.direction, b.direction)
    return complex(a.coef * np.conj(b.coef) * np.exp(a.direction @ np.conj(b.direction)))


@dataclass(frozen=True)
class U:
    """Second quantization of multiplication by a unit complex ``alpha``."""

    alpha: complex

    def __post_init__(self):
        if abs(abs(self.alpha) - 1.0) > 1e-12:
            raise ValueError("U(alpha) needs |alpha| = 1")


@dataclass(frozen=True)
class M:
    """Multiplication by ``exp(i <w, xi>)``."""

    xi: np.ndarray


@dataclass(frozen=True)
class Rho:
    """Koopman operator of the translation ``w -> w + eta``."""

    eta: np.ndarray


@dataclass(frozen=True)
class Psi:
    """Contraction channel of a real contraction ``T``."""

    T: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ValueError("T must be a square matrix")
        if np.linalg.norm(T, 2) > 1.0 + 1e-12:
            raise ValueError(f"T is not a contraction (norm {np.linalg.norm(T, 2):.6g})")
        object.__setattr__(self, "T", T)


def coherent_apply(op, v: CoherentVector) -> CoherentVector:
    """Closed-form image of a coherent vector."""
    d = v.direction
    if isinstance(op, U):
        return CoherentVector(v.coef, op.alpha * d)
    if isinstance(op, M):
        xi = _vec(op.xi, "xi")
        _same_dim(xi, d)
        return CoherentVector(v.coef * np.exp(1j * (d @ xi) - 0.5 * (xi @ xi)), d + 1j * xi)
    if isinstance(op, Rho):
        eta = _vec(op.eta, "eta")
        _same_dim(eta, d)
        return CoherentVector(v.coef * np.exp(-0.5 * (d @ eta) - 0.125 * (eta @ eta)), d + 0.5 * eta)
    if isinstance(op, Psi):
        _same_dim(op.T, d)
        return CoherentVector(v.coef, op.T.T @ d)
    raise TypeError(f"unknown operator {op!r}")


def evaluate(v: CoherentVector, w: np.ndarray) -> np.ndarray:
    """Pointwise value of ``v`` at the rows of ``w``."""
    d = v.direction
    return v.coef * np.exp(np.asarray(w, dtype=float) @ d - 0.5 * (d @ d))


def pointwise(op, f: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """Apply ``M`` or ``Rho`` to a function by its defining formula."""
    if isinstance(op, M):
        xi = _vec(op.xi, "xi")
        return lambda w: np.exp(1j * (w @ xi)) * f(w)
    if isinstance(op, Rho):
        eta = _vec(op.eta, "eta")
        return lambda w: np.exp(-0.25 * (eta @ eta) + 0.5 * (w @ eta)) * f(w - eta)
    raise TypeError("only M and Rho have a pointwise formula")


def coherent_mc_inner(f: Callable, g: Callable, dim: int, n: int, seed: int) -> Estimate:
    """MC estimate of ``int f conj(g) d mu``."""
    return gaussian_mc_mean(lambda w: f(w) * np.conj(g(w)), dim, n, seed)


# -- contractions -------------------------------------------------------------


def psd_sqrt(A: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Square root of a symmetric PSD matrix; eigenvalues above ``-tol`` clamp to 0."""
    A = np.asarray(A, dtype=float)
    lam, Q = np.linalg.eigh(0.5 * (A + A.T))
    if lam.min() < -tol:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {lam.min():.3g})")
    return (Q * np.sqrt(np.clip(lam, 0.0, None))) @ Q.T


def contraction_channel_mc(T, f: Callable[[np.ndarray], np.ndarray], x, n: int, seed: int) -> Estimate:
    """``Psi_T(f)(x) = E_eta f(T x + (1 - T T^*)^{1/2} eta)``.

    ``f`` takes an ``(m, d)`` array of points.  When the square root vanishes
    (``T`` orthogonal) the value ``f(T x)`` is returned exactly.
    """
    T = Psi(T).T
    x = _vec(x, "x")
    _same_dim(T, x)
    D = psd_sqrt(np.eye(T.shape[0]) - T @ T.T)
    Tx = T @ x
    if not np.any(D):
        val = np.asarray(f(Tx[None, :]))[0]
        return Estimate(complex(val) if np.iscomplexobj(val) else float(val), 0.0, n)
    return gaussian_mc_mean(lambda eta: f(Tx + eta @ D.T), x.size, n, seed)


# -- Maharam extension of translations ----------------------------------------


@dataclass(frozen=True)
class MaharamPoint:
    x: np.ndarray
    s: float

    def __post_init__(self):
        object.__setattr__(self, "x", _vec(self.x, "x"))
        if not np.isfinite(self.s):
            raise ValueError("s must be finite")
        object.__setattr__(self, "s", float(self.s))


def maharam_translate(xi, p: MaharamPoint) -> MaharamPoint:
    """``J_xi(x, s) = (x + xi, s - |xi|^2/2 - <x, xi>)``."""
    xi = _vec(xi, "xi")
    _same_dim(xi, p.x)
    return MaharamPoint(p.x + xi, p.s - 0.5 * (xi @ xi) - p.x @ xi)


def maharam_invariance_mc(xi, f: Callable, n: int, seed: int,
                          s_sigma: float = 3.0) -> tuple[Estimate, Estimate]:
    """Integrals of ``f`` and ``f o J_xi`` against ``d mu(x) e^{-s} ds``.

    ``s`` is importance-sampled from ``N(0, s_sigma^2)``; both integrals use
    the same draws.  ``f(x, s)`` must make ``f e^{-s}`` integrable.
    """
    xi = _vec(xi, "xi")
    d = xi.size

    def draw(rng, size):
        x = rng.standard_normal((size, d))
        s = s_sigma * rng.standard_normal(size)
        w = np.exp(-s + 0.5 * (s / s_sigma) ** 2) * s_sigma * np.sqrt(2.0 * np.pi)
        return x, s, w

    def plain(rng, size):
        x, s, w = draw(rng, size)
        return f(x, s) * w

    def moved(rng, size):
        x, s, w = draw(rng, size)
        return f(x + xi, s - 0.5 * (xi @ xi) - x @ xi) * w

    return mc_mean(plain, n, seed), mc_mean(moved, n, seed)


# -- Gaussian smoothing on the line -------------------------------------------


@dataclass(frozen=True)
class GriddedFunction:
    """Samples ``values[i] = f(t0 + i h)``."""

    t0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def grid(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.values.size)

    @classmethod
    def sample(cls, f: Callable, lo: float, hi: float, h: float) -> "GriddedFunction":
        n = int(round((hi - lo) / h)) + 1
        t = lo + h * np.arange(n)
        return cls(lo, h, f(t))


def gauss_convolve(r: float, f: GriddedFunction) -> GriddedFunction:
    """``Phi_r(f)(t) = int f(t - u) phi(u) du`` with ``phi = N(r^2/2, r^2)``.

    The kernel is sampled on the grid out to 6 standard deviations and
    renormalized to unit mass.  The result lives on the sub-grid where the
    whole kernel sees data.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    h = f.h
    if h > r / 8:
        raise ValueError(f"grid too coarse: spacing {h:g} > r/8 = {r / 8:g}")
    mean = 0.5 * r * r
    jmin = int(np.floor((mean - 6 * r) / h))
    jmax = int(np.ceil((mean + 6 * r) / h))
    u = h * np.arange(jmin, jmax + 1)
    ker = np.exp(-0.5 * ((u - mean) / r) ** 2)
    ker /= ker.sum()
    if f.values.size < ker.size:
        raise ValueError("grid shorter than the kernel support (need 12r of padding)")
    out = np.convolve(f.values, ker, mode="valid")
    return GriddedFunction(f.t0 + jmax * h, h, out)


# -- rotation trick -----------------------------------------------------------


def _check_pq(p: float, q: float):
    if abs(p * p + q * q - 1.0) > 1e-12:
        raise ValueError(f"p^2 + q^2 = {p * p + q * q!r}, must be 1")


def rotation_conjugacy_errors(action: AffineZAction, p: float, q: float, x, y, a: int,
                              s=(0.37, -1.21), printed_s: bool = False,
                              relative: bool = False) -> tuple[float, float]:
    """Discrepancies of the linear and the Maharam rotation tricks.

    Linear: ``(alpha^p x alpha^q)(a) o R = R o (alpha x pi)(a)`` with
    ``R(x, y) = (p x - q y, q x + p y)``.

    Maharam: ``(sigma^p x sigma^q)(a) o Xi = Xi o (sigma x beta)(a)`` where
    ``sigma^r`` is the Maharam extension of ``alpha^{r t}``,
    ``beta_a(y, s') = (pi(a) y, s' + t <y, c_{-a}>)`` and
    ``Xi(x, s, y, s') = (p x - q y, S_1, q x + p y, S_2)`` with
    ``S(s, s') = (p^2 s - pq s', q^2 s + pq s')``.  ``printed_s`` swaps in
    ``(p^2 s + pq s', q^2 s - pq s')``, for which the identity fails.
    With ``relative`` the log-density coordinates are compared relative to
    ``max(1, |value|)``; they grow like ``a^2`` and carry that much rounding.
    """
    _check_pq(p, q)
    x, y = _vec(x, "x"), _vec(y, "y")
    _same_dim(x, y, action.gen)
    t = action.scale
    ap, aq = action.scaled(p * t), action.scaled(q * t)

    def R(u, v):
        return p * u - q * v, q * u + p * v

    lhs = [ap.act(a, R(x, y)[0]), aq.act(a, R(x, y)[1])]
    rhs = R(action.act(a, x), action.linear(a, y))
    err_r = max(np.max(np.abs(lhs[0] - rhs[0])), np.max(np.abs(lhs[1] - rhs[1])))

    sign = -1.0 if printed_s else 1.0

    def S(u, v):
        return p * p * u - sign * p * q * v, q * q * u + sign * p * q * v

    def Xi(u, su, v, sv):
        g1, g2 = R(u, v)
        s1, s2 = S(su, sv)
        return g1, s1, g2, s2

    s0, s1 = float(s[0]), float(s[1])
    g1, m1, g2, m2 = Xi(x, s0, y, s1)
    left = (ap.act(a, g1), m1 + ap.rn_log(a, g1), aq.act(a, g2), m2 + aq.rn_log(a, g2))
    ys = s1 + t * (y @ action.cocycle(-a))
    right = Xi(action.act(a, x), s0 + action.rn_log(a, x), action.linear(a, y), ys)
    errs = []
    for k, (l, r) in enumerate(zip(left, right)):
        d = np.abs(np.asarray(l) - np.asarray(r))
        if relative and k % 2:
            d = d / max(1.0, abs(float(l)))
        errs.append(float(np.max(d)))
    err_s = max(errs)
    return float(err_r), float(err_s)


def rotation_conjugacy_check(action: AffineZAction, p: float, q: float, x, y, a: int) -> float:
    """Largest coordinate discrepancy over both rotation-trick conjugacies."""
    return max(rotation_conjugacy_errors(action, p, q, x, y, a))
