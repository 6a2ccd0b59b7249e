"""Finite-dimensional affine isometric actions of Z in block form.

An :class:`AffineZAction` is ``x -> pi(a) x + scale * c_a`` where ``pi`` is a
direct sum of planar rotations and one-dimensional sign blocks, and ``c_a``
is the 1-cocycle generated by ``gen = c_1``.  Everything is evaluated in
closed form per block, so cost and accuracy do not depend on ``|a|``.

Coordinates are laid out as ``[re_0, im_0, re_1, im_1, ..., s_0, s_1, ...]``:
rotation blocks first (a complex coordinate per block), then the
one-dimensional blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_GROUP_ELEMENT = 2**40


class GuardError(ArithmeticError):
    """A numerical guard tripped (overflow, heavy tails, bad grid)."""

    def __init__(self, guard: str, message: str):
        super().__init__(f"[{guard}] {message}")
        self.guard = guard


@dataclass(frozen=True)
class AffineIsometry:
    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        if self.linear.shape != (self.translation.size, self.translation.size):
            raise ValueError("linear part and translation have different dimensions")

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x @ self.linear.T + self.translation

    def orthogonality_defect(self) -> float:
        d = self.linear.shape[0]
        return float(np.max(np.abs(self.linear @ self.linear.T - np.eye(d))))


def _as_int_array(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise TypeError("group elements of Z must be integers")
        arr = arr.astype(np.int64)
    if np.any(np.abs(arr) > MAX_GROUP_ELEMENT):
        raise GuardError("group-element", f"|a| exceeds 2^40 (got max {np.max(np.abs(arr))})")
    return arr.astype(np.int64)


@dataclass(frozen=True)
class AffineZAction:
    """Affine isometric Z-action in rotation/sign block form.

    Parameters
    ----------
    turns : rotation angles of the planar blocks, in turns (angle = 2*pi*turns).
    signs : +1 (trivial) or -1 (sign) for each one-dimensional block.
    gen : the cocycle at the generator, ``c_1``, in block coordinates.
    scale : the factor ``t`` of ``alpha^t``; translations are ``scale * c_a``.
    """

    turns: np.ndarray
    signs: np.ndarray
    gen: np.ndarray
    scale: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        turns = np.asarray(self.turns, dtype=float).reshape(-1)
        signs = np.asarray(self.signs, dtype=float).reshape(-1)
        gen = np.asarray(self.gen, dtype=float).reshape(-1)
        if not np.all(np.isin(signs, (-1.0, 1.0))):
            raise ValueError("one-dimensional blocks must have sign +1 or -1")
        if gen.size != 2 * turns.size + signs.size:
            raise ValueError(
                f"cocycle generator has length {gen.size}, expected {2 * turns.size + signs.size}"
            )
        if not np.all(np.isfinite(gen)) or not np.isfinite(self.scale):
            raise ValueError("non-finite action data")
        object.__setattr__(self, "turns", turns)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "gen", gen)
        object.__setattr__(self, "scale", float(self.scale))

    # -- construction -------------------------------------------------------

    @classmethod
    def from_spectral(cls, atoms, scale: float = 1.0) -> "AffineZAction":
        """Realize ``pi_nu`` and ``c_1 = 1`` for an atomic symmetric measure.

        An atom ``0 < t < 1/2`` of (one-sided) weight ``w`` becomes a rotation
        by ``2*pi*t`` with generator ``(sqrt(2w), 0)``; ``t = 0`` becomes a
        trivial block with generator ``sqrt(w)``; ``t = 1/2`` a sign block
        with generator ``sqrt(2w)``.
        """
        t = np.asarray(atoms.t, dtype=float)
        w = np.asarray(atoms.w, dtype=float)
        rot = (t > 0) & (t < 0.5)
        zero = t == 0
        half = t == 0.5
        gen_rot = np.zeros(2 * int(rot.sum()))
        gen_rot[0::2] = np.sqrt(2.0 * w[rot])
        signs = np.concatenate([np.ones(int(zero.sum())), -np.ones(int(half.sum()))])
        gen_one = np.concatenate([np.sqrt(w[zero]), np.sqrt(2.0 * w[half])])
        return cls(t[rot], signs, np.concatenate([gen_rot, gen_one]), scale)

    @classmethod
    def random(cls, rng: np.random.Generator, n_rot: int = 2, n_trivial: int = 0,
               n_sign: int = 0, scale: float = 1.0, gen_scale: float = 1.0) -> "AffineZAction":
        turns = rng.uniform(0.01, 0.49, n_rot)
        signs = np.concatenate([np.ones(n_trivial), -np.ones(n_sign)])
        gen = gen_scale * rng.standard_normal(2 * n_rot + n_trivial + n_sign)
        return cls(turns, signs, gen, scale)

    def scaled(self, scale: float) -> "AffineZAction":
        return AffineZAction(self.turns, self.signs, self.gen, scale)

    def without_invariant_part(self) -> "AffineZAction":
        """Project the cocycle onto the orthogonal complement of the fixed vectors."""
        gen = self.gen.copy()
        k = 2 * self.turns.size
        gen[k:][self.signs == 1.0] = 0.0
        fixed_rot = np.mod(self.turns, 1.0) == 0.0
        gen[0:k:2][fixed_rot] = 0.0
        gen[1:k:2][fixed_rot] = 0.0
        return AffineZAction(self.turns, self.signs, gen, self.scale)

    # -- geometry -----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.gen.size

    @property
    def n_rot(self) -> int:
        return self.turns.size

    def _split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k = self.n_rot
        z = x[..., 0 : 2 * k : 2] + 1j * x[..., 1 : 2 * k : 2]
        return z, x[..., 2 * k :]

    def _join(self, z: np.ndarray, s: np.ndarray) -> np.ndarray:
        k = self.n_rot
        out = np.empty(z.shape[:-1] + (self.dim,))
        out[..., 0 : 2 * k : 2] = z.real
        out[..., 1 : 2 * k : 2] = z.imag
        out[..., 2 * k :] = s
        return out

    def _phase(self, a: np.ndarray) -> np.ndarray:
        # exp(2 pi i a t) with a*t reduced mod 1 first
        frac = np.mod(np.multiply.outer(a.astype(float), self.turns), 1.0)
        return np.exp(2j * np.pi * frac)

    def _geometric(self, a: np.ndarray) -> np.ndarray:
        """sum_{k<a} e^{2 pi i k t} (signed for a < 0), per rotation block."""
        af = a.astype(float)
        at = np.mod(np.multiply.outer(af, self.turns), 2.0)
        am1t = np.mod(np.multiply.outer(af - 1.0, self.turns), 2.0)
        den = np.sin(np.pi * np.mod(self.turns, 2.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.sin(np.pi * at) / den
        degenerate = np.mod(self.turns, 1.0) == 0.0
        if np.any(degenerate):
            # angle 0: plain multiplicity a; angle pi never occurs for turns in [0,1)
            ratio = np.where(degenerate, np.multiply.outer(af, np.ones_like(self.turns)), ratio)
            am1t = np.where(degenerate, 0.0, am1t)
        return np.exp(1j * np.pi * am1t) * ratio

    def _one_dim_power(self, a: np.ndarray) -> np.ndarray:
        odd = np.mod(a, 2).astype(bool)
        return np.where(np.multiply.outer(odd, self.signs < 0), -1.0, 1.0)

    def _one_dim_geometric(self, a: np.ndarray) -> np.ndarray:
        odd = np.mod(a, 2).astype(float)
        triv = np.multiply.outer(a.astype(float), np.ones_like(self.signs))
        sign = np.multiply.outer(odd, np.ones_like(self.signs))
        return np.where(self.signs > 0, triv, sign)

    def linear(self, a, x: np.ndarray) -> np.ndarray:
        """``pi(a) x``; broadcasts an integer array ``a`` against ``x``."""
        a = _as_int_array(a)
        z, s = self._split(np.asarray(x, dtype=float))
        return self._join(z * self._phase(a), s * self._one_dim_power(a))

    def cocycle(self, a) -> np.ndarray:
        """Unscaled ``c_a``; shape ``a.shape + (dim,)``."""
        return self.cocycle_of(a, self.gen)

    def cocycle_of(self, a, vec: np.ndarray) -> np.ndarray:
        """``sum_{0<=k<a} pi(k) vec`` (the cocycle generated by ``vec``)."""
        a = _as_int_array(a)
        z, s = self._split(np.asarray(vec, dtype=float))
        return self._join(z * self._geometric(a), s * self._one_dim_geometric(a))

    def cocycle_norm_sq(self, a) -> np.ndarray:
        c = self.cocycle(a)
        return np.einsum("...i,...i->...", c, c)

    def act(self, a, x: np.ndarray) -> np.ndarray:
        a = _as_int_array(a)
        return self.linear(a, x) + self.scale * self.cocycle(a)

    def rn_log(self, a, x: np.ndarray) -> np.ndarray:
        """``log omega(a, x)`` with ``omega(a, .) = d(a^{-1} mu)/d mu``.

        Equals ``-|t c_a|^2 / 2 + <x, t c_{-a}>``.
        """
        a = _as_int_array(a)
        t = self.scale
        c = self.cocycle(a)
        cm = self.cocycle(-a)
        quad = -0.5 * t * t * np.einsum("...i,...i->...", c, c)
        return quad + t * np.einsum("...i,...i->...", np.asarray(x, dtype=float), cm)

    def maharam_step(self, a, x: np.ndarray, s):
        return self.act(a, x), np.asarray(s) + self.rn_log(a, x)

    def skew_step(self, a, x: np.ndarray, s):
        """One element of the skew product: ``(pi(a) x, s + <x, c(-a)>)``."""
        a = _as_int_array(a)
        return self.linear(a, x), np.asarray(s) + np.einsum(
            "...i,...i->...", np.asarray(x, dtype=float), self.cocycle(-a)
        )

    def matrix(self, a: int) -> np.ndarray:
        return self.linear(np.array(a), np.eye(self.dim)).T

    def isometry(self, a: int) -> AffineIsometry:
        return AffineIsometry(self.matrix(a), self.scale * self.cocycle(np.array(a)))
