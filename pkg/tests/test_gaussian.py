import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsgauss import gaussian as G
from nsgauss.action import AffineZAction
from nsgauss.rng import substream

N = 10**6


def _rand_contraction(rng, d, norm=0.9):
    A = rng.standard_normal((d, d))
    return norm * A / np.linalg.norm(A, 2)


def _rand_coherent(rng, d, spread=0.4):
    z = spread * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
    return G.CoherentVector(complex(rng.standard_normal(), rng.standard_normal()), z)


# -- sampling -----------------------------------------------------------------


def test_sample_gaussian_one_dim_moments():
    x = G.sample_gaussian(1, 11, N)[:, 0]
    assert abs(x.mean()) < 4 / math.sqrt(N)
    assert abs(x.var() - 1) < 0.01


def test_sample_gaussian_is_deterministic():
    a = G.sample_gaussian(3, 5, 100_000)
    b = G.sample_gaussian(3, 5, 100_000)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, G.sample_gaussian(3, 6, 100_000))


def test_sample_gaussian_covariance():
    x = G.sample_gaussian(3, 12, N)
    assert np.max(np.abs(np.cov(x.T) - np.eye(3))) < 0.01


@pytest.mark.parametrize("dim,n", [(0, 10), (2, 0)])
def test_sample_gaussian_rejects_empty(dim, n):
    with pytest.raises(ValueError):
        G.sample_gaussian(dim, 1, n)


# -- translation densities ------------------------------------------------------


def test_log_rn_translation_values():
    eta = np.array([0.3, -1.2, 0.5])
    assert G.log_rn_translation(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0
    assert G.log_rn_translation(eta, eta) == pytest.approx(0.5 * eta @ eta, abs=1e-15)


@pytest.mark.parametrize("norm", [0.25, 1.0, 2.0])
def test_density_normalization(norm):
    eta = norm * np.array([0.6, 0.8])
    est = G.gaussian_mc_mean(lambda x: np.exp(G.log_rn_translation(eta, x)), 2, N, 3)
    assert est.within(1.0, 3.0)
    if norm <= 1:
        assert abs(est.value - 1) < 0.01


def test_characteristic_check_trivial_cases():
    z = np.zeros(3)
    a, est = G.characteristic_check(z, z, 1000, 1)
    assert a == 1.0 and est.value == 1.0
    xi = np.array([0.4, -0.7, 1.1])
    a, est = G.characteristic_check(xi, -xi, 1000, 1)
    assert a == 1.0 and est.value == 1.0 and est.stderr == 0.0


def test_characteristic_check_unit_norm():
    xi, eta = np.array([0.3, 0.0]), np.array([0.3, 0.8])
    a, est = G.characteristic_check(xi, eta, N, 9)
    assert a == pytest.approx(math.exp(-0.5))
    assert abs(est.value - a) <= 3 / math.sqrt(N)


def test_rn_moment_guard():
    with pytest.raises(ValueError):
        G.rn_moment_check(np.array([3.0]), 1.0, 100, 1)
    with pytest.raises(ValueError):
        G.rn_moment_check(np.array([0.3]), 2.5, 100, 1)


# -- coherent vectors -----------------------------------------------------------


def test_coherent_norm_closed_form():
    z, xi = 0.7 - 0.4j, np.array([0.3, -1.1])
    v = G.exp_vector(z, xi)
    assert G.coherent_inner(v, v) == pytest.approx(math.exp(abs(z) ** 2 * xi @ xi), rel=1e-14)
    assert G.coherent_inner(G.exp_vector(1.0, np.zeros(2)), G.exp_vector(2j, np.zeros(2))) == 1.0


def test_coherent_inner_matches_pointwise_mc():
    rng = substream(17, 0)
    z, w = 0.6 + 0.3j, -0.2 + 0.5j
    xi, eta = rng.standard_normal(2) * 0.6, rng.standard_normal(2) * 0.6
    a, b = G.exp_vector(z, xi), G.exp_vector(w, eta)
    closed = G.coherent_inner(a, b)
    est = G.coherent_mc_inner(lambda x: G.evaluate(a, x), lambda x: G.evaluate(b, x), 2, N, 18)
    assert abs(est.value - closed) / abs(closed) < 0.02


def test_fourier_order():
    v = _rand_coherent(substream(1, 1), 3)
    F = G.U(1j)
    w = v
    for _ in range(4):
        w = G.coherent_apply(F, w)
    assert w == v
    assert G.coherent_apply(G.U(-1), G.coherent_apply(G.U(-1), v)) == v


def test_u_requires_unit_modulus():
    with pytest.raises(ValueError):
        G.U(1.1)


def test_psi_on_exp_vector():
    rng = substream(2, 2)
    T = _rand_contraction(rng, 3)
    z, xi = 0.8 - 0.1j, rng.standard_normal(3)
    lhs = G.coherent_apply(G.Psi(T), G.exp_vector(z, xi))
    rhs = G.exp_vector(z, T.T @ xi)
    assert np.max(np.abs(lhs.direction - rhs.direction)) < 1e-12
    assert abs(lhs.scale - rhs.scale) < 1e-10 * abs(rhs.scale)


def test_psi_rejects_expansion():
    with pytest.raises(ValueError):
        G.Psi(2 * np.eye(2))


def test_fourier_intertwining_exact():
    rng = substream(3, 3)
    F, Fs = G.U(1j), G.U(-1j)
    for _ in range(20):
        v, w = _rand_coherent(rng, 3), _rand_coherent(rng, 3)
        xi = rng.standard_normal(3)
        lhs = G.coherent_inner(G.coherent_apply(F, G.coherent_apply(G.Rho(xi), G.coherent_apply(Fs, v))), w)
        rhs = G.coherent_inner(G.coherent_apply(G.M(xi / 2), v), w)
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


@pytest.mark.parametrize("ops", [
    ("M",), ("Rho",), ("M", "Rho"), ("Rho", "M", "Rho"),
])
def test_coherent_algebra_vs_pointwise_oracle(ops):
    """Closed-form M and Rho images against their defining pointwise formulas."""
    rng = substream(4, len(ops))
    d = 3
    v, w = _rand_coherent(rng, d, 0.3), _rand_coherent(rng, d, 0.3)
    f = lambda x, v=v: G.evaluate(v, x)
    cv = v
    for name in ops:
        par = 0.5 * rng.standard_normal(d)
        op = G.M(par) if name == "M" else G.Rho(par)
        cv = G.coherent_apply(op, cv)
        f = G.pointwise(op, f)
    closed = G.coherent_inner(cv, w)
    est = G.coherent_mc_inner(f, lambda x: G.evaluate(w, x), d, N, 40 + len(ops))
    assert abs(est.value - closed) <= 3 * est.stderr


# -- contractions ---------------------------------------------------------------


def test_channel_identity_exact():
    f = lambda y: np.sin(y[:, 0]) + y[:, 1] ** 2
    x = np.array([0.3, -0.8])
    est = G.contraction_channel_mc(np.eye(2), f, x, 1000, 1)
    assert est.value == f(x[None, :])[0] and est.stderr == 0.0


def test_channel_zero_is_full_average():
    f = lambda y: np.cos(y[:, 0])
    est = G.contraction_channel_mc(np.zeros((2, 2)), f, np.array([5.0, -3.0]), N, 2)
    assert est.within(math.exp(-0.5), 3.0)


def test_channel_on_exp_vector():
    rng = substream(5, 5)
    T = _rand_contraction(rng, 3, 0.7)
    xi = 0.5 * rng.standard_normal(3)
    x = rng.standard_normal(3)
    v = G.exp_vector(1.0, xi)
    est = G.contraction_channel_mc(T, lambda y: G.evaluate(v, y).real, x, N, 6)
    closed = G.evaluate(G.exp_vector(1.0, T.T @ xi), x[None, :])[0].real
    assert abs(est.value - closed) / abs(closed) < 0.02


def test_psd_sqrt_clamps_tiny_negative():
    Q = np.linalg.qr(substream(7, 7).standard_normal((3, 3)))[0]
    A = Q @ np.diag([1.0, 0.0, -1e-15]) @ Q.T
    R = G.psd_sqrt(A)
    assert np.max(np.abs(R @ R - A)) < 1e-12
    with pytest.raises(ValueError):
        G.psd_sqrt(-np.eye(2))


# -- Maharam translations -------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.floats(-5, 5))
def test_maharam_group_law(vals, s):
    xi, eta, x = np.array(vals[:2]), np.array(vals[2:4]), np.array(vals[4:6])
    p = G.MaharamPoint(x, s)
    a = G.maharam_translate(xi, G.maharam_translate(eta, p))
    b = G.maharam_translate(xi + eta, p)
    assert np.max(np.abs(a.x - b.x)) < 1e-12 and abs(a.s - b.s) < 1e-12 * max(1.0, abs(a.s))
    back = G.maharam_translate(-xi, G.maharam_translate(xi, p))
    assert np.max(np.abs(back.x - x)) < 1e-12 and abs(back.s - s) < 1e-12 * max(1.0, abs(s))
    z = G.maharam_translate(np.zeros(2), p)
    assert np.array_equal(z.x, p.x) and z.s == p.s


def test_maharam_invariance_mc():
    xi = np.array([0.6, -0.3])
    f = lambda x, s: np.exp(-s * s) * np.cos(x[:, 0]) / (1 + x[:, 1] ** 2)
    plain, moved = G.maharam_invariance_mc(xi, f, N, 8)
    assert abs(moved.value - plain.value) / abs(plain.value) < 0.02


# -- smoothing on the line ------------------------------------------------------


def test_convolve_preserves_constants():
    f = G.GriddedFunction.sample(np.ones_like, -10, 10, 0.01)
    out = G.gauss_convolve(0.5, f)
    assert np.max(np.abs(out.values - 1)) < 1e-6


def test_convolve_first_moment_shift():
    """Phi_r(t) = t - r^2/2 for the kernel N(r^2/2, r^2) acting by f(t - u)."""
    r = 0.8
    f = G.GriddedFunction.sample(lambda t: t, -20, 20, 0.01)
    out = G.gauss_convolve(r, f)
    assert np.max(np.abs(out.values - (out.grid - r * r / 2))) < 1e-9


def test_convolve_semigroup_on_bump():
    r, h = 0.6, 0.01
    f = G.GriddedFunction.sample(lambda t: np.exp(-0.5 * t * t / 0.09), -15, 15, h)
    twice = G.gauss_convolve(r, G.gauss_convolve(r, f))
    once = G.gauss_convolve(r * math.sqrt(2), f)
    # Phi_r o Phi_r has kernel N(r^2, 2 r^2) and Phi_{r sqrt 2} has N(r^2, 2 r^2): identical laws
    t = twice.grid
    m = (t >= once.grid[0]) & (t <= once.grid[-1])
    idx = np.round((t[m] - once.t0) / h).astype(int)
    assert np.max(np.abs(twice.values[m] - once.values[idx])) < 1e-3
    mass = lambda g: g.values.sum() * h
    mean = lambda g: (g.grid * g.values).sum() * h / mass(g)
    # a bump moves right by r^2/2 per application
    assert mean(twice) == pytest.approx(r * r, abs=1e-6)


def test_convolve_rejects_coarse_grid():
    f = G.GriddedFunction.sample(np.ones_like, -10, 10, 0.2)
    with pytest.raises(ValueError):
        G.gauss_convolve(0.5, f)


# -- rotation trick -------------------------------------------------------------


def test_rotation_identity_pq_10():
    rng = substream(9, 9)
    act = AffineZAction.random(rng, 2, 0, 0, 1.3)
    x, y = rng.standard_normal(4), rng.standard_normal(4)
    assert G.rotation_conjugacy_check(act, 1.0, 0.0, x, y, 5) == 0.0


def test_rotation_identity_pythagorean():
    rng = substream(10, 10)
    act = AffineZAction.random(rng, 2, 0, 0, 0.9)
    x, y = rng.standard_normal(4), rng.standard_normal(4)
    er, es = G.rotation_conjugacy_errors(act, 0.6, 0.8, x, y, 7)
    assert er < 1e-9 and es < 1e-9
    assert G.rotation_conjugacy_errors(act, 0.6, 0.8, x, y, 7, printed_s=True)[1] > 1e-3


def test_rotation_requires_unit_pair():
    act = AffineZAction.random(substream(1, 1), 1)
    with pytest.raises(ValueError):
        G.rotation_conjugacy_check(act, 0.6, 0.6, np.zeros(2), np.zeros(2), 1)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.integers(-500, 500), st.integers(0, 2**32 - 1))
def test_rotation_identity_property(phi, a, seed):
    rng = substream(seed, 0)
    act = AffineZAction.random(rng, 2, 1, 1, rng.uniform(0.1, 1.5))
    x, y = rng.standard_normal(act.dim), rng.standard_normal(act.dim)
    er, es = G.rotation_conjugacy_errors(act, math.cos(phi), math.sin(phi), x, y, a, relative=True)
    assert er < 1e-9 and es < 1e-9
