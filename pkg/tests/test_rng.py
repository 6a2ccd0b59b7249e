import numpy as np
import pytest

from nsgauss import rng as R


def test_substreams_are_reproducible_and_distinct():
    a = R.substream(7, 3).standard_normal(8)
    assert np.array_equal(a, R.substream(7, 3).standard_normal(8))
    assert not np.array_equal(a, R.substream(7, 4).standard_normal(8))
    assert not np.array_equal(a, R.substream(8, 3).standard_normal(8))


def test_chunk_sizes():
    assert R.chunk_sizes(0) == []
    assert R.chunk_sizes(10, 4) == [4, 4, 2]
    assert sum(R.chunk_sizes(10**6)) == 10**6


def test_thread_count(monkeypatch):
    monkeypatch.delenv("NSGAUSS_THREADS", raising=False)
    assert R.thread_count() == 1
    monkeypatch.setenv("NSGAUSS_THREADS", "8")
    assert R.thread_count() == 8
    monkeypatch.setenv("NSGAUSS_THREADS", "many")
    with pytest.raises(ValueError):
        R.thread_count()


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_mc_mean_bitwise_independent_of_threads(threads):
    f = lambda x: np.exp(0.3 * x[:, 0]) * np.cos(x[:, 1])
    base = R.gaussian_mc_mean(f, 2, 300_001, 11, threads=1)
    other = R.gaussian_mc_mean(f, 2, 300_001, 11, threads=threads)
    assert base == other


def test_mc_mean_complex_and_stderr():
    est = R.mc_mean(lambda g, n: np.exp(1j * g.standard_normal(n)), 200_000, 3)
    assert isinstance(est.value, complex)
    assert est.within(np.exp(-0.5), 3.0)
    assert est.n == 200_000 and est.stderr > 0


def test_mc_mean_needs_two_samples():
    with pytest.raises(ValueError):
        R.mc_mean(lambda g, n: np.zeros(n), 1, 1)


def test_mc_mean_shape_check():
    with pytest.raises(ValueError):
        R.mc_mean(lambda g, n: np.zeros(n + 1), 10, 1)


def test_parallel_map_keeps_order():
    assert R.parallel_map(lambda v: v * v, list(range(50)), threads=8) == [v * v for v in range(50)]


def test_estimate_within_and_dict():
    e = R.Estimate(1.0, 0.1, 10)
    assert e.within(1.29) and not e.within(1.31) and e.within(1.31, slack=0.02)
    assert R.Estimate(1 + 2j, 0.0, 2).as_dict()["value"] == {"re": 1.0, "im": 2.0}
