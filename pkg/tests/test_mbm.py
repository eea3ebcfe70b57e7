import math

import numpy as np
import pytest

from multifrac import mbm
from multifrac.errors import ArgumentError, ConfigError
from multifrac.mbm import GaussianDriver, covariance_matrix, covariance_oracle, sample_rlmbm
from multifrac.regularity import RegularityFunction
from multifrac.special import gamma_fn

HALF = RegularityFunction.constant(0.5)
AFF = RegularityFunction.affine(0.2, 0.1)
C03 = RegularityFunction.constant(0.3)


# ---------------------------------------------------------------------------
# driver

def test_driver_substreams_are_reproducible():
    d = GaussianDriver(42, m=64)
    assert np.array_equal(d.increments(7), GaussianDriver(42, m=64).increments(7))
    assert not np.array_equal(d.increments(7), d.increments(8))
    assert not np.array_equal(d.normals(7, 64, mbm.STREAM_BROWNIAN), d.normals(7, 64, mbm.STREAM_CHOLESKY))
    assert not np.array_equal(d.increments(7), GaussianDriver(43, m=64).increments(7))


def test_driver_increment_moments():
    d = GaussianDriver(5, T=2.0, m=128)
    x = np.concatenate([d.increments(k) for k in range(800)])
    N = x.size
    var = d.dt
    assert abs(x.mean()) <= 4 * math.sqrt(var / N)
    assert abs(x.var() - var) <= 4 * var * math.sqrt(2.0 / N)
    # independence across neighbouring increments
    r = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert abs(r) <= 4 / math.sqrt(N)


@pytest.mark.parametrize("seed", [-1, 1.5, True, "3"])
def test_driver_rejects_bad_seed(seed):
    with pytest.raises(ArgumentError):
        GaussianDriver(seed)


def test_blocks_independent_of_threads():
    h = AFF
    grid = np.linspace(0, 1, 9)
    a = sample_rlmbm(h, grid, GaussianDriver(3, m=32, threads=1), 700, "kernel")
    b = sample_rlmbm(h, grid, GaussianDriver(3, m=32, threads=4), 700, "kernel")
    assert np.array_equal(a.values, b.values)
    c = sample_rlmbm(h, grid, GaussianDriver(3, threads=3), 700, "cholesky")
    d = sample_rlmbm(h, grid, GaussianDriver(3, threads=1), 700, "cholesky")
    assert np.array_equal(c.values, d.values)
    # an offset batch reproduces the tail of a longer run
    e = sample_rlmbm(h, grid, GaussianDriver(3), 300, "cholesky", offset=400)
    assert np.array_equal(e.values, d.values[400:])


# ---------------------------------------------------------------------------
# covariance

def test_oracle_brownian():
    assert covariance_oracle(HALF, 0.5, 1.0) == pytest.approx(0.5, rel=1e-13)
    assert covariance_oracle(HALF, 1.0, 0.5) == pytest.approx(0.5, rel=1e-13)


def test_oracle_constant_variance(derived):
    closed = 1.0 / (0.6 * gamma_fn(0.8) ** 2)
    assert derived["cov_const0.3_diag"] == pytest.approx(closed, rel=1e-15)
    assert covariance_oracle(C03, 1.0, 1.0) == pytest.approx(closed, rel=1e-13)


def test_oracle_affine_fixture(derived):
    assert covariance_oracle(AFF, 0.5, 1.0) == pytest.approx(derived["cov_affine_0.5_1"], rel=1e-12)


def test_hypergeometric_form_matches_integral():
    for s, t in ((0.5, 1.0), (0.1, 0.9), (0.7, 0.8)):
        assert mbm.covariance_hypergeometric(AFF, s, t) == pytest.approx(covariance_oracle(AFF, s, t), rel=1e-12)


def test_matrix_brownian_small_grid():
    C = covariance_matrix(HALF, np.array([0.0, 0.5, 1.0])).matrix
    assert C == pytest.approx(np.array([[0, 0, 0], [0, 0.5, 0.5], [0, 0.5, 1.0]]), abs=1e-14)


@pytest.mark.parametrize("h", [AFF, C03, RegularityFunction.sinusoidal(0.3, 0.15, 2.0)], ids=["aff", "c03", "sine"])
def test_matrix_structure(h):
    grid = np.linspace(0, 1, 17)
    C = covariance_matrix(h, grid).matrix
    assert np.array_equal(C, C.T)
    assert np.all(C[0] == 0) and np.all(C[:, 0] == 0)
    ev = np.linalg.eigvalsh(C)
    assert ev.min() >= -1e-10 * np.trace(C)
    for i, j in ((3, 7), (16, 16), (16, 1)):
        assert C[i, j] == pytest.approx(covariance_oracle(h, grid[i], grid[j]), rel=1e-12)


def test_matrix_constant_order_closed_form():
    grid = np.linspace(0, 1, 8)
    C = covariance_matrix(C03, grid).matrix
    for i in range(1, 8):
        for j in range(1, i + 1):
            assert C[i, j] == pytest.approx(mbm.covariance_hypergeometric(C03, grid[j], grid[i]), rel=1e-12)


# ---------------------------------------------------------------------------
# samplers

@pytest.mark.parametrize("method", ["cholesky", "kernel"])
def test_brownian_unit_variance(method):
    grid = np.linspace(0, 1, 5)
    drv = GaussianDriver(2024, m=16)
    P = sample_rlmbm(HALF, grid, drv, 100_000, method)
    assert np.all(P.values[:, 0] == 0.0)
    E = mbm.empirical_covariance(P)
    assert abs(E.matrix[-1, -1] - 1.0) <= 3 * E.stderr[-1, -1]
    ok, z = mbm.covariance_gate(E, np.minimum.outer(grid, grid))
    assert ok, z


def test_kernel_resolution_is_checked():
    grid = np.linspace(0, 1, 9)
    with pytest.raises(ConfigError):
        sample_rlmbm(AFF, grid, GaussianDriver(0, m=16), 10, "kernel")
    with pytest.raises(ConfigError):
        sample_rlmbm(AFF, grid, GaussianDriver(0, m=36), 10, "kernel")
    with pytest.raises(ArgumentError):
        sample_rlmbm(AFF, grid, GaussianDriver(0), 10, "fft")


def test_kernel_method_matches_oracle():
    grid = np.linspace(0, 1, 17)
    P = sample_rlmbm(AFF, grid, GaussianDriver(17, m=64), 100_000, "kernel")
    ok, z = mbm.covariance_gate(mbm.empirical_covariance(P), covariance_matrix(AFF, grid).matrix)
    assert ok, z


def test_raw_kernel_scheme_matches_its_discrete_covariance():
    grid = np.linspace(0, 1, 9)
    m = 32
    P = sample_rlmbm(AFF, grid, GaussianDriver(8, m=m), 50_000, "kernel", residual=False)
    bias = mbm.kernel_bias(AFF, grid, m)
    ref = covariance_matrix(AFF, grid).matrix + bias
    ok, z = mbm.covariance_gate(mbm.empirical_covariance(P), ref)
    assert ok, z
    # the raw scheme loses variance, and the loss shrinks under refinement
    assert np.all(np.diag(bias)[1:] < 0)
    finer = mbm.kernel_bias(AFF, grid, 8 * m)
    assert np.abs(finer).max() < np.abs(bias).max()


def test_empirical_covariance_edge_cases():
    grid = np.linspace(0, 1, 5)
    E = mbm.empirical_covariance(mbm.PathBundle(grid, np.zeros((200, 5))))
    assert np.all(E.matrix == 0)
    with pytest.raises(ArgumentError):
        mbm.empirical_covariance(mbm.PathBundle(grid, np.zeros((50, 5))))
    bad = np.zeros((200, 5))
    bad[3, 2] = np.nan
    with pytest.raises(ArgumentError):
        mbm.empirical_covariance(mbm.PathBundle(grid, bad))


def test_gaussianity():
    grid = np.linspace(0, 1, 9)
    P = sample_rlmbm(AFF, grid, GaussianDriver(9, m=32), 20_000, "kernel")
    assert mbm.gaussianity_check(P)["pass"]
    skewed = mbm.PathBundle(grid, np.random.default_rng(0).exponential(size=(20_000, 9)))
    assert not mbm.gaussianity_check(skewed)["pass"]


@pytest.mark.parametrize("h,t,target,tol", [
    (HALF, 0.5, 0.5, 0.05),
    (C03, 0.5, 0.3, 0.05),
    (RegularityFunction.affine(0.2, 0.2), 0.75, 0.35, 0.07),
], ids=["brownian", "constant", "affine"])
def test_holder_exponent(h, t, target, tol):
    grid = np.linspace(0, 1, 257)
    P = sample_rlmbm(h, grid, GaussianDriver(11, m=256), 2000)
    est, se = mbm.holder_exponent_estimate(P, t, [1, 2, 4, 8])
    assert abs(est - target) <= tol
    assert 0 < se < 0.05


def test_holder_exponent_argument_errors():
    grid = np.linspace(0, 1, 17)
    P = sample_rlmbm(HALF, grid, GaussianDriver(0), 200)
    with pytest.raises(ArgumentError):
        mbm.holder_exponent_estimate(P, 0.5, [1, 2])
    with pytest.raises(ArgumentError):
        mbm.holder_exponent_estimate(P, 0.9, [1, 2, 4])


def test_global_holder_quotient_is_stable_under_refinement():
    # qualitative report: the maximal quotient at exponent min(1/2, h_*) stays of the same size
    h = AFF
    expo = min(0.5, h.range_bounds()[0])
    meds = []
    for n in (128, 512):
        P = sample_rlmbm(h, np.linspace(0, 1, n + 1), GaussianDriver(4, m=n), 1000)
        q = mbm.holder_quotient_max(P, expo)
        assert np.all(np.isfinite(q))
        meds.append(float(np.median(q)))
    assert meds[1] / meds[0] < 2.0


# ---------------------------------------------------------------------------
# joint sampler

def test_joint_sampler_brownian_has_no_residual():
    js = mbm.JointSampler(HALF, 8)
    assert np.all(js.resid_factor == 0)
    dB, Bh = js.sample(GaussianDriver(1, m=8), 0, 10)
    assert np.allclose(Bh[:, 1:], np.cumsum(dB, axis=1), atol=1e-14)


def test_joint_sampler_law():
    n = 8
    js = mbm.JointSampler(AFF, n)
    dB, Bh = js.sample(GaussianDriver(6, m=n), 0, 40_000)
    E = mbm.empirical_covariance(Bh, js.grid)
    ok, z = mbm.covariance_gate(E, covariance_matrix(AFF, js.grid).matrix)
    assert ok, z
    # Cov(B^h_i, dB_j) = dt W[i, j]
    cross = (Bh - Bh.mean(0)).T @ (dB - dB.mean(0)) / (len(dB) - 1)
    se = np.sqrt(np.var(Bh, axis=0)[:, None] * js.dt / len(dB))
    assert np.all(np.abs(cross - js.dt * js.W) <= 4 * se + 1e-15)
