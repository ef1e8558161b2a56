import numpy as np
import pytest

from beamcomb.channel import (Ccm, ChannelConfig, MpcSet, UserGeometry, ensemble_ccm,
                              noise_variance_for, realize_channel, sample_ccm,
                              sample_geometry, signal_ccm_estimate, steering,
                              steering_from_sine)
from beamcomb.errors import ConfigError, InputError


def test_steering_zero_angle():
    np.testing.assert_allclose(steering(0.0, 4), 0.5 * np.ones(4))


@pytest.mark.parametrize("theta", [-1.2, -0.3, 0.0, 0.4, 1.5])
def test_steering_unit_norm(theta):
    assert np.linalg.norm(steering(theta, 17)) == pytest.approx(1.0, abs=1e-14)


def test_steering_grid_orthogonality():
    M = 16
    vecs = [steering_from_sine(k / (M * 0.5), M) for k in range(-7, 8)]
    for i, a in enumerate(vecs):
        for j, b in enumerate(vecs):
            if i != j:
                assert abs(np.vdot(a, b)) < 1e-12


def test_steering_rejects_endfire():
    with pytest.raises(InputError):
        steering(np.pi / 2, 4)


def test_sample_geometry_shape_and_spread():
    cfg = ChannelConfig(antennas=32, users=2, rays=6, spread_deg=45)
    geo = sample_geometry(cfg, np.random.default_rng(1))
    assert geo.n_rays == 12
    for u in geo.users:
        assert np.ptp(u.aoas) <= np.deg2rad(45) + 1e-12
        s = np.sin(u.aoas)
        assert u.spread[0] <= s.min() and s.max() <= u.spread[1]
        assert u.powers.sum() == pytest.approx(1.0)


def test_single_ray_zero_spread_sits_at_mean():
    cfg = ChannelConfig(antennas=8, users=1, rays=1, spread_deg=0)
    a = sample_geometry(cfg, np.random.default_rng(7))
    mean = np.random.default_rng(7).uniform(-np.deg2rad(60), np.deg2rad(60))
    assert a.users[0].aoas[0] == mean


def test_geometry_is_reproducible():
    cfg = ChannelConfig()
    a = sample_geometry(cfg, np.random.default_rng(3))
    b = sample_geometry(cfg, np.random.default_rng(3))
    for u, v in zip(a.users, b.users):
        np.testing.assert_array_equal(u.aoas, v.aoas)


def test_config_validation():
    with pytest.raises(ConfigError):
        ChannelConfig(users=0).validate()
    with pytest.raises(ConfigError):
        ChannelConfig(rays=3, spread_deg=0).validate()
    with pytest.raises(ConfigError):
        ChannelConfig(sector_deg=170, spread_deg=20).validate()


def test_realize_channel_mean_power():
    geo = MpcSet((UserGeometry.from_rays([0.3]),), antennas=8)
    rng = np.random.default_rng(0)
    p = np.mean([np.linalg.norm(realize_channel(geo, rng)) ** 2 for _ in range(10_000)])
    assert abs(p - 8) / 8 < 0.05


def test_realize_channel_same_seed_same_draw():
    geo = MpcSet((UserGeometry.from_rays([0.1, 0.2]),), antennas=6)
    np.testing.assert_array_equal(realize_channel(geo, np.random.default_rng(4)),
                                  realize_channel(geo, np.random.default_rng(4)))


def test_ensemble_single_ray_rank_one():
    geo = MpcSet((UserGeometry.from_rays([0.2]),), antennas=12)
    R = ensemble_ccm(geo)
    a = steering(0.2, 12)
    np.testing.assert_allclose(R.matrix, 12 * np.outer(a, a.conj()), atol=1e-12)
    assert R.trace == pytest.approx(12)
    assert np.linalg.matrix_rank(R.matrix, tol=1e-8) == 1


def test_ensemble_two_grid_rays_eigenvalues():
    M = 16
    th = np.arcsin([1 / (M * 0.5), -3 / (M * 0.5)])
    geo = MpcSet((UserGeometry.from_rays(th),), antennas=M)
    ev = np.linalg.eigvalsh(ensemble_ccm(geo).matrix)[::-1]
    np.testing.assert_allclose(ev[:2], [M / 2, M / 2], atol=1e-10)
    np.testing.assert_allclose(ev[2:], 0, atol=1e-10)


def test_ensemble_trace_scales_with_users():
    cfg = ChannelConfig(antennas=20, users=3, rays=4)
    geo = sample_geometry(cfg, np.random.default_rng(2))
    assert ensemble_ccm(geo).trace == pytest.approx(60)


def test_sample_ccm_single_sample_noiseless_rank_one():
    geo = sample_geometry(ChannelConfig(antennas=10), np.random.default_rng(0))
    R = sample_ccm(geo, 1, np.inf, np.random.default_rng(1))
    assert R.kind == "sample" and R.sample_count == 1 and R.noise_variance == 0
    assert np.linalg.matrix_rank(R.matrix, tol=1e-9 * np.linalg.norm(R.matrix)) == 1


def test_sample_ccm_converges_to_ensemble_plus_noise():
    geo = sample_geometry(ChannelConfig(antennas=16), np.random.default_rng(5))
    Rt = ensemble_ccm(geo).matrix
    target = Rt + np.eye(16)
    errs = []
    for n in (100, 1000, 10000):
        e = [np.linalg.norm(sample_ccm(geo, n, 0.0, np.random.default_rng(s)).matrix - target)
             for s in range(20)]
        errs.append(np.mean(e))
    assert errs[0] > errs[1] > errs[2]


def test_signal_estimate_close_to_ensemble_at_large_sample_count():
    geo = sample_geometry(ChannelConfig(antennas=32), np.random.default_rng(9))
    Rs = signal_ccm_estimate(sample_ccm(geo, 16800, 0.0, np.random.default_rng(10)))
    Rt = ensemble_ccm(geo).matrix
    assert np.linalg.norm(Rs.matrix - Rt) / np.linalg.norm(Rt) <= 0.1


def test_signal_estimate_zero_noise_is_identity_map():
    R = Ccm(np.diag([2.0, 1.0]), "sample", 5, 0.0)
    out = signal_ccm_estimate(R)
    np.testing.assert_array_equal(out.matrix, R.matrix)
    assert out.kind == "signal-estimate"


def test_signal_estimate_pure_noise_clamps_to_zero():
    out = signal_ccm_estimate(Ccm(0.5 * np.eye(3), "sample", 10, 0.5))
    np.testing.assert_allclose(out.matrix, 0, atol=1e-15)


def test_signal_estimate_is_psd():
    geo = sample_geometry(ChannelConfig(antennas=16), np.random.default_rng(1))
    out = signal_ccm_estimate(sample_ccm(geo, 20, -5.0, np.random.default_rng(2)))
    assert np.linalg.eigvalsh(out.matrix).min() >= -1e-10 * np.linalg.norm(out.matrix)


def test_ccm_validation():
    with pytest.raises(InputError):
        Ccm(np.array([[1, 1], [0, 1]]), "ensemble")
    with pytest.raises(InputError):
        Ccm(np.eye(2), "bogus")
    with pytest.raises(InputError):
        signal_ccm_estimate(Ccm(np.eye(2), "ensemble"))


def test_noise_variance():
    assert noise_variance_for(0.0) == 1.0
    assert noise_variance_for(10.0) == pytest.approx(0.1)
    assert noise_variance_for(np.inf) == 0.0
