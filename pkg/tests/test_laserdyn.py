import numpy as np
import pytest
from scipy.linalg import expm

from laserclock import fock, laserdyn as ld


def detailed_balance_poisson(mu, trunc):
    # oracle: birth kappa*mu / death kappa*n chain via the recursion
    p = np.zeros(trunc + 1)
    p[0] = 1.0
    for n in range(trunc):
        p[n + 1] = p[n] * mu / (n + 1)
    return p / p.sum()


def test_pure_loss_sector0_trace_preserving():
    params = ld.LaserParams(kappa=1.3, mu=8.0, gain_kind="none")
    L = ld.build_liouvillian_sector(params, 0, 40).matrix
    assert np.max(np.abs(L.sum(axis=0))) < 1e-12


def test_noiseless_gain_sector0_trace_preserving():
    params = ld.LaserParams(kappa=1.0, mu=8.0)
    L = ld.build_liouvillian_sector(params, 0, 60).matrix
    assert np.max(np.abs(L.sum(axis=0))) < 1e-12


def test_stationary_state_is_poisson():
    params = ld.LaserParams(kappa=1.0, mu=8.0)
    pops = ld.stationary_state(params, 60).populations()
    tv = 0.5 * np.abs(pops - ld.poisson_weights(8.0, 60)).sum() \
        + 0.5 * (1 - ld.poisson_weights(8.0, 60).sum())
    assert tv < 1e-8


def test_stationary_state_small_mu_against_detailed_balance():
    params = ld.LaserParams(kappa=2.0, mu=0.5)
    pops = ld.stationary_state(params, 30).populations()
    oracle = detailed_balance_poisson(0.5, 30)
    assert 0.5 * np.abs(pops - oracle).sum() < 1e-10


@pytest.mark.parametrize("mu", [0.5, 8.0, 20.0])
def test_stationary_mean_photon_number(mu):
    params = ld.LaserParams(kappa=1.0, mu=mu)
    dm = ld.stationary_state(params, fock.default_truncation(mu) + 20)
    assert dm.mean_photon_number() == pytest.approx(mu, rel=1e-6)


def test_stationary_detailed_balance_invariant():
    params = ld.LaserParams(kappa=1.0, mu=8.0)
    p = ld.stationary_state(params, 60).populations()
    n = np.arange(60)
    assert np.max(np.abs(params.kappa * params.mu * p[:-1]
                         - params.kappa * (n + 1) * p[1:])) < 1e-10


def test_stationary_requires_noiseless_gain():
    with pytest.raises(ValueError):
        ld.stationary_state(ld.LaserParams(kappa=1.0, mu=8.0, gain_kind="none"), 60)


def test_truncation_too_small_rejected():
    params = ld.LaserParams(kappa=1.0, mu=8.0)
    with pytest.raises(ValueError, match="truncation"):
        ld.build_liouvillian_sector(params, 0, 12)


def test_sector_blocks_match_full_superoperator():
    # the full generator must map rho_{n, n+k} strictly within offset k, and
    # its blocks must reproduce the sector matrices exactly
    params = ld.LaserParams(kappa=1.0, mu=2.0)
    T = 16
    Lfull = ld.full_liouvillian(params, T)
    d = T + 1
    sectors = {k: ld.build_liouvillian_sector(params, k, T).matrix for k in range(T + 1)}
    for k in [0, 1, 5]:
        for n in range(d - k):
            E = np.zeros((d, d), dtype=complex)
            E[n, n + k] = 1.0
            out = (Lfull @ E.reshape(-1)).reshape(d, d)
            mask = np.zeros((d, d), dtype=bool)
            idx = np.arange(d - k)
            mask[idx, idx + k] = True
            assert np.all(out[~mask] == 0.0), "cross-sector coupling"
            assert np.allclose(out[idx, idx + k], sectors[k][:, n], atol=1e-13)


def test_linewidth_mu8ts_frozen_value():
    # oracle (dense eigendecomposition of the k=1 sector, cross-checked against
    # the full superoperator): ell = 0.03712959 at kappa=1, mu=8.  This sits
    # 18.8% above the large-mu asymptote kappa/4mu = 0.03125.
    params = ld.LaserParams(kappa=1.0, mu=8.0)
    est = ld.extract_linewidth(params, 60)
    assert est.value == pytest.approx(0.03712959, rel=1e-5)


def test_linewidth_methods_agree():
    for mu in [4.0, 8.0, 16.0]:
        params = ld.LaserParams(kappa=1.0, mu=mu)
        trunc = fock.default_truncation(mu)
        v_eig = ld.extract_linewidth(params, trunc, "eigenvalue").value
        v_fit = ld.extract_linewidth(params, trunc, "decay_fit").value
        assert abs(v_eig / v_fit - 1) < 0.02


def test_linewidth_linearity_in_kappa():
    ref = ld.extract_linewidth(ld.LaserParams(kappa=1.0, mu=8.0), 60).value
    for c in [0.5, 2.0]:
        v = ld.extract_linewidth(ld.LaserParams(kappa=c, mu=8.0), 60).value
        assert v / ref == pytest.approx(c, rel=0.01)


def test_linewidth_deviation_decreases_with_mu():
    devs = []
    for mu in [4.0, 8.0, 16.0]:
        params = ld.LaserParams(kappa=1.0, mu=mu)
        v = ld.extract_linewidth(params, fock.default_truncation(mu)).value
        devs.append(abs(v / ld.hl_linewidth(params) - 1))
    assert devs[0] > devs[1] > devs[2]
    # the correction is ~1/mu: at mu=16 it is within 10% of kappa/4mu
    assert devs[2] < 0.10


def test_sql_linewidth_values():
    assert ld.sql_linewidth(ld.LaserParams(kappa=1.0, mu=10.0)) == pytest.approx(0.05)
    p = ld.LaserParams(kappa=1.0, mu=10.0)
    assert ld.sql_linewidth(p) == pytest.approx(2 * ld.hl_linewidth(p))
    assert ld.sql_linewidth(ld.LaserParams(kappa=6.28e8, mu=1e8)) == pytest.approx(3.14)


def test_rotating_frame_term_is_pure_imaginary_shift():
    params = ld.LaserParams(kappa=1.0, mu=8.0, omega=5.0)
    L_rot = ld.build_liouvillian_sector(params, 1, 60).matrix
    L_lab = ld.build_liouvillian_sector(params, 1, 60, include_rotating_frame=True).matrix
    assert np.allclose(L_lab, L_rot - 1j * 5.0 * np.eye(L_rot.shape[0]))


def test_linewidth_requires_noiseless_gain():
    bad = ld.LaserParams(kappa=1.0, mu=8.0, gain_kind="none")
    with pytest.raises(ValueError, match="noiseless"):
        ld.extract_linewidth(bad, 60, "decay_fit")
    with pytest.raises(ValueError, match="method"):
        ld.extract_linewidth(ld.LaserParams(kappa=1.0, mu=8.0), 60, "spectral")


def test_loss_only_variance_growth_values():
    assert ld.loss_only_variance_growth(25.0, 1.0, 0.04) == pytest.approx(4e-4)
    assert ld.loss_only_variance_growth(25.0, 1.0, 0.0) == 0.0
    with pytest.warns(UserWarning):
        ld.loss_only_variance_growth(4.0, 1.0, 0.5)


def test_loss_only_variance_growth_against_fock_evolution():
    # evolve |sqrt(mu)> under the loss-only sector generators and measure the
    # canonical phase variance growth
    mu, kappa, t = 25.0, 1.0, 0.04
    T = fock.default_truncation(mu)
    psi = fock.coherent_state(np.sqrt(mu), T)
    a = psi.amplitudes
    params = ld.LaserParams(kappa=kappa, mu=mu, gain_kind="none")
    rho_t = np.zeros((T + 1, T + 1), dtype=complex)
    for k in range(T + 1):
        x0 = a[:T + 1 - k] * np.conj(a[k:])
        L = ld.build_liouvillian_sector(params, k, T).matrix
        xt = expm(L * t) @ x0
        idx = np.arange(T + 1 - k)
        rho_t[idx, idx + k] = xt
        if k > 0:
            rho_t[idx + k, idx] = np.conj(xt)
    dm = fock.DensityOperator(T, rho_t)
    v_t = fock.phase_variance(fock.phase_distribution_from_density(dm, 8192))
    v_0 = fock.phase_variance(fock.canonical_phase_distribution(psi, 8192))
    growth = v_t - v_0
    assert growth == pytest.approx(ld.loss_only_variance_growth(mu, kappa, t), rel=0.10)


def test_laser_params_validation():
    with pytest.raises(ValueError):
        ld.LaserParams(kappa=0.0, mu=1.0)
    with pytest.raises(ValueError):
        ld.LaserParams(kappa=1.0, mu=-1.0)
    with pytest.raises(ValueError):
        ld.LaserParams(kappa=1.0, mu=1.0, gain_kind="standard")
