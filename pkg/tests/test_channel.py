import numpy as np
import pytest

from mimopc import NetworkConfig, correlation_stack, local_scattering, realize
from mimopc.channel import uncorrelated


def test_local_scattering_is_hermitian_psd_with_trace():
    R = local_scattering(2.5, 0.7, np.radians(10.0), 16)
    assert R.shape == (16, 16)
    assert np.allclose(R, R.conj().T)
    w = np.linalg.eigvalsh(R)
    assert w.min() >= -1e-10
    assert np.trace(R).real == pytest.approx(2.5 * 16)


def test_local_scattering_small_asd_approaches_rank_one():
    # with no angular spread the matrix tends to the LoS steering dyad
    R = local_scattering(1.0, 0.3, 1e-9, 8)
    w = np.sort(np.linalg.eigvalsh(R))
    assert w[-1] == pytest.approx(8.0, rel=1e-6)
    assert abs(w[-2]) < 1e-6


def test_local_scattering_decorrelates_with_asd():
    narrow = local_scattering(1.0, 0.3, np.radians(1.0), 8)
    wide = local_scattering(1.0, 0.3, np.radians(50.0), 8)
    assert abs(wide[0, 4]) < abs(narrow[0, 4])


def test_uncorrelated_is_scaled_identity():
    R = uncorrelated(3.0, 5)
    assert np.allclose(R, 3.0 * np.eye(5))


def test_correlation_stack_models():
    cfg = NetworkConfig(num_cells=4, users_per_cell=2, antennas=6, seed=0)
    r = realize(cfg, 0)
    Rc = correlation_stack(r, cfg, 1, model="correlated")
    Ru = correlation_stack(r, cfg, 1, model="uncorrelated")
    assert Rc.shape == Ru.shape == (4, 2, 6, 6)
    for lp in range(4):
        for k in range(2):
            beta = r.beta[1, lp, k]
            assert np.trace(Rc[lp, k]).real == pytest.approx(beta * 6)
            assert np.allclose(Ru[lp, k], beta * np.eye(6))
    with pytest.raises(ValueError):
        correlation_stack(r, cfg, 0, model="bogus")
