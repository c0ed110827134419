import numpy as np
import pytest

from bosonsim.characterization import (
    CharacterizationDataset,
    UndefinedVisibilityError,
    UnderdeterminedError,
    VisibilityRecord,
    gauge_distance,
    reconstruct_matrix,
    simulate_amplitudes,
    simulate_dataset,
    simulate_hom_visibility,
    visibility_pairs,
)
from bosonsim.rng import hash64
from bosonsim.unitaries import GridDeviceSpec, device_unitary, haar_unitary

HOM_BS = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)


def orbit_distance(block, truth):
    """Gauge distance modulo the global conjugation the data cannot see."""
    return min(gauge_distance(block, truth), gauge_distance(block.conj(), truth))


def test_amplitudes_identity_indicator():
    amp = simulate_amplitudes(np.eye(4, dtype=complex), (0, 2))
    assert np.array_equal(amp, np.array([[1, 0, 0, 0], [0, 0, 1, 0]], dtype=float))


def test_amplitude_rows_normalized():
    u = haar_unitary(9, seed=1)
    amp = simulate_amplitudes(u, (0, 3, 5))
    assert np.allclose((amp**2).sum(axis=1), 1.0, atol=1e-12)


def test_amplitudes_paper_scale_shape():
    u = device_unitary(GridDeviceSpec(seed=12))
    amp = simulate_amplitudes(u, (0, 2, 3))
    assert amp.shape == (3, 35)


def test_amplitude_noise_deterministic():
    u = haar_unitary(5, seed=2)
    a = simulate_amplitudes(u, (0, 1), noise_sigma=0.05, seed=9)
    b = simulate_amplitudes(u, (0, 1), noise_sigma=0.05, seed=9)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, simulate_amplitudes(u, (0, 1)))
    assert (a >= 0).all()


def test_hom_visibility_balanced_splitter():
    assert simulate_hom_visibility(HOM_BS, (0, 1), (0, 1)) == pytest.approx(1.0)


def test_hom_visibility_identity_undefined():
    with pytest.raises(UndefinedVisibilityError):
        simulate_hom_visibility(np.eye(3, dtype=complex), (0, 1), (0, 2))


def test_hom_visibility_matches_direct_formula():
    u = haar_unitary(4, seed=6).matrix
    k, l, i, j = 0, 2, 1, 3
    z1 = u[i, k] * u[j, l]
    z2 = u[i, l] * u[j, k]
    c_dist = abs(z1) ** 2 + abs(z2) ** 2
    expected = (c_dist - abs(z1 + z2) ** 2) / c_dist
    assert simulate_hom_visibility(u, (k, l), (i, j)) == pytest.approx(expected, rel=1e-12)


def test_hom_visibility_gauge_invariant():
    rng = np.random.default_rng(3)
    u = haar_unitary(5, seed=8).matrix
    d_in = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))
    d_out = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))
    v1 = simulate_hom_visibility(u, (0, 2), (1, 4))
    v2 = simulate_hom_visibility(d_out @ u @ d_in, (0, 2), (1, 4))
    assert v1 == pytest.approx(v2, abs=1e-12)


def test_hom_visibility_pair_validation():
    with pytest.raises(ValueError, match="distinct"):
        simulate_hom_visibility(HOM_BS, (0, 0), (0, 1))


def test_visibility_pairs_strategies():
    std = visibility_pairs((0, 2, 3), 6, "standard")
    assert all(k != l and i != j for k, l, i, j in std)
    exh = visibility_pairs((0, 2, 3), 6, "exhaustive")
    assert len(exh) >= len(std)
    with pytest.raises(ValueError, match="strategy"):
        visibility_pairs((0, 1), 6, "bogus")


@pytest.mark.parametrize("rows,cols", [(2, 3), (3, 4)])
def test_roundtrip_noiseless_small_grids(rows, cols):
    u = device_unitary(GridDeviceSpec(grid_rows=rows, grid_cols=cols, segments=10, seed=rows * 10 + cols))
    probes = (0, 1, 2)
    ds = simulate_dataset(u, probes)
    block, report = reconstruct_matrix(ds)
    truth = u.matrix[:, probes].T
    assert orbit_distance(block, truth) <= 1e-6
    assert report.sign_conflicts == 0
    assert report.residual_max < 1e-9


def test_roundtrip_noiseless_paper_scale():
    u = device_unitary(GridDeviceSpec(seed=4242))
    probes = (0, 2, 3)
    ds = simulate_dataset(u, probes)
    block, report = reconstruct_matrix(ds)
    truth = u.matrix[:, probes].T
    assert block.shape == (3, 35)
    assert orbit_distance(block, truth) <= 1e-6
    # moduli are copied from the amplitude table, not fitted (ulp-level
    # agreement: only |exp(i phi)| rounding separates them)
    assert np.allclose(np.abs(block), ds.amplitudes, rtol=1e-14, atol=0)


def test_roundtrip_noisy_median():
    dists = []
    for t in range(6):
        u = device_unitary(GridDeviceSpec(seed=hash64(777, t)))
        probes = (0, 2, 3)
        ds = simulate_dataset(u, probes, visibility_sigma=0.01, seed=hash64(888, t))
        block, _ = reconstruct_matrix(ds)
        dists.append(orbit_distance(block, u.matrix[:, probes].T))
    assert np.median(dists) <= 0.05


def test_reconstruction_underdetermined_names_modes():
    u = device_unitary(GridDeviceSpec(grid_rows=2, grid_cols=3, segments=8, seed=5))
    probes = (0, 1, 2)
    ds = simulate_dataset(u, probes)
    hole = 4  # drop every visibility touching output mode 4
    ds.visibilities = [r for r in ds.visibilities if hole not in (r.out_i, r.out_j)]
    with pytest.raises(UnderdeterminedError) as err:
        reconstruct_matrix(ds)
    assert any(j == hole for _, j in err.value.missing)
    assert str(hole) in str(err.value)


def test_reconstruction_rejects_unknown_input_port():
    u = haar_unitary(4, seed=3)
    ds = simulate_dataset(u, (0, 1))
    ds.visibilities.append(VisibilityRecord(0, 3, 0, 1, 0.2))
    with pytest.raises(ValueError, match="non-probed"):
        reconstruct_matrix(ds)


def test_dataset_validation():
    with pytest.raises(ValueError, match=r"\[-1, 1\]"):
        CharacterizationDataset(
            probe_inputs=(0, 1),
            amplitudes=np.ones((2, 3)),
            visibilities=[VisibilityRecord(0, 1, 0, 1, 1.5)],
        )
    with pytest.raises(ValueError, match="non-negative"):
        CharacterizationDataset(
            probe_inputs=(0, 1), amplitudes=-np.ones((2, 3)), visibilities=[]
        )


def test_gauge_distance_zero_on_same_matrix():
    a = haar_unitary(6, seed=9).matrix[:3]
    assert gauge_distance(a, a) <= 1e-12


def test_gauge_distance_zero_on_gauge_orbit():
    rng = np.random.default_rng(4)
    a = haar_unitary(8, seed=10).matrix[:3]
    d_in = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    d_out = np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
    b = (d_in[:, None] * a) * d_out[None, :]
    assert gauge_distance(a, b) <= 1e-9
    assert gauge_distance(b, a) <= 1e-9


def test_gauge_distance_bounded_by_perturbation():
    rng = np.random.default_rng(14)
    for trial in range(5):
        a = haar_unitary(7, seed=trial).matrix[:3]
        e = 0.01 * (rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7)))
        d = gauge_distance(a, a + e)
        assert d <= np.linalg.norm(e) + 1e-12


def test_gauge_distance_symmetric():
    a = haar_unitary(6, seed=20).matrix[:2]
    b = haar_unitary(6, seed=21).matrix[:2]
    assert abs(gauge_distance(a, b) - gauge_distance(b, a)) <= 1e-9


def test_gauge_distance_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        gauge_distance(np.ones((2, 3)), np.ones((3, 2)))


def test_conjugate_block_outside_phase_orbit():
    # the global-conjugation ambiguity is real: conj(B) is generally not
    # reachable by row/column phases alone
    u = haar_unitary(6, seed=33).matrix[:3]
    assert gauge_distance(u, u.conj()) > 0.1
    assert orbit_distance(u, u.conj()) <= 1e-9
