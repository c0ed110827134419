"""Acceptance suite: one test per release criterion, one printed verdict
line each (run with ``pytest tests/test_acceptance.py -v -s``).

Every tolerance is fixed here, derived either from known closed forms or
from the pilot Monte-Carlo noted next to it.  Criterion 8's distance
floor is asserted exactly as stated and marked strict-xfail: at 570,312
events spread over 6,545 outcomes the total-variation distance between
the empirical and exact distributions has a multinomial sampling floor
of about 0.035 (see the criterion's test for the derivation), so 0.03
is not reachable at that event count by any correct sampler.
"""

import numpy as np
import pytest

from bosonsim.characterization import gauge_distance, reconstruct_matrix, simulate_dataset
from bosonsim.combinat import count_collision_free, count_full_space, hypercube_node_count
from bosonsim.distributions import (
    boson_distribution,
    distinguishable_distribution,
    empirical_distribution,
    total_variation_distance,
    uniform_distribution,
)
from bosonsim.permanent import permanent_exact, permanent_naive
from bosonsim.rng import hash64
from bosonsim.sampling import clifford_clifford_sample, sample_from_distribution
from bosonsim.unitaries import (
    GridDeviceSpec,
    device_ensemble,
    device_unitary,
    haar_convergence_stats,
    haar_unitary,
)
from bosonsim.validation import likelihood_ratio_counter, rne_counter

PORTS = (0, 2, 3)  # the experiment's injection ports 1, 3, 4


def verdict(criterion: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_1_counting_identities():
    cf = count_collision_free(35, 3)
    full = count_full_space(35, 3)
    cube = hypercube_node_count(35, 3)
    ok = (cf, full, cube) == (6545, 7770, 42875)
    verdict("criterion 1 (counting identities)", ok,
            f"C(35,3)={cf}, C(37,3)={full}, 35^3={cube}")
    assert ok


def test_criterion_2_permanent_oracle_equivalence():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for case in range(500):
        n = 2 + case % 6
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        expected = permanent_naive(a)
        got = permanent_exact(a)
        rel = abs(got - expected) / (1 + abs(expected))
        worst = max(worst, rel)
    ok = worst <= 1e-10
    verdict("criterion 2 (permanent oracle, 500 matrices n=2..7)", ok,
            f"worst relative deviation {worst:.3e} <= 1e-10")
    assert ok


def test_criterion_3_probability_conservation():
    worst = 0.0
    count = 0
    for m in range(4, 9):
        for n in (2, 3):
            for trial in range(5):
                u = haar_unitary(m, seed=hash64(m * 100 + n, trial))
                d = boson_distribution(u, tuple(range(n)), support="full", renormalize=False)
                worst = max(worst, abs(d.support_mass - 1.0))
                count += 1
    ok = worst <= 1e-8 and count == 50
    verdict("criterion 3 (probability conservation, 50 Haar unitaries)", ok,
            f"worst |sum - 1| = {worst:.3e} <= 1e-8")
    assert ok


def test_criterion_4_hom_suppression():
    bs = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
    p_coincidence = boson_distribution(bs, (0, 1), support="full").probability((0, 1))
    stream = clifford_clifford_sample(bs, (0, 1), 10_000, seed=99)
    bad = int(np.sum((stream.events[:, 0] == 0) & (stream.events[:, 1] == 1)))
    ok = p_coincidence < 1e-12 and bad == 0
    verdict("criterion 4 (HOM suppression)", ok,
            f"P(1,1) = {p_coincidence:.2e} < 1e-12, {bad}/10000 coincidence draws")
    assert ok


def test_criterion_5_sampler_correctness():
    m, n, count = 7, 3, 200_000
    u = haar_unitary(m, seed=2718)
    exact = boson_distribution(u, PORTS, support="full")
    direct = clifford_clifford_sample(u, PORTS, count, seed=31)
    inverted = sample_from_distribution(exact, count, seed=32)
    tvd_direct = total_variation_distance(empirical_distribution(direct, m, n, "full"), exact)
    tvd_inverted = total_variation_distance(empirical_distribution(inverted, m, n, "full"), exact)
    ok = tvd_direct < 0.02 and tvd_inverted < 0.02
    verdict("criterion 5 (sampler correctness, m=7 n=3 N=2e5)", ok,
            f"TVD direct {tvd_direct:.4f}, inversion {tvd_inverted:.4f}, bound 0.02")
    assert ok


def test_criterion_6_validation_discrimination():
    m, n, events, seeds = 35, 3, 1000, 10
    rne_ok = 0
    lrt_ok = 0
    for s in range(seeds):
        u = haar_unitary(m, seed=hash64(600, s))
        p_ind = boson_distribution(u, PORTS)
        q_dis = distinguishable_distribution(u, PORTS)
        unif = uniform_distribution(m, n)
        boson = sample_from_distribution(p_ind, events, seed=hash64(601, s))
        uniform = sample_from_distribution(unif, events, seed=hash64(602, s))
        disting = sample_from_distribution(q_dis, events, seed=hash64(603, s))
        if rne_counter(boson, u, PORTS).final > 0 and rne_counter(uniform, u, PORTS).final < 0:
            rne_ok += 1
        lrt_b = likelihood_ratio_counter(boson, p_ind, q_dis).final
        lrt_d = likelihood_ratio_counter(disting, p_ind, q_dis).final
        if lrt_b > 0 and lrt_d < 0:
            lrt_ok += 1
    ok = rne_ok >= 9 and lrt_ok >= 9
    verdict("criterion 6 (validation discrimination, 1000 events)", ok,
            f"RNE separated {rne_ok}/10 seeds, LRT separated {lrt_ok}/10 seeds, need >= 9")
    assert ok


def _orbit_distance(block, truth):
    # the dataset constrains only cosines of phase differences, so the
    # reconstruction is defined up to one global complex conjugation
    return min(gauge_distance(block, truth), gauge_distance(block.conj(), truth))


def test_criterion_7_characterization_round_trip():
    u = device_unitary(GridDeviceSpec(seed=4242))
    truth = u.matrix[:, PORTS].T
    block, _ = reconstruct_matrix(simulate_dataset(u, PORTS))
    noiseless = _orbit_distance(block, truth)

    noisy = []
    for t in range(20):
        ut = device_unitary(GridDeviceSpec(seed=hash64(700, t)))
        ds = simulate_dataset(ut, PORTS, visibility_sigma=0.01, seed=hash64(701, t))
        bt, _ = reconstruct_matrix(ds)
        noisy.append(_orbit_distance(bt, ut.matrix[:, PORTS].T))
    median = float(np.median(noisy))
    ok = noiseless <= 1e-6 and median <= 0.05
    verdict("criterion 7 (characterization round trip, 3x35)", ok,
            f"noiseless {noiseless:.2e} <= 1e-6, noisy median {median:.4f} <= 0.05")
    assert ok


@pytest.fixture(scope="module")
def paper_scale_pipeline(tmp_path_factory):
    """The full synthetic pipeline, driven through the CLI end to end:
    generate a 35-mode unitary, draw 570,312 boson samples, post-select
    collision-free events, compare empirical vs exact."""
    import json

    from bosonsim.cli import main

    workdir = tmp_path_factory.mktemp("paper_scale")
    upath = workdir / "u.json"
    assert main(["gen-unitary", "--mode", "haar", "--m", "35",
                 "--seed", "2019", "--out", str(upath)]) == 0
    rundir = workdir / "run"
    assert main(["run", "--unitary", str(upath), "--input", "1,3,4",
                 "--samples", "570312", "--sampler", "boson", "--seed", "2019",
                 "--collision-free-only", "--out-dir", str(rundir)]) == 0
    summary = json.loads((rundir / "summary.json").read_text())
    return {
        "retention": summary["retention_fraction"],
        "events": summary["samples_recorded"],
        "fidelity": summary["fidelity"],
        "tvd": summary["tvd"],
    }


def test_criterion_8_paper_scale_fidelity(paper_scale_pipeline):
    p = paper_scale_pipeline
    # multinomial floor for the TVD of N events over K cells:
    # E[D] ~ 0.5 * sqrt(2/(pi*N)) * sum_i sqrt(p_i) ~ 0.035-0.040 here,
    # so 0.05 is the honest demonstrable ceiling at this event count
    ok = p["fidelity"] >= 0.995 and p["tvd"] <= 0.05
    verdict("criterion 8 (paper-scale pipeline, 570312 events)", ok,
            f"F = {p['fidelity']:.5f} >= 0.995; D = {p['tvd']:.5f} "
            f"(<= 0.05 sampling floor; the 0.03 target is tested separately)")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="TVD floor: 570,312 multinomial draws over 6,545 outcomes give "
    "E[D] ~ 0.5*sqrt(2/(pi*N))*sum sqrt(p_i) ~ 0.035 after collision-free "
    "post-selection (~0.85 retention); a 0.03 ceiling is below the sampling "
    "noise floor at this event count for every seed",
)
def test_criterion_8_tvd_floor_as_stated(paper_scale_pipeline):
    p = paper_scale_pipeline
    verdict("criterion 8 (D <= 0.03 as stated)", p["tvd"] <= 0.03,
            f"D = {p['tvd']:.5f} vs 0.03 at {p['events']} post-selected events")
    assert p["tvd"] <= 0.03


def test_criterion_9_haar_convergence_trend():
    # weak per-segment coupling so mixing depth, not a single segment,
    # controls convergence; the default range saturates by L=5
    coupling = (0.15, 0.45)
    means = {}
    for segments in (1, 5, 20):
        vals = []
        for rep in range(10):
            spec = GridDeviceSpec(segments=segments, coupling_range=coupling,
                                  seed=hash64(900 + segments, rep))
            vals.append(haar_convergence_stats(device_ensemble(spec, 10)).ks_statistic)
        means[segments] = float(np.mean(vals))
    ok = means[1] >= means[5] >= means[20]
    verdict("criterion 9 (Haar convergence trend)", ok,
            f"mean KS: L=1 {means[1]:.4f} >= L=5 {means[5]:.4f} >= L=20 {means[20]:.4f}")
    assert ok
