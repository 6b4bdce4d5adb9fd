import io
import math

import numpy as np
import pytest

from colorevo import (
    NamingSystem,
    accuracy,
    analyze,
    complexity,
    default_beta_schedule,
    fit_tradeoff,
    gnid,
    ib_frontier,
    inefficiency_epsilon,
    min_gnid_to_set,
    mode_map,
    mutual_information,
)
from colorevo.errors import ValidationError
from colorevo.grid import NUM_CHIPS
from colorevo.ib import IBCurve, IBPoint
from colorevo.randmodel import kernel_system, sample_rm_system


def mi_oracle(joint):
    """Term-by-term direct summation, base 2."""
    joint = np.asarray(joint, dtype=float)
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    total = 0.0
    for i in range(joint.shape[0]):
        for j in range(joint.shape[1]):
            p = joint[i, j]
            if p > 0:
                total += p * math.log2(p / (px[i] * py[j]))
    return total


def random_system(rng, k=4, n=NUM_CHIPS):
    enc = rng.random((k, n))
    enc /= enc.sum(0, keepdims=True)
    return NamingSystem(enc)


class TestMutualInformation:
    def test_independent_is_zero(self):
        joint = np.outer([0.3, 0.7], [0.2, 0.5, 0.3])
        assert mutual_information(joint) == pytest.approx(0.0, abs=1e-12)

    def test_perfect_one_bit_channel(self):
        assert mutual_information(np.array([[0.5, 0.0], [0.0, 0.5]])) == pytest.approx(1.0)

    def test_matches_direct_summation_oracle(self):
        rng = np.random.default_rng(42)
        joint = rng.random((3, 3))
        joint /= joint.sum()
        assert mutual_information(joint) == pytest.approx(mi_oracle(joint), abs=1e-12)

    def test_oracle_agreement_over_random_joints(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            shape = (rng.integers(2, 6), rng.integers(2, 6))
            joint = rng.random(shape)
            # sprinkle structural zeros
            joint[rng.random(shape) < 0.2] = 0.0
            if joint.sum() == 0:
                continue
            joint /= joint.sum()
            assert mutual_information(joint) == pytest.approx(
                mi_oracle(joint), abs=1e-12
            )

    def test_validation_errors(self):
        with pytest.raises(ValidationError):
            mutual_information(np.array([[0.5, -0.1], [0.3, 0.3]]))
        with pytest.raises(ValidationError):
            mutual_information(np.array([[0.5, 0.2], [0.1, 0.1]]))


class TestComplexityAccuracy:
    def test_one_word_system_is_zero(self, grid, meaning):
        one = NamingSystem(np.ones((1, NUM_CHIPS)))
        assert complexity(one, grid) == 0.0
        assert accuracy(one, grid, meaning) == 0.0

    def test_identical_columns_are_zero(self, grid):
        col = np.array([0.2, 0.5, 0.3])
        enc = np.tile(col[:, None], (1, NUM_CHIPS))
        assert complexity(NamingSystem(enc), grid) == pytest.approx(0.0, abs=1e-12)

    def test_identity_encoder_is_prior_entropy(self, grid):
        ident = NamingSystem(np.eye(NUM_CHIPS))
        assert complexity(ident, grid) == pytest.approx(math.log2(NUM_CHIPS), abs=1e-9)

    def test_accuracy_bounded_by_meaning_channel(self, grid, meaning):
        ident = NamingSystem(np.eye(NUM_CHIPS))
        channel_info = accuracy(ident, grid, meaning)
        rng = np.random.default_rng(5)
        for k in (2, 5, 30):
            sys_ = random_system(rng, k)
            assert accuracy(sys_, grid, meaning) < channel_info

    def test_accuracy_matches_chain_rule_oracle(self):
        """2 words x 4 chips: brute-force the full joint over (w, u)."""
        from types import SimpleNamespace

        prior = np.array([0.1, 0.2, 0.3, 0.4])
        like = np.array(
            [
                [0.7, 0.1, 0.1, 0.1],
                [0.1, 0.7, 0.1, 0.1],
                [0.1, 0.1, 0.7, 0.1],
                [0.1, 0.1, 0.1, 0.7],
            ]
        )
        enc = np.array([[0.9, 0.6, 0.2, 0.0], [0.1, 0.4, 0.8, 1.0]])
        joint_wu = np.zeros((2, 4))
        for w in range(2):
            for u in range(4):
                joint_wu[w, u] = sum(
                    prior[c] * enc[w, c] * like[c, u] for c in range(4)
                )
        expected = mi_oracle(joint_wu)
        grid_stub = SimpleNamespace(prior=prior, chips=[None] * 4)
        mm_stub = SimpleNamespace(likelihood=like)
        assert accuracy(NamingSystem(enc), grid_stub, mm_stub) == pytest.approx(
            expected, abs=1e-12
        )

    def test_dimension_mismatch_raises(self, grid):
        with pytest.raises(ValidationError):
            complexity(NamingSystem(np.ones((2, 5)) / 2), grid)

    def test_analysis_invariants_hold_for_random_systems(self, grid, meaning):
        rng = np.random.default_rng(11)
        for _ in range(20):
            k = int(rng.integers(1, 12))
            pt = analyze(random_system(rng, k), grid, meaning)
            assert pt.complexity >= 0.0
            assert pt.accuracy >= 0.0
            assert pt.accuracy <= pt.complexity + 1e-6


class TestNamingSystemIO:
    def test_tsv_round_trip_is_bit_identical(self, grid, tmp_path):
        rng = np.random.default_rng(3)
        sys_ = random_system(rng, 6)
        path = tmp_path / "sys.tsv"
        sys_.to_tsv(str(path), grid_id=grid.grid_id)
        loaded, gid = NamingSystem.from_tsv(str(path))
        assert gid == grid.grid_id
        assert np.array_equal(loaded.encoder, sys_.encoder)

    def test_column_normalization_enforced(self):
        bad = np.ones((3, NUM_CHIPS))
        with pytest.raises(ValidationError):
            NamingSystem(bad)


class TestFrontier:
    @pytest.fixture(scope="class")
    def tiny(self, tiny_domain):
        from types import SimpleNamespace

        labs, prior, like, sigma_sq = tiny_domain
        grid = SimpleNamespace(prior=prior, chips=[None] * 6)
        mm = SimpleNamespace(likelihood=like)
        return grid, mm

    def test_beta_one_endpoint_is_degenerate(self, tiny):
        grid, mm = tiny
        curve = ib_frontier(grid, mm, np.geomspace(64, 1.0, 40), max_words=6)
        assert curve.points[-1].complexity == pytest.approx(0.0, abs=1e-2)

    def test_frontier_monotone_in_complexity(self, tiny):
        grid, mm = tiny
        curve = ib_frontier(grid, mm, default_beta_schedule(120, beta_max=256.0), max_words=6)
        order = np.argsort(curve.complexities())
        acc = curve.accuracies()[order]
        assert np.all(np.diff(acc) >= -1e-9)

    def test_high_beta_accuracy_reaches_meaning_channel(self, tiny, tiny_domain):
        """Exhaustive 3-word deterministic encoders lower-bound the frontier."""
        grid, mm = tiny
        labs, prior, like, _ = tiny_domain
        best = 0.0
        for assign in np.ndindex(*(3,) * 6):
            enc = np.zeros((3, 6))
            enc[list(assign), np.arange(6)] = 1.0
            joint = (enc * prior[None, :]) @ like
            best = max(best, mi_oracle(joint))
        curve = ib_frontier(grid, mm, default_beta_schedule(80, beta_max=4096.0), max_words=3)
        top = max(p.accuracy for p in curve.points)
        assert top >= best - 1e-3
        # chips are paired, so 3 words capture the full meaning channel
        ident = NamingSystem(np.eye(6))
        channel = accuracy(ident, grid, mm)
        assert top == pytest.approx(channel, abs=1e-3)

    def test_schedule_validation(self, tiny):
        grid, mm = tiny
        with pytest.raises(ValidationError):
            ib_frontier(grid, mm, [1.0, 2.0, 4.0])
        with pytest.raises(ValidationError):
            ib_frontier(grid, mm, [4.0, 2.0, 0.5])


class TestEpsilon:
    @pytest.fixture(scope="class")
    def tiny_curve(self, tiny_domain):
        from types import SimpleNamespace

        labs, prior, like, _ = tiny_domain
        grid = SimpleNamespace(prior=prior, chips=[None] * 6)
        mm = SimpleNamespace(likelihood=like)
        curve = ib_frontier(
            grid, mm, default_beta_schedule(400, beta_max=1024.0), max_words=6,
            keep_encoders=50,
        )
        return grid, mm, curve

    def test_optimal_encoder_has_near_zero_epsilon(self, tiny_curve):
        grid, mm, curve = tiny_curve
        assert curve.encoders
        for beta, enc in curve.encoders.items():
            eps = inefficiency_epsilon(enc, curve, grid, mm)
            assert eps <= 1e-6

    def test_epsilon_nonnegative_for_random_systems(self, tiny_curve):
        grid, mm, curve = tiny_curve
        rng = np.random.default_rng(9)
        for _ in range(25):
            sys_ = random_system(rng, int(rng.integers(1, 6)), n=6)
            assert inefficiency_epsilon(sys_, curve, grid, mm) >= 0.0

    def test_epsilon_stable_under_schedule_refinement(self, tiny_domain):
        from types import SimpleNamespace

        labs, prior, like, _ = tiny_domain
        grid = SimpleNamespace(prior=prior, chips=[None] * 6)
        mm = SimpleNamespace(likelihood=like)
        coarse = ib_frontier(grid, mm, default_beta_schedule(300, beta_max=1024.0), max_words=6)
        fine = ib_frontier(grid, mm, default_beta_schedule(600, beta_max=1024.0), max_words=6)
        rng = np.random.default_rng(17)
        for _ in range(10):
            sys_ = random_system(rng, 3, n=6)
            e1 = inefficiency_epsilon(sys_, coarse, grid, mm)
            e2 = inefficiency_epsilon(sys_, fine, grid, mm)
            assert abs(e1 - e2) < 1e-3

    def test_vertical_mode_exposed(self, tiny_curve):
        grid, mm, curve = tiny_curve
        rng = np.random.default_rng(21)
        sys_ = random_system(rng, 3, n=6)
        v = inefficiency_epsilon(sys_, curve, grid, mm, mode="vertical")
        assert v >= 0.0

    def test_empty_curve_rejected(self, tiny_curve):
        grid, mm, _ = tiny_curve
        empty = IBCurve(betas=np.array([]), points=[])
        with pytest.raises(ValidationError):
            fit_tradeoff(random_system(np.random.default_rng(0), 2, n=6), empty, grid, mm)


class TestGnid:
    def test_self_distance_zero_for_deterministic(self, grid):
        rng = np.random.default_rng(2)
        det = NamingSystem.deterministic(rng.integers(0, 5, NUM_CHIPS), 5)
        assert gnid(det, det, grid) == pytest.approx(0.0, abs=1e-12)

    def test_label_permutation_invariance(self, grid):
        rng = np.random.default_rng(4)
        for _ in range(10):
            sys_ = random_system(rng, 6)
            perm = rng.permutation(6)
            permuted = NamingSystem(sys_.encoder[perm])
            assert gnid(sys_, permuted, grid) == pytest.approx(0.0, abs=1e-9)

    def test_symmetry(self, grid):
        rng = np.random.default_rng(6)
        for _ in range(10):
            a = random_system(rng, 4)
            b = random_system(rng, 7)
            assert abs(gnid(a, b, grid) - gnid(b, a, grid)) <= 1e-9

    def test_independent_systems_reach_one(self, grid):
        det = NamingSystem.deterministic(
            (np.arange(NUM_CHIPS) < NUM_CHIPS // 2).astype(int), 2
        )
        uniform = NamingSystem(np.full((2, NUM_CHIPS), 0.5))
        joint = (det.encoder * grid.prior[None, :]) @ uniform.encoder.T
        assert mutual_information(joint) == pytest.approx(0.0, abs=1e-12)
        assert gnid(det, uniform, grid) == pytest.approx(1.0, abs=1e-9)

    def test_both_degenerate_defined_as_zero(self, grid):
        a = NamingSystem(np.ones((1, NUM_CHIPS)))
        b = NamingSystem(np.vstack([np.ones(NUM_CHIPS), np.zeros(NUM_CHIPS)]))
        assert gnid(a, b, grid) == 0.0

    def test_min_gnid_brute_force(self, grid):
        rng = np.random.default_rng(8)
        sys_ = random_system(rng, 4)
        refs = [random_system(rng, k) for k in (3, 4, 5)]
        best, idx = min_gnid_to_set(sys_, refs, grid)
        all_d = [gnid(sys_, r, grid) for r in refs]
        assert best == pytest.approx(min(all_d), abs=0)
        assert idx == int(np.argmin(all_d))

    def test_min_gnid_finds_self(self, grid):
        rng = np.random.default_rng(10)
        sys_ = NamingSystem.deterministic(rng.integers(0, 4, NUM_CHIPS), 4)
        refs = [random_system(rng, 4), sys_, random_system(rng, 4)]
        best, idx = min_gnid_to_set(sys_, refs, grid)
        assert best == pytest.approx(0.0, abs=1e-12)
        assert idx == 1

    def test_empty_refs_rejected(self, grid):
        with pytest.raises(ValidationError):
            min_gnid_to_set(random_system(np.random.default_rng(0), 3), [], grid)


class TestModeMap:
    def test_deterministic_encoder_recovers_support(self, grid):
        rng = np.random.default_rng(12)
        assign = rng.integers(0, 6, NUM_CHIPS)
        det = NamingSystem.deterministic(assign, 6)
        mmap = mode_map(det)
        assert np.array_equal(mmap.words, assign)
        assert np.all(mmap.band == 2)

    def test_uniform_column_tie_breaks_to_word_zero(self):
        enc = np.full((4, NUM_CHIPS), 0.25)
        mmap = mode_map(NamingSystem(enc))
        assert np.all(mmap.words == 0)
        assert np.all(mmap.band == 0)  # 0.25 < 0.3 threshold

    def test_two_prototype_system_partitions_by_nearest(self, grid):
        protos = [0, 200]
        sys_ = kernel_system(grid, protos, eta=0.05)
        mmap = mode_map(sys_)
        expected = np.argmin(grid.dist_sq[protos, :], axis=0)
        assert np.array_equal(mmap.words, expected)

    def test_band_thresholds(self):
        enc = np.zeros((2, NUM_CHIPS))
        enc[0, :] = 0.8
        enc[1, :] = 0.2
        enc[0, :100] = 0.5
        enc[1, :100] = 0.5
        enc[0, 100:150] = 0.25
        enc[1, 100:150] = 0.75
        mmap = mode_map(NamingSystem(enc))
        assert np.all(mmap.band[:100] == 1)
        assert np.all(mmap.band[100:150] == 2)
        assert np.all(mmap.band[150:] == 2)


class TestCurveIO:
    def test_csv_round_trip(self, tmp_path):
        curve = IBCurve(
            betas=np.array([4.0, 2.0, 1.0]),
            points=[
                IBPoint(complexity=3.0, accuracy=2.0),
                IBPoint(complexity=1.5, accuracy=1.2),
                IBPoint(complexity=0.0, accuracy=0.0),
            ],
        )
        path = tmp_path / "curve.csv"
        curve.to_csv(str(path))
        loaded = IBCurve.from_csv(str(path))
        assert np.array_equal(loaded.betas, curve.betas)
        assert loaded.points[1].complexity == 1.5

    def test_interp_passes_through_origin(self):
        curve = IBCurve(
            betas=np.array([2.0]),
            points=[IBPoint(complexity=2.0, accuracy=1.0)],
        )
        assert curve.interp_accuracy(0.0) == 0.0
        assert curve.interp_accuracy(1.0) == pytest.approx(0.5)
