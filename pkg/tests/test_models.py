import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcpd import (
    InvalidArgumentError,
    ProbabilitySequence,
    block_matrix,
    erdos_renyi_matrix,
    ground_truth,
    hard_instance_detect,
    hard_instance_localize,
    sample_mirgram,
)


def test_constant_sequence_truth():
    q = ProbabilitySequence.constant(erdos_renyi_matrix(5, 0.3), 12)
    gt = ground_truth(q)
    assert gt.signal == 0 and gt.cushion == 12 and gt.n_change_points == 0


def test_two_segment_truth():
    q = ProbabilitySequence.from_segments([(erdos_renyi_matrix(6, 0.5), 4), (erdos_renyi_matrix(6, 0.1), 10)])
    gt = ground_truth(q)
    assert gt.cushion == 4
    assert gt.sparsity == 0.5
    # 0.4 (J - I) on 6 nodes: top eigenvalue 0.4 * 5
    assert gt.signal == pytest.approx(2.0, rel=1e-9)
    assert gt.pop_d == pytest.approx(3.0)
    assert gt.pop_frakd == pytest.approx(2.5)
    assert gt.pop_frakd <= gt.pop_d


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.01, 1.0), seed=st.integers(0, 10**6))
def test_scaling_homogeneity(c, seed):
    r = np.random.default_rng(seed)
    a, b = r.random((2, 7, 7))
    mats = [np.triu(m, 1) + np.triu(m, 1).T for m in (a, b)]
    q = ProbabilitySequence(tuple(mats), (3,), 9)
    gt, gs = ground_truth(q), ground_truth(q.scaled(c))
    assert gs.sparsity == pytest.approx(c * gt.sparsity)
    assert gs.signal == pytest.approx(c * gt.signal, rel=1e-8)
    assert gs.cushion == gt.cushion


def test_validation_errors():
    er = erdos_renyi_matrix(4, 0.2)
    with pytest.raises(InvalidArgumentError):
        ProbabilitySequence((er, er), (2,), 5)  # identical neighbours
    with pytest.raises(InvalidArgumentError):
        ProbabilitySequence((er, 0.5 * er), (5,), 5)  # tau must be < T
    with pytest.raises(InvalidArgumentError):
        ProbabilitySequence((er + np.eye(4) * 0.1,), (), 3)  # diagonal
    with pytest.raises(InvalidArgumentError):
        ProbabilitySequence((2 * er + 0.7,), (), 3)


def test_from_layers_roundtrip():
    a, b = erdos_renyi_matrix(4, 0.2), erdos_renyi_matrix(4, 0.6)
    q = ProbabilitySequence.from_layers(np.stack([a, a, b, b, b, a]))
    assert q.change_points == (2, 5) and q.K == 2
    np.testing.assert_array_equal(q.dense()[2], b)


def test_block_matrix():
    q = block_matrix([2, 3], [[0.5, 0.1], [0.1, 0.9]])
    assert q.shape == (5, 5) and q[0, 1] == 0.5 and q[0, 4] == 0.1 and q[3, 4] == 0.9
    assert np.all(np.diag(q) == 0)


def test_sampler_extremes():
    zero = ProbabilitySequence.constant(np.zeros((5, 5)), 4)
    assert not sample_mirgram(zero, 1).any()
    full = ProbabilitySequence.constant(erdos_renyi_matrix(5, 1.0), 4)
    np.testing.assert_array_equal(sample_mirgram(full, 1), np.broadcast_to(erdos_renyi_matrix(5, 1.0), (4, 5, 5)))


def test_sampler_edge_frequency():
    n, T, p = 200, 50, 0.3
    seq = sample_mirgram(ProbabilitySequence.constant(erdos_renyi_matrix(n, p), T), 7)
    pairs = T * n * (n - 1) / 2
    freq = np.triu(seq, 1).sum() / pairs
    assert abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / pairs)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), p=st.floats(0, 1))
def test_sampler_output_invariants(seed, p):
    other = (p + 0.5) % 1.0
    q = ProbabilitySequence.from_segments([(erdos_renyi_matrix(6, p), 2), (erdos_renyi_matrix(6, other), 5)])
    seq = sample_mirgram(q, seed)
    assert seq.dtype == np.uint8 and set(np.unique(seq)) <= {0, 1}
    np.testing.assert_array_equal(seq, seq.transpose(0, 2, 1))
    assert not np.diagonal(seq, axis1=1, axis2=2).any()
    np.testing.assert_array_equal(seq, sample_mirgram(q, seed))
    assert ground_truth(q).n_change_points == q.K == 1


def test_hard_detect_zero_alpha_is_constant():
    q = hard_instance_detect(10, 20, 5, 0.3, 0.0, seed=1)
    assert q.K == 0


def test_hard_detect_entries_and_spectrum():
    n, rho, alpha = 40, 0.2, 0.5
    q = hard_instance_detect(n, 30, 10, rho, alpha, seed=4)
    theta1, theta0 = q.matrices
    assert q.change_points == (10,)
    off = theta1[~np.eye(n, dtype=bool)]
    assert set(np.round(off, 12)) <= {round(rho * (1 - alpha), 12), round(rho * (1 + alpha), 12)}
    # alpha rho (UU^T - I): one eigenvalue alpha rho (n - 1), the rest -alpha rho
    eig = np.sort(np.linalg.eigvalsh(theta1 - theta0))
    assert eig[-1] == pytest.approx(alpha * rho * (n - 1), rel=1e-10)
    np.testing.assert_allclose(eig[:-1], -alpha * rho, atol=1e-10)


def test_hard_detect_out_of_range_names_parameters():
    with pytest.raises(InvalidArgumentError, match=r"alpha=1\.5, rho=0\.5"):
        hard_instance_detect(6, 10, 3, 0.5, 1.5, seed=0)


@settings(max_examples=15, deadline=None)
@given(a1=st.floats(0.05, 0.5), a2=st.floats(0.05, 0.5))
def test_hard_detect_signal_increases_with_alpha(a1, a2):
    lo, hi = sorted((a1, a2))
    s_lo = ground_truth(hard_instance_detect(12, 10, 4, 0.4, lo, seed=2)).signal
    s_hi = ground_truth(hard_instance_detect(12, 10, 4, 0.4, hi, seed=2)).signal
    assert s_hi >= s_lo
    if hi > lo * (1 + 1e-9):
        assert s_hi > s_lo


def test_hard_localize_rank_one_matches_scaled_detect():
    loc = hard_instance_localize(15, 20, 5, 0.3, 0.6, r=1, seed=9)
    det = hard_instance_detect(15, 20, 5, 0.3, 0.6 / 3, seed=9)
    np.testing.assert_allclose(loc.matrices[0], det.matrices[0], atol=1e-15)


def test_hard_localize_sides():
    early = hard_instance_localize(10, 30, 8, 0.3, 0.5, side="early", seed=1)
    late = hard_instance_localize(10, 30, 8, 0.3, 0.5, side="late", seed=1)
    assert early.change_points == (8,) and late.change_points == (22,)
    assert abs(early.change_points[0] - late.change_points[0]) == 30 - 2 * 8
    np.testing.assert_array_equal(early.matrices[0], late.matrices[1])


def test_hard_localize_rank_before_diagonal_zeroing():
    n, rho, alpha, r = 40, 0.3, 0.6, 3
    q = hard_instance_localize(n, 20, 5, rho, alpha, r=r, seed=5)
    c = sum(3.0 ** -i for i in range(1, r + 1))
    gamma = (q.matrices[0] - q.matrices[1]) / (alpha * rho) + c * np.eye(n)
    eig = np.abs(np.linalg.eigvalsh(gamma))
    assert np.sum(eig > 1e-8 * n) == r


def test_hard_localize_bad_side():
    with pytest.raises(InvalidArgumentError):
        hard_instance_localize(10, 20, 5, 0.3, 0.1, side="middle")
