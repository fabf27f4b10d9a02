import numpy as np
import pytest

from matchdiff.errors import InvalidInputError
from matchdiff.geometry import RigidTransform, apply_transform
from matchdiff.metrics import (
    feature_matching_recall,
    flow_metrics,
    inlier_ratio,
    nfmr,
    pose_auc,
    registration_recall,
    transform_rmse,
)
from matchdiff.sampler import CorrespondenceSet
from matchdiff.synth import make_deformable_pair, make_features, make_rigid_pair


def corr_from(pairs):
    return CorrespondenceSet(pairs=tuple(pairs), mode="topk")


def naive_inlier_ratio(corr, pair, tau):
    # direct re-statement: endpoint of source i under the ground truth motion
    # must fall within tau of target j
    if pair.gt_transform is not None:
        ends = pair.source.points @ pair.gt_transform.rotation.T + pair.gt_transform.translation
    else:
        ends = pair.source.points + pair.gt_flow
    hits = 0
    for i, j, _ in corr.pairs:
        if np.sqrt(((ends[i] - pair.target.points[j]) ** 2).sum()) < tau:
            hits += 1
    return hits / len(corr.pairs)


def test_inlier_ratio_matches_naive_loop():
    rng = np.random.default_rng(30)
    for seed in range(10):
        pair = make_rigid_pair(15, noise_sigma=0.01, seed=seed)
        pairs = [(int(i), int(rng.integers(0, 15)), 1.0) for i in range(10)]
        corr = corr_from(pairs)
        assert abs(inlier_ratio(corr, pair, tau=0.1) - naive_inlier_ratio(corr, pair, 0.1)) < 1e-9


def test_inlier_ratio_gt_pairs_are_inliers():
    for seed in range(5):
        pair = make_rigid_pair(12, noise_sigma=0.0, seed=seed)
        rows, cols = pair.matched_indices()
        corr = corr_from([(int(i), int(j), 1.0) for i, j in zip(rows, cols)])
        assert inlier_ratio(corr, pair) == 1.0
    assert inlier_ratio(corr_from([]), pair) == 0.0


def test_inlier_ratio_deformable():
    pair = make_deformable_pair(10, amp=0.1, freq=5.0, seed=1)
    rows, cols = pair.matched_indices()
    corr = corr_from([(int(i), int(j), 1.0) for i, j in zip(rows, cols)])
    assert inlier_ratio(corr, pair) == 1.0
    wrong = corr_from([(0, int(cols[(np.where(rows == 0)[0][0] + 1) % 10]), 1.0)])
    assert inlier_ratio(wrong, pair, tau=1e-9) == 0.0


def test_feature_matching_recall_counts_thresholds():
    assert feature_matching_recall([0.9, 0.04, 0.06], tau_fmr=0.05) == pytest.approx(2 / 3)
    assert feature_matching_recall([0.0]) == 0.0
    with pytest.raises(InvalidInputError):
        feature_matching_recall([])


def test_transform_rmse_exact_recovery_is_zero():
    pair = make_rigid_pair(14, noise_sigma=0.0, seed=2)
    assert transform_rmse(pair.gt_transform, pair) < 1e-12


def test_transform_rmse_matches_naive_loop():
    pair = make_rigid_pair(14, noise_sigma=0.0, seed=3)
    wrong = RigidTransform(np.eye(3), np.array([0.5, 0.0, 0.0]))
    rows, _ = pair.matched_indices()
    a = apply_transform(wrong, pair.source).points[rows]
    b = apply_transform(pair.gt_transform, pair.source).points[rows]
    expect = np.sqrt(((a - b) ** 2).sum(axis=1).mean())
    assert abs(transform_rmse(wrong, pair) - expect) < 1e-12


def test_registration_recall_fraction():
    pairs = [make_rigid_pair(10, seed=s) for s in range(4)]
    good = [p.gt_transform for p in pairs]
    bad = RigidTransform(np.eye(3), np.array([9.0, 9.0, 9.0]))
    ests = [good[0], good[1], bad, good[3]]
    assert registration_recall(ests, pairs) == 0.75
    assert registration_recall(good, pairs) == 1.0


def test_nfmr_gt_anchors_give_one():
    for seed in range(5):
        pair = make_deformable_pair(20, amp=0.1, freq=6.0, seed=seed)
        rows, cols = pair.matched_indices()
        anchors = corr_from([(int(i), int(j), 1.0) for i, j in zip(rows, cols)])
        assert nfmr(anchors, pair) == 1.0
    assert nfmr(corr_from([]), pair) == 0.0


def test_nfmr_wrong_anchors_give_zero():
    pair = make_deformable_pair(20, amp=0.05, freq=6.0, seed=7)
    rows, cols = pair.matched_indices()
    # anchor flows point at shuffled targets far from the true endpoints
    shifted = corr_from(
        [(int(i), int(cols[(k + 7) % len(cols)]), 1.0) for k, (i, j) in enumerate(zip(rows, cols))]
    )
    assert nfmr(shifted, pair, tau=1e-6) < 0.2


def test_nfmr_validation():
    rigid = make_rigid_pair(8, seed=0)
    with pytest.raises(InvalidInputError):
        nfmr(corr_from([(0, 0, 1.0)]), rigid)
    deform = make_deformable_pair(8, amp=0.1, freq=3.0, seed=0)
    with pytest.raises(InvalidInputError):
        nfmr(corr_from([(0, 0, 1.0)]), deform, k=0)


def test_flow_metrics_hand_values():
    pred = np.array([[0.1, 0, 0], [1.0, 0, 0], [0.0, 0, 0]])
    gt = np.array([[0.1, 0, 0], [0.0, 0, 0], [0.5, 0, 0]])
    epe, acc_s, acc_r, outlier = flow_metrics(pred, gt)
    assert abs(epe - 0.5) < 1e-15
    assert acc_s == pytest.approx(1 / 3)  # only the exact row passes
    assert acc_r == pytest.approx(1 / 3)
    # row 1: abs error 1 > 0.3; row 2: rel error 1 > 0.1
    assert outlier == pytest.approx(2 / 3)


def test_flow_metrics_matches_naive_loop():
    rng = np.random.default_rng(31)
    pred = rng.uniform(-0.2, 0.2, (40, 3))
    gt = rng.uniform(-0.2, 0.2, (40, 3))
    epe, acc_s, acc_r, outlier = flow_metrics(pred, gt)
    n_s = n_r = n_o = 0
    errs = []
    for a, b in zip(pred, gt):
        err = float(np.linalg.norm(a - b))
        mag = float(np.linalg.norm(b))
        errs.append(err)
        rel = err / mag if mag > 0 else None
        if err < 0.025 or (rel is not None and rel < 0.025):
            n_s += 1
        if err < 0.05 or (rel is not None and rel < 0.05):
            n_r += 1
        if err > 0.3 or (rel is not None and rel > 0.1):
            n_o += 1
    assert abs(epe - np.mean(errs)) < 1e-9
    assert abs(acc_s - n_s / 40) < 1e-9
    assert abs(acc_r - n_r / 40) < 1e-9
    assert abs(outlier - n_o / 40) < 1e-9


def test_flow_metrics_validation():
    with pytest.raises(InvalidInputError):
        flow_metrics(np.zeros((3, 3)), np.zeros((4, 3)))


def test_pose_auc_frozen_single_error():
    out = pose_auc([5.0])
    assert abs(out[5.0] - 0.5) < 1e-12
    assert abs(out[10.0] - 0.75) < 1e-12
    assert abs(out[20.0] - 0.875) < 1e-12


def test_pose_auc_limits():
    perfect = pose_auc([0.0, 0.0, 0.0])
    assert all(abs(v - 1.0) < 1e-12 for v in perfect.values())
    hopeless = pose_auc([90.0, 120.0])
    assert all(v == 0.0 for v in hopeless.values())
    with pytest.raises(InvalidInputError):
        pose_auc([])
    with pytest.raises(InvalidInputError):
        pose_auc([-1.0])


def test_pose_auc_monotone_in_threshold():
    rng = np.random.default_rng(32)
    errors = rng.uniform(0, 30, 50)
    out = pose_auc(errors)
    assert out[5.0] <= out[10.0] <= out[20.0]
