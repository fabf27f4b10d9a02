"""Evaluation metrics: inlier ratio, feature matching recall, registration
recall, NFMR, scene-flow errors, and pose-error AUC."""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .geometry import RigidTransform, apply_transform
from .sampler import CorrespondenceSet
from .synth import ScenePair

TAU_INLIER = 0.1
TAU_FMR = 0.05
TAU_RMSE = 0.2
NFMR_K = 3
ACC_S_ABS, ACC_S_REL = 0.025, 0.025
ACC_R_ABS, ACC_R_REL = 0.05, 0.05
OUTLIER_ABS, OUTLIER_REL = 0.3, 0.1
POSE_THRESHOLDS = (5.0, 10.0, 20.0)


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated metric values for a benchmark run."""

    ir: float = 0.0
    fmr: float = 0.0
    rr: float = 0.0
    nfmr: float = 0.0
    epe: float = 0.0
    acc_s: float = 0.0
    acc_r: float = 0.0
    outlier: float = 0.0
    pose_auc: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("ir", "fmr", "rr", "nfmr", "acc_s", "acc_r", "outlier"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0, 1], got {v}")
        if self.epe < 0.0:
            raise InvalidInputError("epe must be >= 0")


def _gt_endpoints(pair: ScenePair) -> np.ndarray:
    """Where each source point lands under the ground-truth warp/flow."""
    if pair.gt_transform is not None:
        return apply_transform(pair.gt_transform, pair.source).points
    return pair.source.points + pair.gt_flow


def inlier_ratio(corr: CorrespondenceSet, pair: ScenePair, tau: float = TAU_INLIER) -> float:
    """Fraction of predicted pairs within tau of the ground-truth endpoint.

    An empty correspondence set scores 0.
    """
    if len(corr) == 0:
        return 0.0
    src_idx, tgt_idx = corr.index_arrays()
    endpoints = _gt_endpoints(pair)
    dist = np.linalg.norm(endpoints[src_idx] - pair.target.points[tgt_idx], axis=1)
    return float((dist < tau).mean())


def feature_matching_recall(irs, tau_fmr: float = TAU_FMR) -> float:
    """Fraction of instances whose inlier ratio exceeds tau_fmr."""
    irs = np.asarray(irs, dtype=np.float64)
    if irs.size == 0:
        raise InvalidInputError("need at least one inlier ratio")
    return float((irs > tau_fmr).mean())


def transform_rmse(est: RigidTransform, pair: ScenePair) -> float:
    """RMSE between estimated and ground-truth warps over gt-matched source points."""
    if pair.gt_transform is None:
        raise InvalidInputError("transform RMSE needs a rigid pair")
    rows, _ = pair.matched_indices()
    if rows.size == 0:
        raise InvalidInputError("pair has no ground-truth matches")
    pts = pair.source.points[rows]
    est_pts = pts @ est.rotation.T + est.translation
    gt_pts = pts @ pair.gt_transform.rotation.T + pair.gt_transform.translation
    return float(np.sqrt(((est_pts - gt_pts) ** 2).sum(axis=1).mean()))


def registration_recall(est_transforms, pairs, tau_rmse: float = TAU_RMSE) -> float:
    """Fraction of instances whose estimated transform RMSE is below tau_rmse."""
    if len(est_transforms) != len(pairs) or not pairs:
        raise InvalidInputError("need equally many transforms and pairs, at least one")
    hits = sum(1 for est, pair in zip(est_transforms, pairs) if transform_rmse(est, pair) < tau_rmse)
    return hits / len(pairs)


def nfmr(
    anchors: CorrespondenceSet,
    pair: ScenePair,
    k: int = NFMR_K,
    tau: float = TAU_INLIER,
) -> float:
    """Fraction of ground-truth correspondences recovered by interpolating
    flows from the anchor correspondences.

    Each ground-truth source point takes the inverse-distance-weighted mean
    flow of its k nearest anchor sources (an exact positional hit uses that
    anchor's flow directly); it counts as recovered when the interpolated
    endpoint lies within tau of its ground-truth endpoint.  Empty anchors
    score 0.
    """
    if pair.gt_flow is None:
        raise InvalidInputError("nfmr needs a deformable pair")
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    if len(anchors) == 0:
        return 0.0
    a_src, a_tgt = anchors.index_arrays()
    anchor_pts = pair.source.points[a_src]
    anchor_flow = pair.target.points[a_tgt] - anchor_pts
    rows, _ = pair.matched_indices()
    gt_pts = pair.source.points[rows]
    gt_end = gt_pts + pair.gt_flow[rows]
    k_eff = min(k, len(anchors))
    recovered = 0
    for pt, end in zip(gt_pts, gt_end):
        dist = np.linalg.norm(anchor_pts - pt, axis=1)
        nearest = np.argsort(dist, kind="stable")[:k_eff]
        dn = dist[nearest]
        if dn[0] < 1e-12:
            flow = anchor_flow[nearest[0]]
        else:
            w = 1.0 / dn
            flow = (w[:, None] * anchor_flow[nearest]).sum(axis=0) / w.sum()
        if np.linalg.norm(pt + flow - end) < tau:
            recovered += 1
    return recovered / len(gt_pts)


def flow_metrics(pred_flow: np.ndarray, gt_flow: np.ndarray) -> tuple[float, float, float, float]:
    """(EPE, AccS, AccR, Outlier) of a predicted flow field against ground truth.

    Accuracy thresholds pass on the absolute OR the relative criterion; the
    relative criterion only applies where the ground-truth flow is nonzero.
    """
    pred = np.asarray(pred_flow, dtype=np.float64)
    gt = np.asarray(gt_flow, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2:
        raise InvalidInputError("flow fields must share an N x 3 shape")
    err = np.linalg.norm(pred - gt, axis=1)
    mag = np.linalg.norm(gt, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = err / mag
    # where gt is zero the relative criterion can neither pass an accuracy
    # test nor trigger the outlier test
    rel_acc = np.where(mag > 0.0, ratio, np.inf)
    rel_out = np.where(mag > 0.0, ratio, 0.0)
    epe = float(err.mean())
    acc_s = float(((err < ACC_S_ABS) | (rel_acc < ACC_S_REL)).mean())
    acc_r = float(((err < ACC_R_ABS) | (rel_acc < ACC_R_REL)).mean())
    outlier = float(((err > OUTLIER_ABS) | (rel_out > OUTLIER_REL)).mean())
    return epe, acc_s, acc_r, outlier


def pose_auc(errors_deg, thresholds=POSE_THRESHOLDS) -> dict:
    """Area under the recall-vs-angular-error curve, normalized per threshold.

    Trapezoidal integration of the empirical recall curve on [0, tau],
    divided by tau.
    """
    errors = np.sort(np.asarray(errors_deg, dtype=np.float64))
    if errors.size == 0:
        raise InvalidInputError("need at least one pose error")
    if errors.min() < 0.0:
        raise InvalidInputError("pose errors must be >= 0")
    recall = np.arange(1, errors.size + 1, dtype=np.float64) / errors.size
    xs = np.concatenate(([0.0], errors))
    ys = np.concatenate(([0.0], recall))
    out = {}
    for tau in thresholds:
        cut = np.searchsorted(xs, tau, side="right")
        x = np.concatenate((xs[:cut], [tau]))
        y = np.concatenate((ys[:cut], [ys[cut - 1]]))
        out[float(tau)] = float(np.trapezoid(y, x) / tau)
    return out
