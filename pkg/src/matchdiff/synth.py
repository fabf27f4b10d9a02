"""Synthetic benchmark generation: rigid pairs, deformable pairs, partial
overlap, and features with controllable discriminability.

Geometry lives in the unit cube; all generation is a pure function of
(parameters, seed) via a freshly constructed RNG, so replays are bitwise
identical.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError
from .geometry import PointCloud, RigidTransform, apply_transform
from .matmath import MatchingMatrix


@dataclass(frozen=True)
class ScenePair:
    """Source/target clouds with ground truth.

    Exactly one of gt_transform (rigid) and gt_flow (deformable) is present.
    gt_matrix is 0/1 with at most a single 1 per row and per column; rows of
    dropped (non-overlapping) points are all zero.  gt_flow is indexed by
    source order.
    """

    source: PointCloud
    target: PointCloud
    gt_matrix: MatchingMatrix
    gt_transform: RigidTransform | None = None
    gt_flow: np.ndarray | None = None
    overlap_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if (self.gt_transform is None) == (self.gt_flow is None):
            raise InvalidInputError("exactly one of gt_transform/gt_flow must be present")
        gt = self.gt_matrix.entries
        if gt.shape != (len(self.source), len(self.target)):
            raise InvalidInputError("gt_matrix shape inconsistent with cloud sizes")
        if not np.isin(gt, (0.0, 1.0)).all():
            raise InvalidInputError("gt_matrix must be 0/1")
        if gt.sum(axis=1).max(initial=0.0) > 1.0 or gt.sum(axis=0).max(initial=0.0) > 1.0:
            raise InvalidInputError("gt_matrix rows/columns may hold at most one match")
        if self.gt_flow is not None:
            flow = np.asarray(self.gt_flow, dtype=np.float64)
            object.__setattr__(self, "gt_flow", flow)
            if flow.shape != (len(self.source), 3):
                raise InvalidInputError("gt_flow must be N x 3 over source points")
        if not 0.0 <= self.overlap_ratio <= 1.0:
            raise InvalidInputError("overlap_ratio must lie in [0, 1]")

    @property
    def mode(self) -> str:
        return "rigid" if self.gt_transform is not None else "deformable"

    def matched_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """(source indices, target indices) of ground-truth pairs, row order."""
        rows, cols = np.nonzero(self.gt_matrix.entries)
        return rows, cols


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    quat = rng.standard_normal(4)
    quat /= np.linalg.norm(quat)
    w, x, y, z = quat
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def _cube_points(n: int, rng: np.random.Generator, min_separation: float) -> np.ndarray:
    if min_separation <= 0.0:
        return rng.uniform(0.0, 1.0, (n, 3))
    pts: list[np.ndarray] = []
    for _ in range(10000 * n):
        cand = rng.uniform(0.0, 1.0, 3)
        if all(np.linalg.norm(cand - prev) >= min_separation for prev in pts):
            pts.append(cand)
            if len(pts) == n:
                return np.array(pts)
    raise InvalidInputError(
        f"could not place {n} points with separation {min_separation} in the unit cube"
    )


def make_rigid_pair(
    n: int,
    noise_sigma: float = 0.0,
    overlap: float = 1.0,
    seed: int = 0,
    min_separation: float = 0.0,
) -> ScenePair:
    """Rigid pair: unit-cube source, random SE(3) target, optional jitter and
    partial overlap (the non-overlapping fraction of each cloud is replaced
    by same-cube distractors)."""
    if n < 4:
        raise InvalidInputError("n must be >= 4")
    if not 0.0 < overlap <= 1.0:
        raise InvalidInputError("overlap must lie in (0, 1]")
    if noise_sigma < 0.0:
        raise InvalidInputError("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    src = _cube_points(n, rng, min_separation)
    rotation = _random_rotation(rng)
    translation = rng.uniform(-1.0, 1.0, 3)
    tgt = src @ rotation.T + translation
    if noise_sigma > 0.0:
        tgt = tgt + noise_sigma * rng.standard_normal(tgt.shape)
    # shuffle target order so the ground-truth matching is a nontrivial permutation
    perm = rng.permutation(n)
    tgt = tgt[perm]
    inv = np.argsort(perm)
    gt = np.zeros((n, n))
    gt[np.arange(n), inv] = 1.0
    n_match = int(math.ceil(overlap * n))
    dropped = rng.permutation(n)[n_match:]
    for i in dropped:
        gt[i, inv[i]] = 0.0
        src[i] = rng.uniform(0.0, 1.0, 3)
        tgt[inv[i]] = rng.uniform(0.0, 1.0, 3) @ rotation.T + translation
    return ScenePair(
        source=PointCloud(src),
        target=PointCloud(tgt),
        gt_matrix=MatchingMatrix(gt, kind="nonneg"),
        gt_transform=RigidTransform(rotation, translation),
        overlap_ratio=float(overlap),
        seed=seed,
    )


def make_deformable_pair(n: int, amp: float, freq: float, seed: int = 0) -> ScenePair:
    """Deformable pair: smooth sinusoidal displacement field
    d(x) = amp * [sin(freq*y), sin(freq*z), sin(freq*x)] with full ground truth."""
    if n < 4:
        raise InvalidInputError("n must be >= 4")
    rng = np.random.default_rng(seed)
    src = rng.uniform(0.0, 1.0, (n, 3))
    flow = amp * np.stack(
        [
            np.sin(freq * src[:, 1]),
            np.sin(freq * src[:, 2]),
            np.sin(freq * src[:, 0]),
        ],
        axis=1,
    )
    tgt = src + flow
    perm = rng.permutation(n)
    tgt = tgt[perm]
    inv = np.argsort(perm)
    gt = np.zeros((n, n))
    gt[np.arange(n), inv] = 1.0
    return ScenePair(
        source=PointCloud(src),
        target=PointCloud(tgt),
        gt_matrix=MatchingMatrix(gt, kind="nonneg"),
        gt_flow=flow,
        overlap_ratio=1.0,
        seed=seed,
    )


def make_features(pair: ScenePair, rho: float, d: int = 528, seed: int = 0) -> ScenePair:
    """Fill both clouds with unit descriptors whose discriminability is rho.

    Matched targets mix the source descriptor with independent unit noise:
    f_target = normalize(rho * f_source + (1 - rho) * g); unmatched points
    get independent descriptors.  rho = 1 is perfectly discriminative,
    rho = 0 uninformative.
    """
    if not 0.0 <= rho <= 1.0:
        raise InvalidInputError("rho must lie in [0, 1]")
    if d < 1:
        raise InvalidInputError("d must be >= 1")
    rng = np.random.default_rng(seed)
    n, m = len(pair.source), len(pair.target)
    fp = rng.standard_normal((n, d))
    fp /= np.linalg.norm(fp, axis=1, keepdims=True)
    fq = rng.standard_normal((m, d))
    fq /= np.linalg.norm(fq, axis=1, keepdims=True)
    rows, cols = pair.matched_indices()
    for i, j in zip(rows, cols):
        g = rng.standard_normal(d)
        g /= np.linalg.norm(g)
        mixed = rho * fp[i] + (1.0 - rho) * g
        fq[j] = mixed / np.linalg.norm(mixed)
    return replace(
        pair,
        source=PointCloud(pair.source.points, fp),
        target=PointCloud(pair.target.points, fq),
    )
