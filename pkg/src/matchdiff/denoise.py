"""The denoising module: a geometry-driven, training-free predictor of the
clean matching matrix from a noisy one.

The prediction logits combine feature similarity with the geometric
consistency of the warp induced by the current state: the state is projected
to doubly stochastic, its weighted-Procrustes warp is applied to the source,
and logits = feature_logits / tau_feat - lambda_geo * squared warped
distances.  3D registration projects the logits with Sinkhorn, the 2D image
branch with row softmax.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import PointCloud, RigidTransform, apply_transform, positional_encoding, soft_procrustes
from .matmath import MatchingMatrix, sinkhorn_project, softmax_project

MODES = ("registration-3d", "image-2d")


@dataclass(frozen=True)
class DenoiserInput:
    """State and context handed to a denoiser at one reverse step."""

    et: MatchingMatrix
    p: PointCloud
    q: PointCloud
    t: int
    mode: str = "registration-3d"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if self.et.entries.shape != (len(self.p), len(self.q)):
            raise InvalidInputError("state shape inconsistent with cloud sizes")
        if self.p.features is None or self.q.features is None:
            raise InvalidInputError("both clouds need features")
        if self.p.features.shape[1] != self.q.features.shape[1]:
            raise InvalidInputError("feature dimensions must match")


@dataclass(frozen=True)
class DenoiserConfig:
    """Knobs of the geometric denoiser.

    tau_feat scales feature logits (smaller = sharper); lambda_geo weights
    the squared warped-distance term; pe_dim is the positional-encoding width
    appended by the match-to-warp embedding.
    """

    tau_feat: float = 1.0
    lambda_geo: float = 50.0
    sinkhorn_iters: int = 100
    pe_dim: int = 48

    def __post_init__(self):
        if not (self.tau_feat > 0.0 and math.isfinite(self.tau_feat)):
            raise InvalidInputError("tau_feat must be > 0")
        if self.lambda_geo < 0.0:
            raise InvalidInputError("lambda_geo must be >= 0")
        if self.sinkhorn_iters < 1:
            raise InvalidInputError("sinkhorn_iters must be >= 1")
        if self.pe_dim < 6 or self.pe_dim % 6 != 0:
            raise InvalidInputError("pe_dim must be a positive multiple of 6")


def matching_logits(fp: np.ndarray, fq: np.ndarray, d: int | None = None) -> MatchingMatrix:
    """Scaled dot-product logits: (i, j) -> <f_i, f_j> / sqrt(d)."""
    fp = np.asarray(fp, dtype=np.float64)
    fq = np.asarray(fq, dtype=np.float64)
    if fp.ndim != 2 or fq.ndim != 2 or fp.shape[1] != fq.shape[1]:
        raise InvalidInputError("feature matrices must share their dimension d")
    if d is None:
        d = fp.shape[1]
    if d != fp.shape[1]:
        raise InvalidInputError("d must equal the feature dimension")
    return MatchingMatrix(fp @ fq.T / math.sqrt(d), kind="raw-logits")


def match_to_warp_embed_3d(
    et: MatchingMatrix,
    p: PointCloud,
    q: PointCloud,
    sinkhorn_iters: int = 100,
    pe_dim: int = 48,
) -> tuple[PointCloud, np.ndarray, RigidTransform]:
    """Embed a matching state by the rigid warp it induces.

    Projects the state to doubly stochastic, fits the weighted-Procrustes
    transform, warps the source, and concatenates the source features with a
    positional encoding of the warped coordinates.
    """
    if p.features is None:
        raise InvalidInputError("source cloud needs features for the embedding")
    e_tilde = sinkhorn_project(et, iters=sinkhorn_iters)
    tf = soft_procrustes(e_tilde, p, q)
    warped = apply_transform(tf, p)
    embed = np.hstack([p.features, positional_encoding(warped.points, pe_dim)])
    return warped, embed, tf


def geometric_denoiser(inp: DenoiserInput, cfg: DenoiserConfig) -> MatchingMatrix:
    """Predict the clean matching matrix from a noisy state.

    Deterministic in (inp, cfg); ignores the timestep (the reverse process
    supplies time dependence through the state itself).
    """
    warped, _, _ = match_to_warp_embed_3d(
        inp.et, inp.p, inp.q, sinkhorn_iters=cfg.sinkhorn_iters, pe_dim=cfg.pe_dim
    )
    feat = matching_logits(inp.p.features, inp.q.features)
    d2 = ((warped.points[:, None, :] - inp.q.points[None, :, :]) ** 2).sum(axis=2)
    logits = MatchingMatrix(feat.entries / cfg.tau_feat - cfg.lambda_geo * d2, kind="raw-logits")
    if inp.mode == "registration-3d":
        return sinkhorn_project(logits, iters=cfg.sinkhorn_iters)
    return softmax_project(logits)


class GeometricDenoiser:
    """Callable wrapper binding a DenoiserConfig; satisfies the sampler contract."""

    def __init__(self, cfg: DenoiserConfig | None = None):
        self.cfg = cfg or DenoiserConfig()

    def __call__(self, inp: DenoiserInput) -> MatchingMatrix:
        return geometric_denoiser(inp, self.cfg)
