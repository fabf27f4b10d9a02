"""matchdiff: correspondence estimation by reverse diffusion over matching
matrices, with feasibility projections, geometric denoising, an entropic
transport solver, brute-force bound checkers, synthetic benchmarks, and a
metric suite.
"""

from ._backend import BACKEND
from .denoise import (
    DenoiserConfig,
    DenoiserInput,
    GeometricDenoiser,
    geometric_denoiser,
    match_to_warp_embed_3d,
    matching_logits,
)
from .errors import (
    DegenerateInputError,
    InvalidInputError,
    MatchdiffError,
    SamplerStepError,
    SizeLimitError,
)
from .geometry import (
    FlowField2D,
    PixelGrid,
    PointCloud,
    RigidTransform,
    apply_transform,
    compose_transform,
    grid_sample,
    identity_transform,
    inverse_transform,
    lowest_band_period,
    matrix_to_flow,
    positional_encoding,
    rotation_geodesic_deg,
    soft_procrustes,
)
from .matmath import (
    KINDS,
    MatchingMatrix,
    pad_dummy,
    sinkhorn_project,
    softmax_project,
)
from .metrics import (
    feature_matching_recall,
    flow_metrics,
    inlier_ratio,
    nfmr,
    pose_auc,
    registration_recall,
    transform_rmse,
)
from .otsolve import (
    TransportProblem,
    entropic_ot,
    exact_assignment,
    ot_objective,
    theorem2_iterate,
    uniform_transport,
    verify_theorem1,
)
from .sampler import (
    CorrespondenceSet,
    SamplerConfig,
    extract_correspondences,
    reverse_sample,
    timestep_subsequence,
)
from .schedule import (
    DiffusionSchedule,
    build_schedule,
    ddim_step,
    elbo_kl_term,
    forward_diffuse,
    posterior_mean_var,
    simple_loss_eval,
)
from .synth import (
    ScenePair,
    make_deformable_pair,
    make_features,
    make_rigid_pair,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CorrespondenceSet",
    "DegenerateInputError",
    "DenoiserConfig",
    "DenoiserInput",
    "DiffusionSchedule",
    "FlowField2D",
    "GeometricDenoiser",
    "InvalidInputError",
    "KINDS",
    "MatchdiffError",
    "MatchingMatrix",
    "PixelGrid",
    "PointCloud",
    "RigidTransform",
    "SamplerConfig",
    "SamplerStepError",
    "ScenePair",
    "SizeLimitError",
    "TransportProblem",
    "apply_transform",
    "build_schedule",
    "compose_transform",
    "ddim_step",
    "elbo_kl_term",
    "entropic_ot",
    "exact_assignment",
    "extract_correspondences",
    "feature_matching_recall",
    "flow_metrics",
    "forward_diffuse",
    "geometric_denoiser",
    "grid_sample",
    "identity_transform",
    "inlier_ratio",
    "inverse_transform",
    "lowest_band_period",
    "make_deformable_pair",
    "make_features",
    "make_rigid_pair",
    "match_to_warp_embed_3d",
    "matching_logits",
    "matrix_to_flow",
    "nfmr",
    "ot_objective",
    "pad_dummy",
    "pose_auc",
    "positional_encoding",
    "posterior_mean_var",
    "registration_recall",
    "reverse_sample",
    "rotation_geodesic_deg",
    "simple_loss_eval",
    "sinkhorn_project",
    "soft_procrustes",
    "softmax_project",
    "theorem2_iterate",
    "timestep_subsequence",
    "transform_rmse",
    "uniform_transport",
    "verify_theorem1",
]
