"""Point clouds, SE(3) transforms, weighted Procrustes, positional encodings,
and the matrix-to-flow conversion for the 2D pathway."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .matmath import MatchingMatrix

ORTHO_TOL = 1e-9
# wavelength range of the sinusoidal ladder; lowest band has period PE_LAMBDA_MAX
PE_LAMBDA_MAX = 4.0
PE_LAMBDA_MIN = 0.05


@dataclass(frozen=True)
class PointCloud:
    """N x 3 coordinates in meters plus optional N x d features."""

    points: np.ndarray
    features: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
            raise InvalidInputError(f"points must be N x 3, got {pts.shape}")
        if not np.isfinite(pts).all():
            raise InvalidInputError("coordinates must be finite")
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            object.__setattr__(self, "features", feats)
            if feats.ndim != 2 or feats.shape[0] != pts.shape[0]:
                raise InvalidInputError("features must be N x d, aligned with points")
            if not np.isfinite(feats).all():
                raise InvalidInputError("features must be finite")

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class RigidTransform:
    """Rotation (3x3, det +1) and translation (3,) in meters.

    ``degenerate`` flags an identity fallback produced from rank-deficient
    Procrustes input; such a transform still satisfies the invariants.
    """

    rotation: np.ndarray
    translation: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        if R.shape != (3, 3) or t.shape != (3,):
            raise InvalidInputError("rotation must be 3x3 and translation length 3")
        if not (np.isfinite(R).all() and np.isfinite(t).all()):
            raise InvalidInputError("transform entries must be finite")
        if np.abs(R.T @ R - np.eye(3)).max() > ORTHO_TOL:
            raise InvalidInputError("rotation not orthonormal within 1e-9")
        if abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
            raise InvalidInputError("rotation determinant must be +1 within 1e-9")


@dataclass(frozen=True)
class PixelGrid:
    """H x W grid of integer cell centers enumerated row-major as (x, y)."""

    height: int
    width: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise InvalidInputError("grid sides must be >= 1")

    @property
    def coordinates(self) -> np.ndarray:
        ys, xs = np.divmod(np.arange(self.height * self.width), self.width)
        return np.stack([xs, ys], axis=1).astype(np.float64)

    def __len__(self):
        return self.height * self.width


@dataclass(frozen=True)
class FlowField2D:
    """Per-cell 2D displacement vectors (pixels), row-major."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        object.__setattr__(self, "vectors", v)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InvalidInputError("flow vectors must be K x 2")
        if not np.isfinite(v).all():
            raise InvalidInputError("flow vectors must be finite")


def identity_transform() -> RigidTransform:
    return RigidTransform(np.eye(3), np.zeros(3))


def soft_procrustes(e: MatchingMatrix, p: PointCloud, q: PointCloud) -> RigidTransform:
    """Weighted Kabsch alignment with matching entries as correspondence weights.

    Weights are normalized internally, so the result is invariant to positive
    global scaling of e.  Rank-deficient cross-covariance (collinear or
    coincident weighted geometry) yields the identity transform flagged
    degenerate instead of an error.
    """
    if e.kind == "raw-logits":
        raise InvalidInputError("soft_procrustes needs nonnegative weights, not raw logits")
    if e.entries.shape != (len(p), len(q)):
        raise InvalidInputError("matrix shape must be |p| x |q|")
    w = e.entries
    mass = w.sum()
    if mass <= 0.0:
        raise DegenerateInputError("total correspondence mass must be positive")
    w = w / mass
    row_w = w.sum(axis=1)
    col_w = w.sum(axis=0)
    p_bar = row_w @ p.points
    q_bar = col_w @ q.points
    H = (p.points - p_bar).T @ (w @ (q.points - q_bar))
    U, S, Vt = np.linalg.svd(H)
    # rotation is ill-determined when the second singular value vanishes, or
    # when the whole cross-covariance is cancellation noise relative to the
    # weighted point spreads (e.g. uniform weights)
    row_spread = math.sqrt(float(row_w @ ((p.points - p_bar) ** 2).sum(axis=1)))
    col_spread = math.sqrt(float(col_w @ ((q.points - q_bar) ** 2).sum(axis=1)))
    scale = row_spread * col_spread
    if S[0] <= 1e-12 * max(scale, 1e-30) or S[1] <= 1e-12 * max(S[0], 1e-30):
        return RigidTransform(np.eye(3), q_bar - p_bar, degenerate=True)
    V = Vt.T
    d = np.sign(np.linalg.det(V @ U.T))
    R = V @ np.diag([1.0, 1.0, d]) @ U.T
    return RigidTransform(R, q_bar - R @ p_bar)


def apply_transform(tf: RigidTransform, p: PointCloud) -> PointCloud:
    """p_i -> R p_i + t; features pass through unchanged."""
    return PointCloud(p.points @ tf.rotation.T + tf.translation, p.features)


def inverse_transform(tf: RigidTransform) -> RigidTransform:
    return RigidTransform(tf.rotation.T, -(tf.rotation.T @ tf.translation))


def compose_transform(outer: RigidTransform, inner: RigidTransform) -> RigidTransform:
    """Composition: x -> outer(inner(x))."""
    return RigidTransform(
        outer.rotation @ inner.rotation,
        outer.rotation @ inner.translation + outer.translation,
    )


def rotation_geodesic_deg(ra: np.ndarray, rb: np.ndarray) -> float:
    """Geodesic angle between two rotation matrices, in degrees."""
    cos = (np.trace(np.asarray(ra).T @ np.asarray(rb)) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


def positional_encoding(
    coords: np.ndarray,
    d: int,
    kind: str = "sinusoidal-3d",
    seed: int = 0,
) -> np.ndarray:
    """Deterministic sin/cos encoding of K x dim coordinates into K x d.

    sinusoidal-3d: per axis, a geometric ladder of bands between wavelengths
    PE_LAMBDA_MAX (lowest band) and PE_LAMBDA_MIN, emitting sin then cos per
    band; layout is axis-major.  fourier: sin/cos of d/2 fixed random
    projections drawn from the given seed.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2:
        raise InvalidInputError("coords must be K x dim")
    dim = coords.shape[1]
    if kind == "sinusoidal-3d":
        if d < 2 * dim or d % (2 * dim) != 0:
            raise InvalidInputError(f"d must be a positive multiple of {2 * dim}")
        bands = d // (2 * dim)
        if bands == 1:
            lambdas = np.array([PE_LAMBDA_MAX])
        else:
            lambdas = PE_LAMBDA_MAX * (PE_LAMBDA_MIN / PE_LAMBDA_MAX) ** (
                np.arange(bands) / (bands - 1)
            )
        omegas = 2.0 * math.pi / lambdas
        phases = coords[:, :, None] * omegas[None, None, :]
        parts = np.stack([np.sin(phases), np.cos(phases)], axis=3)
        return parts.reshape(coords.shape[0], d)
    if kind == "fourier":
        if d < 2 or d % 2 != 0:
            raise InvalidInputError("d must be even and >= 2")
        rng = np.random.default_rng(seed)
        proj = rng.standard_normal((dim, d // 2))
        phases = coords @ proj
        return np.concatenate([np.sin(phases), np.cos(phases)], axis=1)
    raise InvalidInputError(f"unknown encoding kind {kind!r}")


def lowest_band_period() -> float:
    """Spatial period of the first sinusoidal band (for periodicity checks)."""
    return PE_LAMBDA_MAX


def matrix_to_flow(e: MatchingMatrix, grid_p: PixelGrid, grid_q: PixelGrid) -> FlowField2D:
    """Convert a matching matrix over two pixel grids into a target-indexed flow.

    Each target cell's sample point is its expected source coordinate under
    the matching distribution: entries are normalized over the source axis
    (softmax for raw logits, plain normalization for weight kinds, keeping
    permutations exact one-hots), transposed, and multiplied by the source
    grid.  The flow is sample_grid - Grid_Q.
    """
    if e.entries.shape != (len(grid_p), len(grid_q)):
        raise InvalidInputError(
            f"matrix {e.entries.shape} inconsistent with grids {len(grid_p)} x {len(grid_q)}"
        )
    if e.kind == "raw-logits":
        z = e.entries - e.entries.max(axis=0, keepdims=True)
        w = np.exp(z)
    else:
        w = e.entries
    col_sums = w.sum(axis=0, keepdims=True)
    # a zero column has no mass anywhere: fall back to uniform over sources
    w = np.where(col_sums > 0.0, w, 1.0)
    col_sums = w.sum(axis=0, keepdims=True)
    wt = (w / col_sums).T
    sample_grid = wt @ grid_p.coordinates
    return FlowField2D(sample_grid - grid_q.coordinates)


def grid_sample(feature_map: np.ndarray, sample_points: np.ndarray) -> np.ndarray:
    """Bilinear interpolation on an H x W x d map at K x 2 points (x, y).

    Out-of-bounds points are clamped to the border cell.
    """
    fmap = np.asarray(feature_map, dtype=np.float64)
    pts = np.asarray(sample_points, dtype=np.float64)
    if fmap.ndim != 3:
        raise InvalidInputError("feature_map must be H x W x d")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInputError("sample_points must be K x 2")
    if not np.isfinite(pts).all():
        raise InvalidInputError("sample points must be finite")
    h, w = fmap.shape[:2]
    x = np.clip(pts[:, 0], 0.0, w - 1.0)
    y = np.clip(pts[:, 1], 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[:, None]
    fy = (y - y0)[:, None]
    top = fmap[y0, x0] * (1.0 - fx) + fmap[y0, x1] * fx
    bottom = fmap[y1, x0] * (1.0 - fx) + fmap[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy
