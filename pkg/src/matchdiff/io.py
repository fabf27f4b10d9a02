"""On-disk formats: xyz point clouds, binary feature matrices, scene-pair
directories, and matrix traces.

Formats:
  *.xyz             whitespace-separated ``x y z`` text lines, full precision
  *_features.bin    8-byte header (N, d as little-endian uint32) then
                    little-endian float32 row-major data
  gt.json           transform or flow, matching as an index-pair list,
                    overlap ratio, seed
  trace.bin         uint32 count, then per matrix: uint32 rows, cols and
                    float32 row-major entries
"""
import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .geometry import PointCloud, RigidTransform
from .matmath import MatchingMatrix
from .synth import ScenePair


def write_xyz(path, points: np.ndarray) -> None:
    points = np.asarray(points, dtype=np.float64)
    lines = [f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in points]
    Path(path).write_text("\n".join(lines) + "\n")


def read_xyz(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidInputError(f"{path}: expected 3 columns, got {len(parts)}")
        rows.append([float(v) for v in parts])
    if not rows:
        raise InvalidInputError(f"{path}: empty point cloud")
    return np.asarray(rows, dtype=np.float64)


def write_features(path, features: np.ndarray) -> None:
    features = np.asarray(features)
    if features.ndim != 2:
        raise InvalidInputError("features must be N x d")
    n, d = features.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", n, d))
        fh.write(features.astype("<f4").tobytes(order="C"))


def read_features(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise InvalidInputError(f"{path}: truncated feature file")
    n, d = struct.unpack("<II", raw[:8])
    expected = 8 + 4 * n * d
    if len(raw) != expected:
        raise InvalidInputError(f"{path}: expected {expected} bytes, got {len(raw)}")
    data = np.frombuffer(raw, dtype="<f4", offset=8, count=n * d)
    return data.reshape(n, d).astype(np.float64)


def _transform_to_json(tf: RigidTransform) -> dict:
    return {
        "rotation": tf.rotation.tolist(),
        "translation": tf.translation.tolist(),
    }


def _transform_from_json(obj: dict) -> RigidTransform:
    return RigidTransform(np.asarray(obj["rotation"]), np.asarray(obj["translation"]))


def write_scene_pair(directory, pair: ScenePair) -> None:
    """Serialize a ScenePair into a directory (created if missing)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_xyz(directory / "source.xyz", pair.source.points)
    write_xyz(directory / "target.xyz", pair.target.points)
    if pair.source.features is not None:
        write_features(directory / "source_features.bin", pair.source.features)
    if pair.target.features is not None:
        write_features(directory / "target_features.bin", pair.target.features)
    rows, cols = pair.matched_indices()
    gt = {
        "transform": None if pair.gt_transform is None else _transform_to_json(pair.gt_transform),
        "flow": None if pair.gt_flow is None else pair.gt_flow.tolist(),
        "matrix": [[int(i), int(j)] for i, j in zip(rows, cols)],
        "sizes": [len(pair.source), len(pair.target)],
        "overlap": pair.overlap_ratio,
        "seed": pair.seed,
    }
    (directory / "gt.json").write_text(json.dumps(gt, sort_keys=True, indent=1) + "\n")


def read_scene_pair(directory) -> ScenePair:
    directory = Path(directory)
    src_pts = read_xyz(directory / "source.xyz")
    tgt_pts = read_xyz(directory / "target.xyz")
    fsrc = directory / "source_features.bin"
    ftgt = directory / "target_features.bin"
    src = PointCloud(src_pts, read_features(fsrc) if fsrc.exists() else None)
    tgt = PointCloud(tgt_pts, read_features(ftgt) if ftgt.exists() else None)
    gt = json.loads((directory / "gt.json").read_text())
    n, m = gt["sizes"]
    if n != len(src) or m != len(tgt):
        raise InvalidInputError(f"{directory}: gt.json sizes disagree with cloud files")
    matrix = np.zeros((n, m))
    for i, j in gt["matrix"]:
        matrix[i, j] = 1.0
    return ScenePair(
        source=src,
        target=tgt,
        gt_matrix=MatchingMatrix(matrix, kind="nonneg"),
        gt_transform=None if gt["transform"] is None else _transform_from_json(gt["transform"]),
        gt_flow=None if gt["flow"] is None else np.asarray(gt["flow"], dtype=np.float64),
        overlap_ratio=float(gt["overlap"]),
        seed=int(gt["seed"]),
    )


def write_trace(path, trace) -> None:
    """Dump a sequence of matching matrices for offline plotting."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(trace)))
        for m in trace:
            entries = m.entries if isinstance(m, MatchingMatrix) else np.asarray(m)
            r, c = entries.shape
            fh.write(struct.pack("<II", r, c))
            fh.write(entries.astype("<f4").tobytes(order="C"))


def read_trace(path) -> list[np.ndarray]:
    raw = Path(path).read_bytes()
    (count,) = struct.unpack("<I", raw[:4])
    out = []
    offset = 4
    for _ in range(count):
        r, c = struct.unpack("<II", raw[offset : offset + 8])
        offset += 8
        data = np.frombuffer(raw, dtype="<f4", offset=offset, count=r * c)
        offset += 4 * r * c
        out.append(data.reshape(r, c).astype(np.float64))
    return out
