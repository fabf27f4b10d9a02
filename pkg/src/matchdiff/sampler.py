"""Reverse denoising sampling over a timestep subsequence, plus
correspondence extraction from the final matrix.

Each step predicts the clean matrix with the plugged-in denoiser, takes a
DDIM update toward the next timestep in the evenly spaced subsequence, and
re-projects the state into the mode's feasible set.  The raw DDIM output has
negative entries at high t, so projection clips it at a tiny relative floor
first; the predicted clean state itself is a fixed point of this treatment,
which is what makes the oracle trajectory land on the ground truth exactly.
"""
from dataclasses import dataclass

import numpy as np

from .denoise import MODES, DenoiserInput
from .errors import InvalidInputError, SamplerStepError
from .matmath import MatchingMatrix, sinkhorn_project, softmax_project
from .schedule import DiffusionSchedule, ddim_step
from .synth import ScenePair

INIT_KINDS = ("white-noise", "uniform", "provided")


@dataclass(frozen=True)
class SamplerConfig:
    """Reverse-sampling knobs: step budget, DDIM sigma, init rule, seed."""

    steps: int = 20
    sigma: float = 0.0
    init: str = "white-noise"
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidInputError("steps must be >= 1")
        if self.sigma < 0.0:
            raise InvalidInputError("sigma must be >= 0")
        if self.init not in INIT_KINDS:
            raise InvalidInputError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class CorrespondenceSet:
    """Extracted (source, target, score) pairs plus the extraction mode.

    ``warning`` records a clipped over-large k request; None otherwise.
    """

    pairs: tuple
    mode: str
    warning: str | None = None

    def __post_init__(self):
        seen = set()
        for i, j, score in self.pairs:
            if (i, j) in seen:
                raise InvalidInputError(f"duplicate pair ({i}, {j})")
            seen.add((i, j))
            if not np.isfinite(score):
                raise InvalidInputError("scores must be finite")

    def __len__(self):
        return len(self.pairs)

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.pairs:
            return np.empty(0, dtype=np.intp), np.empty(0, dtype=np.intp)
        arr = np.asarray([(i, j) for i, j, _ in self.pairs], dtype=np.intp)
        return arr[:, 0], arr[:, 1]


def timestep_subsequence(T: int, steps: int) -> list[int]:
    """Evenly spaced descending timesteps from T down to 1, ``steps`` long."""
    if not 1 <= steps <= T:
        raise InvalidInputError("need 1 <= steps <= T")
    ts = np.unique(np.round(np.linspace(T, 1, steps)).astype(int))[::-1]
    return [int(t) for t in ts]


def _project_state(entries: np.ndarray, mode: str, sinkhorn_iters: int) -> MatchingMatrix:
    floor = max(float(entries.max()) * 1e-12, 1e-30)
    clipped = MatchingMatrix(np.clip(entries, floor, None), kind="nonneg")
    if mode == "registration-3d":
        return sinkhorn_project(clipped, iters=sinkhorn_iters)
    return softmax_project(clipped)


def reverse_sample(
    pair: ScenePair,
    schedule: DiffusionSchedule,
    denoiser,
    cfg: SamplerConfig,
    mode: str = "registration-3d",
    init_matrix: MatchingMatrix | None = None,
    sinkhorn_iters: int = 100,
    keep_trace: bool = True,
) -> tuple[MatchingMatrix, list[MatchingMatrix]]:
    """Run the reverse sampling loop; returns (final matrix, trace).

    The trace holds the initial projected state plus one state per step
    (steps + 1 entries) when keep_trace is set, else only the final state.
    The denoiser is any callable DenoiserInput -> MatchingMatrix.
    """
    if mode not in MODES:
        raise InvalidInputError(f"unknown mode {mode!r}")
    if not 1 <= cfg.steps <= schedule.T:
        raise InvalidInputError("cfg.steps must lie in [1, schedule.T]")
    rng = np.random.default_rng(cfg.seed)
    n, m = len(pair.source), len(pair.target)
    if cfg.init == "white-noise":
        start = MatchingMatrix(rng.standard_normal((n, m)), kind="raw-logits")
        state = (
            sinkhorn_project(start, iters=sinkhorn_iters)
            if mode == "registration-3d"
            else softmax_project(start)
        )
    elif cfg.init == "uniform":
        state = _project_state(np.ones((n, m)), mode, sinkhorn_iters)
    else:
        if init_matrix is None:
            raise InvalidInputError("init='provided' requires init_matrix")
        state = _project_state(init_matrix.entries, mode, sinkhorn_iters)
    trace = [state]
    ts = timestep_subsequence(schedule.T, cfg.steps)
    prevs = ts[1:] + [0]
    for step_index, (t, t_prev) in enumerate(zip(ts, prevs)):
        try:
            e0hat = denoiser(DenoiserInput(et=state, p=pair.source, q=pair.target, t=t, mode=mode))
        except Exception as exc:
            raise SamplerStepError(step_index, t, exc) from exc
        noise = rng.standard_normal((n, m)) if cfg.sigma > 0.0 else None
        raw = ddim_step(state, e0hat, t, t_prev, cfg.sigma, schedule, noise)
        state = _project_state(raw.entries, mode, sinkhorn_iters)
        if keep_trace:
            trace.append(state)
    if not keep_trace:
        trace = [state]
    return state, trace


def extract_correspondences(
    e: MatchingMatrix,
    mode: str = "mutual-argmax",
    k: int = 0,
    thresh: float = 0.0,
) -> CorrespondenceSet:
    """Extract correspondence pairs from a matching matrix.

    topk: k globally largest entries; mutual-argmax: pairs that are argmax of
    both their row and their column; threshold: all entries > thresh.  Ties
    break toward lower row then lower column index.
    """
    entries = e.entries
    n, m = entries.shape
    warning = None
    if mode == "topk":
        if k < 1:
            raise InvalidInputError("topk requires k >= 1")
        if k > n * m:
            warning = f"k={k} clipped to {n * m}"
            k = n * m
        flat = entries.ravel()
        # stable sort on negated scores keeps row-major (low i, low j) tie order
        order = np.argsort(-flat, kind="stable")[:k]
        pairs = tuple((int(ix // m), int(ix % m), float(flat[ix])) for ix in order)
    elif mode == "mutual-argmax":
        row_best = entries.argmax(axis=1)
        col_best = entries.argmax(axis=0)
        pairs = tuple(
            (int(i), int(j), float(entries[i, j]))
            for i, j in enumerate(row_best)
            if col_best[j] == i
        )
    elif mode == "threshold":
        rows, cols = np.nonzero(entries > thresh)
        pairs = tuple(
            (int(i), int(j), float(entries[i, j])) for i, j in zip(rows, cols)
        )
    else:
        raise InvalidInputError(f"unknown extraction mode {mode!r}")
    return CorrespondenceSet(pairs=pairs, mode=mode, warning=warning)
