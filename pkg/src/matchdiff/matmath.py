"""Matching-matrix representation, dummy padding, and feasibility projections.

A MatchingMatrix carries dense nonnegative (or raw-logit) correspondence
scores between N source elements and M target elements.  Two projections
confine a matrix to a feasible set: ``sinkhorn_project`` onto the doubly
stochastic polytope (log domain, unit marginals on the padded square) and
``softmax_project`` onto row-stochastic matrices.

Kind semantics: entries of a ``raw-logits`` matrix live in log space and may
be negative; entries of every other kind are weights.  Projections therefore
exponentiate raw logits but take logarithms of weights, which makes
permutation and doubly stochastic matrices exact fixed points of
``sinkhorn_project`` up to the clamp floor.
"""
from dataclasses import dataclass, field

import numpy as np

from ._backend import scaling_loop
from .errors import InvalidInputError

KINDS = ("raw-logits", "doubly-stochastic", "row-stochastic", "nonneg")

TOL_DS = 1e-6
EPS_DUMMY = float(np.exp(-10.0))
WEIGHT_FLOOR = 1e-30


@dataclass(frozen=True)
class MatchingMatrix:
    """Dense N x M correspondence score matrix.

    entries: the scores; float64, finite.
    kind: one of KINDS (see module docstring for the semantics).
    padded: for doubly-stochastic results of a non-square projection, the
        full padded square matrix whose row/column sums are the ones the
        invariant speaks about; None when no padding was involved.
    info: optional solver diagnostics (marginal violation, iterations).
    """

    entries: np.ndarray
    kind: str = "raw-logits"
    padded: np.ndarray | None = None
    info: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.size == 0:
            raise InvalidInputError(f"expected a nonempty 2-D matrix, got shape {entries.shape}")
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown kind {self.kind!r}")
        if not np.isfinite(entries).all():
            raise InvalidInputError("matrix entries must be finite")
        if self.kind != "raw-logits" and entries.min() < 0.0:
            raise InvalidInputError(f"kind {self.kind!r} requires nonnegative entries")
        if self.kind == "row-stochastic":
            rs = entries.sum(axis=1)
            if np.abs(rs - 1.0).max() > TOL_DS:
                raise InvalidInputError("row-stochastic rows must sum to 1")
        if self.kind == "doubly-stochastic":
            square = self.padded if self.padded is not None else entries
            if square.shape[0] != square.shape[1]:
                raise InvalidInputError("doubly-stochastic matrix must be square after padding")
            if (
                np.abs(square.sum(axis=1) - 1.0).max() > TOL_DS
                or np.abs(square.sum(axis=0) - 1.0).max() > TOL_DS
            ):
                raise InvalidInputError("doubly-stochastic sums deviate from 1 beyond tol_ds")

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]


def _log_weights(m, temperature):
    """Log-domain view of a matrix under the kind semantics above."""
    if temperature <= 0.0 or not np.isfinite(temperature):
        raise InvalidInputError("temperature must be a positive real")
    if m.kind == "raw-logits":
        return m.entries / temperature
    return np.log(np.clip(m.entries, WEIGHT_FLOOR, None)) / temperature


def pad_dummy(m: MatchingMatrix) -> MatchingMatrix:
    """Pad to square with dummy entries.

    Weight-space kinds are filled with EPS_DUMMY; raw logits with
    log(EPS_DUMMY) = -10 so the dummy mass after exponentiation is the same.
    The padded matrix of a weight kind is tagged "nonneg" because padding
    breaks stochasticity sums.
    """
    n, mm = m.entries.shape
    if n == mm:
        return m
    side = max(n, mm)
    fill = -10.0 if m.kind == "raw-logits" else EPS_DUMMY
    out = np.full((side, side), fill, dtype=np.float64)
    out[:n, :mm] = m.entries
    kind = "raw-logits" if m.kind == "raw-logits" else "nonneg"
    return MatchingMatrix(out, kind=kind)


def sinkhorn_project(m: MatchingMatrix, iters: int = 100, temperature: float = 1.0) -> MatchingMatrix:
    """Project onto doubly stochastic matrices (unit marginals, padded square).

    Runs ``iters`` alternating log-domain scaling passes and returns the
    unpadded N x M view; the full padded square (when padding happened) is
    kept on the result's ``padded`` field.  The kind is recorded as
    doubly-stochastic only when the achieved marginal violation is within
    tol_ds; an under-iterated projection comes back tagged "nonneg" with the
    violation in ``info`` instead of silently claiming feasibility.
    """
    if iters < 1:
        raise InvalidInputError("iters must be >= 1")
    logw = _log_weights(m, temperature)
    n, mm = logw.shape
    side = max(n, mm)
    if side != n or side != mm:
        fill = -10.0 / temperature
        padded_logs = np.full((side, side), fill, dtype=np.float64)
        padded_logs[:n, :mm] = logw
    else:
        padded_logs = np.ascontiguousarray(logw)
    zeros = np.zeros(side)
    log_u = np.zeros(side)
    log_v = np.zeros(side)
    _, viol = scaling_loop(padded_logs, zeros, zeros, log_u, log_v, iters, 0.0, iters)
    square = np.exp(padded_logs + log_u[:, None] + log_v[None, :])
    kind = "doubly-stochastic" if viol <= TOL_DS else "nonneg"
    info = {"marginal_violation": float(viol), "iterations": iters}
    if side == n and side == mm:
        return MatchingMatrix(square, kind=kind, info=info)
    return MatchingMatrix(square[:n, :mm], kind=kind, padded=square, info=info)


def softmax_project(m: MatchingMatrix, temperature: float = 1.0) -> MatchingMatrix:
    """Project onto row-stochastic matrices.

    Raw logits get a per-row max-subtracted softmax; weight kinds are plainly
    row-normalized (so stochastic rows and permutations are fixed points).
    """
    if m.kind == "raw-logits":
        z = m.entries / temperature
        z = z - z.max(axis=1, keepdims=True)
        w = np.exp(z)
    else:
        w = np.clip(m.entries, WEIGHT_FLOOR, None) ** (1.0 / temperature)
    return MatchingMatrix(w / w.sum(axis=1, keepdims=True), kind="row-stochastic")
