"""Entropic optimal transport, the iterated-OT correspondence scheme, and
exhaustive small-instance oracles for checking the two structural claims.

The OT objective is <C, E> + eps * sum E_ij (log E_ij - 1) over the transport
polytope Pi(p, q); its minimizer is a Sinkhorn scaling fixed point, computed
here in the log domain.  For small eps the solver anneals eps downward while
carrying the dual potentials, which converges far faster than scaling at the
target eps directly.
"""
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import scaling_loop
from .errors import InvalidInputError, SizeLimitError
from .geometry import PointCloud, apply_transform, soft_procrustes
from .matmath import MatchingMatrix

OT_TOL = 1e-9
TOL_FIX = 1e-6
ANNEAL_START = 1.0
ANNEAL_FACTOR = 0.25
ANNEAL_STAGE_ITERS = 50
ASSIGN_MAX_N = 8
VERIFY_MAX_N = 6


@dataclass(frozen=True)
class TransportProblem:
    """Cost matrix, marginal vectors (each summing to 1), and epsilon > 0."""

    cost: np.ndarray
    row_marginals: np.ndarray
    col_marginals: np.ndarray
    epsilon: float

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=np.float64)
        p = np.asarray(self.row_marginals, dtype=np.float64)
        q = np.asarray(self.col_marginals, dtype=np.float64)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "row_marginals", p)
        object.__setattr__(self, "col_marginals", q)
        if cost.ndim != 2 or cost.size == 0 or not np.isfinite(cost).all():
            raise InvalidInputError("cost must be a finite nonempty matrix")
        if p.shape != (cost.shape[0],) or q.shape != (cost.shape[1],):
            raise InvalidInputError("marginal lengths must match the cost shape")
        for vec in (p, q):
            if vec.min() < 0.0 or abs(vec.sum() - 1.0) > 1e-9:
                raise InvalidInputError("marginals must be nonnegative and sum to 1")
        if not (self.epsilon > 0.0 and np.isfinite(self.epsilon)):
            raise InvalidInputError("epsilon must be a positive real")


def uniform_transport(cost: np.ndarray, epsilon: float) -> TransportProblem:
    """Transport problem with uniform marginals 1/N and 1/M."""
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    return TransportProblem(cost, np.full(n, 1.0 / n), np.full(m, 1.0 / m), epsilon)


def entropic_ot(prob: TransportProblem, iters: int = 5000) -> MatchingMatrix:
    """Solve the entropic OT problem by annealed log-domain scaling.

    Returns the plan (kind "nonneg") with solver diagnostics in ``info``:
    marginal_violation (L-inf), iterations, converged.  If the budget runs
    out before the violation drops below 1e-6, the best iterate is returned
    with converged=False rather than raising.
    """
    if iters < 1:
        raise InvalidInputError("iters must be >= 1")
    n, m = prob.cost.shape
    with np.errstate(divide="ignore"):
        log_p = np.log(prob.row_marginals)
        log_q = np.log(prob.col_marginals)
    # dual potentials f, g persist across annealing stages
    f = np.zeros(n)
    g = np.zeros(m)
    eps_seq = []
    e = ANNEAL_START
    while e > prob.epsilon * (1.0 + 1e-12):
        eps_seq.append(e)
        e = max(e * ANNEAL_FACTOR, prob.epsilon)
    eps_seq.append(prob.epsilon)
    total = 0
    viol = math.inf
    for stage, eps in enumerate(eps_seq):
        final = stage == len(eps_seq) - 1
        budget = max(iters - total, 1) if final else ANNEAL_STAGE_ITERS
        log_k = np.ascontiguousarray(-prob.cost / eps)
        log_u = f / eps
        log_v = g / eps
        it, viol = scaling_loop(
            log_k, log_p, log_q, log_u, log_v, budget,
            OT_TOL if final else 0.0, 10,
        )
        total += it
        f = eps * log_u
        g = eps * log_v
    eps = prob.epsilon
    plan = np.exp(-prob.cost / eps + (f / eps)[:, None] + (g / eps)[None, :])
    # rows with zero requested marginal scale to exactly zero mass
    plan[prob.row_marginals == 0.0, :] = 0.0
    plan[:, prob.col_marginals == 0.0] = 0.0
    info = {
        "marginal_violation": float(viol),
        "iterations": int(total),
        "converged": bool(viol < 1e-6),
    }
    return MatchingMatrix(plan, kind="nonneg", info=info)


def ot_objective(prob: TransportProblem, plan: np.ndarray) -> float:
    """<C, E> + eps * sum E (log E - 1); zero entries contribute zero entropy."""
    e = np.asarray(plan, dtype=np.float64)
    pos = e > 0.0
    ent = float((e[pos] * (np.log(e[pos]) - 1.0)).sum())
    return float((prob.cost * e).sum()) + prob.epsilon * ent


def theorem2_iterate(
    p: PointCloud,
    q: PointCloud,
    n_outer: int = 10,
    epsilon: float = 0.01,
    lambda_geo: float = 50.0,
    tol_fix: float = TOL_FIX,
    ot_iters: int = 5000,
) -> tuple[list[MatchingMatrix], bool]:
    """Alternate entropic OT over a warp-refreshed cost with Procrustes refits.

    The initial plan solves the transport problem on the pure feature cost
    (-feature logits); each outer step rebuilds the cost as
    -feature logits + lambda_geo * squared distances after warping by the
    current plan's weighted-Procrustes fit, then re-solves.  Stops when
    consecutive plans differ by less than tol_fix in Frobenius norm.
    """
    if p.features is None or q.features is None:
        raise InvalidInputError("both clouds need features")
    if n_outer < 0:
        raise InvalidInputError("n_outer must be >= 0")
    d = p.features.shape[1]
    if q.features.shape[1] != d:
        raise InvalidInputError("feature dimensions must match")
    feat = (p.features @ q.features.T) / math.sqrt(d)
    plan = entropic_ot(uniform_transport(-feat, epsilon), iters=ot_iters)
    seq = [plan]
    converged = False
    for _ in range(n_outer):
        tf = soft_procrustes(plan, p, q)
        warped = apply_transform(tf, p).points
        d2 = ((warped[:, None, :] - q.points[None, :, :]) ** 2).sum(axis=2)
        cost = -feat + lambda_geo * d2
        nxt = entropic_ot(uniform_transport(cost, epsilon), iters=ot_iters)
        seq.append(nxt)
        delta = float(np.linalg.norm(nxt.entries - plan.entries))
        plan = nxt
        if delta < tol_fix:
            converged = True
            break
    return seq, converged


@lru_cache(maxsize=8)
def _perm_table(n: int) -> np.ndarray:
    """All permutations of range(n) in lexicographic order, one per row."""
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def exact_assignment(cost: np.ndarray, n: int | None = None) -> tuple[tuple[int, ...], float]:
    """Exhaustive minimum-cost assignment for square matrices up to 8 x 8.

    Ties break toward the lexicographically smallest permutation.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise InvalidInputError("cost must be square")
    if n is None:
        n = cost.shape[0]
    if n != cost.shape[0]:
        raise InvalidInputError("n must equal the cost side length")
    if n > ASSIGN_MAX_N:
        raise SizeLimitError(f"exhaustive assignment refused for n > {ASSIGN_MAX_N}")
    perms = _perm_table(n)
    values = cost[np.arange(n)[None, :], perms].sum(axis=1)
    best = int(np.argmin(values))  # argmin takes the first, i.e. lexicographic, minimum
    return tuple(int(v) for v in perms[best]), float(values[best])


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


def verify_theorem1(
    p: PointCloud,
    q: PointCloud,
    n_warp_samples: int = 32,
    seed: int = 0,
) -> dict:
    """Check that optimizing over matchings does at least as well as any
    sampled warp: LHS = min over permutations E of the squared residual sum
    under E's own weighted-Procrustes fit; RHS_upper = min over a warp sample
    set (all permutation fits plus random SE(3) warps) of the squared
    residual sum under that warp's best bijective matching.

    RHS_upper >= the true warp-space optimum, so holds = (LHS <= RHS_upper +
    1e-9) is a necessary condition for the matching-side optimum to lower-
    bound warp-space search; both sides use squared residuals and bijective
    matchings so the Procrustes fit is the exact minimizer of the evaluated
    objective.
    """
    n = len(p)
    if len(q) != n:
        raise InvalidInputError("verifier requires N = M")
    if n > VERIFY_MAX_N:
        raise SizeLimitError(f"verifier refused for N > {VERIFY_MAX_N}")
    if n_warp_samples < 0:
        raise InvalidInputError("n_warp_samples must be >= 0")
    perms = _perm_table(n)
    rows = np.arange(n)
    warps = []
    lhs = math.inf
    for perm in perms:
        e = np.zeros((n, n))
        e[rows, perm] = 1.0
        tf = soft_procrustes(MatchingMatrix(e, kind="nonneg"), p, q)
        warped = apply_transform(tf, p).points
        cost = float(((warped - q.points[perm]) ** 2).sum())
        lhs = min(lhs, cost)
        warps.append(tf)
    rng = np.random.default_rng(seed)
    q_bar = q.points.mean(axis=0)
    p_bar = p.points.mean(axis=0)
    for _ in range(n_warp_samples):
        R = _random_rotation(rng)
        t = q_bar - R @ p_bar + 0.1 * rng.standard_normal(3)
        warps.append(RigidTransformLite(R, t))
    rhs = math.inf
    for tf in warps:
        warped = p.points @ tf.rotation.T + tf.translation
        d2 = ((warped[:, None, :] - q.points[None, :, :]) ** 2).sum(axis=2)
        _, value = exact_assignment(d2)
        rhs = min(rhs, value)
    return {"lhs": lhs, "rhs_upper": rhs, "holds": bool(lhs <= rhs + 1e-9)}


class RigidTransformLite:
    """Unvalidated (rotation, translation) pair for sampled warps."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation, translation):
        self.rotation = rotation
        self.translation = translation
