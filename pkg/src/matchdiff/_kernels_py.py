"""Pure-numpy reference kernels.

The compiled extension in ``_kernels.pyx`` implements the same loop with the
same arithmetic (max-subtracted log-sum-exp); either backend may be active.
"""
import numpy as np


def _lse_rows(mat):
    """Row-wise log-sum-exp with -inf guard: empty mass rows yield -inf."""
    m = mat.max(axis=1)
    finite = np.isfinite(m)
    out = np.full(mat.shape[0], -np.inf)
    if finite.any():
        shifted = mat[finite] - m[finite, None]
        out[finite] = m[finite] + np.log(np.exp(shifted).sum(axis=1))
    return out


def scaling_loop(log_k, log_p, log_q, log_u, log_v, max_iters, tol, check_every):
    """Alternating log-domain Sinkhorn scaling toward marginals exp(log_p/q).

    Updates log_u and log_v in place.  When tol > 0, the marginal violation
    (L-inf over both marginals) is checked every ``check_every`` iterations
    and the loop exits early once it drops below tol.  Returns
    (iterations_run, final_violation).
    """
    p = np.exp(log_p)
    q = np.exp(log_q)
    it = 0
    for it in range(1, max_iters + 1):
        lse = _lse_rows(log_k + log_v[None, :])
        log_u[:] = np.where(np.isneginf(lse), 0.0, log_p - lse)
        lse = _lse_rows(log_k.T + log_u[None, :])
        log_v[:] = np.where(np.isneginf(lse), 0.0, log_q - lse)
        if tol > 0.0 and it % check_every == 0:
            if _violation(log_k, log_u, log_v, p, q) < tol:
                break
    return it, _violation(log_k, log_u, log_v, p, q)


def _violation(log_k, log_u, log_v, p, q):
    plan = np.exp(log_k + log_u[:, None] + log_v[None, :])
    return max(
        np.abs(plan.sum(axis=1) - p).max(),
        np.abs(plan.sum(axis=0) - q).max(),
    )
