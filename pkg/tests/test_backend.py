import os
import subprocess
import sys

import numpy as np
import pytest

from matchdiff import _backend, _kernels_py

try:
    from matchdiff import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

needs_compiled = pytest.mark.skipif(_kernels_c is None, reason="compiled kernel unavailable")


def run_loop(scaling_loop, log_k, log_p, log_q, iters, tol=0.0, check_every=10**9):
    log_u = np.zeros(log_k.shape[0])
    log_v = np.zeros(log_k.shape[1])
    it, viol = scaling_loop(log_k.copy(), log_p, log_q, log_u, log_v, iters, tol, check_every)
    return it, viol, log_u, log_v


@needs_compiled
def test_backends_agree_bitwise_close():
    rng = np.random.default_rng(50)
    for _ in range(20):
        n, m = int(rng.integers(2, 30)), int(rng.integers(2, 30))
        log_k = np.ascontiguousarray(rng.standard_normal((n, m)) * 3.0)
        p = rng.random(n) + 0.1
        p /= p.sum()
        q = rng.random(m) + 0.1
        q /= q.sum()
        log_p = np.log(p)
        log_q = np.log(q)
        it_p, v_p, u_p, vv_p = run_loop(_kernels_py.scaling_loop, log_k, log_p, log_q, 100)
        it_c, v_c, u_c, vv_c = run_loop(_kernels_c.scaling_loop, log_k, log_p, log_q, 100)
        assert it_p == it_c
        assert abs(v_p - v_c) < 1e-12
        assert np.abs(u_p - u_c).max() < 1e-12
        assert np.abs(vv_p - vv_c).max() < 1e-12


@needs_compiled
def test_backends_agree_on_early_exit():
    rng = np.random.default_rng(51)
    log_k = np.ascontiguousarray(rng.standard_normal((12, 12)))
    zeros = np.zeros(12)
    it_p, v_p, *_ = run_loop(_kernels_py.scaling_loop, log_k, zeros, zeros, 500, tol=1e-9, check_every=5)
    it_c, v_c, *_ = run_loop(_kernels_c.scaling_loop, log_k, zeros, zeros, 500, tol=1e-9, check_every=5)
    assert it_p == it_c
    assert it_p < 500
    assert v_p < 1e-9 and v_c < 1e-9


def test_python_kernel_handles_hard_scales():
    # huge logit spread must not overflow the log-domain loop
    log_k = np.array([[500.0, -500.0], [-500.0, 500.0]])
    zeros = np.zeros(2)
    _, viol, log_u, log_v = run_loop(_kernels_py.scaling_loop, log_k, zeros, zeros, 50)
    plan = np.exp(log_k + log_u[:, None] + log_v[None, :])
    assert np.isfinite(plan).all()
    assert viol < 1e-9


def test_backend_selection_reports():
    assert _backend.BACKEND in ("compiled", "python")
    if _kernels_c is not None and not os.environ.get("MATCHDIFF_FORCE_PYTHON", ""):
        assert _backend.BACKEND == "compiled"


def test_force_python_env_var():
    code = "import matchdiff; print(matchdiff.BACKEND)"
    env = dict(os.environ, MATCHDIFF_FORCE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"


@needs_compiled
def test_full_pipeline_identical_across_backends():
    # the numpy fallback and the compiled kernel must produce the same plans
    code = (
        "import numpy as np\n"
        "from matchdiff.matmath import MatchingMatrix, sinkhorn_project\n"
        "m = MatchingMatrix(np.random.default_rng(3).standard_normal((9, 9)), kind='raw-logits')\n"
        "out = sinkhorn_project(m, iters=150)\n"
        "print(repr(out.entries.sum()), repr(float(out.entries[0, 0])))\n"
    )
    runs = {}
    for force in ("", "1"):
        env = dict(os.environ, MATCHDIFF_FORCE_PYTHON=force)
        res = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
        )
        runs[force] = res.stdout
    a = [float(tok) for tok in runs[""].replace("np.float64(", "").replace(")", "").split()]
    b = [float(tok) for tok in runs["1"].replace("np.float64(", "").replace(")", "").split()]
    assert abs(a[0] - b[0]) < 1e-12
    assert abs(a[1] - b[1]) < 1e-15
