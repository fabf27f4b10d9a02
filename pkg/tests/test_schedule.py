import numpy as np
import pytest

from matchdiff.errors import InvalidInputError
from matchdiff.matmath import MatchingMatrix
from matchdiff.schedule import (
    build_schedule,
    ddim_step,
    elbo_kl_term,
    forward_diffuse,
    posterior_mean_var,
    simple_loss_eval,
)

E0 = np.array([[2.0, -1.0], [0.5, 3.0]])
NOISE = np.array([[0.3, -1.75], [2.2, -0.4]])


def test_linear_schedule_frozen_values():
    s = build_schedule(1000)
    assert s.T == 1000
    assert s.kind == "linear-beta"
    assert abs(s.alpha_bar(1) - 0.9999) < 1e-15
    assert abs(s.alpha_bar(1000) - 4.035829765375676e-05) < 1e-18
    assert abs(s.alpha_bar(700) - 0.006966110556527834) < 1e-16
    assert abs(s.alpha(700) - 0.985975975975976) < 1e-15
    assert s.alpha_bar(0) == 1.0


def test_cosine_schedule_frozen_values():
    s = build_schedule(1000, kind="cosine")
    assert abs(s.alpha_bar(1) - 0.999958715775178) < 1e-12
    assert abs(s.alpha_bar(500) - 0.49384359044063775) < 1e-12


def test_schedule_monotone_and_consistent():
    for kind in ("linear-beta", "cosine"):
        s = build_schedule(500, kind=kind)
        assert np.all(np.diff(s.alpha_bars) < 0.0)
        assert np.all((s.alphas > 0.0) & (s.alphas < 1.0))
        assert np.abs(np.cumprod(s.alphas) - s.alpha_bars).max() < 1e-12


def test_schedule_validation():
    with pytest.raises(InvalidInputError):
        build_schedule(0)
    with pytest.raises(InvalidInputError):
        build_schedule(100, kind="mystery")
    with pytest.raises(InvalidInputError):
        build_schedule(100, beta_min=0.02, beta_max=1e-4)
    s = build_schedule(100)
    with pytest.raises(InvalidInputError):
        s.alpha_bar(101)
    with pytest.raises(InvalidInputError):
        s.alpha_bar(-1)


def test_forward_diffuse_plain_frozen():
    s = build_schedule(1000)
    e0 = MatchingMatrix(E0, kind="raw-logits")
    et = forward_diffuse(e0, 700, NOISE, s)
    expect = np.array(
        [[0.4658797148371625, -1.8273572296819698], [2.2340555012466035, -0.14821465675918133]]
    )
    assert et.kind == "raw-logits"
    assert np.abs(et.entries - expect).max() < 1e-15


def test_forward_diffuse_rigid_folds_noise():
    s = build_schedule(1000)
    e0 = MatchingMatrix(E0, kind="raw-logits")
    et = forward_diffuse(e0, 700, NOISE, s, variant="rigid")
    expect = np.array(
        [[0.6153563434868552, 1.0376114861038064], [0.3406848716838299, 0.8482962009054366]]
    )
    assert np.abs(et.entries - expect).max() < 1e-15
    # folding example: -1.75 maps to 1.5 * 0.75 = 1.125
    folded = 1.5 * (np.abs(NOISE) % 1.0)
    assert abs(folded[0, 1] - 1.125) < 1e-15


def test_forward_diffuse_validation():
    s = build_schedule(100)
    e0 = MatchingMatrix(E0, kind="raw-logits")
    with pytest.raises(InvalidInputError):
        forward_diffuse(e0, 0, NOISE, s)
    with pytest.raises(InvalidInputError):
        forward_diffuse(e0, 101, NOISE, s)
    with pytest.raises(InvalidInputError):
        forward_diffuse(e0, 5, NOISE[:1], s)
    with pytest.raises(InvalidInputError):
        forward_diffuse(e0, 5, NOISE, s, variant="unknown")


def test_posterior_frozen_values():
    s = build_schedule(1000)
    et = MatchingMatrix(
        np.array(
            [[0.4658797148371625, -1.8273572296819698], [2.2340555012466035, -0.14821465675918133]]
        ),
        kind="raw-logits",
    )
    e0hat = MatchingMatrix(np.eye(2), kind="raw-logits")
    mu, var = posterior_mean_var(et, e0hat, 700, s)
    expect_mu = np.array(
        [[0.46374232350415456, -1.8143174908823096], [2.218113626430332, -0.14596996555578706]]
    )
    assert np.abs(mu - expect_mu).max() < 1e-14
    assert abs(var - 0.014022624742004235) < 1e-16


def test_posterior_rejects_terminal_step():
    s = build_schedule(1000)
    m = MatchingMatrix(np.eye(2), kind="raw-logits")
    with pytest.raises(InvalidInputError):
        posterior_mean_var(m, m, 1, s)


def test_ddim_step_frozen_value():
    s = build_schedule(1000)
    et = MatchingMatrix(
        np.array(
            [[0.4658797148371625, -1.8273572296819698], [2.2340555012466035, -0.14821465675918133]]
        ),
        kind="raw-logits",
    )
    e0hat = MatchingMatrix(np.eye(2), kind="raw-logits")
    out = ddim_step(et, e0hat, 700, 400, 0.0, s)
    expect = np.array(
        [[0.7860347881184031, -1.6451286062346446], [2.011269911169099, 0.23317943984221642]]
    )
    assert np.abs(out.entries - expect).max() < 1e-14


def test_ddim_step_stochastic_frozen_value():
    s = build_schedule(1000)
    et = MatchingMatrix(
        np.array(
            [[0.4658797148371625, -1.8273572296819698], [2.2340555012466035, -0.14821465675918133]]
        ),
        kind="raw-logits",
    )
    e0hat = MatchingMatrix(np.eye(2), kind="raw-logits")
    z = np.array([[0.1, -0.2], [0.3, 0.05]])
    out = ddim_step(et, e0hat, 700, 400, 0.2, s, noise=z)
    expect = np.array(
        [[0.7973706470986011, -1.6437274603418581], [2.0206544889422196, 0.24842840254260165]]
    )
    assert np.abs(out.entries - expect).max() < 1e-14


def test_ddim_terminal_step_returns_prediction():
    s = build_schedule(1000)
    rng = np.random.default_rng(7)
    for _ in range(10):
        et = MatchingMatrix(rng.standard_normal((3, 3)), kind="raw-logits")
        e0hat = MatchingMatrix(rng.standard_normal((3, 3)), kind="raw-logits")
        out = ddim_step(et, e0hat, 50, 0, 0.0, s)
        # alpha_bar(0) = 1 makes the terminal step return the prediction exactly
        assert np.abs(out.entries - e0hat.entries).max() == 0.0


def test_ddim_validation():
    s = build_schedule(100)
    m = MatchingMatrix(np.eye(2), kind="raw-logits")
    with pytest.raises(InvalidInputError):
        ddim_step(m, m, 50, 60, 0.0, s)
    with pytest.raises(InvalidInputError):
        ddim_step(m, m, 50, 10, 0.5, s)  # sigma > 0 without noise
    with pytest.raises(InvalidInputError):
        ddim_step(m, m, 50, 10, -0.1, s)


def test_simple_loss_frozen_value():
    e0 = MatchingMatrix(np.eye(2), kind="doubly-stochastic")
    e0hat = MatchingMatrix(np.array([[0.7, 0.3], [0.2, 0.8]]), kind="row-stochastic")
    assert abs(simple_loss_eval(e0hat, e0) - 0.5798184952502636) < 1e-12


def test_elbo_kl_frozen_value():
    s = build_schedule(1000)
    et = MatchingMatrix(
        np.array(
            [[0.4658797148371625, -1.8273572296819698], [2.2340555012466035, -0.14821465675918133]]
        ),
        kind="raw-logits",
    )
    e0 = MatchingMatrix(np.eye(2), kind="raw-logits")
    e0hat = MatchingMatrix(np.eye(2) - 0.1, kind="raw-logits")
    kl = elbo_kl_term(et, e0hat, e0, 700, s)
    assert abs(kl - 2.0097492129135524e-06) < 1e-18
    # exact prediction has zero divergence
    assert elbo_kl_term(et, e0, e0, 700, s) == 0.0


def test_forward_then_reverse_identity_when_prediction_exact():
    # one deterministic jump T -> 0 with the true e0 as prediction recovers e0
    s = build_schedule(1000)
    rng = np.random.default_rng(8)
    for _ in range(10):
        e0 = MatchingMatrix(rng.random((4, 4)), kind="nonneg")
        noise = rng.standard_normal((4, 4))
        et = forward_diffuse(e0, 1000, noise, s)
        out = ddim_step(et, e0, 1000, 0, 0.0, s)
        assert np.abs(out.entries - e0.entries).max() == 0.0
