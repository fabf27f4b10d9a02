"""Diffusion noise schedule and the forward/reverse update rules.

The forward process perturbs a clean matching matrix E^0 into
E^t = sqrt(abar_t) E^0 + sqrt(1 - abar_t) eps with eps standard normal
(``plain``/``deformable``) or with the folded noise
f(eps) = eta * (|eps| mod 1) (``rigid``).  The reverse direction is served by
the Gaussian posterior mean/variance and a DDIM update that becomes
deterministic at sigma = 0 and returns the predicted clean state exactly at
t_prev = 0 (abar_0 = 1 convention).
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .matmath import MatchingMatrix

EPS_LOG = 1e-12
SCHEDULE_KINDS = ("linear-beta", "cosine")


@dataclass(frozen=True)
class DiffusionSchedule:
    """Per-timestep alpha_t and abar_t = prod_{s<=t} alpha_s, 1-indexed in t."""

    T: int
    alphas: np.ndarray
    alpha_bars: np.ndarray
    kind: str = "linear-beta"

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.float64)
        bars = np.asarray(self.alpha_bars, dtype=np.float64)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", bars)
        if self.T < 1 or len(alphas) != self.T or len(bars) != self.T:
            raise InvalidInputError("schedule arrays must have length T >= 1")
        if not ((alphas > 0.0) & (alphas < 1.0)).all():
            raise InvalidInputError("every alpha_t must lie in (0, 1)")
        if bars[0] >= 1.0 or (np.diff(bars) >= 0.0).any():
            raise InvalidInputError("alpha_bar must be strictly decreasing and < 1")
        ref = np.cumprod(alphas)
        if np.abs(bars / ref - 1.0).max() > 1e-12:
            raise InvalidInputError("alpha_bars inconsistent with cumulative product")

    def alpha_bar(self, t: int) -> float:
        """abar_t with the abar_0 = 1 convention; t in [0, T]."""
        if not 0 <= t <= self.T:
            raise InvalidInputError(f"timestep {t} outside [0, {self.T}]")
        return 1.0 if t == 0 else float(self.alpha_bars[t - 1])

    def alpha(self, t: int) -> float:
        if not 1 <= t <= self.T:
            raise InvalidInputError(f"timestep {t} outside [1, {self.T}]")
        return float(self.alphas[t - 1])


def build_schedule(
    T: int = 1000,
    kind: str = "linear-beta",
    beta_min: float = 1e-4,
    beta_max: float = 0.02,
) -> DiffusionSchedule:
    """Construct a schedule; linear-beta is the default, cosine is optional."""
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    if kind == "linear-beta":
        if not 0.0 < beta_min <= beta_max < 1.0:
            raise InvalidInputError("need 0 < beta_min <= beta_max < 1")
        betas = np.linspace(beta_min, beta_max, T)
        alphas = 1.0 - betas
    elif kind == "cosine":
        s = 0.008
        grid = np.arange(T + 1, dtype=np.float64) / T
        f = np.cos((grid + s) / (1.0 + s) * math.pi / 2.0) ** 2
        bars = f[1:] / f[0]
        alphas = bars / np.concatenate(([1.0], bars[:-1]))
        alphas = np.clip(alphas, 1e-6, 1.0 - 1e-6)
    else:
        raise InvalidInputError(f"unknown schedule kind {kind!r}")
    return DiffusionSchedule(T=T, alphas=alphas, alpha_bars=np.cumprod(alphas), kind=kind)


def _folded_noise(noise: np.ndarray, eta: float) -> np.ndarray:
    # (eps mod 1) carrying the sign of eps, times |eps|/eps, collapses to
    # eta * (|eps| mod 1); zero stays zero since |0| mod 1 = 0
    return eta * np.mod(np.abs(noise), 1.0)


def forward_diffuse(
    e0: MatchingMatrix,
    t: int,
    noise: np.ndarray,
    schedule: DiffusionSchedule,
    variant: str = "plain",
    eta: float = 1.5,
) -> MatchingMatrix:
    """Closed-form forward noising q(E^t | E^0); not auto-projected."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != e0.entries.shape:
        raise InvalidInputError("noise shape must match e0")
    if not 1 <= t <= schedule.T:
        raise InvalidInputError(f"timestep {t} outside [1, {schedule.T}]")
    if variant not in ("plain", "deformable", "rigid"):
        raise InvalidInputError(f"unknown variant {variant!r}")
    eps = _folded_noise(noise, eta) if variant == "rigid" else noise
    ab = schedule.alpha_bar(t)
    out = math.sqrt(ab) * e0.entries + math.sqrt(1.0 - ab) * eps
    return MatchingMatrix(out, kind="raw-logits")


def posterior_mean_var(
    et: MatchingMatrix,
    e0hat: MatchingMatrix,
    t: int,
    s: DiffusionSchedule,
) -> tuple[np.ndarray, float]:
    """Mean and (scalar) variance of q(E^{t-1} | E^t, E^0)."""
    if et.entries.shape != e0hat.entries.shape:
        raise InvalidInputError("et and e0hat must have equal shapes")
    if t < 2:
        raise InvalidInputError("posterior defined for t >= 2; use the terminal rule at t = 1")
    if t > s.T:
        raise InvalidInputError(f"timestep {t} outside [2, {s.T}]")
    a_t = s.alpha(t)
    ab_t = s.alpha_bar(t)
    ab_prev = s.alpha_bar(t - 1)
    mean = (
        math.sqrt(a_t) * (1.0 - ab_prev) * et.entries
        + math.sqrt(ab_prev) * (1.0 - a_t) * e0hat.entries
    ) / (1.0 - ab_t)
    var = (1.0 - a_t) * (1.0 - ab_prev) / (1.0 - ab_t)
    return mean, var


def ddim_step(
    et: MatchingMatrix,
    e0hat: MatchingMatrix,
    t: int,
    t_prev: int,
    sigma: float,
    s: DiffusionSchedule,
    noise: np.ndarray | None = None,
) -> MatchingMatrix:
    """DDIM update from timestep t to t_prev using the predicted clean state.

    sigma = 0 is deterministic; t_prev = 0 with sigma = 0 returns e0hat
    exactly.  The result is an unconstrained state (kind raw-logits);
    projection is the caller's explicit step.
    """
    if et.entries.shape != e0hat.entries.shape:
        raise InvalidInputError("et and e0hat must have equal shapes")
    if t_prev >= t:
        raise InvalidInputError("t_prev must be < t")
    if not 1 <= t <= s.T or t_prev < 0:
        raise InvalidInputError("timesteps outside schedule range")
    if sigma < 0.0:
        raise InvalidInputError("sigma must be >= 0")
    ab_t = s.alpha_bar(t)
    ab_prev = s.alpha_bar(t_prev)
    eps_hat = (et.entries - math.sqrt(ab_t) * e0hat.entries) / math.sqrt(1.0 - ab_t)
    coeff = max(1.0 - ab_prev - sigma * sigma, 0.0)
    out = math.sqrt(ab_prev) * e0hat.entries + math.sqrt(coeff) * eps_hat
    if sigma > 0.0:
        if noise is None:
            raise InvalidInputError("sigma > 0 requires a noise matrix")
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != et.entries.shape:
            raise InvalidInputError("noise shape must match et")
        out = out + sigma * noise
    return MatchingMatrix(out, kind="raw-logits")


def simple_loss_eval(e0hat: MatchingMatrix, e0: MatchingMatrix) -> float:
    """Per-sample negative log-likelihood -sum E^0 log(Ehat^0 + eps_log)."""
    if e0hat.entries.shape != e0.entries.shape:
        raise InvalidInputError("shapes must match")
    return float(-(e0.entries * np.log(e0hat.entries + EPS_LOG)).sum())


def elbo_kl_term(
    et: MatchingMatrix,
    e0hat: MatchingMatrix,
    e0: MatchingMatrix,
    t: int,
    s: DiffusionSchedule,
) -> float:
    """KL between the two same-variance Gaussian posteriors (truth vs predicted).

    Equals ||mu_q - mu_theta||_F^2 / (2 Sigma_q(t)).
    """
    mu_q, var = posterior_mean_var(et, e0, t, s)
    mu_t, _ = posterior_mean_var(et, e0hat, t, s)
    return float(((mu_q - mu_t) ** 2).sum() / (2.0 * var))
