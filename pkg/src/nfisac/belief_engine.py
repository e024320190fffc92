"""Grid Bayesian filter over eavesdropper azimuth."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernels


@dataclass(frozen=True)
class BeliefHyperparams:
    num_bins: int = 181
    sigma0: float = 5.0
    k_ex: float = 0.5
    k_ey: float = 0.2
    sigma_min: float = 1.0
    sigma_max: float = 20.0
    k_min: float = 1.0
    k_max: float = 4.0
    conf_th: float = 0.9
    gamma_min: float = 0.1
    gamma_max: float = 0.5
    h_star: float | None = None  # None -> 0.3 * log2(num_bins)
    sensing_snr_db: float = 10.0
    meas_sigma_deg: float = 1.0
    sensing_floor: float = 0.1
    sensing_noise_sigma: float = 0.1
    max_passes: int = 2
    mixing: float = 1e-3  # uniform track-birth share added at every prediction

    def __post_init__(self):
        if self.num_bins < 2:
            raise ValueError("num_bins must be >= 2")
        if not self.sigma_min <= self.sigma0 <= self.sigma_max:
            raise ValueError("need sigma_min <= sigma0 <= sigma_max")
        if self.k_min > self.k_max:
            raise ValueError("need k_min <= k_max")
        if self.gamma_min > self.gamma_max:
            raise ValueError("need gamma_min <= gamma_max")
        if not 0.0 < self.conf_th <= 1.0:
            raise ValueError("conf_th must lie in (0, 1]")
        if not 0.0 <= self.mixing < 1.0:
            raise ValueError("mixing must lie in [0, 1)")

    @property
    def max_entropy(self) -> float:
        return float(np.log2(self.num_bins))

    @property
    def entropy_target(self) -> float:
        return 0.3 * self.max_entropy if self.h_star is None else float(self.h_star)


def angle_grid(num_bins) -> np.ndarray:
    return np.linspace(-90.0, 90.0, num_bins)


@dataclass
class AngularBelief:
    probs: np.ndarray
    grid: np.ndarray
    sigma: float

    @classmethod
    def uniform(cls, num_bins=181, sigma=5.0) -> "AngularBelief":
        return cls(np.full(num_bins, 1.0 / num_bins), angle_grid(num_bins), float(sigma))

    @classmethod
    def delta(cls, angle, num_bins=181, sigma=5.0) -> "AngularBelief":
        b = cls(np.zeros(num_bins), angle_grid(num_bins), float(sigma))
        b.probs[b.index_of(angle)] = 1.0
        return b

    @property
    def num_bins(self) -> int:
        return self.probs.shape[0]

    @property
    def bin_width(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def index_of(self, angle) -> int:
        return int(np.argmin(np.abs(self.grid - angle)))

    def map_angle(self) -> float:
        return float(self.grid[int(np.argmax(self.probs))])

    def with_probs(self, probs) -> "AngularBelief":
        return replace(self, probs=probs)

    def rows(self, slot):
        """Snapshot rows ``(slot, bin_angle, prob)`` for plotting."""
        return [(slot, float(a), float(p)) for a, p in zip(self.grid, self.probs)]


@lru_cache(maxsize=256)
def _drift_kernel(sigma_bins):
    k = kernels.gaussian_kernel(sigma_bins)
    k.flags.writeable = False
    return k


def predict(belief: AngularBelief, mixing=0.0) -> AngularBelief:
    """Diffuse the belief with a Gaussian drift kernel of width ``belief.sigma``.

    The ends of the +/-90 deg grid reflect, which keeps the transition doubly
    stochastic: mass is conserved, uniform is a fixed point and entropy never
    decreases. ``mixing`` blends in a uniform share so that directions the
    filter has written off can be re-acquired; the blend is doubly
    stochastic too.
    """
    kernel = _drift_kernel(belief.sigma / belief.bin_width)
    return belief.with_probs(kernels.predict_reflect(belief.probs, kernel, mixing))


def update(predicted: AngularBelief, z, k_eff):
    """Posterior proportional to ``predicted * z**k_eff``.

    Returns ``(belief, informative)``; an all-zero product leaves the
    prediction untouched and reports ``informative=False``.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != predicted.probs.shape:
        raise ValueError("likelihood must match the belief grid")
    if k_eff < 0 or z.min() < 0:
        raise ValueError("likelihood and exponent must be non-negative")
    post, ok = kernels.posterior_update(predicted.probs, z, float(k_eff))
    return predicted.with_probs(post), bool(ok)


def entropy(belief) -> float:
    probs = belief.probs if isinstance(belief, AngularBelief) else np.asarray(belief, dtype=float)
    return float(kernels.entropy_bits(probs))


def confidence(belief) -> float:
    probs = belief.probs if isinstance(belief, AngularBelief) else np.asarray(belief, dtype=float)
    return 1.0 - min(1.0, entropy(probs) / np.log2(probs.shape[0]))


def likelihood_exponent(conf, params: BeliefHyperparams) -> float:
    if not 0.0 <= conf <= 1.0:
        raise ValueError(f"confidence must lie in [0, 1], got {conf}")
    return params.k_min + (params.k_max - params.k_min) * conf


def _excluded_mask(grid, excluded):
    mask = np.zeros(grid.shape, dtype=bool)
    for lo, hi in excluded or ():
        mask |= (grid >= lo) & (grid <= hi)
    return mask


def map_peaks(belief: AngularBelief, count: int, excluded=(), separation=None):
    """Greedy top-``count`` bins outside ``excluded``, at least ``separation`` deg apart.

    Ties go to the lower bin index. Returns ``(angles, complete)`` where
    ``complete`` is False when fewer than ``count`` bins were eligible.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    sep = belief.sigma if separation is None else float(separation)
    blocked = _excluded_mask(belief.grid, excluded)
    order = np.argsort(-belief.probs, kind="stable")
    picked = []
    for i in order:
        if blocked[i]:
            continue
        ang = belief.grid[i]
        if all(abs(ang - belief.grid[j]) >= sep - 1e-9 for j in picked):
            picked.append(int(i))
            if len(picked) == count:
                break
    return [float(belief.grid[i]) for i in picked], len(picked) == count


def sensing_fraction(h, params: BeliefHyperparams) -> float:
    """Sensing share gamma_t, affine in normalized entropy over [gamma_min, gamma_max]."""
    if h < 0:
        raise ValueError("entropy must be non-negative")
    frac = min(1.0, h / params.max_entropy)
    return params.gamma_min + (params.gamma_max - params.gamma_min) * frac


def adapt_kernel(sigma, secrecy_ok: bool, params: BeliefHyperparams) -> float:
    """Multiplicative widen/narrow step on the running kernel width, clipped."""
    factor = 1.0 - params.k_ey if secrecy_ok else 1.0 + params.k_ex
    return float(np.clip(sigma * factor, params.sigma_min, params.sigma_max))


def sensing_response(belief: AngularBelief, eve_angles, illumination, rng, params: BeliefHyperparams,
                     noise=True) -> np.ndarray:
    """Pseudo-likelihood z(phi) from one sensing pass, normalized to max 1.

    Each eavesdropper returns an echo at its true azimuth with SNR
    ``sensing_snr * illumination[e]`` (the normalized transmit gain the
    steered beams put on it, never below the wide-angle floor), blurred by
    the receive angular resolution ``meas_sigma_deg``. Without eavesdroppers
    the response carries no information.
    """
    grid = belief.grid
    z = np.ones_like(grid)
    snr = 10.0 ** (params.sensing_snr_db / 10.0)
    for ang, ill in zip(eve_angles, illumination):
        ill = max(float(ill), params.sensing_floor)
        z += snr * ill * np.exp(-0.5 * ((grid - ang) / params.meas_sigma_deg) ** 2)
    if noise and params.sensing_noise_sigma > 0:
        z *= np.exp(params.sensing_noise_sigma * rng.standard_normal(grid.shape))
    return z / z.max()
