"""Pure-NumPy belief kernels. Mirrors the compiled ``_ckernels`` module."""
import numpy as np


def gaussian_kernel(sigma_bins):
    """Sampled zero-mean Gaussian truncated at +/-4 sigma, unit sum."""
    sigma_bins = float(sigma_bins)
    if sigma_bins <= 0.0:
        return np.ones(1)
    half = int(np.ceil(4.0 * sigma_bins))
    x = np.arange(-half, half + 1, dtype=float)
    with np.errstate(over="ignore"):  # tiny sigma: off-centre taps underflow to 0
        k = np.exp(-0.5 * (x / sigma_bins) ** 2)
    return k / k.sum()


def predict_reflect(probs, kernel, mixing=0.0):
    """Convolve ``probs`` with a symmetric ``kernel`` under a reflecting boundary.

    Mass that would leave the grid is mirrored back about the edge bin
    boundary, so the transition matrix is symmetric and doubly stochastic.
    The result is renormalized (a rounding-level correction) and blended
    with a uniform share ``mixing``.
    """
    probs = np.ascontiguousarray(probs, dtype=float)
    kernel = np.ascontiguousarray(kernel, dtype=float)
    n = probs.shape[0]
    half = (kernel.shape[0] - 1) // 2
    if half > n:
        raise ValueError("kernel longer than the grid")
    if half == 0:
        out = probs * kernel[0]
    else:
        out = np.convolve(np.pad(probs, half, mode="symmetric"), kernel, mode="valid")
    total = out.sum()
    if total > 0.0:  # massless input keeps only the floor
        out /= total  # divide first: (1 - mixing) / total can overflow for subnormal totals
        out *= 1.0 - mixing
    else:
        out[:] = 0.0
    if mixing > 0:
        out += mixing / n
    return out


def posterior_update(pred, z, k_eff):
    """Return ``(posterior, informative)`` for ``pred * z**k_eff``."""
    post = pred * np.power(z, k_eff)
    total = post.sum()
    if not np.isfinite(total) or total <= 0.0:
        return pred.copy(), False
    return post / total, True


def entropy_bits(probs):
    p = probs[probs > 0.0]
    return float(-(p * np.log2(p)).sum())
