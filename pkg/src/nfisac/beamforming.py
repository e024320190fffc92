"""Hybrid precoding, sensing/jamming beams, notch steering and secrecy metrics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .belief_engine import AngularBelief, map_peaks
from .geometry_channel import (
    ArrayGeometry,
    CarrierSpec,
    CsiEstimate,
    far_field_steering,
    polar_point,
    polar_points,
    steering_matrix,
    steering_vector,
)

# Condition number beyond which the regularized inverse is treated as singular.
_SINGULAR_COND = 1e12


@dataclass(frozen=True)
class NotchSpec:
    angle: float
    depth: float

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError(f"notch depth must be >= 0 dB, got {self.depth}")


@dataclass
class PrecoderSet:
    analog: np.ndarray
    digital: np.ndarray
    users: list = field(default_factory=list)
    hn_combiners: list | None = None
    jam_vectors: list = field(default_factory=list)
    sensing_weights: np.ndarray | None = None
    fallback: bool = False

    @property
    def combined(self) -> np.ndarray:
        return self.analog @ self.digital

    @property
    def num_streams(self) -> int:
        return self.digital.shape[1]

    def stream(self, k) -> np.ndarray:
        return self.combined[:, k]

    def total_power(self) -> float:
        f = self.combined
        return float(np.vdot(f, f).real)


def _dominant_modes(h: np.ndarray):
    """Left/right dominant singular vectors of one CSI matrix."""
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    return u[:, 0], vh[0].conj()


def analog_precoder(right_vectors: Sequence[np.ndarray], rf_chains: int) -> np.ndarray:
    """Block-diagonal phase-only precoder; RF chain i serves stream i mod K."""
    n = right_vectors[0].shape[0]
    if n % rf_chains:
        raise ValueError(f"{n} antennas cannot be split evenly over {rf_chains} RF chains")
    n_sa = n // rf_chains
    f_rf = np.zeros((n, rf_chains), dtype=complex)
    for i in range(rf_chains):
        v = right_vectors[i % len(right_vectors)]
        rows = slice(i * n_sa, (i + 1) * n_sa)
        f_rf[rows, i] = np.exp(1j * np.angle(v[rows]))
    return f_rf


def nullspace_projector(rows: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the null space of ``rows`` (m x n)."""
    n = rows.shape[1]
    q, r = np.linalg.qr(rows.conj().T)
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())
    q = q[:, keep]
    return np.eye(n) - q @ q.conj().T


def build_hybrid_precoder(channel_estimates, streams: int, rf_chains: int, power_cap: float, *,
                          digital: str = "rzf", regularization: float = 0.0,
                          null_steering: np.ndarray | None = None,
                          leakage_rows: np.ndarray | None = None,
                          leakage_weights=None) -> PrecoderSet:
    """Partially connected hybrid precoder for one scheduled HN per stream.

    Parameters
    ----------
    channel_estimates : list of CsiEstimate or arrays (Nr x Nt)
    streams : number of streams K (must match the number of estimates)
    digital : ``"rzf"`` (regularized zero-forcing) or ``"mrt"`` (matched filter)
    regularization : RZF loading; 0 gives plain zero-forcing
    null_steering : optional Nt x m element-space directions that every stream
        must not radiate toward (exact nulls in the far-field model)
    leakage_rows, leakage_weights : optional m x Nt channel rows of unintended
        receivers and their penalty weights; the digital stage then solves
        ``(He^H He + sum_i w_i r_i^H r_i + reg I) F = He^H`` instead of
        plain RZF, trading array gain for leakage (soft suppression)

    Columns are scaled to equal power with the total equal to ``power_cap``.
    """
    hs = [c.estimate if isinstance(c, CsiEstimate) else np.asarray(c) for c in channel_estimates]
    if len(hs) != streams:
        raise ValueError(f"expected {streams} channel estimates, got {len(hs)}")
    if streams > rf_chains:
        raise ValueError("streams must not exceed RF chains")
    modes = [_dominant_modes(h) for h in hs]
    f_rf = analog_precoder([m[1] for m in modes], rf_chains)
    h_eff = np.stack([m[0].conj() @ h @ f_rf for m, h in zip(modes, hs)])

    proj = None
    if null_steering is not None and null_steering.shape[1]:
        proj = nullspace_projector(null_steering.conj().T @ f_rf)
        h_eff = h_eff @ proj

    fallback = digital == "mrt"
    f_bb = h_eff.conj().T
    if digital == "rzf" and leakage_rows is not None and len(leakage_rows):
        r_eff = np.asarray(leakage_rows) @ f_rf
        if proj is not None:
            r_eff = r_eff @ proj
        wts = np.ones(r_eff.shape[0]) if leakage_weights is None else np.asarray(leakage_weights, float)
        a = h_eff.conj().T @ h_eff + (r_eff.conj().T * wts) @ r_eff
        reg = regularization if regularization > 0 else 1e-9 * np.trace(a).real / a.shape[0]
        a = a + reg * np.eye(a.shape[0])
        try:
            if np.linalg.cond(a) > _SINGULAR_COND:
                raise np.linalg.LinAlgError("ill-conditioned leakage-aware system")
            f_bb = np.linalg.solve(a, h_eff.conj().T)
        except np.linalg.LinAlgError:
            fallback = True
    elif digital == "rzf":
        gram = h_eff @ h_eff.conj().T + regularization * np.eye(streams)
        try:
            if np.linalg.cond(gram) > _SINGULAR_COND:
                raise np.linalg.LinAlgError("ill-conditioned effective channel")
            f_bb = h_eff.conj().T @ np.linalg.inv(gram)
        except np.linalg.LinAlgError:
            fallback = True
    elif digital != "mrt":
        raise ValueError(f"unknown digital stage {digital!r}")
    if proj is not None:
        f_bb = proj @ f_bb

    f = f_rf @ f_bb
    norms = np.linalg.norm(f, axis=0)
    live = norms > 1e-300
    scale = np.zeros(streams)
    if live.any():
        scale[live] = np.sqrt(power_cap / live.sum()) / norms[live]
    pre = PrecoderSet(f_rf, f_bb * scale[None, :], users=list(range(streams)), fallback=fallback)
    pre.hn_combiners = [m[0] for m in modes]
    return pre


def beamforming_gain(channel_row: np.ndarray, weights: np.ndarray) -> float:
    """|h w|^2 relative to the per-antenna average power of h (== N for MRT on LoS)."""
    h = np.asarray(channel_row).ravel()
    w = np.asarray(weights).ravel()
    num = abs(h @ w) ** 2
    den = np.vdot(h, h).real * np.vdot(w, w).real / h.size
    return float(num / den)


def sensing_beam(tau, focal_point, geometry: ArrayGeometry, carrier: CarrierSpec) -> np.ndarray:
    """Hamming-blended focusing beam, unit power."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"taper must lie in [0, 1], got {tau}")
    n = geometry.num_elements
    taper = (1.0 - tau) + tau * (np.hamming(n) if n > 1 else np.ones(1))
    w = taper * steering_vector(geometry, focal_point, carrier)
    return w / np.linalg.norm(w)


def beampattern(weights, geometry: ArrayGeometry, carrier: CarrierSpec, azimuths_deg,
                range_m=None) -> np.ndarray:
    """Power gain |a(phi)^H w|^2 on a grid (far field unless ``range_m`` is given)."""
    if range_m is None:
        a = far_field_steering(geometry, azimuths_deg, carrier)
    else:
        a = steering_matrix(geometry, polar_points(range_m, azimuths_deg, geometry.center), carrier)
    return np.abs(a.conj().T @ weights) ** 2


def apply_notches(weights, notches: Sequence[NotchSpec], geometry: ArrayGeometry,
                  carrier: CarrierSpec) -> np.ndarray:
    """Project ``weights`` off the notch steering vectors, keeping the input power."""
    w = np.asarray(weights, dtype=complex)
    if not notches:
        return w.copy()
    if len(notches) >= geometry.num_elements:
        raise ValueError(f"{len(notches)} notches exceed the {geometry.num_elements - 1} available degrees of freedom")
    a = far_field_steering(geometry, [n.angle for n in notches], carrier)
    q, _ = np.linalg.qr(a)
    out = w - q @ (q.conj().T @ w)
    norm_in, norm_out = np.linalg.norm(w), np.linalg.norm(out)
    if norm_out <= 1e-12 * max(norm_in, 1e-300):
        return np.zeros_like(w)
    return out * (norm_in / norm_out)


def notch_suppression_db(weights, notches: Sequence[NotchSpec], geometry: ArrayGeometry,
                         carrier: CarrierSpec, grid_step=0.1, cap_db=400.0) -> list:
    """Mainlobe-peak to notch-angle gain ratio in dB, peak taken on a ``grid_step`` scan."""
    grid = np.arange(-90.0, 90.0 + grid_step / 2, grid_step)
    peak = beampattern(weights, geometry, carrier, grid).max()
    out = []
    for n in notches:
        g = beampattern(weights, geometry, carrier, [n.angle])[0]
        out.append(cap_db if g <= peak * 10 ** (-cap_db / 10) else float(10 * np.log10(peak / g)))
    return out


def protected_intervals(notches: Sequence[NotchSpec], halfwidth=1.0):
    return [(n.angle - halfwidth, n.angle + halfwidth) for n in notches]


class JamBeam(NamedTuple):
    weights: np.ndarray
    degenerate: bool


def jamming_beam(belief: AngularBelief, protected: Sequence[NotchSpec], geometry: ArrayGeometry,
                 carrier: CarrierSpec, power: float, *, eve_range=None, peaks=2,
                 protect_halfwidth=1.0, separation=None) -> JamBeam:
    """Friendly-jamming beam toward the top MAP belief angles, notched at ``protected``.

    Belief angles are BS-frame azimuths. With ``eve_range`` (one range or
    several) the beam focuses on the implied points along each ray from the
    BS, seen from the jammer's own position; otherwise it steers by angle in
    the array's local frame.
    """
    angles, _ = map_peaks(belief, peaks, protected_intervals(protected, protect_halfwidth), separation)
    degenerate = not angles
    if degenerate:
        w = np.zeros(geometry.num_elements, dtype=complex)
        w[geometry.num_elements // 2] = 1.0
    else:
        mass = np.array([belief.probs[belief.index_of(a)] for a in angles])
        mass = mass / mass.sum() if mass.sum() > 0 else np.full(len(angles), 1.0 / len(angles))
        if eve_range is None:
            w = far_field_steering(geometry, angles, carrier) @ mass
        else:
            ranges = np.atleast_1d(np.asarray(eve_range, dtype=float))
            pts = np.array([polar_point(r, ang) for ang in angles for r in ranges])
            weights = np.repeat(mass, ranges.size) / ranges.size
            w = steering_matrix(geometry, pts, carrier) @ weights
    w = apply_notches(w, protected, geometry, carrier)
    norm = np.linalg.norm(w)
    if norm == 0:
        return JamBeam(w, True)
    return JamBeam(w * np.sqrt(power) / norm, degenerate)


def mrc_combiner(h: np.ndarray, f: np.ndarray) -> np.ndarray:
    v = h @ f
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def jam_interference(combiner: np.ndarray, jam_links) -> float:
    """Sum_j |W^H H_{<-j} g_j|^2 over ``(H, g)`` pairs."""
    total = 0.0
    for h, g in jam_links:
        total += abs(np.vdot(combiner, h @ g)) ** 2
    return float(total)


def _sinr(h, precoders, u, interference, noise, jam_links, combiner):
    if noise <= 0:
        raise ValueError("noise power must be positive")
    hf = np.asarray(h) @ precoders.combined
    w = combiner if combiner is not None else mrc_combiner(np.asarray(h), precoders.combined[:, u])
    g = np.abs(w.conj() @ hf) ** 2
    sig = g[u]
    other = g.sum() - sig
    return float(sig / (other + interference + jam_interference(w, jam_links) + noise))


def sinr_legitimate(h_lu, precoders: PrecoderSet, u: int, interference: float, noise: float, *,
                    jam_links=(), combiner=None) -> float:
    """SINR of stream ``u`` at its HN with an MRC combiner on H f_u."""
    return _sinr(h_lu, precoders, u, interference, noise, jam_links, combiner)


def sinr_eavesdropper(h_e, precoders: PrecoderSet, u: int, interference: float, noise: float, *,
                      jam_links=(), combiner=None) -> float:
    """Eavesdropper SINR on stream ``u``; the eavesdropper MRC-combines that stream."""
    return _sinr(h_e, precoders, u, interference, noise, jam_links, combiner)


def secrecy_rate(sinr_legit, sinr_eve_worst):
    """[log2(1 + SINR_l) - log2(1 + SINR_e)]^+ in bit/s/Hz (array-friendly)."""
    sl = np.asarray(sinr_legit, dtype=float)
    se = np.asarray(sinr_eve_worst, dtype=float)
    if np.any(sl < 0) or np.any(se < 0):
        raise ValueError("SINR values must be non-negative")
    r = np.maximum(0.0, np.log2(1.0 + sl) - np.log2(1.0 + se))
    return float(r) if r.ndim == 0 else r


def worst_case_secrecy(sinr_legit, sinr_eves):
    """Secrecy against the strongest of several eavesdroppers."""
    se = max(sinr_eves) if len(sinr_eves) else 0.0
    return secrecy_rate(sinr_legit, se)
