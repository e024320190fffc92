"""Per-seed ground truth: node placement, eavesdropper trajectories and per-slot channels.

Everything is a pure function of ``(seed, fc, slot, link)``: each link draws
from its own RNG stream, so every controller run on the same seed sees the
same realizations no matter which links it asks for or in what order.
"""
from __future__ import annotations

import numpy as np

from .config import ScenarioConfig
from .geometry_channel import (
    ChannelMatrix,
    CsiEstimate,
    half_wavelength_ula,
    make_carrier,
    perturb_csi,
    path_loss_db,
    polar_point,
    polar_points,
    steering_matrix,
    synthesize_channel,
)

# link-kind tags for RNG keys
_BS_HN, _BS_EVE, _HN_HN, _HN_EVE = 1, 2, 3, 4
_CSI = 10


def reflect_into(x, lo, hi):
    """Fold ``x`` back into [lo, hi] (mirror at both ends)."""
    if hi <= lo:
        return lo
    span = hi - lo
    y = np.mod(x - lo, 2 * span)
    return lo + (2 * span - y if y > span else y)


class World:
    def __init__(self, cfg: ScenarioConfig, fc: float, seed: int, num_slots: int | None = None):
        self.cfg = cfg
        self.fc = float(fc)
        self.seed = int(seed)
        sysc, sc = cfg.system, cfg.scenario
        self.num_slots = sc.num_slots if num_slots is None else int(num_slots)
        self.carrier = make_carrier(fc, cfg.channel.absorption_db_per_m, cfg.channel.shadowing_sigma_db)
        self.bs = half_wavelength_ula(sysc.bs_antennas, self.carrier)
        self.noise_w = sysc.effective_noise_w

        # placement depends on the seed only, so every carrier shares it
        rng = np.random.default_rng([self.seed, 0])
        u = sysc.num_hns
        self.hn_range = rng.uniform(*sc.hn_range_m, size=u)
        self.hn_azimuth = rng.uniform(*sc.hn_sector_deg, size=u)
        self.hn_pos = polar_points(self.hn_range, self.hn_azimuth)
        self.hn_geom = [half_wavelength_ula(sysc.hn_rx_antennas, self.carrier, p) for p in self.hn_pos]

        m = sc.num_eves
        self.eve_range = rng.uniform(*sc.eve_range_m, size=m)
        az = np.empty((self.num_slots, m))
        if m:
            az[0] = rng.uniform(*sc.eve_sector_deg, size=m)
            for t in range(1, self.num_slots):
                step = rng.normal(0.0, sc.eve_drift_deg, size=m) if sc.eve_drift_deg > 0 else np.zeros(m)
                az[t] = [reflect_into(a, *sc.eve_sector_deg) for a in az[t - 1] + step]
        self.eve_azimuth = az
        self._shadow = {}
        self._channels = {}
        self._csi = {}
        self._nominal = {}

    # -- geometry ---------------------------------------------------------
    @property
    def num_hns(self) -> int:
        return len(self.hn_geom)

    @property
    def num_eves(self) -> int:
        return self.eve_azimuth.shape[1]

    def eve_position(self, slot, e) -> np.ndarray:
        return polar_point(self.eve_range[e], self.eve_azimuth[slot, e])

    def eve_geometry(self, slot, e):
        return half_wavelength_ula(self.cfg.scenario.eve_antennas, self.carrier, self.eve_position(slot, e))

    def schedule(self, slot) -> list:
        """Round-robin group of K HNs served in ``slot``."""
        k, u = self.cfg.system.streams, self.num_hns
        return [int((slot * k + i) % u) for i in range(k)]

    # -- channels ---------------------------------------------------------
    def _shadow_db(self, key):
        if key not in self._shadow:
            rng = np.random.default_rng([self.seed, 1, *key])
            self._shadow[key] = float(rng.normal(0.0, self.cfg.channel.shadowing_sigma_db))
        return self._shadow[key]

    def _link(self, slot, kind, a, b, tx, rx) -> ChannelMatrix:
        key = (slot, kind, a, b)
        ch = self._channels.get(key)
        if ch is None:
            rng = np.random.default_rng([self.seed, 2, slot, kind, a, b])
            dist = float(np.linalg.norm(np.asarray(rx.center) - np.asarray(tx.center)))
            c = self.cfg.channel
            ch = synthesize_channel(tx, rx, self.carrier, c.num_paths, max(dist, 1e-3), rng,
                                    coverage_radius=c.coverage_radius_m,
                                    nlos_attenuation_db=c.nlos_attenuation_db,
                                    shadow_db=self._shadow_db((kind, a, b)))
            self._channels[key] = ch
        return ch

    def bs_to_hn(self, slot, u) -> ChannelMatrix:
        return self._link(slot, _BS_HN, u, 0, self.bs, self.hn_geom[u])

    def bs_to_eve(self, slot, e) -> ChannelMatrix:
        return self._link(slot, _BS_EVE, e, 0, self.bs, self.eve_geometry(slot, e))

    def hn_to_hn(self, slot, j, u) -> ChannelMatrix:
        return self._link(slot, _HN_HN, j, u, self.hn_geom[j], self.hn_geom[u])

    def hn_to_eve(self, slot, j, e) -> ChannelMatrix:
        return self._link(slot, _HN_EVE, j, e, self.hn_geom[j], self.eve_geometry(slot, e))

    def csi(self, slot, kind, a, b=0) -> CsiEstimate:
        """Bounded-error estimate of a legitimate link (``"bs_hn"`` or ``"hn_hn"``)."""
        key = (slot, kind, a, b)
        est = self._csi.get(key)
        if est is None:
            h = self.bs_to_hn(slot, a) if kind == "bs_hn" else self.hn_to_hn(slot, a, b)
            tag = _BS_HN if kind == "bs_hn" else _HN_HN
            rng = np.random.default_rng([self.seed, 2, slot, tag + _CSI, a, b])
            eps = self.cfg.channel.eps_csi_legit * float(np.vdot(h.entries, h.entries).real)
            est = perturb_csi(h, eps, rng)
            self._csi[key] = est
        return est

    # -- belief-side helpers ---------------------------------------------
    def _eve_rows(self, key, ranges, grid, subsamples):
        hit = self._nominal.get(key)
        if hit is None:
            grid = np.asarray(grid, dtype=float)
            step = grid[1] - grid[0] if grid.size > 1 else 0.0
            offs = step * ((np.arange(subsamples) + 0.5) / subsamples - 0.5)
            az = (grid[:, None] + offs[None, :]).ravel()
            r = np.broadcast_to(np.asarray(ranges, dtype=float), az.shape)
            a = steering_matrix(self.bs, polar_points(r, az), self.carrier).conj().T
            gain = 10.0 ** (-path_loss_db(float(np.mean(ranges)), self.carrier) / 10.0)
            hit = (np.ascontiguousarray(a), float(gain))
            self._nominal[key] = hit
        return hit

    def nominal_eve_response(self, u, grid, subsamples=1):
        """Conjugated BS steering toward a nominal eavesdropper in each grid bin.

        Returns ``(A, gain)``. Rows of ``A`` are ``a(p)^H`` for points at
        ``eve_range_factor`` times HN ``u``'s range, ``subsamples`` per bin
        spread evenly across the bin (bin-major order); ``gain`` is the
        matching LoS power gain ``10^(-PL/10)``.
        """
        r = self.cfg.game.eve_range_factor * self.hn_range[u]
        return self._eve_rows(("hn", u, len(grid), subsamples), r, grid, subsamples)

    def eve_rows_at(self, range_m, grid, subsamples=1):
        """Like :meth:`nominal_eve_response` but at a fixed range for every bin."""
        return self._eve_rows(("fixed", float(range_m), len(grid), subsamples), range_m, grid, subsamples)
