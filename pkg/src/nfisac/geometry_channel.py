"""Near-field array geometry, steering vectors, path loss and S-V channels.

Angles are azimuths in degrees measured from the array broadside (+x) toward
+y; every array is a ULA along the y-axis. A point at range ``r`` and azimuth
``phi`` sits at ``[r cos(phi), r sin(phi), 0]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

# Molecular absorption (dB/m) at sea level, ~7.5 g/m^3 water vapour. Rough
# ITU-R P.676-style magnitudes; only used for trend-level realism.
DEFAULT_ABSORPTION_DB_PER_M = {
    28.0: 0.0001,
    60.0: 0.015,
    120.0: 0.002,
    220.0: 0.005,
    300.0: 0.007,
    340.0: 0.010,
    410.0: 0.040,
}


def absorption_coefficient(fc, table=None):
    """Piecewise-linear lookup of kappa(fc) in dB/m, clamped at the table ends."""
    table = DEFAULT_ABSORPTION_DB_PER_M if table is None else table
    ghz = np.array(sorted(float(k) for k in table))
    vals = np.array([table[k] for k in sorted(table, key=float)], dtype=float)
    return float(np.interp(fc / 1e9, ghz, vals))


@dataclass(frozen=True)
class CarrierSpec:
    fc: float
    absorption_db_per_m: float = 0.0
    shadowing_sigma_db: float = 4.0

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.fc

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength


def make_carrier(fc, absorption_table=None, shadowing_sigma_db=4.0) -> CarrierSpec:
    if fc <= 0:
        raise ValueError(f"carrier frequency must be positive, got {fc}")
    return CarrierSpec(fc, absorption_coefficient(fc, absorption_table), shadowing_sigma_db)


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA along y with symmetric element indices about ``center``."""

    num_elements: int
    spacing: float
    center: tuple = (0.0, 0.0, 0.0)
    offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("num_elements must be >= 1")
        n = np.arange(self.num_elements, dtype=float)
        object.__setattr__(self, "offsets", (n - (self.num_elements - 1) / 2.0) * self.spacing)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def element_positions(self) -> np.ndarray:
        pos = np.zeros((self.num_elements, 3))
        pos[:, 1] = self.offsets
        return pos + np.asarray(self.center)

    @property
    def aperture(self) -> float:
        return (self.num_elements - 1) * self.spacing

    def moved(self, center) -> "ArrayGeometry":
        return ArrayGeometry(self.num_elements, self.spacing, tuple(center))


def half_wavelength_ula(num_elements, carrier: CarrierSpec, center=(0.0, 0.0, 0.0)) -> ArrayGeometry:
    return ArrayGeometry(num_elements, carrier.wavelength / 2.0, tuple(center))


def polar_point(range_m, azimuth_deg, origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    a = np.deg2rad(azimuth_deg)
    return np.asarray(origin, dtype=float) + np.array([range_m * np.cos(a), range_m * np.sin(a), 0.0])


def polar_points(range_m, azimuths_deg, origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    a = np.deg2rad(np.atleast_1d(azimuths_deg))
    r = np.broadcast_to(range_m, a.shape)
    pts = np.stack([r * np.cos(a), r * np.sin(a), np.zeros_like(a)], axis=1)
    return pts + np.asarray(origin, dtype=float)


def azimuth_of(point, origin=(0.0, 0.0, 0.0)) -> float:
    d = np.asarray(point, dtype=float) - np.asarray(origin, dtype=float)
    return float(np.degrees(np.arctan2(d[1], d[0])))


def rayleigh_boundary(aperture, wavelength):
    """Radiative near-field limit 2 D^2 / lambda."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if aperture < 0:
        raise ValueError(f"aperture must be non-negative, got {aperture}")
    return 2.0 * aperture**2 / wavelength


def near_field_distance(element_position, focal_point) -> float:
    return float(np.linalg.norm(np.asarray(focal_point, float) - np.asarray(element_position, float)))


def steering_matrix(geometry: ArrayGeometry, focal_points, carrier: CarrierSpec) -> np.ndarray:
    """Spherical-wavefront steering vectors, one column per focal point."""
    pts = np.atleast_2d(np.asarray(focal_points, dtype=float))
    rel = pts - np.asarray(geometry.center)
    dx = rel[:, 0][None, :]
    dy = rel[:, 1][None, :] - geometry.offsets[:, None]
    dz = rel[:, 2][None, :]
    r = np.sqrt(dx * dx + dy * dy + dz * dz)
    return np.exp(-1j * carrier.wavenumber * r) / np.sqrt(geometry.num_elements)


def steering_vector(geometry: ArrayGeometry, focal_point, carrier: CarrierSpec) -> np.ndarray:
    return steering_matrix(geometry, np.asarray(focal_point, float)[None, :], carrier)[:, 0]


def far_field_steering(geometry: ArrayGeometry, azimuths_deg, carrier: CarrierSpec) -> np.ndarray:
    """Plane-wave limit of :func:`steering_matrix` (common phase dropped)."""
    s = np.sin(np.deg2rad(np.atleast_1d(azimuths_deg)))
    phase = carrier.wavenumber * geometry.offsets[:, None] * s[None, :]
    return np.exp(1j * phase) / np.sqrt(geometry.num_elements)


def path_loss_db(distance, carrier: CarrierSpec, shadow_draw=0.0):
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("distance must be positive")
    fspl = 20.0 * np.log10(4.0 * np.pi * carrier.fc * distance / SPEED_OF_LIGHT)
    out = fspl + carrier.absorption_db_per_m * distance + shadow_draw
    return float(out) if out.ndim == 0 else out


@dataclass
class MultipathComponent:
    gain: complex
    aod_focal_point: np.ndarray
    aoa_focal_point: np.ndarray


@dataclass
class ChannelMatrix:
    entries: np.ndarray
    path_loss_db: float
    components: list

    @property
    def shape(self):
        return self.entries.shape


@dataclass
class CsiEstimate:
    estimate: np.ndarray
    error_bound: float


def complex_normal(rng, size=None, variance=1.0):
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def channel_from_components(tx: ArrayGeometry, rx: ArrayGeometry, carrier: CarrierSpec,
                            components, path_loss: float) -> ChannelMatrix:
    """H = 10^(-PL/20) sum_l alpha_l a_rx(p_aoa) a_tx(p_aod)^H."""
    aod = np.array([c.aod_focal_point for c in components], dtype=float)
    aoa = np.array([c.aoa_focal_point for c in components], dtype=float)
    gains = np.array([c.gain for c in components], dtype=complex)
    a_tx = steering_matrix(tx, aod, carrier)
    a_rx = steering_matrix(rx, aoa, carrier)
    h = (a_rx * gains[None, :]) @ a_tx.conj().T
    return ChannelMatrix(h * 10.0 ** (-path_loss / 20.0), float(path_loss), list(components))


def draw_scatterers(rng, count, coverage_radius):
    """Uniform points in the half-disk in front of the BS array."""
    r = coverage_radius * np.sqrt(rng.uniform(0.01, 1.0, count))
    phi = rng.uniform(-90.0, 90.0, count)
    return polar_points(r, phi)


def synthesize_channel(tx: ArrayGeometry, rx: ArrayGeometry, carrier: CarrierSpec, num_paths: int,
                       distance: float, rng, *, coverage_radius=100.0, nlos_attenuation_db=10.0,
                       shadow_db=None) -> ChannelMatrix:
    """Clustered narrowband channel with a LoS path and ``num_paths - 1`` scatterers.

    The LoS component departs toward the receiver centre and arrives from the
    transmitter centre; NLoS components bounce off points drawn uniformly in
    the coverage disk and are ``nlos_attenuation_db`` weaker on average.
    """
    if num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    if shadow_db is None:
        shadow_db = rng.normal(0.0, carrier.shadowing_sigma_db)
    pl = path_loss_db(distance, carrier, shadow_db)
    comps = [MultipathComponent(complex(complex_normal(rng)), np.asarray(rx.center, float),
                                np.asarray(tx.center, float))]
    if num_paths > 1:
        nlos_var = 10.0 ** (-nlos_attenuation_db / 10.0)
        for p in draw_scatterers(rng, num_paths - 1, coverage_radius):
            comps.append(MultipathComponent(complex(complex_normal(rng, variance=nlos_var)), p, p))
    return channel_from_components(tx, rx, carrier, comps, pl)


def perturb_csi(true_channel, eps_csi, rng) -> CsiEstimate:
    """Estimate with ||H - H_hat||_F^2 <= eps_csi (Gaussian draw projected on the ball)."""
    if eps_csi < 0:
        raise ValueError("eps_csi must be non-negative")
    h = true_channel.entries if isinstance(true_channel, ChannelMatrix) else np.asarray(true_channel)
    if eps_csi == 0:
        return CsiEstimate(h.copy(), 0.0)
    err = complex_normal(rng, h.shape, variance=eps_csi / h.size)
    norm2 = float(np.vdot(err, err).real)
    if norm2 > eps_csi:
        err *= np.sqrt(eps_csi / norm2) * (1.0 - 1e-9)
    return CsiEstimate(h - err, float(eps_csi))
