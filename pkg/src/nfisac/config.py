"""Scenario configuration: defaults, YAML loading and validation."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .belief_engine import BeliefHyperparams
from .geometry_channel import DEFAULT_ABSORPTION_DB_PER_M

log = logging.getLogger(__name__)

FC_GRID_HZ = (28e9, 60e9, 120e9, 220e9, 300e9, 340e9, 410e9)
FC_SOFT_RANGE_HZ = (28e9, 410e9)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class SystemConfig:
    fc_list: tuple = FC_GRID_HZ
    bandwidth_hz: float = 500e6
    noise_figure_db: float = 7.0
    thermal_noise_dbm_hz: float = -174.0
    bs_antennas: int = 128
    rf_chains: int = 64
    hn_tx_antennas: int = 16
    hn_rx_antennas: int = 16
    num_hns: int = 24
    streams: int = 6
    tx_power_cap_w: float = 50.12
    pa_efficiency: float = 0.38
    secrecy_threshold: float = 1.0
    digital_boost_db: float = 20.0
    apply_digital_boost: bool = False

    @property
    def noise_power_w(self) -> float:
        dbm = self.thermal_noise_dbm_hz + 10 * np.log10(self.bandwidth_hz) + self.noise_figure_db
        return float(10 ** ((dbm - 30) / 10))

    @property
    def effective_noise_w(self) -> float:
        """Receiver noise after the optional digital processing gain."""
        boost = 10 ** (self.digital_boost_db / 10) if self.apply_digital_boost else 1.0
        return self.noise_power_w / boost


@dataclass(frozen=True)
class ChannelConfig:
    num_paths: int = 3
    shadowing_sigma_db: float = 4.0
    nlos_attenuation_db: float = 10.0
    coverage_radius_m: float = 100.0
    absorption_db_per_m: dict = field(default_factory=lambda: dict(DEFAULT_ABSORPTION_DB_PER_M))
    eps_csi_legit: float = 0.01
    eps_csi_eve: float = 0.05


@dataclass(frozen=True)
class ScenarioSection:
    num_slots: int = 50
    num_seeds: int = 10
    first_seed: int = 0
    hn_range_m: tuple = (10.0, 100.0)
    hn_sector_deg: tuple = (-6.0, 0.0)
    num_eves: int = 2
    eve_antennas: int = 16
    eve_range_m: tuple = (30.0, 80.0)
    eve_sector_deg: tuple = (-6.0, 0.0)
    eve_drift_deg: float = 1.5
    dl_ul_ratio: tuple = (3, 1)


@dataclass(frozen=True)
class NotchConfig:
    # (depth dB, angle deg) pairs
    alg1: tuple = ((26.0, 18.0), (24.0, 20.0))
    alg2: tuple = ((30.0, 14.0), (28.0, 16.0))


@dataclass(frozen=True)
class GameConfig:
    omega_r: float = 1.0
    omega_j: float = 0.02
    omega_max: float = 0.5
    omega_avg: float = 1.0
    omega_o: float = 2.0
    omega_h: float = 0.1
    omega_c: float = 0.1
    mu_o: float = 0.1
    mu_h: float = 0.05
    alpha: float = 0.4
    beta: float = 0.1
    gamma: float = 0.5
    hn_max_power_w: float = 1.0
    rho_leak: float = 0.05
    eve_range_factor: float = 0.7
    nominal_eve_range_m: float = 35.0
    jam_focus_ranges_m: tuple = (15.0, 30.0, 45.0)
    rzf_regularization: float = 0.0
    eve_leak_weight: float = 0.0
    eve_subsamples: int = 3
    min_peak_separation_deg: float = 2.0
    leak_iterations: int = 3
    min_jam_fraction: float = 0.01


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    notches: NotchConfig = field(default_factory=NotchConfig)
    belief: BeliefHyperparams = field(default_factory=BeliefHyperparams)
    game: GameConfig = field(default_factory=GameConfig)

    def with_overrides(self, **sections) -> "ScenarioConfig":
        """Copy with per-section field overrides, e.g. ``scenario={"num_eves": 1}``."""
        merged = {}
        for name, changes in sections.items():
            merged[name] = dataclasses.replace(getattr(self, name), **changes)
        cfg = dataclasses.replace(self, **merged)
        validate(cfg)
        return cfg


_SECTIONS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _coerce(key, default, value):
    """Convert a YAML value to the type of ``default``."""
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise TypeError
            return int(float(value))
        if isinstance(default, float) or (default is None and not isinstance(value, (list, dict))):
            return None if value is None else float(value)
        if isinstance(default, dict):
            return {float(k): float(v) for k, v in dict(value).items()}
        if isinstance(default, tuple):
            if default and isinstance(default[0], tuple):
                return tuple(tuple(float(x) for x in row) for row in value)
            kind = int if default and isinstance(default[0], int) else float
            return tuple(kind(x) for x in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {value!r} as {type(default).__name__}") from None
    return value


def _build_section(name, raw):
    cls = _SECTIONS[name].default_factory
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected a mapping, got {type(raw).__name__}")
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown key '{name}.{key}'")
        kwargs[key] = _coerce(f"{name}.{key}", getattr(defaults, key), value)
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def config_from_dict(data) -> ScenarioConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping of sections")
    for key in data:
        if key not in _SECTIONS:
            raise ConfigError(f"unknown key '{key}'")
    cfg = ScenarioConfig(**{name: _build_section(name, data.get(name)) for name in _SECTIONS})
    validate(cfg)
    return cfg


PRESETS = {
    "default": {},
    # the nominal parameter set with the digital baseband boost switched on
    "table1": {"system": {"apply_digital_boost": True}},
}


def preset_config(name="default") -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'; choose from {', '.join(PRESETS)}")
    return config_from_dict(PRESETS[name])


def load_config(path) -> ScenarioConfig:
    """Read a YAML scenario file; missing keys keep their defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    return config_from_dict(data)


def _need(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def validate(cfg: ScenarioConfig) -> None:
    s, c, sc, g, b = cfg.system, cfg.channel, cfg.scenario, cfg.game, cfg.belief
    _need(len(s.fc_list) > 0, "system.fc_list", "needs at least one carrier")
    for fc in s.fc_list:
        _need(fc > 0, "system.fc_list", "carrier frequencies must be positive")
        if not FC_SOFT_RANGE_HZ[0] <= fc <= FC_SOFT_RANGE_HZ[1]:
            log.warning("system.fc_list: %.3g Hz lies outside the 28-410 GHz design range", fc)
    _need(s.bandwidth_hz > 0, "system.bandwidth_hz", "must be positive")
    _need(s.rf_chains >= 1 and s.bs_antennas % s.rf_chains == 0, "system.rf_chains",
          "must divide bs_antennas")
    _need(1 <= s.streams <= s.rf_chains, "system.streams", "must lie in [1, rf_chains]")
    _need(s.streams <= s.num_hns, "system.streams", "cannot exceed num_hns")
    _need(s.tx_power_cap_w > 0, "system.tx_power_cap_w", "must be positive")
    _need(0 < s.pa_efficiency <= 1, "system.pa_efficiency", "must lie in (0, 1]")
    _need(s.secrecy_threshold >= 0, "system.secrecy_threshold", "must be non-negative")
    _need(c.num_paths >= 1, "channel.num_paths", "must be >= 1")
    _need(c.eps_csi_legit >= 0 and c.eps_csi_eve >= 0, "channel.eps_csi", "must be non-negative")
    _need(sc.num_slots >= 1, "scenario.num_slots", "must be >= 1")
    _need(sc.num_seeds >= 1, "scenario.num_seeds", "must be >= 1")
    _need(0 < sc.hn_range_m[0] <= sc.hn_range_m[1], "scenario.hn_range_m", "need 0 < min <= max")
    _need(0 < sc.eve_range_m[0] <= sc.eve_range_m[1], "scenario.eve_range_m", "need 0 < min <= max")
    for key in ("hn_sector_deg", "eve_sector_deg"):
        lo, hi = getattr(sc, key)
        _need(-90 <= lo <= hi <= 90, f"scenario.{key}", "need -90 <= lo <= hi <= 90")
    _need(sc.num_eves >= 0, "scenario.num_eves", "must be >= 0")
    for name in ("alg1", "alg2"):
        for row in getattr(cfg.notches, name):
            _need(len(row) == 2 and row[0] >= 0, f"notches.{name}", "entries are [depth_db >= 0, angle_deg]")
            _need(-90 <= row[1] <= 90, f"notches.{name}", "notch angles must lie in [-90, 90]")
    fracs = (g.alpha, g.beta, g.gamma)
    _need(all(f >= 0 for f in fracs), "game.alpha/beta/gamma", "fractions must be non-negative")
    _need(abs(sum(fracs) - 1.0) <= 1e-9, "game.alpha/beta/gamma", "fractions must sum to 1")
    _need(b.gamma_max <= g.gamma + 1e-12, "belief.gamma_max", "cannot exceed game.gamma")
    _need(0 < g.rho_leak <= 1, "game.rho_leak", "must lie in (0, 1]")
    _need(g.hn_max_power_w >= 0, "game.hn_max_power_w", "must be non-negative")
    _need(min(g.mu_o, g.mu_h) >= 0, "game.mu", "step sizes must be non-negative")
    _need(g.eve_range_factor > 0, "game.eve_range_factor", "must be positive")


def dump_config(cfg: ScenarioConfig) -> dict:
    """Plain nested dict suitable for YAML/JSON output."""
    def plain(v):
        if isinstance(v, tuple):
            return [plain(x) for x in v]
        if isinstance(v, dict):
            return {float(k): plain(x) for k, x in v.items()}
        return v
    return {name: {k: plain(v) for k, v in dataclasses.asdict(getattr(cfg, name)).items()}
            for name in _SECTIONS}
