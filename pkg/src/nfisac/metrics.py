"""Slot KPIs, outage, power accounting and aggregation."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

# numeric KPI fields carried into CSV rows and summaries
KPI_FIELDS = (
    "mean_secrecy",
    "max_secrecy",
    "outage",
    "success_rate",
    "entropy",
    "comm_power_w",
    "sensing_power_w",
    "fj_power_w",
    "total_power_w",
    "n_jammers",
    "leader_utility",
    "final_utility",
    "wall_ms",
)


@dataclass
class SlotKpis:
    per_hn_secrecy: list
    mean_secrecy: float
    max_secrecy: float
    outage: float
    success_rate: float
    entropy: float
    comm_power_w: float
    sensing_power_w: float
    fj_power_w: float
    total_power_w: float
    complexity: float = 0.0
    leader_utility: float = 0.0
    final_utility: float = 0.0
    n_jammers: int = 0
    min_secrecy: float = 0.0
    sigma: float = 0.0
    lambda_o: float = 0.0
    lambda_h: float = 0.0
    gamma_t: float = 0.0
    map_error_deg: float = float("nan")
    flags: list = field(default_factory=list)
    wall_ms: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def outage(per_hn_secrecy, r_th):
    """Outage indicators 1{R_s < R_th} and their mean."""
    r = np.asarray(per_hn_secrecy, dtype=float)
    if r.size == 0:
        raise ValueError("outage needs at least one HN")
    ind = (r < r_th).astype(int)
    return ind.tolist(), float(ind.mean())


def power_account(precoders, jam_powers, gamma_t, tx_power_cap, pa_efficiency):
    """Radiated comm/sensing/FJ powers and the PA-referred total (watts)."""
    if pa_efficiency <= 0:
        raise ValueError("pa_efficiency must be positive")
    comm = 0.0 if precoders is None else precoders.total_power()
    sensing = float(gamma_t) * tx_power_cap
    fj = float(np.sum(jam_powers)) if len(jam_powers) else 0.0
    return comm, sensing, fj, (comm + sensing + fj) / pa_efficiency


def secrecy_summary(per_hn_secrecy):
    """(mean, max, min) with zeros for an empty receiver set."""
    r = np.asarray(per_hn_secrecy, dtype=float)
    if r.size == 0:
        return 0.0, 0.0, 0.0
    return float(r.mean()), float(r.max()), float(r.min())


def _value(row, key):
    return float(row[key] if isinstance(row, dict) else getattr(row, key))


def aggregate(rows, keys=("controller", "fc_hz", "slot"), fields=KPI_FIELDS):
    """Mean/std/min/max of every KPI per group key, groups sorted.

    ``rows`` are dicts (or objects) carrying the grouping keys and KPI fields.
    Returns ``{group_tuple: {field: {"mean", "std", "min", "max", "count"}}}``.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("aggregate needs at least one row")
    groups = {}
    for row in rows:
        g = tuple(row[k] if isinstance(row, dict) else getattr(row, k) for k in keys)
        groups.setdefault(g, []).append(row)
    out = {}
    for g in sorted(groups, key=lambda t: tuple(str(x) if isinstance(x, str) else x for x in t)):
        stats = {}
        for f in fields:
            v = np.array([_value(r, f) for r in groups[g]])
            stats[f] = {"mean": float(v.mean()), "std": float(v.std()), "min": float(v.min()),
                        "max": float(v.max()), "count": int(v.size)}
        out[g] = stats
    return out
