"""Seed/frequency campaigns and result files."""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .config import ScenarioConfig, dump_config
from .game_controller import CONTROLLER_NAMES, make_controller, run_episode
from .geometry_channel import rayleigh_boundary
from .metrics import KPI_FIELDS, aggregate
from .world import World

log = logging.getLogger(__name__)

KEY_FIELDS = ("controller", "fc_hz", "seed", "slot")
CSV_FIELDS = KEY_FIELDS + KPI_FIELDS
WORKERS_ENV = "NFISAC_WORKERS"
FIGURE_SLOTS = 4  # short trajectories exported separately


@dataclass
class CampaignResult:
    rows: list = field(default_factory=list)
    beliefs: list = field(default_factory=list)
    cell_seconds: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def worker_count(requested=None) -> int:
    """Pool size from the argument, else ``$NFISAC_WORKERS``, else 1."""
    if requested is not None:
        return max(1, int(requested))
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("%s=%r is not an integer; running sequentially", WORKERS_ENV, raw)
        return 1


def rayleigh_check(cfg: ScenarioConfig, fc) -> float:
    """Warn when HNs lie beyond the BS array's Rayleigh boundary at ``fc``.

    Returns the boundary in metres.
    """
    lam = 299_792_458.0 / fc
    aperture = (cfg.system.bs_antennas - 1) * lam / 2
    r = rayleigh_boundary(aperture, lam)
    far = cfg.scenario.hn_range_m[1]
    if far > r:
        log.warning("fc=%.0f GHz: HN ranges up to %.1f m exceed the Rayleigh boundary %.1f m; "
                    "those links are far-field", fc / 1e9, far, r)
    return r


def _kpi_row(name, fc, seed, slot, kp) -> dict:
    row = {"controller": name, "fc_hz": float(fc), "seed": int(seed), "slot": int(slot)}
    for f in KPI_FIELDS:
        row[f] = float(getattr(kp, f))
    return row


def run_cell(cfg: ScenarioConfig, controllers, fc, seed, num_slots=None, keep_beliefs=False):
    """All controllers on one (fc, seed) world; the world is shared, so runs are paired.

    Returns ``(rows, belief_rows, seconds_by_controller, failures)``.
    """
    world = World(cfg, fc, seed, num_slots)
    rows, beliefs, secs, failures = [], [], {}, []
    for name in controllers:
        t0 = time.perf_counter()
        try:
            kpis, _, brows = run_episode(make_controller(name, cfg), world, keep_beliefs=keep_beliefs)
        except Exception as exc:  # a broken cell must not sink the campaign
            log.error("run failed: controller=%s fc=%g seed=%d: %s", name, fc, seed, exc)
            failures.append((name, float(fc), int(seed), repr(exc)))
            continue
        secs[(name, float(fc), int(seed))] = time.perf_counter() - t0
        rows.extend(_kpi_row(name, fc, seed, t, kp) for t, kp in enumerate(kpis))
        beliefs.extend({"controller": name, "fc_hz": float(fc), "seed": int(seed), "slot": s,
                        "angle_deg": a, "prob": p} for s, a, p in brows)
    return rows, beliefs, secs, failures


def _cell_job(args):
    return run_cell(*args)


def run_campaign(cfg: ScenarioConfig, controllers=CONTROLLER_NAMES, *, fc_list=None, seeds=None,
                 num_slots=None, workers=None, keep_beliefs=False) -> CampaignResult:
    """Run every (controller, fc, seed) cell and merge the rows by sorted key.

    ``seeds`` defaults to ``first_seed .. first_seed + num_seeds - 1`` from the
    config; ``fc_list`` to ``system.fc_list``.
    """
    controllers = list(controllers)
    for name in controllers:
        if name not in CONTROLLER_NAMES:
            raise ValueError(f"unknown controller {name!r}; choose from {', '.join(CONTROLLER_NAMES)}")
    sc = cfg.scenario
    fc_list = list(cfg.system.fc_list if fc_list is None else fc_list)
    seeds = list(range(sc.first_seed, sc.first_seed + sc.num_seeds) if seeds is None else seeds)
    for fc in fc_list:
        rayleigh_check(cfg, fc)
    jobs = [(cfg, controllers, fc, seed, num_slots, keep_beliefs) for fc in fc_list for seed in seeds]
    n = worker_count(workers)
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
            parts = list(pool.map(_cell_job, jobs))
    else:
        parts = [_cell_job(j) for j in jobs]

    out = CampaignResult()
    for rows, beliefs, secs, failures in parts:
        out.rows.extend(rows)
        out.beliefs.extend(beliefs)
        out.cell_seconds.update(secs)
        out.failures.extend(failures)
    order = {name: i for i, name in enumerate(controllers)}
    out.rows.sort(key=lambda r: (order[r["controller"]], r["fc_hz"], r["seed"], r["slot"]))
    out.beliefs.sort(key=lambda r: (order[r["controller"]], r["fc_hz"], r["seed"], r["slot"], r["angle_deg"]))
    return out


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def write_csv(path, rows, fields=CSV_FIELDS):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r[f]) for f in fields])
    return path


def read_csv(path) -> list:
    """Parse a per-slot CSV back into typed rows."""
    out = []
    with Path(path).open(newline="") as fh:
        for r in csv.DictReader(fh):
            row = {}
            for k, v in r.items():
                if k == "controller":
                    row[k] = v
                elif k in ("seed", "slot"):
                    row[k] = int(v)
                else:
                    row[k] = float(v)
            out.append(row)
    return out


def summarize(rows) -> dict:
    """Per-slot and per-run statistics, keyed for JSON."""
    per_slot = aggregate(rows, ("controller", "fc_hz", "slot"))
    overall = aggregate(rows, ("controller", "fc_hz"))
    last10 = []
    if rows:
        n_slots = max(r["slot"] for r in rows) + 1
        last10 = [r for r in rows if r["slot"] >= n_slots - 10]
    tail = aggregate(last10, ("controller", "fc_hz")) if last10 else {}
    return {
        "fields": list(KPI_FIELDS),
        "statistics": ["mean", "std", "min", "max", "count"],
        "overall": [{"controller": c, "fc_hz": f, "kpis": s} for (c, f), s in overall.items()],
        "last_10_slots": [{"controller": c, "fc_hz": f, "kpis": s} for (c, f), s in tail.items()],
        "per_slot": [{"controller": c, "fc_hz": f, "slot": t, "kpis": s} for (c, f, t), s in per_slot.items()],
    }


def emit_results(result: CampaignResult, out_dir, cfg: ScenarioConfig | None = None,
                 beliefs=False, timing=True) -> dict:
    """Write slots.csv, slots_first4.csv, summary.json, optional beliefs.csv and the resolved config.

    With ``timing=False`` the wall-clock columns are zeroed so that reruns
    produce byte-identical files. Returns a mapping from artifact name to path.
    """
    rows = result.rows if isinstance(result, CampaignResult) else list(result)
    if not rows:
        raise ValueError("nothing to emit: the KPI table is empty")
    if not timing:
        rows = [{**r, "wall_ms": 0.0} for r in rows]
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from None
    paths = {"slots": write_csv(out / "slots.csv", rows),
             "first_slots": write_csv(out / f"slots_first{FIGURE_SLOTS}.csv",
                                      [r for r in rows if r["slot"] < FIGURE_SLOTS])}
    summary = summarize(rows)
    if isinstance(result, CampaignResult) and timing:
        summary["wall_seconds"] = [{"controller": c, "fc_hz": f, "seed": s, "seconds": t}
                                   for (c, f, s), t in sorted(result.cell_seconds.items())]
    if isinstance(result, CampaignResult):
        summary["failures"] = [list(f) for f in result.failures]
    p = out / "summary.json"
    p.write_text(json.dumps(summary, indent=1, sort_keys=True))
    paths["summary"] = p
    if beliefs and isinstance(result, CampaignResult) and result.beliefs:
        paths["beliefs"] = write_csv(out / "beliefs.csv", result.beliefs,
                                     ("controller", "fc_hz", "seed", "slot", "angle_deg", "prob"))
    if cfg is not None:
        p = out / "config.yaml"
        p.write_text(yaml.safe_dump(dump_config(cfg), sort_keys=False))
        paths["config"] = p
    return paths
