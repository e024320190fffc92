"""Per-slot Bayesian-Stackelberg controller, adaptive sensing refinement and baseline."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import belief_engine as be
from .beamforming import (
    NotchSpec,
    PrecoderSet,
    apply_notches,
    build_hybrid_precoder,
    jamming_beam,
    mrc_combiner,
    secrecy_rate,
    sensing_beam,
    sinr_eavesdropper,
    sinr_legitimate,
)
from .config import ScenarioConfig
from .geometry_channel import azimuth_of, far_field_steering, polar_point, steering_vector
from .metrics import SlotKpis, outage, power_account, secrecy_summary

CONTROLLER_NAMES = ("baseline", "alg1", "alg2", "alg1_no_sensing")


class Role(Enum):
    RECEIVER = "receiver"
    JAMMER = "jammer"


@dataclass
class NodeState:
    id: int
    position: np.ndarray
    role: Role = Role.RECEIVER
    predicted_secrecy: float = 0.0
    max_power: float = 1.0


@dataclass(frozen=True)
class PowerBudget:
    alpha: float
    beta: float
    gamma: float
    tx_power_cap: float
    pa_efficiency: float

    def __post_init__(self):
        fr = (self.alpha, self.beta, self.gamma)
        if min(fr) < 0 or abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError("power fractions must be non-negative and sum to 1")
        if self.tx_power_cap <= 0 or not 0 < self.pa_efficiency <= 1:
            raise ValueError("need tx_power_cap > 0 and pa_efficiency in (0, 1]")

    @property
    def comm_cap(self) -> float:
        return self.alpha * self.tx_power_cap

    @property
    def fj_cap(self) -> float:
        return self.beta * self.tx_power_cap

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "PowerBudget":
        g, s = cfg.game, cfg.system
        return cls(g.alpha, g.beta, g.gamma, s.tx_power_cap_w, s.pa_efficiency)


@dataclass(frozen=True)
class LeaderPolicy:
    gamma_t: float
    protected: tuple = ()
    rho_leak: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.rho_leak <= 1.0:
            raise ValueError("rho_leak must lie in (0, 1]")


@dataclass(frozen=True)
class DualState:
    lambda_o: float = 0.0
    lambda_h: float = 0.0
    mu_o: float = 0.1
    mu_h: float = 0.05

    def __post_init__(self):
        if self.lambda_o < 0 or self.lambda_h < 0:
            raise ValueError("dual variables must be non-negative")


def dual_update(duals: DualState, mean_secrecy, entropy, r_th, h_star) -> DualState:
    """Projected subgradient step on the outage and entropy multipliers."""
    lo = max(0.0, duals.lambda_o + duals.mu_o * (r_th - mean_secrecy))
    lh = max(0.0, duals.lambda_h + duals.mu_h * (entropy - h_star))
    return replace(duals, lambda_o=lo, lambda_h=lh)


def leader_utility(min_secrecy, fj_power, entropy, weights, lambda_h, h_star) -> float:
    """omega_R min R_s - omega_J P_FJ - lambda_H [H - H*]^+."""
    return float(weights.omega_r * min_secrecy - weights.omega_j * fj_power
                 - lambda_h * max(0.0, entropy - h_star))


def complexity_cost(beams, passes, max_beams, max_passes) -> float:
    """Sensing beams fired plus update passes, normalized by their per-slot maxima."""
    denom = max_beams + max_passes
    return float((beams + passes) / denom) if denom > 0 else 0.0


def final_utility(kpis: SlotKpis, weights, duals: DualState, complexity, *, r_th, h_star) -> float:
    w = weights
    return float(w.omega_max * kpis.max_secrecy + w.omega_avg * kpis.mean_secrecy
                 - w.omega_o * kpis.outage - w.omega_h * kpis.entropy - w.omega_c * complexity
                 - duals.lambda_o * max(0.0, r_th - kpis.mean_secrecy)
                 - duals.lambda_h * max(0.0, kpis.entropy - h_star))


def follower_best_response(r_hat, r_th) -> Role:
    return Role.JAMMER if r_hat < r_th else Role.RECEIVER


def expected_eve_sinr(eve_rows, eve_gain, precoders: PrecoderSet, u, belief, noise) -> float:
    """Belief average of a nominal LoS eavesdropper's SINR on stream ``u``.

    ``eve_rows`` holds conjugated BS steering rows, an equal number per
    belief bin (bin-major); the SINR is averaged within each bin, treating
    the belief as piecewise-constant, and then weighted by the bin mass.
    The nominal channel is rank one, so the eavesdropper's combiner drops out.
    """
    g = np.abs(eve_rows @ precoders.combined) ** 2 * eve_gain
    sig = g[:, u]
    sinr = sig / (g.sum(axis=1) - sig + noise)
    sinr = sinr.reshape(belief.num_bins, -1).mean(axis=1)
    return float(belief.probs @ sinr)


def predict_secrecy(h_est, precoders: PrecoderSet, u, belief, eve_rows, eve_gain, noise,
                    leak_fraction=0.0):
    """Predicted secrecy R_hat of stream ``u`` from CSI estimates and the belief.

    The legitimate SINR is evaluated on the estimate with the worst leakage
    the leader will allow (``leak_fraction`` of the desired power) counted as
    interference; the eavesdropper term is the belief-expected SINR of
    :func:`expected_eve_sinr`. Returns ``(r_hat, sinr_legit, expected_sinr_eve)``.
    """
    h = h_est.estimate if hasattr(h_est, "estimate") else np.asarray(h_est)
    w = mrc_combiner(h, precoders.stream(u))
    g = np.abs(w.conj() @ h @ precoders.combined) ** 2
    sig = g[u]
    sl = float(sig / (g.sum() - sig + leak_fraction * sig + noise))
    se = expected_eve_sinr(eve_rows, eve_gain, precoders, u, belief, noise)
    return float(secrecy_rate(sl, se)), sl, se


@dataclass
class FjResult:
    vectors: list
    powers: list
    active: list
    notches: list
    flags: list = field(default_factory=list)


def _scale_all(vectors, p_fj_max):
    total = sum(float(np.vdot(g, g).real) for g in vectors)
    if total > p_fj_max > 0:
        s = np.sqrt(p_fj_max / total)
        return [g * s for g in vectors], True
    if p_fj_max <= 0:
        return [g * 0.0 for g in vectors], total > 0
    return list(vectors), False


def enforce_fj_constraints(vectors, p_fj_max, *, geometries=(), carrier=None, leak_rows=(),
                           leak_caps=(), rx_positions=(), protected=(), iterations=3,
                           widen_deg=1.5, min_fraction=0.01) -> FjResult:
    """Scale and re-notch jamming beams until the power and leakage caps hold.

    Parameters
    ----------
    vectors : candidate jamming vectors g_j (their norms are the planned powers)
    p_fj_max : cap on the total friendly-jamming power
    leak_rows : ``leak_rows[u][j]`` is the effective row ``w_u^H H_{u<-j}``
    leak_caps : per-receiver leakage cap ``rho_leak * P_lu^max``
    rx_positions, geometries, carrier : used to aim extra notches from each
        jammer toward a violated receiver; each pass adds a wider pair
    protected : notches every beam must keep

    Total power is scaled proportionally first. A leakage violation then
    triggers up to ``iterations`` notch passes; anything left is removed by
    scaling the contributing jammers. A jammer pushed below ``min_fraction``
    of its planned power is switched off and flagged.
    """
    planned = [float(np.vdot(g, g).real) for g in vectors]
    vecs, scaled = _scale_all([np.asarray(g, dtype=complex) for g in vectors], p_fj_max)
    flags = ["fj_power_scaled"] if scaled else []
    notch_sets = [list(protected) for _ in vecs]
    active = [p > 0 for p in planned]
    n_rx = len(leak_caps)

    def leak_matrix():
        out = np.zeros((n_rx, len(vecs)))
        for u in range(n_rx):
            for j, g in enumerate(vecs):
                if active[j]:
                    out[u, j] = abs(leak_rows[u][j] @ g) ** 2
        return out

    if n_rx and vecs:
        caps = np.asarray(leak_caps, dtype=float)
        for it in range(iterations):
            lm = leak_matrix()
            bad = np.flatnonzero(lm.sum(axis=1) > caps * (1 + 1e-12))
            if bad.size == 0 or carrier is None:
                break
            for j, g in enumerate(vecs):
                if not active[j] or not lm[bad, j].any():
                    continue
                geo = geometries[j]
                for u in bad:
                    if lm[u, j] <= 0:
                        continue
                    ang = azimuth_of(rx_positions[u], geo.center)
                    offsets = [0.0] if it == 0 else [-it * widen_deg, it * widen_deg]
                    notch_sets[j].extend(NotchSpec(float(np.clip(ang + o, -90, 90)), 0.0) for o in offsets)
                if len(notch_sets[j]) < geo.num_elements:
                    vecs[j] = apply_notches(g, notch_sets[j], geo, carrier)
            flags.append("leak_notch_pass")
        lm = leak_matrix()
        leak = lm.sum(axis=1)
        bad = leak > caps * (1 + 1e-12)
        if bad.any():
            flags.append("leak_power_scaled")
            for j in range(len(vecs)):
                hits = bad & (lm[:, j] > 0)
                if active[j] and hits.any():
                    c = float(np.min(caps[hits] / leak[hits]))
                    vecs[j] = vecs[j] * np.sqrt(c)
    powers = [float(np.vdot(g, g).real) if a else 0.0 for g, a in zip(vecs, active)]
    for j, (p, p0) in enumerate(zip(powers, planned)):
        if active[j] and p < min_fraction * p0:
            active[j] = False
            powers[j] = 0.0
            vecs[j] = vecs[j] * 0.0
            flags.append("jammer_deactivated")
    return FjResult(vecs, powers, active, notch_sets, flags)


# ---------------------------------------------------------------------------
# slot machinery


@dataclass
class ControllerState:
    belief: be.AngularBelief
    duals: DualState
    sigma: float
    protected: tuple = ()
    snapshots: list = field(default_factory=list)


@dataclass
class AdaptiveResult:
    belief: be.AngularBelief
    gamma_t: float
    sensing_weights: list
    peaks: list
    sigma: float
    passes: int
    beams: int
    flags: list


def _sensing_rng(world, slot, pss):
    return np.random.default_rng([world.seed, 3, slot, pss])


def _peaks(belief, excluded, min_sep):
    return be.map_peaks(belief, 2, excluded, separation=max(belief.sigma, min_sep))[0]


def _sense(belief, world, slot, pss, k_eff, tau, excluded, params, nominal_range, min_sep):
    """One sensing pass: beams on the MAP peaks, echo model, posterior update."""
    peaks = _peaks(belief, excluded, min_sep)
    beams = [sensing_beam(tau, polar_point(nominal_range, p), world.bs, world.carrier) for p in peaks]
    eve_az, ill = [], []
    for e in range(world.num_eves):
        a = steering_vector(world.bs, world.eve_position(slot, e), world.carrier)
        eve_az.append(world.eve_azimuth[slot, e])
        ill.append(max((abs(np.vdot(a, w)) ** 2 for w in beams), default=0.0))
    z = be.sensing_response(belief, eve_az, ill, _sensing_rng(world, slot, pss), params)
    post, ok = be.update(belief, z, k_eff)
    return post, beams, peaks, ok


def run_adaptive(belief, sigma, cfg: ScenarioConfig, protected, world, slot) -> AdaptiveResult:
    """Adaptive sensing refinement for one slot (predict, confidence-driven passes, meta-kernel)."""
    p = cfg.belief
    excluded = [(n.angle - 1.0, n.angle + 1.0) for n in protected]
    b = be.predict(replace(belief, sigma=sigma), p.mixing)
    passes, beams, flags, weights = 0, 0, [], []
    for pss in range(p.max_passes):
        conf = be.confidence(b)
        if conf >= p.conf_th:
            flags.append("early_stop")
            break
        b, w, _, ok = _sense(b, world, slot, pss, be.likelihood_exponent(conf, p), conf, excluded, p,
                              cfg.game.nominal_eve_range_m, cfg.game.min_peak_separation_deg)
        passes += 1
        beams += len(w)
        weights = w
        if not ok:
            flags.append("uninformative_likelihood")
    peaks = _peaks(b, excluded, cfg.game.min_peak_separation_deg)
    h = be.entropy(b)
    sigma_new = be.adapt_kernel(sigma, not h > p.entropy_target, p)
    return AdaptiveResult(replace(b, sigma=sigma_new), be.sensing_fraction(h, p), weights, peaks,
                          sigma_new, passes, beams, flags)


def _run_alg1_belief(belief, sigma, cfg, protected, world, slot, sensing=True) -> AdaptiveResult:
    p = cfg.belief
    excluded = [(n.angle - 1.0, n.angle + 1.0) for n in protected]
    b = be.predict(replace(belief, sigma=sigma), p.mixing)
    weights, passes, flags = [], 0, []
    if sensing:
        b, weights, _, ok = _sense(b, world, slot, 0, p.k_min, 1.0, excluded, p, cfg.game.nominal_eve_range_m,
                                   cfg.game.min_peak_separation_deg)
        passes = 1
        if not ok:
            flags.append("uninformative_likelihood")
    peaks = _peaks(b, excluded, cfg.game.min_peak_separation_deg)
    return AdaptiveResult(b, be.sensing_fraction(be.entropy(b), p), weights, peaks, sigma, passes,
                          len(weights), flags)


def _posterior_leakage(world, belief, g):
    """Leakage rows/weights toward a nominal eavesdropper at every belief bin.

    Weights are ``eve_leak_weight * p(phi) * gain``; bins with negligible
    mass are dropped.
    """
    n = g.eve_subsamples
    rows, gain = world.eve_rows_at(g.nominal_eve_range_m, belief.grid, n)
    keep = np.repeat(belief.probs > 1e-4 * belief.probs.max(), n)
    wts = np.repeat(belief.probs, n) * (g.eve_leak_weight * gain / n)
    return rows[keep], wts[keep]


def realized_secrecy(world, slot, precoders, users, jam_vectors, jammers):
    """Per-receiver secrecy on the true channels against the true eavesdroppers."""
    n0 = world.noise_w
    out = []
    for i, u in enumerate(users):
        h = world.bs_to_hn(slot, u).entries
        links = [(world.hn_to_hn(slot, j, u).entries, g) for j, g in zip(jammers, jam_vectors)]
        sl = sinr_legitimate(h, precoders, i, 0.0, n0, jam_links=links)
        se = 0.0
        for e in range(world.num_eves):
            he = world.bs_to_eve(slot, e).entries
            elinks = [(world.hn_to_eve(slot, j, e).entries, g) for j, g in zip(jammers, jam_vectors)]
            se = max(se, sinr_eavesdropper(he, precoders, i, 0.0, n0, jam_links=elinks))
        out.append(float(secrecy_rate(sl, se)))
    return out


def _map_error(world, slot, belief):
    if world.num_eves == 0:
        return float("nan")
    return float(np.min(np.abs(world.eve_azimuth[slot] - belief.map_angle())))


class Controller:
    name = "controller"

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.budget = PowerBudget.from_config(cfg)

    def initial_state(self) -> ControllerState:
        p = self.cfg.belief
        g = self.cfg.game
        return ControllerState(be.AngularBelief.uniform(p.num_bins, p.sigma0),
                               DualState(mu_o=g.mu_o, mu_h=g.mu_h), p.sigma0)

    def step(self, world, slot, state: ControllerState):
        raise NotImplementedError


class BaselineController(Controller):
    """Static hybrid MRT to the scheduled HNs at full power: no belief, sensing or jamming."""

    name = "baseline"

    def step(self, world, slot, state):
        t0 = time.perf_counter()
        cfg, s = self.cfg, self.cfg.system
        users = world.schedule(slot)
        est = [world.csi(slot, "bs_hn", u) for u in users]
        pre = build_hybrid_precoder(est, len(users), s.rf_chains, s.tx_power_cap_w, digital="mrt")
        sec = realized_secrecy(world, slot, pre, users, [], [])
        _, p_out = outage(sec, s.secrecy_threshold)
        mean, mx, mn = secrecy_summary(sec)
        comm, sens, fj, total = power_account(pre, [], 0.0, s.tx_power_cap_w, s.pa_efficiency)
        h = cfg.belief.max_entropy
        kp = SlotKpis(sec, mean, mx, p_out, 100.0 * (1 - p_out), h, comm, sens, fj, total,
                      min_secrecy=mn, sigma=state.sigma, map_error_deg=float("nan"))
        kp.leader_utility = leader_utility(mn, fj, h, cfg.game, state.duals.lambda_h, cfg.belief.entropy_target)
        kp.final_utility = final_utility(kp, cfg.game, state.duals, 0.0, r_th=s.secrecy_threshold,
                                         h_star=cfg.belief.entropy_target)
        kp.wall_ms = 1e3 * (time.perf_counter() - t0)
        return kp, state


class StackelbergController(Controller):
    """Belief-driven leader with follower role switching.

    ``mode`` selects the variant: ``"alg1"`` (single fixed-exponent sensing
    pass), ``"alg2"`` (adds the adaptive refinement and posterior-aligned
    comm nulls) or ``"alg1_no_sensing"`` (belief evolves by prediction only).
    """

    def __init__(self, cfg: ScenarioConfig, mode="alg2"):
        super().__init__(cfg)
        if mode not in ("alg1", "alg2", "alg1_no_sensing"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.name = mode
        table = cfg.notches.alg2 if mode == "alg2" else cfg.notches.alg1
        self.notches = tuple(NotchSpec(angle=a, depth=d) for d, a in table)

    def initial_state(self):
        st = super().initial_state()
        st.protected = self.notches
        return st

    def belief_step(self, world, slot, state) -> AdaptiveResult:
        if self.mode == "alg2":
            return run_adaptive(state.belief, state.sigma, self.cfg, state.protected, world, slot)
        return _run_alg1_belief(state.belief, state.sigma, self.cfg, state.protected, world, slot,
                                sensing=self.mode == "alg1")

    def step(self, world, slot, state):
        t0 = time.perf_counter()
        cfg, s, g, bp = self.cfg, self.cfg.system, self.cfg.game, self.cfg.belief
        r_th, n0 = s.secrecy_threshold, world.noise_w
        ad = self.belief_step(world, slot, state)
        belief = ad.belief
        h = be.entropy(belief)
        policy = LeaderPolicy(ad.gamma_t, self.notches, g.rho_leak)

        users = world.schedule(slot)
        est = {u: world.csi(slot, "bs_hn", u) for u in users}
        per_stream = self.budget.comm_cap / s.streams
        nulls, leak, reg = None, {}, g.rzf_regularization
        if self.mode == "alg2":
            # hard notches at B_t, soft posterior-weighted suppression elsewhere
            nulls = far_field_steering(world.bs, [n.angle for n in policy.protected], world.carrier)
            reg = n0 / per_stream
            if g.eve_leak_weight > 0:
                rows, wts = _posterior_leakage(world, belief, g)
                leak = dict(leakage_rows=rows, leakage_weights=wts)
        pre = build_hybrid_precoder([est[u] for u in users], len(users), s.rf_chains, per_stream * len(users),
                                    regularization=reg, null_steering=nulls, **leak)
        # jamming leakage can only come from the other scheduled followers
        leak_frac = policy.rho_leak if len(users) > 1 else 0.0
        nodes = []
        for i, u in enumerate(users):
            rows, gain = world.nominal_eve_response(u, belief.grid, g.eve_subsamples)
            r_hat, _, _ = predict_secrecy(est[u], pre, i, belief, rows, gain, n0, leak_frac)
            nodes.append(NodeState(u, world.hn_pos[u], follower_best_response(r_hat, r_th), r_hat,
                                   g.hn_max_power_w))
        receivers = [n.id for n in nodes if n.role is Role.RECEIVER]
        jammers = [n.id for n in nodes if n.role is Role.JAMMER]
        flags = list(ad.flags) + (["digital_fallback"] if pre.fallback else [])

        final = None
        if receivers:
            final = build_hybrid_precoder([est[u] for u in receivers], len(receivers), s.rf_chains,
                                          per_stream * len(receivers), regularization=reg,
                                          null_steering=nulls, **leak)
            if final.fallback:
                flags.append("digital_fallback")

        jam_vecs, active_jammers = [], []
        if jammers:
            geoms = [world.hn_geom[j] for j in jammers]
            cand = []
            for j, geo in zip(jammers, geoms):
                jb = jamming_beam(belief, policy.protected, geo, world.carrier, g.hn_max_power_w,
                                  eve_range=g.jam_focus_ranges_m,
                                  separation=max(belief.sigma, g.min_peak_separation_deg))
                if jb.degenerate:
                    flags.append("degenerate_jam_beam")
                cand.append(jb.weights)
            leak_rows, caps = [], []
            if final is not None:
                for i, u in enumerate(receivers):
                    hu = est[u].estimate
                    w = mrc_combiner(hu, final.stream(i))
                    caps.append(policy.rho_leak * abs(np.vdot(w, hu @ final.stream(i))) ** 2)
                    leak_rows.append([w.conj() @ world.csi(slot, "hn_hn", j, u).estimate for j in jammers])
            fj = enforce_fj_constraints(cand, self.budget.fj_cap, geometries=geoms, carrier=world.carrier,
                                        leak_rows=leak_rows, leak_caps=caps,
                                        rx_positions=[world.hn_pos[u] for u in receivers],
                                        protected=policy.protected, iterations=g.leak_iterations,
                                        min_fraction=g.min_jam_fraction)
            flags += fj.flags
            for j, v, a in zip(jammers, fj.vectors, fj.active):
                if a:
                    active_jammers.append(j)
                    jam_vecs.append(v)

        if final is not None:
            sec = realized_secrecy(world, slot, final, receivers, jam_vecs, active_jammers)
            _, p_out = outage(sec, r_th)
        else:
            sec, p_out = [], 1.0
            flags.append("no_receivers")
        mean, mx, mn = secrecy_summary(sec)
        jam_p = [float(np.vdot(v, v).real) for v in jam_vecs]
        comm, sens, fjp, total = power_account(final, jam_p, policy.gamma_t, s.tx_power_cap_w, s.pa_efficiency)
        max_beams = 2 * (bp.max_passes if self.mode == "alg2" else 1)
        max_passes = bp.max_passes if self.mode == "alg2" else 1
        c_t = complexity_cost(ad.beams, ad.passes, max_beams, max_passes)

        kp = SlotKpis(sec, mean, mx, p_out, 100.0 * (1 - p_out), h, comm, sens, fjp, total,
                      complexity=c_t, n_jammers=len(active_jammers), min_secrecy=mn,
                      gamma_t=policy.gamma_t, map_error_deg=_map_error(world, slot, belief), flags=flags)
        duals = state.duals
        kp.leader_utility = leader_utility(mn, fjp, h, g, duals.lambda_h, bp.entropy_target)
        kp.final_utility = final_utility(kp, g, duals, c_t, r_th=r_th, h_star=bp.entropy_target)
        new_duals = dual_update(duals, mean, h, r_th, bp.entropy_target)
        sigma = be.adapt_kernel(ad.sigma, mean >= r_th, bp)
        kp.sigma, kp.lambda_o, kp.lambda_h = sigma, new_duals.lambda_o, new_duals.lambda_h
        new_state = ControllerState(replace(belief, sigma=sigma), new_duals, sigma, policy.protected,
                                    state.snapshots)
        kp.wall_ms = 1e3 * (time.perf_counter() - t0)
        return kp, new_state


def make_controller(name, cfg: ScenarioConfig) -> Controller:
    if name == "baseline":
        return BaselineController(cfg)
    if name in ("alg1", "alg2", "alg1_no_sensing"):
        return StackelbergController(cfg, name)
    raise ValueError(f"unknown controller {name!r}; choose from {', '.join(CONTROLLER_NAMES)}")


def run_slot(controller: Controller, world, slot, state: ControllerState):
    """One slot of ``controller``: returns ``(SlotKpis, new_state)``."""
    return controller.step(world, slot, state)


def baseline_controller(world, slot, cfg: ScenarioConfig) -> SlotKpis:
    ctl = BaselineController(cfg)
    return ctl.step(world, slot, ctl.initial_state())[0]


def run_episode(controller: Controller, world, num_slots=None, keep_beliefs=False):
    """Run ``num_slots`` consecutive slots; returns (kpi list, final state, belief rows)."""
    state = controller.initial_state()
    n = world.num_slots if num_slots is None else num_slots
    kpis, rows = [], []
    for t in range(n):
        kp, state = controller.step(world, t, state)
        kpis.append(kp)
        if keep_beliefs:
            rows.extend(state.belief.rows(t))
    return kpis, state, rows
