"""Deterministic fixed-step coverage simulation.

Each step: users move, every user re-associates to the strongest feasible
AP (view sector, optional body blockage), new or changed links pay the
AP's beam-alignment dead time, and an AP's rate is time-shared equally
among its assigned users. Metrics are plain averages over (user, step)
pairs; an AP is idle in a step when nothing is assigned to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry, linkbudget, mobility
from .geometry import Constellation, Room
from .linkbudget import LinkBudgetParams, SPEED_OF_LIGHT


class ConfigError(ValueError):
    """Invalid simulation configuration; message names the field."""


SHARE_MODES = ("equal_share", "single_user")

EVENT_HANDOFF = "handoff"
EVENT_BLOCKAGE_START = "blockage_start"
EVENT_BLOCKAGE_END = "blockage_end"
EVENT_ALIGNMENT_DONE = "alignment_done"


@dataclass(frozen=True)
class SimConfig:
    """Complete, reproducible description of one experiment run."""

    room: Room = Room()
    placement_type: str = "B"
    n_aps: int = 4
    p_o_w: float = 1e-3
    link: LinkBudgetParams = field(default_factory=lambda: LinkBudgetParams(p_t_w=1e-3 / 4))
    n_users: int = 30
    seed: int = 1
    v_mean_mps: float = mobility.DEFAULT_SPEED_MEAN
    v_span_mps: float = mobility.DEFAULT_SPEED_SPAN
    user_height_m: float = mobility.DEFAULT_DEVICE_HEIGHT_M
    user_width_m: float = mobility.DEFAULT_BODY_WIDTH_M
    body_height_m: float = mobility.DEFAULT_BODY_HEIGHT_M
    rate_min_bps: float = mobility.DEFAULT_RATE_MIN_BPS
    rate_max_bps: float = mobility.DEFAULT_RATE_MAX_BPS
    duration_s: float = 60.0
    dt_s: float = 0.010
    blockage_enabled: bool = False
    t_align_s: float = 5e-3
    h_override_m: float | None = None
    share_mode: str = "equal_share"
    pause_s: float = 0.0

    def validate(self) -> "SimConfig":
        t = self.placement_type.upper()
        if t not in geometry.ALL_TYPES:
            raise ConfigError(f"placement_type: unknown type {self.placement_type!r}")
        if t == "A":
            if self.n_aps != 1:
                raise ConfigError("n_aps: type A requires exactly 1 AP")
        elif self.n_aps not in geometry.GRID_COUNTS:
            raise ConfigError(
                f"n_aps: type {t} supports {geometry.GRID_COUNTS}, got {self.n_aps}"
            )
        if self.p_o_w <= 0:
            raise ConfigError("p_o_w: total power must be positive")
        if abs(self.link.p_t_w * self.n_aps - self.p_o_w) > 1e-12 * self.p_o_w:
            raise ConfigError(
                "link.p_t_w: per-AP power must equal the total budget split "
                f"{self.p_o_w}/{self.n_aps}"
            )
        if self.dt_s <= 0:
            raise ConfigError("dt_s: time step must be positive")
        if self.duration_s < self.dt_s:
            raise ConfigError("duration_s: must cover at least one step")
        if self.t_align_s <= 0:
            raise ConfigError("t_align_s: alignment time must be positive")
        if self.n_users < 0:
            raise ConfigError("n_users: must be >= 0")
        if self.v_mean_mps - self.v_span_mps <= 0:
            raise ConfigError("v_span_mps: speed range must stay positive")
        if not 0 < self.rate_min_bps <= self.rate_max_bps:
            raise ConfigError("rate_min_bps: need 0 < min <= max demand")
        if self.share_mode not in SHARE_MODES:
            raise ConfigError(f"share_mode: choose from {SHARE_MODES}")
        if self.user_width_m <= 0 or self.body_height_m <= 0:
            raise ConfigError("user_width_m/body_height_m: must be positive")
        if self.pause_s < 0:
            raise ConfigError("pause_s: must be >= 0")
        resolved = self.resolve_height()
        if resolved.user_height_m >= resolved.room.height_m:
            raise ConfigError("user_height_m: device sits above the ceiling")
        return resolved

    def effective_height_m(self) -> float:
        return self.room.height_m - self.user_height_m

    def resolve_height(self) -> "SimConfig":
        """Apply an effective-height override by moving the ceiling."""
        if self.h_override_m is None:
            return self
        if self.h_override_m <= 0:
            raise ConfigError("h_override_m: effective height must be positive")
        room = replace(self.room, height_m=self.h_override_m + self.user_height_m)
        return replace(self, room=room, h_override_m=None)


def with_power_budget(cfg: SimConfig, p_o_w: float, n_aps: int) -> SimConfig:
    link = replace(cfg.link, p_t_w=p_o_w / n_aps)
    return replace(cfg, p_o_w=p_o_w, n_aps=n_aps, link=link)


def with_placement(cfg: SimConfig, placement_type: str, n_aps: int | None = None) -> SimConfig:
    t = placement_type.upper()
    n = 1 if t == "A" else (n_aps if n_aps is not None else cfg.n_aps)
    return with_power_budget(replace(cfg, placement_type=t), cfg.p_o_w, n)


def with_effective_height(cfg: SimConfig, h_eff_m: float) -> SimConfig:
    return replace(cfg, h_override_m=h_eff_m).resolve_height()


def parse_series(label: str) -> tuple[str, int]:
    """'A' -> (A, 1); 'B4' -> (B, 4); 'C16' -> (C, 16)."""
    label = label.strip().upper()
    if not label or label[0] not in geometry.ALL_TYPES:
        raise ConfigError(f"series label {label!r} must start with a placement type")
    if len(label) == 1:
        return label, 1 if label == "A" else 4
    return label[0], int(label[1:])


def build_constellation(cfg: SimConfig, apply_height_correction: bool = True) -> Constellation:
    """Constellation for a resolved config; wall mounts get the height
    correction matching the ceiling grid unless disabled."""
    cfg = cfg.resolve_height()
    t = cfg.placement_type.upper()
    h_c = 0.0
    if t == "C" and apply_height_correction:
        d_grid, d_perim = geometry.reference_distances(
            cfg.room, cfg.n_aps, cfg.user_height_m
        )
        tau = linkbudget.absorption_for(cfg.link)
        h_c = geometry.height_correction(
            cfg.effective_height_m(), d_grid, d_perim, tau
        )
    return geometry.place(cfg.room, t, cfg.n_aps, h_c, cfg.t_align_s)


@dataclass(frozen=True)
class LinkAssignment:
    """Per-user AP choice (-1 when no feasible AP) plus link alignment state."""

    ap_for_user: tuple[int, ...]
    align_left_s: tuple[float, ...] = ()
    aligned: tuple[bool, ...] = ()


@dataclass(frozen=True)
class MetricsReport:
    placement_type: str
    n_aps: int
    effective_height_m: float
    seed: int
    n_steps: int
    blockage_enabled: bool
    user_coverage: float
    mean_throughput_bps: float
    ap_idle_fraction: float
    handoff_count: int
    per_user_coverage: tuple[float, ...]
    per_user_throughput_bps: tuple[float, ...]
    per_ap_idle_fraction: tuple[float, ...]
    p_t_w: float
    p_o_w: float
    height_correction_m: float
    events: tuple = ()


class _ApArrays:
    """Constellation unpacked for vectorized math."""

    def __init__(self, con: Constellation):
        self.xyz = con.positions()
        self.view = np.array([n.view_deg for n in con.nodes])
        az = np.radians([n.facing_deg for n in con.nodes])
        self.face = np.stack([np.cos(az), np.sin(az)], axis=1)
        self.align = np.array([n.align_time_s for n in con.nodes])
        self.wide = self.view >= 360.0


def _feasible_view(pos: np.ndarray, aps: _ApArrays) -> np.ndarray:
    rel = pos[:, None, :] - aps.xyz[None, :, :2]
    dot = np.einsum("una,na->un", rel, aps.face)
    norm = np.hypot(rel[:, :, 0], rel[:, :, 1])
    return aps.wide[None, :] | (dot >= -1e-12 * norm)


def _snr_matrix(pos, device_z, aps: _ApArrays, link: LinkBudgetParams, tau):
    g = linkbudget.antenna_gain(link.tx_beamwidth_deg) * linkbudget.antenna_gain(
        link.rx_beamwidth_deg
    )
    spread = (4.0 * math.pi * link.f_c_hz / SPEED_OF_LIGHT) ** 2
    sig = link.p_t_w * g / (spread * link.noise_psd_w_hz * link.bandwidth_hz)
    rel = pos[:, None, :] - aps.xyz[None, :, :2]
    d_sq = rel[:, :, 0] ** 2 + rel[:, :, 1] ** 2 + (aps.xyz[None, :, 2] - device_z) ** 2
    d = np.sqrt(d_sq)
    return sig / (d_sq * np.exp(tau * d))


def _best_ap(snr, feasible):
    masked = np.where(feasible, snr, -np.inf)
    best = masked.argmax(axis=1).astype(np.int64)
    best[~feasible.any(axis=1)] = -1
    return best


def associate(
    users,
    constellation: Constellation,
    link: LinkBudgetParams,
    blockers=None,
    device_height_m: float = mobility.DEFAULT_DEVICE_HEIGHT_M,
) -> LinkAssignment:
    """Strongest-signal association with view-sector and LOS feasibility.

    Ties go to the lowest AP id; users with no feasible AP stay
    unassigned. When blockers has one cylinder per user (in user order),
    blocker i is taken as user i's own body and skipped for their links.
    """
    aps = _ApArrays(constellation)
    pos = np.array([[u.x, u.y] for u in users], dtype=float)
    tau = linkbudget.absorption_for(link)
    feasible = _feasible_view(pos, aps)
    if blockers:
        own_body = len(blockers) == len(users)
        for ui, u in enumerate(users):
            for ai in range(len(constellation)):
                if not feasible[ui, ai]:
                    continue
                ap = constellation.nodes[ai]
                if geometry.los_blocked(
                    (ap.x, ap.y, ap.z), (u.x, u.y, device_height_m), blockers,
                    exclude=ui if own_body else None,
                ):
                    feasible[ui, ai] = False
    snr = _snr_matrix(pos, device_height_m, aps, link, tau)
    best = _best_ap(snr, feasible)
    return LinkAssignment(tuple(int(b) for b in best))


def run(cfg: SimConfig, record_events: bool = False) -> MetricsReport:
    """Execute the configured run and aggregate metrics."""
    cfg = cfg.validate()
    con = build_constellation(cfg)
    aps = _ApArrays(con)
    n_ap = len(con)
    m = cfg.n_users
    tau = linkbudget.absorption_for(cfg.link)
    n_steps = int(round(cfg.duration_s / cfg.dt_s))
    device_z = cfg.user_height_m

    if m == 0:
        return MetricsReport(
            placement_type=cfg.placement_type.upper(), n_aps=cfg.n_aps,
            effective_height_m=cfg.effective_height_m(), seed=cfg.seed,
            n_steps=n_steps, blockage_enabled=cfg.blockage_enabled,
            user_coverage=0.0, mean_throughput_bps=0.0, ap_idle_fraction=1.0,
            handoff_count=0, per_user_coverage=(), per_user_throughput_bps=(),
            per_ap_idle_fraction=(1.0,) * n_ap, p_t_w=cfg.link.p_t_w,
            p_o_w=cfg.p_o_w, height_correction_m=con.height_correction_m,
        )

    users = mobility.init_users(
        cfg.room, m, cfg.seed,
        v_mean=cfg.v_mean_mps, v_span=cfg.v_span_mps,
        rate_min_bps=cfg.rate_min_bps, rate_max_bps=cfg.rate_max_bps,
        body_radius_m=cfg.user_width_m / 2.0, body_height_m=cfg.body_height_m,
    )
    rngs = [mobility.substream(cfg.seed, u.id) for u in users]
    demand = np.array([u.demand_bps for u in users])

    assign = np.full(m, -1, dtype=np.int64)
    align_left = np.zeros(m)
    shadowed = np.zeros(m, dtype=bool)

    covered_steps = np.zeros(m, dtype=np.int64)
    thr_sum = np.zeros(m)
    idle_steps = np.zeros(n_ap, dtype=np.int64)
    handoffs = 0
    events: list[tuple[float, str, int, int]] = []

    for k in range(n_steps):
        t = (k + 1) * cfg.dt_s
        users = [
            mobility.step_user(u, cfg.dt_s, rngs[i], cfg.room,
                               cfg.v_mean_mps, cfg.v_span_mps, cfg.pause_s)
            for i, u in enumerate(users)
        ]
        pos = np.array([[u.x, u.y] for u in users])

        feasible = _feasible_view(pos, aps)
        feasible_unblocked = feasible
        if cfg.blockage_enabled:
            blocked = geometry.blocked_matrix(
                aps.xyz, pos, device_z, pos, cfg.user_width_m / 2.0,
                cfg.body_height_m,
            )
            feasible = feasible & ~blocked

        snr = _snr_matrix(pos, device_z, aps, cfg.link, tau)
        best = _best_ap(snr, feasible)

        changed = best != assign
        if np.any(changed):
            handoff_mask = changed & (best >= 0) & (assign >= 0)
            handoffs += int(handoff_mask.sum())
            align_left = np.where(changed & (best >= 0), aps.align[np.clip(best, 0, None)], align_left)
            align_left = np.where(best < 0, 0.0, align_left)
            if record_events:
                for u in np.flatnonzero(handoff_mask):
                    events.append((t, EVENT_HANDOFF, int(u), int(best[u])))

        if cfg.blockage_enabled:
            now_shadowed = (best < 0) & feasible_unblocked.any(axis=1)
            if record_events:
                for u in np.flatnonzero(now_shadowed & ~shadowed):
                    events.append((t, EVENT_BLOCKAGE_START, int(u), int(assign[u])))
                for u in np.flatnonzero(shadowed & ~now_shadowed):
                    events.append((t, EVENT_BLOCKAGE_END, int(u), int(best[u])))
            shadowed = now_shadowed

        assigned = best >= 0
        counting = assigned & (align_left > 0.0)
        align_left = np.where(counting, np.maximum(align_left - cfg.dt_s, 0.0), align_left)
        if record_events:
            for u in np.flatnonzero(counting & (align_left <= 0.0)):
                events.append((t, EVENT_ALIGNMENT_DONE, int(u), int(best[u])))

        serving = assigned & ~counting
        counts = np.bincount(best[assigned], minlength=n_ap)
        delivered = np.zeros(m)
        if np.any(serving):
            idx = np.flatnonzero(serving)
            ap_idx = best[idx]
            rate = cfg.link.bandwidth_hz * np.log2(1.0 + snr[idx, ap_idx])
            if cfg.share_mode == "equal_share":
                delivered[idx] = rate / counts[ap_idx]
            else:  # single_user: strongest assigned user takes the step
                for a in np.unique(ap_idx):
                    mine = idx[ap_idx == a]
                    delivered[mine[np.argmax(snr[mine, a])]] = cfg.link.bandwidth_hz * np.log2(
                        1.0 + snr[mine, a].max()
                    )

        covered_steps += delivered >= demand
        thr_sum += delivered
        idle_steps += counts == 0
        assign = best

    return MetricsReport(
        placement_type=cfg.placement_type.upper(),
        n_aps=cfg.n_aps,
        effective_height_m=cfg.effective_height_m(),
        seed=cfg.seed,
        n_steps=n_steps,
        blockage_enabled=cfg.blockage_enabled,
        user_coverage=float(covered_steps.sum() / (m * n_steps)),
        mean_throughput_bps=float(thr_sum.sum() / (m * n_steps)),
        ap_idle_fraction=float(idle_steps.sum() / (n_ap * n_steps)),
        handoff_count=int(handoffs),
        per_user_coverage=tuple(covered_steps / n_steps),
        per_user_throughput_bps=tuple(thr_sum / n_steps),
        per_ap_idle_fraction=tuple(idle_steps / n_steps),
        p_t_w=cfg.link.p_t_w,
        p_o_w=cfg.p_o_w,
        height_correction_m=con.height_correction_m,
        events=tuple(events),
    )


LABEL_DARKNESS, LABEL_ILLUMINATION, LABEL_SHADOW = 0, 1, 2
LABEL_NAMES = ("darkness", "illumination", "shadow")


@dataclass(frozen=True, eq=False)
class HeatmapGrid:
    resolution_cells_per_m: float
    length_m: float
    width_m: float
    device_height_m: float
    probe_rate_bps: float
    rates_bps: np.ndarray  # (nx, ny), x index first
    labels: np.ndarray  # (nx, ny) int8, see LABEL_NAMES


def heatmap(
    cfg: SimConfig,
    resolution_cells_per_m: float,
    probe_rate_bps: float,
    blockers=None,
    apply_height_correction: bool = True,
) -> HeatmapGrid:
    """Static best-AP rate field at device height.

    Cells below the probe rate are darkness unless a blocker is what
    pushed them under, in which case they are shadow. No time sharing:
    this is the per-point link capacity, not a loaded-system rate.
    """
    if resolution_cells_per_m <= 0:
        raise ConfigError("resolution: must be positive")
    cfg = cfg.resolve_height()
    cfg.validate()
    con = build_constellation(cfg, apply_height_correction)
    aps = _ApArrays(con)
    tau = linkbudget.absorption_for(cfg.link)
    res = resolution_cells_per_m
    nx = math.ceil(cfg.room.length_m * res)
    ny = math.ceil(cfg.room.width_m * res)
    xs = (np.arange(nx) + 0.5) / res
    ys = (np.arange(ny) + 0.5) / res
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    cells = np.stack([gx.ravel(), gy.ravel()], axis=1)

    feasible = _feasible_view(cells, aps)
    snr = _snr_matrix(cells, cfg.user_height_m, aps, cfg.link, tau)
    rate = cfg.link.bandwidth_hz * np.log2(1.0 + snr)
    best_clear = np.where(feasible, rate, 0.0).max(axis=1)

    if blockers:
        centers = np.array([c.center for c in blockers])
        radius = blockers[0].radius_m
        height = blockers[0].height_m
        blocked = np.empty((cells.shape[0], len(con)), dtype=bool)
        chunk = 2048
        for lo in range(0, cells.shape[0], chunk):
            hi = lo + chunk
            blocked[lo:hi] = geometry.blocked_matrix(
                aps.xyz, cells[lo:hi], cfg.user_height_m, centers, radius, height
            )
        best = np.where(feasible & ~blocked, rate, 0.0).max(axis=1)
    else:
        best = best_clear

    labels = np.full(cells.shape[0], LABEL_DARKNESS, dtype=np.int8)
    labels[best >= probe_rate_bps] = LABEL_ILLUMINATION
    labels[(best < probe_rate_bps) & (best_clear >= probe_rate_bps)] = LABEL_SHADOW
    return HeatmapGrid(
        resolution_cells_per_m=res,
        length_m=cfg.room.length_m,
        width_m=cfg.room.width_m,
        device_height_m=cfg.user_height_m,
        probe_rate_bps=probe_rate_bps,
        rates_bps=best.reshape(nx, ny),
        labels=labels.reshape(nx, ny),
    )


def apply_axis(cfg: SimConfig, axis: str, value) -> SimConfig:
    if axis == "H":
        return with_effective_height(cfg, float(value))
    if axis == "N":
        return with_power_budget(cfg, cfg.p_o_w, int(value))
    if axis == "placement_type":
        return with_placement(cfg, str(value))
    raise ConfigError(f"axis: unknown sweep axis {axis!r}")


def sweep(base: SimConfig, axis: str, values, jobs: int = 1) -> list[MetricsReport]:
    """Independent runs along one axis, identical seed, input order kept."""
    if not values:
        raise ConfigError("values: sweep needs at least one value")
    configs = [apply_axis(base, axis, v) for v in values]
    for c in configs:
        c.validate()
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, configs))
    return [run(c) for c in configs]
