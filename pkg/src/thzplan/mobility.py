"""Seeded random-waypoint mobility.

Every user owns an independent substream derived from the run seed, so a
trajectory depends only on (seed, user id, room, mobility parameters, dt
sequence). That derivation rule is part of the determinism contract:
substream i is numpy's PCG64 seeded with SeedSequence([seed, i]).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import BodyCylinder, Room

DEFAULT_SPEED_MEAN = 1.0
DEFAULT_SPEED_SPAN = 0.5
DEFAULT_DEVICE_HEIGHT_M = 1.5
DEFAULT_BODY_HEIGHT_M = 1.8
DEFAULT_BODY_WIDTH_M = 0.2
DEFAULT_RATE_MIN_BPS = 1e9
DEFAULT_RATE_MAX_BPS = 10e9


def substream(seed: int, user_id: int) -> np.random.Generator:
    """Per-user RNG stream; the (seed, id) pair fully determines it."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, user_id])))


@dataclass(frozen=True)
class UserState:
    """A mobile receiver that doubles as a blocker for everyone else."""

    id: int
    x: float
    y: float
    speed_mps: float
    wp_x: float
    wp_y: float
    demand_bps: float
    body_radius_m: float = DEFAULT_BODY_WIDTH_M / 2.0
    body_height_m: float = DEFAULT_BODY_HEIGHT_M
    pause_left_s: float = 0.0

    @property
    def body(self) -> BodyCylinder:
        return BodyCylinder((self.x, self.y), self.body_radius_m, self.body_height_m)


def _draw_waypoint(rng, room: Room):
    return rng.uniform(0.0, room.length_m), rng.uniform(0.0, room.width_m)


def _draw_speed(rng, v_mean, v_span):
    return rng.uniform(v_mean - v_span, v_mean + v_span)


def init_users(
    room: Room,
    m: int,
    seed: int,
    v_mean: float = DEFAULT_SPEED_MEAN,
    v_span: float = DEFAULT_SPEED_SPAN,
    rate_min_bps: float = DEFAULT_RATE_MIN_BPS,
    rate_max_bps: float = DEFAULT_RATE_MAX_BPS,
    body_radius_m: float = DEFAULT_BODY_WIDTH_M / 2.0,
    body_height_m: float = DEFAULT_BODY_HEIGHT_M,
) -> list[UserState]:
    """Users with uniform positions and waypoints over the floor.

    Draw order per user (from that user's substream): position x, y,
    waypoint x, y, speed, demanded rate.
    """
    if m <= 0:
        raise ValueError("user count must be positive")
    if v_mean - v_span <= 0:
        raise ValueError("speed range must stay positive")
    users = []
    for i in range(m):
        rng = substream(seed, i)
        x, y = _draw_waypoint(rng, room)
        wx, wy = _draw_waypoint(rng, room)
        speed = _draw_speed(rng, v_mean, v_span)
        demand = rng.uniform(rate_min_bps, rate_max_bps)
        users.append(UserState(
            id=i, x=x, y=y, speed_mps=speed, wp_x=wx, wp_y=wy,
            demand_bps=demand, body_radius_m=body_radius_m,
            body_height_m=body_height_m,
        ))
    return users


def step_user(
    u: UserState,
    dt_s: float,
    rng: np.random.Generator,
    room: Room,
    v_mean: float = DEFAULT_SPEED_MEAN,
    v_span: float = DEFAULT_SPEED_SPAN,
    pause_s: float = 0.0,
) -> UserState:
    """Advance one time step toward the waypoint.

    Arriving within one step's travel pins the position to the waypoint
    and draws a fresh waypoint and speed (after an optional pause). The
    position never leaves the room: both endpoints of every leg are
    interior and motion is linear between them.
    """
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    if u.pause_left_s > 0.0:
        left = u.pause_left_s - dt_s
        if left > 0.0:
            return replace(u, pause_left_s=left)
        wx, wy = _draw_waypoint(rng, room)
        speed = _draw_speed(rng, v_mean, v_span)
        return replace(u, wp_x=wx, wp_y=wy, speed_mps=speed, pause_left_s=0.0)

    dx, dy = u.wp_x - u.x, u.wp_y - u.y
    dist = (dx * dx + dy * dy) ** 0.5
    travel = u.speed_mps * dt_s
    if dist <= travel:
        if pause_s > 0.0:
            return replace(u, x=u.wp_x, y=u.wp_y, pause_left_s=pause_s)
        wx, wy = _draw_waypoint(rng, room)
        speed = _draw_speed(rng, v_mean, v_span)
        return replace(u, x=u.wp_x, y=u.wp_y, wp_x=wx, wp_y=wy, speed_mps=speed)
    f = travel / dist
    return replace(u, x=u.x + dx * f, y=u.y + dy * f)
