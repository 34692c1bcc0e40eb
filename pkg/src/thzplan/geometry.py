"""Room model, access-point constellations, and line-of-sight tests.

Placement layouts follow the lighting analogy: a single central ceiling
fixture (type A), a uniform ceiling grid (B), wall-mounted perimeter units
(C), plus the lowered-perimeter (D, E) and clustered-ceiling (F) variants
that exist for layout export but are not part of the evaluation protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

DEFAULT_T_ALIGN_S = 5e-3

EVALUATED_TYPES = ("A", "B", "C")
ALL_TYPES = ("A", "B", "C", "D", "E", "F")
GRID_COUNTS = (4, 8, 12, 16)

# columns x rows of the ceiling partition per AP count
_GRID_SHAPE = {4: (2, 2), 8: (4, 2), 12: (4, 3), 16: (4, 4)}


@dataclass(frozen=True)
class Room:
    """Rectangular box: length along x, width along y, height along z."""

    length_m: float = 10.0
    width_m: float = 10.0
    height_m: float = 3.0

    def __post_init__(self):
        for name in ("length_m", "width_m", "height_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"room {name} must be positive")

    def contains_xy(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.length_m and 0.0 <= y <= self.width_m


@dataclass(frozen=True)
class ApNode:
    id: int
    x: float
    y: float
    z: float
    view_deg: float  # 360 for ceiling mounts, 180 for wall mounts
    facing_deg: float  # azimuth of the sector axis; ignored for 360
    align_time_s: float

    def __post_init__(self):
        if self.view_deg not in (180.0, 360.0):
            raise ValueError(f"view must be 180 or 360, got {self.view_deg}")
        if self.align_time_s <= 0:
            raise ValueError("align_time_s must be positive")

    def sees(self, x: float, y: float) -> bool:
        """True when (x, y) lies inside the node's azimuth sector."""
        if self.view_deg >= 360.0:
            return True
        dx, dy = x - self.x, y - self.y
        if dx == 0.0 and dy == 0.0:
            return True
        az = math.radians(self.facing_deg)
        # half-angle test; 180 degrees reduces to the inward half plane
        return dx * math.cos(az) + dy * math.sin(az) >= -1e-12 * math.hypot(dx, dy)


@dataclass(frozen=True)
class Constellation:
    placement_type: str
    nodes: tuple[ApNode, ...]
    height_correction_m: float = 0.0

    def positions(self) -> np.ndarray:
        return np.array([[n.x, n.y, n.z] for n in self.nodes], dtype=float)

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class BodyCylinder:
    """Vertical solid cylinder used as a human blocker, z in [0, height]."""

    center: tuple[float, float]
    radius_m: float
    height_m: float

    def __post_init__(self):
        if self.radius_m <= 0 or self.height_m <= 0:
            raise ValueError("cylinder radius and height must be positive")


def _node(i, x, y, z, view, facing, align):
    return ApNode(id=i, x=x, y=y, z=z, view_deg=view, facing_deg=facing,
                  align_time_s=align)


def place_type_a(room: Room, t_align_s: float = DEFAULT_T_ALIGN_S) -> Constellation:
    """Single ceiling AP at the room center."""
    node = _node(0, room.length_m / 2.0, room.width_m / 2.0, room.height_m,
                 360.0, 0.0, t_align_s)
    return Constellation("A", (node,))


def _grid_centers(room: Room, n: int):
    if n not in _GRID_SHAPE:
        raise ValueError(f"unsupported grid AP count {n}; choose from {GRID_COUNTS}")
    cols, rows = _GRID_SHAPE[n]
    xs = [(i + 0.5) * room.length_m / cols for i in range(cols)]
    ys = [(j + 0.5) * room.width_m / rows for j in range(rows)]
    return [(x, y) for y in ys for x in xs]


def place_type_b(room: Room, n: int, t_align_s: float = DEFAULT_T_ALIGN_S) -> Constellation:
    """Ceiling grid at the cell centers of a uniform room partition."""
    nodes = tuple(
        _node(i, x, y, room.height_m, 360.0, 0.0, t_align_s)
        for i, (x, y) in enumerate(_grid_centers(room, n))
    )
    return Constellation("B", nodes)


def _perimeter_points(room: Room, n: int):
    if n not in _GRID_SHAPE:
        raise ValueError(f"unsupported perimeter AP count {n}; choose from {GRID_COUNTS}")
    per_wall = n // 4
    fracs = [(k + 1) / (per_wall + 1) for k in range(per_wall)]
    pts = []
    # south, east, north, west; facing is the inward normal
    for f in fracs:
        pts.append((f * room.length_m, 0.0, 90.0))
    for f in fracs:
        pts.append((room.length_m, f * room.width_m, 180.0))
    for f in fracs:
        pts.append((f * room.length_m, room.width_m, 270.0))
    for f in fracs:
        pts.append((0.0, f * room.width_m, 0.0))
    return pts


def place_type_c(
    room: Room,
    n: int,
    height_correction_m: float = 0.0,
    t_align_s: float = DEFAULT_T_ALIGN_S,
) -> Constellation:
    """Wall-mounted perimeter APs, equally spaced, facing inward.

    Wall mounts see only the inward half plane and align in half the
    ceiling alignment time. The nodes sit at the ceiling minus the height
    correction.
    """
    if not 0.0 <= height_correction_m < room.height_m:
        raise ValueError(
            f"height correction {height_correction_m} outside [0, {room.height_m})"
        )
    z = room.height_m - height_correction_m
    nodes = tuple(
        _node(i, x, y, z, 180.0, facing, t_align_s / 2.0)
        for i, (x, y, facing) in enumerate(_perimeter_points(room, n))
    )
    return Constellation("C", nodes, height_correction_m)


def place_type_d(
    room: Room, n: int, z_m: float | None = None,
    t_align_s: float = DEFAULT_T_ALIGN_S,
) -> Constellation:
    """Perimeter layout hung to mid height (layout export only)."""
    z = room.height_m * 0.6 if z_m is None else z_m
    con = place_type_c(room, n, room.height_m - z, t_align_s)
    return replace(con, placement_type="D")


def place_type_e(
    room: Room, n: int, z_m: float = 1.2,
    t_align_s: float = DEFAULT_T_ALIGN_S,
) -> Constellation:
    """Perimeter layout at or below head height (layout export only)."""
    con = place_type_c(room, n, room.height_m - z_m, t_align_s)
    return replace(con, placement_type="E")


def place_type_f(
    room: Room, n: int, span_m: float | None = None,
    t_align_s: float = DEFAULT_T_ALIGN_S,
) -> Constellation:
    """Tight ceiling cluster around the room center (layout export only)."""
    span = min(room.length_m, room.width_m) / 10.0 if span_m is None else span_m
    cx, cy = room.length_m / 2.0, room.width_m / 2.0
    sub = Room(span, span, room.height_m)
    nodes = tuple(
        _node(i, cx - span / 2.0 + x, cy - span / 2.0 + y, room.height_m,
              360.0, 0.0, t_align_s)
        for i, (x, y) in enumerate(_grid_centers(sub, n))
    )
    return Constellation("F", nodes)


def place(
    room: Room, placement_type: str, n: int,
    height_correction_m: float = 0.0,
    t_align_s: float = DEFAULT_T_ALIGN_S,
) -> Constellation:
    """Dispatch on placement type letter."""
    t = placement_type.upper()
    if t == "A":
        if n != 1:
            raise ValueError("type A always uses a single AP")
        return place_type_a(room, t_align_s)
    if t == "B":
        return place_type_b(room, n, t_align_s)
    if t == "C":
        return place_type_c(room, n, height_correction_m, t_align_s)
    if t == "D":
        return place_type_d(room, n, t_align_s=t_align_s)
    if t == "E":
        return place_type_e(room, n, t_align_s=t_align_s)
    if t == "F":
        return place_type_f(room, n, t_align_s=t_align_s)
    raise ValueError(f"unknown placement type {placement_type!r}")


def height_correction(
    effective_height_m: float,
    d_grid_m: float,
    d_perimeter_m: float,
    tau_per_m: float,
) -> float:
    """How far to lower wall mounts so their illumination matches the
    ceiling grid's: H * (1 - e^(tau (d_B - d_C) / 2)).

    d_grid_m / d_perimeter_m are the reference link distances of the two
    layouts (perimeter never shorter). Result lies in [0, H).
    """
    if effective_height_m <= 0:
        raise ValueError("effective height must be positive")
    if d_grid_m <= 0:
        raise ValueError("reference distances must be positive")
    if d_perimeter_m < d_grid_m:
        raise ValueError(
            f"perimeter reference distance {d_perimeter_m} shorter than grid "
            f"distance {d_grid_m}; correction would be negative"
        )
    if tau_per_m < 0:
        raise ValueError("tau must be >= 0")
    return effective_height_m * -math.expm1(tau_per_m * (d_grid_m - d_perimeter_m) / 2.0)


def mean_nearest_distance(
    room: Room, nodes_xyz, probe_height_m: float, grid: int = 50
) -> float:
    """Mean 3-D distance from a uniform floor grid at probe height to the
    nearest of the given node positions."""
    nodes = np.asarray(nodes_xyz, dtype=float).reshape(-1, 3)
    xs = (np.arange(grid) + 0.5) * room.length_m / grid
    ys = (np.arange(grid) + 0.5) * room.width_m / grid
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    dx = gx[..., None] - nodes[:, 0]
    dy = gy[..., None] - nodes[:, 1]
    dz = probe_height_m - nodes[:, 2]
    d = np.sqrt(dx * dx + dy * dy + dz * dz)
    return float(d.min(axis=-1).mean())


def reference_distances(
    room: Room, n: int, probe_height_m: float = 1.5, grid: int = 50
) -> tuple[float, float]:
    """Reference link distances feeding the height correction: grid-average
    nearest-AP distance for the ceiling grid and for the full-height
    perimeter layout."""
    grid_nodes = place_type_b(room, n).positions()
    perim_nodes = place_type_c(room, n, 0.0).positions()
    d_grid = mean_nearest_distance(room, grid_nodes, probe_height_m, grid)
    d_perim = mean_nearest_distance(room, perim_nodes, probe_height_m, grid)
    return d_grid, d_perim


def _segment_cylinder_hit(a, b, cyl: BodyCylinder) -> bool:
    """Open segment (a, b) against one solid vertical cylinder."""
    ax, ay, az = a
    bx, by, bz = b
    dx, dy, dz = bx - ax, by - ay, bz - az
    cx, cy = cyl.center

    # parameter window where z(t) lies within the cylinder's span
    if dz == 0.0:
        if not 0.0 <= az <= cyl.height_m:
            return False
        z_lo, z_hi = 0.0, 1.0
    else:
        t0 = (0.0 - az) / dz
        t1 = (cyl.height_m - az) / dz
        z_lo, z_hi = min(t0, t1), max(t0, t1)

    # parameter window where the xy track lies within the disc
    fx, fy = ax - cx, ay - cy
    qa = dx * dx + dy * dy
    qb = 2.0 * (fx * dx + fy * dy)
    qc = fx * fx + fy * fy - cyl.radius_m * cyl.radius_m
    if qa == 0.0:
        if qc > 0.0:
            return False
        xy_lo, xy_hi = 0.0, 1.0
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0:
            return False
        root = math.sqrt(disc)
        xy_lo = (-qb - root) / (2.0 * qa)
        xy_hi = (-qb + root) / (2.0 * qa)

    lo = max(xy_lo, z_lo, 0.0)
    hi = min(xy_hi, z_hi, 1.0)
    if lo > hi:
        return False
    # endpoints themselves do not count (device and AP touch their own hulls)
    return hi > 0.0 and lo < 1.0


def los_blocked(a, b, blockers, exclude: int | None = None) -> bool:
    """True when the open segment a-b intersects any blocker cylinder.

    a and b are (x, y, z) points; blockers is a sequence of BodyCylinder;
    exclude skips the blocker at that index (the receiving user's own
    body).
    """
    if tuple(a) == tuple(b):
        raise ValueError("segment endpoints coincide")
    for i, cyl in enumerate(blockers):
        if i == exclude:
            continue
        if _segment_cylinder_hit(a, b, cyl):
            return True
    return False


def blocked_matrix(
    ap_xyz: np.ndarray,
    device_xy: np.ndarray,
    device_z: float,
    centers_xy: np.ndarray,
    radius_m: float,
    height_m: float,
) -> np.ndarray:
    """Vectorized blockage test for every (user, AP) pair.

    Blockers are vertical cylinders at centers_xy; blocker u never blocks
    user u's own links. Returns a (U, A) boolean array. Matches
    los_blocked pairwise (covered by tests).
    """
    ap = np.asarray(ap_xyz, dtype=float)
    dev = np.asarray(device_xy, dtype=float)
    cen = np.asarray(centers_xy, dtype=float)
    n_usr, n_ap, n_blk = dev.shape[0], ap.shape[0], cen.shape[0]

    # segment from AP (a) to device (b), per (user, ap) pair
    a_xy = np.broadcast_to(ap[None, :, :2], (n_usr, n_ap, 2))
    d_xy = dev[:, None, :] - ap[None, :, :2]
    az = np.broadcast_to(ap[None, :, 2], (n_usr, n_ap))
    dz = device_z - az

    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = (0.0 - az) / dz
        t1 = (height_m - az) / dz
    z_lo = np.minimum(t0, t1)
    z_hi = np.maximum(t0, t1)
    level = (dz == 0.0)
    inside_level = level & (az >= 0.0) & (az <= height_m)
    z_lo = np.where(level, np.where(inside_level, 0.0, np.inf), z_lo)
    z_hi = np.where(level, np.where(inside_level, 1.0, -np.inf), z_hi)

    f_xy = a_xy[:, :, None, :] - cen[None, None, :, :]
    qa = np.sum(d_xy * d_xy, axis=-1)[:, :, None]
    qb = 2.0 * np.sum(f_xy * d_xy[:, :, None, :], axis=-1)
    qc = np.sum(f_xy * f_xy, axis=-1) - radius_m * radius_m
    disc = qb * qb - 4.0 * qa * qc
    hit_possible = disc >= 0.0
    root = np.sqrt(np.where(hit_possible, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        xy_lo = (-qb - root) / (2.0 * qa)
        xy_hi = (-qb + root) / (2.0 * qa)
    degenerate = (qa == 0.0)
    inside_disc = degenerate & (qc <= 0.0)
    xy_lo = np.where(degenerate, np.where(inside_disc, 0.0, np.inf), xy_lo)
    xy_hi = np.where(degenerate, np.where(inside_disc, 1.0, -np.inf), xy_hi)
    hit_possible |= inside_disc

    lo = np.maximum(np.maximum(xy_lo, z_lo[:, :, None]), 0.0)
    hi = np.minimum(np.minimum(xy_hi, z_hi[:, :, None]), 1.0)
    hits = hit_possible & (lo <= hi) & (hi > 0.0) & (lo < 1.0)
    if n_blk == n_usr:
        idx = np.arange(n_usr)
        hits[idx, :, idx] = False
    return hits.any(axis=-1)


def write_constellation(con: Constellation, path) -> None:
    """Structured-text export, one record per AP."""
    lines = ["id,x_m,y_m,z_m,view_deg,align_time_s,facing_deg"]
    for n in con.nodes:
        lines.append(
            f"{n.id},{n.x!r},{n.y!r},{n.z!r},{n.view_deg!r},"
            f"{n.align_time_s!r},{n.facing_deg!r}"
        )
    header = f"# placement_type={con.placement_type} height_correction_m={con.height_correction_m!r}"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n" + "\n".join(lines) + "\n")


def read_constellation(path) -> Constellation:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    meta = dict(item.split("=", 1) for item in raw[0].lstrip("# ").split())
    nodes = []
    for line in raw[2:]:
        f = line.split(",")
        nodes.append(ApNode(
            id=int(f[0]), x=float(f[1]), y=float(f[2]), z=float(f[3]),
            view_deg=float(f[4]), align_time_s=float(f[5]),
            facing_deg=float(f[6]),
        ))
    return Constellation(
        meta["placement_type"], tuple(nodes),
        float(meta["height_correction_m"]),
    )
