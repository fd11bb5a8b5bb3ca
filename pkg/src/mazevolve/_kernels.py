"""Jitted numerical primitives shared by network activation and the simulator.

Everything here is scalar float64 numba code; the batched simulation calls the
same functions as the public single-robot operations, so both paths produce
bit-identical results.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi
HALF_PI = 0.5 * np.pi
QUARTER_PI = 0.25 * np.pi


@njit(cache=True)
def sigmoid(x: float, slope: float) -> float:
    return 1.0 / (1.0 + np.exp(-slope * x))


@njit(cache=True)
def activation_passes(src, dst, w, n_nodes, n_fixed, slope, vals, acc):
    """Relax a network by synchronous passes, one per node.

    ``vals`` holds node activations (bias and inputs at indices < n_fixed are
    never overwritten); cyclic connections evolve for exactly the bounded pass
    count, which is the defined semantics.
    """
    for _ in range(n_nodes):
        for j in range(n_nodes):
            acc[j] = 0.0
        for e in range(src.shape[0]):
            acc[dst[e]] += w[e] * vals[src[e]]
        for j in range(n_fixed, n_nodes):
            vals[j] = sigmoid(acc[j], slope)


@njit(cache=True)
def ray_distance(px, py, angle, walls, max_range):
    """Distance from (px, py) along ``angle`` to the nearest wall, capped."""
    dx = np.cos(angle)
    dy = np.sin(angle)
    best = max_range
    for i in range(walls.shape[0]):
        ex = walls[i, 2] - walls[i, 0]
        ey = walls[i, 3] - walls[i, 1]
        den = dx * ey - dy * ex
        if den == 0.0:
            continue
        qx = walls[i, 0] - px
        qy = walls[i, 1] - py
        t = (qx * ey - qy * ex) / den
        u = (qx * dy - qy * dx) / den
        if t >= 0.0 and 0.0 <= u <= 1.0 and t < best:
            best = t
    return best


@njit(cache=True)
def radar_sector(px, py, heading, gx, gy) -> int:
    """Index in 0..3 of the quarter-circle sector containing the goal.

    Sectors are half-open 90-degree arcs centered on the heading: exactly one
    fires for any goal direction.
    """
    rel = np.arctan2(gy - py, gx - px) - heading
    a = (rel + QUARTER_PI) % TWO_PI
    if a < 0.0:
        a += TWO_PI
    idx = int(a // HALF_PI)
    if idx > 3:
        idx = 3
    return idx


@njit(cache=True)
def resolve_collisions(x, y, radius, walls):
    """Push a circle out of any penetrated wall (slide, no bounce)."""
    for _ in range(8):
        pushed = False
        for i in range(walls.shape[0]):
            x1 = walls[i, 0]
            y1 = walls[i, 1]
            ex = walls[i, 2] - x1
            ey = walls[i, 3] - y1
            ln2 = ex * ex + ey * ey
            t = ((x - x1) * ex + (y - y1) * ey) / ln2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            cx = x1 + t * ex
            cy = y1 + t * ey
            ddx = x - cx
            ddy = y - cy
            d = np.sqrt(ddx * ddx + ddy * ddy)
            if d < radius:
                if d > 1e-12:
                    x += ddx / d * (radius - d)
                    y += ddy / d * (radius - d)
                else:
                    # center exactly on the wall: push along the wall normal
                    ln = np.sqrt(ln2)
                    x += -ey / ln * radius
                    y += ex / ln * radius
                pushed = True
        if not pushed:
            break
    return x, y


@njit(cache=True)
def step_state(x, y, heading, lv, av, turn, speed, walls,
               radius, max_lin, max_ang, lin_scale, ang_scale):
    """One control step: actuate, clamp, turn, advance, resolve collisions."""
    av += ang_scale * (turn - 0.5)
    if av > max_ang:
        av = max_ang
    elif av < -max_ang:
        av = -max_ang
    lv += lin_scale * (speed - 0.5)
    if lv > max_lin:
        lv = max_lin
    elif lv < -max_lin:
        lv = -max_lin
    heading += av
    x += lv * np.cos(heading)
    y += lv * np.sin(heading)
    x, y = resolve_collisions(x, y, radius, walls)
    return x, y, heading, lv, av


@njit(cache=True)
def wall_clearance(x, y, walls):
    """Smallest distance from (x, y) to any wall segment."""
    best = np.inf
    for i in range(walls.shape[0]):
        x1 = walls[i, 0]
        y1 = walls[i, 1]
        ex = walls[i, 2] - x1
        ey = walls[i, 3] - y1
        ln2 = ex * ex + ey * ey
        t = ((x - x1) * ex + (y - y1) * ey) / ln2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        cx = x1 + t * ex
        cy = y1 + t * ey
        d = np.hypot(x - cx, y - cy)
        if d < best:
            best = d
    return best


@njit(cache=True)
def simulate_batch(
    walls,
    start_x,
    start_y,
    goal_x,
    goal_y,
    rf_angles,
    node_counts,
    offsets,
    e_src,
    e_dst,
    e_w,
    n_fixed,
    max_nodes,
    budget,
    radius,
    rf_range,
    max_lin,
    max_ang,
    lin_scale,
    ang_scale,
    success_radius,
    slope,
    record_trails,
    trails,
    check_invariants,
    out_xy,
    out_solved,
    out_steps,
    out_dist,
    out_diag,
):
    """Run every genome's robot through the maze.

    Edge arrays are the concatenated per-genome connection lists (local node
    indices); genome ``i`` owns edges ``offsets[i]:offsets[i+1]`` and
    ``node_counts[i]`` relaxation passes per control step.

    ``out_diag`` rows are (max wall penetration, sensor range violations,
    radar one-hot violations); only filled when ``check_invariants``.
    """
    n = node_counts.shape[0]
    n_rf = rf_angles.shape[0]
    for i in range(n):
        x = start_x
        y = start_y
        heading = 0.0
        lv = 0.0
        av = 0.0
        vals = np.zeros(max_nodes)
        acc = np.zeros(max_nodes)
        vals[0] = 1.0
        nn = node_counts[i]
        e0 = offsets[i]
        e1 = offsets[i + 1]
        if record_trails:
            trails[i, 0, 0] = x
            trails[i, 0, 1] = y
        max_pen = 0.0
        sensor_bad = 0.0
        radar_bad = 0.0
        steps = 0
        d = np.hypot(x - goal_x, y - goal_y)
        solved = d <= success_radius
        while not solved and steps < budget:
            # sensor sweep
            for r in range(n_rf):
                reading = ray_distance(x, y, heading + rf_angles[r], walls, rf_range) / rf_range
                vals[1 + r] = reading
                if check_invariants and (reading < 0.0 or reading > 1.0):
                    sensor_bad += 1.0
            sector = radar_sector(x, y, heading, goal_x, goal_y)
            for r in range(4):
                vals[1 + n_rf + r] = 1.0 if r == sector else 0.0
            if check_invariants:
                total = vals[1 + n_rf] + vals[2 + n_rf] + vals[3 + n_rf] + vals[4 + n_rf]
                if total != 1.0:
                    radar_bad += 1.0
            # fresh controller state every step; recurrence acts within passes
            for j in range(n_fixed, nn):
                vals[j] = 0.0
            activation_passes(e_src[e0:e1], e_dst[e0:e1], e_w[e0:e1], nn, n_fixed, slope, vals, acc)
            x, y, heading, lv, av = step_state(
                x, y, heading, lv, av, vals[n_fixed], vals[n_fixed + 1], walls,
                radius, max_lin, max_ang, lin_scale, ang_scale,
            )
            if check_invariants:
                pen = radius - wall_clearance(x, y, walls)
                if pen > max_pen:
                    max_pen = pen
            steps += 1
            if record_trails:
                trails[i, steps, 0] = x
                trails[i, steps, 1] = y
            d = np.hypot(x - goal_x, y - goal_y)
            solved = d <= success_radius
        out_xy[i, 0] = x
        out_xy[i, 1] = y
        out_solved[i] = solved
        out_steps[i] = steps
        out_dist[i] = d
        if check_invariants:
            out_diag[i, 0] = max_pen
            out_diag[i, 1] = sensor_bad
            out_diag[i, 2] = radar_bad
