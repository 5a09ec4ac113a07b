"""Pure-Python motion kernel: one integration step with wall sliding.

This is the fallback twin of the compiled kernel in ``_kinematics.pyx``.
The two must stay identical expression for expression so they produce
bit-identical trajectories; any change here must be mirrored there.

The step integrates differential-drive kinematics, then resolves wall
penetration by repeatedly pushing the robot disc out along the deepest
contact normal (cancelling the normal displacement component, so sliding
along walls is allowed).  The grid boundary behaves as wall.  Returned
masks use bit 1 = left, bit 2 = center, bit 4 = right:

* ``contact_mask`` -- sides currently touching a wall, classified by the
  angle of the toward-contact direction relative to heading
  (|phi| <= 30 deg center, 30..90 deg left, -90..-30 deg right; contacts
  behind the robot are not reported).
* ``hole_mask`` -- sides whose cliff sensor point (0.8 * radius ahead at
  heading +30/0/-30 deg) sits over a hole tile.
"""

from __future__ import annotations

from math import atan2, cos, floor, fmod, pi, sin, sqrt

WALL = 1
HOLE = 2

_TWO_PI = 2.0 * pi
_CONTACT_EPS = 1e-6
_MAX_PUSH = 8
_PHI_CENTER = pi / 6.0
_PHI_SIDE = pi / 2.0
_CLIFF_REACH = 0.8


def _norm_angle(a: float) -> float:
    r = fmod(a, _TWO_PI)
    if r > pi:
        r -= _TWO_PI
    elif r <= -pi:
        r += _TWO_PI
    return r


def _classify(phi: float) -> int:
    if -_PHI_CENTER <= phi <= _PHI_CENTER:
        return 2
    if _PHI_CENTER < phi <= _PHI_SIDE:
        return 1
    if -_PHI_SIDE <= phi < -_PHI_CENTER:
        return 4
    return 0


def advance(
    x: float,
    y: float,
    theta: float,
    v: float,
    w: float,
    dt: float,
    radius: float,
    cells: bytes,
    cols: int,
    rows: int,
    tile: float,
):
    """One motion step; returns ``(x, y, theta, contact_mask, hole_mask)``."""
    nx = x + v * cos(theta) * dt
    ny = y + v * sin(theta) * dt
    nt = _norm_angle(theta + w * dt)

    width = cols * tile
    height = rows * tile
    r2 = radius * radius

    for _ in range(_MAX_PUSH):
        if nx < radius:
            nx = radius
        elif nx > width - radius:
            nx = width - radius
        if ny < radius:
            ny = radius
        elif ny > height - radius:
            ny = height - radius

        ix0 = int(floor((nx - radius) / tile))
        ix1 = int(floor((nx + radius) / tile))
        iy0 = int(floor((ny - radius) / tile))
        iy1 = int(floor((ny + radius) / tile))
        if ix0 < 0:
            ix0 = 0
        if iy0 < 0:
            iy0 = 0
        if ix1 > cols - 1:
            ix1 = cols - 1
        if iy1 > rows - 1:
            iy1 = rows - 1

        best_depth = 0.0
        best_qx = 0.0
        best_qy = 0.0
        best_d = 0.0
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                if cells[iy * cols + ix] != WALL:
                    continue
                cx0 = ix * tile
                cy0 = iy * tile
                cx1 = cx0 + tile
                cy1 = cy0 + tile
                qx = cx0 if nx < cx0 else (cx1 if nx > cx1 else nx)
                qy = cy0 if ny < cy0 else (cy1 if ny > cy1 else ny)
                dx = nx - qx
                dy = ny - qy
                d2 = dx * dx + dy * dy
                if d2 < r2:
                    d = sqrt(d2)
                    depth = radius - d
                    if depth > best_depth:
                        best_depth = depth
                        best_qx = qx
                        best_qy = qy
                        best_d = d
        if best_depth <= 0.0:
            break
        if best_d > 0.0:
            nx = best_qx + (nx - best_qx) / best_d * radius
            ny = best_qy + (ny - best_qy) / best_d * radius
        else:
            # Center exactly on a wall face: per-step motion is far below
            # the radius, so this is unreachable; push +x deterministically.
            nx = nx + radius

    contact_mask = 0
    touch = radius + _CONTACT_EPS
    half_pi = 0.5 * pi
    if nx <= touch:
        contact_mask |= _classify(_norm_angle(pi - nt))
    if nx >= width - touch:
        contact_mask |= _classify(_norm_angle(0.0 - nt))
    if ny <= touch:
        contact_mask |= _classify(_norm_angle(-half_pi - nt))
    if ny >= height - touch:
        contact_mask |= _classify(_norm_angle(half_pi - nt))

    ix0 = int(floor((nx - touch) / tile))
    ix1 = int(floor((nx + touch) / tile))
    iy0 = int(floor((ny - touch) / tile))
    iy1 = int(floor((ny + touch) / tile))
    if ix0 < 0:
        ix0 = 0
    if iy0 < 0:
        iy0 = 0
    if ix1 > cols - 1:
        ix1 = cols - 1
    if iy1 > rows - 1:
        iy1 = rows - 1
    touch2 = touch * touch
    for iy in range(iy0, iy1 + 1):
        for ix in range(ix0, ix1 + 1):
            if cells[iy * cols + ix] != WALL:
                continue
            cx0 = ix * tile
            cy0 = iy * tile
            cx1 = cx0 + tile
            cy1 = cy0 + tile
            qx = cx0 if nx < cx0 else (cx1 if nx > cx1 else nx)
            qy = cy0 if ny < cy0 else (cy1 if ny > cy1 else ny)
            dx = qx - nx
            dy = qy - ny
            d2 = dx * dx + dy * dy
            if d2 <= touch2 and d2 > 0.0:
                contact_mask |= _classify(_norm_angle(atan2(dy, dx) - nt))

    hole_mask = 0
    reach = _CLIFF_REACH * radius
    px = nx + reach * cos(nt + _PHI_CENTER)
    py = ny + reach * sin(nt + _PHI_CENTER)
    ix = int(floor(px / tile))
    iy = int(floor(py / tile))
    if 0 <= ix < cols and 0 <= iy < rows and cells[iy * cols + ix] == HOLE:
        hole_mask |= 1
    px = nx + reach * cos(nt)
    py = ny + reach * sin(nt)
    ix = int(floor(px / tile))
    iy = int(floor(py / tile))
    if 0 <= ix < cols and 0 <= iy < rows and cells[iy * cols + ix] == HOLE:
        hole_mask |= 2
    px = nx + reach * cos(nt - _PHI_CENTER)
    py = ny + reach * sin(nt - _PHI_CENTER)
    ix = int(floor(px / tile))
    iy = int(floor(py / tile))
    if 0 <= ix < cols and 0 <= iy < rows and cells[iy * cols + ix] == HOLE:
        hole_mask |= 4

    return nx, ny, nt, contact_mask, hole_mask
