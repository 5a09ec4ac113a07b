# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled motion kernel; twin of ``_kinematics_py``.

Keep this file identical to the pure-Python kernel expression for
expression: both backends must produce bit-identical trajectories.  The
build disables FMA contraction for the same reason (see setup.py).
"""

from libc.math cimport atan2, cos, floor, fmod, sin, sqrt

cdef double PI = 3.141592653589793
cdef double TWO_PI = 2.0 * PI
cdef double CONTACT_EPS = 1e-6
cdef int MAX_PUSH = 8
cdef double PHI_CENTER = PI / 6.0
cdef double PHI_SIDE = PI / 2.0
cdef double CLIFF_REACH = 0.8

cdef int WALL = 1
cdef int HOLE = 2


cdef inline double _norm_angle(double a) noexcept:
    cdef double r = fmod(a, TWO_PI)
    if r > PI:
        r -= TWO_PI
    elif r <= -PI:
        r += TWO_PI
    return r


cdef inline int _classify(double phi) noexcept:
    if -PHI_CENTER <= phi <= PHI_CENTER:
        return 2
    if PHI_CENTER < phi <= PHI_SIDE:
        return 1
    if -PHI_SIDE <= phi < -PHI_CENTER:
        return 4
    return 0


def advance(
    double x,
    double y,
    double theta,
    double v,
    double w,
    double dt,
    double radius,
    const unsigned char[::1] cells,
    int cols,
    int rows,
    double tile,
):
    """One motion step; returns ``(x, y, theta, contact_mask, hole_mask)``."""
    cdef double nx = x + v * cos(theta) * dt
    cdef double ny = y + v * sin(theta) * dt
    cdef double nt = _norm_angle(theta + w * dt)

    cdef double width = cols * tile
    cdef double height = rows * tile
    cdef double r2 = radius * radius

    cdef int push, ix0, ix1, iy0, iy1, ix, iy
    cdef double best_depth, best_qx, best_qy, best_d
    cdef double cx0, cy0, cx1, cy1, qx, qy, dx, dy, d2, d, depth

    for push in range(MAX_PUSH):
        if nx < radius:
            nx = radius
        elif nx > width - radius:
            nx = width - radius
        if ny < radius:
            ny = radius
        elif ny > height - radius:
            ny = height - radius

        ix0 = <int>floor((nx - radius) / tile)
        ix1 = <int>floor((nx + radius) / tile)
        iy0 = <int>floor((ny - radius) / tile)
        iy1 = <int>floor((ny + radius) / tile)
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
            # Center exactly on a wall face: unreachable at sane speeds;
            # push +x deterministically.
            nx = nx + radius

    cdef int contact_mask = 0
    cdef double touch = radius + CONTACT_EPS
    cdef double half_pi = 0.5 * PI
    if nx <= touch:
        contact_mask |= _classify(_norm_angle(PI - nt))
    if nx >= width - touch:
        contact_mask |= _classify(_norm_angle(0.0 - nt))
    if ny <= touch:
        contact_mask |= _classify(_norm_angle(-half_pi - nt))
    if ny >= height - touch:
        contact_mask |= _classify(_norm_angle(half_pi - nt))

    ix0 = <int>floor((nx - touch) / tile)
    ix1 = <int>floor((nx + touch) / tile)
    iy0 = <int>floor((ny - touch) / tile)
    iy1 = <int>floor((ny + touch) / tile)
    if ix0 < 0:
        ix0 = 0
    if iy0 < 0:
        iy0 = 0
    if ix1 > cols - 1:
        ix1 = cols - 1
    if iy1 > rows - 1:
        iy1 = rows - 1
    cdef double touch2 = touch * touch
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

    cdef int hole_mask = 0
    cdef double reach = CLIFF_REACH * radius
    cdef double px, py
    px = nx + reach * cos(nt + PHI_CENTER)
    py = ny + reach * sin(nt + PHI_CENTER)
    ix = <int>floor(px / tile)
    iy = <int>floor(py / tile)
    if 0 <= ix < cols and 0 <= iy < rows and cells[iy * cols + ix] == HOLE:
        hole_mask |= 1
    px = nx + reach * cos(nt)
    py = ny + reach * sin(nt)
    ix = <int>floor(px / tile)
    iy = <int>floor(py / tile)
    if 0 <= ix < cols and 0 <= iy < rows and cells[iy * cols + ix] == HOLE:
        hole_mask |= 2
    px = nx + reach * cos(nt - PHI_CENTER)
    py = ny + reach * sin(nt - PHI_CENTER)
    ix = <int>floor(px / tile)
    iy = <int>floor(py / tile)
    if 0 <= ix < cols and 0 <= iy < rows and cells[iy * cols + ix] == HOLE:
        hole_mask |= 4

    return nx, ny, nt, contact_mask, hole_mask
