"""Pure-Python fallback for the hot numeric kernels.

This module is the reference implementation: d2dsim._kernels (Cython) mirrors
it operation for operation with libc.math, so both backends produce
bit-identical doubles on the same libm. Keep the arithmetic order unchanged;
do not "simplify" expressions (e.g. no hypot, no x**2 for squares).
"""

import math

BACKEND = "python"


def path_loss_db(dist_m, d0_m, fc_mhz):
    # short-range model up to and including d0, long-range beyond
    if dist_m <= d0_m:
        return 40.0 * math.log10(dist_m / 1000.0) + 30.0 * math.log10(fc_mhz) + 49.0
    return 148.1 + 37.6 * math.log10(dist_m / 1000.0)


def gain(dist_m, d0_m, fc_mhz):
    pl = path_loss_db(dist_m, d0_m, fc_mhz)
    return 10.0 ** (-pl / 10.0)


def sector_points(u_r, u_t, radius_m, start_rad, arc_rad, apex_x, apex_y, out_x, out_y):
    """Map unit uniforms to points uniform over a sector's area."""
    n = u_r.shape[0]
    for i in range(n):
        r = radius_m * math.sqrt(u_r[i])
        theta = start_rad + arc_rad * u_t[i]
        out_x[i] = apex_x + r * math.cos(theta)
        out_y[i] = apex_y + r * math.sin(theta)


def greedy_pairs(xs, ys, d0_m, out_a, out_b):
    """Greedy double-index pairing scan; returns the number of pairs formed.

    For each unpaired x in index order, the first unpaired y > x with
    0 < dist(x, y) <= d0 forms a pair and both leave the pool.
    """
    n = xs.shape[0]
    taken = bytearray(n)
    count = 0
    for a in range(n):
        if taken[a]:
            continue
        for b in range(a + 1, n):
            if taken[b]:
                continue
            dx = xs[a] - xs[b]
            dy = ys[a] - ys[b]
            d = math.sqrt(dx * dx + dy * dy)
            if d <= d0_m and d != 0.0:
                out_a[count] = a
                out_b[count] = b
                taken[a] = 1
                taken[b] = 1
                count += 1
                break
    return count


def gain_matrix(src_x, src_y, dst_x, dst_y, d0_m, fc_mhz, out):
    """out[j, i] = link gain from source i to destination j."""
    n_dst = dst_x.shape[0]
    n_src = src_x.shape[0]
    for j in range(n_dst):
        for i in range(n_src):
            dx = src_x[i] - dst_x[j]
            dy = src_y[i] - dst_y[j]
            d = math.sqrt(dx * dx + dy * dy)
            out[j, i] = gain(d, d0_m, fc_mhz)


def sector_wedges(px, py, apex_x, apex_y, start_rad, out):
    """Tri-sector wedge index (0..2) of each point, anchored at start_rad."""
    two_pi = 6.283185307179586
    wedge = two_pi / 3.0
    n = px.shape[0]
    for i in range(n):
        theta = math.atan2(py[i] - apex_y, px[i] - apex_x)
        t = math.fmod(theta - start_rad, two_pi)
        if t < 0.0:
            t += two_pi
        w = int(t / wedge)
        if w > 2:
            w = 2
        out[i] = w


def cotier_sum(victim, rx_x, rx_y, mid_x, mid_y, tx_x, tx_y, k_rb, wedge,
               dmax_m, p_d2d_w, d0_m, fc_mhz, sectored):
    """Co-tier interference (watts) at the victim pair's receiver.

    Other pairs contribute only when transmitting (k_rb > 0), within dmax of
    the victim midpoint-to-midpoint, and (if sectored) in the victim's wedge.
    """
    n = mid_x.shape[0]
    vx = rx_x[victim]
    vy = rx_y[victim]
    vmx = mid_x[victim]
    vmy = mid_y[victim]
    vw = wedge[victim]
    acc = 0.0
    for j in range(n):
        if j == victim or k_rb[j] <= 0:
            continue
        dx = mid_x[j] - vmx
        dy = mid_y[j] - vmy
        d_mid = math.sqrt(dx * dx + dy * dy)
        if d_mid > dmax_m:
            continue
        if sectored and wedge[j] != vw:
            continue
        dx = tx_x[j] - vx
        dy = tx_y[j] - vy
        d = math.sqrt(dx * dx + dy * dy)
        acc += (p_d2d_w / k_rb[j]) * gain(d, d0_m, fc_mhz)
    return acc
