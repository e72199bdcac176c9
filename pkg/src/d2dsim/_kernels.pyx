# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Mirrors d2dsim._kernels_py operation for operation (same libm calls, same
evaluation order) so results are bit-identical to the fallback. Built with
-ffp-contract=off; keep expressions in the exact same shape as the fallback.
"""

from libc.math cimport atan2, cos, fmod, log10, pow, sin, sqrt
from libc.stdint cimport int64_t

BACKEND = "cython"


cdef inline double _pl_db(double dist_m, double d0_m, double fc_mhz) nogil:
    if dist_m <= d0_m:
        return 40.0 * log10(dist_m / 1000.0) + 30.0 * log10(fc_mhz) + 49.0
    return 148.1 + 37.6 * log10(dist_m / 1000.0)


cdef inline double _gain(double dist_m, double d0_m, double fc_mhz) nogil:
    cdef double pl = _pl_db(dist_m, d0_m, fc_mhz)
    return pow(10.0, -pl / 10.0)


def path_loss_db(double dist_m, double d0_m, double fc_mhz):
    return _pl_db(dist_m, d0_m, fc_mhz)


def gain(double dist_m, double d0_m, double fc_mhz):
    return _gain(dist_m, d0_m, fc_mhz)


def sector_points(double[:] u_r, double[:] u_t, double radius_m,
                  double start_rad, double arc_rad, double apex_x,
                  double apex_y, double[:] out_x, double[:] out_y):
    """Map unit uniforms to points uniform over a sector's area."""
    cdef Py_ssize_t i, n = u_r.shape[0]
    cdef double r, theta
    with nogil:
        for i in range(n):
            r = radius_m * sqrt(u_r[i])
            theta = start_rad + arc_rad * u_t[i]
            out_x[i] = apex_x + r * cos(theta)
            out_y[i] = apex_y + r * sin(theta)


def greedy_pairs(double[:] xs, double[:] ys, double d0_m,
                 int64_t[:] out_a, int64_t[:] out_b):
    """Greedy double-index pairing scan; returns the number of pairs formed."""
    cdef Py_ssize_t a, b, n = xs.shape[0]
    cdef int64_t count = 0
    cdef double dx, dy, d
    taken_buf = bytearray(n)
    cdef unsigned char[:] taken = taken_buf
    with nogil:
        for a in range(n):
            if taken[a]:
                continue
            for b in range(a + 1, n):
                if taken[b]:
                    continue
                dx = xs[a] - xs[b]
                dy = ys[a] - ys[b]
                d = sqrt(dx * dx + dy * dy)
                if d <= d0_m and d != 0.0:
                    out_a[count] = a
                    out_b[count] = b
                    taken[a] = 1
                    taken[b] = 1
                    count += 1
                    break
    return count


def gain_matrix(double[:] src_x, double[:] src_y, double[:] dst_x,
                double[:] dst_y, double d0_m, double fc_mhz,
                double[:, :] out):
    """out[j, i] = link gain from source i to destination j."""
    cdef Py_ssize_t i, j, n_dst = dst_x.shape[0], n_src = src_x.shape[0]
    cdef double dx, dy, d
    with nogil:
        for j in range(n_dst):
            for i in range(n_src):
                dx = src_x[i] - dst_x[j]
                dy = src_y[i] - dst_y[j]
                d = sqrt(dx * dx + dy * dy)
                out[j, i] = _gain(d, d0_m, fc_mhz)


def sector_wedges(double[:] px, double[:] py, double apex_x, double apex_y,
                  double start_rad, int64_t[:] out):
    """Tri-sector wedge index (0..2) of each point, anchored at start_rad."""
    cdef double two_pi = 6.283185307179586
    cdef double wedge = two_pi / 3.0
    cdef Py_ssize_t i, n = px.shape[0]
    cdef double theta, t
    cdef int64_t w
    with nogil:
        for i in range(n):
            theta = atan2(py[i] - apex_y, px[i] - apex_x)
            t = fmod(theta - start_rad, two_pi)
            if t < 0.0:
                t += two_pi
            w = <int64_t>(t / wedge)
            if w > 2:
                w = 2
            out[i] = w


def cotier_sum(int64_t victim, double[:] rx_x, double[:] rx_y, double[:] mid_x,
               double[:] mid_y, double[:] tx_x, double[:] tx_y, int64_t[:] k_rb,
               int64_t[:] wedge, double dmax_m, double p_d2d_w, double d0_m,
               double fc_mhz, bint sectored):
    """Co-tier interference (watts) at the victim pair's receiver."""
    cdef Py_ssize_t j, n = mid_x.shape[0]
    cdef double vx = rx_x[victim]
    cdef double vy = rx_y[victim]
    cdef double vmx = mid_x[victim]
    cdef double vmy = mid_y[victim]
    cdef int64_t vw = wedge[victim]
    cdef double acc = 0.0
    cdef double dx, dy, d_mid, d
    with nogil:
        for j in range(n):
            if j == victim or k_rb[j] <= 0:
                continue
            dx = mid_x[j] - vmx
            dy = mid_y[j] - vmy
            d_mid = sqrt(dx * dx + dy * dy)
            if d_mid > dmax_m:
                continue
            if sectored and wedge[j] != vw:
                continue
            dx = tx_x[j] - vx
            dy = tx_y[j] - vy
            d = sqrt(dx * dx + dy * dy)
            acc += (p_d2d_w / k_rb[j]) * _gain(d, d0_m, fc_mhz)
    return acc
