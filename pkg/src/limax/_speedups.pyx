# cython: boundscheck=False, wraparound=False, cdivision=True
"""C inner loop for the fixed-step RK4 integrator.

Mirrors _rk4_python in dynamics.py step for step: same force expression, same
update order, same divergence contract (fill out[k], return -1 on success or
the first step index holding a non-finite value).
"""

from libc.math cimport isfinite


cdef void _deriv(const double* y, double* dy, double inv_m, double mw2) noexcept nogil:
    # y[0..7] positions (x1, y1, ..., x4, y4), y[8..15] momenta.
    cdef int i, a, b, o
    cdef int adj1[4]
    cdef int adj2[4]
    cdef int opp[4]
    adj1[0] = 1; adj1[1] = 0; adj1[2] = 1; adj1[3] = 0
    adj2[0] = 3; adj2[1] = 2; adj2[2] = 3; adj2[3] = 2
    opp[0] = 2; opp[1] = 3; opp[2] = 0; opp[3] = 1
    for i in range(8):
        dy[i] = y[8 + i] * inv_m
    for i in range(4):
        a = adj1[i]
        b = adj2[i]
        o = opp[i]
        dy[8 + 2 * i] = -mw2 * ((y[2 * i] - y[2 * a]) + (y[2 * i] - y[2 * b])
                                - 0.5 * (y[2 * i] - y[2 * o]))
        dy[8 + 2 * i + 1] = -mw2 * ((y[2 * i + 1] - y[2 * a + 1]) + (y[2 * i + 1] - y[2 * b + 1])
                                    - 0.5 * (y[2 * i + 1] - y[2 * o + 1]))


def rk4_trajectory(double[::1] y0, double m, double omega, double dt,
                   Py_ssize_t n_steps, double[:, ::1] out):
    """Fill out[k] with the state after k RK4 steps of size dt (out[0] = y0).
    Returns -1, or the first step index at which the state went non-finite."""
    cdef double y[16]
    cdef double yt[16]
    cdef double k1[16]
    cdef double k2[16]
    cdef double k3[16]
    cdef double k4[16]
    cdef Py_ssize_t step
    cdef int i
    cdef double inv_m = 1.0 / m
    cdef double mw2 = m * omega * omega
    cdef double half = dt / 2.0
    cdef double sixth = dt / 6.0
    cdef bint bad
    cdef Py_ssize_t bad_step = -1

    for i in range(16):
        y[i] = y0[i]
        out[0, i] = y[i]
    with nogil:
        for step in range(1, n_steps + 1):
            _deriv(y, k1, inv_m, mw2)
            for i in range(16):
                yt[i] = y[i] + half * k1[i]
            _deriv(yt, k2, inv_m, mw2)
            for i in range(16):
                yt[i] = y[i] + half * k2[i]
            _deriv(yt, k3, inv_m, mw2)
            for i in range(16):
                yt[i] = y[i] + dt * k3[i]
            _deriv(yt, k4, inv_m, mw2)
            bad = False
            for i in range(16):
                y[i] = y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                out[step, i] = y[i]
                if not isfinite(y[i]):
                    bad = True
            if bad:
                bad_step = step
                break
    return bad_step
