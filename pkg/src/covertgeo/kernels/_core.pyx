# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: shot-noise accumulation and optimal-threshold offsets."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, log, log1p

cnp.import_array()

cdef double _LN2 = 0.6931471805599453
cdef double _LN_HALF_WIDTH = 1e-14


def shot_noise_sums(double[::1] x, double[::1] y, gain_b, gain_w,
                    cnp.int64_t[::1] counts, bob, willie, double p_i, double alpha):
    cdef Py_ssize_t n = counts.shape[0]
    cdef Py_ssize_t j, k, pos = 0
    cdef double bx = bob[0], by = bob[1], wx = willie[0], wy = willie[1]
    cdef double dx, dy, d2, cb, cw, sb, sw, half = 0.5 * alpha
    cdef bint has_b = gain_b is not None
    cdef bint has_w = gain_w is not None
    cdef bint four = alpha == 4.0
    cdef double[::1] gb = gain_b if has_b else x
    cdef double[::1] gw = gain_w if has_w else x
    out_b = np.zeros(n)
    out_w = np.zeros(n)
    cdef double[::1] ob = out_b
    cdef double[::1] ow = out_w
    with nogil:
        for j in range(n):
            sb = 0.0
            sw = 0.0
            for k in range(pos, pos + counts[j]):
                dx = x[k] - bx
                dy = y[k] - by
                d2 = dx * dx + dy * dy
                cb = p_i / (d2 * d2) if four else p_i * exp(-half * log(d2))
                if has_b:
                    cb = cb * gb[k]
                sb = sb + cb
                dx = x[k] - wx
                dy = y[k] - wy
                d2 = dx * dx + dy * dy
                cw = p_i / (d2 * d2) if four else p_i * exp(-half * log(d2))
                if has_w:
                    cw = cw * gw[k]
                sw = sw + cw
            pos += counts[j]
            ob[j] = sb
            ow[j] = sw
    return out_b, out_w


def disk_shot_noise_sums(double[::1] u, double[::1] v, gain_b, gain_w,
                         cnp.int64_t[::1] counts, double radius, bob, willie,
                         double p_i, double alpha):
    cdef Py_ssize_t n = counts.shape[0]
    cdef Py_ssize_t j, k, pos = 0
    cdef double bx = bob[0], by = bob[1], wx = willie[0], wy = willie[1]
    cdef double px, py, r2 = radius * radius, two_r = 2.0 * radius
    cdef double dx, dy, d2, cb, cw, sb, sw, half = 0.5 * alpha
    cdef bint has_b = gain_b is not None
    cdef bint has_w = gain_w is not None
    cdef bint four = alpha == 4.0
    cdef double[::1] gb = gain_b if has_b else u
    cdef double[::1] gw = gain_w if has_w else u
    out_b = np.zeros(n)
    out_w = np.zeros(n)
    cdef double[::1] ob = out_b
    cdef double[::1] ow = out_w
    with nogil:
        for j in range(n):
            sb = 0.0
            sw = 0.0
            for k in range(pos, pos + counts[j]):
                px = two_r * u[k] - radius
                py = two_r * v[k] - radius
                if px * px + py * py > r2:
                    continue
                dx = px - bx
                dy = py - by
                d2 = dx * dx + dy * dy
                cb = p_i / (d2 * d2) if four else p_i * exp(-half * log(d2))
                if has_b:
                    cb = cb * gb[k]
                sb = sb + cb
                dx = px - wx
                dy = py - wy
                d2 = dx * dx + dy * dy
                cw = p_i / (d2 * d2) if four else p_i * exp(-half * log(d2))
                if has_w:
                    cw = cw * gw[k]
                sw = sw + cw
            pos += counts[j]
            ob[j] = sb
            ow[j] = sw
    return out_b, out_w


cdef inline double _h(double v, double beta) nogil:
    cdef double u = exp(v)
    return -1.5 * log1p(exp(-v)) + beta / (u * (1.0 + u))


cdef inline double _dh(double v, double beta) nogil:
    cdef double u = exp(v)
    return 1.5 / (1.0 + u) - beta * (1.0 + 2.0 * u) / (u * (1.0 + u) * (1.0 + u))


def threshold_offsets(beta_in):
    # safeguarded Newton in ln u; h is decreasing and the root lies below 2 beta / 3
    beta_arr = np.ascontiguousarray(beta_in, dtype=np.float64)
    cdef double[::1] beta = beta_arr.reshape(-1)
    cdef Py_ssize_t n = beta.shape[0], i
    cdef int it
    cdef double lo, hi, v, step, fv, b
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            b = beta[i]
            hi = log(2.0 * b / 3.0)
            lo = hi - _LN2
            it = 0
            while _h(lo, b) <= 0 and it < 4000:
                hi = lo
                lo = lo - _LN2
                it += 1
            v = 0.5 * (lo + hi)
            for it in range(200):
                fv = _h(v, b)
                if fv > 0:
                    lo = v
                else:
                    hi = v
                step = fv / _dh(v, b)
                if fabs(step) < _LN_HALF_WIDTH:
                    v = v - step
                    break
                if v - step <= lo or v - step >= hi:
                    step = v - 0.5 * (lo + hi)
                v = v - step
                if hi - lo < _LN_HALF_WIDTH:
                    break
            o[i] = exp(v)
    return out.reshape(np.shape(beta_in))
