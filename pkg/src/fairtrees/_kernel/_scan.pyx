# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-candidate scan; contract identical to scan_py."""

import numpy as np

from libc.math cimport log2, NAN


cdef inline double _h(double ones, double total) noexcept nogil:
    cdef double p, q
    if total <= 0.0 or ones <= 0.0 or ones >= total:
        return 0.0
    p = ones / total
    q = 1.0 - p
    return -(p * log2(p) + q * log2(q))


def scan_split_candidates(const double[:, ::1] X, const unsigned char[::1] y,
                          const unsigned char[::1] s, const unsigned char[::1] kinds,
                          int n_thresholds, long min_child):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t m = X.shape[1]
    cdef long mc = min_child if min_child > 1 else 1
    cdef Py_ssize_t i, j, t_idx, t_count, out
    cdef double v, mn, mx, step, t
    cdef double ty = 0.0, ts = 0.0
    cdef double hy, hs, wl, wr, gy, gs
    cdef long ln

    for i in range(n):
        ty += y[i]
        ts += s[i]
    hy = _h(ty, <double>n)
    hs = _h(ts, <double>n)

    cdef Py_ssize_t cap = 0
    for j in range(m):
        cap += 1 if kinds[j] == 0 else n_thresholds

    cols_arr = np.empty(cap, dtype=np.int64)
    thrs_arr = np.empty(cap, dtype=np.float64)
    gy_arr = np.empty(cap, dtype=np.float64)
    gs_arr = np.empty(cap, dtype=np.float64)
    ln_arr = np.empty(cap, dtype=np.int64)
    rn_arr = np.empty(cap, dtype=np.int64)
    cdef long[::1] cols = cols_arr
    cdef double[::1] thrs = thrs_arr
    cdef double[::1] gys = gy_arr
    cdef double[::1] gss = gs_arr
    cdef long[::1] lns = ln_arr
    cdef long[::1] rns = rn_arr

    cuts_buf = np.empty(n_thresholds, dtype=np.float64)
    cln_buf = np.empty(n_thresholds, dtype=np.int64)
    cly_buf = np.empty(n_thresholds, dtype=np.float64)
    cls_buf = np.empty(n_thresholds, dtype=np.float64)
    cdef double[::1] cuts = cuts_buf
    cdef long[::1] cln = cln_buf
    cdef double[::1] cly = cly_buf
    cdef double[::1] cls = cls_buf

    out = 0
    with nogil:
        for j in range(m):
            if kinds[j] == 0:
                ln = 0
                cly[0] = 0.0
                cls[0] = 0.0
                for i in range(n):
                    if X[i, j] == 0.0:
                        ln += 1
                        cly[0] += y[i]
                        cls[0] += s[i]
                if ln < mc or n - ln < mc:
                    continue
                wl = (<double>ln) / (<double>n)
                wr = (<double>(n - ln)) / (<double>n)
                gy = hy - wl * _h(cly[0], <double>ln) - wr * _h(ty - cly[0], <double>(n - ln))
                gs = hs - wl * _h(cls[0], <double>ln) - wr * _h(ts - cls[0], <double>(n - ln))
                cols[out] = j
                thrs[out] = NAN
                gys[out] = gy if gy > 0.0 else 0.0
                gss[out] = gs if gs > 0.0 else 0.0
                lns[out] = ln
                rns[out] = n - ln
                out += 1
            else:
                mn = X[0, j]
                mx = X[0, j]
                for i in range(1, n):
                    v = X[i, j]
                    if v < mn:
                        mn = v
                    if v > mx:
                        mx = v
                if not mx > mn:
                    continue
                step = (mx - mn) / (n_thresholds + 1)
                t_count = 0
                for t_idx in range(1, n_thresholds + 1):
                    t = mn + t_idx * step
                    if t <= mn or t >= mx:
                        continue
                    if t_count > 0 and t == cuts[t_count - 1]:
                        continue
                    cuts[t_count] = t
                    cln[t_count] = 0
                    cly[t_count] = 0.0
                    cls[t_count] = 0.0
                    t_count += 1
                if t_count == 0:
                    continue
                for i in range(n):
                    v = X[i, j]
                    for t_idx in range(t_count):
                        if v <= cuts[t_idx]:
                            cln[t_idx] += 1
                            cly[t_idx] += y[i]
                            cls[t_idx] += s[i]
                for t_idx in range(t_count):
                    ln = cln[t_idx]
                    if ln < mc or n - ln < mc:
                        continue
                    wl = (<double>ln) / (<double>n)
                    wr = (<double>(n - ln)) / (<double>n)
                    gy = hy - wl * _h(cly[t_idx], <double>ln) - wr * _h(ty - cly[t_idx], <double>(n - ln))
                    gs = hs - wl * _h(cls[t_idx], <double>ln) - wr * _h(ts - cls[t_idx], <double>(n - ln))
                    cols[out] = j
                    thrs[out] = cuts[t_idx]
                    gys[out] = gy if gy > 0.0 else 0.0
                    gss[out] = gs if gs > 0.0 else 0.0
                    lns[out] = ln
                    rns[out] = n - ln
                    out += 1

    return (cols_arr[:out], thrs_arr[:out], gy_arr[:out], gs_arr[:out],
            ln_arr[:out], rn_arr[:out])
