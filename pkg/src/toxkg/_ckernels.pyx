# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled scoring kernels: same contract as toxkg.kernels.numpy_backend.

Inputs are (B, d) float64 row batches; gradient kernels scale by the
per-triple coefficient vector. HolE uses the direct O(k^2) circular
correlation here (the numpy backend uses the FFT route), so the two backends
agree to roundoff (~1e-8) rather than bit-exactly for that model.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt

cnp.import_array()


cdef inline double _sgn(double x) nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef inline double _row_norm(double* d, Py_ssize_t n, int order) nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    if order == 1:
        for i in range(n):
            acc += fabs(d[i])
        return acc
    for i in range(n):
        acc += d[i] * d[i]
    return sqrt(acc)


cdef cnp.ndarray _c2d(object a):
    return np.ascontiguousarray(a, dtype=np.float64)


# ---------------------------------------------------------------- DistMult

def distmult_scores(s, p, o):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double acc
    with nogil:
        for i in range(b):
            acc = 0.0
            for j in range(k):
                # (s*o) first so that swapping subject and object is bit-exact
                acc += (sv[i, j] * ov[i, j]) * pv[i, j]
            res[i] = acc
    return out


def distmult_grads(s, p, o, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j
    gs = np.empty((b, k)); gp = np.empty((b, k)); go = np.empty((b, k))
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go
    cdef double c
    with nogil:
        for i in range(b):
            c = cv[i]
            for j in range(k):
                gsv[i, j] = c * pv[i, j] * ov[i, j]
                gpv[i, j] = c * sv[i, j] * ov[i, j]
                gov[i, j] = c * sv[i, j] * pv[i, j]
    return gs, gp, go


# ---------------------------------------------------------------- ComplEx

def complex_scores(s, p, o):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1] // 2, i, j
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double acc, sr, si, pr, pi, orr, oi
    with nogil:
        for i in range(b):
            acc = 0.0
            for j in range(k):
                sr = sv[i, 2 * j]; si = sv[i, 2 * j + 1]
                pr = pv[i, 2 * j]; pi = pv[i, 2 * j + 1]
                orr = ov[i, 2 * j]; oi = ov[i, 2 * j + 1]
                acc += sr * pr * orr + si * pr * oi + sr * pi * oi - si * pi * orr
            res[i] = acc
    return out


def complex_grads(s, p, o, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], d = sv.shape[1], k = d // 2, i, j
    gs = np.empty((b, d)); gp = np.empty((b, d)); go = np.empty((b, d))
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go
    cdef double c, sr, si, pr, pi, orr, oi
    with nogil:
        for i in range(b):
            c = cv[i]
            for j in range(k):
                sr = sv[i, 2 * j]; si = sv[i, 2 * j + 1]
                pr = pv[i, 2 * j]; pi = pv[i, 2 * j + 1]
                orr = ov[i, 2 * j]; oi = ov[i, 2 * j + 1]
                gsv[i, 2 * j] = c * (pr * orr + pi * oi)
                gsv[i, 2 * j + 1] = c * (pr * oi - pi * orr)
                gpv[i, 2 * j] = c * (sr * orr + si * oi)
                gpv[i, 2 * j + 1] = c * (sr * oi - si * orr)
                gov[i, 2 * j] = c * (sr * pr - si * pi)
                gov[i, 2 * j + 1] = c * (si * pr + sr * pi)
    return gs, gp, go


# ---------------------------------------------------------------- HolE

def hole_scores(s, p, o):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j, m
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double acc, corr
    with nogil:
        for i in range(b):
            acc = 0.0
            for m in range(k):
                corr = 0.0
                for j in range(k):
                    corr += sv[i, j] * ov[i, (m + j) % k]
                acc += pv[i, m] * corr
            res[i] = acc
    return out


def hole_grads(s, p, o, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j, m
    gs = np.zeros((b, k)); gp = np.zeros((b, k)); go = np.zeros((b, k))
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go
    cdef double c, corr
    with nogil:
        for i in range(b):
            c = cv[i]
            for m in range(k):
                # dS/ds_m = sum_i p_i · o_{(m+i) mod k}
                corr = 0.0
                for j in range(k):
                    corr += pv[i, j] * ov[i, (m + j) % k]
                gsv[i, m] = c * corr
                # dS/dp_m = corr(s, o)_m
                corr = 0.0
                for j in range(k):
                    corr += sv[i, j] * ov[i, (m + j) % k]
                gpv[i, m] = c * corr
                # dS/do_m = conv(p, s)_m = sum_i p_i · s_{(m-i) mod k}
                corr = 0.0
                for j in range(k):
                    corr += pv[i, j] * sv[i, (m - j + k) % k]
                gov[i, m] = c * corr
    return gs, gp, go


# ---------------------------------------------------------------- TransE

def transe_scores(s, p, o, int norm_order):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double acc, d
    with nogil:
        for i in range(b):
            acc = 0.0
            if norm_order == 1:
                for j in range(k):
                    acc += fabs(sv[i, j] + pv[i, j] - ov[i, j])
            else:
                for j in range(k):
                    d = sv[i, j] + pv[i, j] - ov[i, j]
                    acc += d * d
                acc = sqrt(acc)
            res[i] = acc
    return out


def transe_grads(s, p, o, int norm_order, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j
    gs = np.empty((b, k)); gp = np.empty((b, k)); go = np.empty((b, k))
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go
    cdef double c, d, nrm, g
    with nogil:
        for i in range(b):
            c = cv[i]
            if norm_order == 1:
                for j in range(k):
                    d = sv[i, j] + pv[i, j] - ov[i, j]
                    g = c * _sgn(d)
                    gsv[i, j] = g; gpv[i, j] = g; gov[i, j] = -g
            else:
                nrm = 0.0
                for j in range(k):
                    d = sv[i, j] + pv[i, j] - ov[i, j]
                    nrm += d * d
                nrm = sqrt(nrm)
                for j in range(k):
                    d = sv[i, j] + pv[i, j] - ov[i, j]
                    g = c * d / nrm if nrm > 0.0 else 0.0
                    gsv[i, j] = g; gpv[i, j] = g; gov[i, j] = -g
    return gs, gp, go


# ---------------------------------------------------------------- RotatE

def rotate_scores(s, p, o, int norm_order):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef Py_ssize_t b = sv.shape[0], k = pv.shape[1], i, j
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double acc, cp, sp, ar, ai
    with nogil:
        for i in range(b):
            acc = 0.0
            for j in range(k):
                cp = cos(pv[i, j]); sp = sin(pv[i, j])
                ar = sv[i, 2 * j] * cp - sv[i, 2 * j + 1] * sp - ov[i, 2 * j]
                ai = sv[i, 2 * j] * sp + sv[i, 2 * j + 1] * cp - ov[i, 2 * j + 1]
                if norm_order == 1:
                    acc += fabs(ar) + fabs(ai)
                else:
                    acc += ar * ar + ai * ai
            res[i] = acc if norm_order == 1 else sqrt(acc)
    return out


def rotate_grads(s, p, o, int norm_order, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], d = sv.shape[1], k = pv.shape[1], i, j
    gs = np.empty((b, d)); gp = np.empty((b, k)); go = np.empty((b, d))
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go
    cdef double c, cp, sp, ar, ai, nrm, ur, ui, sr, si
    with nogil:
        for i in range(b):
            c = cv[i]
            nrm = 0.0
            if norm_order == 2:
                for j in range(k):
                    cp = cos(pv[i, j]); sp = sin(pv[i, j])
                    ar = sv[i, 2 * j] * cp - sv[i, 2 * j + 1] * sp - ov[i, 2 * j]
                    ai = sv[i, 2 * j] * sp + sv[i, 2 * j + 1] * cp - ov[i, 2 * j + 1]
                    nrm += ar * ar + ai * ai
                nrm = sqrt(nrm)
            for j in range(k):
                sr = sv[i, 2 * j]; si = sv[i, 2 * j + 1]
                cp = cos(pv[i, j]); sp = sin(pv[i, j])
                ar = sr * cp - si * sp - ov[i, 2 * j]
                ai = sr * sp + si * cp - ov[i, 2 * j + 1]
                if norm_order == 1:
                    ur = _sgn(ar); ui = _sgn(ai)
                else:
                    ur = ar / nrm if nrm > 0.0 else 0.0
                    ui = ai / nrm if nrm > 0.0 else 0.0
                ur *= c; ui *= c
                gsv[i, 2 * j] = ur * cp + ui * sp
                gsv[i, 2 * j + 1] = -ur * sp + ui * cp
                gpv[i, j] = ur * (-sr * sp - si * cp) + ui * (sr * cp - si * sp)
                gov[i, 2 * j] = -ur
                gov[i, 2 * j + 1] = -ui
    return gs, gp, go


# ---------------------------------------------------------------- pRotatE

def protate_scores(s, p, o, int norm_order, double modulus_constraint):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double acc, v
    with nogil:
        for i in range(b):
            acc = 0.0
            for j in range(k):
                v = sin((sv[i, j] + pv[i, j] - ov[i, j]) / 2.0)
                acc += fabs(v) if norm_order == 1 else v * v
            if norm_order == 2:
                acc = sqrt(acc)
            res[i] = 2.0 * modulus_constraint * acc
    return out


def protate_grads(s, p, o, int norm_order, double modulus_constraint, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], i, j
    gs = np.empty((b, k)); gp = np.empty((b, k)); go = np.empty((b, k))
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go
    cdef double c, u, v, nrm, g
    with nogil:
        for i in range(b):
            c = cv[i]
            nrm = 0.0
            if norm_order == 2:
                for j in range(k):
                    v = sin((sv[i, j] + pv[i, j] - ov[i, j]) / 2.0)
                    nrm += v * v
                nrm = sqrt(nrm)
            for j in range(k):
                u = (sv[i, j] + pv[i, j] - ov[i, j]) / 2.0
                v = sin(u)
                if norm_order == 1:
                    g = _sgn(v) * cos(u)
                else:
                    g = (v / nrm if nrm > 0.0 else 0.0) * cos(u)
                g *= modulus_constraint * c
                gsv[i, j] = g; gpv[i, j] = g; gov[i, j] = -g
    return gs, gp, go


# ---------------------------------------------------------------- HAKE

def hake_scores(s, p, o, int norm_order):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1] // 2, i, j
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double accm, accp, dm, v
    with nogil:
        for i in range(b):
            accm = 0.0; accp = 0.0
            for j in range(k):
                dm = fabs(sv[i, 2 * j]) * fabs(pv[i, 2 * j]) - fabs(ov[i, 2 * j])
                accm += fabs(dm) if norm_order == 1 else dm * dm
                v = sin((sv[i, 2 * j + 1] + pv[i, 2 * j + 1] - ov[i, 2 * j + 1]) / 2.0)
                accp += fabs(v)
            if norm_order == 2:
                accm = sqrt(accm)
            res[i] = accm + accp
    return out


def hake_grads(s, p, o, int norm_order, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], d = sv.shape[1], k = d // 2, i, j
    gs = np.empty((b, d)); gp = np.empty((b, d)); go = np.empty((b, d))
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go
    cdef double c, dm, nrm, um, u, gph, sm, pm, om
    with nogil:
        for i in range(b):
            c = cv[i]
            nrm = 0.0
            if norm_order == 2:
                for j in range(k):
                    dm = fabs(sv[i, 2 * j]) * fabs(pv[i, 2 * j]) - fabs(ov[i, 2 * j])
                    nrm += dm * dm
                nrm = sqrt(nrm)
            for j in range(k):
                sm = sv[i, 2 * j]; pm = pv[i, 2 * j]; om = ov[i, 2 * j]
                dm = fabs(sm) * fabs(pm) - fabs(om)
                if norm_order == 1:
                    um = _sgn(dm) * c
                else:
                    um = (dm / nrm if nrm > 0.0 else 0.0) * c
                gsv[i, 2 * j] = um * fabs(pm) * _sgn(sm)
                gpv[i, 2 * j] = um * fabs(sm) * _sgn(pm)
                gov[i, 2 * j] = -um * _sgn(om)
                u = (sv[i, 2 * j + 1] + pv[i, 2 * j + 1] - ov[i, 2 * j + 1]) / 2.0
                gph = _sgn(sin(u)) * cos(u) * 0.5 * c
                gsv[i, 2 * j + 1] = gph
                gpv[i, 2 * j + 1] = gph
                gov[i, 2 * j + 1] = -gph
    return gs, gp, go


# ---------------------------------------------------------------- ConvKB

def convkb_scores(s, p, o, filters, filter_bias, dense, dense_bias):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[:, :, ::1] fv = np.ascontiguousarray(filters, dtype=np.float64)
    cdef double[::1] fbv = np.ascontiguousarray(filter_bias, dtype=np.float64)
    cdef double[:, ::1] dv = _c2d(dense)
    cdef double[::1] dbv = np.ascontiguousarray(dense_bias, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], nf = fv.shape[0], i, f, j
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double acc, pre
    with nogil:
        for i in range(b):
            acc = dbv[0]
            for f in range(nf):
                for j in range(k):
                    pre = (fv[f, 0, 0] * sv[i, j] + fv[f, 0, 1] * pv[i, j]
                           + fv[f, 0, 2] * ov[i, j] + fbv[f])
                    if pre > 0.0:
                        acc += pre * dv[f * k + j, 0]
            res[i] = acc
    return out


def convkb_grads(s, p, o, filters, filter_bias, dense, dense_bias, coeff):
    cdef double[:, ::1] sv = _c2d(s), pv = _c2d(p), ov = _c2d(o)
    cdef double[:, :, ::1] fv = np.ascontiguousarray(filters, dtype=np.float64)
    cdef double[::1] fbv = np.ascontiguousarray(filter_bias, dtype=np.float64)
    cdef double[:, ::1] dv = _c2d(dense)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t b = sv.shape[0], k = sv.shape[1], nf = fv.shape[0], i, f, j
    gs = np.zeros((b, k)); gp = np.zeros((b, k)); go = np.zeros((b, k))
    gf = np.zeros((nf, 1, 3)); gfb = np.zeros(nf)
    gd = np.zeros((nf * k, 1)); gdb = np.zeros(1)
    cdef double[:, ::1] gsv = gs, gpv = gp, gov = go, gdv = gd
    cdef double[:, :, ::1] gfv = gf
    cdef double[::1] gfbv = gfb, gdbv = gdb
    cdef double c, pre, gpre, h
    with nogil:
        for i in range(b):
            c = cv[i]
            gdbv[0] += c
            for f in range(nf):
                for j in range(k):
                    pre = (fv[f, 0, 0] * sv[i, j] + fv[f, 0, 1] * pv[i, j]
                           + fv[f, 0, 2] * ov[i, j] + fbv[f])
                    if pre > 0.0:
                        h = pre
                        gdv[f * k + j, 0] += c * h
                        gpre = c * dv[f * k + j, 0]
                        gsv[i, j] += gpre * fv[f, 0, 0]
                        gpv[i, j] += gpre * fv[f, 0, 1]
                        gov[i, j] += gpre * fv[f, 0, 2]
                        gfv[f, 0, 0] += gpre * sv[i, j]
                        gfv[f, 0, 1] += gpre * pv[i, j]
                        gfv[f, 0, 2] += gpre * ov[i, j]
                        gfbv[f] += gpre
    return gs, gp, go, gf, gfb, gd, gdb


# ---------------------------------------------------------------- ConvE

def conve_scores(s, p, o, filters, filter_bias, dense, dense_bias,
                 Py_ssize_t rows, Py_ssize_t cols):
    sa = _c2d(s); pa = _c2d(p)
    cdef Py_ssize_t b = sa.shape[0], k = sa.shape[1]
    img_np = np.concatenate(
        [sa.reshape(b, rows, cols), pa.reshape(b, rows, cols)], axis=1
    )
    cdef double[:, :, ::1] img = np.ascontiguousarray(img_np)
    cdef double[:, ::1] ov = _c2d(o)
    cdef double[:, :, ::1] fv = np.ascontiguousarray(filters, dtype=np.float64)
    cdef double[::1] fbv = np.ascontiguousarray(filter_bias, dtype=np.float64)
    cdef double[:, ::1] dv = _c2d(dense)
    cdef double[::1] dbv = np.ascontiguousarray(dense_bias, dtype=np.float64)
    cdef Py_ssize_t nf = fv.shape[0], fh = fv.shape[1], fw = fv.shape[2]
    cdef Py_ssize_t oh = 2 * rows - fh + 1, ow = cols - fw + 1
    cdef Py_ssize_t i, f, x, y, u, v, dd, hidx
    out = np.empty(b)
    cdef double[::1] res = out
    cdef double[::1] z = np.empty(k)
    cdef double pre, acc
    with nogil:
        for i in range(b):
            for dd in range(k):
                z[dd] = dbv[dd]
            for f in range(nf):
                for x in range(oh):
                    for y in range(ow):
                        pre = fbv[f]
                        for u in range(fh):
                            for v in range(fw):
                                pre += fv[f, u, v] * img[i, x + u, y + v]
                        if pre > 0.0:
                            hidx = (f * oh + x) * ow + y
                            for dd in range(k):
                                z[dd] += pre * dv[hidx, dd]
            acc = 0.0
            for dd in range(k):
                acc += z[dd] * ov[i, dd]
            res[i] = acc
    return out


def conve_grads(s, p, o, filters, filter_bias, dense, dense_bias,
                Py_ssize_t rows, Py_ssize_t cols, coeff):
    sa = _c2d(s); pa = _c2d(p)
    cdef Py_ssize_t b = sa.shape[0], k = sa.shape[1]
    img_np = np.concatenate(
        [sa.reshape(b, rows, cols), pa.reshape(b, rows, cols)], axis=1
    )
    cdef double[:, :, ::1] img = np.ascontiguousarray(img_np)
    cdef double[:, ::1] ov = _c2d(o)
    cdef double[:, :, ::1] fv = np.ascontiguousarray(filters, dtype=np.float64)
    cdef double[::1] fbv = np.ascontiguousarray(filter_bias, dtype=np.float64)
    cdef double[:, ::1] dv = _c2d(dense)
    cdef double[::1] dbv = np.ascontiguousarray(dense_bias, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef Py_ssize_t nf = fv.shape[0], fh = fv.shape[1], fw = fv.shape[2]
    cdef Py_ssize_t oh = 2 * rows - fh + 1, ow = cols - fw + 1
    cdef Py_ssize_t hidden = nf * oh * ow
    cdef Py_ssize_t i, f, x, y, u, v, dd, hidx
    go_np = np.empty((b, k))
    gimg_np = np.zeros((b, 2 * rows, cols))
    gf_np = np.zeros((nf, fh, fw)); gfb_np = np.zeros(nf)
    gd_np = np.zeros((hidden, k)); gdb_np = np.zeros(k)
    cdef double[:, ::1] gov = go_np, gdv = gd_np
    cdef double[:, :, ::1] gimg = gimg_np, gfv = gf_np
    cdef double[::1] gfbv = gfb_np, gdbv = gdb_np
    cdef double[::1] z = np.empty(k)
    cdef double c, pre, gz, gpre, h
    with nogil:
        for i in range(b):
            c = cv[i]
            for dd in range(k):
                z[dd] = dbv[dd]
                gdbv[dd] += c * ov[i, dd]
            for f in range(nf):
                for x in range(oh):
                    for y in range(ow):
                        pre = fbv[f]
                        for u in range(fh):
                            for v in range(fw):
                                pre += fv[f, u, v] * img[i, x + u, y + v]
                        if pre <= 0.0:
                            continue
                        h = pre
                        hidx = (f * oh + x) * ow + y
                        gpre = 0.0
                        for dd in range(k):
                            z[dd] += h * dv[hidx, dd]
                            gz = c * ov[i, dd]
                            gdv[hidx, dd] += h * gz
                            gpre += gz * dv[hidx, dd]
                        gfbv[f] += gpre
                        for u in range(fh):
                            for v in range(fw):
                                gfv[f, u, v] += gpre * img[i, x + u, y + v]
                                gimg[i, x + u, y + v] += gpre * fv[f, u, v]
            for dd in range(k):
                gov[i, dd] = c * z[dd]
    gs = gimg_np[:, :rows, :].reshape(b, k).copy()
    gp = gimg_np[:, rows:, :].reshape(b, k).copy()
    return gs, gp, go_np, gf_np, gfb_np, gd_np, gdb_np
