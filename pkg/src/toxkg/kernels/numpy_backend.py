"""Pure-numpy scoring kernels with exact gradients.

Every function operates on already-gathered row batches: ``s``, ``p``, ``o``
are (B, d) float64 arrays holding one embedding row per triple. Gradient
kernels take a per-triple coefficient vector ``coeff`` (the upstream
dLoss/dScore) and return gradients already scaled by it, so callers can
scatter-add them straight into table-shaped accumulators.

Norm conventions: ``norm_order`` is 1 or 2. Non-differentiable points (L1 and
absolute-value kinks, the L2 norm at zero, ReLU corners) use subgradient 0.

Complex vectors are interleaved: column 2i is Re, column 2i+1 is Im.
HAKE rows interleave (modulus, phase) the same way.
"""

import numpy as np


def _norm(d, order):
    if order == 1:
        return np.sum(np.abs(d), axis=1)
    return np.sqrt(np.sum(d * d, axis=1))


def _norm_grad(d, order, norms):
    """d ||d||_order / dd, with subgradient 0 at kinks and at the L2 origin."""
    if order == 1:
        return np.sign(d)
    safe = np.where(norms > 0.0, norms, 1.0)
    return np.where(norms[:, None] > 0.0, d / safe[:, None], 0.0)


def _deinterleave(x):
    return x[:, 0::2], x[:, 1::2]


def _interleave(re, im):
    out = np.empty((re.shape[0], 2 * re.shape[1]))
    out[:, 0::2] = re
    out[:, 1::2] = im
    return out


# ---------------------------------------------------------------- DistMult

def distmult_scores(s, p, o):
    # (s*o) first so that swapping subject and object is bit-exact
    return np.sum((s * o) * p, axis=1)


def distmult_grads(s, p, o, coeff):
    c = coeff[:, None]
    return c * p * o, c * s * o, c * s * p


# ---------------------------------------------------------------- ComplEx

def complex_scores(s, p, o):
    sr, si = _deinterleave(s)
    pr, pi = _deinterleave(p)
    orr, oi = _deinterleave(o)
    return np.einsum(
        "bd->b",
        sr * pr * orr + si * pr * oi + sr * pi * oi - si * pi * orr,
    )


def complex_grads(s, p, o, coeff):
    sr, si = _deinterleave(s)
    pr, pi = _deinterleave(p)
    orr, oi = _deinterleave(o)
    c = coeff[:, None]
    gs = _interleave(c * (pr * orr + pi * oi), c * (pr * oi - pi * orr))
    gp = _interleave(c * (sr * orr + si * oi), c * (sr * oi - si * orr))
    go = _interleave(c * (sr * pr - si * pi), c * (si * pr + sr * pi))
    return gs, gp, go


# ---------------------------------------------------------------- HolE

def _circular_correlation(a, b):
    # corr(a, b)_i = sum_j a_j · b_{(i+j) mod k}
    k = a.shape[1]
    return np.fft.irfft(np.conj(np.fft.rfft(a, axis=1)) * np.fft.rfft(b, axis=1), n=k, axis=1)


def _circular_convolution(a, b):
    # conv(a, b)_m = sum_j a_j · b_{(m-j) mod k}
    k = a.shape[1]
    return np.fft.irfft(np.fft.rfft(a, axis=1) * np.fft.rfft(b, axis=1), n=k, axis=1)


def hole_scores(s, p, o):
    return np.einsum("bd,bd->b", p, _circular_correlation(s, o))


def hole_grads(s, p, o, coeff):
    c = coeff[:, None]
    gp = c * _circular_correlation(s, o)
    gs = c * _circular_correlation(p, o)
    go = c * _circular_convolution(p, s)
    return gs, gp, go


# ---------------------------------------------------------------- TransE

def transe_scores(s, p, o, norm_order):
    return _norm(s + p - o, norm_order)


def transe_grads(s, p, o, norm_order, coeff):
    d = s + p - o
    g = _norm_grad(d, norm_order, _norm(d, norm_order)) * coeff[:, None]
    return g, g.copy(), -g


# ---------------------------------------------------------------- RotatE

def _rotate_residual(s, p, o):
    sr, si = _deinterleave(s)
    orr, oi = _deinterleave(o)
    cos_p, sin_p = np.cos(p), np.sin(p)
    ar = sr * cos_p - si * sin_p - orr
    ai = sr * sin_p + si * cos_p - oi
    return sr, si, orr, oi, cos_p, sin_p, ar, ai


def rotate_scores(s, p, o, norm_order):
    *_, ar, ai = _rotate_residual(s, p, o)
    return _norm(np.concatenate([ar, ai], axis=1), norm_order)


def rotate_grads(s, p, o, norm_order, coeff):
    sr, si, orr, oi, cos_p, sin_p, ar, ai = _rotate_residual(s, p, o)
    k = ar.shape[1]
    full = np.concatenate([ar, ai], axis=1)
    u = _norm_grad(full, norm_order, _norm(full, norm_order))
    ur, ui = u[:, :k] * coeff[:, None], u[:, k:] * coeff[:, None]
    gs = _interleave(ur * cos_p + ui * sin_p, -ur * sin_p + ui * cos_p)
    gp = ur * (-sr * sin_p - si * cos_p) + ui * (sr * cos_p - si * sin_p)
    go = _interleave(-ur, -ui)
    return gs, gp, go


# ---------------------------------------------------------------- pRotatE

def protate_scores(s, p, o, norm_order, modulus_constraint):
    v = np.sin((s + p - o) / 2.0)
    return 2.0 * modulus_constraint * _norm(v, norm_order)


def protate_grads(s, p, o, norm_order, modulus_constraint, coeff):
    u = (s + p - o) / 2.0
    v = np.sin(u)
    g = _norm_grad(v, norm_order, _norm(v, norm_order)) * np.cos(u)
    g *= modulus_constraint * coeff[:, None]
    return g, g.copy(), -g


# ---------------------------------------------------------------- HAKE

def hake_scores(s, p, o, norm_order):
    sm, sph = _deinterleave(s)
    pm, pph = _deinterleave(p)
    om, oph = _deinterleave(o)
    dm = np.abs(sm) * np.abs(pm) - np.abs(om)
    v = np.sin((sph + pph - oph) / 2.0)
    return _norm(dm, norm_order) + np.sum(np.abs(v), axis=1)


def hake_grads(s, p, o, norm_order, coeff):
    sm, sph = _deinterleave(s)
    pm, pph = _deinterleave(p)
    om, oph = _deinterleave(o)
    c = coeff[:, None]
    dm = np.abs(sm) * np.abs(pm) - np.abs(om)
    um = _norm_grad(dm, norm_order, _norm(dm, norm_order)) * c
    gsm = um * np.abs(pm) * np.sign(sm)
    gpm = um * np.abs(sm) * np.sign(pm)
    gom = -um * np.sign(om)
    u = (sph + pph - oph) / 2.0
    gph = np.sign(np.sin(u)) * np.cos(u) * 0.5 * c
    return (
        _interleave(gsm, gph),
        _interleave(gpm, gph),
        _interleave(gom, -gph),
    )


# ---------------------------------------------------------------- ConvKB

def _convkb_forward(s, p, o, filters, filter_bias):
    x = np.stack([s, p, o], axis=2)  # (B, k, 3)
    w = filters.reshape(filters.shape[0], 3)
    pre = np.einsum("fw,biw->bfi", w, x) + filter_bias[None, :, None]
    return x, w, pre, np.maximum(pre, 0.0)


def convkb_scores(s, p, o, filters, filter_bias, dense, dense_bias):
    _, _, _, h = _convkb_forward(s, p, o, filters, filter_bias)
    d = dense.reshape(h.shape[1], h.shape[2])
    return np.einsum("bfi,fi->b", h, d) + dense_bias[0]


def convkb_grads(s, p, o, filters, filter_bias, dense, dense_bias, coeff):
    x, w, pre, h = _convkb_forward(s, p, o, filters, filter_bias)
    d = dense.reshape(h.shape[1], h.shape[2])
    gpre = coeff[:, None, None] * d[None, :, :] * (pre > 0.0)
    gx = np.einsum("bfi,fw->biw", gpre, w)
    g_filters = np.einsum("bfi,biw->fw", gpre, x).reshape(filters.shape)
    g_filter_bias = np.einsum("bfi->f", gpre)
    g_dense = np.einsum("b,bfi->fi", coeff, h).reshape(dense.shape)
    g_dense_bias = np.array([np.sum(coeff)])
    return (
        gx[:, :, 0],
        gx[:, :, 1],
        gx[:, :, 2],
        g_filters,
        g_filter_bias,
        g_dense,
        g_dense_bias,
    )


# ---------------------------------------------------------------- ConvE

def _conve_forward(s, p, filters, filter_bias, rows, cols):
    b, k = s.shape
    img = np.concatenate(
        [s.reshape(b, rows, cols), p.reshape(b, rows, cols)], axis=1
    )  # (B, 2*rows, cols)
    fh, fw = filters.shape[1], filters.shape[2]
    win = np.lib.stride_tricks.sliding_window_view(img, (fh, fw), axis=(1, 2))
    pre = np.einsum("fuv,bijuv->bfij", filters, win) + filter_bias[None, :, None, None]
    return img, win, pre, np.maximum(pre, 0.0)


def conve_scores(s, p, o, filters, filter_bias, dense, dense_bias, rows, cols):
    _, _, _, h = _conve_forward(s, p, filters, filter_bias, rows, cols)
    f, oh, ow = h.shape[1], h.shape[2], h.shape[3]
    d = dense.reshape(f, oh, ow, o.shape[1])
    z = np.einsum("bfij,fijd->bd", h, d) + dense_bias[None, :]
    return np.einsum("bd,bd->b", z, o)


def conve_grads(s, p, o, filters, filter_bias, dense, dense_bias, rows, cols, coeff):
    img, win, pre, h = _conve_forward(s, p, filters, filter_bias, rows, cols)
    b, k = s.shape
    f, oh, ow = h.shape[1], h.shape[2], h.shape[3]
    fh, fw = filters.shape[1], filters.shape[2]
    d = dense.reshape(f, oh, ow, k)
    z = np.einsum("bfij,fijd->bd", h, d) + dense_bias[None, :]
    go = coeff[:, None] * z
    gz = coeff[:, None] * o
    g_dense_bias = np.sum(gz, axis=0)
    g_dense = np.einsum("bfij,bd->fijd", h, gz).reshape(dense.shape)
    gpre = np.einsum("bd,fijd->bfij", gz, d) * (pre > 0.0)
    g_filter_bias = np.einsum("bfij->f", gpre)
    g_filters = np.einsum("bfij,bijuv->fuv", gpre, win)
    gimg = np.zeros_like(img)
    for u in range(fh):
        for v in range(fw):
            gimg[:, u : u + oh, v : v + ow] += np.einsum(
                "bfij,f->bij", gpre, filters[:, u, v]
            )
    gs = gimg[:, :rows, :].reshape(b, k)
    gp = gimg[:, rows:, :].reshape(b, k)
    return gs, gp, go, g_filters, g_filter_bias, g_dense, g_dense_bias
