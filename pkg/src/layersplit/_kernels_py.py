"""NumPy implementations of the compiled kernels (same signatures)."""
import numpy as np


def _soft(z, w):
    r = np.abs(z) - w
    return np.where(r > 0.0, np.copysign(r, z), 0.0)


def shrink(a, w):
    return _soft(np.asarray(a, dtype=np.float64), np.asarray(w, dtype=np.float64))


def circ_filter(x, taps, anchor, adjoint, out, accumulate):
    if not accumulate:
        out[...] = 0.0
    for k, t in enumerate(taps):
        off = (anchor - k) if adjoint else (k - anchor)
        # np.roll(x, -off)[i] == x[(i + off) % D]
        out += t * np.roll(x, -off, axis=1)


def uv_step(g, u, v, y1, y2, fli, fla, alpha, beta, gamma, mu, tden):
    den = 2.0 * gamma + mu
    two_gamma = 2.0 * gamma
    zu = (two_gamma * (g - v) + mu * fli - y1) / den
    un = _soft(zu, (alpha + beta * np.abs(v)) / tden)
    zv = (two_gamma * (g - un) + mu * fla - y2) / den
    vn = _soft(zv, (beta * np.abs(un)) / tden)
    du = un - fli
    dv = vn - fla
    y1 += mu * du
    y2 += mu * dv
    u[...] = un
    v[...] = vn
    return float(np.dot(du, du)), float(np.dot(dv, dv))
