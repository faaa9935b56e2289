"""Pure numpy implementations of the compiled kernels."""

import numpy as np

_LN_HALF_WIDTH = 1e-14


def shot_noise_sums(x, y, gain_b, gain_w, counts, bob, willie, p_i, alpha):
    """Per-trial interference power at two receivers from concatenated PPP points.

    ``counts[j]`` consecutive entries of ``x``/``y`` belong to trial ``j``.
    ``gain_b``/``gain_w`` may be None for unit gains.
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.shape[0]
    trial = np.repeat(np.arange(n), counts)
    out = []
    for (rx, ry), gain in ((bob, gain_b), (willie, gain_w)):
        dx = x - rx
        dy = y - ry
        d2 = dx * dx + dy * dy
        if alpha == 4.0:
            contrib = p_i / (d2 * d2)
        else:
            contrib = p_i / d2 ** (0.5 * alpha)
        if gain is not None:
            contrib = contrib * gain
        out.append(np.bincount(trial, weights=contrib, minlength=n))
    return out[0], out[1]


def disk_shot_noise_sums(u, v, gain_b, gain_w, counts, radius, bob, willie, p_i, alpha):
    """Like :func:`shot_noise_sums` for points uniform on the square ``[-radius, radius]^2``.

    ``u``/``v`` are unit uniforms; points outside the disk of ``radius`` are skipped.
    """
    counts = np.asarray(counts, dtype=np.int64)
    x = 2.0 * radius * u - radius
    y = 2.0 * radius * v - radius
    keep = x * x + y * y <= radius * radius
    trial = np.repeat(np.arange(counts.shape[0]), counts)[keep]
    kept = np.bincount(trial, minlength=counts.shape[0])
    gb = None if gain_b is None else gain_b[keep]
    gw = None if gain_w is None else gain_w[keep]
    return shot_noise_sums(x[keep], y[keep], gb, gw, kept, bob, willie, p_i, alpha)


def _h(v, beta):
    u = np.exp(v)
    return -1.5 * np.log1p(np.exp(-v)) + beta / (u * (1.0 + u))


def threshold_offsets(beta):
    """Solve ``1.5 ln(u/(1+u)) + beta/(u(1+u)) = 0`` for ``u > 0`` elementwise.

    ``u = (gamma - P_w)/P_w`` at the optimal threshold and ``beta = b/P_w``.
    Bisection in ``ln u``; the root lies below ``2 beta / 3``.
    """
    beta = np.asarray(beta, dtype=float)
    v_hi = np.log(2.0 * beta / 3.0)
    v_lo = v_hi - np.log(2.0)
    for _ in range(4000):
        bad = _h(v_lo, beta) <= 0
        if not bad.any():
            break
        v_hi = np.where(bad, v_lo, v_hi)
        v_lo = np.where(bad, v_lo - np.log(2.0), v_lo)
    for _ in range(200):
        mid = 0.5 * (v_lo + v_hi)
        pos = _h(mid, beta) > 0
        v_lo = np.where(pos, mid, v_lo)
        v_hi = np.where(pos, v_hi, mid)
        if np.max(v_hi - v_lo) < _LN_HALF_WIDTH:
            break
    return np.exp(0.5 * (v_lo + v_hi))
