"""Pure-Python reference implementations of the hot numerical kernels.

These mirror the compiled versions in ``_ckernels.pyx`` one for one; the
selection between the two happens in :mod:`blenderlab.kernels`.

Maps handled here are "polynomial plus bumps":

    f(x) = sum_i c[i] x**i + sum_k a_k * beta((x - m_k) / w_k)

with ``beta(u) = (1 - u**2)**5`` on ``|u| < 1`` (a C^4 bump) and zero
outside. Every function returns Taylor coefficients ``f^(k)(x) / k!``.
"""
import numpy as np


def _bump_taylor(u, w):
    # Taylor coefficients in x of beta((x - m)/w) at offset u, up to order 3.
    v = 1.0 - u * u
    v2 = v * v
    v3 = v2 * v
    v4 = v3 * v
    b0 = v4 * v
    b1 = -10.0 * u * v4
    b2 = -10.0 * v4 + 80.0 * u * u * v3
    b3 = 240.0 * u * v3 - 480.0 * u * u * u * v2
    return b0, b1 / w, b2 / (2.0 * w * w), b3 / (6.0 * w * w * w)


def pb_taylor(coeffs, bumps, x):
    """Taylor coefficients ``(t0, t1, t2, t3)`` of a poly+bump map at ``x``."""
    d = len(coeffs) - 1
    p0 = float(coeffs[d])
    p1 = p2 = p3 = 0.0
    for i in range(d - 1, -1, -1):
        p3 = p3 * x + p2
        p2 = p2 * x + p1
        p1 = p1 * x + p0
        p0 = p0 * x + coeffs[i]
    for k in range(len(bumps)):
        m, w, a = bumps[k][0], bumps[k][1], bumps[k][2]
        u = (x - m) / w
        if -1.0 < u < 1.0:
            b0, b1, b2, b3 = _bump_taylor(u, w)
            p0 += a * b0
            p1 += a * b1
            p2 += a * b2
            p3 += a * b3
    return p0, p1, p2, p3


def pb_invert(coeffs, bumps, y, lo, hi, guess):
    """Solve ``f(x) = y`` on ``[lo, hi]`` for an increasing poly+bump map.

    Safeguarded Newton: the bracket is kept and a bisection step replaces
    any Newton step that leaves it.
    """
    a, b = lo, hi
    x = min(max(guess, a), b)
    for _ in range(200):
        t0, t1, _, _ = pb_taylor(coeffs, bumps, x)
        g = t0 - y
        if g == 0.0:
            return x
        if g > 0.0:
            b = x
        else:
            a = x
        xn = x - g / t1 if t1 > 0.0 else 0.5 * (a + b)
        if not (a < xn < b):
            xn = 0.5 * (a + b)
        if abs(xn - x) <= 4e-16 * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def forward_orbit(coeffs, bumps, x0, n):
    """Rows ``[x_k, t1, t2, t3]`` for ``x_k = f^k(x0)``, ``k = 0..n``."""
    out = np.empty((n + 1, 4))
    x = float(x0)
    for k in range(n + 1):
        t0, t1, t2, t3 = pb_taylor(coeffs, bumps, x)
        out[k, 0] = x
        out[k, 1] = t1
        out[k, 2] = t2
        out[k, 3] = t3
        x = t0
    return out


def backward_orbit(coeffs, bumps, x0, n, lo, hi):
    """Rows ``[x_{-k}, t1, t2, t3]`` for ``x_{-k} = f^{-k}(x0)``, ``k = 0..n``."""
    out = np.empty((n + 1, 4))
    x = float(x0)
    for k in range(n + 1):
        t0, t1, t2, t3 = pb_taylor(coeffs, bumps, x)
        out[k, 0] = x
        out[k, 1] = t1
        out[k, 2] = t2
        out[k, 3] = t3
        if k < n:
            x = pb_invert(coeffs, bumps, x, lo, hi, x)
    return out


def word_orbit(table, degrees, letters, x):
    """Apply polynomial generators along ``letters`` (application order).

    ``table[s]`` holds the ascending coefficients of generator ``s`` padded
    with zeros, ``degrees[s]`` its degree. Returns ``(values, derivative)``
    arrays of the composed map at every point of ``x``.
    """
    y = np.array(x, dtype=float, copy=True)
    dy = np.ones_like(y)
    for s in letters:
        d = int(degrees[s])
        c = table[s]
        p0 = np.full_like(y, c[d])
        p1 = np.zeros_like(y)
        for i in range(d - 1, -1, -1):
            p1 = p1 * y + p0
            p0 = p0 * y + c[i]
        dy *= p1
        y = p0
    return y, dy


def word_orbit_patched(table, degrees, letters, x, dx, start, patched, lo, hi):
    """Resume :func:`word_orbit` per point from ``start`` and stop where a patched letter lands in a support.

    Returns ``(values, derivative, position)``; ``position[j]`` is the index of
    the letter whose base polynomial just moved point ``j`` into one of the
    intervals ``[lo[k], hi[k]]``, or ``len(letters)`` when the word is done.
    """
    letters = np.asarray(letters, dtype=np.int64)
    y = np.array(x, dtype=float, copy=True).ravel()
    dy = np.array(dx, dtype=float, copy=True).ravel()
    pos = np.array(start, dtype=np.int64, copy=True).ravel()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    nl = len(letters)
    running = pos < nl
    for l in range(int(pos.min()) if pos.size else nl, nl):
        act = running & (pos <= l)
        if not act.any():
            if not running.any():
                break
            continue
        s = int(letters[l])
        d = int(degrees[s])
        c = table[s]
        z = y[act]
        p0 = np.full_like(z, c[d])
        p1 = np.zeros_like(z)
        for i in range(d - 1, -1, -1):
            p1 = p1 * z + p0
            p0 = p0 * z + c[i]
        dy[act] *= p1
        y[act] = p0
        if patched[s]:
            inside = np.zeros(p0.shape, dtype=bool)
            for a, b in zip(lo, hi):
                inside |= (p0 >= a) & (p0 <= b)
            idx = np.nonzero(act)[0][inside]
            pos[idx] = l
            running[idx] = False
    pos[running] = nl
    return y, dy, pos


def series_compose(f, g):
    """Truncated composition ``f o g`` of Taylor coefficient vectors.

    ``f`` is expanded about ``g[0]``; the constant of ``g`` is ignored.
    """
    r = len(f) - 1
    out = [0.0] * (r + 1)
    out[0] = f[0]
    h = [0.0] + [float(v) for v in g[1:]]
    p = [1.0] + [0.0] * r
    for j in range(1, r + 1):
        q = [0.0] * (r + 1)
        for i in range(r + 1):
            if p[i] == 0.0:
                continue
            for k in range(1, r + 1 - i):
                q[i + k] += p[i] * h[k]
        p = q
        fj = f[j]
        for i in range(j, r + 1):
            out[i] += fj * p[i]
    return np.array(out)

