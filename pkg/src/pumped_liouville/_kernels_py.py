"""Reference implementation of the hot kernels.

Mirrors ``_kernels.pyx`` call for call. Used when the compiled extension is
unavailable or when ``PUMPED_LIOUVILLE_PURE_PYTHON=1`` is set. Arrays are
modified in place exactly like the compiled version.
"""
import cmath
import math

import numpy as np


def _givens(a, b):
    """Rotation (c, s) with [c, s; -conj(s), c] @ [a, b] = [r, 0]."""
    aa = abs(a)
    if aa == 0.0:
        return 0.0, 1.0 + 0.0j
    nrm = math.hypot(aa, abs(b))
    phase = a / aa
    return aa / nrm, phase * b.conjugate() / nrm


def _wilkinson(a, b, c, d):
    """Eigenvalue of [[a, b], [c, d]] closest to d."""
    half = 0.5 * (a - d)
    disc = cmath.sqrt(half * half + b * c)
    mu1 = d - half + disc
    mu2 = d - half - disc
    # d - half = (a + d) / 2; pick root nearer to d
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def hessenberg_reduce(h, z):
    """Householder reduction of ``h`` to upper Hessenberg form, accumulating into ``z``."""
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        alpha = -phase * xnorm
        x[0] -= alpha
        vnorm = np.linalg.norm(x)
        if vnorm == 0.0:
            continue
        v = x / vnorm
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        z[:, k + 1:] -= 2.0 * np.outer(z[:, k + 1:] @ v, v.conj())
        h[k + 1, k] = alpha
        h[k + 2:, k] = 0.0


def hessenberg_qr(h, z, tol, max_iter):
    """Reduce ``h`` to Schur form in place.

    On entry ``z`` holds the identity (or any unitary to accumulate into).
    On exit ``h`` is upper triangular and ``z`` satisfies A = Z T Z^H.
    Returns the number of QR sweeps, or -1 when the budget ran out.
    """
    n = h.shape[0]
    hessenberg_reduce(h, z)
    scale = np.abs(h).sum() / max(n, 1)
    if scale == 0.0:
        return 0
    hi = n - 1
    its = 0
    total = 0
    cs = np.empty(n, dtype=float)
    ss = np.empty(n, dtype=complex)
    while hi > 0:
        # look for a negligible subdiagonal entry
        l = hi
        while l > 0:
            s = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if s == 0.0:
                s = scale
            if abs(h[l, l - 1]) <= tol * s:
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            its = 0
            continue
        if total >= max_iter:
            return -1
        its += 1
        total += 1
        if its % 10 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        for k in range(l, hi + 1):
            h[k, k] -= mu
        for k in range(l, hi):
            c, s = _givens(h[k, k], h[k + 1, k])
            cs[k] = c
            ss[k] = s
            x = h[k, k:].copy()
            y = h[k + 1, k:].copy()
            h[k, k:] = c * x + s * y
            h[k + 1, k:] = -s.conjugate() * x + c * y
            h[k + 1, k] = 0.0
        for k in range(l, hi):
            c = cs[k]
            s = ss[k]
            x = h[:k + 2, k].copy()
            y = h[:k + 2, k + 1].copy()
            h[:k + 2, k] = c * x + s.conjugate() * y
            h[:k + 2, k + 1] = -s * x + c * y
            x = z[:, k].copy()
            y = z[:, k + 1].copy()
            z[:, k] = c * x + s.conjugate() * y
            z[:, k + 1] = -s * x + c * y
        for k in range(l, hi + 1):
            h[k, k] += mu
    for j in range(n - 1):
        h[j + 1:, j] = 0.0
    return total


def shifted_triangular_solve(t, lam, b, smin):
    """Solve (T - lam I) w = b in place for upper-triangular T.

    Pivots smaller than ``smin`` in modulus are replaced by ``smin`` so the
    solve stays finite at an eigenvalue, which is what inverse iteration wants.
    """
    n = t.shape[0]
    for i in range(n - 1, -1, -1):
        acc = b[i]
        if i + 1 < n:
            acc -= t[i, i + 1:] @ b[i + 1:]
        piv = t[i, i] - lam
        if abs(piv) < smin:
            piv = smin
        b[i] = acc / piv


def rk4_linear(l, p, v0, h, n_steps, record_every, blowup, out):
    """Classic four-stage Runge-Kutta for dv/dt = p + L v.

    Row 0 of ``out`` receives ``v0``; every ``record_every``-th step is stored
    after it. Returns the number of rows written, or ``-(step + 1)`` when the
    max-abs entry exceeds ``blowup``.
    """
    v = np.array(v0, dtype=complex)
    out[0] = v
    row = 1
    half = 0.5 * h
    sixth = h / 6.0
    for step in range(n_steps):
        k1 = p + l @ v
        k2 = p + l @ (v + half * k1)
        k3 = p + l @ (v + half * k2)
        k4 = p + l @ (v + h * k3)
        v = v + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (step + 1) % record_every == 0:
            if np.max(np.abs(v)) > blowup or not np.all(np.isfinite(v)):
                return -(step + 1)
            out[row] = v
            row += 1
    return row
