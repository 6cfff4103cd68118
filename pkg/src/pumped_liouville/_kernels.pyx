# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Schur reduction, shifted triangular solve, RK4 stepping.

Same signatures and in-place semantics as ``_kernels_py``.
"""
from libc.math cimport sqrt, hypot

ctypedef double complex cplx


cdef inline double cabs(cplx z) nogil:
    return hypot(z.real, z.imag)


cdef inline cplx conj(cplx z) nogil:
    return z.real - 1j * z.imag


cdef inline cplx csqrt(cplx z) nogil:
    cdef double r = cabs(z)
    cdef double re, im
    if r == 0.0:
        return 0.0
    re = sqrt(0.5 * (r + z.real))
    im = sqrt(0.5 * (r - z.real))
    if z.imag < 0.0:
        im = -im
    return re + 1j * im


cdef inline cplx wilkinson(cplx a, cplx b, cplx c, cplx d) nogil:
    cdef cplx half = 0.5 * (a - d)
    cdef cplx disc = csqrt(half * half + b * c)
    cdef cplx mu1 = d - half + disc
    cdef cplx mu2 = d - half - disc
    if cabs(mu1 - d) <= cabs(mu2 - d):
        return mu1
    return mu2


def hessenberg_reduce(cplx[:, ::1] h, cplx[:, ::1] z):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t k, i, j, m
    cdef double xnorm, vnorm
    cdef cplx x0, phase, alpha, acc
    cdef cplx[::1] v
    if n < 3:
        return
    import numpy as np
    v = np.empty(n, dtype=complex)
    for k in range(n - 2):
        m = n - k - 1
        xnorm = 0.0
        for i in range(m):
            xnorm += h[k + 1 + i, k].real ** 2 + h[k + 1 + i, k].imag ** 2
        xnorm = sqrt(xnorm)
        if xnorm == 0.0:
            continue
        x0 = h[k + 1, k]
        if cabs(x0) != 0.0:
            phase = x0 / cabs(x0)
        else:
            phase = 1.0
        alpha = -phase * xnorm
        for i in range(m):
            v[i] = h[k + 1 + i, k]
        v[0] = v[0] - alpha
        vnorm = 0.0
        for i in range(m):
            vnorm += v[i].real ** 2 + v[i].imag ** 2
        vnorm = sqrt(vnorm)
        if vnorm == 0.0:
            continue
        for i in range(m):
            v[i] = v[i] / vnorm
        # rows k+1.. : h <- h - 2 v (v^H h)
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc = acc + conj(v[i]) * h[k + 1 + i, j]
            for i in range(m):
                h[k + 1 + i, j] = h[k + 1 + i, j] - 2.0 * v[i] * acc
        # cols k+1.. : h <- h - 2 (h v) v^H ; same for z
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc = acc + h[j, k + 1 + i] * v[i]
            for i in range(m):
                h[j, k + 1 + i] = h[j, k + 1 + i] - 2.0 * acc * conj(v[i])
            acc = 0.0
            for i in range(m):
                acc = acc + z[j, k + 1 + i] * v[i]
            for i in range(m):
                z[j, k + 1 + i] = z[j, k + 1 + i] - 2.0 * acc * conj(v[i])
        h[k + 1, k] = alpha
        for i in range(k + 2, n):
            h[i, k] = 0.0


def hessenberg_qr(cplx[:, ::1] h, cplx[:, ::1] z, double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t hi, l, k, i, j, its, total
    cdef double s, scale, c, nrm, aa
    cdef cplx mu, sk, x, y, a, b
    cdef double[::1] cs
    cdef cplx[::1] ss
    cdef int failed = 0
    import numpy as np
    hessenberg_reduce(h, z)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += cabs(h[i, j])
    scale /= n if n > 0 else 1
    if scale == 0.0:
        return 0
    cs = np.empty(n, dtype=float)
    ss = np.empty(n, dtype=complex)
    hi = n - 1
    its = 0
    total = 0
    with nogil:
        while hi > 0:
            l = hi
            while l > 0:
                s = cabs(h[l - 1, l - 1]) + cabs(h[l, l])
                if s == 0.0:
                    s = scale
                if cabs(h[l, l - 1]) <= tol * s:
                    h[l, l - 1] = 0.0
                    break
                l -= 1
            if l == hi:
                hi -= 1
                its = 0
                continue
            if total >= max_iter:
                failed = 1
                break
            its += 1
            total += 1
            if its % 10 == 0:
                mu = h[hi, hi] + 0.75 * cabs(h[hi, hi - 1])
            else:
                mu = wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
            for k in range(l, hi + 1):
                h[k, k] = h[k, k] - mu
            for k in range(l, hi):
                a = h[k, k]
                b = h[k + 1, k]
                aa = cabs(a)
                if aa == 0.0:
                    c = 0.0
                    sk = 1.0
                else:
                    nrm = hypot(aa, cabs(b))
                    c = aa / nrm
                    sk = (a / aa) * conj(b) / nrm
                cs[k] = c
                ss[k] = sk
                for j in range(k, n):
                    x = h[k, j]
                    y = h[k + 1, j]
                    h[k, j] = c * x + sk * y
                    h[k + 1, j] = -conj(sk) * x + c * y
                h[k + 1, k] = 0.0
            for k in range(l, hi):
                c = cs[k]
                sk = ss[k]
                for i in range(k + 2):
                    x = h[i, k]
                    y = h[i, k + 1]
                    h[i, k] = c * x + conj(sk) * y
                    h[i, k + 1] = -sk * x + c * y
                for i in range(n):
                    x = z[i, k]
                    y = z[i, k + 1]
                    z[i, k] = c * x + conj(sk) * y
                    z[i, k + 1] = -sk * x + c * y
            for k in range(l, hi + 1):
                h[k, k] = h[k, k] + mu
        if not failed:
            for j in range(n - 1):
                for i in range(j + 1, n):
                    h[i, j] = 0.0
    if failed:
        return -1
    return total


def shifted_triangular_solve(cplx[:, ::1] t, cplx lam, cplx[::1] b, double smin):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j
    cdef cplx acc, piv
    with nogil:
        for i in range(n - 1, -1, -1):
            acc = b[i]
            for j in range(i + 1, n):
                acc = acc - t[i, j] * b[j]
            piv = t[i, i] - lam
            if cabs(piv) < smin:
                piv = smin
            b[i] = acc / piv


cdef inline void affine_matvec(cplx[:, ::1] l, cplx[::1] p, cplx[::1] x,
                               cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t n = l.shape[0]
    cdef Py_ssize_t i, j
    cdef cplx acc
    for i in range(n):
        acc = p[i]
        for j in range(n):
            acc = acc + l[i, j] * x[j]
        out[i] = acc


def rk4_linear(cplx[:, ::1] l, cplx[::1] p, cplx[::1] v0, double h,
               Py_ssize_t n_steps, Py_ssize_t record_every, double blowup,
               cplx[:, ::1] out):
    cdef Py_ssize_t n = l.shape[0]
    cdef Py_ssize_t i, step, row
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef double biggest, mag
    cdef Py_ssize_t blown = 0
    cdef cplx[::1] v, tmp, k1, k2, k3, k4
    import numpy as np
    v = np.array(v0, dtype=complex)
    tmp = np.empty(n, dtype=complex)
    k1 = np.empty(n, dtype=complex)
    k2 = np.empty(n, dtype=complex)
    k3 = np.empty(n, dtype=complex)
    k4 = np.empty(n, dtype=complex)
    for i in range(n):
        out[0, i] = v[i]
    row = 1
    with nogil:
        for step in range(n_steps):
            affine_matvec(l, p, v, k1)
            for i in range(n):
                tmp[i] = v[i] + half * k1[i]
            affine_matvec(l, p, tmp, k2)
            for i in range(n):
                tmp[i] = v[i] + half * k2[i]
            affine_matvec(l, p, tmp, k3)
            for i in range(n):
                tmp[i] = v[i] + h * k3[i]
            affine_matvec(l, p, tmp, k4)
            for i in range(n):
                v[i] = v[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if (step + 1) % record_every == 0:
                biggest = 0.0
                for i in range(n):
                    mag = cabs(v[i])
                    if mag != mag or mag > biggest:
                        biggest = mag
                # NaN propagates through biggest and fails the comparison below
                if not (biggest <= blowup):
                    blown = step + 1
                    break
                for i in range(n):
                    out[row, i] = v[i]
                row += 1
    if blown:
        return -blown
    return row
