"""Dense complex linear algebra used by every other module.

Vectorization is row-major: the N x N matrix ``rho`` maps to the length N**2
vector ``(rho[0, 0], rho[0, 1], ..., rho[N-1, N-1])``, so a superoperator
``A rho B`` is the matrix ``kron(A, B.T)``.

The eigensolver is a balanced Hessenberg / shifted QR reduction to Schur
form, followed by inverse iteration on the triangular factor. The inner
loops run in :mod:`pumped_liouville._kernels` when compiled.
"""
import numpy as np

from ._backend import kernels
from .errors import ConvergenceError, DimensionError, NumericalError, SingularMatrixError
from .tolerances import DEFAULT_TOLERANCES

_EPS = np.finfo(float).eps


def as_complex_matrix(a, name="matrix", square=True):
    """Return ``a`` (or ``a.matrix`` for superoperators) as a finite 2-D complex array."""
    arr = np.asarray(getattr(a, "matrix", a), dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_complex_vector(v, name="vector"):
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def vectorize(rho):
    """Flatten an N x N matrix to length N**2 in row-major (n, m) order."""
    rho = as_complex_matrix(rho, "density matrix")
    return rho.reshape(-1).copy()


def unvectorize(v, n):
    """Inverse of :func:`vectorize`."""
    v = as_complex_vector(v)
    if v.size != n * n:
        raise DimensionError(f"vector of length {v.size} cannot form a {n}x{n} matrix")
    return v.reshape(n, n).copy()


def relative_residual(a, x, b):
    """``|a x - b| / (|a| |x| + |b|)`` with Frobenius / 2-norms."""
    denom = np.linalg.norm(a) * np.linalg.norm(x) + np.linalg.norm(b)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(a @ x - b) / denom)


def solve_linear(a, b, tol=DEFAULT_TOLERANCES):
    """Solve ``a x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If the reciprocal condition number falls below ``tol.singular_rcond``.
        The error carries the number of negligible singular values.
    """
    a = as_complex_matrix(a, "coefficient matrix")
    b = as_complex_vector(b, "right-hand side")
    if b.size != a.shape[0]:
        raise DimensionError(f"right-hand side has length {b.size}, expected {a.shape[0]}")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0:
        raise SingularMatrixError("zero matrix", a.shape[0])
    small = sv <= tol.singular_rcond * sv[0]
    if small.any():
        raise SingularMatrixError(
            f"matrix is singular to working precision (rcond {sv[-1] / sv[0]:.3g})",
            int(small.sum()),
        )
    x = np.linalg.solve(a, b)
    res = relative_residual(a, x, b)
    if res > tol.solve_residual:
        # one step of iterative refinement
        x = x + np.linalg.solve(a, b - a @ x)
        res = relative_residual(a, x, b)
        if res > tol.solve_residual:
            raise NumericalError(f"linear solve residual {res:.3g} exceeds {tol.solve_residual:g}")
    return x


_SCALE_LIMIT = 2.0 ** 200


def balance(a):
    """Diagonal similarity scaling (radix 2) that equalizes row and column norms.

    Returns ``(b, d)`` with ``b = D^-1 a D`` and ``d`` the diagonal of D.
    Powers of two keep the scaling exact in floating point.
    """
    b = np.array(a, dtype=complex)
    n = b.shape[0]
    d = np.ones(n)
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(b[:i, i]).sum() + np.abs(b[i + 1:, i]).sum()
            r = np.abs(b[i, :i]).sum() + np.abs(b[i, i + 1:]).sum()
            if c == 0.0 or r == 0.0:
                continue
            g = r / 2.0
            f = 1.0
            s = c + r
            while c < g and f < _SCALE_LIMIT:
                f *= 2.0
                c *= 4.0
            g = r * 2.0
            while c > g and f > 1.0 / _SCALE_LIMIT:
                f /= 2.0
                c /= 4.0
            if not 1.0 / _SCALE_LIMIT <= d[i] * f <= _SCALE_LIMIT:
                continue
            if (c + r) / f < 0.95 * s:
                done = False
                d[i] *= f
                b[i, :] /= f
                b[:, i] *= f
    return b, d


def schur(a, tol=DEFAULT_TOLERANCES):
    """Complex Schur form ``a = Z T Z^H`` of a (pre-balanced) square matrix."""
    t = np.array(a, dtype=complex, order="C")
    n = t.shape[0]
    z = np.eye(n, dtype=complex)
    info = kernels.hessenberg_qr(t, z, tol.deflation, tol.qr_iterations_per_eigenvalue * n)
    if info < 0:
        raise ConvergenceError(
            f"shifted QR did not converge within {tol.qr_iterations_per_eigenvalue * n} sweeps"
        )
    return t, z


def _start_vector(k, n):
    # deterministic, distinct per eigenvalue, no zero entries
    return np.exp(1j * 0.7 * (k + 1) * np.arange(1, n + 1))


def _inverse_iterate(t, lam, start, basis, smin, steps):
    w = start
    for _ in range(steps):
        w = np.array(w, dtype=complex)
        kernels.shifted_triangular_solve(t, lam, w, smin)
        for u in basis:
            w -= (u.conj() @ w) * u
        nrm = np.linalg.norm(w)
        if nrm == 0.0 or not np.isfinite(nrm):
            return None
        w /= nrm
    return w


def _triangular_eigenvectors(t, tol):
    n = t.shape[0]
    lam = np.diag(t).copy()
    tnorm = np.linalg.norm(t)
    smin = max(_EPS * tnorm, np.finfo(float).tiny * 1e3)
    cluster_tol = tol.cluster_relative * max(tnorm, 1.0)
    target = tol.eig_residual * max(tnorm, 1.0)
    vecs = np.zeros((n, n), dtype=complex)
    for k in range(n):
        start = _start_vector(k, n)
        basis = [vecs[:, j] for j in range(k) if abs(lam[j] - lam[k]) <= cluster_tol]
        best = None
        best_res = np.inf
        # reorthogonalized attempt first; a defective cluster falls back to the plain one
        for trial_basis in ([basis, []] if basis else [[]]):
            w = _inverse_iterate(t, lam[k], start, trial_basis, smin, tol.inverse_iteration_steps)
            if w is None:
                continue
            res = np.linalg.norm(t @ w - lam[k] * w)
            if res < best_res:
                best, best_res = w, res
            if res <= target:
                break
        if best is None:
            raise ConvergenceError(f"inverse iteration failed for eigenvalue {lam[k]}")
        vecs[:, k] = best
    return lam, vecs


def sort_order(values, scale=1.0):
    """Indices ordering ``values`` by real part descending, then imaginary ascending.

    Real parts within ``1e-9 * scale`` of each other count as equal so that
    rounding noise cannot flip a conjugate pair.
    """
    values = np.asarray(values)
    order = sorted(range(len(values)), key=lambda i: -values[i].real)
    tie = 1e-9 * max(scale, 1.0)
    groups = []
    for i in order:
        if groups and abs(values[groups[-1][0]].real - values[i].real) <= tie:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        out.extend(sorted(g, key=lambda i: values[i].imag))
    return np.array(out, dtype=int)


def eig_arrays(a, tol=DEFAULT_TOLERANCES):
    """Eigenvalues and unit-norm right eigenvectors (as columns), sorted.

    Raises
    ------
    ConvergenceError
        If QR fails to converge or an eigenvector misses the residual target.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    anorm = np.linalg.norm(a)
    if n == 1:
        return a[0].copy(), np.ones((1, 1), dtype=complex)
    if anorm == 0.0:
        return np.zeros(n, dtype=complex), np.eye(n, dtype=complex)
    bound = tol.eig_residual * anorm
    # unit scale keeps the inverse-iteration pivot floor away from overflow;
    # balancing can amplify back-transformed errors on near-defective input,
    # so a failed residual check retries without it
    for use_balance in (True, False):
        if use_balance:
            ab, d = balance(a / anorm)
        else:
            ab, d = a / anorm, np.ones(n)
        try:
            t, z = schur(ab, tol)
            lam, w = _triangular_eigenvectors(t, tol)
        except ConvergenceError:
            if use_balance:
                continue
            raise
        lam = lam * anorm
        v = d[:, None] * (z @ w)
        v /= np.linalg.norm(v, axis=0)
        res = np.linalg.norm(a @ v - v * lam, axis=0)
        if np.all(res <= bound):
            break
    else:
        worst = int(np.argmax(res))
        raise ConvergenceError(
            f"eigenvector residual {res[worst] / anorm:.3g} (relative) for eigenvalue {lam[worst]}"
        )
    order = sort_order(lam, anorm)
    return lam[order], v[:, order]


def eig_general(a, tol=DEFAULT_TOLERANCES):
    """Eigenpairs of a general complex matrix.

    Returns a list of ``(eigenvalue, right_vector)`` tuples with unit
    2-norm vectors, ordered by real part descending then imaginary part
    ascending.
    """
    lam, v = eig_arrays(a, tol)
    return [(complex(lam[i]), v[:, i].copy()) for i in range(lam.size)]
