"""Biorthogonal eigendecomposition of the Liouvillian and the metric operator.

Right eigenvectors ``x`` solve ``L x = lam x``; left eigenvectors ``y`` solve
``L^H y = conj(lam) y``; both are stored as matrix columns and normalized so
that ``Y^H X = I``. The metric ``Omega = Y Y^H`` then satisfies
``X^H Omega X = I``, and ``<<d|Omega|d>>`` decays monotonically along every
solution of ``d' = L d``.

Gauge: each right vector has unit 2-norm and its first non-negligible
component real and positive. Inside a degenerate cluster the left vectors
are re-mixed by inverting the cluster Gram matrix. Omega depends on this
gauge; the identities checked here do not.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DefectiveMatrixError, NonDecayingModeError, NumericalError
from .linalg import as_complex_matrix, eig_arrays
from .liouvillian import Superoperator
from .tolerances import DEFAULT_TOLERANCES


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    right: np.ndarray  # columns x_nu
    left: np.ndarray  # columns y_nu
    cluster_tol: float
    clusters: tuple

    @property
    def size(self):
        return self.eigenvalues.size

    def biorthonormality_residual(self):
        return float(np.max(np.abs(self.left.conj().T @ self.right - np.eye(self.size))))

    def completeness_residual(self):
        return float(np.max(np.abs(self.right @ self.left.conj().T - np.eye(self.size))))


@dataclass(frozen=True)
class MetricOperator:
    omega: np.ndarray
    omega_inverse: np.ndarray


def _matrix_of(l):
    if isinstance(l, Superoperator):
        return l.matrix
    return as_complex_matrix(l, "superoperator")


def cluster_indices(values, tol):
    """Group indices whose values are chained within ``tol`` of each other."""
    values = np.asarray(values)
    n = values.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(j)] = find(i)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return tuple(tuple(g) for g in sorted(groups.values(), key=lambda g: g[0]))


def _fix_phase(v, rel=1e-8):
    mags = np.abs(v)
    first = int(np.argmax(mags > rel * mags.max()))
    return v * (abs(v[first]) / v[first])


def decompose(l, cluster_tol=None, tol=DEFAULT_TOLERANCES):
    """Biorthonormal spectral decomposition of a decaying generator.

    Parameters
    ----------
    l : Superoperator or array
    cluster_tol : float, optional
        Eigenvalues closer than this are treated as one degenerate cluster.
        Defaults to ``tol.cluster_relative * |L|_F``.

    Raises
    ------
    NonDecayingModeError
        If some eigenvalue has ``Re lam >= -tol.decay_margin``.
    DefectiveMatrixError
        If a cluster's Gram matrix ``Y_c^H X_c`` is singular.
    """
    a = _matrix_of(l)
    n = a.shape[0]
    if cluster_tol is None:
        cluster_tol = tol.cluster_relative * max(np.linalg.norm(a), 1.0)
    lam, x = eig_arrays(a, tol)
    slowest = lam[int(np.argmax(lam.real))]
    if slowest.real >= -tol.decay_margin:
        raise NonDecayingModeError(complex(slowest))
    x = np.column_stack([_fix_phase(x[:, k]) for k in range(n)])

    mu, y_raw = eig_arrays(a.conj().T, tol)
    mu = mu.conj()
    clusters = cluster_indices(lam, cluster_tol)
    y = np.zeros_like(x)
    used = np.zeros(n, dtype=bool)
    for members in clusters:
        idx = list(members)
        cands = [
            j
            for j in range(n)
            if not used[j] and min(abs(mu[j] - lam[i]) for i in idx) <= cluster_tol
        ]
        if len(cands) != len(idx):
            raise NumericalError(
                f"left and right spectra disagree near {lam[idx[0]]}: "
                f"{len(idx)} right vs {len(cands)} left eigenvalues"
            )
        used[cands] = True
        xc = x[:, idx]
        yc = y_raw[:, cands]
        gram = yc.conj().T @ xc
        smallest = np.linalg.svd(gram, compute_uv=False).min()
        if smallest <= tol.defective_gram:
            raise DefectiveMatrixError(
                f"eigenvalue {lam[idx[0]]} (multiplicity {len(idx)}) has no complete "
                f"eigenbasis (Gram singular value {smallest:.3g})"
            )
        # Y_c <- Y_c G^{-H} makes Y_c^H X_c = I
        y[:, idx] = np.linalg.solve(gram, yc.conj().T).conj().T

    dec = SpectralDecomposition(lam, x, y, float(cluster_tol), clusters)
    bio = dec.biorthonormality_residual()
    if bio > tol.biorthonormality:
        raise NumericalError(f"biorthonormality residual {bio:.3g} exceeds {tol.biorthonormality:g}")
    return dec


def build_metric(dec, tol=DEFAULT_TOLERANCES):
    """``Omega = sum y y^H`` and ``Omega^-1 = sum x x^H``."""
    omega = dec.left @ dec.left.conj().T
    omega_inv = dec.right @ dec.right.conj().T
    low = np.linalg.eigvalsh(0.5 * (omega + omega.conj().T)).min()
    if low <= 0.0:
        raise NumericalError(f"metric is not positive definite (min eigenvalue {low:.3g})")
    prod = np.max(np.abs(omega @ omega_inv - np.eye(dec.size)))
    if prod > tol.biorthonormality:
        raise NumericalError(f"Omega Omega^-1 deviates from identity by {prod:.3g}")
    return MetricOperator(omega, omega_inv)


def metric_gram(dec, m):
    """Matrix of ``M_Omega[x_nu, x_mu]``; the identity for a valid pair."""
    return dec.right.conj().T @ m.omega @ dec.right


def conjugated_generator(l, dec=None, tol=DEFAULT_TOLERANCES):
    """``L*``: same eigenvectors as ``L``, eigenvalues complex-conjugated.

    Built as ``X conj(Lambda) X^-1`` with ``X^-1`` from a linear solve, so it
    does not reuse the left eigenvectors.
    """
    a = _matrix_of(l)
    if dec is None:
        dec = decompose(a, tol=tol)
    x = dec.right
    return x @ np.diag(dec.eigenvalues.conj()) @ np.linalg.solve(x, np.eye(x.shape[0]))


def similarity_residuals(l, m, dec=None, tol=DEFAULT_TOLERANCES):
    """Relative residuals of ``Omega L Omega^-1 = L*^H`` and its four rearrangements."""
    a = _matrix_of(l)
    lstar = conjugated_generator(a, dec, tol)
    lsd = lstar.conj().T
    om, oi = m.omega, m.omega_inverse
    ln = np.linalg.norm(a)
    on, oin = np.linalg.norm(om), np.linalg.norm(oi)
    return {
        "similarity": float(np.linalg.norm(om @ a @ oi - lsd) / ln),
        "omega_l": float(np.linalg.norm(om @ a - lsd @ om) / (ln * on)),
        "l_omega_inv": float(np.linalg.norm(a @ oi - oi @ lsd) / (ln * oin)),
        "omega_lstar": float(np.linalg.norm(om @ lstar - a.conj().T @ om) / (ln * on)),
        "lstar_omega_inv": float(np.linalg.norm(lstar @ oi - oi @ a.conj().T) / (ln * oin)),
    }


def verify_similarity(l, m, dec=None, tol=DEFAULT_TOLERANCES):
    """Largest residual from :func:`similarity_residuals`."""
    return max(similarity_residuals(l, m, dec, tol).values())


def conjugate_partners(dec):
    """Pairs ``(mu, nu)`` with ``lam_nu = conj(lam_mu)`` and ``Im lam_mu > 0``."""
    lam = dec.eigenvalues
    pairs = []
    for i in range(lam.size):
        if lam[i].imag <= dec.cluster_tol:
            continue
        dist = np.abs(lam - lam[i].conjugate())
        j = int(np.argmin(dist))
        if dist[j] <= dec.cluster_tol and j != i:
            pairs.append((i, j))
    return pairs


def conjugate_pair_orthogonality(dec, m):
    """Max ``|<<x_mu|Omega|x_mu*>>|`` over conjugate eigenvalue pairs (0 if none)."""
    worst = 0.0
    for i, j in conjugate_partners(dec):
        val = abs(dec.right[:, i].conj() @ m.omega @ dec.right[:, j])
        worst = max(worst, float(val))
    return worst


def reconstruct(dec):
    """``sum lam |x>><<y|`` as a superoperator."""
    matrix = dec.right @ np.diag(dec.eigenvalues) @ dec.left.conj().T
    n = int(round(np.sqrt(dec.size)))
    if n * n == dec.size:
        return Superoperator(n, matrix)
    return matrix
