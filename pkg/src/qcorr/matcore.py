"""Small dense linear algebra for two-qubit work.

Everything here is sized for 2x2, 3x3 and 4x4 matrices.  The Hermitian
eigensolver is a cyclic Jacobi iteration written over plain Python complex
scalars, which for these sizes is faster than dispatching to LAPACK through
numpy and is fully deterministic.
"""

from __future__ import annotations

import math

import numpy as np

HERMITIAN_TOL = 1e-9
JACOBI_TOL = 1e-12
MAX_SWEEPS = 60


class HermitianityError(ValueError):
    """Raised when a matrix handed to the Hermitian solver is not Hermitian."""

    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(
            f"matrix is not Hermitian: max |m - m^dagger| = {deviation:.3e} "
            f"exceeds {HERMITIAN_TOL:.0e}"
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


IDENTITY2 = _frozen(np.eye(2, dtype=complex))
SIGMA1 = _frozen(np.array([[0, 1], [1, 0]], dtype=complex))
SIGMA2 = _frozen(np.array([[0, -1j], [1j, 0]], dtype=complex))
SIGMA3 = _frozen(np.array([[1, 0], [0, -1]], dtype=complex))
PAULI = (SIGMA1, SIGMA2, SIGMA3)


def kron(*mats) -> np.ndarray:
    """Kronecker product of any number of matrices, left to right."""
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m))
    return out


def hermiticity_deviation(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _jacobi(m: np.ndarray, want_vectors: bool):
    n = m.shape[0]
    a = [[complex(x) for x in row] for row in m.tolist()]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)] if want_vectors else None

    fro2 = sum(abs(x) ** 2 for row in a for x in row)
    if fro2 == 0.0:
        return [0.0] * n, v
    threshold = (JACOBI_TOL * math.sqrt(fro2)) ** 2

    for _ in range(MAX_SWEEPS):
        off2 = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off2 += 2.0 * abs(a[p][q]) ** 2
        if off2 < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app = a[p][p].real
                aqq = a[q][q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # U = Phase * J;  U_pp = c, U_pq = s, U_qp = -s conj(e), U_qq = c conj(e)
                upp = c
                upq = s
                uqp = -s * phase.conjugate()
                uqq = c * phase.conjugate()
                for k in range(n):
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = akp * upp + akq * uqp
                    a[k][q] = akp * upq + akq * uqq
                cupp, cupq, cuqp, cuqq = upp, upq, uqp.conjugate(), uqq.conjugate()
                for k in range(n):
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = cupp * apk + cuqp * aqk
                    a[q][k] = cupq * apk + cuqq * aqk
                a[p][q] = 0j
                a[q][p] = 0j
                a[p][p] = complex(a[p][p].real, 0.0)
                a[q][q] = complex(a[q][q].real, 0.0)
                if v is not None:
                    for k in range(n):
                        vkp = v[k][p]
                        vkq = v[k][q]
                        v[k][p] = vkp * upp + vkq * uqp
                        v[k][q] = vkp * upq + vkq * uqq
    return [a[i][i].real for i in range(n)], v


def _check_square(m: np.ndarray):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > 4:
        raise ValueError("the Jacobi kernel is limited to n <= 4")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")


def herm_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix with n <= 4.

    Returns ``(w, V)`` with ``w`` ascending and the columns of ``V`` the
    corresponding orthonormal eigenvectors, so that ``m = V diag(w) V^dagger``.
    """
    m = np.asarray(m)
    _check_square(m)
    dev = hermiticity_deviation(m)
    if dev > HERMITIAN_TOL:
        raise HermitianityError(dev)
    w, v = _jacobi(m, want_vectors=True)
    order = sorted(range(len(w)), key=w.__getitem__)
    vals = np.array([w[i] for i in order])
    vecs = np.array(v, dtype=complex)[:, order]
    if not np.iscomplexobj(m):
        # real symmetric input never picks up a phase, keep the vectors real
        vecs = vecs.real.copy()
    return vals, vecs


def herm_eigvals(m) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix with n <= 4."""
    m = np.asarray(m)
    _check_square(m)
    dev = hermiticity_deviation(m)
    if dev > HERMITIAN_TOL:
        raise HermitianityError(dev)
    w, _ = _jacobi(m, want_vectors=False)
    return np.array(sorted(w))


def svd_singular_values(t) -> np.ndarray:
    """Singular values of a real 3x3 matrix, descending.

    Computed as square roots of the eigenvalues of ``t^T t``; tiny negative
    eigenvalues from rounding are clamped to zero.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("matrix has non-finite entries")
    gram = t.T @ t
    gram = 0.5 * (gram + gram.T)
    w = herm_eigvals(gram)
    w = np.where(w < 0.0, 0.0, w)
    return np.sqrt(w)[::-1]


def partial_transpose(rho, subsystem: str = "second") -> np.ndarray:
    """Partial transpose of a 4x4 two-qubit operator on one subsystem."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    t = rho.reshape(2, 2, 2, 2)  # row (i1, i2), column (j1, j2)
    if subsystem == "second":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "first":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'first' or 'second', not {subsystem!r}")
    return t.reshape(4, 4).copy()


def psd_sqrt(m, floor: float = 0.0) -> np.ndarray:
    """Square root of a positive semidefinite Hermitian matrix.

    Eigenvalues below ``floor`` (including negative rounding noise) are set to
    zero before taking the root.
    """
    w, v = herm_eig(m)
    w = np.where(w < floor, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T
