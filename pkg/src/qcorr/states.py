"""Two-qubit state families and their Bloch (Stokes) decomposition.

Basis ordering is ``|HH>, |HV>, |VH>, |VV>`` with ``|H> = (1, 0)``.
Density matrices are plain ``(4, 4)`` complex numpy arrays; the helpers here
validate them on construction and on every public entry point that needs a
physical state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .matcore import HERMITIAN_TOL, IDENTITY2, PAULI, herm_eigvals, hermiticity_deviation, kron

H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)
HV = np.kron(H, V)
VH = np.kron(V, H)
HH = np.kron(H, H)
VV = np.kron(V, V)

SINGLET = (HV - VH) / np.sqrt(2.0)
WHITE_NOISE = np.eye(4, dtype=complex) / 4.0


class UnphysicalStateError(ValueError):
    """A matrix that was supposed to be a density matrix is not one."""


def _check_unit(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def validate_density(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise UnphysicalStateError(f"density matrix must be 4x4, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise UnphysicalStateError("density matrix has non-finite entries")
    dev = hermiticity_deviation(rho)
    if dev > tol:
        raise UnphysicalStateError(f"not Hermitian: max |rho - rho^dagger| = {dev:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise UnphysicalStateError(f"trace is {tr:.12g}, expected 1")
    lo = herm_eigvals(rho)[0]
    if lo < -tol:
        raise UnphysicalStateError(f"not positive semidefinite: min eigenvalue {lo:.3e}")
    return rho


def werner(p: float) -> np.ndarray:
    """Singlet mixed with white noise, ``p |psi-><psi-| + (1-p) I/4``."""
    p = _check_unit("p", p)
    return p * projector(SINGLET) + (1.0 - p) * WHITE_NOISE


def psi_q(q: float, sign: int = -1) -> np.ndarray:
    """``sqrt(q)|HV> + sign*sqrt(1-q)|VH>``."""
    q = _check_unit("q", q)
    return np.sqrt(q) * HV + sign * np.sqrt(1.0 - q) * VH


def phi_q(q: float) -> np.ndarray:
    """``sqrt(q)|HH> + sqrt(1-q)|VV>``."""
    q = _check_unit("q", q)
    return np.sqrt(q) * HH + np.sqrt(1.0 - q) * VV


def gws(p: float, q: float) -> np.ndarray:
    """Generalized Werner state built on ``sqrt(q)|HV> - sqrt(1-q)|VH>``."""
    p = _check_unit("p", p)
    return p * projector(psi_q(q)) + (1.0 - p) * WHITE_NOISE


def gws_phi(p: float, q: float) -> np.ndarray:
    """Generalized Werner state built on ``sqrt(q)|HH> + sqrt(1-q)|VV>``."""
    p = _check_unit("p", p)
    return p * projector(phi_q(q)) + (1.0 - p) * WHITE_NOISE


def dephased_bell(p: float, q: float) -> np.ndarray:
    """Mixture ``p|psi-_q><psi-_q| + (1-p)|psi+_q><psi+_q|``."""
    p = _check_unit("p", p)
    return p * projector(psi_q(q, -1)) + (1.0 - p) * projector(psi_q(q, +1))


FAMILIES = {
    "werner": lambda p, q=None: werner(p),
    "gws": gws,
    "gws_phi": gws_phi,
    "dephased": dephased_bell,
}


def family_state(family: str, p: float, q: float | None = None) -> np.ndarray:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    if family != "werner" and q is None:
        raise ValueError(f"family {family!r} needs a q parameter")
    return FAMILIES[family](p, q)


@dataclass(frozen=True, eq=False)
class BlochDecomposition:
    """Local Bloch vectors ``u``, ``v`` and the Stokes matrix ``T``."""

    u: np.ndarray
    v: np.ndarray
    T: np.ndarray

    def density(self) -> np.ndarray:
        """Reassemble the density matrix from its Bloch components."""
        rho = np.eye(4, dtype=complex)
        for i, s in enumerate(PAULI):
            rho = rho + self.u[i] * kron(s, IDENTITY2) + self.v[i] * kron(IDENTITY2, s)
            for j, t in enumerate(PAULI):
                rho = rho + self.T[i, j] * kron(s, t)
        return rho / 4.0

    def to_dict(self) -> dict:
        return {"u": self.u.tolist(), "v": self.v.tolist(), "T": self.T.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BlochDecomposition":
        u = np.asarray(d["u"], dtype=float)
        v = np.asarray(d["v"], dtype=float)
        T = np.asarray(d["T"], dtype=float)
        if u.shape != (3,) or v.shape != (3,) or T.shape != (3, 3):
            raise ValueError("Bloch decomposition needs u[3], v[3] and T[3][3]")
        return cls(u, v, T)


def bloch_decompose(rho) -> BlochDecomposition:
    rho = validate_density(rho)
    u = np.array([np.trace(rho @ kron(s, IDENTITY2)).real for s in PAULI])
    v = np.array([np.trace(rho @ kron(IDENTITY2, s)).real for s in PAULI])
    T = np.array([[np.trace(rho @ kron(s, t)).real for t in PAULI] for s in PAULI])
    return BlochDecomposition(u, v, T)


def corr_R(decomp: BlochDecomposition):
    """Correlation matrix ``R = T^T T``."""
    from .measures import CorrMatrixR

    T = np.asarray(decomp.T, dtype=float)
    return CorrMatrixR(T.T @ T)


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.trace(rho @ rho).real)


def random_pure(seed=None) -> np.ndarray:
    """Haar-random pure state as a normalized 4-vector."""
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return psi / np.linalg.norm(psi)


def random_density(seed=None, rank: int = 4) -> np.ndarray:
    """Random density matrix ``G G^dagger / Tr`` with ``G`` a 4 x rank Ginibre matrix."""
    if rank not in (1, 2, 3, 4):
        raise ValueError(f"rank must be 1..4, got {rank!r}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_unitary(seed=None, dim: int = 2) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def local_rotate(rho, ua, ub) -> np.ndarray:
    u = kron(ua, ub)
    return u @ rho @ u.conj().T


def density_to_dict(rho) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {"re": rho.real.tolist(), "im": rho.imag.tolist()}


def density_from_dict(d: dict) -> np.ndarray:
    try:
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros((4, 4))), dtype=float)
    except (KeyError, TypeError) as exc:
        raise UnphysicalStateError(f"density matrix JSON needs 're' and 'im' fields: {exc}") from None
    if re.shape != (4, 4) or im.shape != (4, 4):
        raise UnphysicalStateError("density matrix JSON fields must be 4x4 arrays")
    return validate_density(re + 1j * im)


def density_to_json(rho) -> str:
    return json.dumps(density_to_dict(rho))


def density_from_json(text: str) -> np.ndarray:
    return density_from_dict(json.loads(text))
