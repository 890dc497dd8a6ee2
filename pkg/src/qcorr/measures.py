"""Entanglement, steering and Bell-nonlocality quantifiers for two qubits.

Most quantifiers depend on the state only through the 3x3 correlation matrix
``R = T^T T``; concurrence and negativity need the full density matrix.
Every positive-part clamp goes through :func:`theta`, which snaps arguments
within ``THETA_EPS`` of zero to exactly zero so that classification at the
thresholds is reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np

from .matcore import HERMITIAN_TOL, PAULI, SIGMA2, herm_eig, herm_eigvals, kron, partial_transpose
from .states import bloch_decompose, validate_density

THETA_EPS = 1e-12
# eigenvalues of the spin-flipped product below this are numerical zeros
SPECTRAL_FLOOR = 1e-14

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

WERNER_REGIONS = ("separable", "entangled-unsteerable", "steerable-local", "nonlocal")


def theta(x: float) -> float:
    """Positive part ``max(x, 0)`` with arguments within THETA_EPS of 0 set to 0."""
    x = float(x)
    return x if x > THETA_EPS else 0.0


def chi(x: float) -> int:
    """Heaviside step: 1 for ``x > THETA_EPS``, else 0."""
    return 1 if x > THETA_EPS else 0


@dataclass(frozen=True, eq=False)
class CorrMatrixR:
    """Symmetric 3x3 correlation matrix with its spectrum.

    The stored matrix is symmetrized on construction.  Negative eigenvalues
    from noisy estimates are kept in :attr:`eigenvalues` but clamped to zero
    in :attr:`clamped_eigenvalues`, which is what the measures use.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"R must be 3x3, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("R has non-finite entries")
        asym = float(np.max(np.abs(m - m.T)))
        if asym > HERMITIAN_TOL:
            raise ValueError(f"R is not symmetric: max |R - R^T| = {asym:.3e}")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return herm_eigvals(self.matrix)

    @cached_property
    def clamped_eigenvalues(self) -> np.ndarray:
        return np.where(self.eigenvalues < 0.0, 0.0, self.eigenvalues)

    @property
    def min_raw_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def trace(self) -> float:
        return float(self.clamped_eigenvalues.sum())

    @property
    def trace_ok(self) -> bool:
        return self.trace <= 3.0 + HERMITIAN_TOL

    def to_list(self) -> list:
        return self.matrix.tolist()


def as_corr(R) -> CorrMatrixR:
    return R if isinstance(R, CorrMatrixR) else CorrMatrixR(np.asarray(R, dtype=float))


def fef(R) -> float:
    """Fully entangled fraction ``(1/2) theta(Tr sqrt(R) - 1)``."""
    lam = as_corr(R).clamped_eigenvalues
    return 0.5 * theta(float(np.sqrt(lam).sum()) - 1.0)


def m_param(R) -> float:
    """Sum of the two largest eigenvalues of R."""
    lam = as_corr(R).clamped_eigenvalues
    return float(lam[1] + lam[2])


def bell_B(R) -> float:
    return math.sqrt(theta(m_param(R) - 1.0))


def bell_Bprime(R) -> float:
    return theta(math.sqrt(m_param(R)) - 1.0) / (SQRT2 - 1.0)


def steering_S(R) -> float:
    return math.sqrt(0.5 * theta(as_corr(R).trace - 1.0))


def steering_S3(R) -> float:
    return theta(math.sqrt(as_corr(R).trace) - 1.0) / (SQRT3 - 1.0)


def steering_S2(R) -> float:
    # identical to bell_Bprime: sqrt(Tr R - min eig) is sqrt(M)
    return theta(math.sqrt(m_param(R)) - 1.0) / (SQRT2 - 1.0)


def s3_from_s(s: float) -> float:
    """Monotone map from S to S3."""
    return (math.sqrt(2.0 * s * s + 1.0) - 1.0) / (SQRT3 - 1.0)


def bprime_from_b(b: float) -> float:
    """Monotone map from B to B'."""
    return (math.sqrt(b * b + 1.0) - 1.0) / (SQRT2 - 1.0)


_YY = kron(SIGMA2, SIGMA2)


def concurrence(rho) -> float:
    """Wootters concurrence.

    The spectrum of ``rho (Y x Y) rho* (Y x Y)`` is taken from the Hermitian
    matrix ``sqrt(rho) rho~ sqrt(rho)``, which has the same eigenvalues.
    """
    rho = validate_density(rho)
    w, v = herm_eig(rho)
    w = np.where(w < SPECTRAL_FLOOR, 0.0, w)
    root = (v * np.sqrt(w)) @ v.conj().T
    flipped = _YY @ rho.conj() @ _YY
    h = root @ flipped @ root
    h = 0.5 * (h + h.conj().T)
    lam = herm_eigvals(h)[::-1]
    lam = np.where(lam < SPECTRAL_FLOOR, 0.0, lam)
    s = np.sqrt(lam)
    return theta(s[0] - s[1] - s[2] - s[3])


def negativity(rho) -> float:
    """``theta(-2 mu_min)`` with ``mu_min`` the smallest eigenvalue of the partial transpose."""
    rho = validate_density(rho)
    mu = herm_eigvals(partial_transpose(rho))[0]
    return theta(-2.0 * mu)


MEASURE_NAMES = (
    "fef",
    "concurrence",
    "negativity",
    "steering_S",
    "steering_S3",
    "steering_S2",
    "bell_B",
    "bell_Bprime",
    "M",
    "hierarchy_H",
)


@dataclass(frozen=True)
class MeasureSet:
    """All scalar quantifiers of one state.

    ``concurrence`` and ``negativity`` are ``None`` when only R is known.
    """

    fef: float
    concurrence: float | None
    negativity: float | None
    steering_S: float
    steering_S3: float
    steering_S2: float
    bell_B: float
    bell_Bprime: float
    M: float
    hierarchy_H: int

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, x in d.items():
            if x is not None and not math.isfinite(x):
                raise ValueError(f"measure {k} is not finite")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)

    def max_abs_diff(self, other: "MeasureSet") -> float:
        worst = 0.0
        for k in MEASURE_NAMES:
            a, b = getattr(self, k), getattr(other, k)
            if a is None or b is None:
                continue
            worst = max(worst, abs(a - b))
        return worst


def hierarchy_H(measures) -> int:
    """Number of correlation classes present: chi(B) + chi(S) + chi(FEF)."""
    if isinstance(measures, MeasureSet):
        b, s, f = measures.bell_B, measures.steering_S, measures.fef
    else:
        b, s, f = measures["bell_B"], measures["steering_S"], measures["fef"]
    return chi(b) + chi(s) + chi(f)


def measures_from_R(R, rho=None) -> MeasureSet:
    R = as_corr(R)
    b = bell_B(R)
    s = steering_S(R)
    f = fef(R)
    s2 = steering_S2(R)
    return MeasureSet(
        fef=f,
        concurrence=None if rho is None else concurrence(rho),
        negativity=None if rho is None else negativity(rho),
        steering_S=s,
        steering_S3=steering_S3(R),
        steering_S2=s2,
        bell_B=b,
        bell_Bprime=bell_Bprime(R),
        M=m_param(R),
        hierarchy_H=chi(b) + chi(s) + chi(f),
    )


def measure_set(rho) -> MeasureSet:
    """Full MeasureSet of a density matrix via its Bloch decomposition."""
    rho = validate_density(rho)
    T = bloch_decompose(rho).T
    return measures_from_R(CorrMatrixR(T.T @ T), rho=rho)


# ---------------------------------------------------------------- closed forms


def _unit(name, x):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def thresholds(q: float) -> tuple[float, float, float]:
    """Mixing parameters ``(p_E, p_S, p_B)`` at which a GWS becomes entangled,
    steerable and Bell nonlocal."""
    q = _unit("q", q)
    qq = q * (1.0 - q)
    p_e = 1.0 / (1.0 + 4.0 * math.sqrt(qq))
    p_s = (1.0 + 8.0 * qq) ** -0.5
    p_b = (1.0 + 4.0 * qq) ** -0.5
    return p_e, p_s, p_b


def gws_oracle(p: float, q: float) -> MeasureSet:
    """Closed-form MeasureSet of the generalized Werner state."""
    p = _unit("p", p)
    q = _unit("q", q)
    qq = q * (1.0 - q)
    ent = 0.5 * theta(p * (1.0 + 4.0 * math.sqrt(qq)) - 1.0)
    s = math.sqrt(0.5 * theta(8.0 * p * p * qq + p * p - 1.0))
    s3 = theta(p * math.sqrt(1.0 + 8.0 * qq) - 1.0) / (SQRT3 - 1.0)
    b = math.sqrt(theta(p * p * (1.0 + 4.0 * qq) - 1.0))
    bp = theta(p * math.sqrt(1.0 + 4.0 * qq) - 1.0) / (SQRT2 - 1.0)
    return MeasureSet(
        fef=ent,
        concurrence=ent,
        negativity=ent,
        steering_S=s,
        steering_S3=s3,
        steering_S2=bp,
        bell_B=b,
        bell_Bprime=bp,
        M=p * p * (1.0 + 4.0 * qq),
        hierarchy_H=chi(b) + chi(s) + chi(ent),
    )


def werner_oracle(p: float) -> MeasureSet:
    return gws_oracle(p, 0.5)


def classify_werner(p: float) -> str:
    """Region of the Werner hierarchy; boundaries belong to the weaker class."""
    p = _unit("p", p)
    if p <= 1.0 / 3.0:
        return WERNER_REGIONS[0]
    if p <= 1.0 / SQRT3:
        return WERNER_REGIONS[1]
    if p <= 1.0 / SQRT2:
        return WERNER_REGIONS[2]
    return WERNER_REGIONS[3]


# ------------------------------------------------------------- CJWR functional


@dataclass(frozen=True, eq=False)
class MeasurementDirections:
    """Alice's unit vectors and Bob's orthonormal vectors, one pair per measurement."""

    alice: np.ndarray
    bob: np.ndarray

    def __post_init__(self):
        a = np.array(self.alice, dtype=float)
        b = np.array(self.bob, dtype=float)
        if a.ndim != 2 or a.shape[1] != 3 or a.shape != b.shape or a.shape[0] not in (2, 3):
            raise ValueError("need n in {2, 3} three-vectors for each party")
        if np.max(np.abs(np.linalg.norm(a, axis=1) - 1.0)) > 1e-12:
            raise ValueError("Alice's directions must be unit vectors")
        if np.max(np.abs(b @ b.T - np.eye(b.shape[0]))) > 1e-12:
            raise ValueError("Bob's directions must be orthonormal")
        object.__setattr__(self, "alice", a)
        object.__setattr__(self, "bob", b)

    @property
    def n(self) -> int:
        return self.alice.shape[0]


def _dot_sigma(r) -> np.ndarray:
    return r[0] * PAULI[0] + r[1] * PAULI[1] + r[2] * PAULI[2]


def cjwr_F(rho, dirs: MeasurementDirections) -> float:
    """``(1/sqrt(n)) |sum_i <A_i x B_i>|`` for the given measurement directions."""
    rho = validate_density(rho)
    total = 0.0
    for a, b in zip(dirs.alice, dirs.bob):
        total += np.trace(rho @ kron(_dot_sigma(a), _dot_sigma(b))).real
    return abs(total) / math.sqrt(dirs.n)


def random_directions(n: int, rng) -> MeasurementDirections:
    a = rng.standard_normal((n, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    return MeasurementDirections(a, q.T[:n].copy())


def _rotation(angles) -> np.ndarray:
    a, b, c = angles
    ca, sa, cb, sb, cc, sc = math.cos(a), math.sin(a), math.cos(b), math.sin(b), math.cos(c), math.sin(c)
    rz1 = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    rz2 = np.array([[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]])
    return rz1 @ ry @ rz2


def maximize_cjwr(rho, n: int = 3, restarts: int = 32, seed=0, tol: float = 1e-6):
    """Maximize the CJWR functional over measurement directions.

    Bob's orthonormal frame is searched by coordinate ascent over Euler angles
    from random starts; for a fixed frame Alice's best unit vectors are
    ``T b_i / |T b_i|``.  Returns ``(value, directions)``.
    """
    rho = validate_density(rho)
    T = bloch_decompose(rho).T
    rng = np.random.default_rng(seed)

    def value(angles):
        bob = _rotation(angles).T[:n]
        return float(np.linalg.norm(bob @ T.T, axis=1).sum()) / math.sqrt(n)

    best_val, best_angles = -1.0, None
    for _ in range(restarts):
        x = rng.uniform(-math.pi, math.pi, size=3)
        fx = value(x)
        step = 0.5
        while step > tol:
            improved = False
            for k in range(3):
                for sgn in (1.0, -1.0):
                    y = x.copy()
                    y[k] += sgn * step
                    fy = value(y)
                    if fy > fx:
                        x, fx, improved = y, fy, True
                        break
            if not improved:
                step *= 0.5
        if fx > best_val:
            best_val, best_angles = fx, x

    bob = _rotation(best_angles).T[:n].copy()
    alice = bob @ T.T
    norms = np.linalg.norm(alice, axis=1, keepdims=True)
    alice = np.where(norms > 1e-15, alice / np.where(norms > 1e-15, norms, 1.0), np.array([1.0, 0.0, 0.0]))
    dirs = MeasurementDirections(alice, bob)
    return cjwr_F(rho, dirs), dirs
