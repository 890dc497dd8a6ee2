"""Two-copy collective measurement of the correlation matrix.

Two copies of a state occupy photons (1, 2) and (3, 4).  Photons 2 and 4 meet
on a beam splitter; a coincidence at its outputs projects them onto the
singlet when they interfere, and happens with probability 1/2 regardless of
polarization when they are distinguishable.  Photons 1 and 3 are projected
locally onto one of six polarization states each.

From the four-fold coincidence probabilities the matrix elements

    A_ij = Tr[(rho x rho) sigma_i(1) Pi(2,4) sigma_j(3)],   Pi = -4 |psi-><psi-|
    B_ij = Tr[(rho x rho) sigma_i(1) sigma_j(3)]

follow as signed sums, and ``A + B = T T^T``, which shares its spectrum with
``R = T^T T``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .matcore import PAULI, kron
from .measures import CorrMatrixR, as_corr
from .states import SINGLET, WHITE_NOISE, projector, validate_density

POLARIZATIONS = ("H", "V", "D", "A", "R", "L")
REGIMES = ("tuned", "detuned", "wide")
_REGIME_CODE = {r: k for k, r in enumerate(REGIMES)}

_S = 1.0 / np.sqrt(2.0)
POLARIZATION_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}
# (Pauli axis 0..2, eigenvalue) of each polarization state
POLARIZATION_AXIS = {"D": (0, 1), "A": (0, -1), "R": (1, 1), "L": (1, -1), "H": (2, 1), "V": (2, -1)}


@dataclass(frozen=True)
class ProjectionSetting:
    alice: str
    bob: str

    def __post_init__(self):
        for s in (self.alice, self.bob):
            if s not in POLARIZATION_KETS:
                raise ValueError(f"unknown polarization {s!r}; expected one of {POLARIZATIONS}")

    def bloch_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        out = []
        for s in (self.alice, self.bob):
            axis, sign = POLARIZATION_AXIS[s]
            e = np.zeros(3)
            e[axis] = sign
            out.append(e)
        return out[0], out[1]


SETTINGS = tuple(ProjectionSetting(a, b) for a in POLARIZATIONS for b in POLARIZATIONS)
SETTING_INDEX = {s: k for k, s in enumerate(SETTINGS)}


@dataclass(frozen=True)
class CountRecord:
    setting: ProjectionSetting
    regime: str
    counts: float
    exposure: float = 1.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not self.counts >= 0:
            raise ValueError(f"counts must be non-negative, got {self.counts!r}")
        if not self.exposure > 0:
            raise ValueError(f"exposure must be positive, got {self.exposure!r}")


@dataclass(frozen=True)
class InterferenceModel:
    non_interfering_fraction: float = 0.567

    def __post_init__(self):
        f = self.non_interfering_fraction
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"non_interfering_fraction must lie in [0, 1], got {f!r}")


# ------------------------------------------------------------------ operators


def singlet_projector() -> np.ndarray:
    return projector(SINGLET)


def pi_operator() -> np.ndarray:
    return -4.0 * singlet_projector()


def _two_copy_operator(x1, x3, z24) -> np.ndarray:
    """16x16 operator acting as x1 on photon 1, x3 on photon 3 and z24 on (2, 4)."""
    op = kron(x1, x3, z24).reshape((2,) * 8)  # axes: out 1,3,2,4 | in 1,3,2,4
    return op.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)


def _check_index(i):
    if i not in (1, 2, 3):
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {i!r}")


def collective_A(rho, i: int, j: int, operator: str = "pi") -> float:
    """``Tr[(rho x rho) sigma_i Pi sigma_j]`` as a full 16-dimensional trace.

    ``operator="one_minus_pi"`` uses ``I - Pi`` on photons 2 and 4 instead.
    """
    rho = validate_density(rho)
    _check_index(i)
    _check_index(j)
    if operator == "pi":
        z = pi_operator()
    elif operator == "one_minus_pi":
        z = np.eye(4) - pi_operator()
    else:
        raise ValueError(f"operator must be 'pi' or 'one_minus_pi', not {operator!r}")
    op = _two_copy_operator(PAULI[i - 1], PAULI[j - 1], z)
    return float(np.trace(kron(rho, rho) @ op).real)


def collective_B(rho, i: int, j: int) -> float:
    """``Tr[(rho x rho) sigma_i I sigma_j]``; equals ``u_i u_j``."""
    rho = validate_density(rho)
    _check_index(i)
    _check_index(j)
    op = _two_copy_operator(PAULI[i - 1], PAULI[j - 1], np.eye(4))
    return float(np.trace(kron(rho, rho) @ op).real)


def r_from_collective(rho, include_local: bool = True) -> CorrMatrixR:
    """Correlation matrix from the collective estimator, ``A + B``.

    With ``include_local=False`` only ``A`` is returned, which is what the
    experiment uses when the local Bloch vectors are assumed to vanish.
    """
    rho = validate_density(rho)
    m = np.empty((3, 3))
    for i in range(1, 4):
        for j in range(1, 4):
            m[i - 1, j - 1] = collective_A(rho, i, j)
            if include_local:
                m[i - 1, j - 1] += collective_B(rho, i, j)
    return CorrMatrixR(0.5 * (m + m.T))


def interpolate_R(r_bell, r_noise, p: float) -> CorrMatrixR:
    """``p^2 R_bell + (1 - p^2) R_noise``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    rb = as_corr(r_bell).matrix
    rn = as_corr(r_noise).matrix
    return CorrMatrixR(p * p * rb + (1.0 - p * p) * rn)


# --------------------------------------------------------------- probabilities


def coincidence_operator(regime: str, model: InterferenceModel) -> np.ndarray:
    """Beam-splitter coincidence operator on photons 2 and 4."""
    f = model.non_interfering_fraction
    if regime in ("tuned", "wide"):
        return (1.0 - f) * singlet_projector() + 0.5 * f * np.eye(4)
    if regime == "detuned":
        return 0.5 * np.eye(4, dtype=complex)
    raise ValueError(f"unknown regime {regime!r}")


def four_fold_probability(rho, setting: ProjectionSetting, regime: str, model: InterferenceModel) -> float:
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    pa = projector(POLARIZATION_KETS[setting.alice])
    pb = projector(POLARIZATION_KETS[setting.bob])
    o = coincidence_operator(regime, model).reshape(2, 2, 2, 2)
    # r[i1,i2,j1,j2] r[i3,i4,j3,j4] pa[j1,i1] pb[j3,i3] o[j2,j4,i2,i4]
    return float(np.einsum("abcd,efgh,ca,ge,dhbf->", r, r, pa, pb, o).real)


def bell_success_probability(rho, regime: str, model: InterferenceModel) -> float:
    """Probability that photons 2 and 4 give a coincidence, summed over local outcomes."""
    rho = np.asarray(rho, dtype=complex)
    op = _two_copy_operator(np.eye(2), np.eye(2), coincidence_operator(regime, model))
    return float(np.trace(kron(rho, rho) @ op).real)


# Probability of any single setting when photons 2 and 4 are distinguishable.
REFERENCE_PROBABILITY = 0.125


def trials_for_events(events_per_setting: float) -> float:
    """``mean_events`` giving ``events_per_setting`` detected counts per detuned setting."""
    return events_per_setting / REFERENCE_PROBABILITY


def expected_counts(rho, model: InterferenceModel | None = None, mean_events: float = 1e5,
                    regimes=("tuned", "detuned"), exposure: float = 1.0) -> list[CountRecord]:
    """Noise-free count records: probability x exposure x mean_events."""
    model = model or InterferenceModel()
    rho = validate_density(rho)
    out = []
    for regime in regimes:
        for s in SETTINGS:
            prob = four_fold_probability(rho, s, regime, model)
            out.append(CountRecord(s, regime, prob * exposure * mean_events, exposure))
    return out


def _poissonize(records, seed: int) -> list[CountRecord]:
    out = []
    for r in records:
        rng = np.random.default_rng([seed, SETTING_INDEX[r.setting], _REGIME_CODE[r.regime]])
        out.append(CountRecord(r.setting, r.regime, int(rng.poisson(r.counts)), r.exposure))
    return out


def simulate_counts(rho, model: InterferenceModel | None = None, mean_events: float = 1e5,
                    seed: int = 0, regimes=("tuned", "detuned"), exposure: float = 1.0) -> list[CountRecord]:
    """Poisson four-fold counts for all 36 settings in each requested regime.

    Each (setting, regime) pair draws from its own generator seeded with
    ``(seed, setting index, regime index)``.
    """
    if not mean_events > 0:
        raise ValueError("mean_events must be positive")
    return _poissonize(expected_counts(rho, model, mean_events, regimes, exposure), seed)


def white_noise_counts(mean_events: float = 1e5, seed: int = 0, model: InterferenceModel | None = None,
                       exposure: float = 1.0) -> list[CountRecord]:
    """Wide-coincidence-window counts, which sample two copies of white noise."""
    if not mean_events > 0:
        raise ValueError("mean_events must be positive")
    exp = expected_counts(WHITE_NOISE, model, mean_events, regimes=("wide",), exposure=exposure)
    return _poissonize(exp, seed)


def balanced_probability(R, setting: ProjectionSetting, regime: str, model: InterferenceModel) -> float:
    """Four-fold probability for a state with vanishing local Bloch vectors.

    Such a state enters only through ``R``:
    ``(1 - f)(1 - a.R.b)/16 + f/8`` for interfering regimes and ``1/8`` when
    detuned, where ``a`` and ``b`` are the Bloch vectors of the projections.
    """
    if regime == "detuned":
        return 0.125
    if regime not in ("tuned", "wide"):
        raise ValueError(f"unknown regime {regime!r}")
    f = model.non_interfering_fraction
    a, b = setting.bloch_vectors()
    m = np.asarray(getattr(R, "matrix", R), dtype=float)
    return (1.0 - f) * (1.0 - a @ m @ b) / 16.0 + f / 8.0


def counts_from_R(R, model: InterferenceModel | None = None, mean_events: float = 1e5, seed: int | None = 0,
                  regimes=("tuned", "detuned"), exposure: float = 1.0) -> list[CountRecord]:
    """Count records generated straight from a correlation matrix.

    ``seed=None`` returns the noise-free expected counts.  ``R`` may be
    slightly unphysical (as measured matrices are); it only has to keep every
    probability non-negative.
    """
    model = model or InterferenceModel()
    if not mean_events > 0:
        raise ValueError("mean_events must be positive")
    out = []
    for regime in regimes:
        for s in SETTINGS:
            prob = balanced_probability(R, s, regime, model)
            if prob < 0:
                raise ValueError(f"R gives a negative probability for setting {s.alice}{s.bob}")
            out.append(CountRecord(s, regime, prob * exposure * mean_events, exposure))
    return out if seed is None else _poissonize(out, seed)


# ------------------------------------------------------------------------- CSV

CSV_HEADER = ("alice", "bob", "regime", "counts", "exposure")


def _fmt(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.setting.alice, r.setting.bob, r.regime, _fmt(r.counts), _fmt(r.exposure)])
    return buf.getvalue()


def records_from_csv(text: str) -> list[CountRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"count CSV must start with header {','.join(CSV_HEADER)}")
    out = []
    for k, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ValueError(f"line {k}: expected 5 fields, got {len(row)}")
        a, b, regime, counts, exposure = row
        out.append(CountRecord(ProjectionSetting(a, b), regime, float(counts), float(exposure)))
    return out
