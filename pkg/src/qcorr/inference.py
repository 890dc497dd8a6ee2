"""Maximum-likelihood reconstruction of R from coincidence counts, and
Monte Carlo error bars for anything computed from the reconstruction.

Forward model.  For a balanced state (vanishing local Bloch vectors) the
four-fold probability of setting (a, b) depends on the state only through
``R = T T^T``::

    tuned / wide:  g = (1 - f) (1 - a.R.b) / 16 + f / 8
    detuned:       g = 1 / 8

with ``f`` the non-interfering fraction and ``a``, ``b`` the Bloch vectors of
the local projections.  Expected counts are ``eta * exposure * g`` with an
unknown overall rate ``eta`` that is profiled out in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .collective import REGIMES, SETTINGS, CountRecord, InterferenceModel
from .measures import CorrMatrixR

PARAMETRIZATIONS = ("cholesky_R", "direct_T")


class ConvergenceError(RuntimeError):
    def __init__(self, message, gradient_norm=float("nan"), iterations=0):
        super().__init__(f"{message} (projected gradient norm {gradient_norm:.3e} after {iterations} iterations)")
        self.gradient_norm = gradient_norm
        self.iterations = iterations


class MissingSettingsError(ValueError):
    pass


class InsufficientSamplesError(RuntimeError):
    pass


@dataclass(frozen=True)
class MLEConfig:
    max_iterations: int = 5000
    convergence_tol: float = 1e-11
    parametrization: str = "direct_T"

    def __post_init__(self):
        if self.parametrization not in PARAMETRIZATIONS:
            raise ValueError(f"parametrization must be one of {PARAMETRIZATIONS}")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True, eq=False)
class MLEResult:
    R: CorrMatrixR
    log_likelihood: float
    iterations: int
    physicality_clamp_applied: bool
    gradient_norm: float
    rate: float
    parametrization: str

    def to_dict(self) -> dict:
        return {
            "R": self.R.to_list(),
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "physicality_clamp_applied": self.physicality_clamp_applied,
        }


# ------------------------------------------------------------- likelihood


def _sym(m):
    return 0.5 * (m + m.T)


def project_R(R: np.ndarray) -> np.ndarray:
    """Nearest symmetric matrix (Frobenius) with eigenvalues in [0, 1]."""
    w, v = np.linalg.eigh(_sym(R))
    return _sym((v * np.clip(w, 0.0, 1.0)) @ v.T)


class _Problem:
    def __init__(self, records, model: InterferenceModel):
        f = model.non_interfering_fraction
        if f >= 1.0 - 1e-9:
            raise ValueError("with no interfering photons the counts carry no information about R")
        records = list(records)
        if not records:
            raise MissingSettingsError("no count records given")
        seen = {r.setting for r in records if r.regime in ("tuned", "wide")}
        missing = [s for s in SETTINGS if s not in seen]
        if missing:
            names = ", ".join(s.alice + s.bob for s in missing[:6])
            raise MissingSettingsError(
                f"{len(missing)} of 36 projection settings have no tuned/wide record (e.g. {names})"
            )
        self.f = f
        self.n = np.array([r.counts for r in records], dtype=float)
        self.e = np.array([r.exposure for r in records], dtype=float)
        informative = np.array([r.regime in ("tuned", "wide") for r in records])
        self.c0 = np.where(informative, (1.0 - f) / 16.0 + f / 8.0, 1.0 / 8.0)
        self.c1 = np.where(informative, -(1.0 - f) / 16.0, 0.0)
        w = np.zeros((len(records), 9))
        for k, r in enumerate(records):
            if informative[k]:
                a, b = r.setting.bloch_vectors()
                w[k] = np.outer(a, b).ravel()
        self.w = w
        self.informative = informative
        self.total = self.n.sum()
        if self.total <= 0:
            raise MissingSettingsError("all counts are zero")
        pos = self.n > 0
        self._sat = float(np.sum(self.n[pos] * np.log(self.n[pos])) - self.total)
        self._lgamma = float(sum(math.lgamma(x + 1.0) for x in self.n))

    def shape(self, R):
        return self.c0 + self.c1 * (self.w @ R.ravel())

    def rate(self, R):
        return self.total / float(np.sum(self.e * self.shape(R)))

    def centered_ll(self, R) -> float:
        """Profile log-likelihood minus its saturated value (<= 0)."""
        g = self.shape(R)
        eg = self.e * g
        if np.any((eg <= 0) & (self.n > 0)):
            return -math.inf
        eta = self.total / eg.sum()
        pos = self.n > 0
        ll = np.sum(self.n[pos] * np.log(eta * eg[pos])) - self.total
        return float(ll - self._sat)

    def full_ll(self, R) -> float:
        return self.centered_ll(R) + self._sat - self._lgamma

    def grad(self, R) -> np.ndarray:
        g = self.shape(R)
        eta = self.rate(R)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.n > 0, self.n / g, 0.0)
        coeff = (ratio - eta * self.e) * self.c1
        return _sym((coeff @ self.w).reshape(3, 3))

    def linear_estimate(self) -> np.ndarray:
        eta0 = self.total / float(np.sum(self.e * self.c0))
        acc = np.zeros((3, 3))
        cnt = np.zeros((3, 3))
        for k in np.flatnonzero(self.informative):
            ghat = self.n[k] / (eta0 * self.e[k])
            x = (ghat - self.c0[k]) / self.c1[k]
            ab = self.w[k].reshape(3, 3)
            mask = ab != 0
            acc[mask] += x * ab[mask]
            cnt[mask] += 1
        return _sym(acc / np.maximum(cnt, 1))

    def stationarity(self, R) -> float:
        G = self.grad(R)
        scale = 1.0 / max(1.0, float(np.max(np.abs(G))))
        return float(np.max(np.abs(project_R(R + scale * G) - R))) / scale


# ---------------------------------------------------------- parametrizations


def _lower_root(R):
    w, v = np.linalg.eigh(_sym(R))
    x = v * np.sqrt(np.clip(w, 0.0, None))
    _, upper = np.linalg.qr(x.T)
    L = upper.T
    sign = np.where(np.diag(L) < 0, -1.0, 1.0)
    return L * sign


def _clip_singular(F):
    u, s, vt = np.linalg.svd(F)
    return (u * np.minimum(s, 1.0)) @ vt


class _Cholesky:
    name = "cholesky_R"

    @staticmethod
    def from_R(R):
        return _lower_root(R)

    @staticmethod
    def to_R(F):
        return _sym(F @ F.T)

    @staticmethod
    def grad(F, G):
        return np.tril(2.0 * G @ F)

    @staticmethod
    def project(F):
        # Euclidean projection onto {lower triangular} n {spectral norm <= 1};
        # both sets are convex, so Dykstra's alternating scheme converges to it
        if np.linalg.norm(F, 2) <= 1.0:
            return F
        x = F
        p = np.zeros_like(F)
        q = np.zeros_like(F)
        for _ in range(500):
            y = _clip_singular(x + p)
            p = x + p - y
            x_new = np.tril(y + q)
            q = y + q - x_new
            if np.max(np.abs(x_new - x)) < 1e-14:
                x = x_new
                break
            x = x_new
        return _clip_singular(x) if np.linalg.norm(x, 2) > 1.0 else x


class _DirectT:
    name = "direct_T"

    @staticmethod
    def from_R(R):
        w, v = np.linalg.eigh(_sym(R))
        return np.sqrt(np.clip(w, 0.0, None))[:, None] * v.T

    @staticmethod
    def to_R(F):
        return _sym(F.T @ F)

    @staticmethod
    def grad(F, G):
        return 2.0 * F @ G

    @staticmethod
    def project(F):
        # the singular-value clip is the exact Euclidean projection onto ||T|| <= 1
        return F if np.linalg.norm(F, 2) <= 1.0 else _clip_singular(F)


_PARAMS = {"cholesky_R": _Cholesky, "direct_T": _DirectT}


def _ascend(problem: _Problem, param, F, config: MLEConfig):
    R = param.to_R(F)
    ll = problem.centered_ll(R)
    step = 1e-4
    it = 0
    while it < config.max_iterations:
        it += 1
        G = param.grad(F, problem.grad(R))
        gnorm2 = float(np.sum(G * G))
        if gnorm2 == 0.0:
            return F, R, ll, it, True
        step = min(step * 2.0, 1e3)
        while True:
            F_new = param.project(F + step * G)
            R_new = param.to_R(F_new)
            ll_new = problem.centered_ll(R_new)
            if ll_new >= ll + 1e-4 * float(np.sum(G * (F_new - F))):
                break
            step *= 0.5
            if step < 1e-18:
                # line search stalled: nothing left to gain along the gradient
                return F, R, ll, it, True
        gain = ll_new - ll
        F, R, ll = F_new, R_new, ll_new
        if gain < config.convergence_tol:
            return F, R, ll, it, True
    return F, R, ll, it, False


def _simplex_polish(problem: _Problem, param, F, config: MLEConfig):
    shape = F.shape

    def objective(x):
        Fx = param.project(x.reshape(shape))
        return -problem.centered_ll(param.to_R(Fx))

    res = minimize(objective, F.ravel(), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": config.convergence_tol,
                            "maxiter": min(20 * config.max_iterations, 20000)})
    Fx = param.project(res.x.reshape(shape))
    return Fx, param.to_R(Fx), -res.fun, int(res.nit), bool(res.success)


def mle_reconstruct(counts, config: MLEConfig | None = None, model: InterferenceModel | None = None) -> MLEResult:
    """Physical R maximizing the Poisson likelihood of the counts.

    ``counts`` must contain a tuned or wide-window record for every one of
    the 36 projection settings; detuned records are accepted and only inform
    the overall rate.
    """
    config = config or MLEConfig()
    model = model or InterferenceModel()
    problem = _Problem(counts, model)
    param = _PARAMS[config.parametrization]

    R_lin = problem.linear_estimate()
    w_lin = np.linalg.eigvalsh(R_lin)
    clamp = bool(w_lin[0] < 0.0 or w_lin[-1] > 1.0)
    # start strictly inside the physical set so no eigen-direction is frozen at zero
    R0 = 0.98 * project_R(R_lin) + 0.01 * np.eye(3)
    F = param.project(param.from_R(R0))

    F, R, ll, iterations, converged = _ascend(problem, param, F, config)
    gnorm = problem.stationarity(R)
    if not converged:
        F2, R2, ll2, extra, ok = _simplex_polish(problem, param, F, config)
        iterations += extra
        if ll2 >= ll:
            F, R, ll = F2, R2, ll2
        gnorm = problem.stationarity(R)
        if not ok:
            raise ConvergenceError("maximum-likelihood reconstruction did not converge", gnorm, iterations)

    R = project_R(R)
    return MLEResult(
        R=CorrMatrixR(R),
        log_likelihood=problem.full_ll(R),
        iterations=iterations,
        physicality_clamp_applied=clamp,
        gradient_norm=gnorm,
        rate=problem.rate(R),
        parametrization=param.name,
    )


# ------------------------------------------------------ interference fraction


def estimate_interference_fraction(calibration_counts, reference_R=None) -> float:
    """Non-interfering fraction from tuned and detuned counts of a known state.

    ``reference_R`` is the correlation matrix of the calibration state
    (identity, i.e. the singlet, by default).
    """
    records = list(calibration_counts)
    tuned = [r for r in records if r.regime == "tuned"]
    detuned = [r for r in records if r.regime == "detuned"]
    if not tuned or not detuned:
        raise ValueError("calibration needs both tuned and detuned records")
    R_ref = np.eye(3) if reference_R is None else np.asarray(getattr(reference_R, "matrix", reference_R), float)

    nt = sum(r.counts for r in tuned)
    nd = sum(r.counts for r in detuned)
    if nt <= 0 or nd <= 0:
        raise ValueError("calibration counts are empty")
    # summed over complete outcome sets the tuned/detuned rate ratio is (1 + f) / 2
    ratio = (nt / sum(r.exposure for r in tuned)) / (nd / sum(r.exposure for r in detuned))
    f_mom = 2.0 * ratio - 1.0
    sigma = 2.0 * ratio * math.sqrt(1.0 / nt + 1.0 / nd)
    slack = 5.0 * sigma + 1e-3
    if f_mom < -slack or f_mom > 1.0 + slack:
        raise ValueError(
            f"tuned/detuned ratio {ratio:.4f} implies a non-interfering fraction {f_mom:.4f}, "
            "outside the model's range [0, 1]"
        )

    records = tuned + detuned

    def nll(f):
        prob = _Problem.__new__(_Problem)
        _Problem.__init__(prob, records, InterferenceModel(min(f, 1.0 - 1e-9)))
        return -prob.centered_ll(R_ref)

    res = minimize_scalar(nll, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-9})
    return float(min(max(res.x, 0.0), 1.0))


# ------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class ErrorBar:
    value: float
    plus: float
    minus: float

    def to_dict(self) -> dict:
        return {"value": self.value, "plus": self.plus, "minus": self.minus}


@dataclass(frozen=True)
class MonteCarloConfig:
    n_samples: int = 1000
    lower_percentile: float = 15.87
    upper_percentile: float = 84.13
    seed: int = 0
    mode: str = "poisson"
    min_successes: int = 100

    def __post_init__(self):
        if not 0.0 < self.lower_percentile < self.upper_percentile < 100.0:
            raise ValueError("need 0 < lower_percentile < upper_percentile < 100")
        if self.mode not in ("poisson", "normal"):
            raise ValueError("mode must be 'poisson' or 'normal'")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")


def resample_counts(records, rng, mode: str = "poisson") -> list[CountRecord]:
    n = np.array([r.counts for r in records], dtype=float)
    if mode == "poisson":
        new = rng.poisson(n).astype(float)
    else:
        new = np.maximum(n + np.sqrt(n) * rng.standard_normal(n.shape), 0.0)
    return [CountRecord(r.setting, r.regime, float(x), r.exposure) for r, x in zip(records, new)]


@dataclass
class MonteCarloResult:
    bars: dict
    samples: dict = field(repr=False)
    successes: int = 0
    failures: int = 0


def monte_carlo_errors(counts, measure_extractor: Callable, config: MonteCarloConfig | None = None,
                       mle_config: MLEConfig | None = None,
                       model: InterferenceModel | None = None) -> MonteCarloResult:
    """Asymmetric percentile error bars by resampling counts and re-reconstructing.

    ``counts`` is either one list of records or a mapping of dataset name to
    records.  ``measure_extractor`` receives the reconstructed
    :class:`CorrMatrixR` (or a dict of them, keyed like ``counts``) and returns
    a dict of measure name to value.
    """
    config = config or MonteCarloConfig()
    mle_config = mle_config or MLEConfig()
    model = model or InterferenceModel()
    single = not isinstance(counts, Mapping)
    datasets = {"_": list(counts)} if single else {k: list(v) for k, v in counts.items()}
    names = sorted(datasets)

    def reconstruct(data):
        Rs = {k: mle_reconstruct(data[k], mle_config, model).R for k in names}
        return Rs["_"] if single else Rs

    point = measure_extractor(reconstruct(datasets))
    samples = {k: [] for k in point}
    failures = 0
    for i in range(config.n_samples):
        rng = np.random.default_rng([config.seed, i])
        data = {k: resample_counts(datasets[k], rng, config.mode) for k in names}
        try:
            vals = measure_extractor(reconstruct(data))
        except ConvergenceError:
            failures += 1
            continue
        for k in point:
            samples[k].append(vals[k])
    successes = config.n_samples - failures
    if successes < config.min_successes:
        raise InsufficientSamplesError(
            f"only {successes} of {config.n_samples} resamples reconstructed successfully"
        )
    bars = {}
    for k, v in point.items():
        lo, hi = np.percentile(samples[k], [config.lower_percentile, config.upper_percentile])
        bars[k] = ErrorBar(float(v), max(float(hi) - v, 0.0), max(v - float(lo), 0.0))
    return MonteCarloResult(bars, samples, successes, failures)
