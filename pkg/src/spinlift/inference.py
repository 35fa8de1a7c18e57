"""Detection-error model, binomial shot sampling and maximum-likelihood
normalization / fringe fitting for the dark-state fidelity measurement.

The fringe protocol: after preparing a (possibly mixed) qutrit state, a
resonant pi/2 analysis pulse at two-level phase chi is applied and the
population left in |0> is recorded.  Sweeping chi maps the |0> population
to A0 + A cos(2 chi + phi0), whose offset, amplitude and phase give the
dark-state fidelity F_D = A0 - A cos(phi0).

The MeasurementModel's event classes are generic: p_b_given_1 is the
probability of registering the counted event when the system is truly in
the class the fitted probability refers to (for the |0>-population fringe
the counted event is the dark outcome, so the default 0.985 / 0.015 pair is
the ~97% fluorescence-detection fidelity of the modeled apparatus).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from .spin import DimensionError
from .waveforms import lift_schedule, square_pulse
from .dynamics import IntegratorConfig, propagator

__all__ = [
    "FitSingularError",
    "MeasurementModel",
    "FringeData",
    "FitResult",
    "detection_map",
    "sample_counts",
    "ml_estimate_single",
    "ml_fit_fringe",
    "dark_state_fidelity",
    "fringe_prediction",
    "analysis_pulse_unitary",
    "infidelity_per_op",
]

TWO_PI = 2.0 * np.pi


class FitSingularError(RuntimeError):
    """Raised when the fringe data cannot constrain the fit."""


@dataclass(frozen=True)
class MeasurementModel:
    """Detection-error probabilities, shot count and RNG seed."""

    p_b_given_1: float = 0.985
    p_b_given_0: float = 0.015
    shots: int = 200
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p_b_given_0 < self.p_b_given_1 <= 1.0):
            raise ValueError(
                f"need 0 <= P(b|0) < P(b|1) <= 1, got {self.p_b_given_0}, {self.p_b_given_1}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class FringeData:
    """Measured fringe: (chi_i, k_i) counted events out of n shots per point."""

    chi: np.ndarray
    counts: np.ndarray
    shots: int

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if chi.shape != counts.shape:
            raise ValueError("chi and counts must have matching shapes")
        if np.any(counts < 0) or np.any(counts > self.shots):
            raise ValueError("counts must lie in [0, shots]")
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "counts", counts)

    def to_json_dict(self) -> dict:
        return {"chi_rad": self.chi.tolist(), "counts": self.counts.tolist(),
                "shots": self.shots}

    @classmethod
    def from_json_dict(cls, d: dict) -> "FringeData":
        return cls(np.asarray(d["chi_rad"]), np.asarray(d["counts"]), d["shots"])


@dataclass(frozen=True)
class FitResult:
    """Fringe-fit parameters with standard errors and the derived fidelity.

    fidelity is A0 - A cos(phi0) clipped to [0, 1]; fidelity_raw keeps the
    unclipped value so downstream scaling fits are not biased.
    """

    a0: float
    a: float
    phi0: float
    a0_err: float
    a_err: float
    phi0_err: float
    fidelity: float
    fidelity_raw: float
    fidelity_err: float
    log_likelihood: float

    def to_json_dict(self) -> dict:
        return {
            "a0": self.a0, "a": self.a, "phi0_rad": self.phi0,
            "a0_err": self.a0_err, "a_err": self.a_err, "phi0_err": self.phi0_err,
            "fidelity": self.fidelity, "fidelity_raw": self.fidelity_raw,
            "fidelity_err": self.fidelity_err, "log_likelihood": self.log_likelihood,
        }


def detection_map(p, m: MeasurementModel):
    """Probability of the counted event: P(b|1) p + P(b|0) (1 - p)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < -1e-12) or np.any(p_arr > 1 + 1e-12):
        raise ValueError("probability outside [0, 1]")
    out = m.p_b_given_1 * p_arr + m.p_b_given_0 * (1.0 - p_arr)
    return out if out.ndim else float(out)


def sample_counts(p_b, m: MeasurementModel, rng: np.random.Generator | None = None):
    """Binomial(shots, p_b) draw; deterministic for a fixed model seed."""
    if rng is None:
        rng = m.rng()
    return rng.binomial(m.shots, np.asarray(p_b, dtype=float))


def ml_estimate_single(k: float, m: MeasurementModel) -> float:
    """MLE of the underlying probability from k counted events in n shots.

    The binomial likelihood is maximized by inverting the linear detection
    map at k/n and clamping to [0, 1].
    """
    if k < 0 or k > m.shots:
        raise ValueError(f"k must be in [0, {m.shots}], got {k}")
    raw = (k / m.shots - m.p_b_given_0) / (m.p_b_given_1 - m.p_b_given_0)
    return float(np.clip(raw, 0.0, 1.0))


def _make_log_likelihood(chi, counts, shots, m: MeasurementModel):
    """Binomial log-likelihood of (A0, A, phi0) for the fringe model.

    The detection map extends the likelihood smoothly through the model
    boundaries 0 and 1 (the detected-event probability stays inside (0, 1)
    a little beyond them), so an optimum with A0 +/- A at the boundary has a
    regular observed information; far excursions hit a quadratic wall.
    """
    cos2 = np.cos(2.0 * chi)
    sin2 = np.sin(2.0 * chi)
    n_minus_k = shots - counts
    dp = m.p_b_given_1 - m.p_b_given_0
    p0 = m.p_b_given_0

    def ll(params) -> float:
        a0, a, phi0 = params
        model = a0 + a * (np.cos(phi0) * cos2 - np.sin(phi0) * sin2)
        excess = np.maximum(model - 2.0, 0.0) + np.maximum(-1.0 - model, 0.0)
        penalty = 1e6 * shots * float(np.sum(excess**2))
        p_b = np.clip(p0 + dp * model, 1e-12, 1.0 - 1e-12)
        return float(np.sum(xlogy(counts, p_b) + xlogy(n_minus_k, 1.0 - p_b))) - penalty

    return ll


def _observed_information(ll, params, step=1e-6):
    n = len(params)
    hess = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            pp = np.array(params, dtype=float)
            ei = np.zeros(n); ei[i] = step
            ej = np.zeros(n); ej[j] = step
            fpp = ll(pp + ei + ej)
            fpm = ll(pp + ei - ej)
            fmp = ll(pp - ei + ej)
            fmm = ll(pp - ei - ej)
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4 * step**2)
    return -hess


_NM_OPTIONS = {"xatol": 1e-12, "fatol": 1e-13, "maxiter": 6000, "maxfev": 8000}


def ml_fit_fringe(data: FringeData, m: MeasurementModel) -> FitResult:
    """Maximum-likelihood fit of A0 + A cos(2 chi + phi0) to fringe counts.

    Multi-starts over phi0 in {0, pi/2, pi, 3pi/2} plus a harmonic-projection
    start, refined by Nelder-Mead; standard errors come from the observed
    information (numerical Hessian) at the optimum.
    """
    chi, counts, shots = data.chi, data.counts, data.shots
    if chi.size < 4:
        raise FitSingularError(f"need >= 4 fringe points, got {chi.size}")
    if np.ptp(chi) < np.pi / 2 - 1e-12:
        raise FitSingularError(
            f"chi must span at least half a fringe period (pi/2), got {np.ptp(chi):.4f}")
    if np.allclose(chi, chi[0]):
        raise FitSingularError("all fringe points at identical chi")

    ll = _make_log_likelihood(chi, counts, shots, m)
    nll = lambda p: -ll(p)

    p_hat = np.clip((counts / shots - m.p_b_given_0)
                    / (m.p_b_given_1 - m.p_b_given_0), 0.0, 1.0)
    a0_start = float(np.mean(p_hat))
    z = 2.0 * np.mean(p_hat * np.exp(-2j * chi))
    a_grid = max(abs(z), 0.1)
    grid_starts = [(a0_start, a_grid, phi)
                   for phi in (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)]
    grid_starts.sort(key=nll)
    # refine from the projection start and the best phase-grid start; fall
    # back to the remaining grid starts only if those two disagree
    starts = [(a0_start, min(abs(z), 0.5), float(np.angle(z))), grid_starts[0]]
    results = [minimize(nll, x0=np.asarray(p0, dtype=float),
                        method="Nelder-Mead", options=_NM_OPTIONS) for p0 in starts]
    if abs(results[0].fun - results[1].fun) > 1e-6:
        results += [minimize(nll, x0=np.asarray(p0, dtype=float),
                             method="Nelder-Mead", options=_NM_OPTIONS)
                    for p0 in grid_starts[1:]]
    best = min(results, key=lambda r: r.fun)
    a0, a, phi0 = best.x
    if a < 0:  # fold the sign into the phase
        a = -a
        phi0 += np.pi
    phi0 = float(np.mod(phi0, TWO_PI))

    info = _observed_information(ll, (a0, a, phi0))
    evals, evecs = np.linalg.eigh((info + info.T) / 2)
    scale = float(np.max(np.abs(evals)))
    if scale <= 0 or evals[-1] <= 0:
        raise FitSingularError("observed information is singular")
    # phi0 becomes unidentifiable as A -> 0: report an infinite standard
    # error along null directions instead of failing (pinv covariance)
    identifiable = evals > 1e-10 * scale
    inv_evals = np.where(identifiable, 1.0 / np.where(identifiable, evals, 1.0), 0.0)
    cov = (evecs * inv_evals) @ evecs.T
    errs = np.sqrt(np.maximum(np.diag(cov), 0.0))
    null_component = (evecs[:, ~identifiable] ** 2).sum(axis=1) if not identifiable.all() else np.zeros(3)
    errs = np.where(null_component > 1e-12, np.inf, errs)
    if not np.isfinite(errs[0]) or not np.isfinite(errs[1]):
        raise FitSingularError("offset/amplitude are unconstrained by the data")

    raw = a0 - a * np.cos(phi0)
    grad = np.array([1.0, -np.cos(phi0), a * np.sin(phi0)])
    fid_err = float(np.sqrt(max(grad @ cov @ grad, 0.0)))
    return FitResult(
        a0=float(a0), a=float(a), phi0=phi0,
        a0_err=float(errs[0]), a_err=float(errs[1]), phi0_err=float(errs[2]),
        fidelity=float(np.clip(raw, 0.0, 1.0)), fidelity_raw=float(raw),
        fidelity_err=fid_err,
        log_likelihood=float(-best.fun),
    )


def dark_state_fidelity(fit: FitResult) -> float:
    """F_D = A0 - A cos(phi0), clipped to [0, 1]."""
    return float(np.clip(fit.a0 - fit.a * np.cos(fit.phi0), 0.0, 1.0))


_ANALYSIS_OMEGA0 = TWO_PI * 40e3
_analysis_cache: dict = {}


def analysis_pulse_unitary(chi: float, omega0: float = _ANALYSIS_OMEGA0) -> np.ndarray:
    """Exact qutrit propagator of the resonant pi/2 analysis pulse at phase chi
    (duration pi / (2 Omega_half)), computed by propagation of the lifted drive."""
    key = (round(float(chi), 15), float(omega0))
    if key not in _analysis_cache:
        drive = lift_schedule(square_pulse(np.pi / 2, float(chi), omega0), 3)
        _analysis_cache[key] = propagator(drive, IntegratorConfig()).mat
    return _analysis_cache[key]


def fringe_prediction(rho: np.ndarray, chi: float, omega0: float = _ANALYSIS_OMEGA0) -> float:
    """Population in |0> after the analysis pulse at phase chi, for a qutrit
    density matrix rho (computed by exact propagation, not a closed form)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise DimensionError(f"expected a 3x3 density matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-9:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise ValueError("density matrix trace differs from 1")
    if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) < -1e-9:
        raise ValueError("density matrix is not positive")
    u = analysis_pulse_unitary(chi, omega0)
    row = u[1]  # <0| U
    return float(np.clip(np.real(row @ rho @ row.conj()), 0.0, 1.0))


def infidelity_per_op(points: Sequence[tuple]) -> tuple[float, float]:
    """Weighted least squares of F = 1 - x * eps through (x, F, sigma) points;
    returns (eps, standard error of eps).  The intercept is fixed at 1."""
    pts = list(points)
    xs = np.array([p[0] for p in pts], dtype=float)
    fs = np.array([p[1] for p in pts], dtype=float)
    sigmas = np.array([p[2] for p in pts], dtype=float)
    if np.unique(xs[xs > 0]).size < 2 and np.unique(xs).size < 2:
        raise FitSingularError("need at least 2 distinct operation counts")
    if np.all(xs == 0):
        raise FitSingularError("all points at x = 0")
    w = np.where(sigmas > 0, 1.0 / np.maximum(sigmas, 1e-300) ** 2, 1.0)
    denom = float(np.sum(w * xs * xs))
    if denom == 0:
        raise FitSingularError("singular design: no nonzero operation counts")
    eps = float(np.sum(w * xs * (1.0 - fs)) / denom)
    sigma_eps = float(1.0 / np.sqrt(denom)) if np.all(sigmas > 0) else float("nan")
    return eps, sigma_eps
