"""Truncated Fock-space numerics: coherent states, the canonical phase
distribution, and wrapped phase variances.

The phase statistics of a state with number-basis amplitudes a_n are those of
the canonical phase measurement, P(theta) = |sum_n a_n e^{-i n theta}|^2 / 2pi.
For a coherent state of mean photon number mu this distribution has wrapped
variance 1/(4 mu) in the large-mu limit, which is the elementary scale against
which all the tracking and synchronization limits in this package are set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "FockVector",
    "DensityOperator",
    "PhaseDistribution",
    "default_truncation",
    "coherent_state",
    "canonical_phase_distribution",
    "phase_distribution_from_density",
    "phase_variance",
    "clone_phase_variance",
    "wrap_angle",
]


def wrap_angle(x):
    """Wrap an angle (or array of angles) into (-pi, pi]."""
    return -((-np.asarray(x) + np.pi) % (2 * np.pi) - np.pi)


@dataclass(frozen=True)
class FockVector:
    """Pure state in a number basis truncated at ``truncation``.

    ``amplitudes[n]`` is the probability amplitude on the n-photon state,
    n = 0 .. truncation.  The squared norm must not exceed 1 (a deficit is
    allowed: it is the truncated tail).
    """

    truncation: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.truncation + 1,):
            raise ValueError(
                f"amplitudes must have length truncation+1 = {self.truncation + 1}"
            )
        if not (np.all(np.isfinite(amps.real)) and np.all(np.isfinite(amps.imag))):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if norm2 > 1 + 1e-9 or norm2 <= 0:
            raise ValueError(f"squared norm {norm2} outside (0, 1]")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm_deficit(self) -> float:
        return 1.0 - float(np.sum(np.abs(self.amplitudes) ** 2))

    def mean_photon_number(self) -> float:
        n = np.arange(self.truncation + 1)
        return float(np.sum(n * np.abs(self.amplitudes) ** 2))

    def number_probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityOperator:
    """Mixed state on the truncated number basis.

    The matrix must be Hermitian (to 1e-12 elementwise) with unit trace to
    1e-9.  Positivity is not checked on construction; call
    :meth:`check_positive` where it matters.
    """

    truncation: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")
        m = np.asarray(self.matrix, dtype=complex)
        d = self.truncation + 1
        if m.shape != (d, d):
            raise ValueError(f"matrix must be {d}x{d}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("matrix is not Hermitian to 1e-12")
        tr = float(m.trace().real)
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"trace {tr} differs from 1 by more than 1e-9")
        object.__setattr__(self, "matrix", m)

    def check_positive(self, tol: float = 1e-9) -> None:
        lo = float(np.linalg.eigvalsh(self.matrix).min())
        if lo < -tol:
            raise ValueError(f"smallest eigenvalue {lo} below -{tol}")

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))

    def mean_photon_number(self) -> float:
        return float(np.sum(np.arange(self.truncation + 1) * self.populations()))


@dataclass(frozen=True)
class PhaseDistribution:
    """Phase density on a uniform grid over (-pi, pi], normalized to 1."""

    grid: np.ndarray
    density: np.ndarray
    dtheta: float = field(init=False)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        p = np.asarray(self.density, dtype=float)
        if g.ndim != 1 or g.shape != p.shape or g.size < 2:
            raise ValueError("grid and density must be equal-length 1-d arrays")
        if np.min(p) < -1e-12:
            raise ValueError("density must be nonnegative")
        dth = 2 * np.pi / g.size
        total = float(np.sum(p) * dth)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"density integrates to {total}, not 1 within 1e-6")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", np.maximum(p, 0.0))
        object.__setattr__(self, "dtheta", dth)


def default_truncation(mu: float) -> int:
    """Truncation mu + 10 sqrt(mu) + 10, placing the Poisson tail below 1e-12."""
    return int(np.ceil(mu + 10 * np.sqrt(mu) + 10))


def coherent_state(alpha: complex, truncation: int | None = None) -> FockVector:
    """Coherent state |alpha> with amplitudes e^{-|a|^2/2} alpha^n / sqrt(n!).

    Parameters
    ----------
    alpha : complex
        Field amplitude; mean photon number is mu = |alpha|^2.
    truncation : int, optional
        Highest retained number state.  Defaults to
        ``default_truncation(|alpha|^2)``; at that value the norm deficit is
        below 1e-10.
    """
    alpha = complex(alpha)
    if not (np.isfinite(alpha.real) and np.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    mu = abs(alpha) ** 2
    if truncation is None:
        truncation = default_truncation(mu)
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    n = np.arange(truncation + 1)
    if mu == 0.0:
        amps = np.zeros(truncation + 1, dtype=complex)
        amps[0] = 1.0
    else:
        # log-space magnitudes to stay finite at large n
        logmag = -mu / 2 + n * np.log(np.abs(alpha)) - 0.5 * gammaln(n + 1)
        amps = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    return FockVector(truncation=truncation, amplitudes=amps)


def _phase_density_from_fourier(coeffs: np.ndarray, grid_size: int):
    """Density (1/2pi) sum_k c_k e^{i k theta} on the (-pi, pi] grid.

    ``coeffs[k]`` multiplies e^{+i k theta}, k = 0 .. len-1; negative k follow
    by Hermitian symmetry of the density and are passed in by the caller as
    the conjugate tail, so here we only evaluate sum_n b_n e^{-i n theta_j}
    via an FFT (exact: the grid is uniform and grid_size >= len(coeffs)).
    """
    G = grid_size
    j = np.arange(G)
    theta = -np.pi + 2 * np.pi * (j + 1) / G
    n = np.arange(len(coeffs))
    # e^{-i n theta_j} = (-1)^n e^{-2pi i n (j+1)/G}
    b = coeffs * ((-1.0) ** n) * np.exp(-2j * np.pi * n / G)
    f = np.fft.fft(b, n=G)
    return theta, f


def canonical_phase_distribution(state: FockVector, grid_size: int = 4096) -> PhaseDistribution:
    """Canonical phase density P(theta) = |sum_n a_n e^{-i n theta}|^2 / 2pi.

    Evaluated exactly on a uniform grid over (-pi, pi] (FFT; the density is a
    trigonometric polynomial, so with grid_size > 2*truncation the grid sum
    reproduces the integral exactly).  Number states give the uniform density;
    a vacuum or any |n> carries no phase.

    Raises
    ------
    ValueError
        If the input norm deficit exceeds 1e-6, or the grid is too small.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    if grid_size <= state.truncation:
        raise ValueError("grid_size must exceed the truncation")
    if state.norm_deficit > 1e-6:
        raise ValueError(f"state norm deficit {state.norm_deficit:.2e} exceeds 1e-6")
    theta, f = _phase_density_from_fourier(state.amplitudes, grid_size)
    density = np.abs(f) ** 2 / (2 * np.pi)
    return PhaseDistribution(grid=theta, density=density)


def phase_distribution_from_density(rho: DensityOperator, grid_size: int = 4096) -> PhaseDistribution:
    """Canonical phase density of a mixed state, (1/2pi) sum_{nm} rho_nm e^{i(m-n)theta}."""
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    if grid_size <= 2 * rho.truncation:
        raise ValueError("grid_size must exceed twice the truncation")
    d = rho.truncation + 1
    # d_k = sum_n rho_{n, n+k}: Fourier coefficient of e^{+i k theta}
    dk = np.array([np.trace(rho.matrix, offset=k) for k in range(d)])
    G = grid_size
    theta, f = _phase_density_from_fourier(dk.conj(), G)
    # f_j = sum_k conj(d_k) e^{-i k theta_j}; density = (d_0 + 2 Re sum_{k>=1}) / 2pi
    density = (2 * f.real - dk[0].real) / (2 * np.pi)
    return PhaseDistribution(grid=theta, density=density)


def phase_variance(dist: PhaseDistribution, reference: float = 0.0) -> float:
    """Wrapped second moment of the phase about ``reference``, in rad^2.

    Integrates wrap(theta - reference)^2 P(theta) over the grid, with the
    difference wrapped into (-pi, pi].  This is the mean-square phase error
    convention used throughout the tracking and synchronization modules (not
    the Holevo variance).
    """
    d = wrap_angle(dist.grid - reference)
    return float(np.sum(d * d * dist.density) * dist.dtheta)


def clone_phase_variance(mu: float, m_copies: int) -> float:
    """Phase variance (3 - 2/M) / (4 mu) of each of M optimal clones.

    Analytic calculator: optimal cloning of a coherent state (linear
    amplification followed by splitting) yields M copies with this variance,
    approaching 3/(4 mu) for large M.  One copy (M = 1) is the original.
    """
    if m_copies < 1:
        raise ValueError("number of copies must be >= 1")
    if not mu > 0:
        raise ValueError("mu must be positive")
    return (3.0 - 2.0 / m_copies) / (4.0 * mu)
