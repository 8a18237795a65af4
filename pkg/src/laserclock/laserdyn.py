"""Master-equation dynamics of a single laser mode with phase-insensitive gain.

The mode decays at rate kappa and is repumped by a gain process that adds no
phase noise: the gain jump operator is the bare raising isometry
a^dag (a a^dag)^{-1/2} = sum_n |n+1><n|, acting at rate kappa*mu.  The
stationary state is then the Poisson mixture of number states with mean mu,
and the field coherence <a^dag(t) a(0)> decays at half the linewidth.

Both the gain and the loss couple a matrix element rho_{n,m} only to elements
with the same offset k = m - n, so the Liouvillian splits into independent
sector matrices: k = 0 carries the populations (birth-death chain, birth
kappa*mu, death kappa*n), k = 1 carries the first-order coherence whose
slowest eigenvalue gives the linewidth.  In the large-mu limit the linewidth
approaches kappa/(4 mu), half the standard quantum limit kappa/(2 mu) of a
conventional (noisy-gain) laser; at finite mu it exceeds that asymptote by a
relative O(1/mu) correction.

Everything is computed in the frame rotating at the optical frequency: the
-i omega [a^dag a, rho] term only shifts sector-k eigenvalues by -i omega k
and has no effect on decay rates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eig, expm
from scipy.special import gammaln

from .errors import LinewidthFitError
from .fock import DensityOperator

__all__ = [
    "LaserParams",
    "LiouvillianSector",
    "LinewidthEstimate",
    "poisson_weights",
    "build_liouvillian_sector",
    "full_liouvillian",
    "stationary_state",
    "extract_linewidth",
    "sql_linewidth",
    "hl_linewidth",
    "loss_only_variance_growth",
]

GAIN_KINDS = ("noiseless", "none")
LINEWIDTH_METHODS = ("eigenvalue", "decay_fit")


@dataclass(frozen=True)
class LaserParams:
    """Source laser: cavity decay rate kappa (1/s), mean photon number mu,
    gain kind ("noiseless" or "none"), optical frequency omega (rad/s,
    bookkeeping only)."""

    kappa: float
    mu: float
    gain_kind: str = "noiseless"
    omega: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.gain_kind not in GAIN_KINDS:
            raise ValueError(f"gain_kind must be one of {GAIN_KINDS}")


@dataclass(frozen=True)
class LiouvillianSector:
    """Generator restricted to the elements x_n = rho_{n, n+k} for fixed k.

    ``matrix[i, j]`` is the rate (1/s) at which x_j feeds dx_i/dt.
    """

    sector_offset: int
    matrix: np.ndarray


@dataclass(frozen=True)
class LinewidthEstimate:
    """FWHM linewidth (rad/s) with the method and truncation that produced it."""

    value: float
    method: str
    truncation: int

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("linewidth must be positive")


def poisson_weights(mu: float, truncation: int) -> np.ndarray:
    """Poisson(mu) probabilities for n = 0 .. truncation (log-space, unnormalized tail)."""
    n = np.arange(truncation + 1)
    return np.exp(-mu + n * np.log(mu) - gammaln(n + 1))


def _check_truncation(params: LaserParams, truncation: int) -> None:
    if truncation < 2:
        raise ValueError("truncation must be >= 2")
    if truncation > 512:
        raise ValueError("dense sector solvers are capped at truncation 512")
    if params.gain_kind == "noiseless":
        tail = 1.0 - float(poisson_weights(params.mu, truncation).sum())
        if tail > 1e-9:
            raise ValueError(
                f"truncation {truncation} too small: stationary tail mass {tail:.2e} > 1e-9"
            )


def build_liouvillian_sector(
    params: LaserParams,
    sector_offset: int,
    truncation: int,
    include_rotating_frame: bool = False,
) -> LiouvillianSector:
    """Build the sector-k generator for x_n = rho_{n, n+k}.

    Loss contributes kappa * [sqrt((n+1)(n+k+1)) x_{n+1} - (n + k/2) x_n].
    The noiseless gain, written as a dissipator of the raising isometry
    truncated at the top state (which keeps every sector exactly
    trace-consistent), contributes kappa*mu * [x_{n-1} - x_n] away from the
    boundary.  With ``include_rotating_frame`` the lab-frame term
    -i omega k x_n is added; by default it is dropped (rotating frame).

    Raises
    ------
    ValueError
        If the truncation leaves stationary tail mass above 1e-9.
    """
    k = int(sector_offset)
    if k < 0 or k > truncation:
        raise ValueError("sector_offset must be in [0, truncation]")
    _check_truncation(params, truncation)
    kappa, mu = params.kappa, params.mu
    dim = truncation - k + 1
    n = np.arange(dim)
    L = np.zeros((dim, dim), dtype=complex)
    # loss kappa (a rho a^dag - {a^dag a, rho}/2)
    L[n[:-1], n[:-1] + 1] += kappa * np.sqrt((n[:-1] + 1.0) * (n[:-1] + k + 1.0))
    L[n, n] -= kappa * (n + k / 2.0)
    if params.gain_kind == "noiseless":
        L[n[1:], n[1:] - 1] += kappa * mu
        L[n, n] -= kappa * mu * ((n <= truncation - 1).astype(float)
                                 + (n + k <= truncation - 1).astype(float)) / 2.0
    if include_rotating_frame:
        L[n, n] -= 1j * params.omega * k
    return LiouvillianSector(sector_offset=k, matrix=L)


def full_liouvillian(params: LaserParams, truncation: int) -> np.ndarray:
    """Dense superoperator on row-major vectorized rho, for small truncations.

    Diagnostic companion to :func:`build_liouvillian_sector`: applying it to a
    basis matrix E_{n, n+k} must give support only on offset k, and the
    extracted blocks must equal the sector matrices.  Dimension grows as
    (truncation+1)^4, so the truncation is capped at 64.
    """
    if truncation > 64:
        raise ValueError("full superoperator capped at truncation 64")
    _check_truncation(params, truncation)
    d = truncation + 1
    a = np.diag(np.sqrt(np.arange(1.0, d)), k=1).astype(complex)
    I = np.eye(d, dtype=complex)

    def dissipator(c, rate):
        cd = c.conj().T
        cdc = cd @ c
        # row-major vec: vec(L X R) = (L kron R^T) vec(X)
        return rate * (np.kron(c, cd.T) - 0.5 * np.kron(cdc, I) - 0.5 * np.kron(I, cdc.T))

    L = dissipator(a, params.kappa)
    if params.gain_kind == "noiseless":
        raise_iso = np.diag(np.ones(d - 1), k=-1).astype(complex)
        L = L + dissipator(raise_iso, params.kappa * params.mu)
    return L


def stationary_state(params: LaserParams, truncation: int) -> DensityOperator:
    """Stationary state of the noiseless-gain laser: the k=0 null vector.

    Solves L_0 p = 0 with the trace constraint appended; the result is
    diagonal, equal to the Poisson(mu) number distribution up to the
    truncated tail (detailed balance kappa*mu*P(n) = kappa*(n+1)*P(n+1)).

    Raises
    ------
    ValueError
        If gain_kind is not "noiseless", or the solve indicates the
        truncation is too small.
    """
    if params.gain_kind != "noiseless":
        raise ValueError("stationary state requires gain_kind='noiseless'")
    L0 = build_liouvillian_sector(params, 0, truncation).matrix.real
    A = np.vstack([L0, np.ones(truncation + 1)])
    b = np.zeros(truncation + 2)
    b[-1] = 1.0
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(L0 @ p)))
    if resid > 1e-9 or p.min() < -1e-12:
        raise ValueError(
            f"k=0 null-space solve ill-conditioned (residual {resid:.2e}); "
            "truncation too small"
        )
    p = np.maximum(p, 0.0)
    p /= p.sum()
    return DensityOperator(truncation=truncation, matrix=np.diag(p).astype(complex))


def _coherence_amplitude(params: LaserParams, truncation: int):
    """Initial k=1 sector vector a*rho_ss and the trace-out weights for Tr(a^dag X)."""
    p = stationary_state(params, truncation).populations()
    n = np.arange(truncation)
    x0 = np.sqrt(n + 1.0) * p[1:]
    weights = np.sqrt(n + 1.0)
    return x0.astype(complex), weights


def extract_linewidth(
    params: LaserParams,
    truncation: int,
    method: str = "eigenvalue",
) -> LinewidthEstimate:
    """FWHM linewidth of the noiseless-gain laser from the k=1 sector.

    method="eigenvalue"
        ell = -2 Re(lambda_1), lambda_1 the k=1 eigenvalue of smallest
        |Re|; the first-order coherence decays asymptotically as
        e^{lambda_1 t} and the spectrum is Lorentzian with FWHM ell.
    method="decay_fit"
        Evolve X(0) = a rho_ss under the k=1 generator by repeated
        short-time propagators and fit the exponential decay rate r of
        |Tr(a^dag X(t))| over two slow e-folds (after the fast transients
        have died); ell = 2 r.

    Raises
    ------
    LinewidthFitError
        If the decay-fit residual shows the decay is not exponential.
    """
    if params.gain_kind != "noiseless":
        raise ValueError("linewidth extraction requires gain_kind='noiseless'")
    if method not in LINEWIDTH_METHODS:
        raise ValueError(f"method must be one of {LINEWIDTH_METHODS}")
    L1 = build_liouvillian_sector(params, 1, truncation).matrix
    if method == "eigenvalue":
        vals = eig(L1, right=False)
        lam1 = vals[np.argmin(np.abs(vals.real))]
        return LinewidthEstimate(value=float(-2.0 * lam1.real), method=method,
                                 truncation=truncation)

    x, w = _coherence_amplitude(params, truncation)
    kappa, mu = params.kappa, params.mu
    # fast transients decay at O(kappa); the slow mode at ~kappa/(8 mu)
    t_start = 8.0 / kappa
    t_span = 16.0 * mu / kappa
    nsteps = 60
    dt = t_span / nsteps
    x = expm(L1 * t_start) @ x
    U = expm(L1 * dt)
    ts = t_start + dt * np.arange(nsteps + 1)
    g = np.empty(nsteps + 1)
    for i in range(nsteps + 1):
        g[i] = np.abs(w @ x)
        x = U @ x
    slope, intercept = np.polyfit(ts, np.log(g), 1)
    resid = np.max(np.abs(np.log(g) - (slope * ts + intercept)))
    if resid > 1e-3:
        raise LinewidthFitError(
            f"coherence decay not exponential: max log-residual {resid:.2e} > 1e-3"
        )
    return LinewidthEstimate(value=float(-2.0 * slope), method=method, truncation=truncation)


def sql_linewidth(params: LaserParams) -> float:
    """Standard-quantum-limit linewidth kappa/(2 mu) of a conventional laser.

    Analytic: the standard (noisy-gain) master equation is not simulated
    here; the same limit is exercised end-to-end by the tracking module's
    stochastic phase model.
    """
    return params.kappa / (2.0 * params.mu)


def hl_linewidth(params: LaserParams) -> float:
    """Heisenberg-limit linewidth kappa/(4 mu), the large-mu asymptote of the
    noiseless-gain laser (half the SQL)."""
    return params.kappa / (4.0 * params.mu)


def loss_only_variance_growth(mu: float, kappa: float, t: float) -> float:
    """Phase-variance growth kappa*t/(4 mu) of a coherent state under pure loss.

    Valid in the short-time, large-mu regime: damping shrinks the amplitude
    while the quadrature noise stays at the vacuum level, so the phase
    variance 1/(4 mu) grows at rate kappa/(4 mu).  A noiseless gain restores
    the amplitude without removing that growth, which is why it bounds the
    achievable linewidth.  Warns outside kappa*t <= 0.1 or mu < 25.
    """
    if not (mu > 0 and kappa > 0 and t >= 0):
        raise ValueError("mu, kappa must be positive and t nonnegative")
    if kappa * t > 0.1 or mu < 25:
        warnings.warn(
            "loss_only_variance_growth outside validity regime (kappa*t <= 0.1, mu >= 25)",
            stacklevel=2,
        )
    return kappa * t / (4.0 * mu)
