"""Stochastic simulation of phase locking to a diffusing-phase coherent beam.

Model: the beam phase diffuses as dphi = sqrt(ell) dW, and homodyne detection
against a local oscillator of phase Phi gives the scaled photocurrent
increment I dt = 2 alpha cos(Phi - phi) dt + dW_shot with alpha = sqrt(f).
The single figure of merit is N = f/ell, the photon number per coherence
time.

Two estimators are provided:

* adaptive: keep the local oscillator at the null point Phi = est + pi/2 and
  feed the photocurrent back with gain ell/sigma^2.  With sigma^2 at its
  stationary value 1/(2 sqrt(N)) the steady-state mean-square error is
  1/(2 sqrt(N)).
* heterodyne (dual-quadrature): split the beam in two and measure both
  quadratures, dZ = sqrt(2) alpha e^{i phi} dt + complex shot noise; estimate
  the phase as arg of an exponential moving average of dZ with bandwidth
  lambda.  The lag/noise tradeoff ell/(2 lambda) + lambda/(4 f) is minimized
  at lambda = sqrt(2 f ell), where the error is 1/sqrt(2N) -- worse than
  adaptive by sqrt(2).

Monte Carlo runs are deterministic per (seed, config): every trial owns two
Gaussian increment streams (phase and shot noise) seeded as
[seed, trial, 0|1], so neither trial order nor worker count can change any
result.  Passing ``noise_dt`` draws the increments on a finer grid and sums
them per step, which lets two runs at different dt share identical Wiener
paths for time-step convergence checks.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "BeamParams",
    "TrackerState",
    "NoiseStep",
    "TrackingResult",
    "adaptive_mse_limit",
    "heterodyne_mse_limit",
    "optimal_bandwidth",
    "loop_time_constant",
    "auto_dt",
    "step_phase",
    "photocurrent_increment",
    "adaptive_step",
    "variance_ode_step",
    "run_tracking",
    "heterodyne_track",
    "heterodyne_bandwidth_sweep",
]

MODES = ("adaptive", "heterodyne")


@dataclass(frozen=True)
class BeamParams:
    """Coherent beam of photon flux f (1/s) and linewidth ell (rad^2/s)."""

    f: float
    ell: float

    def __post_init__(self):
        if not self.f > 0:
            raise ValueError("flux f must be positive")
        if self.ell < 0:
            raise ValueError("linewidth ell must be nonnegative")

    @property
    def alpha(self) -> float:
        """Beam amplitude sqrt(f)."""
        return math.sqrt(self.f)

    @property
    def N(self) -> float:
        """Photons per coherence time, f/ell (inf for a static phase)."""
        return self.f / self.ell if self.ell > 0 else math.inf

    def stationary_sigma2(self) -> float:
        """Stationary error variance 1/(2 sqrt(N)) of the adaptive filter."""
        if self.ell == 0:
            return 0.0
        return 1.0 / (2.0 * math.sqrt(self.N))


@dataclass(frozen=True)
class TrackerState:
    """One locking loop: true phase, estimate, LO phase, error variance, time.

    Phases are unwrapped (radians); in adaptive mode lo_phase is maintained at
    phi_est + pi/2 after every step.
    """

    phi_true: float
    phi_est: float
    lo_phase: float
    sigma2: float
    t: float = 0.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")


@dataclass(frozen=True)
class NoiseStep:
    """Wiener increments for one step: dw_phase drives the beam phase,
    dw_shot the photocurrent shot noise.  Each has variance dt."""

    dw_phase: float
    dw_shot: float


@dataclass(frozen=True)
class TrackingResult:
    """Ensemble- and time-averaged steady-state tracking errors."""

    mse_wrapped: float
    mse_unwrapped: float
    stderr: float
    trials: int
    burn_in: float
    duration: float
    cycle_slip_rate: float
    slips_significant: bool


def adaptive_mse_limit(N: float) -> float:
    """Steady-state MSE 1/(2 sqrt(N)) of the adaptive loop."""
    return 1.0 / (2.0 * math.sqrt(N))


def heterodyne_mse_limit(N: float) -> float:
    """Steady-state MSE 1/sqrt(2N) of the optimal non-adaptive measurement."""
    return 1.0 / math.sqrt(2.0 * N)


def optimal_bandwidth(beam: BeamParams) -> float:
    """Filter bandwidth sqrt(2 f ell) balancing lag against shot noise."""
    return math.sqrt(2.0 * beam.f * beam.ell)


def loop_time_constant(beam: BeamParams, mode: str, bandwidth: float | None = None) -> float:
    """Error relaxation time: 1/(2 ell sqrt(N)) adaptive, 1/lambda heterodyne."""
    if mode == "adaptive":
        if beam.ell == 0:
            raise ValueError("adaptive time constant undefined for ell = 0")
        return 1.0 / (2.0 * beam.ell * math.sqrt(beam.N))
    if mode == "heterodyne":
        lam = optimal_bandwidth(beam) if bandwidth is None else bandwidth
        if not lam > 0:
            raise ValueError("bandwidth must be positive")
        return 1.0 / lam
    raise ValueError(f"mode must be one of {MODES}")


def auto_dt(beam: BeamParams, mode: str = "adaptive", bandwidth: float | None = None) -> float:
    """Default time step: one-hundredth of the loop time constant."""
    return 1e-2 * loop_time_constant(beam, mode, bandwidth)


# --- single-step reference operations --------------------------------------

def step_phase(state: TrackerState, beam: BeamParams, dt: float, noise: NoiseStep) -> TrackerState:
    """Advance the true beam phase by its diffusion increment sqrt(ell) dW.

    Exact for this driftless diffusion at any dt.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    return replace(state,
                   phi_true=state.phi_true + math.sqrt(beam.ell) * noise.dw_phase,
                   t=state.t + dt)


def photocurrent_increment(state: TrackerState, beam: BeamParams, dt: float,
                           noise: NoiseStep) -> float:
    """Homodyne photocurrent increment I dt = 2 alpha cos(Phi - phi) dt + dW_shot."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return 2.0 * beam.alpha * math.cos(state.lo_phase - state.phi_true) * dt + noise.dw_shot


def adaptive_step(state: TrackerState, beam: BeamParams, dt: float, noise: NoiseStep,
                  gain: float | None = None, evolve_sigma2: bool = False) -> TrackerState:
    """One step of the adaptive lock: diffuse, measure at the null point, feed back.

    The local oscillator sits at Phi = est + pi/2, so the full nonlinear
    photocurrent is I dt = 2 alpha sin(phi - est) dt + dW_shot, and the
    estimate moves by gain * I dt / (2 alpha) with gain = ell/sigma^2 (or the
    explicit ``gain``, needed e.g. for ell = 0).  With ``evolve_sigma2`` the
    error variance follows :func:`variance_ode_step`; by default it is held
    fixed (stationary-gain operation).

    Warns when dt exceeds one-hundredth of the loop time constant.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    g = beam.ell / state.sigma2 if gain is None else gain
    if g > 0 and g * dt > 1e-2 * (1 + 1e-9):
        warnings.warn("dt exceeds 1e-2 of the loop relaxation time", stacklevel=2)
    phi = state.phi_true + math.sqrt(beam.ell) * noise.dw_phase
    lo = state.phi_est + math.pi / 2.0
    idt = 2.0 * beam.alpha * math.cos(lo - phi) * dt + noise.dw_shot
    est = state.phi_est + g * idt / (2.0 * beam.alpha)
    sig2 = variance_ode_step(state.sigma2, beam, dt) if evolve_sigma2 else state.sigma2
    return TrackerState(phi_true=phi, phi_est=est, lo_phase=est + math.pi / 2.0,
                        sigma2=sig2, t=state.t + dt)


def variance_ode_step(sigma2: float, beam: BeamParams, dt: float) -> float:
    """Advance the error variance: diffusion growth, then inverse-variance
    combination with the fresh-measurement variance 1/(4 alpha^2 dt).

    The continuum limit is d(sigma^2)/dt = ell - 4 f sigma^4, stationary at
    1/(2 sqrt(N)); the combined rational form is used instead of the Euler
    step because it stays positive and stable for any dt and any starting
    variance.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    grown = sigma2 + beam.ell * dt
    return grown / (1.0 + 4.0 * beam.f * dt * grown)


# --- Monte Carlo engine -----------------------------------------------------

def _trial_streams(seed: int, trial: int):
    return (np.random.default_rng([seed, trial, 0]),
            np.random.default_rng([seed, trial, 1]))


def _draw_increments(rng, n_steps: int, refine: int, noise_dt: float, pair: bool):
    shape = (n_steps * refine, 2) if pair else (n_steps * refine,)
    x = rng.standard_normal(shape) * math.sqrt(noise_dt)
    if pair:
        x = x[:, 0] + 1j * x[:, 1]
    if refine > 1:
        x = x.reshape(n_steps, refine).sum(axis=1)
    return x


def _simulate_trials(mode, beam, dt, steps, burn_steps, seed, trials_lo, trials_hi,
                     phi0, bandwidth, gain, evolve_sigma2, refine):
    """Simulate trials [trials_lo, trials_hi) in lockstep.

    Returns per-trial (mse_wrapped, mse_unwrapped, slips) arrays.  Per-trial
    values depend only on (seed, trial, config), never on the chunk bounds.
    """
    n = trials_hi - trials_lo
    noise_dt = dt / refine
    dwp = np.empty((n, steps))
    if mode == "heterodyne":
        dws = np.empty((n, steps), dtype=complex)
    else:
        dws = np.empty((n, steps))
    for i, trial in enumerate(range(trials_lo, trials_hi)):
        rp, rs = _trial_streams(seed, trial)
        dwp[i] = _draw_increments(rp, steps, refine, noise_dt, pair=False)
        dws[i] = _draw_increments(rs, steps, refine, noise_dt, pair=(mode == "heterodyne"))

    sl = math.sqrt(beam.ell)
    alpha = beam.alpha
    phi = np.full(n, phi0)
    sq_w = np.zeros(n)
    sq_u = np.zeros(n)
    slips = np.zeros(n, dtype=np.int64)
    winding = np.zeros(n, dtype=np.int64)
    nobs = 0

    def observe(e):
        nonlocal sq_w, sq_u, slips, nobs
        w = (e + np.pi) % (2 * np.pi) - np.pi
        sq_w += w * w
        sq_u += e * e
        new_wind = np.round(e / (2 * np.pi)).astype(np.int64)
        slips += np.abs(new_wind - winding)
        winding[:] = new_wind
        nobs += 1

    if mode == "adaptive":
        est = np.full(n, phi0)
        sig2 = beam.stationary_sigma2() if beam.ell > 0 else 1.0
        g = (beam.ell / sig2) if gain is None else gain
        for k in range(steps):
            phi = phi + sl * dwp[:, k]
            idt = 2.0 * alpha * np.sin(phi - est) * dt + dws[:, k]
            est = est + g * idt / (2.0 * alpha)
            if evolve_sigma2:
                grown = sig2 + beam.ell * dt
                sig2 = grown / (1.0 + 4.0 * beam.f * dt * grown)
                g = (beam.ell / sig2) if gain is None else gain
            if k >= burn_steps:
                observe(phi - est)
    else:
        lam = bandwidth
        s2a = math.sqrt(2.0) * alpha
        A = s2a * np.exp(1j * np.full(n, phi0))
        # angle(A) is wrapped; accumulate its increments to keep the estimate
        # unwrapped alongside phi
        prev_ang = np.angle(A)
        est = np.full(n, phi0)
        for k in range(steps):
            phi = phi + sl * dwp[:, k]
            dZ = s2a * np.exp(1j * phi) * dt + dws[:, k]
            A = A + lam * (dZ - A * dt)
            ang = np.angle(A)
            est = est + ((ang - prev_ang + np.pi) % (2 * np.pi) - np.pi)
            prev_ang = ang
            if k >= burn_steps:
                observe(phi - est)
    return sq_w / nobs, sq_u / nobs, slips


def _chunk_worker(args):
    return _simulate_trials(*args)


def run_tracking(mode: str, beam: BeamParams, dt: float | None = None,
                 duration: float | None = None, burn_in: float | None = None,
                 trials: int = 200, seed: int = 0, workers: int = 1,
                 phi0: float = 0.0, bandwidth: float | None = None,
                 gain: float | None = None, evolve_sigma2: bool = False,
                 noise_dt: float | None = None) -> TrackingResult:
    """Ensemble steady-state tracking error for one configuration.

    dt, burn_in and duration default to 1e-2, 10 and 30 loop time constants.
    The wrapped MSE is averaged over time (after burn_in) and trials; the
    standard error is across trials.  Cycle slips (winding-number changes of
    the unwrapped error) are counted separately, and ``slips_significant`` is
    set when they contribute more than 1% of the wrapped MSE.  Results are
    bitwise reproducible for fixed (config, seed), whatever ``workers`` is.

    ``noise_dt`` (default dt; must divide dt) fixes the grid on which the
    Wiener increments are drawn, so runs at different dt can share paths.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "heterodyne":
        bandwidth = optimal_bandwidth(beam) if bandwidth is None else bandwidth
        if not bandwidth > 0:
            raise ValueError("bandwidth must be positive")
    if mode == "adaptive" and beam.ell == 0 and gain is None:
        raise ValueError("adaptive tracking of a static phase needs an explicit gain")
    if mode == "adaptive" and gain is not None:
        tau = 1.0 / gain
    else:
        tau = loop_time_constant(beam, mode, bandwidth)
    if dt is None:
        dt = 1e-2 * tau
    if burn_in is None:
        burn_in = 10.0 * tau
    if duration is None:
        duration = burn_in + 20.0 * tau
    if trials < 100:
        warnings.warn("fewer than 100 trials: MSE estimate will be noisy", stacklevel=2)
    if duration < burn_in + 20.0 * tau * (1 - 1e-9):
        warnings.warn("duration below burn_in + 20 loop time constants", stacklevel=2)
    refine = 1
    if noise_dt is not None:
        refine = int(round(dt / noise_dt))
        if refine < 1 or abs(refine * noise_dt - dt) > 1e-9 * dt:
            raise ValueError("noise_dt must divide dt")
    steps = int(round(duration / dt))
    burn_steps = int(round(burn_in / dt))
    if steps <= burn_steps:
        raise ValueError("duration leaves no observation steps after burn_in")

    workers = max(1, int(workers))
    bounds = np.linspace(0, trials, min(workers, trials) + 1).astype(int)
    chunks = [(mode, beam, dt, steps, burn_steps, seed, int(lo), int(hi),
               phi0, bandwidth, gain, evolve_sigma2, refine)
              for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if len(chunks) == 1 or workers == 1:
        parts = [_simulate_trials(*c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_chunk_worker, chunks))
    mse_w = np.concatenate([p[0] for p in parts])
    mse_u = np.concatenate([p[1] for p in parts])
    slips = np.concatenate([p[2] for p in parts])

    mean_w = float(mse_w.mean())
    mean_u = float(mse_u.mean())
    stderr = float(mse_w.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
    obs_time = (steps - burn_steps) * dt
    slip_rate = float(slips.sum() / (trials * obs_time))
    significant = bool(mean_u - mean_w > 0.01 * mean_w)
    return TrackingResult(mse_wrapped=mean_w, mse_unwrapped=mean_u, stderr=stderr,
                          trials=trials, burn_in=burn_in, duration=duration,
                          cycle_slip_rate=slip_rate, slips_significant=significant)


def heterodyne_track(beam: BeamParams, dt: float | None = None,
                     duration: float | None = None, trials: int = 200, seed: int = 0,
                     filter_bandwidth: float | None = None, burn_in: float | None = None,
                     workers: int = 1, noise_dt: float | None = None) -> TrackingResult:
    """Dual-quadrature (non-adaptive) baseline at a given filter bandwidth."""
    return run_tracking("heterodyne", beam, dt=dt, duration=duration, burn_in=burn_in,
                        trials=trials, seed=seed, workers=workers,
                        bandwidth=filter_bandwidth, noise_dt=noise_dt)


def heterodyne_bandwidth_sweep(beam: BeamParams, bandwidths, trials: int = 200,
                               seed: int = 0, workers: int = 1):
    """Run the dual-quadrature tracker at each bandwidth; returns
    [(bandwidth, TrackingResult)] in input order (per-bandwidth seeds are
    derived from the master seed and the sweep index)."""
    out = []
    for i, lam in enumerate(bandwidths):
        sub = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        out.append((float(lam), heterodyne_track(beam, trials=trials, seed=sub,
                                                 filter_bandwidth=float(lam),
                                                 workers=workers)))
    return out
