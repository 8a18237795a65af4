"""A fully decohering "classical channel" that still transmits a phase reference.

The channel is defined by an orthonormal lattice of phase-space-localized
states |q_n, p_m>: boxcar position profiles of width Delta centered at
q_n = Delta*n, carrying plane-wave momentum p_m = 2*pi*m/Delta.  In the
position representation (q = (a + a^dag)/sqrt(2) convention)

    <q | q_n, p_m> = Delta^{-1/2} * chi_[q_n - Delta/2, q_n + Delta/2](q)
                     * exp(+i q p_m),

so each lattice state has mean amplitude <a> = (q_n + i p_m)/sqrt(2).  The
channel measures (dephases in) this basis: a coherent state |alpha> comes out
as the mixture of lattice states with probabilities |<q_n, p_m | alpha>|^2.
For |alpha| >> 1 that distribution concentrates near (q_n + i p_m)/sqrt(2)
~ alpha, so the emerging state, though fully decohered, still carries the
large coherent amplitude -- i.e. the phase reference survives a channel that
can transmit no quantum information.

Overlaps fall off only as 1/p_m^2 in probability (the boxcar edges), so
capturing all but 1e-6 of the mass needs momentum windows of order 1e4
points; ``decohere`` therefore evaluates the overlap integral in closed form
(stably, via the Faddeeva function), while :func:`lattice_overlap` exposes
the direct adaptive-quadrature route the tests check it against.  The same
sharp edges make every p-moment of a single lattice state diverge (its
momentum density only decays as p^-2); the channel output's mean amplitude
stays finite because the lattice-point momenta enter weighted by the 1/p_m^2
probabilities, leaving a conditionally convergent sum evaluated over windows
symmetric about the peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import dawsn, erf, erfcinv, wofz

from .errors import QuadratureError, WindowError

__all__ = [
    "LatticeSpec",
    "LatticeDistribution",
    "lattice_overlap",
    "lattice_mean_amplitude",
    "lattice_state_overlap",
    "orthonormality_defect",
    "decohere",
    "output_mean_amplitude",
    "coherent_fidelity",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice spacing Delta plus an optional fixed (n, m) window.

    With both ranges None, :func:`decohere` sizes the window itself.
    Ranges are inclusive (n_min, n_max) pairs.
    """

    delta: float = 1.0
    n_range: tuple | None = None
    m_range: tuple | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        for r in (self.n_range, self.m_range):
            if r is not None and r[1] < r[0]:
                raise ValueError("window ranges must be nonempty")

    def q(self, n):
        return self.delta * np.asarray(n)

    def p(self, m):
        return 2 * np.pi * np.asarray(m) / self.delta


@dataclass(frozen=True)
class LatticeDistribution:
    """Probabilities |<q_n, p_m|alpha>|^2 over a finite window.

    ``probabilities[i, j]`` belongs to (ns[i], ms[j]).
    """

    delta: float
    ns: np.ndarray
    ms: np.ndarray
    probabilities: np.ndarray
    captured_mass: float

    def __post_init__(self):
        P = np.asarray(self.probabilities, dtype=float)
        if P.shape != (len(self.ns), len(self.ms)):
            raise ValueError("probabilities shape must be (len(ns), len(ms))")
        if P.min() < 0:
            raise ValueError("probabilities must be nonnegative")
        if self.captured_mass > 1 + 1e-9:
            raise ValueError("captured mass exceeds 1")
        object.__setattr__(self, "probabilities", P)

    def argmax(self):
        i, j = np.unravel_index(int(self.probabilities.argmax()), self.probabilities.shape)
        return int(self.ns[i]), int(self.ms[j])


def _coherent_qp(alpha: complex):
    return math.sqrt(2) * alpha.real, math.sqrt(2) * alpha.imag


def _coherent_wavefunction(q, alpha: complex):
    qb, pb = _coherent_qp(alpha)
    return np.pi ** -0.25 * np.exp(-(q - qb) ** 2 / 2 + 1j * pb * q - 1j * qb * pb / 2)


def _scaled_erf(u, s):
    """e^{-s^2} erf(u - i s) without overflow, for real arrays u, s.

    Uses erfc(z) = e^{-z^2} w(iz) (upper half plane) and the Dawson function
    on the imaginary axis.
    """
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    u, s = np.broadcast_arrays(u, s)
    out = np.empty(u.shape, dtype=complex)
    pos = u > 0
    neg = u < 0
    zer = ~(pos | neg)
    if pos.any():
        up, sp = u[pos], s[pos]
        out[pos] = np.exp(-sp ** 2) - np.exp(-up ** 2 + 2j * up * sp) * wofz(sp + 1j * up)
    if neg.any():
        un, sn = u[neg], s[neg]
        out[neg] = -np.exp(-sn ** 2) + np.exp(-un ** 2 + 2j * un * sn) * wofz(-sn - 1j * un)
    if zer.any():
        out[zer] = -2j / math.sqrt(math.pi) * dawsn(s[zer])
    return out


def _overlap_closed(alpha: complex, delta: float, n, m):
    """<q_n, p_m | alpha> in closed form; broadcasts over integer arrays n, m."""
    qb, pb = _coherent_qp(alpha)
    p = 2 * np.pi * np.asarray(m, dtype=float) / delta
    dlt = pb - p
    nn = np.asarray(n, dtype=float)
    ua = (delta * nn - delta / 2 - qb) / math.sqrt(2)
    ub = (delta * nn + delta / 2 - qb) / math.sqrt(2)
    s = dlt / math.sqrt(2)
    E = _scaled_erf(ub, s) - _scaled_erf(ua, s)
    pref = (np.pi ** 0.25 / math.sqrt(2 * delta)) * np.exp(1j * dlt * qb - 1j * qb * pb / 2)
    return pref * E


def _quad_complex(fun, a, b, epsabs=1e-12):
    re, re_err = quad(lambda q: fun(q).real, a, b, epsabs=epsabs, epsrel=0.0, limit=400)[:2]
    im, im_err = quad(lambda q: fun(q).imag, a, b, epsabs=epsabs, epsrel=0.0, limit=400)[:2]
    if max(re_err, im_err) > 1e-10:
        raise QuadratureError(
            f"overlap quadrature error estimate {max(re_err, im_err):.2e} above 1e-10"
        )
    return re + 1j * im


def lattice_overlap(alpha: complex, spec: LatticeSpec, n: int, m: int) -> complex:
    """<q_n, p_m | alpha> by adaptive quadrature of the boxcar integral.

        Delta^{-1/2} * int_{q_n - Delta/2}^{q_n + Delta/2}
            exp(-i q p_m) psi_alpha(q) dq

    converged to 1e-10 absolute.  Single-pair reference implementation; the
    channel operation itself uses the equivalent closed form.

    Raises
    ------
    QuadratureError
        If the integrator cannot certify 1e-10 accuracy.
    ValueError
        If the spec has a window and (n, m) lies outside it.
    """
    alpha = complex(alpha)
    if not (np.isfinite(alpha.real) and np.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    _check_in_window(spec, n, m)
    p = 2 * np.pi * m / spec.delta
    a = spec.delta * n - spec.delta / 2
    b = spec.delta * n + spec.delta / 2
    val = _quad_complex(lambda q: np.exp(-1j * q * p) * _coherent_wavefunction(q, alpha), a, b)
    return val / math.sqrt(spec.delta)


def _check_in_window(spec, n, m):
    if spec.n_range is not None and not (spec.n_range[0] <= n <= spec.n_range[1]):
        raise ValueError(f"n={n} outside window {spec.n_range}")
    if spec.m_range is not None and not (spec.m_range[0] <= m <= spec.m_range[1]):
        raise ValueError(f"m={m} outside window {spec.m_range}")


def lattice_mean_amplitude(spec: LatticeSpec, n: int, m: int) -> complex:
    """Mean coherent amplitude (q_n + i p_m)/sqrt(2) of lattice state (n, m)."""
    _check_in_window(spec, n, m)
    return (spec.delta * n + 2j * np.pi * m / spec.delta) / math.sqrt(2)


def lattice_state_overlap(spec: LatticeSpec, nm1: tuple, nm2: tuple) -> complex:
    """<q_n1, p_m1 | q_n2, p_m2> by quadrature over the support intersection.

    Distinct n means disjoint boxes, hence exactly zero; equal n reduces to the
    boxcar Fourier integral, which is delta_{m1 m2}.
    """
    (n1, m1), (n2, m2) = nm1, nm2
    if n1 != n2:
        return 0.0 + 0.0j
    dp = 2 * np.pi * (m2 - m1) / spec.delta
    a = spec.delta * n1 - spec.delta / 2
    b = spec.delta * n1 + spec.delta / 2
    return _quad_complex(lambda q: np.exp(1j * q * dp) + 0j, a, b) / spec.delta


def orthonormality_defect(spec: LatticeSpec, n_span: int = 2, m_span: int = 2) -> float:
    """Max elementwise deviation of the lattice Gram matrix from the identity,
    over the window |n| <= n_span, |m| <= m_span (quadrature route)."""
    states = [(n, m) for n in range(-n_span, n_span + 1)
              for m in range(-m_span, m_span + 1)]
    worst = 0.0
    for i, s1 in enumerate(states):
        for s2 in states[i:]:
            g = lattice_state_overlap(spec, s1, s2)
            target = 1.0 if s1 == s2 else 0.0
            worst = max(worst, abs(g - target))
    return worst


def _window_masses(alpha, delta, ns):
    """Exact per-box full-momentum mass int_box |psi_alpha|^2 dq (Parseval)."""
    qb, _ = _coherent_qp(alpha)
    a = delta * ns - delta / 2
    b = delta * ns + delta / 2
    return 0.5 * (erf(b - qb) - erf(a - qb))


def decohere(alpha: complex, spec: LatticeSpec, mass_deficit: float = 1e-6) -> LatticeDistribution:
    """Send |alpha> through the channel: P(n, m) = |<q_n, p_m | alpha>|^2.

    With no window on the spec, the window is auto-sized: boxes cover the
    Gaussian in q to 1% of the deficit budget, and the momentum half-width
    grows (the probability tail falls off as C/m) until the captured mass
    reaches 1 - mass_deficit.  A fixed window is used as given and must
    capture that mass.

    Raises
    ------
    WindowError
        If the requested mass cannot be captured (reports the achieved mass).
    """
    alpha = complex(alpha)
    if not (np.isfinite(alpha.real) and np.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    if not 0 < mass_deficit < 1:
        raise ValueError("mass_deficit must be in (0, 1)")
    if (spec.n_range is None) != (spec.m_range is None):
        raise ValueError("give both window ranges or neither")
    delta = spec.delta
    qb, pb = _coherent_qp(alpha)

    if spec.n_range is not None and spec.m_range is not None:
        ns = np.arange(spec.n_range[0], spec.n_range[1] + 1)
        ms = np.arange(spec.m_range[0], spec.m_range[1] + 1)
        P = np.abs(_overlap_closed(alpha, delta, ns[:, None], ms[None, :])) ** 2
        mass = float(P.sum())
        if mass < 1 - mass_deficit:
            raise WindowError(
                f"window captured {mass:.9f} < 1 - {mass_deficit:g}; enlarge it"
            )
        return LatticeDistribution(delta=delta, ns=ns, ms=ms, probabilities=P,
                                   captured_mass=mass)

    # auto window: q-side gets 1% of the budget, momentum the rest
    eps_n = 0.01 * mass_deficit
    r = float(erfcinv(eps_n))
    n_lo = int(np.floor((qb - r) / delta)) - 1
    n_hi = int(np.ceil((qb + r) / delta)) + 1
    ns = np.arange(n_lo, n_hi + 1)
    w_total = float(_window_masses(alpha, delta, ns).sum())
    budget_m = mass_deficit - (1.0 - w_total)
    if budget_m <= 0:
        raise WindowError(f"q-window captured only {w_total:.9f}")

    m_c = int(np.round(pb * delta / (2 * np.pi)))
    m_half = 512
    for _ in range(12):
        if m_half > 2 ** 20:
            break
        ms = np.arange(m_c - m_half, m_c + m_half + 1)
        P = np.abs(_overlap_closed(alpha, delta, ns[:, None], ms[None, :])) ** 2
        mass = float(P.sum())
        deficit_m = w_total - mass
        if deficit_m <= budget_m:
            return LatticeDistribution(delta=delta, ns=ns, ms=ms, probabilities=P,
                                       captured_mass=mass)
        # tail behaves as C/m_half: jump to the estimated requirement
        m_half = int(np.ceil(1.3 * deficit_m * m_half / budget_m))
    raise WindowError(
        f"momentum window would exceed 2^20 points; achieved mass {mass:.9f}"
    )


def output_mean_amplitude(dist: LatticeDistribution, spec: LatticeSpec) -> complex:
    """Coherent amplitude sum P(n,m) (q_n + i p_m)/sqrt(2) after the channel.

    This is what survives complete decoherence: for |alpha| >> 1 it stays
    within a fraction of alpha in modulus and a few hundredths of a radian in
    phase (exactly how close is set by the lattice discretization).
    """
    if abs(dist.delta - spec.delta) > 1e-12 * spec.delta:
        raise ValueError("distribution and spec disagree on delta")
    if dist.captured_mass < 1 - 1e-6:
        raise ValueError(f"captured mass {dist.captured_mass:.9f} below 1 - 1e-6")
    qn = spec.q(dist.ns).astype(float)
    pm = spec.p(dist.ms).astype(float)
    wq = dist.probabilities.sum(axis=1) @ qn
    wp = dist.probabilities.sum(axis=0) @ pm
    return (wq + 1j * wp) / math.sqrt(2)


def coherent_fidelity(dist: LatticeDistribution, alpha: complex) -> float:
    """Diagnostic overlap <alpha| rho_out |alpha> = sum P(n,m) |<n,m|alpha>|^2.

    Reported for judging how coherent-state-like the decohered output is; no
    particular threshold is claimed.
    """
    P2 = np.abs(_overlap_closed(complex(alpha), dist.delta,
                                dist.ns[:, None], dist.ms[None, :])) ** 2
    return float(np.sum(dist.probabilities * P2))
