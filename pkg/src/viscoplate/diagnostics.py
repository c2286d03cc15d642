"""Scalar functionals and inequality audits along simulated trajectories.

This module turns a finished run into numbers: the energy ledger and its
exact split into kinetic, elastic, mass, logarithmic and memory parts; the
discrete energy-rate identity and its residual; the logarithmic Sobolev
gap; potential-well constants and their trajectory certification; the
weighted Lyapunov functional; damping and memory tail diagnostics; and
least-squares fitting of decay envelopes against the measured energy.

Everything here is a pure function of immutable snapshots.  Heavy
convolution series are evaluated in row blocks so memory stays bounded on
long runs.  Conventions:

* norms come from Gram quadratic forms, pointwise integrands (powers of
  the velocity, u^2 ln|u|) from the shared quadrature rule;
* the fading-memory functional (b o Du)(t) uses the same product
  trapezoid rule as the integrator;
* the coefficient ``a`` of the logarithmic Sobolev inequality and the
  embedding constant ``cp`` are always passed in explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import HistoryBuffer, PhysicalParams, PlateState, Trajectory, _trap_weights
from .errors import DomainError, HypothesisError, InputError
from .kernels import (
    ConvexModulus,
    DecayEnvelope,
    RelaxationKernel,
    XiWeight,
    extend_modulus,
)
from .spectral import Basis, GramSet

GAP_TOL = 1e-8
RATIO_FLOOR = 1e-14
_BLOCK = 128


# --- sample containers ---------------------------------------------------


@dataclass(frozen=True)
class EnergySample:
    """Energy ledger at one instant.

    kin_rho   velocity term  |u_t|^(rho+2) integral / (rho+2)
    bend      squared L2 norm of the Laplacian of u
    bend_rate same for u_t
    mass      squared L2 norm of u
    logterm   integral of u^2 ln|u|
    memory    fading-memory functional (b o Du)(t)
    E, J, I   total energy, potential part, Nehari-type functional
    """

    t: float
    kin_rho: float
    bend: float
    bend_rate: float
    mass: float
    logterm: float
    memory: float
    E: float
    J: float
    I: float


@dataclass(frozen=True)
class WellConstants:
    """Potential-well constants derived from (k, a, cp, l)."""

    a: float
    Q0: float
    rho_bar: float
    d: float
    k0: float
    d_positive: bool
    window: tuple
    window_nonempty: bool
    window_alt_upper: float


@dataclass(frozen=True)
class WellReport:
    certified: bool
    reason: str | None
    violations: list
    first_violation_time: float | None
    passed: bool
    e0: float
    u0_norm: float


@dataclass(frozen=True)
class LyapunovSample:
    t: float
    Psi1: float
    Psi2: float
    L: float
    N: float
    eps: float


@dataclass(frozen=True)
class LyapunovReport:
    samples: list
    ratio_min: float | None
    ratio_max: float | None
    N: float
    eps: float


@dataclass(frozen=True)
class DampingDiagnostics:
    """Near-origin damping average G, memory tail M, total dissipation."""

    t: float
    G: float
    M: float
    dissipation: float
    omega1_fraction: float
    omega1_empty: bool
    tail_lhs: float | None = None
    tail_rhs: float | None = None
    tail_ok: bool | None = None


@dataclass(frozen=True)
class FitReport:
    c: float
    overshoot: float
    exponent: float
    n_samples: int
    window: tuple
    skipped: bool


@dataclass(frozen=True)
class SeriesBundle:
    """Vectorized per-sample diagnostics for a whole trajectory."""

    times: np.ndarray
    dt: float
    kin_rho: np.ndarray
    bend: np.ndarray
    bend_rate: np.ndarray
    mass: np.ndarray
    logterm: np.ndarray
    memory: np.ndarray
    memory_deriv: np.ndarray
    E: np.ndarray
    J: np.ndarray
    I: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    dissipation: np.ndarray
    damping_avg: np.ndarray
    rate: np.ndarray
    rate_residual: np.ndarray
    memory_tail: np.ndarray | None
    samples: list = field(repr=False, default_factory=list)


# --- quadrature helpers --------------------------------------------------


def _log_integrand(uq: np.ndarray) -> np.ndarray:
    safe = np.where(uq == 0.0, 1.0, np.abs(uq))
    return np.where(uq == 0.0, 0.0, uq * uq * np.log(safe))


def _coeffs_of(state) -> np.ndarray:
    return state.g if isinstance(state, PlateState) else np.asarray(state, dtype=float)


# --- convolution series --------------------------------------------------


def _conv_pass(times, G, M2, kernel, dt, deriv=False, lag_min=0.0):
    """Block-evaluated product-trapezoid convolutions against the history.

    Returns (scal, C, Bw) where, writing w_i for the trapezoid weights of
    the lag integral restricted to lags >= lag_min and b for the kernel
    (or its derivative),

        scal[n] = sum_i w_i b(t_n - t_i) |D(g_n - g_i)|^2   (M2 form)
        C[n]    = sum_i w_i b(t_n - t_i) g_i
        Bw[n]   = sum_i w_i b(t_n - t_i)
    """
    N = len(times)
    scal = np.zeros(N)
    C = np.zeros_like(G)
    Bw = np.zeros(N)
    if kernel.is_zero or N < 2:
        return scal, C, Bw
    GM2 = G @ M2
    p = np.einsum("ij,ij->i", GM2, G)
    fn = kernel.deriv if deriv else kernel.value
    for r0 in range(0, N, _BLOCK):
        r1 = min(r0 + _BLOCK, N)
        rows = np.arange(r0, r1)
        lags = times[rows][:, None] - times[None, :]
        keep = lags >= lag_min - 1e-9 * max(dt, 1.0)
        vals = fn(np.clip(lags, 0.0, None))
        w = np.full((r1 - r0, N), dt)
        w[:, 0] = 0.5 * dt
        # the last included node per row closes the trapezoid; rows whose
        # lag window holds fewer than two nodes integrate to zero
        last = np.maximum(keep.sum(axis=1) - 1, 0)
        w[np.arange(r1 - r0), last] *= 0.5
        vals = vals * w * keep
        vals[keep.sum(axis=1) < 2] = 0.0
        Bw[rows] = vals.sum(axis=1)
        Cb = vals @ G
        C[rows] = Cb
        scal[rows] = p[rows] * Bw[rows] + vals @ p - 2.0 * np.einsum("ij,ij->i", GM2[rows], Cb)
    return scal, C, Bw


def _history_conv(history: HistoryBuffer, kernel: RelaxationKernel, t: float, deriv=False):
    """Single-time counterpart of _conv_pass; returns (w*b values, node times)."""
    n = int(round(t / history.dt)) if history.dt > 0 else 0
    if abs(t - n * history.dt) > 1e-9 * max(history.dt, 1.0):
        raise InputError("time is not on the history grid")
    if n >= len(history):
        raise InputError("history does not reach the requested time")
    sub = history.times[: n + 1]
    if n == 0 or kernel.is_zero:
        return np.zeros(n + 1), sub
    fn = kernel.deriv if deriv else kernel.value
    return _trap_weights(sub) * fn(t - sub), sub


# --- energy --------------------------------------------------------------


def energy(
    state: PlateState,
    params: PhysicalParams,
    grams: GramSet,
    basis: Basis,
    history: HistoryBuffer | None = None,
) -> EnergySample:
    """Energy ledger at a single state; memory term needs the history."""
    uq = state.g @ basis.phi
    vq = state.v @ basis.phi
    kin = float(basis.qw @ np.abs(vq) ** (params.rho + 2.0)) / (params.rho + 2.0)
    bend = float(state.g @ (grams.M2 @ state.g))
    bend_rate = float(state.v @ (grams.M2 @ state.v))
    mass = float(state.g @ (grams.M0 @ state.g))
    logterm = float(basis.qw @ _log_integrand(uq))
    mem = 0.0
    if history is not None and not params.kernel.is_zero:
        wts, sub = _history_conv(history, params.kernel, state.t)
        diffs = history.snapshots[: len(sub)] - state.g
        mem = float(wts @ np.einsum("ij,ij->i", diffs @ grams.M2, diffs))
    bint = float(params.kernel.integral_to(state.t))
    I = (1.0 - bint) * bend + bend_rate + mass + mem - params.k * logterm
    J = 0.5 * I + 0.25 * params.k * mass
    return EnergySample(
        t=state.t, kin_rho=kin, bend=bend, bend_rate=bend_rate, mass=mass,
        logterm=logterm, memory=mem, E=kin + J, J=J, I=I,
    )


def analyze(trajectory: Trajectory, t1: float | None = None) -> SeriesBundle:
    """All per-sample diagnostics of a run in one vectorized pass.

    t1, when given, additionally produces the truncated memory tail
    M(t) = -int_{t1}^{t} b'(lag) |D u(t) - D u(t - lag)|^2 dlag with t1
    snapped to the sample grid.
    """
    params = trajectory.params
    basis = trajectory.basis
    grams = trajectory.grams
    times = trajectory.times
    G, V = trajectory.g, trajectory.v
    dt = trajectory.dt
    rho, k = params.rho, params.k

    UQ = G @ basis.phi
    VQ = V @ basis.phi
    qw = basis.qw
    kin = (qw * np.abs(VQ) ** (rho + 2.0)).sum(axis=1) / (rho + 2.0)
    GM2 = G @ grams.M2
    bend = np.einsum("ij,ij->i", GM2, G)
    bend_rate = np.einsum("ij,ij->i", V @ grams.M2, V)
    mass = np.einsum("ij,ij->i", G @ grams.M0, G)
    logterm = (qw * _log_integrand(UQ)).sum(axis=1)

    mem, C, Bw = _conv_pass(times, G, grams.M2, params.kernel, dt)
    memp, _, _ = _conv_pass(times, G, grams.M2, params.kernel, dt, deriv=True)

    bint = np.asarray(params.kernel.integral_to(times), dtype=float)
    I = (1.0 - bint) * bend + bend_rate + mass + mem - k * logterm
    J = 0.5 * I + 0.25 * k * mass
    E = kin + J

    # weighted functionals
    srho = np.abs(VQ) ** rho * VQ if rho != 0.0 else VQ
    psi1 = (qw * (srho * UQ)).sum(axis=1) / (rho + 1.0) + np.einsum("ij,ij->i", GM2, V)
    convvec = Bw[:, None] * G - C
    psi2 = -(
        np.einsum("ij,ij->i", V @ grams.M2, convvec)
        + (qw * (srho * (convvec @ basis.phi))).sum(axis=1) / (rho + 1.0)
    )

    if params.damping.is_none:
        diss = np.zeros(len(times))
        damping_avg = np.zeros(len(times))
    else:
        HVQ = params.damping.h(VQ)
        diss = (qw * (VQ * HVQ)).sum(axis=1)
        inside = np.abs(VQ) <= params.damping.eps
        measure = (qw * inside).sum(axis=1)
        num = (qw * inside * (VQ * HVQ)).sum(axis=1)
        damping_avg = np.where(measure > 0.0, num / np.where(measure > 0.0, measure, 1.0), 0.0)

    bt = np.asarray(params.kernel.value(times), dtype=float)
    rate = 0.5 * memp - 0.5 * bt * bend - diss
    rate_residual = np.full(len(times), np.nan)
    if len(times) >= 3:
        rate_residual[1:-1] = (E[2:] - E[:-2]) / (2.0 * dt) - rate[1:-1]

    tail = None
    if t1 is not None:
        tail_raw, _, _ = _conv_pass(times, G, grams.M2, params.kernel, dt, deriv=True, lag_min=t1)
        tail = -tail_raw

    samples = [
        EnergySample(
            t=float(times[i]), kin_rho=float(kin[i]), bend=float(bend[i]),
            bend_rate=float(bend_rate[i]), mass=float(mass[i]), logterm=float(logterm[i]),
            memory=float(mem[i]), E=float(E[i]), J=float(J[i]), I=float(I[i]),
        )
        for i in range(len(times))
    ]
    return SeriesBundle(
        times=times, dt=dt, kin_rho=kin, bend=bend, bend_rate=bend_rate, mass=mass,
        logterm=logterm, memory=mem, memory_deriv=memp, E=E, J=J, I=I, psi1=psi1,
        psi2=psi2, dissipation=diss, damping_avg=damping_avg, rate=rate,
        rate_residual=rate_residual, memory_tail=tail, samples=samples,
    )


def energy_series(trajectory: Trajectory) -> list:
    return analyze(trajectory).samples


def energy_rate_residual(trajectory: Trajectory) -> np.ndarray:
    """Central-difference dE/dt minus the dissipation identity, per sample.

    Endpoints carry nan (no centered stencil there).
    """
    if len(trajectory) < 3:
        raise InputError("rate residual needs at least 3 samples")
    return analyze(trajectory).rate_residual


# --- logarithmic Sobolev -------------------------------------------------


def log_sobolev_gap(state, a: float, cp: float, basis: Basis) -> float:
    """RHS minus LHS of the logarithmic Sobolev bound; >= 0 up to quadrature.

    Accepts a full state or a bare coefficient vector.
    """
    if a <= 0:
        raise InputError("log-Sobolev coefficient a must be positive")
    g = _coeffs_of(state)
    uq = g @ basis.phi
    lap = g @ basis.lap
    m = float(basis.qw @ (uq * uq))
    if m == 0.0:
        return 0.0
    bend = float(basis.qw @ (lap * lap))
    lhs = float(basis.qw @ _log_integrand(uq))
    rhs = 0.5 * m * math.log(m) + (cp * a * a / (2.0 * math.pi)) * bend - (1.0 + math.log(a)) * m
    return rhs - lhs


def s_log_constant(eps0: float) -> float:
    """Best constant d with s|ln s| <= s^2 + d s^(1-eps0) for s > 0.

    The supremum of (s|ln s| - s^2) / s^(1-eps0) lives on (0,1]: for s > 1
    the numerator is s(ln s - s) < 0.  The objective is unimodal there
    (its log-derivative factor -eps0 ln s - 1 - (1+eps0)s is strictly
    decreasing), so golden-section search converges.
    """
    if not 0.0 < eps0 < 1.0:
        raise DomainError("eps0 must lie in (0, 1)")

    def f(s: float) -> float:
        return (-s * math.log(s) - s * s) / s ** (1.0 - eps0)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 1e-12, 1.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(200):
        if hi - lo < 1e-14:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
    d = max(f(0.5 * (lo + hi)), 0.0)
    # sanity: no competing supremum on (1, inf)
    s = np.linspace(1.0, 50.0, 512)
    if np.any(s * np.log(s) - s * s > 0.0):
        raise DomainError("unexpected positive excess beyond s = 1")
    return d


# --- potential well ------------------------------------------------------


def well_constants(params: PhysicalParams, cp: float, a: float | None = None) -> WellConstants:
    """Constants (Q0, rho_bar, d, k0) of the potential-well argument.

    a defaults to the midpoint of the admissible window
    (e^{-3/2}, sqrt(2 pi l / (k cp))); pass a explicitly to override.
    """
    k = params.k
    if k <= 0:
        raise InputError("well constants need k > 0")
    if cp <= 0:
        raise InputError("cp must be positive")
    l = params.kernel.l
    k0 = 2.0 * math.pi * l * math.e**3 / cp
    if k >= k0:
        raise HypothesisError(f"k = {k} violates the smallness bound k < k0 = {k0:.6g}")
    lo = math.exp(-1.5)
    hi = math.sqrt(2.0 * math.pi * l / (k * cp))
    nonempty = hi > lo
    if a is None:
        a = 0.5 * (lo + hi) if nonempty else lo
    if a <= 0:
        raise InputError("a must be positive")
    Q0 = 0.5 * (k + 2.0) + k * (1.0 + math.log(a))
    rho_bar = math.exp((2.0 * Q0 - k) / k)
    d = 0.5 * Q0 * rho_bar**2 - 0.25 * k * rho_bar**2 * math.log(rho_bar**2)
    return WellConstants(
        a=a, Q0=Q0, rho_bar=rho_bar, d=d, k0=k0, d_positive=d > 0.0,
        window=(lo, hi), window_nonempty=nonempty,
        window_alt_upper=math.sqrt(2.0 * math.pi * cp * l / k),
    )


def check_well(trajectory: Trajectory, wc: WellConstants) -> WellReport:
    """Certify the stay-in-the-well bounds along a run.

    Preconditions: |u0| < rho_bar and 0 < E(0) < d.  When they hold, every
    sample must satisfy |u| < rho_bar, I > 0, the kinetic bound
    kin_rho <= E(0) and |D u_t|^2 <= 2 E(0).
    """
    bundle = analyze(trajectory)
    e0 = float(bundle.E[0])
    u0 = math.sqrt(max(float(bundle.mass[0]), 0.0))
    reason = None
    if not u0 < wc.rho_bar:
        reason = "initial L2 norm not below rho_bar"
    elif not 0.0 < e0 < wc.d:
        reason = "initial energy not inside (0, d)"
    if reason is not None:
        return WellReport(False, reason, [], None, False, e0, u0)
    violations = []
    rb2 = wc.rho_bar**2
    for i, t in enumerate(bundle.times):
        if not bundle.mass[i] < rb2:
            violations.append((float(t), "mass"))
        if not bundle.I[i] > 0.0:
            violations.append((float(t), "nehari"))
        if not bundle.kin_rho[i] <= e0:
            violations.append((float(t), "kinetic"))
        if not bundle.bend_rate[i] <= 2.0 * e0:
            violations.append((float(t), "bend_rate"))
    first = violations[0][0] if violations else None
    return WellReport(True, None, violations, first, not violations, e0, u0)


# --- Lyapunov functionals ------------------------------------------------


def psi1(state: PlateState, params: PhysicalParams, grams: GramSet, basis: Basis) -> float:
    uq = state.g @ basis.phi
    vq = state.v @ basis.phi
    srho = np.abs(vq) ** params.rho * vq if params.rho != 0.0 else vq
    term1 = float(basis.qw @ (srho * uq)) / (params.rho + 1.0)
    return term1 + float(state.g @ (grams.M2 @ state.v))


def psi2(
    state: PlateState,
    params: PhysicalParams,
    grams: GramSet,
    basis: Basis,
    history: HistoryBuffer,
    kernel: RelaxationKernel,
) -> float:
    """Weighted cross term against the memory convolution (weak form)."""
    wts, sub = _history_conv(history, kernel, state.t)
    if not np.any(wts):
        return 0.0
    conv = wts.sum() * state.g - wts @ history.snapshots[: len(sub)]
    vq = state.v @ basis.phi
    srho = np.abs(vq) ** params.rho * vq if params.rho != 0.0 else vq
    term1 = float(state.v @ (grams.M2 @ conv))
    term2 = float(basis.qw @ (srho * (conv @ basis.phi))) / (params.rho + 1.0)
    return -(term1 + term2)


def lyapunov_series(trajectory: Trajectory, N: float, eps: float) -> LyapunovReport:
    """L = N E + eps Psi1 + Psi2 per sample, with L/E ratio bounds."""
    if N <= 0 or eps <= 0:
        raise InputError("Lyapunov weights must be positive")
    bundle = analyze(trajectory)
    L = N * bundle.E + eps * bundle.psi1 + bundle.psi2
    samples = [
        LyapunovSample(float(bundle.times[i]), float(bundle.psi1[i]),
                       float(bundle.psi2[i]), float(L[i]), N, eps)
        for i in range(len(bundle.times))
    ]
    sel = bundle.E > RATIO_FLOOR
    if not np.any(sel):
        return LyapunovReport(samples, None, None, N, eps)
    ratios = L[sel] / bundle.E[sel]
    return LyapunovReport(samples, float(ratios.min()), float(ratios.max()), N, eps)


def find_lyapunov_N(trajectory: Trajectory, eps: float = 1e-2) -> float:
    """Smallest power-of-two weight N with a positive L/E lower bound."""
    N = 1.0
    while N <= 2.0**10:
        rep = lyapunov_series(trajectory, N, eps)
        if rep.ratio_min is not None and rep.ratio_min > 0.0:
            return N
        N *= 2.0
    raise DomainError("no N up to 2^10 gives a positive Lyapunov ratio")


# --- memory inequalities -------------------------------------------------


def memory_cs_check(
    state: PlateState, history: HistoryBuffer, kernel: RelaxationKernel, grams: GramSet
) -> tuple:
    """Cauchy-Schwarz gaps for the memory convolution (b and -b' weights).

    Returns (gap_b, gap_db); both must be >= -1e-10.
    """
    if len(history) == 0:
        raise InputError("history is empty")
    out = []
    for deriv, const in ((False, 1.0 - kernel.l), (True, kernel.value(0.0))):
        wts, sub = _history_conv(history, kernel, state.t, deriv=deriv)
        if deriv:
            wts = -wts
        diffs = state.g - history.snapshots[: len(sub)]
        conv = wts @ diffs
        lhs = float(conv @ (grams.M2 @ conv))
        scal = float(wts @ np.einsum("ij,ij->i", diffs @ grams.M2, diffs))
        out.append(const * scal - lhs)
    return tuple(out)


def damping_diag(
    state: PlateState,
    params: PhysicalParams,
    basis: Basis,
    history: HistoryBuffer,
    kernel: RelaxationKernel,
    t1: float,
    delta: float = 0.5,
    modulus: ConvexModulus | None = None,
    xi: XiWeight | None = None,
) -> DampingDiagnostics:
    """Damping average near the origin and the truncated memory tail.

    The tail M integrates -b'(lag) against squared Laplacian differences
    for lags in [t1, t]; with a modulus and weight given, the convexity
    tail bound (t-t1)/delta * Binv(delta M / ((t-t1) xi(t))) is evaluated
    and compared against the same integral weighted by b itself.
    """
    t = state.t
    if not t1 < t:
        raise InputError("t1 must precede the state time")
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    qw = basis.qw
    vq = state.v @ basis.phi
    damping = params.damping
    if damping.is_none:
        diss, Gval, frac, empty = 0.0, 0.0, 0.0, True
    else:
        hv = damping.h(vq)
        diss = float(qw @ (vq * hv))
        inside = np.abs(vq) <= damping.eps
        measure = float(qw @ inside)
        empty = measure == 0.0
        frac = min(measure / float(qw.sum()), 1.0)
        Gval = 0.0 if empty else float((qw * inside) @ (vq * hv)) / measure

    M = 0.0
    tail_lhs = tail_rhs = tail_ok = None
    if not kernel.is_zero and len(history) > 1:
        n = int(round(t / history.dt))
        if abs(t - n * history.dt) > 1e-9 * max(history.dt, 1.0) or n >= len(history):
            raise InputError("state time is not on the history grid")
        # nodes with lag >= t1, i.e. s <= t - t1 (t1 snapped to the grid)
        m_idx = int(math.floor((t - t1) / history.dt + 1e-9))
        if m_idx >= 1:
            sub = history.times[: m_idx + 1]
            lap_t = state.g @ basis.lap
            lap_s = history.snapshots[: m_idx + 1] @ basis.lap
            q = ((lap_s - lap_t) ** 2) @ qw
            w = _trap_weights(sub)
            M = float(w @ (-kernel.deriv(t - sub) * q))
            tail_lhs = float(w @ (kernel.value(t - sub) * q))
            if modulus is not None and xi is not None:
                mod = modulus
                if mod.form != "linear" and mod.ext is None:
                    mod = extend_modulus(mod)
                span = t - t1
                xival = float(xi.value(t))
                tail_rhs = span / delta * float(mod.inverse(delta * M / (span * xival)))
                tail_ok = tail_rhs >= tail_lhs - 1e-10
    return DampingDiagnostics(
        t=t, G=Gval, M=M, dissipation=diss, omega1_fraction=frac, omega1_empty=empty,
        tail_lhs=tail_lhs, tail_rhs=tail_rhs, tail_ok=tail_ok,
    )


# --- decay fitting -------------------------------------------------------


def fit_decay(source, envelope: DecayEnvelope, start: float | None = None) -> FitReport:
    """Fit the single constant c so that E(t) <= c env(t) on the tail.

    source is either a Trajectory or a (times, energies) pair.  c is the
    supremum of E/env over the window, so the overshoot of E against
    c env is zero by construction up to roundoff.  The exponent field is
    the log-linear regression slope of E over the window (meaningful for
    exponential-type decay).
    """
    if isinstance(source, Trajectory):
        times = source.times
        E = analyze(source).E
    else:
        times, E = source
        times = np.asarray(times, dtype=float)
        E = np.asarray(E, dtype=float)
    if np.all(E == 0.0):
        return FitReport(math.nan, math.nan, math.nan, 0, (math.nan, math.nan), True)
    if start is None:
        start = max(envelope.validity_start, 0.5 * times[-1])
    sel = (times > envelope.validity_start) & (times >= start - 1e-12) & (E > 0.0)
    if sel.sum() < 50:
        raise InputError("need at least 50 positive-energy samples past the window start")
    ts = times[sel]
    Es = E[sel]
    env = envelope(ts)
    ratios = Es / env
    c = float(ratios.max())
    overshoot = float((ratios / c - 1.0).max())
    slope = np.polyfit(ts, np.log(Es), 1)[0]
    return FitReport(
        c=c, overshoot=overshoot, exponent=float(-slope),
        n_samples=int(sel.sum()), window=(float(ts[0]), float(ts[-1])), skipped=False,
    )
