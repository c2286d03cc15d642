"""Memory kernels, damping laws, and decay-envelope machinery.

The fading-memory kernel b(t) weights past bending states of the plate.
Admissible kernels are nonincreasing with b(0) > 0 and integral deficit
l = 1 - int_0^inf b > 0, and they obey a differential decay law

    b'(t) <= -xi(t) * B(b(t))

for a nonincreasing positive weight xi and a convexity modulus B that is
either linear or strictly convex with B(0) = B'(0) = 0.  The frictional
damping h(s) is nondecreasing with a profile h1 near the origin whose
convexifier H(s) = sqrt(s) * h1(sqrt(s)) drives the nonlinear decay rates.

This module represents those families, validates the admissibility
conditions on grids, extends moduli to the whole half line, computes convex
conjugates, and builds the explicit energy-decay envelope curves implied by
the decay law.  All scalar inversions are by bisection (absolute tolerance
1e-12, 200 iterations), trading speed for robustness on monotone functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, InputError

INVERSION_TOL = 1e-12
INVERSION_MAX_ITER = 200
CURVATURE_FLOOR = 1e-8  # strict-convexity floor for modulus extensions
_REL_TOL = 1e-12


def invert_increasing(f, y, lo=0.0, hi=None, tol=INVERSION_TOL, max_iter=INVERSION_MAX_ITER):
    """Solve f(s) = y for an increasing scalar function by bisection.

    If `hi` is None the upper bracket is grown geometrically until f(hi) >= y.
    Raises DomainError when y cannot be bracketed.
    """
    if not np.isfinite(y):
        raise DomainError(f"cannot invert at non-finite target {y!r}")

    def fs(s):
        try:
            return f(s)
        except OverflowError:
            return math.inf

    if hi is None:
        hi = max(1.0, 2.0 * lo)
        for _ in range(600):
            if fs(hi) >= y:
                break
            hi *= 2.0
        else:
            raise DomainError(f"target {y!r} not reachable while expanding bracket")
    flo = fs(lo)
    if flo > y:
        raise DomainError(f"target {y!r} below f({lo}) = {flo}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if fs(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Relaxation kernels


@dataclass(frozen=True, eq=False)
class RelaxationKernel:
    """Fading-memory kernel b(t) with its integral deficit l.

    Families: exponential b0*exp(-rate*t), power b0*(1+t)^(-q) with q > 1,
    tabulated samples (linear interpolation, zero beyond `horizon`), and the
    degenerate zero kernel used for memory-free runs.
    """

    family: str
    b0: float = 0.0
    rate: float = 0.0
    q: float = 0.0
    times: np.ndarray | None = None
    values: np.ndarray | None = None
    horizon: float = math.inf
    _dvalues: np.ndarray | None = field(default=None, repr=False)
    _cumint: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def exponential(cls, b0: float, rate: float) -> "RelaxationKernel":
        if b0 <= 0 or rate <= 0:
            raise InputError("exponential kernel needs b0 > 0 and rate > 0")
        return cls("exponential", b0=float(b0), rate=float(rate))

    @classmethod
    def power_law(cls, b0: float, q: float) -> "RelaxationKernel":
        # q <= 1 is not integrable on (0, inf); refuse outright.
        if b0 <= 0:
            raise InputError("power kernel needs b0 > 0")
        if q <= 1:
            raise InputError(f"power kernel exponent must exceed 1, got {q}")
        return cls("power", b0=float(b0), q=float(q))

    @classmethod
    def tabulated(cls, times, values, horizon: float | None = None) -> "RelaxationKernel":
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise InputError("tabulated kernel needs matching 1-d times/values with >= 2 samples")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise InputError("tabulated kernel times must strictly increase from 0")
        dv = np.gradient(v, t)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))])
        return cls(
            "tabulated",
            b0=float(v[0]),
            times=t,
            values=v,
            horizon=float(horizon) if horizon is not None else float(t[-1]),
            _dvalues=dv,
            _cumint=cum,
        )

    @classmethod
    def zero(cls) -> "RelaxationKernel":
        return cls("zero")

    @property
    def is_zero(self) -> bool:
        return self.family == "zero"

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "exponential":
            return self.b0 * np.exp(-self.rate * t)
        if self.family == "power":
            return self.b0 * (1.0 + t) ** (-self.q)
        if self.family == "tabulated":
            out = np.interp(t, self.times, self.values)
            return np.where(t > self.horizon, 0.0, out)
        return np.zeros_like(t)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "exponential":
            return -self.rate * self.value(t)
        if self.family == "power":
            return -self.q * self.b0 * (1.0 + t) ** (-self.q - 1.0)
        if self.family == "tabulated":
            out = np.interp(t, self.times, self._dvalues)
            return np.where(t > self.horizon, 0.0, out)
        return np.zeros_like(t)

    def integral_to(self, t):
        """Running integral of b from 0 to t."""
        t = np.asarray(t, dtype=float)
        if self.family == "exponential":
            return (self.b0 / self.rate) * (1.0 - np.exp(-self.rate * t))
        if self.family == "power":
            return self.b0 / (self.q - 1.0) * (1.0 - (1.0 + t) ** (1.0 - self.q))
        if self.family == "tabulated":
            tc = np.minimum(t, self.horizon)
            return np.interp(tc, self.times, self._cumint)
        return np.zeros_like(t)

    @property
    def total_integral(self) -> float:
        if self.family == "exponential":
            return self.b0 / self.rate
        if self.family == "power":
            return self.b0 / (self.q - 1.0)
        if self.family == "tabulated":
            return float(self._cumint[np.searchsorted(self.times, self.horizon, side="right") - 1])
        return 0.0

    @property
    def l(self) -> float:
        """Residual stiffness fraction 1 - int_0^inf b."""
        return 1.0 - self.total_integral

    def natural_modulus(self) -> "ConvexModulus | None":
        """Modulus B making the decay law an identity, if the family has one."""
        if self.family == "exponential":
            return ConvexModulus.linear(1.0, r1=self.b0)
        if self.family == "power":
            return ConvexModulus.power((self.q + 1.0) / self.q, r1=self.b0)
        return None

    def natural_xi(self) -> "XiWeight | None":
        """Weight xi making the decay law an identity, if the family has one."""
        if self.family == "exponential":
            return XiWeight.constant(self.rate)
        if self.family == "power":
            return XiWeight.constant(self.q * self.b0 ** (-1.0 / self.q))
        return None


# ---------------------------------------------------------------------------
# Convexity moduli


@dataclass(frozen=True, eq=False)
class ConvexModulus:
    """Convexity modulus B on (0, r1], optionally extended past r1.

    Forms: linear slope*s, power coef*s**p with p > 1, or custom callables.
    An extension (set by `extend_modulus`) continues B quadratically beyond
    r1 with matching value and first derivative and curvature at least
    CURVATURE_FLOOR, keeping the extension strictly convex.
    """

    form: str
    slope: float = 1.0
    coef: float = 1.0
    p: float = 2.0
    r1: float = 1.0
    fn: Callable | None = None
    dfn: Callable | None = None
    d2fn: Callable | None = None
    ext: tuple | None = None  # (B(r1), B'(r1), curvature)

    @classmethod
    def linear(cls, slope: float, r1: float = 1.0) -> "ConvexModulus":
        if slope <= 0:
            raise InputError("linear modulus needs positive slope")
        return cls("linear", slope=float(slope), r1=float(r1))

    @classmethod
    def power(cls, p: float, coef: float = 1.0, r1: float = 1.0) -> "ConvexModulus":
        if p <= 1 or coef <= 0:
            raise InputError("power modulus needs p > 1 and coef > 0")
        return cls("power", coef=float(coef), p=float(p), r1=float(r1))

    @classmethod
    def custom(cls, fn, dfn, d2fn=None, r1: float = 1.0) -> "ConvexModulus":
        return cls("custom", fn=fn, dfn=dfn, d2fn=d2fn, r1=float(r1))

    @property
    def is_linear(self) -> bool:
        return self.form == "linear"

    def _base_scalar(self, s: float, order: int) -> float:
        if self.form == "linear":
            if order == 0:
                return self.slope * s
            return self.slope if order == 1 else 0.0
        if self.form == "power":
            c, p = self.coef, self.p
            if order == 0:
                return c * s**p
            if order == 1:
                return c * p * s ** (p - 1.0)
            return c * p * (p - 1.0) * s ** (p - 2.0)
        f = (self.fn, self.dfn, self.d2fn)[order]
        if f is None:
            raise DomainError("custom modulus lacks the requested derivative")
        return float(f(s))

    def _eval_scalar(self, s: float, order: int) -> float:
        if s <= self.r1 * (1.0 + _REL_TOL) or self.is_linear:
            return self._base_scalar(s, order)
        if self.ext is None:
            raise DomainError(
                f"modulus evaluated at {s} beyond domain edge {self.r1} "
                "(call extend_modulus first)"
            )
        v1, d1, kap = self.ext
        ds = s - self.r1
        if order == 0:
            return v1 + d1 * ds + 0.5 * kap * ds * ds
        return d1 + kap * ds if order == 1 else kap

    def _eval(self, s, order):
        if isinstance(s, (float, int)):
            return self._eval_scalar(float(s), order)
        s = np.asarray(s, dtype=float)
        if s.ndim == 0:
            return self._eval_scalar(float(s), order)
        out = np.array([self._eval_scalar(v, order) for v in s.ravel()])
        return out.reshape(s.shape)

    def value(self, s):
        return self._eval(s, 0)

    def deriv(self, s):
        return self._eval(s, 1)

    def second_deriv(self, s):
        return self._eval(s, 2)

    def inverse(self, y: float) -> float:
        """Inverse of B; closed form for linear/power/extension, bisection otherwise."""
        y = float(y)
        if self.is_linear:
            return y / self.slope
        if y <= 0.0:
            return 0.0
        edge = self._base_scalar(self.r1, 0)
        if y > edge * (1.0 + _REL_TOL):
            if self.ext is None:
                raise DomainError(f"inverse target {y} above B(r1)")
            v1, d1, kap = self.ext
            return self.r1 + (math.sqrt(d1 * d1 + 2.0 * kap * (y - v1)) - d1) / kap
        if self.form == "power":
            return (y / self.coef) ** (1.0 / self.p)
        return invert_increasing(lambda s: self._eval_scalar(s, 0), y, 0.0, self.r1)

    def deriv_inverse(self, y: float, hi: float | None = None) -> float:
        """Inverse of B' by bisection (used for convex conjugates)."""
        if self.is_linear:
            raise DomainError("derivative of a linear modulus is not invertible")
        if hi is None:
            hi = None if self.ext is not None else self.r1
        return invert_increasing(lambda s: self._eval_scalar(s, 1), float(y), 0.0, hi)


def extend_modulus(modulus: ConvexModulus) -> ConvexModulus:
    """Continue a convex modulus past its domain edge r1.

    Beyond r1 the curve becomes B(r1) + B'(r1)(s-r1) + 0.5*max(B''(r1),
    CURVATURE_FLOOR)(s-r1)^2, which matches value and slope at r1 and stays
    strictly convex.  Linear moduli are returned unchanged (globally valid).
    """
    if modulus.is_linear:
        return modulus
    r1 = float(modulus.r1)
    v1 = modulus._base_scalar(r1, 0)
    d1 = modulus._base_scalar(r1, 1)
    try:
        d2 = modulus._base_scalar(r1, 2)
    except DomainError:
        # fall back to a centered difference when no second derivative is supplied
        h = 1e-6 * r1
        d2 = (modulus._base_scalar(r1 + h, 1) - modulus._base_scalar(r1 - h, 1)) / (2 * h)
    if not np.isfinite(d2):
        raise DomainError("modulus second derivative not finite at r1")
    return replace(modulus, ext=(v1, d1, max(d2, CURVATURE_FLOOR)))


def convex_conjugate(K: ConvexModulus, tau: float, r: float | None = None) -> float:
    """Convex conjugate K*(tau) = tau*s - K(s) at s = (K')^{-1}(tau).

    Valid for tau in (0, K'(r)); the derivative is inverted by bisection.
    """
    if r is None:
        r = K.r1
    klim = K._eval_scalar(float(r), 1)
    if not 0.0 < tau < klim:
        raise DomainError(f"conjugate argument {tau} outside (0, {klim})")
    s_star = K.deriv_inverse(tau, hi=r)
    return tau * s_star - K._eval_scalar(s_star, 0)


# ---------------------------------------------------------------------------
# Decay weights


@dataclass(frozen=True, eq=False)
class XiWeight:
    """Nonincreasing positive weight xi(t) in the kernel decay law."""

    form: str
    xi0: float = 1.0
    theta: float = 1.0
    times: np.ndarray | None = None
    values: np.ndarray | None = None

    @classmethod
    def constant(cls, xi0: float) -> "XiWeight":
        if xi0 <= 0:
            raise InputError("constant weight must be positive")
        return cls("constant", xi0=float(xi0))

    @classmethod
    def rational(cls, theta: float, xi0: float = 1.0) -> "XiWeight":
        if not 0 < theta <= 1:
            raise InputError("rational weight exponent must lie in (0, 1]")
        if xi0 <= 0:
            raise InputError("rational weight must be positive")
        return cls("rational", xi0=float(xi0), theta=float(theta))

    @classmethod
    def tabulated(cls, times, values) -> "XiWeight":
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise InputError("tabulated weight needs matching 1-d arrays with >= 2 samples")
        if np.any(np.diff(t) <= 0) or np.any(v <= 0):
            raise InputError("tabulated weight needs increasing times and positive values")
        return cls("tabulated", xi0=float(v[0]), times=t, values=v)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.form == "constant":
            return np.full_like(t, self.xi0)
        if self.form == "rational":
            return self.xi0 * (1.0 + t) ** (-self.theta)
        return np.interp(t, self.times, self.values)  # holds last value beyond table

    def integral_power(self, t0: float, t: float, power: float = 1.0) -> float:
        """int_{t0}^{t} xi(s)**power ds, closed form where available."""
        if t < t0:
            raise DomainError("integral upper limit below lower limit")
        if self.form == "constant":
            return self.xi0**power * (t - t0)
        if self.form == "rational":
            mu = self.theta * power
            scale = self.xi0**power
            if abs(mu - 1.0) < 1e-14:
                return scale * math.log((1.0 + t) / (1.0 + t0))
            return scale * ((1.0 + t) ** (1.0 - mu) - (1.0 + t0) ** (1.0 - mu)) / (1.0 - mu)
        val, _ = quad(lambda s: float(self.value(s)) ** power, t0, t, limit=200)
        return val


# ---------------------------------------------------------------------------
# Damping laws


@dataclass(frozen=True, eq=False)
class DampingLaw:
    """Frictional damping h(s): nondecreasing, h(0)=0, linearly bounded at infinity.

    Near the origin h follows the profile h1; for the origin-power form
    h(s) = |s|^(p-1) s on |s| <= eps, spliced to the tangent line beyond.
    The convexifier H(s) = sqrt(s) h1(sqrt(s)) is exposed as a ConvexModulus.
    """

    form: str
    c: float = 1.0
    p: float = 3.0
    eps: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    r2: float = 1.0
    fn: Callable | None = None

    @classmethod
    def linear(cls, c: float, eps: float = 1.0) -> "DampingLaw":
        if c <= 0:
            raise InputError("linear damping needs positive coefficient")
        return cls("linear", c=float(c), eps=float(eps), c1=float(c), c2=float(c), r2=float(eps) ** 2)

    @classmethod
    def origin_power(cls, p: float, eps: float) -> "DampingLaw":
        if p <= 1 or not 0 < eps <= 1:
            raise InputError("origin-power damping needs p > 1 and eps in (0, 1]")
        c1 = eps ** (p - 1.0)
        return cls("origin_power", p=float(p), eps=float(eps), c1=c1, c2=p * c1, r2=float(eps) ** 2)

    @classmethod
    def custom(cls, fn, c1: float = 1.0, c2: float = 1.0, eps: float = 1.0) -> "DampingLaw":
        return cls("custom", fn=fn, c1=float(c1), c2=float(c2), eps=float(eps), r2=float(eps) ** 2)

    @classmethod
    def none(cls) -> "DampingLaw":
        return cls("none", c=0.0, c1=0.0, c2=0.0)

    @property
    def is_none(self) -> bool:
        return self.form == "none"

    def h(self, s):
        s = np.asarray(s, dtype=float)
        if self.form == "linear":
            return self.c * s
        if self.form == "origin_power":
            a = np.abs(s)
            inner = a ** (self.p - 1.0) * s
            outer = np.sign(s) * (self.eps**self.p + self.p * self.eps ** (self.p - 1.0) * (a - self.eps))
            return np.where(a <= self.eps, inner, outer)
        if self.form == "custom":
            return np.vectorize(self.fn)(s)
        return np.zeros_like(s)

    def h1(self, s):
        """Origin profile h1 on [0, eps] (sandwich function, h1 <= |h| near 0)."""
        s = np.asarray(s, dtype=float)
        if self.form == "linear":
            return min(self.c, 1.0 / self.c) * s
        if self.form == "origin_power":
            return s**self.p
        raise DomainError(f"damping form {self.form!r} has no origin profile")

    def h1_inverse(self, y: float) -> float:
        if self.form == "linear":
            return float(y) / min(self.c, 1.0 / self.c)
        return invert_increasing(lambda s: float(self.h1(s)), float(y), 0.0, None)

    @property
    def h1_is_linear(self) -> bool:
        return self.form == "linear"

    def convexifier(self) -> ConvexModulus:
        """H(s) = sqrt(s) * h1(sqrt(s)) as a modulus on (0, r2]."""
        if self.form == "linear":
            return ConvexModulus.linear(min(self.c, 1.0 / self.c), r1=self.r2)
        if self.form == "origin_power":
            return ConvexModulus.power((self.p + 1.0) / 2.0, r1=self.r2)
        raise DomainError(f"damping form {self.form!r} has no convexifier")


# ---------------------------------------------------------------------------
# Admissibility validation


@dataclass
class ValidationReport:
    passed: bool
    violations: list[str]
    data: dict

    def __bool__(self) -> bool:
        return self.passed


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InputError("empty evaluation grid")
    if grid[0] != 0.0 or (grid.size > 1 and np.any(np.diff(grid) <= 0)):
        raise InputError("grid must strictly increase starting at 0")
    return grid


def validate_h1(kernel: RelaxationKernel, grid) -> ValidationReport:
    """Check kernel positivity at 0, monotone decrease on the grid, and l > 0."""
    grid = _check_grid(grid)
    violations = []
    b = kernel.value(grid)
    b0 = float(kernel.value(np.asarray(0.0)))
    if b0 <= 0.0:
        violations.append("b(0) <= 0")
    tol = 1e-12 * max(b0, 1.0)
    inc = np.diff(b) > tol
    if np.any(inc):
        t_bad = grid[1:][inc][0]
        violations.append(f"increase detected near t = {t_bad:.6g}")
    l = kernel.l
    if l <= 0.0:
        violations.append(f"integral deficit l = {l:.6g} <= 0")
    return ValidationReport(not violations, violations, {"l": l, "b0": b0})


def validate_h2(
    kernel: RelaxationKernel,
    modulus: ConvexModulus,
    xi: XiWeight,
    grid,
    rel_tol: float = 1e-12,
) -> ValidationReport:
    """Check the decay law b' <= -xi * B(b) pointwise on the grid."""
    grid = _check_grid(grid)
    b = kernel.value(grid)
    bmax = float(np.max(b))
    if modulus.ext is None and bmax > modulus.r1 * (1.0 + _REL_TOL) and not modulus.is_linear:
        raise DomainError(f"kernel range max {bmax} exceeds modulus domain edge {modulus.r1}")
    db = kernel.deriv(grid)
    bound = -xi.value(grid) * modulus.value(b)
    scale = np.maximum(np.abs(db) + np.abs(bound), 1e-300)
    residual = (db - bound) / scale
    worst = float(np.max(residual))
    violations = []
    if worst > rel_tol:
        t_bad = grid[int(np.argmax(residual))]
        violations.append(f"decay law violated near t = {t_bad:.6g} (relative excess {worst:.3g})")
    return ValidationReport(not violations, violations, {"max_relative_excess": worst})


def validate_h3(damping: DampingLaw, grid, rel_tol: float = 1e-10) -> ValidationReport:
    """Check damping monotonicity, sign, sandwich bounds, and convexifier convexity."""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3:
        raise InputError("damping grid needs at least 3 points")
    if abs(grid[0] + grid[-1]) > 1e-9 * max(abs(grid[-1]), 1.0):
        raise InputError("damping grid must be symmetric about 0")
    violations = []
    hv = damping.h(grid)
    if np.any(np.diff(hv) < -rel_tol):
        violations.append("h is not nondecreasing")
    prod = grid * hv
    nz = np.abs(grid) > 0
    if np.any(prod[nz] <= 0):
        violations.append("sign condition s*h(s) > 0 violated")
    h0 = float(damping.h(np.asarray(0.0)))
    if abs(h0) > rel_tol:
        violations.append("h(0) != 0")

    try:
        small = np.abs(grid[nz]) <= damping.eps
        s_small = np.abs(grid[nz][small])
        habs = np.abs(hv[nz][small])
        lo = damping.h1(s_small)
        hi = np.array([damping.h1_inverse(v) for v in s_small])
        if np.any(habs < lo * (1.0 - 1e-9) - 1e-15):
            violations.append("lower sandwich h1(|s|) <= |h(s)| violated near origin")
        if np.any(habs > hi * (1.0 + 1e-9) + 1e-15):
            violations.append("upper sandwich |h(s)| <= h1^{-1}(|s|) violated near origin")
    except DomainError:
        pass  # custom forms without an origin profile skip the sandwich

    big = np.abs(grid) >= damping.eps
    if np.any(big):
        s_big = np.abs(grid[big])
        habs = np.abs(damping.h(grid[big]))
        if np.any(habs < damping.c1 * s_big * (1.0 - 1e-9) - 1e-15):
            violations.append("linear lower bound c1|s| <= |h(s)| violated")
        if np.any(habs > damping.c2 * s_big * (1.0 + 1e-9) + 1e-15):
            violations.append("linear upper bound |h(s)| <= c2|s| violated")

    if not damping.h1_is_linear and damping.form != "none":
        try:
            H = damping.convexifier()
            s = np.linspace(damping.r2 / 64.0, damping.r2, 65)
            Hv = H.value(s)
            second = Hv[2:] - 2.0 * Hv[1:-1] + Hv[:-2]
            if np.any(second <= 0):
                violations.append("convexifier H fails strict convexity on (0, r2]")
        except DomainError:
            pass
    return ValidationReport(not violations, violations, {"c1": damping.c1, "c2": damping.c2})


# ---------------------------------------------------------------------------
# Decay envelopes


@dataclass(frozen=True, eq=False)
class DecayEnvelope:
    """Callable upper-bound curve for the energy, built from the decay law.

    `case` is one of "linear-B", "nonlinear-B", "nonlinear-both".  Evaluation
    below `validity_start` raises DomainError.  The curve is positive on its
    validity domain; the multiplicative constant c is meant to be fitted.
    """

    case: str
    c: float
    eps0: float
    t0: float
    validity_start: float
    xi: XiWeight
    c1: float = 1.0
    eps1: float = 1.0
    t1: float = 0.0
    modulus: ConvexModulus | None = None
    damping_modulus: ConvexModulus | None = None
    _eval: Callable = None

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < self.validity_start - 1e-15):
            raise DomainError(
                f"envelope evaluated at t = {float(np.min(t_arr))} before validity start "
                f"{self.validity_start}"
            )
        out = np.array([self._eval(float(ti)) for ti in t_arr])
        return out if np.ndim(t) else float(out[0])


def envelope_linear_B(xi: XiWeight, eps0: float, c: float, t0: float) -> DecayEnvelope:
    """Envelope c * (1 + int_{t0}^t xi^(1+eps0))^(-1/eps0) for linear moduli."""
    if not 0.0 < eps0 < 1.0:
        raise DomainError(f"eps0 must lie in (0, 1), got {eps0}")
    if c <= 0 or t0 < 0:
        raise InputError("need c > 0 and t0 >= 0")

    def _eval(t: float) -> float:
        acc = xi.integral_power(t0, t, 1.0 + eps0)
        return c * (1.0 + acc) ** (-1.0 / eps0)

    return DecayEnvelope(
        "linear-B", c=c, eps0=eps0, t0=t0, validity_start=t0, xi=xi, _eval=_eval
    )


def _make_K(modulus: ConvexModulus, eps0: float):
    """K(t) = Bbar(t^(1+eps0)) and its derivative, from the extended modulus.

    This is the inverse of y -> (Bbar^{-1}(y))^(1/(1+eps0)) in closed
    composition form, avoiding one bisection level.
    """
    Bbar = extend_modulus(modulus)

    def K(t: float) -> float:
        return Bbar._eval_scalar(t ** (1.0 + eps0), 0)

    def dK(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return (1.0 + eps0) * t**eps0 * Bbar._eval_scalar(t ** (1.0 + eps0), 1)

    return K, dK


def envelope_nonlinear_B(
    xi: XiWeight,
    eps0: float,
    eps1: float,
    c: float,
    c1: float,
    t0: float,
    t1: float,
    modulus: ConvexModulus,
) -> DecayEnvelope:
    """Envelope for strictly convex moduli: c (t-t0)^(1/(1+eps0)) K1^{-1}(...).

    K1(t) = t K'(eps1 t) with K the growth transform of the extended modulus;
    the inner argument is c1 / ((t-t0)^(1/(1+eps0)) int_{t1}^t xi).
    """
    if modulus.is_linear:
        raise InputError("nonlinear-modulus envelope needs a strictly convex modulus")
    if not t1 > t0:
        raise InputError("need t1 > t0")
    if eps0 <= 0.0:
        raise DomainError(f"eps0 must be positive, got {eps0}")
    _, dK = _make_K(modulus, eps0)

    def K1(t: float) -> float:
        return t * dK(eps1 * t)

    def _eval(t: float) -> float:
        tau = (t - t0) ** (1.0 / (1.0 + eps0))
        acc = xi.integral_power(t1, t, 1.0)
        if acc <= 0.0:
            raise DomainError("weight integral vanishes on the evaluation window")
        y = c1 / (tau * acc)
        root = invert_increasing(K1, y, 0.0, None)
        return c * tau * root

    env = DecayEnvelope(
        "nonlinear-B",
        c=c,
        eps0=eps0,
        t0=t0,
        validity_start=t1,
        xi=xi,
        c1=c1,
        eps1=eps1,
        t1=t1,
        modulus=modulus,
        _eval=_eval,
    )
    # expose the intermediate map for verification against closed forms
    object.__setattr__(env, "K1", K1)
    return env


def envelope_nonlinear_both(
    xi: XiWeight,
    eps: float,
    eps1: float,
    c: float,
    t0: float,
    modulusB: ConvexModulus,
    dampingH: ConvexModulus,
) -> DecayEnvelope:
    """Envelope when kernel modulus and damping convexifier are both nonlinear.

    W inverts the sum of the two root-composed inverse moduli; the curve is
    c (t-t0)^(1/(1+eps)) W2^{-1}(c / ((t-t0)^(1/(1+eps)) int_{t0}^t xi)) with
    W2(t) = t W'(eps1 t).
    """
    if modulusB.is_linear or dampingH.is_linear:
        raise InputError("both moduli must be strictly convex for this envelope")
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    Bbar = extend_modulus(modulusB)
    Hbar = extend_modulus(dampingH)
    expo = 1.0 / (1.0 + eps)

    def summed_roots(y: float) -> float:
        if y <= 0.0:
            return 0.0
        return Bbar.inverse(y) ** expo + Hbar.inverse(y) ** expo

    def W(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return invert_increasing(summed_roots, t, 0.0, None)

    def dW(t: float) -> float:
        # W' = 1 / phi'(W(t)) with phi the summed-roots map
        y = W(t)
        if y <= 0.0:
            return 0.0
        rb, rh = Bbar.inverse(y), Hbar.inverse(y)
        phi_p = expo * (
            rb ** (expo - 1.0) / Bbar._eval_scalar(rb, 1)
            + rh ** (expo - 1.0) / Hbar._eval_scalar(rh, 1)
        )
        return 1.0 / phi_p

    def W2(t: float) -> float:
        return t * dW(eps1 * t)

    def _eval(t: float) -> float:
        tau = (t - t0) ** expo
        acc = xi.integral_power(t0, t, 1.0)
        if acc <= 0.0:
            raise DomainError("weight integral vanishes on the evaluation window")
        y = c / (tau * acc)
        root = invert_increasing(W2, y, 0.0, None)
        return c * tau * root

    env = DecayEnvelope(
        "nonlinear-both",
        c=c,
        eps0=eps,
        t0=t0,
        validity_start=t0,
        xi=xi,
        eps1=eps1,
        modulus=modulusB,
        damping_modulus=dampingH,
        _eval=_eval,
    )
    # expose the intermediate maps for verification against closed forms
    object.__setattr__(env, "W", W)
    object.__setattr__(env, "W2", W2)
    return env


# ---------------------------------------------------------------------------
# Catalog spec strings


def _parse_args(spec: str, name: str, count: tuple) -> list[float]:
    inner = spec[len(name) + 1 : -1]
    parts = [p.strip() for p in inner.split(",") if p.strip()]
    if len(parts) not in count:
        raise InputError(f"{name!r} expects {' or '.join(map(str, count))} arguments, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise InputError(f"non-numeric argument in {spec!r}") from exc


def parse_kernel_spec(spec: str) -> RelaxationKernel:
    """Parse catalog kernel strings: "exp(b0,a)", "power(b0,q)", "none"."""
    s = spec.strip()
    if s == "none":
        return RelaxationKernel.zero()
    if s.startswith("exp(") and s.endswith(")"):
        b0, rate = _parse_args(s, "exp", (2,))
        return RelaxationKernel.exponential(b0, rate)
    if s.startswith("power(") and s.endswith(")"):
        b0, q = _parse_args(s, "power", (2,))
        return RelaxationKernel.power_law(b0, q)
    raise InputError(f"unknown kernel spec {spec!r}")


def parse_damping_spec(spec: str) -> DampingLaw:
    """Parse catalog damping strings: "damp-linear(c)", "damp-cubic(eps)", "none"."""
    s = spec.strip()
    if s == "none":
        return DampingLaw.none()
    if s.startswith("damp-linear(") and s.endswith(")"):
        (c,) = _parse_args(s, "damp-linear", (1,))
        return DampingLaw.linear(c)
    if s.startswith("damp-cubic(") and s.endswith(")"):
        (eps,) = _parse_args(s, "damp-cubic", (1,))
        return DampingLaw.origin_power(3.0, eps)
    raise InputError(f"unknown damping spec {spec!r}")


def parse_xi_spec(spec: str) -> XiWeight:
    """Parse weight strings: "const(x0)", "rational(theta)" or "rational(theta,x0)"."""
    s = spec.strip()
    if s.startswith("const(") and s.endswith(")"):
        (x0,) = _parse_args(s, "const", (1,))
        return XiWeight.constant(x0)
    if s.startswith("rational(") and s.endswith(")"):
        args = _parse_args(s, "rational", (1, 2))
        return XiWeight.rational(args[0], args[1] if len(args) == 2 else 1.0)
    raise InputError(f"unknown weight spec {spec!r}")


def parse_modulus_spec(spec: str) -> ConvexModulus:
    """Parse modulus strings: "linear(slope)", "pow(p)", "pow(p,r1)"."""
    s = spec.strip()
    if s.startswith("linear(") and s.endswith(")"):
        (slope,) = _parse_args(s, "linear", (1,))
        return ConvexModulus.linear(slope)
    if s.startswith("pow(") and s.endswith(")"):
        args = _parse_args(s, "pow", (1, 2))
        return ConvexModulus.power(args[0], r1=args[1] if len(args) == 2 else 1.0)
    raise InputError(f"unknown modulus spec {spec!r}")
