"""Laplace-domain transfer matrices, steady-state limits, and zero-delay solutions.

This module is the analytic companion of the time-domain integrator: the same
delayed equations, solved in the Laplace picture (final-value limits) or in
the instantaneous limit (matrix exponentials and special-point envelopes).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dde import InitialState
from .model import (
    DelayKernel,
    SystemParams,
    derive_kernel,
    dicke_coefficients,
    layout_for,
    theta0_class,
)
from .observables import dicke_transform

_SQRT2 = math.sqrt(2.0)


class NoClosedFormError(ValueError):
    """No closed-form expression covers the requested parameter combination."""


class NoSteadyValueError(RuntimeError):
    """The long-time limit does not settle (undamped oscillation)."""


@dataclass(frozen=True)
class SteadyStateResult:
    """A closed-form long-time concurrence and the condition it belongs to."""

    value: float
    condition: tuple[str, str, str]  # (config, theta0 class, initial-state label)
    formula_id: str

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ValueError("steady concurrence cannot be negative")


class TransferMatrix:
    """Laplace-side coefficient matrix T(s) = s I + i Delta + gamma M(s).

    M(s) = sum_l M_l e^{l (i theta0 - s t_d)}; the time-domain solution is
    c(t) = L^{-1}[T(s)^{-1} c(0)].
    """

    def __init__(self, kernel: DelayKernel, params: SystemParams) -> None:
        if math.isinf(params.delay):
            raise ValueError("transfer matrix requires a finite delay")
        self.kernel = kernel
        self.params = params

    def delayed_sum(self, s: complex) -> np.ndarray:
        p = self.params
        out = np.zeros((2, 2), dtype=complex)
        for l, m in self.kernel.terms:
            out = out + m * cmath.exp(l * (1j * p.theta0 - s * p.delay))
        return out

    def __call__(self, s: complex) -> np.ndarray:
        p = self.params
        d = p.detuning * p.gamma
        return s * np.eye(2) + 1j * np.diag([d, -d]) + p.gamma * self.delayed_sum(s)

    def det(self, s) -> np.ndarray:
        """Determinant of T(s), vectorized over an array of Laplace points."""
        p = self.params
        s = np.asarray(s, dtype=complex)
        d = p.detuning * p.gamma
        m00 = np.zeros_like(s)
        m01 = np.zeros_like(s)
        m10 = np.zeros_like(s)
        m11 = np.zeros_like(s)
        for l, m in self.kernel.terms:
            e = np.exp(l * (1j * p.theta0 - s * p.delay))
            m00 = m00 + m[0, 0] * e
            m01 = m01 + m[0, 1] * e
            m10 = m10 + m[1, 0] * e
            m11 = m11 + m[1, 1] * e
        t00 = s + 1j * d + p.gamma * m00
        t11 = s - 1j * d + p.gamma * m11
        return t00 * t11 - (p.gamma * m01) * (p.gamma * m10)

    def dicke_denominators(self, s: complex) -> tuple[complex, complex]:
        """Scalar denominators (s + gamma Y_+, s + gamma Y_-) of the two
        collective channels; only for exchange-symmetric kernels."""
        kp, km = dicke_coefficients(self.kernel)
        p = self.params
        yp = sum(w * cmath.exp(l * (1j * p.theta0 - s * p.delay)) for l, w in kp.items())
        ym = sum(w * cmath.exp(l * (1j * p.theta0 - s * p.delay)) for l, w in km.items())
        return s + p.gamma * yp, s + p.gamma * ym


def _phase_of(init: InitialState) -> float:
    ca0, cb0 = complex(init.c_a0), complex(init.c_b0)
    if abs(abs(ca0) - 1.0 / _SQRT2) > 1e-9 or abs(abs(cb0) - 1.0 / _SQRT2) > 1e-9:
        raise NoClosedFormError("steady-state formulas cover equal-weight superpositions only")
    return cmath.phase(cb0 / ca0)


def _init_label(phi: float) -> str:
    if abs(phi) <= 1e-9:
        return "plus"
    if abs(abs(phi) - math.pi) <= 1e-9:
        return "minus"
    return f"phase(phi={phi:.6g})"


def steady_state_closed(params: SystemParams, init: InitialState) -> SteadyStateResult:
    """Long-time concurrence where a closed expression exists.

    Args:
        params: run parameters; detuning must be zero and the delay finite.
        init: equal-weight initial superposition (the relative phase phi
            selects between the symmetric, antisymmetric and generic cases).

    Returns:
        SteadyStateResult with the limit value, the matched condition and a
        formula identifier.

    Raises:
        NoClosedFormError: nonzero detuning, infinite delay, unequal-weight
            initial state, or a phase-shift class with no settled expression.
    """
    if params.detuning != 0.0:
        raise NoClosedFormError("no closed steady-state form with detuning; use steady_state_numeric")
    if math.isinf(params.delay):
        raise NoClosedFormError("infinite delay decays freely; no finite-delay formula applies")
    phi = _phase_of(init)
    klass = theta0_class(params.theta0)
    x = params.gamma * params.delay
    cond = (params.config, klass or "generic", _init_label(phi))

    def _result(value: float, formula_id: str) -> SteadyStateResult:
        return SteadyStateResult(value=float(value), condition=cond, formula_id=formula_id)

    if klass == "half_pi":
        # No subradiant pole survives at the quarter-wave points.  With zero
        # delay the separate/braided amplitudes keep a constant modulus and
        # never settle, so only the decaying nested case has a limit there.
        if params.config == "nested" or x > 0.0:
            return _result(0.0, "no-subradiant-pole")
        raise NoClosedFormError(
            "quarter-wave phase at zero delay oscillates forever; no settled value exists"
        )
    if klass is None:
        raise NoClosedFormError("no closed form at this phase shift; use steady_state_numeric")

    cosphi = math.cos(phi)
    if params.config == "separate":
        if klass == "even_pi":
            return _result((1.0 - cosphi) / (2.0 * (1.0 + 3.0 * x) ** 2), "separate-even-pi")
        # The half-wave value is independent of the superposition phase.
        return _result(1.0 / (1.0 + x) ** 2, "separate-odd-pi")
    if params.config == "braided":
        if klass == "even_pi":
            return _result((1.0 - cosphi) / (2.0 * (1.0 + x) ** 2), "braided-even-pi")
        return _result((1.0 + cosphi) / (2.0 * (1.0 + x) ** 2), "braided-odd-pi")
    if klass == "even_pi":
        return _result((1.0 - cosphi) / (2.0 * (1.0 + x) ** 2), "nested-even-pi")
    q = 1.0 + 4.0 * x + 2.0 * x * x
    e = cmath.exp(1j * phi)
    f = abs((x * (e + 1.0) + 1.0) * (x * (3.0 / e + 1.0) + 1.0 / e))
    return _result(f / (q * q), "nested-odd-pi")


def _neville_at_zero(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Polynomial extrapolation of samples y(x) to x = 0 with a change estimate."""
    tab = np.array(y, dtype=complex)
    n = len(x)
    prev = tab[0].copy()
    change = math.inf
    for m in range(1, n):
        for i in range(n - m):
            tab[i] = (x[i + m] * tab[i] - x[i] * tab[i + 1]) / (x[i + m] - x[i])
        change = float(np.max(np.abs(tab[0] - prev)))
        prev = tab[0].copy()
    return tab[0], change


def _det_root_near(tm: TransferMatrix, s0: complex, max_iter: int = 60) -> complex | None:
    """Newton iteration for a root of det T(s) from s0; None if it stalls."""
    p = tm.params
    s = complex(s0)
    reach = 3.0 * max(p.delay, 0.0)
    for _ in range(max_iter):
        if abs(s.real) * reach > 200.0:  # delayed exponentials would overflow
            return None
        t = tm(s)
        dm = np.eye(2, dtype=complex)
        for l, m in tm.kernel.terms:
            dm = dm + m * (-l * p.delay * p.gamma) * cmath.exp(l * (1j * p.theta0 - s * p.delay))
        det = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
        ddet = dm[0, 0] * t[1, 1] + t[0, 0] * dm[1, 1] - dm[0, 1] * t[1, 0] - t[0, 1] * dm[1, 0]
        if ddet == 0.0:
            return None
        step = det / ddet
        s = s - step
        if abs(step) <= 1e-13 * (1.0 + abs(s)):
            return s
    return None


def _reject_imaginary_poles(tm: TransferMatrix, params: SystemParams) -> None:
    """Raise NoSteadyValueError if det T vanishes on the imaginary axis away from 0.

    A root exactly at s = 0 is the subradiant case (the limit exists); a root
    at s = i*omega with omega != 0 means the amplitudes keep oscillating.
    """
    g = params.gamma
    if params.delay == 0.0:
        b = tm(0.0)
        tr = complex(b[0, 0] + b[1, 1])
        de = complex(b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0])
        for root in np.roots([1.0, tr, de]):
            root = complex(root)
            if abs(root.real) <= 1e-9 * max(1.0, abs(root.imag)) and abs(root.imag) > 1e-9:
                raise NoSteadyValueError(
                    f"undamped oscillation at frequency {abs(root.imag):.6g}; no steady value"
                )
        return
    # Any imaginary-axis root obeys |omega| <= |Delta| + gamma*sum_l|M_l|,
    # which is bounded by 4*gamma + |delta| here; scan both half-axes and
    # Newton-refine candidate dips of |det| in the complex plane.  Deciding on
    # the refined root's real part separates true imaginary-axis poles from
    # nearby damped ones, which a modulus threshold alone cannot do.
    w_max = 4.0 * g + abs(params.detuning) * g + 1.0
    base = np.linspace(1e-3, w_max, 4096)
    for sign in (1.0, -1.0):
        w = sign * base
        dv = np.abs(tm.det(1j * w))
        interior = np.nonzero((dv[1:-1] < dv[:-2]) & (dv[1:-1] <= dv[2:]))[0] + 1
        for i in interior:
            if dv[i] > 0.1:
                continue
            root = _det_root_near(tm, 1j * w[i])
            if root is None:
                continue
            if abs(root.real) <= 1e-8 * (1.0 + abs(root.imag)) and abs(root.imag) > 1e-9:
                raise NoSteadyValueError(
                    f"undamped oscillation at frequency {abs(root.imag):.6g}; no steady value"
                )


def steady_state_numeric(kernel: DelayKernel, params: SystemParams, init: InitialState) -> float:
    """Final-value limit of the concurrence via the Laplace-domain solution.

    Evaluates s T(s)^{-1} c(0) along the dyadic sequence s_k = gamma 2^{-k},
    k = 8..20, and extrapolates polynomially to s = 0.  Suits every finite
    delay and detuning; runs with an undamped imaginary-axis mode raise
    NoSteadyValueError instead of reporting a bogus limit.
    """
    if math.isinf(params.delay):
        raise ValueError("finite delay required")
    tm = TransferMatrix(kernel, params)
    _reject_imaginary_poles(tm, params)
    c0 = np.array([init.c_a0, init.c_b0], dtype=complex)
    svals = np.array([params.gamma * 2.0 ** (-k) for k in range(8, 21)])
    fvals = np.empty((len(svals), 2), dtype=complex)
    for i, s in enumerate(svals):
        fvals[i] = s * np.linalg.solve(tm(complex(s)), c0)
    limit, change = _neville_at_zero(svals, fvals)
    if change > 1e-8 * (1.0 + float(np.max(np.abs(limit)))):
        raise NoSteadyValueError(f"extrapolation to s = 0 did not settle (last change {change:.2e})")
    return float(2.0 * abs(limit[0] * np.conjugate(limit[1])))


def _expm2_apply(B: np.ndarray, t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """exp(B t) @ v for constant 2x2 B, vectorized over the time grid.

    Uses the trace/traceless split: with B = a I + C and C^2 = eta I,
    exp(B t) = e^{a t} (cosh(r t) I + sinh(r t)/r C), r = sqrt(eta).
    """
    a = 0.5 * (B[0, 0] + B[1, 1])
    C = B - a * np.eye(2)
    eta = complex(C[0, 0] * C[0, 0] + C[0, 1] * C[1, 0])
    r = cmath.sqrt(eta)
    z = r * t
    ch = np.cosh(z)
    if abs(r) > 1e-8:
        shr = np.sinh(z) / r
    else:
        shr = t * (1.0 + eta * t * t / 6.0 + eta * eta * t ** 4 / 120.0)
    ea = np.exp(a * t)
    cv0 = C[0, 0] * v[0] + C[0, 1] * v[1]
    cv1 = C[1, 0] * v[0] + C[1, 1] * v[1]
    return np.stack((ea * (ch * v[0] + shr * cv0), ea * (ch * v[1] + shr * cv1)), axis=-1)


def markovian_matrix_solution(params: SystemParams, init: InitialState, t) -> np.ndarray:
    """Exact zero-delay amplitudes for any phase shift and detuning.

    The instantaneous limit of the delayed equations is a constant-coefficient
    2x2 linear system; this solves it by matrix exponential and returns amps
    of shape (len(t), 2).  Reference route for the special-point envelopes in
    markovian_closed_form.
    """
    if params.delay != 0.0:
        raise ValueError("zero delay required")
    kernel = derive_kernel(layout_for(params.config))
    g = params.gamma
    d = params.detuning * g
    B = -(1j * np.diag([d, -d]) + g * kernel.markov_matrix(params.theta0))
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    c0 = np.array([init.c_a0, init.c_b0], dtype=complex)
    return _expm2_apply(B, tarr, c0)


def nested_halfpi_envelopes(t) -> tuple[np.ndarray, np.ndarray]:
    """Envelopes (E_+, E_-) of C(t) = E e^{-2 gamma t} for the nested layout at
    the quarter-wave phase point (zero delay and detuning), one per collective
    initial state.  Principal square-root branches throughout."""
    t = np.asarray(t, dtype=float)
    mu = cmath.sqrt(-1.0 - 2.0j)
    root = cmath.sqrt(4.0 - 2.0j)
    sh = np.sinh(2.0 * mu * t)
    ch = np.cosh(2.0 * mu * t)
    pre = (2.0 + 1.0j) / 5.0
    e_plus = np.abs(pre * (root * sh + 2.0 * ch - 1.0j))
    e_minus = np.abs(pre * (root * sh - 2.0 * ch + 1.0j))
    return e_plus, e_minus


def braided_halfpi_detuned_concurrence(delta: float, t, gamma: float = 1.0) -> np.ndarray:
    """Concurrence oscillation of the braided layout at the quarter-wave phase
    point with detuning, for either collective initial state.

    The reduced two-level system is Hermitian there (no leakage), so C swings
    periodically with period pi/sqrt(gamma^2 + delta^2).
    """
    t = np.asarray(t, dtype=float)
    omega2 = gamma * gamma + delta * delta
    c2 = np.cos(2.0 * math.sqrt(omega2) * t)
    s2 = np.sin(2.0 * math.sqrt(omega2) * t)
    return np.sqrt((gamma * gamma + delta * delta * c2) ** 2 + delta * delta * omega2 * s2 * s2) / omega2


def _as_given(t, arr: np.ndarray):
    return float(arr[0]) if np.ndim(t) == 0 else arr


def markovian_closed_form(params: SystemParams, init: InitialState, t):
    """Concurrence C(t) in the zero-delay limit, where a dispatchable closed
    form exists; accepts a scalar time or a grid.

    Zero detuning: the separate and braided layouts decouple into two
    collective channels with scalar decay weights for every phase shift; the
    nested layout does so at multiples of pi and has special-point envelopes
    at the quarter-wave points.  With detuning, the phase-shift classes with a
    reduced two-level description are covered.

    Raises NoClosedFormError for anything else — integrate instead.
    """
    if params.delay != 0.0:
        raise ValueError("closed Markovian forms require zero delay")
    tarr = np.atleast_1d(np.asarray(t, dtype=float))
    g = params.gamma
    d = params.detuning * g
    klass = theta0_class(params.theta0)
    ap0, am0 = dicke_transform(complex(init.c_a0), complex(init.c_b0))
    is_plus = abs(am0) < 1e-12
    is_minus = abs(ap0) < 1e-12

    if d == 0.0:
        if params.config in ("separate", "braided"):
            kernel = derive_kernel(layout_for(params.config))
            kp, km = dicke_coefficients(kernel)
            yp = sum(w * cmath.exp(1j * l * params.theta0) for l, w in kp.items())
            ym = sum(w * cmath.exp(1j * l * params.theta0) for l, w in km.items())
            app = ap0 * np.exp(-g * yp * tarr)
            amm = am0 * np.exp(-g * ym * tarr)
            return _as_given(t, np.abs(app * app - amm * amm))
        if klass in ("even_pi", "odd_pi"):
            kernel = derive_kernel(layout_for(params.config))
            k = kernel.markov_matrix(params.theta0)
            # The nested coupling matrix is exchange-symmetric at multiples of
            # pi, so the collective channels decouple there too.
            yp = complex(k[0, 0] + k[0, 1])
            ym = complex(k[0, 0] - k[0, 1])
            app = ap0 * np.exp(-g * yp * tarr)
            amm = am0 * np.exp(-g * ym * tarr)
            return _as_given(t, np.abs(app * app - amm * amm))
        if klass == "half_pi":
            if is_plus or is_minus:
                e_plus, e_minus = nested_halfpi_envelopes(g * tarr)
                env = e_plus if is_plus else e_minus
                return _as_given(t, env * np.exp(-2.0 * g * tarr))
            raise NoClosedFormError(
                "nested quarter-wave point: closed forms exist for the two collective states only"
            )
        raise NoClosedFormError("nested layout at a generic phase shift; integrate instead")

    if klass == "even_pi" and params.config in ("separate", "braided"):
        # Detuning couples the two collective channels; the reduced pair is
        # still a constant 2x2 system, solved exactly.
        B = -np.array([[4.0 * g, 1j * d], [1j * d, 0.0]], dtype=complex)
        al = _expm2_apply(B, tarr, np.array([ap0, am0]))
        return _as_given(t, np.abs(al[:, 0] ** 2 - al[:, 1] ** 2))
    if klass == "half_pi" and params.config == "braided":
        if is_plus or is_minus:
            return _as_given(t, braided_halfpi_detuned_concurrence(d, tarr, g))
        B = -1j * np.array([[g, d], [d, -g]], dtype=complex)
        al = _expm2_apply(B, tarr, np.array([ap0, am0]))
        return _as_given(t, np.abs(al[:, 0] ** 2 - al[:, 1] ** 2))
    if klass == "half_pi" and params.config == "nested":
        if abs(d - g) > 1e-9:
            raise NoClosedFormError(
                "nested quarter-wave point with detuning: closed form known at detuning = gamma only"
            )
        if is_plus:
            return _as_given(t, np.ones_like(tarr))
        if is_minus:
            return _as_given(t, np.exp(-4.0 * d * tarr))
        raise NoClosedFormError(
            "nested quarter-wave point: closed forms exist for the two collective states only"
        )
    raise NoClosedFormError("no closed form for this parameter combination; integrate instead")
