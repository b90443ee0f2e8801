"""Coupling geometry and delay kernels for two two-point giant atoms on a waveguide.

Positions of coupling points are measured in units of the adjacent-point
spacing d, so a photon hop between points at x and x' picks up the phase
|x - x'|*theta0 and the retardation |x - x'|*t_d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Recognised orderings of the four coupling points along the waveguide.
CONFIGS = ("separate", "braided", "nested")

_CANONICAL_POSITIONS = {
    "separate": ((("a", 1), 0), (("a", 2), 1), (("b", 1), 2), (("b", 2), 3)),
    "braided": ((("a", 1), 0), (("b", 1), 1), (("a", 2), 2), (("b", 2), 3)),
    "nested": ((("a", 1), 0), (("b", 1), 1), (("b", 2), 2), (("a", 2), 3)),
}


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless run parameters.

    Attributes
    ----------
    theta0 : float
        Phase accumulated by a resonant photon between adjacent coupling points.
    delay : float
        Photon travel time between adjacent points in units of 1/gamma;
        ``math.inf`` drops every delayed term.
    detuning : float
        Half the atomic frequency splitting, in units of gamma.
    phi : float
        Relative phase of the equal-weight initial superposition (used by the
        ``phase`` initial state).
    config : str
        One of :data:`CONFIGS`.
    gamma : float
        Single-point emission rate; fixed at 1, it only sets the time unit.
    """

    theta0: float
    delay: float
    detuning: float = 0.0
    phi: float = 0.0
    config: str = "separate"
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.config not in CONFIGS:
            raise ValueError(f"unknown config {self.config!r}; expected one of {CONFIGS}")
        if math.isnan(self.delay) or self.delay < 0.0:
            raise ValueError("delay must be >= 0 (math.inf is allowed)")
        if self.gamma != 1.0:
            raise ValueError("gamma sets the time unit and is fixed at 1.0")
        if math.isinf(self.theta0) or math.isnan(self.theta0):
            raise ValueError("theta0 must be finite")


def theta0_class(theta0: float, tol: float = 1e-9) -> str | None:
    """Classify theta0 mod 2*pi: 'even_pi', 'odd_pi', 'half_pi', or None.

    even_pi covers multiples of 2*pi, odd_pi the odd multiples of pi, and
    half_pi the odd multiples of pi/2 (both quarter points).
    """
    r = math.fmod(theta0, 2.0 * math.pi)
    if r < 0.0:
        r += 2.0 * math.pi
    if min(r, 2.0 * math.pi - r) <= tol:
        return "even_pi"
    if abs(r - math.pi) <= tol:
        return "odd_pi"
    if abs(r - 0.5 * math.pi) <= tol or abs(r - 1.5 * math.pi) <= tol:
        return "half_pi"
    return None


@dataclass(frozen=True)
class CouplingLayout:
    """Labelled coupling-point positions, ((atom, point), position) pairs."""

    coordinates: tuple[tuple[tuple[str, int], float], ...]

    def __post_init__(self) -> None:
        labels = [label for label, _ in self.coordinates]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate coupling-point label")
        for atom, point in labels:
            if atom not in ("a", "b"):
                raise ValueError(f"unknown atom label {atom!r}")
            if point not in (1, 2):
                raise ValueError(f"unknown point index {point!r}")

    def position(self, atom: str, point: int) -> float:
        for label, x in self.coordinates:
            if label == (atom, point):
                return x
        raise KeyError((atom, point))

    def positions(self, atom: str) -> tuple[float, ...]:
        return tuple(x for (at, _), x in self.coordinates if at == atom)

    @property
    def n_points(self) -> int:
        return len(self.coordinates)

    def as_dict(self) -> dict[tuple[str, int], float]:
        return dict(self.coordinates)


def layout_for(config: str) -> CouplingLayout:
    """Canonical integer-position layout for one of the three configurations."""
    if config not in CONFIGS:
        raise ValueError(f"unknown config {config!r}; expected one of {CONFIGS}")
    return CouplingLayout(coordinates=_CANONICAL_POSITIONS[config])


@dataclass(frozen=True)
class DelayKernel:
    """Coefficient matrices M_l of the delayed amplitude equations.

    The equations of motion read

        dc/dt = -i Delta c(t) - gamma * sum_l M_l e^{i l theta0} c(t - l t_d) Theta(t - l t_d)

    with Delta = diag(delta, -delta) and M_0 the identity (instantaneous
    single-point emission).  ``terms`` maps each integer delay multiple l to
    its 2x2 matrix, in increasing l.
    """

    terms: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self) -> None:
        for _, m in self.terms:
            m.setflags(write=False)
        multiples = [l for l, _ in self.terms]
        if multiples != sorted(multiples) or len(set(multiples)) != len(multiples):
            raise ValueError("kernel terms must be sorted by unique delay multiple")
        if not multiples or multiples[0] != 0:
            raise ValueError("kernel must contain an l=0 term")
        if not np.array_equal(self.terms[0][1], np.eye(2)):
            raise ValueError("the l=0 matrix must be the identity")

    def matrix(self, l: int) -> np.ndarray:
        for ll, m in self.terms:
            if ll == l:
                return m
        return np.zeros((2, 2), dtype=complex)

    @property
    def max_multiple(self) -> int:
        return self.terms[-1][0]

    def delayed_terms(self) -> tuple[tuple[int, np.ndarray], ...]:
        """The l >= 1 terms only."""
        return self.terms[1:]

    def markov_matrix(self, theta0: float) -> np.ndarray:
        """sum_l M_l e^{i l theta0}: the instantaneous-limit coupling matrix."""
        out = np.zeros((2, 2), dtype=complex)
        for l, m in self.terms:
            out += m * np.exp(1j * l * theta0)
        return out


def derive_kernel(layout: CouplingLayout) -> DelayKernel:
    """Build the delay kernel of a two-atom layout from first principles.

    Each atom contributes a self-interference term of weight 1 at the delay
    multiple set by the distance between its own two coupling points; each of
    the four cross pairs (one point of atom a, one of atom b) contributes a
    weight-1/2 exchange term at the delay multiple set by the pair distance.
    The instantaneous l=0 term is the identity.

    Parameters
    ----------
    layout : CouplingLayout
        Two atoms with two coupling points each, at integer positions
        (distances must be commensurate with a common base delay).

    Returns
    -------
    DelayKernel
    """
    if layout.n_points > 4:
        raise ValueError("layouts with more than four coupling points are not supported")
    xa = layout.positions("a")
    xb = layout.positions("b")
    if len(xa) != 2 or len(xb) != 2:
        raise ValueError("each atom needs exactly two coupling points")

    def _multiple(x: float, y: float) -> int:
        dist = abs(x - y)
        l = round(dist)
        if abs(dist - l) > 1e-9:
            raise ValueError(
                f"point separation {dist} is not an integer multiple of the base spacing"
            )
        if l == 0:
            raise ValueError("coincident coupling points are not supported")
        return l

    mats: dict[int, np.ndarray] = {0: np.eye(2, dtype=complex)}

    def _add(l: int, row: int, col: int, weight: float) -> None:
        if l not in mats:
            mats[l] = np.zeros((2, 2), dtype=complex)
        mats[l][row, col] += weight

    _add(_multiple(xa[0], xa[1]), 0, 0, 1.0)
    _add(_multiple(xb[0], xb[1]), 1, 1, 1.0)
    for pa in xa:
        for pb in xb:
            l = _multiple(pa, pb)
            _add(l, 0, 1, 0.5)
            _add(l, 1, 0, 0.5)
    return DelayKernel(terms=tuple(sorted(mats.items())))


def dicke_coefficients(kernel: DelayKernel) -> tuple[dict[int, float], dict[int, float]]:
    """Per-delay weights of the symmetric (+) and antisymmetric (-) channels.

    Defined only when every M_l commutes with atom exchange (equal diagonal
    and equal off-diagonal entries); the two channels then evolve
    independently with scalar weights kappa_l = M_aa +/- M_ab.
    """
    plus: dict[int, float] = {}
    minus: dict[int, float] = {}
    for l, m in kernel.terms:
        if m[0, 0] != m[1, 1] or m[0, 1] != m[1, 0]:
            raise ValueError(
                "kernel is not symmetric under atom exchange; "
                "the two collective channels do not decouple"
            )
        plus[l] = float((m[0, 0] + m[0, 1]).real)
        minus[l] = float((m[0, 0] - m[0, 1]).real)
    return plus, minus
