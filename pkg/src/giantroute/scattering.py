"""
Stationary single-photon scattering off the two-point giant atom.

A plane wave e^{ikm} with energy E = -2J cos k comes in on lattice ``a``
from the left.  The atom couples with g*exp(-i theta) at site 0 and g at
site N of both lattices.  The field is piecewise plane-wave::

    u_m = e^{ikm} + r_a e^{-ikm}               m < 0
          l_al e^{-ikm} + l_ar e^{ikm}         0 <= m <= N
          t_a e^{ikm}                          m > N

and the same for v_m with no incoming part.  Two independent routes give
the eight amplitudes: :func:`closed_form_amplitudes` evaluates the
analytic solution, and :func:`oracle_amplitudes` assembles and solves the
matching conditions numerically.

Note on the closed form: the common denominator is
D = 2[cos(kN) cos(theta) + 1] + i*xi, with the factor 2 (without it |t_a|
can exceed 1).  The left-moving b amplitude between the coupling points
equals the a one, l_bl = l_al, as the continuity condition r_b = l_bl + l_br
requires.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SingularPointError
from .linalg import solve_dense
from .output import Table

AMPLITUDE_NAMES = ("r_a", "l_al", "l_ar", "t_a", "r_b", "l_bl", "l_br", "t_b")
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ScatteringInput:
    """Equal coupling g at both points, wave vector k in (0, pi), separation N."""

    g: float
    k: float = math.pi / 2
    n_sep: int = 3
    theta: float = 0.0
    J: float = 1.0

    def __post_init__(self):
        if not self.g >= 0:
            raise InvalidParameterError(f"g must be >= 0, got {self.g}")
        if not 0 < self.k < math.pi:
            raise InvalidParameterError(f"k must lie in (0, pi), got {self.k}")
        if int(self.n_sep) != self.n_sep or self.n_sep < 1:
            raise InvalidParameterError(f"n_sep must be an integer >= 1, got {self.n_sep}")
        if not self.J > 0:
            raise InvalidParameterError(f"J must be > 0, got {self.J}")

    @property
    def energy(self) -> float:
        return -2.0 * self.J * math.cos(self.k)

    def replace(self, **changes) -> "ScatteringInput":
        fields = {"g": self.g, "k": self.k, "n_sep": self.n_sep, "theta": self.theta, "J": self.J}
        fields.update(changes)
        return ScatteringInput(**fields)


@dataclass(frozen=True)
class ScatteringAmplitudes:
    r_a: complex
    l_al: complex
    l_ar: complex
    t_a: complex
    r_b: complex
    l_bl: complex
    l_br: complex
    t_b: complex
    xi: float
    incident: str = "left"

    @property
    def T_a(self) -> float:
        return abs(self.t_a) ** 2

    @property
    def T_b(self) -> float:
        return abs(self.t_b) ** 2

    @property
    def R_a(self) -> float:
        return abs(self.r_a) ** 2

    @property
    def R_b(self) -> float:
        return abs(self.r_b) ** 2

    def flux(self) -> float:
        return self.T_a + self.T_b + self.R_a + self.R_b

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in AMPLITUDE_NAMES], dtype=complex)


def xi_value(inp: ScatteringInput) -> float:
    """xi = 2 sin(kN) cos(theta) + J^2 sin(2k) / g^2 (infinite when g = 0)."""
    if inp.g == 0:
        return math.inf
    kN = inp.k * inp.n_sep
    return 2 * math.sin(kN) * math.cos(inp.theta) + inp.J ** 2 * math.sin(2 * inp.k) / inp.g ** 2


def _decoupled(xi=math.inf, incident="left"):
    return ScatteringAmplitudes(0j, 0j, 1 + 0j, 1 + 0j, 0j, 0j, 0j, 0j, xi, incident)


def closed_form_amplitudes(inp: ScatteringInput) -> ScatteringAmplitudes:
    """
    Analytic amplitudes for a plane wave incident from the left on lattice ``a``.

    ``g = 0`` returns the decoupled limit (t_a = 1, the rest zero).

    Raises
    ------
    SingularPointError
        When D vanishes, i.e. cos(kN) cos(theta) = -1 together with xi = 0.
        A bound state then sits at the incident energy.
    """
    if inp.g == 0:
        return _decoupled()
    kN = inp.k * inp.n_sep
    c, ct = math.cos(kN), math.cos(inp.theta)
    xi = xi_value(inp)
    D = 2 * (c * ct + 1) + 1j * xi
    if abs(D) < SINGULAR_TOL:
        raise SingularPointError(
            f"denominator vanishes at k={inp.k:g}, N={inp.n_sep}, theta={inp.theta:g}: "
            "cos(kN)cos(theta) = -1 and xi = 0 (bound state at the incident energy)")
    e = cmath.exp(1j * kN)
    e_minus = cmath.exp(1j * (kN - inp.theta))
    r = -e * (c + ct) / D
    l_left = -0.5 * e * (cmath.exp(1j * inp.theta) + e) / D
    return ScatteringAmplitudes(
        r_a=r,
        l_al=l_left,
        l_ar=(2 * c * ct + 0.5 * (3 - e_minus) + 1j * xi) / D,
        t_a=((1 + math.cos(kN + inp.theta)) + 1j * xi) / D,
        r_b=r,
        l_bl=l_left,
        l_br=-0.5 * (1 + e_minus) / D,
        t_b=-(1 + math.cos(kN - inp.theta)) / D,
        xi=xi,
    )


def oracle_amplitudes(inp: ScatteringInput) -> ScatteringAmplitudes:
    """
    Amplitudes from the matching conditions, solved as a dense linear system.

    Unknowns are the eight amplitudes plus the atomic amplitude w_e.
    Equations: four continuity relations at m = 0 and m = N, the lattice
    equations at sites 0 and N of both lattices, and the atom equation.
    Keeping w_e explicit (rather than multiplying through by E) keeps the
    system regular at k = pi/2, where E = 0.
    """
    if inp.g == 0:
        return _decoupled()
    g, J, k, N, th = inp.g, inp.J, inp.k, inp.n_sep, inp.theta
    E = inp.energy
    ek = cmath.exp(1j * k)
    eN = cmath.exp(1j * k * N)
    p0 = cmath.exp(1j * th)
    ra, lal, lar, ta, rb, lbl, lbr, tb, w = range(9)
    A = np.zeros((9, 9), dtype=complex)
    b = np.zeros(9, dtype=complex)

    # Continuity: left/middle pieces agree at m = 0, middle/right at m = N.
    A[0, [lal, lar]] = 1
    A[0, ra] = -1
    b[0] = 1
    A[1, [lbl, lbr]] = 1
    A[1, rb] = -1
    A[2, ta] = eN
    A[2, lal] = -1 / eN
    A[2, lar] = -eN
    A[3, tb] = eN
    A[3, lbl] = -1 / eN
    A[3, lbr] = -eN

    # Site 0: E x_0 + J (x_1 + x_{-1}) - g e^{-i theta} w = 0, with x_1 from the
    # middle piece and x_{-1} from the left piece.
    for row, (left, mid_l, mid_r) in ((4, (ra, lal, lar)), (5, (rb, lbl, lbr))):
        A[row, mid_l] = E + J / ek
        A[row, mid_r] = E + J * ek
        A[row, left] = J * ek
        A[row, w] = -g / p0
    b[4] = -J / ek  # incoming wave at m = -1

    # Site N: E x_N + J (x_{N+1} + x_{N-1}) - g w = 0.
    for row, (right, mid_l, mid_r) in ((6, (ta, lal, lar)), (7, (tb, lbl, lbr))):
        A[row, right] = (E + J * ek) * eN
        A[row, mid_l] = J * ek / eN
        A[row, mid_r] = J * eN / ek
        A[row, w] = -g

    # Atom: E w - g e^{i theta} (u_0 + v_0) - g (u_N + v_N) = 0.
    A[8, w] = E
    A[8, [lal, lar]] = -g * p0
    A[8, rb] = -g * p0
    A[8, [ta, tb]] = -g * eN

    x = solve_dense(A, b)
    return ScatteringAmplitudes(*x[:8], xi=xi_value(inp))


def closed_form_amplitudes_from_right(inp: ScatteringInput) -> ScatteringAmplitudes:
    """
    Amplitudes for a plane wave e^{-ikm} incident on lattice ``a`` from the right.

    Convention: u_m = e^{-ikm} + r_a e^{ikm} for m > N, t_a e^{-ikm} for m < 0,
    l_al e^{-ikm} + l_ar e^{ikm} in between (same for v without the incoming
    part).  Reflecting the chain about its midpoint (m -> N - m) and
    re-phasing the atom maps this onto left incidence at -theta.
    """
    mirror = closed_form_amplitudes(inp.replace(theta=-inp.theta))
    back = cmath.exp(-2j * inp.k * inp.n_sep)
    return ScatteringAmplitudes(
        r_a=mirror.r_a * back, l_al=mirror.l_ar, l_ar=mirror.l_al * back, t_a=mirror.t_a,
        r_b=mirror.r_b * back, l_bl=mirror.l_br, l_br=mirror.l_bl * back, t_b=mirror.t_b,
        xi=mirror.xi, incident="right")


def stationary_fields(inp: ScatteringInput, amps: ScatteringAmplitudes, sites):
    """
    Rebuild u_m, v_m on ``sites`` and w_e from a set of amplitudes.

    w_e is taken from the lattice equation at a_0, so it does not rely on
    the atom equation (which the residual then checks).
    """
    m = np.asarray(sites)
    k, N = inp.k, inp.n_sep
    fwd, bwd = np.exp(1j * k * m), np.exp(-1j * k * m)
    if amps.incident == "left":
        outer_lo_a, outer_lo_b = fwd + amps.r_a * bwd, amps.r_b * bwd
        outer_hi_a, outer_hi_b = amps.t_a * fwd, amps.t_b * fwd
    else:
        outer_lo_a, outer_lo_b = amps.t_a * bwd, amps.t_b * bwd
        outer_hi_a, outer_hi_b = bwd + amps.r_a * fwd, amps.r_b * fwd
    mid_a = amps.l_al * bwd + amps.l_ar * fwd
    mid_b = amps.l_bl * bwd + amps.l_br * fwd
    u = np.where(m < 0, outer_lo_a, np.where(m > N, outer_hi_a, mid_a))
    v = np.where(m < 0, outer_lo_b, np.where(m > N, outer_hi_b, mid_b))
    return u, v


def stationary_residual(inp: ScatteringInput, amps: ScatteringAmplitudes, lo: int, hi: int) -> float:
    """
    Largest residual of H psi = E psi over sites lo..hi and the atom equation.

    Requires g > 0 and lo < 0, hi > N so that both coupling sites are interior.
    """
    if not (lo < 0 and hi > inp.n_sep):
        raise ValueError("residual window must contain both coupling sites in its interior")
    g, J, N, E = inp.g, inp.J, inp.n_sep, inp.energy
    m = np.arange(lo - 1, hi + 2)
    u, v = stationary_fields(inp, amps, m)
    i0 = int(np.where(m == 0)[0][0])
    iN = int(np.where(m == N)[0][0])
    phase = cmath.exp(1j * inp.theta)
    w = phase * (E * u[i0] + J * (u[i0 + 1] + u[i0 - 1])) / g

    source = np.zeros(len(m), dtype=complex)
    source[i0] += g * w / phase
    source[iN] += g * w
    inner = slice(1, len(m) - 1)
    res_u = E * u[inner] + J * (u[2:] + u[:-2]) - source[inner]
    res_v = E * v[inner] + J * (v[2:] + v[:-2]) - source[inner]
    res_w = E * w - g * phase * (u[i0] + v[i0]) - g * (u[iN] + v[iN])
    return float(max(np.abs(res_u).max(), np.abs(res_v).max(), abs(res_w)))


def continuity_residual(inp: ScatteringInput, amps: ScatteringAmplitudes) -> float:
    """Largest violation of the four matching conditions (left incidence)."""
    eN = cmath.exp(1j * inp.k * inp.n_sep)
    checks = (
        1 + amps.r_a - (amps.l_al + amps.l_ar),
        amps.r_b - (amps.l_bl + amps.l_br),
        amps.t_a * eN - (amps.l_al / eN + amps.l_ar * eN),
        amps.t_b * eN - (amps.l_bl / eN + amps.l_br * eN),
    )
    return max(abs(c) for c in checks)


# =============================================================================
# SWEEPS
# =============================================================================

SWEEP_KINDS = {"theta": "theta", "separation": "n_sep", "coupling": "g", "wavevector": "k"}
SWEEP_COLUMNS = ("value", "T_a", "T_b", "R_a", "R_b", "singular")


def sweep(kind: str, base: ScatteringInput, values) -> Table:
    """
    Closed-form coefficients along one parameter axis.

    Singular points do not stop the sweep: their row holds NaNs and
    ``singular = 1``.
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep kind {kind!r}; expected one of {sorted(SWEEP_KINDS)}")
    values = list(values)
    if not values:
        raise ValueError("sweep grid must be non-empty")
    attr = SWEEP_KINDS[kind]
    rows = []
    for value in values:
        if attr == "n_sep":
            value = int(value)
        inp = base.replace(**{attr: value})
        try:
            amps = closed_form_amplitudes(inp)
        except SingularPointError:
            rows.append((value, math.nan, math.nan, math.nan, math.nan, 1))
            continue
        rows.append((value, amps.T_a, amps.T_b, amps.R_a, amps.R_b, 0))
    meta = {"kind": kind, "g": base.g, "k": base.k, "N": base.n_sep, "theta": base.theta, "J": base.J}
    meta.pop({"theta": "theta", "n_sep": "N", "g": "g", "k": "k"}[attr])
    return Table(list(SWEEP_COLUMNS), rows, meta)
