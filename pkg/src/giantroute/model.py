"""
Model definitions: parameters, lattice layout and equation-of-motion generators.

Two frequency lattices (``a`` and ``b``) of tight-binding sites share a
driven cyclic three-level atom.  The transition g<->f couples to site 0 of
both lattices, g<->e couples to site N, and f<->e is driven with amplitude
``eta`` and phase ``theta``.  Far from resonance the |f> level can be
eliminated, which leaves a two-level "giant atom" touching each lattice at
two points.

All energies are in units of the hopping J and times in units of 1/J.

State vector layout (length ``2 * n_sites + 2``)::

    [ u_{m_min} ... u_{m_max} | v_{m_min} ... v_{m_max} | w_e | w_f ]

The effective model keeps the w_f slot but never couples to it, so the same
initial vector can be fed to either generator.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import AdiabaticityWarning, ConfigurationError, InvalidParameterError

ATOM_LEVELS = ("e", "f")
LATTICES = ("a", "b")


# =============================================================================
# PARAMETERS
# =============================================================================

@dataclass(frozen=True)
class FullModelParams:
    """
    Parameters of the driven three-level atom coupled to both lattices.

    Attributes
    ----------
    J : float
        Nearest-neighbour hopping along each lattice.
    g0 : float
        Coupling of the g<->f transition to site 0.
    gN : float
        Coupling of the g<->e transition to site N.
    eta : float
        Drive amplitude on f<->e.
    theta : float
        Drive phase in radians.
    delta_e, delta_f : float
        Detunings of |e> (from mode N) and |f> (from mode 0).  They enter
        the equations of motion with a minus sign.
    gamma_e, gamma_f : float
        Phenomenological decay rates of |e> and |f>.
    n_sep : int
        Separation N between the two coupling sites.
    metadata : dict
        Bare frequencies (omega_e, omega_0, free spectral range, ...).  Carried
        along for bookkeeping only; they do not enter the dynamics.
    """

    J: float = 1.0
    g0: float = 4.0
    gN: float = 0.7
    eta: float = 17.5
    theta: float = 0.0
    delta_e: float = 0.0
    delta_f: float = 100.0
    gamma_e: float = 0.0
    gamma_f: float = 0.0
    n_sep: int = 1
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_common(self.J, self.n_sep, self.gamma_e)
        if self.gamma_f < 0:
            raise InvalidParameterError(f"gamma_f must be >= 0, got {self.gamma_f}")
        for name in ("g0", "gN", "eta", "theta", "delta_e", "delta_f"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")

    def with_theta(self, theta: float) -> "FullModelParams":
        return replace(self, theta=float(theta))


@dataclass(frozen=True)
class EffectiveParams:
    """
    Parameters of the two-level giant atom obtained after eliminating |f>.

    ``delta_e_prime - delta_e`` is the net detuning of |e>; the usual choice
    sets them equal.  ``delta0_prime`` is both the self-shift of sites a_0 and
    b_0 and the induced a_0 <-> b_0 coupling.  Those terms are only applied
    when ``include_delta0`` is set.
    """

    J: float = 1.0
    g0_prime: float = 0.7
    gN: float = 0.7
    delta0_prime: float = 0.0
    delta_e_prime: float = 0.0
    delta_e: float = 0.0
    theta: float = 0.0
    gamma_e: float = 0.0
    n_sep: int = 1
    include_delta0: bool = False

    def __post_init__(self):
        _check_common(self.J, self.n_sep, self.gamma_e)
        for name in ("g0_prime", "gN", "delta0_prime", "delta_e_prime", "delta_e", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")

    @classmethod
    def equal_coupling(cls, g: float, n_sep: int, theta: float = 0.0, J: float = 1.0,
                       **kwargs) -> "EffectiveParams":
        """Giant atom with g0' = gN = g, zero net detuning and no Delta0' terms."""
        return cls(J=J, g0_prime=g, gN=g, theta=theta, n_sep=n_sep, **kwargs)

    def with_theta(self, theta: float) -> "EffectiveParams":
        return replace(self, theta=float(theta))


def _check_common(J, n_sep, gamma_e):
    if not J > 0:
        raise InvalidParameterError(f"J must be > 0, got {J}")
    if int(n_sep) != n_sep or n_sep < 1:
        raise InvalidParameterError(f"n_sep must be an integer >= 1, got {n_sep}")
    if gamma_e < 0:
        raise InvalidParameterError(f"gamma_e must be >= 0, got {gamma_e}")


def derive_effective_params(full: FullModelParams, *, include_delta0: bool = False,
                            max_ratio: float = 0.25,
                            delta_e: Optional[float] = None) -> EffectiveParams:
    """
    Adiabatically eliminate |f> from the three-level model.

    Returns g0' = g0*eta/delta_f, Delta0' = g0**2/delta_f and
    Delta_e' = eta**2/delta_f.  The bare ``delta_e`` of ``full`` is copied
    unless overridden.

    An :class:`AdiabaticityWarning` is issued when ``eta/delta_f`` or
    ``g0/delta_f`` exceeds ``max_ratio``, or when the residual detuning
    ``|delta_e' - delta_e|`` exceeds ``max_ratio * gN``.

    Raises
    ------
    InvalidParameterError
        If ``delta_f`` is zero.
    """
    if full.delta_f == 0:
        raise InvalidParameterError("delta_f must be nonzero to eliminate the |f> level")
    df = full.delta_f
    g0_prime = full.g0 * full.eta / df
    delta0_prime = full.g0 ** 2 / df
    delta_e_prime = full.eta ** 2 / df
    bare_delta_e = full.delta_e if delta_e is None else delta_e

    problems = []
    if abs(full.eta / df) > max_ratio:
        problems.append(f"eta/delta_f = {abs(full.eta / df):.3g}")
    if abs(full.g0 / df) > max_ratio:
        problems.append(f"g0/delta_f = {abs(full.g0 / df):.3g}")
    residual = abs(delta_e_prime - bare_delta_e)
    if full.gN > 0 and residual > max_ratio * abs(full.gN):
        problems.append(f"|delta_e' - delta_e|/gN = {residual / abs(full.gN):.3g}")
    if problems:
        warnings.warn("adiabatic elimination outside its regime (threshold "
                      f"{max_ratio}): " + ", ".join(problems), AdiabaticityWarning, stacklevel=2)

    return EffectiveParams(J=full.J, g0_prime=g0_prime, gN=full.gN, delta0_prime=delta0_prime,
                           delta_e_prime=delta_e_prime, delta_e=bare_delta_e, theta=full.theta,
                           gamma_e=full.gamma_e, n_sep=full.n_sep, include_delta0=include_delta0)


# =============================================================================
# LATTICE LAYOUT AND STATES
# =============================================================================

@dataclass(frozen=True)
class LatticeGrid:
    """
    Finite window of both lattices plus the two atomic levels.

    Sites run from ``m_min = -site0_index`` to ``m_max = n_sites - 1 - site0_index``
    with hard-wall (open) ends.
    """

    n_sites: int = 400
    site0_index: Optional[int] = None

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ConfigurationError(f"n_sites must be an integer >= 2, got {self.n_sites}",
                                     field="n_sites")
        if self.site0_index is None:
            object.__setattr__(self, "site0_index", self.n_sites // 2)
        if not 0 <= self.site0_index < self.n_sites:
            raise ConfigurationError(
                f"site0_index={self.site0_index} outside [0, {self.n_sites})", field="site0_index")

    n_atom_levels = len(ATOM_LEVELS)

    @property
    def dim(self) -> int:
        return 2 * self.n_sites + self.n_atom_levels

    @property
    def m_min(self) -> int:
        return -self.site0_index

    @property
    def m_max(self) -> int:
        return self.n_sites - 1 - self.site0_index

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_max + 1)

    def contains(self, m: int) -> bool:
        return self.m_min <= m <= self.m_max

    def index(self, lattice: str, m: int) -> int:
        """Flat state index of site ``m`` on lattice ``'a'`` or ``'b'``."""
        if lattice not in LATTICES:
            raise ValueError(f"lattice must be 'a' or 'b', got {lattice!r}")
        if not self.contains(m):
            raise ConfigurationError(f"site {m} outside grid [{self.m_min}, {self.m_max}]")
        return (0 if lattice == "a" else self.n_sites) + self.site0_index + m

    def atom_index(self, level: str) -> int:
        return 2 * self.n_sites + ATOM_LEVELS.index(level)

    def lattice_slice(self, lattice: str) -> slice:
        start = 0 if lattice == "a" else self.n_sites
        return slice(start, start + self.n_sites)

    def check_coupling_sites(self, n_sep: int):
        if not (self.contains(0) and self.contains(n_sep)):
            raise ConfigurationError(
                f"coupling sites 0 and N={n_sep} must lie in [{self.m_min}, {self.m_max}]",
                field="N")


@dataclass
class SingleExcitationState:
    """Amplitudes of the single-excitation sector at a given time."""

    amplitudes: np.ndarray
    grid: LatticeGrid
    time: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.grid.dim,):
            raise ValueError(f"expected {self.grid.dim} amplitudes, got {self.amplitudes.shape}")

    @property
    def u(self) -> np.ndarray:
        return self.amplitudes[self.grid.lattice_slice("a")]

    @property
    def v(self) -> np.ndarray:
        return self.amplitudes[self.grid.lattice_slice("b")]

    @property
    def w_e(self) -> complex:
        return self.amplitudes[self.grid.atom_index("e")]

    @property
    def w_f(self) -> complex:
        return self.amplitudes[self.grid.atom_index("f")]

    def norm(self) -> float:
        """Total probability (squared 2-norm)."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "SingleExcitationState":
        return SingleExcitationState(self.amplitudes.copy(), self.grid, self.time)


# =============================================================================
# GENERATORS
# =============================================================================

class Generator:
    """
    Right-hand side of i dx/dt = H x, stored as the sparse matrix H.

    ``apply(x)`` returns ``-1j * H @ x``.  Instances are immutable; use
    :meth:`with_theta` to get the generator for another drive phase.
    """

    def __init__(self, kind, params, grid, hamiltonian):
        self.kind = kind
        self.params = params
        self.grid = grid
        self.hamiltonian = hamiltonian.tocsr()
        self.hamiltonian.sum_duplicates()

    @property
    def theta(self) -> float:
        return self.params.theta

    def apply(self, x: np.ndarray) -> np.ndarray:
        return -1j * (self.hamiltonian @ x)

    __call__ = apply

    def with_theta(self, theta: float) -> "Generator":
        if theta == self.params.theta:
            return self
        builder = build_full_generator if self.kind == "full" else build_effective_generator
        return builder(self.params.with_theta(theta), self.grid)

    def spectral_bound(self) -> float:
        """Gershgorin bound on the spectral radius of H (max absolute row sum)."""
        return float(abs(self.hamiltonian).sum(axis=1).max())

    def is_lossless(self) -> bool:
        p = self.params
        return p.gamma_e == 0 and getattr(p, "gamma_f", 0.0) == 0

    def rk4_step_operator(self, dt: float) -> sp.csr_matrix:
        """
        One classical RK4 step as a single sparse matrix.

        For the linear, time-independent system dx/dt = A x the four RK4
        stages collapse to x -> (1 + z + z^2/2 + z^3/6 + z^4/24) x with
        z = A*dt, which is what this returns.
        """
        z = (-1j * dt) * self.hamiltonian
        eye = sp.identity(z.shape[0], dtype=complex, format="csr")
        z2 = z @ z
        z3 = z2 @ z
        z4 = z3 @ z
        step = (eye + z + z2 / 2 + z3 / 6 + z4 / 24).tocsr()
        step.sum_duplicates()
        return step

    def __repr__(self):
        return f"Generator(kind={self.kind!r}, dim={self.grid.dim}, theta={self.theta:.6g})"


def _hopping(grid: LatticeGrid, J: float):
    rows, cols, vals = [], [], []
    n = grid.n_sites
    for offset in (0, n):
        i = np.arange(offset, offset + n - 1)
        rows += [i, i + 1]
        cols += [i + 1, i]
        vals += [np.full(n - 1, -J, dtype=complex)] * 2
    return rows, cols, vals


def _assemble(grid, rows, cols, vals, extra):
    r = np.concatenate(rows + [np.array([e[0] for e in extra], dtype=int)])
    c = np.concatenate(cols + [np.array([e[1] for e in extra], dtype=int)])
    v = np.concatenate(vals + [np.array([e[2] for e in extra], dtype=complex)])
    return sp.coo_matrix((v, (r, c)), shape=(grid.dim, grid.dim))


def build_full_generator(params: FullModelParams, grid: LatticeGrid) -> Generator:
    """
    Equations of motion of the full three-level model.

    The drive couples w_e to w_f with eta*exp(+i theta) in the w_e row and
    eta*exp(-i theta) in the w_f row.
    """
    n_sep = int(params.n_sep)
    grid.check_coupling_sites(n_sep)
    rows, cols, vals = _hopping(grid, params.J)
    e, f = grid.atom_index("e"), grid.atom_index("f")
    drive = params.eta * np.exp(1j * params.theta)
    extra = [
        (e, e, -params.delta_e - 1j * params.gamma_e),
        (f, f, -params.delta_f - 1j * params.gamma_f),
        (e, f, drive),
        (f, e, np.conj(drive)),
    ]
    for lat in LATTICES:
        sN, s0 = grid.index(lat, n_sep), grid.index(lat, 0)
        extra += [(e, sN, params.gN), (sN, e, params.gN),
                  (f, s0, params.g0), (s0, f, params.g0)]
    return Generator("full", params, grid, _assemble(grid, rows, cols, vals, extra))


def build_effective_generator(params: EffectiveParams, grid: LatticeGrid) -> Generator:
    """
    Equations of motion of the two-level giant atom.

    The atom row carries g0'*exp(+i theta) on u_0, v_0 and the site-0 rows
    carry g0'*exp(-i theta) on w_e.  With ``include_delta0`` the block
    Delta0' * [[1, 1], [1, 1]] acts on (u_0, v_0).
    """
    n_sep = int(params.n_sep)
    grid.check_coupling_sites(n_sep)
    rows, cols, vals = _hopping(grid, params.J)
    e = grid.atom_index("e")
    phase = params.g0_prime * np.exp(1j * params.theta)
    extra = [(e, e, params.delta_e_prime - params.delta_e - 1j * params.gamma_e)]
    site0 = [grid.index(lat, 0) for lat in LATTICES]
    for lat in LATTICES:
        sN, s0 = grid.index(lat, n_sep), grid.index(lat, 0)
        extra += [(e, sN, params.gN), (sN, e, params.gN),
                  (e, s0, phase), (s0, e, np.conj(phase))]
    if params.include_delta0 and params.delta0_prime != 0:
        extra += [(i, j, params.delta0_prime) for i in site0 for j in site0]
    return Generator("effective", params, grid, _assemble(grid, rows, cols, vals, extra))


def build_generator(params, grid: LatticeGrid) -> Generator:
    """Dispatch on the parameter type."""
    if isinstance(params, FullModelParams):
        return build_full_generator(params, grid)
    if isinstance(params, EffectiveParams):
        return build_effective_generator(params, grid)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")
