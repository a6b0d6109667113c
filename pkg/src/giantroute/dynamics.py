"""
Wave-packet dynamics on the two frequency lattices.

Initial states, fixed-step RK4 time evolution with a piecewise-constant
drive-phase schedule, and the bookkeeping that turns a final state into
transmission / reflection coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, IntegrationError
from .model import Generator, LatticeGrid, SingleExcitationState, build_generator

# Largest dt * spectral_bound accepted before stepping.  RK4 is stable on the
# imaginary axis up to 2*sqrt(2) ~ 2.83.
STABILITY_LIMIT = 2.5
# Relative norm growth that counts as a blow-up.
BLOWUP_TOLERANCE = 1e-3
# Packets are refused if this many widths do not fit in the grid.
SUPPORT_WIDTHS = 5.0
# Widths used for the leading edge in margin and boundary-return checks.
EDGE_WIDTHS = 3.0


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian packet exp[-(m - m0)^2 / (2 sigma^2) + i k m] on one lattice.

    A positive ``k`` moves right, a negative one moves left.
    """

    m0: int = -100
    sigma: float = 20.0
    k: float = math.pi / 2
    lattice: str = "a"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be > 0, got {self.sigma}", field="sigma")
        if not 0 < abs(self.k) < math.pi:
            raise ConfigurationError(f"|k| must lie in (0, pi), got {self.k}", field="k")
        if self.lattice not in ("a", "b"):
            raise ConfigurationError(f"lattice must be 'a' or 'b', got {self.lattice!r}",
                                     field="lattice")

    @property
    def direction(self) -> int:
        return 1 if self.k > 0 else -1

    def group_velocity(self, J: float = 1.0) -> float:
        return 2.0 * J * abs(math.sin(self.k))


@dataclass(frozen=True)
class PhaseSchedule:
    """Piecewise-constant drive phase: ``segments = ((t0, theta0), (t1, theta1), ...)``."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((float(t), float(th)) for t, th in self.segments)
        if not segs:
            raise ConfigurationError("phase schedule needs at least one segment",
                                     field="schedule")
        if segs[0][0] != 0.0:
            raise ConfigurationError("phase schedule must start at t = 0", field="schedule")
        times = [t for t, _ in segs]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("schedule switch times must be strictly increasing",
                                     field="schedule")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, theta: float) -> "PhaseSchedule":
        return cls(((0.0, theta),))

    def theta_at(self, t: float) -> float:
        value = self.segments[0][1]
        for start, theta in self.segments:
            if t >= start:
                value = theta
        return value

    def switch_steps(self, dt: float) -> list:
        """(step index, theta) pairs, each switch rounded to the nearest step."""
        return [(int(round(t / dt)), th) for t, th in self.segments]


@dataclass
class Trajectory:
    """
    Snapshots of an evolution.

    ``prob_a`` and ``prob_b`` have shape (n_snapshots, n_sites).  ``amplitudes``
    is only filled when requested, with shape (n_snapshots, dim).
    ``peak_p_e`` is the maximum of |w_e|^2 over every step, not just snapshots.
    """

    grid: LatticeGrid
    times: np.ndarray
    prob_a: np.ndarray
    prob_b: np.ndarray
    p_e: np.ndarray
    p_f: np.ndarray
    norm: np.ndarray
    theta: np.ndarray
    final: SingleExcitationState
    dt: float
    peak_p_e: float
    amplitudes: Optional[np.ndarray] = None

    @property
    def norm_drift(self) -> float:
        return float(self.norm[-1] - self.norm[0])

    def window_weight(self, lo: int, hi: int):
        """Per-snapshot probability on sites lo..hi (inclusive) of each lattice."""
        sites = self.grid.sites
        mask = (sites >= lo) & (sites <= hi)
        return self.prob_a[:, mask].sum(axis=1), self.prob_b[:, mask].sum(axis=1)


@dataclass(frozen=True)
class RoutingResult:
    """Partition of the final probability into regions of both lattices."""

    T_a: float
    T_b: float
    R_a: float
    R_b: float
    mid_a: float
    mid_b: float
    atom_residual: float
    t_final: float

    def total(self) -> float:
        return (self.T_a + self.T_b + self.R_a + self.R_b + self.mid_a + self.mid_b
                + self.atom_residual)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


class CatchProbability(NamedTuple):
    a: float
    b: float
    total: float


# =============================================================================
# INITIAL STATES
# =============================================================================

def gaussian_packet(grid: LatticeGrid, spec: PacketSpec) -> SingleExcitationState:
    """Normalized Gaussian packet on one lattice with the atom in |g>.

    Raises ConfigurationError when m0 +/- 5 sigma does not fit in the grid.
    """
    _check_support(grid, spec.m0, spec.sigma)
    m = grid.sites
    psi = np.exp(-(m - spec.m0) ** 2 / (2.0 * spec.sigma ** 2) + 1j * spec.k * m)
    x = np.zeros(grid.dim, dtype=complex)
    x[grid.lattice_slice(spec.lattice)] = psi / np.linalg.norm(psi)
    return SingleExcitationState(x, grid)


def catch_center(n_sep: int) -> int:
    return n_sep // 2


def catch_initial_state(grid: LatticeGrid, n_sep: int, sigma: float, k: float = math.pi / 2,
                        phase_origin: str = "center") -> SingleExcitationState:
    """
    Two counter-propagating Gaussians (+k and -k) centred between the coupling sites.

    The centre is N/2, or floor(N/2) for odd N.  Both components carry the
    same prefactor and the superposition as a whole is normalized, so the
    interference cross-term is included.

    ``phase_origin`` sets where the carrier phase is measured from.
    ``'center'`` uses exp(+-ik(m - m_c)), which makes the two carriers add up
    to cos(k(m - m_c)) around the centre.  ``'absolute'`` uses exp(+-ikm).
    The two differ by the parity of k*m_c.  With k = pi/2 and an odd centre
    (N = 30 gives m_c = 15) the absolute form only lives on even sites.  That
    is orthogonal to the theta = 0 bound state, so nothing gets caught.
    """
    if phase_origin not in ("center", "absolute"):
        raise ValueError("phase_origin must be 'center' or 'absolute'")
    m_c = catch_center(n_sep)
    _check_support(grid, m_c, sigma)
    m = grid.sites
    origin = m_c if phase_origin == "center" else 0
    env = np.exp(-(m - m_c) ** 2 / (2.0 * sigma ** 2))
    psi = env * (np.exp(1j * k * (m - origin)) + np.exp(-1j * k * (m - origin))) / math.sqrt(2)
    x = np.zeros(grid.dim, dtype=complex)
    x[grid.lattice_slice("a")] = psi / np.linalg.norm(psi)
    return SingleExcitationState(x, grid)


def _check_support(grid, center, sigma):
    lo, hi = center - SUPPORT_WIDTHS * sigma, center + SUPPORT_WIDTHS * sigma
    if lo < grid.m_min or hi > grid.m_max:
        raise ConfigurationError(
            f"packet support [{lo:g}, {hi:g}] (center {center}, 5 sigma) exceeds grid "
            f"[{grid.m_min}, {grid.m_max}]", field="m0")


# =============================================================================
# SCENARIO VALIDATION
# =============================================================================

def default_t_end(spec: PacketSpec, n_sep: int, J: float = 1.0) -> float:
    """Time for the packet to clear the coupling region: (d + N + 4 sigma) / v_g, rounded up.

    ``d`` is the distance from the packet centre to the near coupling site.
    """
    distance = (0 - spec.m0) if spec.direction > 0 else (spec.m0 - n_sep)
    return float(math.ceil((max(distance, 0) + n_sep + 4 * spec.sigma) / spec.group_velocity(J)))


def boundary_return_time(grid: LatticeGrid, n_sep: int, left_front: Optional[float],
                         right_front: Optional[float], v_g: float) -> float:
    """
    Earliest time a boundary-reflected front can re-enter the window [0, N].

    ``left_front`` / ``right_front`` are the initial positions of the
    left- and right-moving leading edges (None if there is no such front).
    A rightward packet also produces leftward waves at the window.  Pass
    ``left_front = -right_front`` mirrored about 0 for that case, so the
    front leaves site 0 when the packet arrives there.
    """
    times = [math.inf]
    if right_front is not None:
        times.append(((grid.m_max - right_front) + (grid.m_max - n_sep)) / v_g)
    if left_front is not None:
        times.append(((left_front - grid.m_min) + (0 - grid.m_min)) / v_g)
    return min(times)


def validate_packet_run(grid: LatticeGrid, n_sep: int, spec: PacketSpec, t_end: float,
                        J: float = 1.0):
    """Refuse runs where the grid is too small for the packet and run length."""
    grid.check_coupling_sites(n_sep)
    _check_support(grid, spec.m0, spec.sigma)
    distance = -spec.m0 if spec.direction > 0 else spec.m0 - n_sep
    margin = EDGE_WIDTHS * spec.sigma + abs(distance)
    if -grid.m_min < margin or grid.m_max - n_sep < margin:
        raise ConfigurationError(
            f"coupling sites need a margin of {margin:g} sites to the grid edges "
            f"(have {-grid.m_min} left, {grid.m_max - n_sep} right)", field="n_sites")
    v = spec.group_velocity(J)
    edge = EDGE_WIDTHS * spec.sigma
    if spec.direction > 0:
        front = spec.m0 + edge
        # Leftward scattered waves start at site 0 when the front arrives.
        t_ret = boundary_return_time(grid, n_sep, left_front=-front, right_front=front, v_g=v)
    else:
        front = spec.m0 - edge
        t_ret = boundary_return_time(grid, n_sep, left_front=front,
                                     right_front=2 * n_sep - front, v_g=v)
    if t_end >= t_ret:
        raise ConfigurationError(
            f"t_end={t_end:g} too long: boundary-reflected waves can re-enter the coupling "
            f"window at t={t_ret:.1f}; enlarge n_sites or shorten t_end", field="t_end")


def validate_catch_run(grid: LatticeGrid, n_sep: int, sigma: float, t_end: float,
                       k: float = math.pi / 2, J: float = 1.0):
    grid.check_coupling_sites(n_sep)
    m_c = catch_center(n_sep)
    _check_support(grid, m_c, sigma)
    edge = EDGE_WIDTHS * sigma
    v = 2.0 * J * abs(math.sin(k))
    t_ret = boundary_return_time(grid, n_sep, left_front=m_c - edge, right_front=m_c + edge,
                                 v_g=v)
    if t_end >= t_ret:
        raise ConfigurationError(
            f"t_end={t_end:g} too long: boundary-reflected waves can re-enter the coupling "
            f"window at t={t_ret:.1f}; enlarge n_sites", field="t_end")


def check_time_step(gen: Generator, dt: float):
    if not dt > 0:
        raise IntegrationError(f"dt must be > 0, got {dt}", dt=dt)
    bound = gen.spectral_bound()
    if dt * bound >= STABILITY_LIMIT:
        raise IntegrationError(
            f"dt={dt:g} is unstable for this generator: dt * spectral bound = {dt * bound:.3g} "
            f">= {STABILITY_LIMIT}; use dt < {STABILITY_LIMIT / bound:.3g}", dt=dt)


# =============================================================================
# TIME EVOLUTION
# =============================================================================

def rk4_step(fun, x: np.ndarray, dt: float) -> np.ndarray:
    """Single classical RK4 step of dx/dt = fun(x)."""
    k1 = fun(x)
    k2 = fun(x + 0.5 * dt * k1)
    k3 = fun(x + 0.5 * dt * k2)
    k4 = fun(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve(gen: Generator, state0: SingleExcitationState, t_end: float, dt: float = 0.01,
           schedule: Optional[PhaseSchedule] = None, snapshot_stride: int = 100,
           keep_amplitudes: bool = False) -> Trajectory:
    """
    Integrate i dx/dt = H x with fixed-step classical RK4.

    Since H is constant between phase switches, each RK4 step is applied
    as its stability polynomial (see :meth:`Generator.rk4_step_operator`).
    That is the same update as the four-stage form, with one sparse product
    per step.  Phase switches snap to the nearest step.

    Snapshots are taken at t = 0, every ``snapshot_stride`` steps, and at
    the final step.

    Raises
    ------
    IntegrationError
        If ``dt`` violates the stability bound or the norm grows by more
        than 1e-3.
    """
    if state0.grid != gen.grid:
        raise ConfigurationError("state and generator use different grids")
    if snapshot_stride < 1:
        raise ConfigurationError("snapshot_stride must be >= 1", field="snapshot_stride")
    n_steps = int(round((t_end - state0.time) / dt))
    if n_steps < 0:
        raise ConfigurationError(f"t_end={t_end} precedes the state time {state0.time}",
                                 field="t_end")
    schedule = schedule or PhaseSchedule.constant(gen.theta)
    # Later segments win if two switches round to the same step.
    switches = dict(schedule.switch_steps(dt))
    theta = switches[0] if 0 in switches else schedule.theta_at(0.0)
    gen = gen.with_theta(theta)
    check_time_step(gen, dt)
    step_op = gen.rk4_step_operator(dt)

    grid = gen.grid
    sa, sb = grid.lattice_slice("a"), grid.lattice_slice("b")
    ie, i_f = grid.atom_index("e"), grid.atom_index("f")
    x = state0.amplitudes.copy()
    norm0 = float(np.vdot(x, x).real)
    limit = norm0 * (1 + BLOWUP_TOLERANCE)

    snaps = {"t": [], "a": [], "b": [], "pe": [], "pf": [], "norm": [], "theta": [], "x": []}

    def record(step, x, norm):
        p = np.abs(x) ** 2
        snaps["t"].append(state0.time + step * dt)
        snaps["a"].append(p[sa])
        snaps["b"].append(p[sb])
        snaps["pe"].append(p[ie])
        snaps["pf"].append(p[i_f])
        snaps["norm"].append(norm)
        snaps["theta"].append(theta)
        if keep_amplitudes:
            snaps["x"].append(x.copy())

    record(0, x, norm0)
    peak = abs(x[ie]) ** 2
    for step in range(1, n_steps + 1):
        # Step n advances t_{n-1} -> t_n with the phase in force at t_{n-1}.
        if step - 1 in switches and switches[step - 1] != theta:
            theta = switches[step - 1]
            gen = gen.with_theta(theta)
            step_op = gen.rk4_step_operator(dt)
        x = step_op @ x
        pe = abs(x[ie]) ** 2
        if pe > peak:
            peak = pe
        if step % snapshot_stride == 0 or step == n_steps:
            norm = float(np.vdot(x, x).real)
            if not norm <= limit:
                raise IntegrationError(
                    f"norm grew to {norm:.6g} (from {norm0:.6g}) by t={step * dt:g}; "
                    f"dt={dt:g} is too large", dt=dt)
            record(step, x, norm)

    final = SingleExcitationState(x, grid, state0.time + n_steps * dt)
    return Trajectory(
        grid=grid,
        times=np.array(snaps["t"]),
        prob_a=np.array(snaps["a"]),
        prob_b=np.array(snaps["b"]),
        p_e=np.array(snaps["pe"]),
        p_f=np.array(snaps["pf"]),
        norm=np.array(snaps["norm"]),
        theta=np.array(snaps["theta"]),
        final=final,
        dt=dt,
        peak_p_e=float(peak),
        amplitudes=np.array(snaps["x"]) if keep_amplitudes else None,
    )


# =============================================================================
# OBSERVABLES
# =============================================================================

def routing_coefficients(state: SingleExcitationState, n_sep: int,
                         incident: str = "left") -> RoutingResult:
    """
    Split the probability of ``state`` into transmitted, reflected and trapped parts.

    For a packet coming from the left, T sums sites m >= N, R sums m < 0 and
    "mid" is 0 <= m < N.  For a packet coming from the right the regions are
    mirrored: T is m <= 0, R is m > N, mid is 0 < m <= N.
    """
    m = state.grid.sites
    pa, pb = np.abs(state.u) ** 2, np.abs(state.v) ** 2
    if incident == "left":
        t_mask, r_mask = m >= n_sep, m < 0
    elif incident == "right":
        t_mask, r_mask = m <= 0, m > n_sep
    else:
        raise ValueError("incident must be 'left' or 'right'")
    mid_mask = ~(t_mask | r_mask)
    atom = abs(state.w_e) ** 2 + abs(state.w_f) ** 2
    return RoutingResult(
        T_a=float(pa[t_mask].sum()), T_b=float(pb[t_mask].sum()),
        R_a=float(pa[r_mask].sum()), R_b=float(pb[r_mask].sum()),
        mid_a=float(pa[mid_mask].sum()), mid_b=float(pb[mid_mask].sum()),
        atom_residual=float(atom), t_final=float(state.time))


def catch_probability(state: SingleExcitationState, n_sep: int) -> CatchProbability:
    """Field probability on sites 0..N inclusive, per lattice and summed."""
    m = state.grid.sites
    mask = (m >= 0) & (m <= n_sep)
    a = float((np.abs(state.u[mask]) ** 2).sum())
    b = float((np.abs(state.v[mask]) ** 2).sum())
    return CatchProbability(a, b, a + b)


def packet_center(probabilities: np.ndarray, sites: np.ndarray) -> float:
    """Probability-weighted mean site of a distribution."""
    w = np.asarray(probabilities)
    return float((w * sites).sum() / w.sum())


def simulate_packet(params, packet: PacketSpec, grid: Optional[LatticeGrid] = None,
                    dt: float = 0.01, t_end: Optional[float] = None,
                    snapshot_stride: int = 100, validate: bool = True):
    """
    Send one Gaussian packet at the atom and return ``(RoutingResult, Trajectory)``.

    ``params`` is either parameter type; ``t_end`` defaults to
    :func:`default_t_end`.  Coefficients are taken relative to the side the
    packet comes from.
    """
    grid = grid or LatticeGrid()
    n_sep = int(params.n_sep)
    if t_end is None:
        t_end = default_t_end(packet, n_sep, params.J)
    if validate:
        validate_packet_run(grid, n_sep, packet, t_end, params.J)
    gen = build_generator(params, grid)
    traj = evolve(gen, gaussian_packet(grid, packet), t_end, dt, snapshot_stride=snapshot_stride)
    incident = "left" if packet.direction > 0 else "right"
    return routing_coefficients(traj.final, n_sep, incident), traj
