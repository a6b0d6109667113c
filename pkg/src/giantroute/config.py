"""
Scenario configuration: JSON parsing, defaults, validation and re-serialization.

A config is a single JSON object.  Model parameters live at the top level;
the packet, catch, sweep and output settings are nested objects.  Every
unknown key is an error in strict mode and a :class:`ConfigWarning`
otherwise.

Effective-model couplings can be given three ways, in order of precedence:

* ``g`` -- equal couplings g0' = gN = g, no Delta0' terms, zero net detuning;
* ``g0_prime`` and ``gN`` (plus optional ``delta0_prime``, ``delta_e_prime``);
* the three-level parameters ``g0``, ``gN``, ``eta``, ``delta_f``, from which
  the effective ones are derived by adiabatic elimination.

With none of these given the three-level defaults g0 = 4, gN = 0.7,
eta = 17.5, delta_f = 100 are used.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

from .dynamics import (
    PacketSpec, PhaseSchedule, check_time_step, default_t_end, validate_catch_run,
    validate_packet_run,
)
from .errors import ConfigurationError, ConfigWarning, GiantRouteError, IntegrationError
from .model import (
    EffectiveParams, FullModelParams, LatticeGrid, build_generator, derive_effective_params,
)
from .scattering import SWEEP_KINDS, ScatteringInput

MODELS = ("effective", "full")
TASKS = ("evolve", "scatter", "sweep", "catch-release")
FORMATS = ("csv", "json")

DEFAULT_THREE_LEVEL = {"g0": 4.0, "gN": 0.7, "eta": 17.5, "delta_f": 100.0}


@dataclass
class PacketConfig:
    m0: int = -100
    sigma: float = 20.0
    k: float = math.pi / 2
    lattice: str = "a"


@dataclass
class CatchConfig:
    sigma: float = 16.0
    k: float = math.pi / 2
    phase_origin: str = "center"
    catch_theta: float = 0.0
    release_time: Optional[float] = 200.0
    release_theta: float = math.pi


@dataclass
class SweepConfig:
    kind: str = "theta"
    values: Optional[list] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = None
    method: str = "analytic"

    def grid(self) -> list:
        if self.values is not None:
            return list(self.values)
        n = int(self.num)
        if n == 1:
            return [float(self.start)]
        step = (self.stop - self.start) / (n - 1)
        return [self.start + i * step for i in range(n)]


@dataclass
class OutputConfig:
    dir: str = "out"
    format: str = "csv"
    name: Optional[str] = None
    site_window: Optional[list] = None


@dataclass
class ScenarioConfig:
    model: str = "effective"
    task: str = "evolve"
    J: float = 1.0
    N: int = 1
    theta: float = 0.0
    g: Optional[float] = None
    g0: Optional[float] = None
    gN: Optional[float] = None
    eta: Optional[float] = None
    delta_f: Optional[float] = None
    delta_e: Optional[float] = None
    g0_prime: Optional[float] = None
    delta0_prime: Optional[float] = None
    delta_e_prime: Optional[float] = None
    gamma_e: float = 0.0
    gamma_f: float = 0.0
    include_delta0: bool = False
    n_sites: int = 400
    site0_index: Optional[int] = None
    initial: str = "packet"
    packet: PacketConfig = field(default_factory=PacketConfig)
    catch: CatchConfig = field(default_factory=CatchConfig)
    schedule: Optional[list] = None
    dt: float = 0.01
    t_end: Optional[float] = None
    snapshot_stride: int = 100
    keep_amplitudes: bool = False
    sweep: Optional[SweepConfig] = None
    output: OutputConfig = field(default_factory=OutputConfig)
    metadata: dict = field(default_factory=dict)

    # -- resolved objects --------------------------------------------------

    def grid(self) -> LatticeGrid:
        return LatticeGrid(self.n_sites, self.site0_index)

    def model_params(self, theta: Optional[float] = None):
        """FullModelParams or EffectiveParams for this config."""
        theta = self.theta if theta is None else theta
        common = dict(J=self.J, theta=theta, n_sep=self.N, gamma_e=self.gamma_e)
        if self.model == "full":
            full = self._three_level(theta)
            return full
        if self.g is not None:
            return EffectiveParams(g0_prime=self.g, gN=self.g, include_delta0=self.include_delta0,
                                   delta0_prime=self.delta0_prime or 0.0,
                                   delta_e_prime=self.delta_e_prime or 0.0,
                                   delta_e=self._effective_delta_e(self.delta_e_prime or 0.0),
                                   **common)
        if self.g0_prime is not None:
            dep = self.delta_e_prime or 0.0
            return EffectiveParams(g0_prime=self.g0_prime, gN=self.gN,
                                   delta0_prime=self.delta0_prime or 0.0, delta_e_prime=dep,
                                   delta_e=self._effective_delta_e(dep),
                                   include_delta0=self.include_delta0, **common)
        full = self._three_level(theta)
        eff = derive_effective_params(full, include_delta0=self.include_delta0)
        return replace(eff, delta_e=self._effective_delta_e(eff.delta_e_prime))

    def _effective_delta_e(self, delta_e_prime):
        # Unset bare detuning means the usual offset choice delta_e = delta_e'.
        return delta_e_prime if self.delta_e is None else self.delta_e

    def _three_level(self, theta) -> FullModelParams:
        eta, df = self.eta, self.delta_f
        delta_e = self.delta_e if self.delta_e is not None else eta ** 2 / df
        return FullModelParams(J=self.J, g0=self.g0, gN=self.gN, eta=eta, theta=theta,
                               delta_e=delta_e, delta_f=df, gamma_e=self.gamma_e,
                               gamma_f=self.gamma_f, n_sep=self.N)

    def packet_spec(self, k: Optional[float] = None) -> PacketSpec:
        p = self.packet
        return PacketSpec(m0=p.m0, sigma=p.sigma, k=p.k if k is None else k, lattice=p.lattice)

    def phase_schedule(self) -> PhaseSchedule:
        if self.schedule is not None:
            return PhaseSchedule(tuple(tuple(seg) for seg in self.schedule))
        if self.initial == "catch":
            c = self.catch
            segs = [(0.0, c.catch_theta)]
            if c.release_time is not None:
                segs.append((c.release_time, c.release_theta))
            return PhaseSchedule(tuple(segs))
        return PhaseSchedule.constant(self.theta)

    def scattering_input(self) -> ScatteringInput:
        params = self.model_params()
        if isinstance(params, FullModelParams):
            params = derive_effective_params(params)
        if not math.isclose(params.g0_prime, params.gN, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigurationError(
                f"stationary scattering needs g0' = gN, got g0'={params.g0_prime:g}, "
                f"gN={params.gN:g}", field="g")
        return ScatteringInput(g=params.gN, k=self.packet.k, n_sep=self.N, theta=self.theta,
                               J=self.J)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# =============================================================================
# PARSING
# =============================================================================

_SECTIONS = {"packet": PacketConfig, "catch": CatchConfig, "sweep": SweepConfig,
             "output": OutputConfig}


def _field_names(cls):
    return {f.name for f in fields(cls)}


def _check_keys(doc, cls, where, strict, warnings_out):
    unknown = sorted(set(doc) - _field_names(cls))
    for key in unknown:
        msg = f"unknown key '{where}{key}'"
        if strict:
            raise ConfigurationError(msg, field=f"{where}{key}")
        warnings_out.append(msg)
        warnings.warn(msg, ConfigWarning, stacklevel=3)
    return {k: v for k, v in doc.items() if k not in unknown}


def parse_config(text: str, strict: bool = True, overrides: Optional[dict] = None) -> ScenarioConfig:
    """
    Parse and validate a JSON scenario document.

    ``overrides`` are applied on top of the document before validation
    (the CLI uses this for ``--dt`` and the subcommand's task).

    Raises
    ------
    ConfigurationError
        Malformed JSON, unknown keys (strict mode), wrong types, or values
        outside their bounds.  ``err.field`` names the offending key.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("config must be a JSON object")
    return config_from_dict(doc, strict=strict, overrides=overrides)


def config_from_dict(doc: dict, strict: bool = True, overrides: Optional[dict] = None) -> ScenarioConfig:
    doc = dict(doc)
    doc.update(overrides or {})
    notes = []
    doc = _check_keys(doc, ScenarioConfig, "", strict, notes)
    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            if value is None:
                kwargs[key] = None if key == "sweep" else _SECTIONS[key]()
                continue
            if not isinstance(value, dict):
                raise ConfigurationError(f"{key} must be an object", field=key)
            sub = _check_keys(value, _SECTIONS[key], f"{key}.", strict, notes)
            kwargs[key] = _SECTIONS[key](**sub)
        else:
            kwargs[key] = value
    cfg = ScenarioConfig(**kwargs)
    if notes:
        cfg.metadata = dict(cfg.metadata, config_warnings=notes)
    _coerce_types(cfg)
    _apply_defaults(cfg)
    validate_config(cfg)
    return cfg


_FLOAT_FIELDS = ("J", "theta", "g", "g0", "gN", "eta", "delta_f", "delta_e", "g0_prime",
                 "delta0_prime", "delta_e_prime", "gamma_e", "gamma_f", "dt", "t_end")
_INT_FIELDS = ("N", "n_sites", "site0_index", "snapshot_stride")


def _as_float(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{name} must be a number, got {value!r}", field=name)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite", field=name)
    return value


def _as_int(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}", field=name)
    return int(value)


def _coerce_types(cfg):
    for name in _FLOAT_FIELDS:
        if getattr(cfg, name) is not None:
            setattr(cfg, name, _as_float(getattr(cfg, name), name))
    for name in _INT_FIELDS:
        if getattr(cfg, name) is not None:
            setattr(cfg, name, _as_int(getattr(cfg, name), name))
    for name in ("include_delta0", "keep_amplitudes"):
        if not isinstance(getattr(cfg, name), bool):
            raise ConfigurationError(f"{name} must be true or false", field=name)
    p = cfg.packet
    p.m0 = _as_int(p.m0, "packet.m0")
    p.sigma = _as_float(p.sigma, "packet.sigma")
    p.k = _as_float(p.k, "packet.k")
    c = cfg.catch
    c.sigma = _as_float(c.sigma, "catch.sigma")
    c.k = _as_float(c.k, "catch.k")
    c.catch_theta = _as_float(c.catch_theta, "catch.catch_theta")
    c.release_theta = _as_float(c.release_theta, "catch.release_theta")
    if c.release_time is not None:
        c.release_time = _as_float(c.release_time, "catch.release_time")
    if cfg.schedule is not None:
        if not isinstance(cfg.schedule, list) or not all(
                isinstance(s, (list, tuple)) and len(s) == 2 for s in cfg.schedule):
            raise ConfigurationError("schedule must be a list of [time, theta] pairs",
                                     field="schedule")
        cfg.schedule = [[_as_float(t, "schedule"), _as_float(th, "schedule")]
                        for t, th in cfg.schedule]
    if cfg.sweep is not None:
        s = cfg.sweep
        if s.values is not None:
            if not isinstance(s.values, list):
                raise ConfigurationError("sweep.values must be a list", field="sweep.values")
            s.values = [_as_float(v, "sweep.values") for v in s.values]
        for name in ("start", "stop"):
            if getattr(s, name) is not None:
                setattr(s, name, _as_float(getattr(s, name), f"sweep.{name}"))
        if s.num is not None:
            s.num = _as_int(s.num, "sweep.num")
    if cfg.output.site_window is not None:
        w = cfg.output.site_window
        if not (isinstance(w, list) and len(w) == 2):
            raise ConfigurationError("output.site_window must be [m_lo, m_hi]",
                                     field="output.site_window")
        cfg.output.site_window = [_as_int(w[0], "output.site_window"),
                                  _as_int(w[1], "output.site_window")]


def _apply_defaults(cfg):
    if cfg.task == "catch-release":
        cfg.initial = "catch"
    explicit_effective = cfg.model == "effective" and (cfg.g is not None or cfg.g0_prime is not None)
    if not explicit_effective:
        for key, value in DEFAULT_THREE_LEVEL.items():
            if getattr(cfg, key) is None:
                setattr(cfg, key, value)
    if cfg.t_end is None and cfg.task in ("evolve", "catch-release"):
        if cfg.initial == "catch":
            cfg.t_end = 300.0
        else:
            try:
                cfg.t_end = default_t_end(cfg.packet_spec(), cfg.N, cfg.J)
            except GiantRouteError as exc:
                raise ConfigurationError(str(exc), field=getattr(exc, "field", None)) from exc


def validate_config(cfg: ScenarioConfig):
    """Check every bound before any computation starts."""
    def need(cond, msg, name):
        if not cond:
            raise ConfigurationError(msg, field=name)

    need(cfg.model in MODELS, f"model must be one of {MODELS}, got {cfg.model!r}", "model")
    need(cfg.task in TASKS, f"task must be one of {TASKS}, got {cfg.task!r}", "task")
    need(cfg.initial in ("packet", "catch"), "initial must be 'packet' or 'catch'", "initial")
    need(cfg.J > 0, f"J must be > 0, got {cfg.J}", "J")
    need(cfg.N >= 1, f"N must be >= 1, got {cfg.N}", "N")
    need(cfg.dt > 0, f"dt must be > 0, got {cfg.dt}", "dt")
    need(cfg.snapshot_stride >= 1, "snapshot_stride must be >= 1", "snapshot_stride")
    need(cfg.gamma_e >= 0, "gamma_e must be >= 0", "gamma_e")
    need(cfg.gamma_f >= 0, "gamma_f must be >= 0", "gamma_f")
    if cfg.g is not None:
        need(cfg.g >= 0, f"g must be >= 0, got {cfg.g}", "g")
        need(cfg.g0_prime is None, "give either g or g0_prime, not both", "g0_prime")
    if cfg.g0_prime is not None and cfg.g is None:
        need(cfg.gN is not None, "g0_prime requires gN", "gN")
    if cfg.model == "full":
        need(cfg.g is None and cfg.g0_prime is None,
             "the full model takes g0, gN, eta, delta_f rather than g or g0_prime", "g")
    need(cfg.delta_f is None or cfg.delta_f != 0, "delta_f must be nonzero", "delta_f")
    need(cfg.output.format in FORMATS, f"output.format must be one of {FORMATS}", "output.format")
    need(cfg.packet.lattice in ("a", "b"), "packet.lattice must be 'a' or 'b'", "packet.lattice")
    need(0 < abs(cfg.packet.k) < math.pi, "packet.k must satisfy 0 < |k| < pi", "packet.k")
    need(cfg.packet.sigma > 0, "packet.sigma must be > 0", "packet.sigma")
    need(cfg.catch.sigma > 0, "catch.sigma must be > 0", "catch.sigma")
    need(cfg.catch.phase_origin in ("center", "absolute"),
         "catch.phase_origin must be 'center' or 'absolute'", "catch.phase_origin")
    if cfg.task == "sweep":
        need(cfg.sweep is not None, "task 'sweep' needs a sweep section", "sweep")
        s = cfg.sweep
        need(s.kind in SWEEP_KINDS, f"sweep.kind must be one of {sorted(SWEEP_KINDS)}",
             "sweep.kind")
        need(s.method in ("analytic", "wavepacket"),
             "sweep.method must be 'analytic' or 'wavepacket'", "sweep.method")
        need(s.values is not None or None not in (s.start, s.stop, s.num),
             "sweep needs values or start/stop/num", "sweep.values")
        need(len(s.grid()) > 0, "sweep grid must be non-empty", "sweep.values")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            params = cfg.model_params()
            grid = cfg.grid()
            gen = build_generator(params, grid)
        except IntegrationError as exc:
            raise ConfigurationError(str(exc), field="dt") from exc
        except GiantRouteError as exc:
            raise ConfigurationError(str(exc), field=getattr(exc, "field", None) or "N") from exc
    try:
        check_time_step(gen, cfg.dt)
    except IntegrationError as exc:
        raise ConfigurationError(str(exc), field="dt") from exc

    try:
        if cfg.task in ("scatter",) or (cfg.task == "sweep" and cfg.sweep.method == "analytic"):
            cfg.scattering_input()
        elif cfg.task == "sweep":
            _validate_packet_sweep(cfg, grid)
        elif cfg.initial == "catch":
            validate_catch_run(grid, cfg.N, cfg.catch.sigma, cfg.t_end, cfg.catch.k, cfg.J)
            cfg.phase_schedule()
        else:
            validate_packet_run(grid, cfg.N, cfg.packet_spec(), cfg.t_end, cfg.J)
            cfg.phase_schedule()
    except ConfigurationError as exc:
        if exc.field in _PACKET_FIELDS:
            exc.field = ("catch." if cfg.initial == "catch" else "packet.") + exc.field
        raise
    except GiantRouteError as exc:
        raise ConfigurationError(str(exc), field=getattr(exc, "field", None)) from exc


_PACKET_FIELDS = ("m0", "sigma", "k", "lattice")


def _validate_packet_sweep(cfg, grid):
    s = cfg.sweep
    for value in s.grid():
        point = sweep_point_config(cfg, value)
        spec = point.packet_spec()
        t_end = point.t_end or default_t_end(spec, point.N, point.J)
        validate_packet_run(point.grid(), point.N, spec, t_end, point.J)


def sweep_point_config(cfg: ScenarioConfig, value) -> ScenarioConfig:
    """Copy of ``cfg`` with the swept parameter set to ``value``."""
    kind = cfg.sweep.kind
    if kind == "theta":
        return replace(cfg, theta=float(value))
    if kind == "separation":
        return replace(cfg, N=int(value))
    if kind == "wavevector":
        return replace(cfg, packet=replace(cfg.packet, k=float(value)))
    if cfg.model == "full":
        raise ConfigurationError("coupling sweeps need the effective model", field="sweep.kind")
    return replace(cfg, g=float(value), g0_prime=None)


def load_config(path, strict: bool = True, overrides: Optional[dict] = None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), strict=strict, overrides=overrides)
