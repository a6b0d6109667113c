"""Execute validated scenarios and presets, writing outputs plus a run manifest."""
from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__, presets
from .config import ScenarioConfig, sweep_point_config
from .dynamics import (
    catch_initial_state, default_t_end, evolve, gaussian_packet, routing_coefficients,
)
from .model import FullModelParams, build_generator
from .output import Table, write_outputs, write_table
from .scattering import (
    AMPLITUDE_NAMES, closed_form_amplitudes, continuity_residual, oracle_amplitudes, sweep,
)


@dataclass
class RunManifest:
    """Record of one run: resolved inputs, outputs, diagnostics."""

    task: str
    config: dict
    tool_version: str = __version__
    wall_clock_s: float = 0.0
    norm_drift: Optional[float] = None
    warnings: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    resolved_params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n"

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / "manifest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


def _describe(w) -> str:
    return f"{w.category.__name__}: {w.message}"


def run_scenario(cfg: ScenarioConfig, out_dir=None, fmt=None, threads=1) -> RunManifest:
    """
    Run the task named in ``cfg`` and write its outputs under ``out_dir``.

    Raises
    ------
    IntegrationError, SingularPointError
        Numerical failures propagate to the caller (the CLI maps them to
        exit status 3).
    """
    out_dir = Path(out_dir or cfg.output.dir)
    fmt = fmt or cfg.output.format
    name = cfg.output.name or cfg.task.replace("-", "_")
    start = time.perf_counter()
    manifest = RunManifest(task=cfg.task, config=cfg.to_dict())
    manifest.warnings.extend(cfg.metadata.get("config_warnings", []))

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        params = cfg.model_params()
        manifest.resolved_params = {"type": type(params).__name__, **asdict(params)}
        if cfg.task == "scatter":
            paths = _run_scatter(cfg, out_dir / name, fmt)
        elif cfg.task == "sweep":
            paths = _run_sweep(cfg, out_dir / name, fmt, threads, manifest)
        else:
            paths = _run_evolve(cfg, params, out_dir / name, fmt, manifest)
    manifest.warnings.extend(_describe(w) for w in caught)
    manifest.outputs = [str(p) for p in paths]
    manifest.wall_clock_s = time.perf_counter() - start
    manifest.write(out_dir)
    return manifest


def _run_evolve(cfg, params, path, fmt, manifest):
    grid = cfg.grid()
    gen = build_generator(params, grid)
    if cfg.initial == "catch":
        state = catch_initial_state(grid, cfg.N, cfg.catch.sigma, cfg.catch.k,
                                    cfg.catch.phase_origin)
    else:
        state = gaussian_packet(grid, cfg.packet_spec())
    traj = evolve(gen, state, cfg.t_end, cfg.dt, cfg.phase_schedule(), cfg.snapshot_stride,
                  cfg.keep_amplitudes)
    manifest.norm_drift = traj.norm_drift
    meta = {"task": cfg.task, "model": cfg.model, "N": cfg.N}
    paths = write_outputs(traj, path, fmt, site_window=cfg.output.site_window,
                          n_sep=cfg.N, metadata=meta)
    incident = "left" if cfg.initial == "catch" or cfg.packet.k > 0 else "right"
    routing = routing_coefficients(traj.final, cfg.N, incident)
    paths += write_outputs(routing, path.with_name(path.name + "_routing"), fmt, metadata=meta)
    return paths


def _run_scatter(cfg, path, fmt):
    inp = cfg.scattering_input()
    closed = closed_form_amplitudes(inp)
    oracle = oracle_amplitudes(inp)
    rows = []
    for n in AMPLITUDE_NAMES:
        c, o = getattr(closed, n), getattr(oracle, n)
        rows.append((n, c.real, c.imag, abs(c) ** 2, abs(c - o)))
    meta = {"g": inp.g, "k": inp.k, "N": inp.n_sep, "theta": inp.theta, "J": inp.J,
            "xi": closed.xi, "flux": closed.flux(),
            "continuity_residual": continuity_residual(inp, closed)}
    table = Table(["amplitude", "re", "im", "abs2", "oracle_diff"], rows, meta)
    return [write_table(table, path, fmt)]


def _point_job(job):
    cfg, value = job
    point = sweep_point_config(cfg, value)
    params = point.model_params()
    grid = point.grid()
    spec = point.packet_spec()
    t_end = point.t_end or default_t_end(spec, point.N, point.J)
    gen = build_generator(params, grid)
    traj = evolve(gen, gaussian_packet(grid, spec), t_end, point.dt,
                  snapshot_stride=10 ** 9)
    r = routing_coefficients(traj.final, point.N, "left" if spec.k > 0 else "right")
    return (value, r.T_a, r.T_b, r.R_a, r.R_b, r.mid_a, r.mid_b, r.atom_residual), traj.norm_drift


def _run_sweep(cfg, path, fmt, threads, manifest):
    s = cfg.sweep
    values = s.grid()
    if s.method == "analytic":
        table = sweep(s.kind, cfg.scattering_input(), values)
    else:
        results = presets.parallel_map(_point_job, [(cfg, v) for v in values], threads)
        rows = [r for r, _ in results]
        manifest.norm_drift = max((abs(d) for _, d in results), default=0.0)
        table = Table(["value", "T_a", "T_b", "R_a", "R_b", "mid_a", "mid_b", "atom_residual"],
                      rows, {"kind": s.kind, "method": "wavepacket", "N": cfg.N})
    return [write_table(table, path, fmt)]


# =============================================================================
# PRESETS
# =============================================================================

def run_preset(name: str, out_dir, fmt="csv", threads=1, dt=0.01) -> RunManifest:
    """Run one of :data:`presets.PRESETS` and write its data files."""
    if name not in presets.PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(presets.PRESETS)}")
    out_dir = Path(out_dir)
    start = time.perf_counter()
    manifest = RunManifest(task=f"preset:{name}", config={"preset": name, "dt": dt, "format": fmt})
    paths = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if name == "fig2a":
            paths.append(write_table(presets.fig2a(dt=dt, threads=threads), out_dir / name, fmt))
        elif name == "fig2b":
            paths.append(write_table(presets.fig2b(dt=dt, threads=threads), out_dir / name, fmt))
        elif name == "fig4a":
            paths.append(write_table(presets.fig4a(dt=dt, threads=threads), out_dir / name, fmt))
        elif name == "fig4b":
            paths.append(write_table(presets.fig4b(), out_dir / name, fmt))
        elif name == "fig3":
            drift = 0.0
            for theta, (result, traj) in presets.fig3(dt=dt).items():
                tag = "theta_plus" if theta > 0 else "theta_minus"
                meta = {"figure": "3", "theta": theta, "N": 3}
                paths += write_outputs(traj, out_dir / f"fig3_{tag}", fmt, n_sep=3,
                                       site_window=(-199, 200), metadata=meta)
                paths += write_outputs(result, out_dir / f"fig3_{tag}_routing", fmt,
                                       metadata=meta)
                drift = max(drift, abs(traj.norm_drift))
            manifest.norm_drift = drift
        elif name == "appC":
            traj = presets.catch_release(dt=dt, snapshot_stride=int(round(1.0 / dt)))
            meta = {"figure": "5", "N": 30, "sigma": 16, "release_time": 200.0,
                    "release_theta": math.pi}
            paths += write_outputs(traj, out_dir / "appC", fmt, n_sep=30,
                                   site_window=(-200, 230), metadata=meta)
            manifest.norm_drift = traj.norm_drift
    manifest.warnings.extend(_describe(w) for w in caught)
    manifest.outputs = [str(p) for p in paths]
    manifest.wall_clock_s = time.perf_counter() - start
    manifest.write(out_dir)
    return manifest
