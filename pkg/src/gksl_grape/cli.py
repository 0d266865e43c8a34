"""Command-line driver: ``gksl-grape {optimize,propagate,grad-check,channel,spectrum}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import channel, output
from .core import SystemParams, resolve_gate
from .gradient import (QuadratureConfig, finite_difference_gradient, gradient_error,
                       objective_gradient)
from .objective import GateProblem, gate_objective
from .optimizer import OptimizerConfig, adaptive_grape, default_initial_controls
from .propagator import (ControlGrid, PiecewiseControls, affine_map_history,
                         compose_affine_map, propagate_dense)
from .spectrum import SpectralDensity, filtered_density, planck_density, total_density

logger = logging.getLogger(__name__)

COMMANDS = ("optimize", "propagate", "grad-check", "channel", "spectrum")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumSettings:
    betas: tuple = (0.8, 1.0)
    filter_beta: float = 0.8
    filter_center: float = 5.0
    filter_variance: float = 1.0
    omega_max: float = 15.0
    points: int = 301
    total_omega_max: float = 50.0
    total_nodes: int = 20001


@dataclass(frozen=True, eq=False)
class RunConfig:
    system: SystemParams = field(default_factory=SystemParams)
    T: float = 5.0
    M: int = 10
    gate: object = "H"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    initial_controls: object = "paper_default"
    samples_per_interval: int = 20
    fd_step: float = 1e-6
    spectrum: SpectrumSettings = field(default_factory=SpectrumSettings)
    out_dir: Path = Path("results")
    svg: bool = True

    @property
    def grid(self) -> ControlGrid:
        return ControlGrid.uniform(self.T, self.M)

    def problem(self) -> GateProblem:
        return GateProblem.for_gate(self.gate, self.system, self.grid)

    def controls(self) -> PiecewiseControls:
        if self.initial_controls == "paper_default":
            return default_initial_controls(self.grid)
        return PiecewiseControls(self.grid, self.initial_controls["u"], self.initial_controls["w"])

    def gate_label(self) -> str:
        return self.gate if isinstance(self.gate, str) else "custom"


def _numbers(sub, name, allowed, rename=None):
    if not isinstance(sub, dict):
        raise ConfigError(f"{name}: expected an object")
    rename = rename or {}
    kwargs = {}
    for key, val in sub.items():
        target = rename.get(key, key)
        if target not in allowed:
            raise ConfigError(f"{name}.{key}: unknown field")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{name}.{key}: expected a number, got {val!r}")
        kwargs[target] = val
    return kwargs


def _section(raw, name, cls):
    kwargs = _numbers(raw.get(name, {}), name, {f.name for f in fields(cls)})
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _parse_gate(val):
    try:
        if isinstance(val, str):
            resolve_gate(val)
            return val.upper()
        if isinstance(val, dict):
            return resolve_gate(output.complex_from_json(val))
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"gate: {exc}") from None
    raise ConfigError('gate: expected "X", "H" or {"real": [[..]], "imag": [[..]]}')


def _controls_from_file(path, grid: ControlGrid):
    try:
        data = output.read_csv(path)
    except OSError as exc:
        raise ConfigError(f"initial_controls: cannot read {path}: {exc}") from None
    if "u" not in data or ("n" not in data and "w" not in data):
        raise ConfigError(f"initial_controls: {path} needs columns u and n")
    w = data["w"] if "w" in data else np.sqrt(np.maximum(data["n"], 0.0))
    return _explicit_controls({"u": data["u"], "w": w}, grid)


def _explicit_controls(val, grid: ControlGrid):
    if not isinstance(val, dict) or "u" not in val or not ({"w", "n"} & set(val)):
        raise ConfigError('initial_controls: expected "paper_default" or an object with u and w (or n)')
    u = np.asarray(val["u"], dtype=float)
    if "w" in val:
        w = np.asarray(val["w"], dtype=float)
    else:
        n = np.asarray(val["n"], dtype=float)
        if np.any(n < 0):
            raise ConfigError("initial_controls.n: incoherent control must be >= 0")
        w = np.sqrt(n)
    if u.shape != (grid.M,) or w.shape != (grid.M,):
        raise ConfigError(f"initial_controls: vectors must have length M = {grid.M}")
    return {"u": u, "w": w}


def parse_config(raw: dict, base_dir: Path = Path(".")) -> RunConfig:
    """Validate a config mapping and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    known = {"system", "grid", "gate", "optimizer", "quadrature", "initial_controls",
             "propagate", "grad_check", "spectrum", "outputs"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{key}: unknown section")
    system = _section(raw, "system", SystemParams)
    grid_raw = raw.get("grid", {})
    if not isinstance(grid_raw, dict) or set(grid_raw) - {"T", "M"}:
        raise ConfigError("grid: expected an object with fields T and M")
    T = grid_raw.get("T", 5.0)
    M = grid_raw.get("M", 10)
    try:
        grid = ControlGrid.uniform(float(T), M)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid: {exc}") from None
    gate = _parse_gate(raw.get("gate", "H"))
    optimizer = _section(raw, "optimizer", OptimizerConfig)
    quadrature = _section(raw, "quadrature", QuadratureConfig)

    init = raw.get("initial_controls", "paper_default")
    if init != "paper_default":
        if isinstance(init, dict) and "file" in init:
            init = _controls_from_file(base_dir / init["file"], grid)
        else:
            init = _explicit_controls(init, grid)

    prop = raw.get("propagate", {})
    s = prop.get("samples_per_interval", 20) if isinstance(prop, dict) else None
    if not isinstance(s, int) or isinstance(s, bool) or s < 1:
        raise ConfigError("propagate.samples_per_interval: expected a positive integer")
    gc = raw.get("grad_check", {})
    fd_step = gc.get("fd_step", 1e-6) if isinstance(gc, dict) else None
    if not isinstance(fd_step, (int, float)) or not fd_step > 0:
        raise ConfigError("grad_check.fd_step: expected a positive number")

    spec_raw = raw.get("spectrum", {})
    if not isinstance(spec_raw, dict):
        raise ConfigError("spectrum: expected an object")
    spec_kwargs = _numbers({k: v for k, v in spec_raw.items() if k not in ("filter", "betas")},
                           "spectrum", {"omega_max", "points", "total_omega_max", "total_nodes"})
    spec_kwargs |= _numbers(spec_raw.get("filter", {}), "spectrum.filter",
                            {"filter_beta", "filter_center", "filter_variance"},
                            rename={"beta": "filter_beta", "center": "filter_center",
                                    "variance": "filter_variance"})
    if "betas" in spec_raw:
        betas = spec_raw["betas"]
        if not isinstance(betas, list) or not betas or not all(
                isinstance(b, (int, float)) and not isinstance(b, bool) and b > 0 for b in betas):
            raise ConfigError("spectrum.betas: expected a list of positive numbers")
        spec_kwargs["betas"] = tuple(float(b) for b in betas)
    spectrum = SpectrumSettings(**spec_kwargs)
    if not (spectrum.filter_beta > 0 and spectrum.filter_variance > 0):
        raise ConfigError("spectrum.filter: beta and variance must be > 0")
    if not (spectrum.omega_max > 0 and spectrum.total_omega_max > 0):
        raise ConfigError("spectrum: omega_max and total_omega_max must be > 0")
    if int(spectrum.points) != spectrum.points or spectrum.points < 2 \
            or int(spectrum.total_nodes) != spectrum.total_nodes or spectrum.total_nodes < 2:
        raise ConfigError("spectrum: points and total_nodes must be integers >= 2")

    outputs = raw.get("outputs", {})
    if not isinstance(outputs, dict) or set(outputs) - {"dir", "svg"}:
        raise ConfigError('outputs: expected an object with fields "dir" and "svg"')

    return RunConfig(system=system, T=float(T), M=int(M), gate=gate, optimizer=optimizer,
                     quadrature=quadrature, initial_controls=init, samples_per_interval=s,
                     fd_step=float(fd_step), spectrum=spectrum,
                     out_dir=Path(outputs.get("dir", "results")), svg=bool(outputs.get("svg", True)))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(raw, base_dir=path.parent)


def _controls_rows(controls: PiecewiseControls):
    return zip(controls.grid.starts, controls.u, controls.n)


def _controls_json(controls: PiecewiseControls):
    return {"t": controls.grid.starts.tolist(), "u": controls.u.tolist(),
            "n": controls.n.tolist(), "w": controls.w.tolist()}


def run_optimize(cfg: RunConfig, out: Path) -> dict:
    problem = cfg.problem()
    result = adaptive_grape(problem, cfg.controls(), cfg.optimizer, cfg.quadrature)
    hist = result.history
    output.write_csv(out / "convergence.csv", ["l", "objective", "grad_norm", "step", "accepted"],
                     ((r.l, r.objective, r.grad_norm, r.step, r.accepted) for r in hist))
    output.write_csv(out / "controls.csv", ["t", "u", "n"], _controls_rows(result.controls))
    summary = {
        "gate": cfg.gate_label(),
        "stop_reason": result.stop_reason.value,
        "final_objective": result.final_objective,
        "iterations": result.iterations,
        "accepted_iterations": sum(r.accepted for r in hist[1:]),
        "epsilon": cfg.optimizer.epsilon,
        "n_partition": cfg.quadrature.n_partition,
        "final_controls": _controls_json(result.controls),
    }
    output.write_json(out / "summary.json", summary)
    if cfg.svg:
        edges = cfg.grid.breakpoints
        output.write_svg(out / "controls_u.svg", output.line_plot(
            [("u", edges, result.controls.u)], "coherent control", "t", "u", step=True))
        output.write_svg(out / "controls_n.svg", output.line_plot(
            [("n", edges, result.controls.n)], "incoherent control", "t", "n", step=True))
        ls = [r.l for r in hist]
        output.write_svg(out / "convergence.svg", output.line_plot(
            [("objective", ls, [r.objective for r in hist])],
            "objective vs iteration", "iteration", "objective", logy=True))
        output.write_svg(out / "grad_norm.svg", output.line_plot(
            [("|grad|", ls, [r.grad_norm for r in hist])],
            "gradient norm vs iteration", "iteration", "|grad|", logy=True))
    return summary


def run_propagate(cfg: RunConfig, out: Path) -> dict:
    problem = cfg.problem()
    controls = cfg.controls()
    states = []
    for j, r0 in enumerate(problem.basis, start=1):
        t, traj = propagate_dense(cfg.system, controls, r0, cfg.samples_per_interval)
        output.write_csv(out / f"trajectory_state{j}.csv", ["t", "r_x", "r_y", "r_z"],
                         (np.concatenate([[ti], ri]) for ti, ri in zip(t, traj)))
        prof = channel.sphere_distance_profile(traj)
        states.append({"state": j, "initial": r0.tolist(), "final": traj[-1].tolist(),
                       "target": problem.targets[j - 1].tolist(),
                       "max_sphere_distance": prof.max_distance})
    summary = {"gate": cfg.gate_label(), "objective": gate_objective(problem, controls),
               "max_sphere_distance": max(s["max_sphere_distance"] for s in states),
               "states": states}
    output.write_json(out / "trajectory_summary.json", summary)
    return summary


def run_grad_check(cfg: RunConfig, out: Path) -> dict:
    problem = cfg.problem()
    controls = cfg.controls()
    analytic = objective_gradient(problem, controls, cfg.quadrature)
    reference = finite_difference_gradient(problem, controls, cfg.fd_step)
    report = {"n_partition": cfg.quadrature.n_partition, "fd_step": cfg.fd_step,
              **gradient_error(analytic, reference)}
    output.write_json(out / "grad_check.json", report)
    return report


def run_channel(cfg: RunConfig, out: Path) -> dict:
    controls = cfg.controls()
    bloch_map = compose_affine_map(cfg.system, controls)
    choi = channel.choi_from_affine(bloch_map)
    rep = channel.cptp_report(choi)
    kraus = channel.kraus_from_choi(choi)
    S = channel.stiefel_embedding(kraus)
    report = {
        "gate": cfg.gate_label(),
        "affine_map": {"M": bloch_map.Mmat.tolist(), "v": bloch_map.v.tolist()},
        "choi": output.complex_to_json(choi),
        "kraus": [output.complex_to_json(K) for K in kraus],
        "min_eigenvalue": rep.min_eigenvalue,
        "tp_residual": rep.tp_residual,
        "kraus_completeness_residual": channel.kraus_completeness_residual(kraus),
        "stiefel": output.complex_to_json(S),
        "stiefel_orthonormality_residual": float(np.max(np.abs(S.conj().T @ S - np.eye(2)))),
        "objective": gate_objective(cfg.problem(), controls),
    }
    output.write_json(out / "channel.json", report)
    maps = affine_map_history(cfg.system, controls)
    traj = channel.stiefel_trajectory(maps)
    output.write_json(out / "stiefel_trajectory.json",
                      [{"t": float(t), **output.complex_to_json(S_t)}
                       for t, S_t in zip(cfg.grid.breakpoints, traj)])
    return report


def run_spectrum(cfg: RunConfig, out: Path) -> dict:
    sp = cfg.spectrum
    omega = np.linspace(0.0, sp.omega_max, sp.points)
    columns = {f"planck_beta_{b:g}": planck_density(omega, b) for b in sp.betas}
    fname = f"filtered_beta_{sp.filter_beta:g}_center_{sp.filter_center:g}"
    columns[fname] = filtered_density(omega, sp.filter_beta, sp.filter_center, sp.filter_variance)
    output.write_csv(out / "spectrum.csv", ["omega", *columns],
                     zip(omega, *columns.values()))
    totals = {f"planck_beta_{b:g}": total_density(SpectralDensity(b), sp.total_omega_max,
                                                  sp.total_nodes) for b in sp.betas}
    totals[fname] = total_density(
        SpectralDensity(sp.filter_beta, sp.filter_center, sp.filter_variance),
        sp.total_omega_max, sp.total_nodes)
    summary = {"total_density": totals}
    output.write_json(out / "spectrum_summary.json", summary)
    if cfg.svg:
        output.write_svg(out / "spectrum.svg", output.line_plot(
            [(name, omega, vals) for name, vals in columns.items()],
            "photon spectral density", "omega", "n(omega)"))
    return summary


_RUNNERS = {"optimize": run_optimize, "propagate": run_propagate, "grad-check": run_grad_check,
            "channel": run_channel, "spectrum": run_spectrum}


def execute(cmd: str, cfg: RunConfig, out_dir: Path | None = None) -> dict:
    """Run one workflow and write its files into ``out_dir`` (default ``cfg.out_dir``)."""
    if cmd not in _RUNNERS:
        raise ValueError(f"unknown command {cmd!r}")
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cmd](cfg, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gksl-grape",
        description="Single-qubit gate synthesis with coherent and incoherent controls.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, help="output directory (overrides outputs.dir)")
    parser.add_argument("--gate", help="target gate, X or H")
    parser.add_argument("--seed-controls", default=None,
                        help='"paper" for the default guess, or a controls CSV (t,u,n)')
    parser.add_argument("--n-partition", type=int, help="trapezoid partitions per interval")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            raw = json.loads(args.config.read_text()) if args.config.exists() else None
            if raw is None:
                raise ConfigError(f"config file {args.config} not found")
            cfg_raw, base = raw, args.config.parent
        else:
            cfg_raw, base = {}, Path(".")
        if not isinstance(cfg_raw, dict):
            raise ConfigError("config root must be a JSON object")
        if args.gate is not None:
            cfg_raw["gate"] = args.gate
        if args.n_partition is not None:
            cfg_raw.setdefault("quadrature", {})["n_partition"] = args.n_partition
        if args.seed_controls is not None:
            if args.seed_controls == "paper":
                cfg_raw["initial_controls"] = "paper_default"
            else:
                cfg_raw["initial_controls"] = {"file": str(Path(args.seed_controls).resolve())}
        cfg = parse_config(cfg_raw, base)
        result = execute(args.command, cfg, args.out)
    except json.JSONDecodeError as exc:
        print(f"error: {args.config}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({k: v for k, v in result.items() if _is_brief(v)}, sort_keys=True))
    return 0


def _is_brief(value) -> bool:
    """Scalars and flat mappings of scalars are echoed to stdout; arrays stay in the files."""
    if isinstance(value, dict):
        return all(not isinstance(v, (dict, list)) for v in value.values())
    return not isinstance(value, list)


if __name__ == "__main__":
    sys.exit(main())
