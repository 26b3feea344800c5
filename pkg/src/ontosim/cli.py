"""Batch entry point: simulate, evaluate the flash-law oracle, run check
suites, export files.

Configuration is a single JSON document; command-line flags override config
keys. Exit codes: 0 success, 1 check failure, 2 configuration error, 3
numerical failure (annihilation or node stall).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import checks as check_suites
from . import io as oio
from .bohm import integrate_trajectory, sample_equilibrium
from .dynamics import recommended_step
from .errors import SimulationError
from .grw import TheoryParams, flash_joint_density, run_grw_collapse, run_grw_linear, unitary_path
from .ontology import run_bmw, run_grwm, run_grwp, run_sf, run_sf_prime, run_sm
from .presets import PRESET_NAMES, build_preset
from .rngs import derive_rng

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    overrides = {
        "theory": args.theory,
        "preset": args.preset,
        "seed": args.seed,
        "t_max": args.t_max,
        "runs": args.runs,
        "out_dir": args.out,
        "jobs": args.jobs,
        "cadence": args.cadence,
        "dt": args.dt,
        "couple_seed": args.couple_seed or None,
    }
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    cfg.setdefault("seed", 0)
    cfg.setdefault("runs", 1)
    cfg.setdefault("out_dir", "runs")
    cfg.setdefault("cadence", 20)
    cfg.setdefault("dt", 0.01)
    cfg.setdefault("jobs", 1)
    cfg.setdefault("max_step", None)  # None -> the max|V| dt / hbar <= 0.05 rule
    return cfg


def _resolve_scene(cfg: dict):
    """Preset plus overrides -> (grid, psi0, hamiltonian, params, t_max, label)."""
    preset_name = cfg.get("preset")
    if not preset_name:
        raise ConfigError("config must name a preset (cat, free_packet, harmonic, "
                          "double_well, entangled_pair)")
    try:
        pre = build_preset(preset_name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    grid, psi0, h = pre.grid, pre.psi0, pre.hamiltonian
    params = pre.params
    if "params" in cfg:
        p = cfg["params"]
        params = TheoryParams(
            lambda_rate=p.get("lambda_rate", params.lambda_rate),
            sigma=p.get("sigma", params.sigma),
            per_label_rates=tuple(p["per_label_rates"]) if p.get("per_label_rates") else None,
        )
    if "hamiltonian" in cfg:
        hcfg = cfg["hamiltonian"]
        tabulated = None
        pot_cfg = hcfg.get("potential", {})
        if pot_cfg.get("kind") == "tabulated":
            if "file" not in pot_cfg:
                raise ConfigError("tabulated potential needs a 'file' key")
            tabulated = oio.load_tabulated_potential(Path(pot_cfg["file"]))
        h = oio.hamiltonian_from_config(hcfg, tabulated=tabulated)
    t_max = float(cfg.get("t_max", pre.t_max))
    return grid, psi0, h, params, t_max, preset_name


def _one_run(cfg: dict, run_index: int) -> list[str]:
    grid, psi0, h, params, t_max, preset_name = _resolve_scene(cfg)
    theory = cfg.get("theory")
    if theory not in oio.THEORIES:
        raise ConfigError(f"theory must be one of {oio.THEORIES}, got {theory!r}")
    seed = int(cfg["seed"])
    rng = derive_rng(seed, run_index)
    out_dir = Path(cfg["out_dir"])
    cadence = int(cfg["cadence"])
    dt = float(cfg["dt"])
    max_step = cfg.get("max_step")
    if max_step is None:
        max_step = recommended_step(h, grid)
    record = oio.RunRecord.build(
        seed, theory, grid, params, h, preset_name, run_index, t_max=t_max
    )
    written: list[str] = []

    def flash_path():
        return out_dir / f"{theory}_{run_index:04d}.flashes.jsonl"

    def density_path():
        return out_dir / f"{theory}_{run_index:04d}.mdens"

    def traj_path():
        return out_dir / f"{theory}_{run_index:04d}.traj.csv"

    if theory in ("grwf", "grwf_linear"):
        runner = run_grw_collapse if theory == "grwf" else run_grw_linear
        if theory == "grwf_linear" and cfg.get("couple_seed"):
            rng = derive_rng(seed, run_index)  # same stream as the grwf twin
        run = runner(psi0, 0.0, t_max, h, params, rng, cadence=cadence, max_step=max_step)
        oio.write_flashes(flash_path(), record, run.flashes)
        written.append(str(flash_path()))
    elif theory == "grwm":
        density, run = run_grwm(psi0, 0.0, t_max, h, params, rng, cadence=cadence, max_step=max_step)
        oio.write_matter_density(density_path(), record, density)
        oio.write_flashes(flash_path(), record, run.flashes)
        written += [str(density_path()), str(flash_path())]
    elif theory == "sm":
        density = run_sm(psi0, 0.0, t_max, h, cadence=cadence, max_step=max_step)
        oio.write_matter_density(density_path(), record, density)
        written.append(str(density_path()))
    elif theory == "sf":
        flashes = run_sf(psi0, 0.0, t_max, h, params, rng,
                         sigma_zero=bool(cfg.get("sigma_zero", False)), max_step=max_step)
        oio.write_flashes(flash_path(), record, flashes)
        written.append(str(flash_path()))
    elif theory == "sf_prime":
        flashes = run_sf_prime(psi0, 0.0, t_max, h, params, rng, max_step=max_step)
        oio.write_flashes(flash_path(), record, flashes)
        written.append(str(flash_path()))
    elif theory == "bm":
        q0 = sample_equilibrium(psi0, rng)
        cadence_bm = max(cadence, int(np.ceil(t_max / (5 * dt))))
        path = unitary_path(psi0, 0.0, t_max, h, cadence=cadence_bm, max_step=max_step)
        tr = integrate_trajectory(path, q0, 0.0, t_max, dt, h)
        oio.write_trajectory(traj_path(), record, tr)
        written.append(str(traj_path()))
    elif theory == "grwp":
        q0 = sample_equilibrium(psi0, rng)
        tr, flashes = run_grwp(psi0, q0, 0.0, t_max, h, params, rng, dt=dt, max_step=max_step)
        oio.write_trajectory(traj_path(), record, tr)
        oio.write_flashes(flash_path(), record, flashes)
        written += [str(traj_path()), str(flash_path())]
    elif theory == "bmw":
        times = np.linspace(0.0, t_max, cadence + 1)
        draws = run_bmw(psi0, times, h, rng, max_step=max_step)
        from .bohm import Trajectory

        tr = Trajectory(times, draws)
        oio.write_trajectory(traj_path(), record, tr)
        written.append(str(traj_path()))
    return written


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    runs = int(cfg["runs"])
    jobs = int(cfg.get("jobs", 1))
    written: list[str] = []
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for paths in pool.map(_one_run, [cfg] * runs, range(runs)):
                written.extend(paths)
    else:
        for j in range(runs):
            written.extend(_one_run(cfg, j))
    for path in written:
        print(path)
    return EXIT_OK


def cmd_oracle(args) -> int:
    record, flashes = oio.read_flashes(Path(args.history))
    if record.initial_state not in PRESET_NAMES:
        raise ConfigError(
            f"oracle needs a preset-based history, got initial state {record.initial_state!r}"
        )
    pre = build_preset(record.initial_state)
    params = TheoryParams(
        lambda_rate=record.params["lambda_rate"],
        sigma=record.params["sigma"],
        per_label_rates=tuple(record.params["per_label_rates"])
        if record.params.get("per_label_rates")
        else None,
    )
    t_end = args.t_end
    value = flash_joint_density(
        flashes, pre.psi0, 0.0, pre.hamiltonian, params, t_end=t_end
    )
    print(json.dumps({"flash_count": len(flashes), "density": value}))
    return EXIT_OK


def cmd_check(args) -> int:
    if args.suite == "all":
        names = list(check_suites.SUITES)
    elif args.suite in check_suites.SUITES:
        names = [args.suite]
    else:
        raise ConfigError(
            f"unknown suite {args.suite!r}; choose from: all, "
            + ", ".join(check_suites.SUITES)
        )
    seed = args.seed if args.seed is not None else check_suites.DEFAULT_SEED
    reports, ok = check_suites.run_suites(names, seed=seed, quick=args.quick)
    if args.out:
        oio.write_report(Path(args.out), reports)
        print(f"report written to {args.out}")
    print(f"{sum(r.passed for r in reports)}/{len(reports)} checks passed")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontosim",
        description="Simulate Bohmian and GRW-type dynamics and verify their "
        "equivalence and symmetry properties.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a theory and write its primitive-ontology output")
    sim.add_argument("--config", help="JSON config file")
    sim.add_argument("--theory", choices=oio.THEORIES)
    sim.add_argument("--preset", choices=PRESET_NAMES)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--t-max", dest="t_max", type=float)
    sim.add_argument("--runs", type=int)
    sim.add_argument("--out", help="output directory")
    sim.add_argument("--jobs", type=int, help="parallel independent runs")
    sim.add_argument("--cadence", type=int)
    sim.add_argument("--dt", type=float)
    sim.add_argument("--couple-seed", action="store_true",
                     help="grwf_linear: reuse the grwf stream to couple the runs")
    sim.set_defaults(fn=cmd_simulate)

    orc = sub.add_parser("oracle", help="evaluate the exact flash-law density of a stored history")
    orc.add_argument("history", help="flash JSONL file")
    orc.add_argument("--t-end", dest="t_end", type=float,
                     help="include the flash-free survival factor up to this time")
    orc.set_defaults(fn=cmd_oracle)

    chk = sub.add_parser("check", help="run a verification suite")
    chk.add_argument("suite", help="suite name or 'all'")
    chk.add_argument("--quick", action="store_true", help="reduced sample sizes")
    chk.add_argument("--seed", type=int)
    chk.add_argument("--out", help="write the aggregated report JSON here")
    chk.set_defaults(fn=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
