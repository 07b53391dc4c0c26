"""Command-line front end: run a scenario and write plot-ready tables.

Usage::

    workfluct sweep-tau --config scenario.yaml --out results/
    workfluct all                      # bundled default scenario

Each subcommand writes ``<name>.csv`` (or ``<name>.json``) plus
``<name>.manifest.json`` with the resolved configuration, library versions,
seed and derived constants. Exit status is 0 on success, 2 for configuration
errors and 3 when a numerical contract (for example unitarity) is violated.
"""
from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, load_config
from .experiment import ContractViolation, endpoint_bases, evaluate, evaluate_transitions, reference_transitions
from .linalg import default_n_steps, propagate, unitarity_error
from .protocols import DriveProtocol, Kind, adiabatic_parameter, cd_field, x_schedule
from .readout import correct_joint, measure_joint
from .sampling import convergence_study

__all__ = [
    "main",
    "run_sweep_tau",
    "run_sta_compare",
    "run_joint_probabilities",
    "run_estimator_convergence",
    "run_gamma_report",
    "run_cd_waveform",
]

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT = 0, 2, 3


class Table:
    def __init__(self, name, columns):
        self.name = name
        self.columns = list(columns)
        self.rows = []

    def add(self, **row):
        self.rows.append([row[c] for c in self.columns])


def _map(fn, items, jobs):
    # Results come back in input order regardless of completion order.
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _protocol(cfg, tau, kind=Kind.BARE):
    return DriveProtocol(cfg.z, cfg.x_max, tau, Kind(kind), cfg.schedule)


def _kinds(cfg):
    return {
        "off": [Kind.BARE],
        "on": [Kind.COUNTER_DIABATIC],
        "both": [Kind.BARE, Kind.COUNTER_DIABATIC],
    }[cfg.sta]


def _propagators(cfg, kinds):
    keys = [(tau, kind) for tau in cfg.tau_grid for kind in kinds]

    def work(key):
        p = _protocol(cfg, *key)
        n = cfg.n_steps or default_n_steps(p)
        u = propagate(p, n)
        return n, u

    return dict(zip(keys, _map(work, keys, cfg.jobs)))


def _max_offdiag(trans):
    return float(np.max(trans - np.diag(np.diag(trans))))


def run_sweep_tau(cfg):
    """Mean and variance of exp(-beta W) for the bare protocol over (tau, beta)."""
    table = Table(
        "sweep_tau",
        ["tau_ms", "beta_z", "beta", "n_steps", "mean", "variance", "exp_neg_beta_df",
         "jarzynski_residual", "gamma", "p_up", "p_down", "unitarity_error"],
    )
    props = _propagators(cfg, [Kind.BARE])
    for tau in cfg.tau_grid:
        p = _protocol(cfg, tau)
        n, u = props[(tau, Kind.BARE)]
        gamma = adiabatic_parameter(p, cfg.gamma_samples).gamma
        for bz, beta in zip(cfg.beta_z, cfg.betas):
            r = evaluate(p, beta, unitary=u)
            table.add(
                tau_ms=tau, beta_z=bz, beta=beta, n_steps=n, mean=r.mean, variance=r.variance,
                exp_neg_beta_df=float(np.exp(-beta * r.delta_f)),
                jarzynski_residual=r.jarzynski_residual, gamma=gamma,
                p_up=r.transitions[0, 1], p_down=r.transitions[1, 0],
                unitarity_error=unitarity_error(u),
            )
    return [table]


def run_sta_compare(cfg):
    """Paired bare / counter-diabatic rows per (tau, beta)."""
    if cfg.sta != "both":
        raise ConfigError("sweep.sta", "sta-compare needs sta: both")
    table = Table(
        "sta_compare",
        ["tau_ms", "beta_z", "kind", "n_steps", "mean", "variance", "adiabatic_variance",
         "max_offdiag_transition", "unitarity_error"],
    )
    props = _propagators(cfg, [Kind.BARE, Kind.COUNTER_DIABATIC])
    for tau in cfg.tau_grid:
        for bz, beta in zip(cfg.beta_z, cfg.betas):
            bare = _protocol(cfg, tau)
            adiabatic = evaluate_transitions(bare, beta, reference_transitions(bare, "adiabatic"))
            for kind in (Kind.BARE, Kind.COUNTER_DIABATIC):
                n, u = props[(tau, kind)]
                r = evaluate(_protocol(cfg, tau, kind), beta, unitary=u)
                table.add(
                    tau_ms=tau, beta_z=bz, kind=kind.value, n_steps=n, mean=r.mean,
                    variance=r.variance, adiabatic_variance=adiabatic.variance,
                    max_offdiag_transition=_max_offdiag(r.transitions),
                    unitarity_error=unitarity_error(u),
                )
    return [table]


def run_joint_probabilities(cfg):
    """Joint probabilities per (tau, beta, kind); with a readout model also the
    noisy measured table and its correction."""
    table = Table(
        "joint_probs",
        ["tau_ms", "beta_z", "kind", "stage", "m", "n", "probability", "initial_population",
         "clamp_adjustment"],
    )
    kinds = _kinds(cfg)
    props = _propagators(cfg, kinds)
    for tau in cfg.tau_grid:
        for bz, beta in zip(cfg.beta_z, cfg.betas):
            for kind in kinds:
                r = evaluate(_protocol(cfg, tau, kind), beta, unitary=props[(tau, kind)][1])
                stages = [("true", r.table.entries, 0.0)]
                if cfg.readout is not None:
                    p0_exp, pc_exp = measure_joint(r.table, cfg.readout)
                    stages.append(("measured", (pc_exp * p0_exp[None, :]).T, 0.0))
                    corrected, adj = correct_joint(p0_exp, pc_exp, cfg.readout)
                    stages.append(("corrected", corrected.entries, adj))
                for stage, joint, adj in stages:
                    pops = joint.sum(axis=1)
                    for m in range(joint.shape[0]):
                        for n in range(joint.shape[1]):
                            table.add(
                                tau_ms=tau, beta_z=bz, kind=kind.value, stage=stage, m=m, n=n,
                                probability=joint[m, n], initial_population=pops[m],
                                clamp_adjustment=adj,
                            )
    return [table]


def _estimator_scenarios(cfg):
    out = []
    for name in cfg.scenarios:
        if name == "bare":
            out += [(f"bare_tau_{tau:g}ms", tau) for tau in cfg.tau_grid]
        else:
            out.append((name, None))
    return out


def run_estimator_convergence(cfg):
    """Bias and RMSE of the Jarzynski estimator along the sample-size grid."""
    table = Table(
        "estimator",
        ["scenario", "beta_z", "n", "mean_estimate", "delta_f", "bias", "rmse", "stderr",
         "replicas", "seed"],
    )
    ref = _protocol(cfg, cfg.tau_grid[0])
    scenarios = _estimator_scenarios(cfg)
    props = {}
    if "bare" in cfg.scenarios:
        props = {tau: u for (tau, _), (_, u) in _propagators(cfg, [Kind.BARE]).items()}
    b0, b1 = endpoint_bases(ref)
    jobs = []
    for ib, (bz, beta) in enumerate(zip(cfg.beta_z, cfg.betas)):
        for isc, (name, tau) in enumerate(scenarios):
            if tau is None:
                r = evaluate_transitions(ref, beta, reference_transitions(ref, name))
            else:
                r = evaluate(_protocol(cfg, tau), beta, unitary=props[tau])
            jobs.append((name, bz, beta, r, ib * len(scenarios) + isc))

    def work(job):
        name, bz, beta, r, key = job
        return convergence_study(
            r.table, b0.values, b1.values, beta, cfg.n_grid, cfg.replicas, cfg.seed,
            scenario=key, delta_f=r.delta_f,
        )

    for (name, bz, _, _, _), series in zip(jobs, _map(work, jobs, cfg.jobs)):
        for i, n in enumerate(series.n_grid):
            table.add(
                scenario=name, beta_z=bz, n=int(n), mean_estimate=series.mean_estimate[i],
                delta_f=series.delta_f, bias=series.bias[i], rmse=series.rmse[i],
                stderr=series.stderr[i], replicas=series.replicas, seed=series.seed,
            )
    return [table]


def run_gamma_report(cfg):
    """Adiabatic parameter per duration."""
    table = Table("gamma", ["tau_ms", "gamma", "argmax_ms", "gamma_times_tau"])
    for tau in cfg.tau_grid:
        rep = adiabatic_parameter(_protocol(cfg, tau), cfg.gamma_samples)
        table.add(tau_ms=tau, gamma=rep.gamma, argmax_ms=rep.argmax_time, gamma_times_tau=rep.gamma * tau)
    return [table]


def run_cd_waveform(cfg):
    """Field components of the counter-diabatic Hamiltonian on a uniform time grid."""
    table = Table("cd_waveform", ["t_ms", "z_khz", "x_khz", "y_khz"])
    p = _protocol(cfg, cfg.waveform_tau, Kind.COUNTER_DIABATIC)
    for t in np.linspace(0.0, p.tau, cfg.waveform_points):
        table.add(t_ms=t, z_khz=p.z, x_khz=float(x_schedule(p, t)), y_khz=float(cd_field(p, t)))
    return [table]


COMMANDS = {
    "sweep-tau": run_sweep_tau,
    "sta-compare": run_sta_compare,
    "joint-probs": run_joint_probabilities,
    "estimator": run_estimator_convergence,
    "gamma": run_gamma_report,
    "cd-waveform": run_cd_waveform,
}


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _derived_constants(cfg):
    ref = _protocol(cfg, cfg.tau_grid[0])
    b0, b1 = endpoint_bases(ref)
    out = {
        "z_khz": cfg.z,
        "initial_spectrum_khz": b0.values.tolist(),
        "final_spectrum_khz": b1.values.tolist(),
        "temperatures": [],
    }
    for bz, beta in zip(cfg.beta_z, cfg.betas):
        adiabatic = evaluate_transitions(ref, beta, reference_transitions(ref, "adiabatic"))
        sudden = evaluate_transitions(ref, beta, reference_transitions(ref, "sudden"))
        out["temperatures"].append({
            "beta_z": bz,
            "beta": beta,
            "delta_f_khz": adiabatic.delta_f,
            "exp_neg_beta_df": float(np.exp(-beta * adiabatic.delta_f)),
            "adiabatic_variance": adiabatic.variance,
            "sudden_variance": sudden.variance,
            "initial_populations": adiabatic.table.initial.tolist(),
        })
    return out


def write_table(table, out_dir, fmt):
    out_dir = Path(out_dir)
    if fmt == "csv":
        path = out_dir / f"{table.name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([_fmt(v) for v in row])
    else:
        path = out_dir / f"{table.name}.json"
        rows = [[_jsonable(v) for v in row] for row in table.rows]
        path.write_text(json.dumps({"columns": table.columns, "rows": rows}, indent=1) + "\n")
    return path


def write_manifest(name, cfg, files, out_dir):
    # The output directory is left out so reruns elsewhere stay byte-identical.
    echo = json.loads(json.dumps(cfg.raw))
    echo["output"].pop("dir", None)
    manifest = {
        "command": name,
        "files": [Path(f).name for f in files],
        "config": echo,
        "seed": cfg.seed,
        "versions": {
            "workfluct": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "derived": _derived_constants(cfg),
    }
    path = Path(out_dir) / f"{name.replace('-', '_')}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def run_command(name, cfg):
    """Run one subcommand (or ``all``) and write its files; returns the paths."""
    names = list(COMMANDS) if name == "all" else [name]
    if name == "all" and cfg.sta != "both":
        names.remove("sta-compare")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for cmd in names:
        files = [write_table(t, out_dir, cfg.format) for t in COMMANDS[cmd](cfg)]
        written += files + [write_manifest(cmd, cfg, files, out_dir)]
    return written


def build_parser():
    parser = argparse.ArgumentParser(
        prog="workfluct",
        description="Work statistics of a driven two-level system: sweeps, STA comparison, "
        "joint probabilities, estimator convergence, adiabatic parameter, CD waveforms.",
    )
    parser.add_argument("command", choices=[*COMMANDS, "all"])
    parser.add_argument("--config", help="scenario YAML file (default: bundled scenario)")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, help="64-bit sampling seed (overrides sampling.seed)")
    parser.add_argument("--steps", type=int, help="propagation steps (overrides sweep.n_steps)")
    parser.add_argument("--format", choices=["csv", "json"], help="table format")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).override(
            seed=args.seed, n_steps=args.steps, out_dir=args.out, format=args.format
        )
        files = run_command(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
