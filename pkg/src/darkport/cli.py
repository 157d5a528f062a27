"""Command-line surface: feasibility, exact, simulate, sweep, trajectory, report.

Exit codes: 0 success, 1 physics/validation violation, 2 usage or parse
error.  Output is a JSON document by default; tabular commands accept
--format csv.  Results are deterministic: the seed defaults to 0, and
--strict makes an explicit seed mandatory.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import document as doc
from . import montecarlo as mc
from . import observables as obs
from . import params as par
from . import plots, protocol
from .constants import CODATA2018
from .gaussian import GaussianComponent, WavepacketSuperposition

EXIT_OK = 0
EXIT_PHYSICS = 1
EXIT_USAGE = 2

DIMENSIONLESS = "dimensionless"
MOMENTUM_UNITS = "dimensionless (Delta_p units)"

PARAM_UNITS = {
    "m1": "kg",
    "m2": "kg",
    "d": "m",
    "delta_x": "m",
    "tau": "s",
    "omega": "rad/s",
    "eta": DIMENSIONLESS,
    "epsilon": DIMENSIONLESS,
    "T": "s",
    "density": "kg/m^3",
}

ANGSTROM = 1e-10


class UsageError(Exception):
    pass


class PhysicsError(Exception):
    pass


# --------------------------------------------------------------------------
# argument plumbing
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", help="named parameter set (paper-A, paper-B)")
    common.add_argument("--params", help="JSON file with experiment parameters")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=None, help="64-bit RNG seed")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument(
        "--strict", action="store_true", help="refuse to run without an explicit seed"
    )

    parser = argparse.ArgumentParser(
        prog="darkport",
        description="Postselected weak-value gravity protocol: analytics, "
        "feasibility chain and Monte Carlo simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feasibility", parents=[common],
                       help="evaluate the full feasibility chain")
    p.add_argument("--target-successes", type=int, default=10)

    p = sub.add_parser("exact", parents=[common],
                       help="exact vs first-order protocol quantities")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--r", type=float, required=True)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run")
    p.add_argument("--model", choices=("quantum", "classical"), default="quantum")
    p.add_argument("--mode", choices=("full", "conditioned"), default="conditioned")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--accept-l", type=float, default=1.0,
                   help="classical acceptance probability for arm L")
    p.add_argument("--accept-r", type=float, default=1.0,
                   help="classical acceptance probability for arm R")
    p.add_argument("--samples", help="dump per-trial records to this CSV file")

    p = sub.add_parser("sweep", parents=[common],
                       help="sweep one parameter, tabulating the derived chain")
    p.add_argument("--param", required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")

    p = sub.add_parser("trajectory", parents=[common],
                       help="splitting trajectory and time-dependent impulse")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--delta-x", type=float, default=None)
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser("report", parents=[common],
                       help="full report bundle: documents, CSV tables and figures")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--trials", type=int, default=100_000)

    return parser


def _resolve_seed(args) -> int:
    if args.seed is None:
        if args.strict:
            raise UsageError("--strict requires an explicit --seed")
        return 0
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must fit in 64 bits")
    return args.seed


def _resolve_params(args, required=True):
    """Return (params or None, echo dict with the preset expanded)."""
    if args.preset and args.params:
        raise UsageError("--preset and --params are mutually exclusive")
    if args.preset:
        try:
            params = par.get_preset(args.preset)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return params, {"preset": args.preset, "params": par.params_to_dict(params)}
    if args.params:
        try:
            params = par.load_params_file(args.params)
        except FileNotFoundError:
            raise UsageError(f"parameter file not found: {args.params}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed parameter JSON: {exc}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return params, {"preset": None, "params": par.params_to_dict(params)}
    if required:
        raise UsageError("this command needs --preset or --params")
    return None, {"preset": None, "params": None}


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_scalar_doc(args, document: dict) -> None:
    if args.format == "csv":
        _emit(args, doc.render_scalar_csv(document))
    else:
        _emit(args, doc.render_json(document))


# --------------------------------------------------------------------------
# command cores (build documents; no I/O)
# --------------------------------------------------------------------------


def feasibility_document(params: par.ExperimentParams, echo: dict,
                         target_successes: int = 10) -> dict:
    q = par.derive(params, target_successes=target_successes)
    results = {
        "delta_p": doc.result(q.delta_p, "kg*m/s"),
        "big_delta_p": doc.result(q.big_delta_p, "kg*m/s"),
        "sigma": doc.result(q.sigma, "m"),
        "r": doc.result(q.r, DIMENSIONLESS),
        "epsilon_required": doc.result(q.epsilon_required, DIMENSIONLESS),
        "epsilon_required_coefficient": doc.result(
            q.epsilon_required * params.eta, DIMENSIONLESS
        ),
        "p_success": doc.result(q.p_success, DIMENSIONLESS),
        "p_discriminate": doc.result(q.p_discriminate, DIMENSIONLESS),
        "p_discriminate_exact": doc.result(q.p_discriminate_exact, DIMENSIONLESS),
        "n_runs": doc.result(q.n_runs, "count"),
        "n_runs_exact": doc.result(q.n_runs_exact, "count"),
        "displacement_T": doc.result(q.displacement_T, "m"),
        "spread_T": doc.result(q.spread_T, "m"),
        "probe_radius": doc.result(q.probe_radius, "m"),
        "target_successes": doc.result(q.target_successes, "count"),
    }
    warnings = []
    if q.displacement_T < ANGSTROM:
        warnings.append({
            "code": "displacement-below-angstrom",
            "message": (
                f"computed free-flight displacement is {q.displacement_T:.4g} m "
                f"({q.displacement_T / ANGSTROM:.4g} angstrom), a factor "
                f"{ANGSTROM / q.displacement_T:.3g} below the often-quoted "
                "~1 angstrom readout scale; the computed value is reported unchanged"
            ),
        })
    ratio = params.epsilon / q.epsilon_required
    if not 0.5 <= ratio <= 2.0:
        warnings.append({
            "code": "bias-off-target",
            "message": (
                f"epsilon = {params.epsilon:.4g} differs from epsilon_required = "
                f"{q.epsilon_required:.4g} by factor {ratio:.3g}; the postselected "
                "shift misses the tenth-of-a-width design point by the same factor"
            ),
        })
    inputs = dict(echo)
    inputs["target_successes"] = target_successes
    return doc.build_document("feasibility", inputs, results, warnings)


def exact_document(epsilon: float, r: float) -> dict:
    if not 0.0 < epsilon < 1.0:
        raise PhysicsError(f"epsilon must be in (0, 1), got {epsilon}")
    if r < 0.0:
        raise PhysicsError(f"r must be >= 0, got {r}")
    wv = protocol.weak_value_exact(protocol.preselect(epsilon), protocol.dark_port())
    p_success = protocol.success_probability(epsilon, r)
    mean_exact = protocol.postselected_mean_exact(epsilon, r)
    state, _ = protocol.postselected_state(epsilon, r)
    p_disc = obs.discrimination_probability(
        WavepacketSuperposition.of(GaussianComponent(0.0)), state
    )
    regime = protocol.regime_parameter(epsilon, r)
    results = {
        "weak_value_exact": doc.result(wv.real, DIMENSIONLESS),
        "weak_value_approx": doc.result(protocol.weak_value_approx(epsilon), DIMENSIONLESS),
        "p_success_exact": doc.result(p_success, DIMENSIONLESS),
        "p_success_approx": doc.result(epsilon**2 / 4.0, DIMENSIONLESS),
        "postselected_mean_exact": doc.result(mean_exact, MOMENTUM_UNITS),
        "postselected_mean_approx": doc.result(
            protocol.postselected_mean_approx(epsilon, r), MOMENTUM_UNITS
        ),
        "p_discriminate_exact": doc.result(p_disc, DIMENSIONLESS),
        "p_discriminate_leading": doc.result(
            obs.leading_order_discrimination(epsilon, r), DIMENSIONLESS
        ),
        "regime_parameter": doc.result(regime, DIMENSIONLESS),
        "regime": doc.result(
            "valid" if protocol.regime_ok(epsilon, r) else "approximation invalid",
            "flag",
        ),
    }
    return doc.build_document("exact", {"epsilon": epsilon, "r": r}, results)


def simulate_document(args, params, echo, seed: int) -> tuple[dict, dict]:
    if params is not None:
        epsilon = params.epsilon
        r = par.kick_ratio(params)
        readout = obs.ReadoutModel(T=params.T, m2=params.m2)
        momentum_unit = par.momentum_width(params)
    else:
        if args.eps is None or args.r is None:
            raise UsageError("simulate needs --preset/--params or both --eps and --r")
        epsilon, r = args.eps, args.r
        readout = momentum_unit = None
    if not 0.0 < epsilon < 1.0:
        raise PhysicsError(f"epsilon must be in (0, 1), got {epsilon}")
    if r < 0.0:
        raise PhysicsError(f"r must be >= 0, got {r}")

    config = mc.RunConfig(n_trials=args.trials, seed=seed, mode=args.mode,
                          model=args.model)
    if args.model == "classical":
        if args.mode != "full":
            raise UsageError("the classical baseline has no conditioned mode")
        summary = mc.run_classical(
            config, epsilon, r,
            conditioning=lambda arm: args.accept_r if arm == "R" else args.accept_l,
            readout=readout, momentum_unit=momentum_unit,
            csv_path=args.samples,
        )
    else:
        summary = mc.run_quantum(
            config, epsilon, r,
            readout=readout, momentum_unit=momentum_unit,
            csv_path=args.samples,
        )

    results = {
        "n_trials": doc.result(summary.n_trials, "count"),
        "n_postselected": doc.result(summary.n_postselected, "count"),
        "empirical_p_success": doc.result(summary.empirical_p_success, DIMENSIONLESS),
        "postselected_mean": doc.result(summary.postselected_mean, MOMENTUM_UNITS),
        "standard_error": doc.result(summary.standard_error, MOMENTUM_UNITS),
        "z_against_null": doc.result(summary.z_against_null, DIMENSIONLESS),
    }
    inputs = dict(echo)
    inputs.update({
        "model": args.model,
        "mode": args.mode,
        "trials": args.trials,
        "seed": seed,
        "epsilon": epsilon,
        "r": r,
        "accept_l": args.accept_l,
        "accept_r": args.accept_r,
    })
    return doc.build_document("simulate", inputs, results), {"summary": summary}


SWEEP_COLUMNS = (
    ("delta_p", "kg*m/s"),
    ("big_delta_p", "kg*m/s"),
    ("sigma", "m"),
    ("r", DIMENSIONLESS),
    ("epsilon_required", DIMENSIONLESS),
    ("p_success", DIMENSIONLESS),
    ("p_discriminate", DIMENSIONLESS),
    ("p_discriminate_exact", DIMENSIONLESS),
    ("n_runs", "count"),
    ("n_runs_exact", "count"),
    ("displacement_T", "m"),
    ("spread_T", "m"),
    ("probe_radius", "m"),
)


def sweep_rows(params: par.ExperimentParams, name: str, start: float, stop: float,
               steps: int, scale: str):
    if name not in PARAM_UNITS:
        raise UsageError(
            f"cannot sweep {name!r}; choose one of {', '.join(PARAM_UNITS)}"
        )
    if steps < 2:
        raise UsageError("--steps must be >= 2")
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise UsageError("log sweeps need positive endpoints")
        values = np.geomspace(start, stop, steps)
    else:
        values = np.linspace(start, stop, steps)
    rows = []
    for v in values:
        point = params.replace(**{name: float(v)})
        try:
            q = par.derive(point)
        except ValueError as exc:
            raise PhysicsError(f"sweep point {name}={v:g} is not computable: {exc}")
        violations = len(par.validate(point))
        rows.append(
            [float(v)]
            + [getattr(q, col) for col, _ in SWEEP_COLUMNS]
            + [violations]
        )
    header = (
        [f"{name}[{PARAM_UNITS[name]}]"]
        + [f"{col}[{unit}]" for col, unit in SWEEP_COLUMNS]
        + ["violations[count]"]
    )
    return header, rows


def sweep_document(echo: dict, name: str, header, rows) -> dict:
    columns = {}
    for j, head in enumerate(header):
        col_name, unit = head.rsplit("[", 1)
        columns[col_name] = doc.result([row[j] for row in rows], unit.rstrip("]"))
    inputs = dict(echo)
    inputs["swept_parameter"] = name
    return doc.build_document("sweep", inputs, columns)


def trajectory_table(params: par.ExperimentParams, tau: float, delta_x: float,
                     points: int):
    if points < 2:
        raise UsageError("--points must be >= 2")
    traj = protocol.sg_trajectory(tau, delta_x)
    t = np.linspace(0.0, tau, points)
    s = traj.separation(t)
    d_r = params.d + (delta_x - s) / 2.0
    force = CODATA2018.G * params.m1 * params.m2 / d_r**2
    header = ("t[s]", "separation[m]", "d_R[m]", "force[N]")
    rows = list(zip(t.tolist(), s.tolist(), d_r.tolist(), force.tolist()))
    return traj, header, rows


def trajectory_document(params, echo, tau, delta_x, header, rows, traj) -> dict:
    base = params.replace(tau=tau, delta_x=delta_x)
    impulse = protocol.impulse_time_dependent(base, traj)
    constant = par.delta_p(base)
    results = {
        "impulse_time_dependent": doc.result(impulse, "kg*m/s"),
        "delta_p_constant": doc.result(constant, "kg*m/s"),
        "impulse_ratio": doc.result(impulse / constant, DIMENSIONLESS),
        "flip_times": doc.result(list(traj.flip_times), "s"),
    }
    for j, head in enumerate(header):
        col_name, unit = head.rsplit("[", 1)
        results[f"table_{col_name}"] = doc.result(
            [row[j] for row in rows], unit.rstrip("]")
        )
    inputs = dict(echo)
    inputs.update({"tau": tau, "delta_x": delta_x, "points": len(rows)})
    return doc.build_document("trajectory", inputs, results)


# --------------------------------------------------------------------------
# command handlers
# --------------------------------------------------------------------------


def _cmd_feasibility(args) -> int:
    params, echo = _resolve_params(args)
    violations = par.validate(params)
    if violations:
        for v in violations:
            print(f"validation: {v}", file=sys.stderr)
        return EXIT_PHYSICS
    if args.target_successes < 1:
        raise UsageError("--target-successes must be >= 1")
    _emit_scalar_doc(args, feasibility_document(params, echo, args.target_successes))
    return EXIT_OK


def _cmd_exact(args) -> int:
    _emit_scalar_doc(args, exact_document(args.eps, args.r))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    params, echo = _resolve_params(args, required=False)
    if params is not None:
        violations = par.validate(params)
        if violations:
            for v in violations:
                print(f"validation: {v}", file=sys.stderr)
            return EXIT_PHYSICS
    seed = _resolve_seed(args)
    document, _ = simulate_document(args, params, echo, seed)
    _emit_scalar_doc(args, document)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    params, echo = _resolve_params(args)
    header, rows = sweep_rows(params, args.param, args.start, args.stop,
                              args.steps, args.scale)
    if args.format == "csv":
        _emit(args, doc.render_table_csv(header, rows))
    else:
        _emit(args, doc.render_json(sweep_document(echo, args.param, header, rows)))
    return EXIT_OK


def _cmd_trajectory(args) -> int:
    params, echo = _resolve_params(args)
    tau = args.tau if args.tau is not None else params.tau
    delta_x = args.delta_x if args.delta_x is not None else params.delta_x
    if tau <= 0 or delta_x <= 0:
        raise UsageError("tau and delta_x must be positive")
    traj, header, rows = trajectory_table(params, tau, delta_x, args.points)
    if args.format == "csv":
        _emit(args, doc.render_table_csv(header, rows))
    else:
        _emit(args, doc.render_json(
            trajectory_document(params, echo, tau, delta_x, header, rows, traj)
        ))
    return EXIT_OK


def _cmd_report(args) -> int:
    params, echo = _resolve_params(args)
    violations = par.validate(params)
    if violations:
        for v in violations:
            print(f"validation: {v}", file=sys.stderr)
        return EXIT_PHYSICS
    seed = _resolve_seed(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    epsilon = params.epsilon
    r = par.kick_ratio(params)
    files = []

    def save(name: str, text: str):
        (out_dir / name).write_text(text, encoding="utf-8")
        files.append(name)

    save("feasibility.json", doc.render_json(feasibility_document(params, echo)))
    save("exact.json", doc.render_json(exact_document(epsilon, r)))

    plots.save_momentum_density_figure(epsilon, r, out_dir / "densities.png")
    files.append("densities.png")

    header, rows = sweep_rows(params, "eta", 1e-3, 1.0, 25, "log")
    save("sweep_eta.csv", doc.render_table_csv(header, rows))
    etas = [row[0] for row in rows]
    cols = {name: [] for name in ("epsilon_required", "p_success", "displacement_T")}
    for row in rows:
        for j, (col, _) in enumerate(SWEEP_COLUMNS, start=1):
            if col in cols:
                cols[col].append(row[j])
    plots.save_sweep_figure(etas, cols, "squeezing eta", out_dir / "sweep_eta.png")
    files.append("sweep_eta.png")

    traj, theader, trows = trajectory_table(params, params.tau, params.delta_x, 201)
    save("trajectory.csv", doc.render_table_csv(theader, trows))
    save("trajectory.json", doc.render_json(
        trajectory_document(params, echo, params.tau, params.delta_x,
                            theader, trows, traj)
    ))
    t_col = [row[0] for row in trows]
    s_col = [row[1] for row in trows]
    d_col = [row[2] for row in trows]
    plots.save_trajectory_figure(t_col, s_col, d_col, out_dir / "trajectory.png")
    files.append("trajectory.png")

    sim_args = argparse.Namespace(
        model="quantum", mode="conditioned", trials=args.trials,
        eps=None, r=None, accept_l=1.0, accept_r=1.0,
        samples=str(out_dir / "samples.csv"),
    )
    sim_doc, extra = simulate_document(sim_args, params, echo, seed)
    save("simulate.json", doc.render_json(sim_doc))
    files.append("samples.csv")
    samples = np.loadtxt(out_dir / "samples.csv", delimiter=",", skiprows=1,
                         usecols=2)
    plots.save_histogram_figure(samples, epsilon, r, out_dir / "histogram.png")
    files.append("histogram.png")

    index = doc.build_document(
        "report",
        {**echo, "seed": seed, "trials": args.trials, "out_dir": str(out_dir)},
        {"files": doc.result(sorted(files), "filename")},
    )
    save("index.json", doc.render_json(index))
    _emit(args, doc.render_json(index))
    return EXIT_OK


_HANDLERS = {
    "feasibility": _cmd_feasibility,
    "exact": _cmd_exact,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "trajectory": _cmd_trajectory,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhysicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (protocol.ZeroSuccessError, protocol.OrthogonalStatesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
