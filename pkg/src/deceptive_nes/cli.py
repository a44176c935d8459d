"""Batch command-line front-end.

Every command loads a scenario JSON file and writes deterministic artifacts
into an output directory (``summary.json``, and ``trajectory.csv`` /
``sweep.csv`` where applicable).  Exit status: 0 on success, 2 for
validation problems (bad scenario, bad flags), 3 for numerical failures;
failures also leave a machine-readable ``error.json`` in the output
directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import numerics
from .deception import (
    AttainabilityResult,
    in_stability_set,
    perturbed_pseudogradient,
    solve_attainability,
)
from .deceptive_game import (
    build_deceptive_game,
    perceived_desirability,
    verify_deceptive_nash,
)
from .dynamics import MODEL_KINDS, DivergenceError, simulate
from .scenario import Scenario, ScenarioError, load_scenario

COMMANDS = ("nash", "stability", "attain", "simulate", "deceptive-game", "sweep")


class CommandError(ValueError):
    """Bad flag combination or a command unsupported by the scenario."""


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_json(out_dir: Path, name: str, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    (out_dir / name).write_text(text)


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise CommandError(f"--delta-grid expects lo:hi:step, got {spec!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise CommandError(f"--delta-grid has non-numeric parts: {spec!r}")
    if step <= 0.0 or hi < lo:
        raise CommandError("--delta-grid needs step > 0 and hi >= lo")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _single_deceiver_delta(scenario: Scenario, value: float | None) -> np.ndarray:
    n = scenario.topology.n_deceivers
    if value is None:
        return np.zeros(n)
    if n != 1:
        raise CommandError(
            "--delta takes a single value and needs exactly one deceiver; "
            f"this scenario has {n}"
        )
    return np.array([value])


def _attainability(scenario: Scenario) -> AttainabilityResult:
    return solve_attainability(
        scenario.game(),
        scenario.topology,
        gains=scenario.tuning.gain,
    )


def _attain_payload(res: AttainabilityResult, game) -> dict:
    costs = game.costs(res.u_star)
    return {
        "delta_star": res.delta_star,
        "x_star": res.u_star,
        "lambda": [list(row) for row in res.lambda_mat],
        "attainable": bool(res.attainable),
        "in_delta": bool(res.in_stability),
        "residual": res.residual,
        "costs": costs,
        "profits": -costs,
        "message": res.message,
    }


def _cmd_nash(scenario: Scenario, out_dir: Path, args) -> None:
    game = scenario.game()
    x = game.nash_equilibrium()
    costs = game.costs(x)
    _write_json(out_dir, "summary.json", {
        "x_star": x,
        "costs": costs,
        "profits": -costs,
    })


def _cmd_stability(scenario: Scenario, out_dir: Path, args) -> None:
    game = scenario.game()
    topology = scenario.topology
    gains = scenario.tuning.gain
    if topology.n_deceivers == 0:
        raise CommandError("stability analysis needs a deception block")

    def abscissa(delta_vec: np.ndarray) -> tuple[float, bool]:
        pert = perturbed_pseudogradient(game, topology, delta_vec)
        m = -(gains[:, None] * pert.qbar)
        return numerics.spectral_abscissa(m), in_stability_set(pert, gains)

    if args.delta_grid is not None:
        if topology.n_deceivers != 1:
            raise CommandError("--delta-grid needs exactly one deceiver")
        grid = _parse_grid(args.delta_grid)
        with open(out_dir / "sweep.csv", "w", newline="") as fh:
            fh.write("delta,spectral_abscissa,in_delta\n")
            for g in grid:
                try:
                    sa, ok = abscissa(np.array([g]))
                    fh.write(f"{g:.12g},{sa:.12g},{str(ok).lower()}\n")
                except numerics.SingularMatrixError:
                    fh.write(f"{g:.12g},nan,false\n")
        return
    delta = _single_deceiver_delta(scenario, args.delta)
    sa, ok = abscissa(delta)
    _write_json(out_dir, "summary.json", {
        "delta": delta,
        "spectral_abscissa": sa,
        "in_delta": bool(ok),
    })


def _cmd_attain(scenario: Scenario, out_dir: Path, args) -> None:
    if scenario.topology.n_deceivers == 0:
        raise CommandError("attainability analysis needs a deception block")
    game = scenario.game()
    res = _attainability(scenario)
    _write_json(out_dir, "summary.json", _attain_payload(res, game))


def _cmd_simulate(scenario: Scenario, out_dir: Path, args) -> None:
    game = scenario.game()
    sim = scenario.sim
    model = args.model or sim.model
    if model not in MODEL_KINDS:
        raise CommandError(f"unknown model {model!r}")
    tuning = scenario.tuning
    scale = args.freq_scale if args.freq_scale is not None else sim.freq_scale
    if scale <= 0:
        raise CommandError("--freq-scale must be positive")
    if scale != 1.0:
        tuning = tuning.scaled(scale)
    traj = simulate(
        model, game, scenario.topology, tuning,
        initial=scenario.initial_state(game),
        horizon=sim.horizon, stride=sim.stride,
        oversampling=sim.oversampling,
    )
    traj.write_csv(out_dir / "trajectory.csv")
    ss = traj.steady_state()
    _write_json(out_dir, "summary.json", {
        "model": model,
        "time_axis": traj.meta.time_axis,
        "dt": traj.meta.dt,
        "samples": len(traj.times),
        "x_star": ss.x,
        "u_star": ss.u,
        "delta_star": ss.delta,
        "costs": ss.costs,
        "profits": ss.profits,
    })


def _cmd_deceptive_game(scenario: Scenario, out_dir: Path, args) -> None:
    topology = scenario.topology
    if topology.n_deceivers == 0:
        raise CommandError("deceptive-game analysis needs a deception block")
    game = scenario.game()
    if args.delta is not None:
        delta = _single_deceiver_delta(scenario, args.delta)
    else:
        delta = _attainability(scenario).delta_star
    dgame = build_deceptive_game(scenario.params, topology, delta, base=game)
    u_star = numerics.solve_linear(dgame.pert.qbar, -dgame.pert.bbar)
    verdict = verify_deceptive_nash(dgame, u_star)
    attacked = [
        j for j, ks in enumerate(topology.attacker_positions(game.n_players)) if ks
    ]
    reports = []
    for victim in attacked:
        rep = perceived_desirability(scenario.params, topology, delta, victim)
        reports.append({
            "victim": rep.victim + 1,
            "true_aggregate": rep.true_aggregate,
            "perceived_aggregate": rep.perceived_aggregate,
            "perceived_per_deceiver": {
                str(z + 1): v for z, v in sorted(rep.perceived_per_deceiver.items())
            },
            "direction": rep.direction,
        })
    _write_json(out_dir, "summary.json", {
        "delta": delta,
        "sigma": dgame.sigma,
        "inflation_coeff": dgame.inflation_coeff,
        "x_star": u_star,
        "desirability": reports,
        "nash_verdict": {
            "is_ne": bool(verdict.is_ne),
            "first_order_residual": verdict.first_order_residual,
            "second_order_margins": verdict.second_order_margins,
        },
    })


def _cmd_sweep(scenario: Scenario, out_dir: Path, args) -> None:
    topology = scenario.topology
    if topology.n_deceivers != 1:
        raise CommandError("sweep needs exactly one deceiver")
    if args.delta_grid is None:
        raise CommandError("sweep requires --delta-grid lo:hi:step")
    game = scenario.game()
    gains = scenario.tuning.gain
    grid = _parse_grid(args.delta_grid)
    n = game.n_players
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        fh.write("delta," + ",".join(f"J_{i+1}" for i in range(n)) + ",in_delta\n")
        for g in grid:
            dvec = np.array([g])
            try:
                pert = perturbed_pseudogradient(game, topology, dvec)
                h = numerics.solve_linear(pert.qbar, -pert.bbar)
                costs = game.costs(h)
                ok = in_stability_set(pert, gains)
                fh.write(
                    f"{g:.12g}," + ",".join(f"{c:.12g}" for c in costs)
                    + f",{str(ok).lower()}\n"
                )
            except numerics.SingularMatrixError:
                fh.write(f"{g:.12g}," + ",".join(["nan"] * n) + ",false\n")


_HANDLERS = {
    "nash": _cmd_nash,
    "stability": _cmd_stability,
    "attain": _cmd_attain,
    "simulate": _cmd_simulate,
    "deceptive-game": _cmd_deceptive_game,
    "sweep": _cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deceptive-nes",
        description="Oligopoly pricing games under deceptive equilibrium seeking",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "nash": "deception-free Nash prices, costs and profits",
        "stability": "stability-set membership at one delta or over a grid",
        "attain": "solve for deceiver gains that hit the reference costs",
        "simulate": "integrate one dynamical model and record a trajectory",
        "deceptive-game": "construct and verify the victims' effective game",
        "sweep": "tabulate equilibrium costs and stability over a delta grid",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--delta", type=float, default=None,
                       help="deceiver gain (single-deceiver scenarios)")
        p.add_argument("--delta-grid", default=None, metavar="LO:HI:STEP",
                       help="inclusive gain grid")
        if name == "simulate":
            p.add_argument("--model", choices=MODEL_KINDS, default=None,
                           help="override the scenario's model kind")
            p.add_argument("--freq-scale", type=float, default=None,
                           help="override the scenario's frequency scale")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def fail(kind: str, exc: Exception, code: int) -> int:
        _write_json(out_dir, "error.json", {
            "kind": kind,
            "error": type(exc).__name__,
            "message": str(exc),
        })
        print(f"deceptive-nes: {exc}", file=sys.stderr)
        return code

    try:
        scenario = load_scenario(args.scenario)
    except FileNotFoundError as exc:
        return fail("validation", exc, 2)
    except ScenarioError as exc:
        return fail("validation", exc, 2)

    try:
        _HANDLERS[args.command](scenario, out_dir, args)
    except CommandError as exc:
        return fail("validation", exc, 2)
    except (
        numerics.SingularMatrixError,
        numerics.ConvergenceError,
        DivergenceError,
    ) as exc:
        return fail("numerical", exc, 3)
    except ValueError as exc:
        return fail("validation", exc, 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
