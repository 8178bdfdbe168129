"""Experiment runner and output verifier.

run: executes self-play for a built-in or file-specified game, one CSV per
(algorithm, seed) plus one aggregate CSV per algorithm and a JSON manifest.
verify: re-reads emitted CSVs and checks every row's duality gap against the
scaled regret sum.  Errors exit nonzero with a one-line JSON record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .applications import (
    StreamParams,
    build_fermat_weber_game,
    build_metric_learning_game,
    load_labeled_csv,
    online_self_play,
    sample_pairs,
    sample_sum_of_norms_instance,
    standardize_features,
    MetricLearningInstance,
)
from .gamefile import descriptor_to_json, load_game
from .games import game_schedule, matching_pennies_game, self_play
from .learners import LearnerConfig
from .simplex import log_rank

__all__ = ["main", "CliError"]

EXPERIMENTS = ("game-file", "matching-pennies", "metric-learning", "fermat-weber", "online-fl")
ALGORITHMS = ("scmwu", "oscmwu", "both")
CSV_HEADER = ("iteration", "duality_gap_avg_iterates", "regret_sum_scaled", "primal_objective")
GAP_TOLERANCE = 1e-9

# Recipe defaults for the built-in synthetic experiments.
FERMAT_WEBER_DIM = 20
FERMAT_WEBER_TARGETS = 50
FERMAT_WEBER_RADIUS = 5.0
METRIC_PAIRS = 400
ONLINE_DEFAULTS = {"dim": 10, "target_dim": 10, "radius": 1.0, "correlation": 0.6, "innovation": 0.12}
ONLINE_HORIZON = 20000
ONLINE_STEP_SIZE = 10.0


class CliError(Exception):
    def __init__(self, kind: str, detail: str) -> None:
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail


@dataclass
class RunConfig:
    experiment: str
    algorithms: tuple[str, ...]
    eta: float | None  # None resolves from the schedule / recipe
    horizon: int | None  # None resolves from the schedule / recipe
    eps: float | None
    seeds: tuple[int, ...]
    record_every: int
    data: str | None
    game: str | None
    out: str


def _format(value: float | None) -> str:
    return "" if value is None else format(float(value), ".17g")


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(part) for part in text.replace(" ", "").split(",") if part != "")
    except ValueError:
        raise CliError("invalid-config", f"seeds must be a comma-separated integer list, got {text!r}")
    if not seeds:
        raise CliError("invalid-config", "at least one seed is required")
    return seeds


def _build_run_config(ns: argparse.Namespace) -> RunConfig:
    if ns.experiment not in EXPERIMENTS:
        raise CliError("invalid-config", f"unknown experiment {ns.experiment!r}")
    if ns.algo not in ALGORITHMS:
        raise CliError("invalid-config", f"unknown algorithm {ns.algo!r}")
    algorithms = ("scmwu", "oscmwu") if ns.algo == "both" else (ns.algo,)

    if ns.eta == "auto":
        eta = None
    else:
        try:
            eta = float(ns.eta)
        except ValueError:
            raise CliError("invalid-config", f"eta must be a float or 'auto', got {ns.eta!r}")
        if not (eta > 0.0 and math.isfinite(eta)):
            raise CliError("invalid-config", f"eta must be positive, got {eta}")

    if ns.T == "auto":
        horizon = None
    else:
        try:
            horizon = int(ns.T)
        except ValueError:
            raise CliError("invalid-config", f"T must be an integer or 'auto', got {ns.T!r}")
        if horizon < 1:
            raise CliError("invalid-config", f"T must be >= 1, got {horizon}")

    eps = ns.eps
    if eps is not None and not (eps > 0.0 and math.isfinite(eps)):
        raise CliError("invalid-config", f"eps must be positive, got {eps}")
    if horizon is None and eps is None and ns.experiment != "online-fl":
        raise CliError("invalid-config", "T=auto needs --eps for this experiment")

    if ns.record_every < 1:
        raise CliError("invalid-config", f"record-every must be >= 1, got {ns.record_every}")

    if ns.experiment == "metric-learning":
        if ns.data is None:
            raise CliError("invalid-config", "metric-learning needs --data <csv>")
        if not os.path.isfile(ns.data):
            raise CliError("missing-file", f"dataset not found: {ns.data}")
    if ns.experiment == "game-file":
        if ns.game is None:
            raise CliError("invalid-config", "game-file needs --game <json>")
        if not os.path.isfile(ns.game):
            raise CliError("missing-file", f"game file not found: {ns.game}")

    return RunConfig(
        experiment=ns.experiment,
        algorithms=algorithms,
        eta=eta,
        horizon=horizon,
        eps=eps,
        seeds=_parse_seeds(ns.seeds),
        record_every=ns.record_every,
        data=ns.data,
        game=ns.game,
        out=ns.out,
    )


def _instance_for_seed(cfg: RunConfig, seed: int, dataset):
    """Game (and optional primal evaluator / instance record) for one seed."""
    if cfg.experiment == "matching-pennies":
        return matching_pennies_game(), None, {}
    if cfg.experiment == "game-file":
        try:
            return load_game(cfg.game), None, {"game_file": cfg.game}
        except (ValueError, json.JSONDecodeError) as exc:
            raise CliError("invalid-game-file", str(exc))
    if cfg.experiment == "metric-learning":
        points, labels = dataset
        rng = np.random.default_rng([seed, 0])
        try:
            similar, dissimilar = sample_pairs(labels, METRIC_PAIRS, METRIC_PAIRS, rng)
            instance = MetricLearningInstance(points, labels, similar, dissimilar)
            game = build_metric_learning_game(instance)
        except ValueError as exc:
            raise CliError("invalid-dataset", str(exc))
        return game, None, {"pairs_similar": METRIC_PAIRS, "pairs_dissimilar": METRIC_PAIRS}
    if cfg.experiment == "fermat-weber":
        rng = np.random.default_rng([seed, 0])
        instance = sample_sum_of_norms_instance(FERMAT_WEBER_DIM, FERMAT_WEBER_TARGETS, FERMAT_WEBER_RADIUS, rng)
        game, evaluator = build_fermat_weber_game(instance)
        return game, evaluator, {
            "dim": FERMAT_WEBER_DIM,
            "targets": FERMAT_WEBER_TARGETS,
            "radius": FERMAT_WEBER_RADIUS,
        }
    raise CliError("invalid-config", f"no instance builder for {cfg.experiment}")


def _static_rows(cfg: RunConfig, game, evaluator, algorithm: str, eta: float, horizon: int):
    cfg_x = LearnerConfig(game.desc_x, eta, optimistic=(algorithm == "oscmwu"), per_block=game.x_per_block)
    cfg_y = LearnerConfig(game.desc_y, eta, optimistic=(algorithm == "oscmwu"), per_block=game.y_per_block)
    trace = self_play(game, cfg_x, cfg_y, horizon, record_every=cfg.record_every)
    rows = []
    for index, round_number in enumerate(trace.rounds):
        gap = trace.gaps[index]
        scaled = (trace.regrets_x[index] + trace.regrets_y[index]) / round_number
        primal = evaluator(trace.averages_x[index]) if evaluator is not None else trace.primal_values[index]
        if not all(math.isfinite(v) for v in (gap, scaled, primal)):
            raise CliError("non-finite-metric", f"round {round_number} of {algorithm} produced a non-finite metric")
        rows.append((round_number, gap, scaled, primal))
    return rows


def _online_rows(cfg: RunConfig, algorithm: str, eta: float, horizon: int, seed: int):
    params = StreamParams(
        dim=ONLINE_DEFAULTS["dim"],
        target_dim=ONLINE_DEFAULTS["target_dim"],
        radius=ONLINE_DEFAULTS["radius"],
        correlation=ONLINE_DEFAULTS["correlation"],
        innovation=ONLINE_DEFAULTS["innovation"],
        horizon=horizon,
        seed=seed,
    )
    from .cones import ConeDescriptor  # local import keeps module load light

    cfg_x = LearnerConfig(ConeDescriptor.spin(params.dim + 1), eta, optimistic=(algorithm == "oscmwu"))
    cfg_y = LearnerConfig(ConeDescriptor.spin(params.target_dim + 1), eta, optimistic=(algorithm == "oscmwu"))
    trace = online_self_play(params, cfg_x, cfg_y, record_every=cfg.record_every)
    rows = []
    for index, round_number in enumerate(trace.rounds):
        scaled = trace.scaled_regret_sums[index]
        if not math.isfinite(scaled):
            raise CliError("non-finite-metric", f"round {round_number} of {algorithm} produced a non-finite metric")
        rows.append((round_number, None, scaled, None))
    return rows, params


def _write_rows(path: str, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for iteration, gap, scaled, primal in rows:
            writer.writerow((str(iteration), _format(gap), _format(scaled), _format(primal)))


def _write_aggregate(path: str, per_seed_rows) -> None:
    """Mean and population standard deviation per recorded iteration across seeds."""
    iteration_lists = [[row[0] for row in rows] for rows in per_seed_rows]
    if any(lst != iteration_lists[0] for lst in iteration_lists[1:]):
        raise CliError("internal-error", "recorded iterations differ across seeds")
    header = (
        "iteration",
        "duality_gap_mean",
        "duality_gap_std",
        "regret_sum_scaled_mean",
        "regret_sum_scaled_std",
        "primal_objective_mean",
        "primal_objective_std",
    )
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for index, iteration in enumerate(iteration_lists[0]):
            cells = [str(iteration)]
            for column in (1, 2, 3):
                values = [rows[index][column] for rows in per_seed_rows]
                if any(v is None for v in values):
                    cells.extend(("", ""))
                else:
                    arr = np.asarray(values, dtype=float)
                    cells.extend((_format(float(arr.mean())), _format(float(arr.std()))))
            writer.writerow(cells)


def _run(ns: argparse.Namespace) -> int:
    cfg = _build_run_config(ns)
    os.makedirs(cfg.out, exist_ok=True)

    dataset = None
    if cfg.experiment == "metric-learning":
        try:
            points, labels = load_labeled_csv(cfg.data)
        except (OSError, ValueError) as exc:
            raise CliError("invalid-dataset", str(exc))
        dataset = (standardize_features(points), labels)

    manifest: dict = {
        "version": __version__,
        "experiment": cfg.experiment,
        "algorithms": list(cfg.algorithms),
        "seeds": list(cfg.seeds),
        "eps": cfg.eps,
        "record_every": cfg.record_every,
        "seed_scheme": (
            "stream generator uses default_rng(seed)"
            if cfg.experiment == "online-fl"
            else "instances use default_rng([seed, 0]); learner dynamics are deterministic"
        ),
        "files": {"runs": [], "aggregates": []},
    }

    if cfg.experiment == "online-fl":
        eta = cfg.eta if cfg.eta is not None else ONLINE_STEP_SIZE
        horizon = cfg.horizon if cfg.horizon is not None else ONLINE_HORIZON
        manifest.update(
            {
                "eta": eta,
                "horizon": horizon,
                "stream": dict(ONLINE_DEFAULTS),
                "lipschitz_x": None,
                "lipschitz_y": None,
                "rank_x": 2,
                "rank_y": 2,
            }
        )
        for algorithm in cfg.algorithms:
            per_seed_rows = []
            for seed in cfg.seeds:
                rows, _params = _online_rows(cfg, algorithm, eta, horizon, seed)
                name = f"{cfg.experiment}_{algorithm}_seed{seed}.csv"
                _write_rows(os.path.join(cfg.out, name), rows)
                manifest["files"]["runs"].append({"algorithm": algorithm, "seed": seed, "csv": name})
                per_seed_rows.append(rows)
            aggregate_name = f"{cfg.experiment}_{algorithm}_aggregate.csv"
            _write_aggregate(os.path.join(cfg.out, aggregate_name), per_seed_rows)
            manifest["files"]["aggregates"].append({"algorithm": algorithm, "csv": aggregate_name})
    else:
        games = {}
        evaluators = {}
        extras = {}
        for seed in cfg.seeds:
            games[seed], evaluators[seed], extras = _instance_for_seed(cfg, seed, dataset)
        first = games[cfg.seeds[0]]
        schedule_eta, schedule_horizon = (None, None)
        if cfg.eta is None or cfg.horizon is None:
            if cfg.eps is not None:
                schedule_eta, schedule_horizon = game_schedule(first, cfg.eps)
            else:
                # eta can resolve without eps; the horizon cannot (validated above).
                schedule_eta, _ = game_schedule(first, 1.0)
        eta = cfg.eta if cfg.eta is not None else schedule_eta
        horizon = cfg.horizon if cfg.horizon is not None else schedule_horizon
        manifest.update(
            {
                "eta": eta,
                "horizon": horizon,
                "lipschitz_x": first.lipschitz_x,
                "lipschitz_y": first.lipschitz_y,
                "lipschitz_estimated": first.lipschitz_estimated,
                "rank_x": first.desc_x.rank,
                "rank_y": first.desc_y.rank,
                "log_rank_x": log_rank(first.desc_x, first.x_per_block),
                "log_rank_y": log_rank(first.desc_y, first.y_per_block),
                "cone_x": descriptor_to_json(first.desc_x),
                "cone_y": descriptor_to_json(first.desc_y),
                "schedule_resolved_from": f"seed {cfg.seeds[0]} instance",
                "instance": extras,
            }
        )
        for algorithm in cfg.algorithms:
            per_seed_rows = []
            for seed in cfg.seeds:
                rows = _static_rows(cfg, games[seed], evaluators[seed], algorithm, eta, horizon)
                name = f"{cfg.experiment}_{algorithm}_seed{seed}.csv"
                _write_rows(os.path.join(cfg.out, name), rows)
                manifest["files"]["runs"].append({"algorithm": algorithm, "seed": seed, "csv": name})
                per_seed_rows.append(rows)
            aggregate_name = f"{cfg.experiment}_{algorithm}_aggregate.csv"
            _write_aggregate(os.path.join(cfg.out, aggregate_name), per_seed_rows)
            manifest["files"]["aggregates"].append({"algorithm": algorithm, "csv": aggregate_name})

    manifest["created_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    manifest_path = os.path.join(cfg.out, f"{cfg.experiment}_manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {len(manifest['files']['runs'])} run file(s) and manifest to {cfg.out}")
    return 0


def _verify(ns: argparse.Namespace) -> int:
    directory = ns.directory
    if not os.path.isdir(directory):
        raise CliError("missing-file", f"not a directory: {directory}")
    names = sorted(n for n in os.listdir(directory) if n.endswith(".csv") and "_seed" in n)
    if not names:
        raise CliError("missing-file", f"no per-seed CSV files found in {directory}")
    violations = []
    total_rows = 0
    for name in names:
        path = os.path.join(directory, name)
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_HEADER:
                violations.append({"file": name, "row": 0, "kind": "bad-header"})
                continue
            for row_number, row in enumerate(reader, start=1):
                if len(row) != len(CSV_HEADER):
                    violations.append({"file": name, "row": row_number, "kind": "bad-shape"})
                    continue
                scaled = float(row[2])
                if not math.isfinite(scaled):
                    violations.append({"file": name, "row": row_number, "kind": "non-finite"})
                    continue
                if row[1] != "":
                    gap = float(row[1])
                    if not math.isfinite(gap):
                        violations.append({"file": name, "row": row_number, "kind": "non-finite"})
                    elif gap < -GAP_TOLERANCE:
                        violations.append({"file": name, "row": row_number, "kind": "negative-gap", "gap": gap})
                    elif gap > scaled + GAP_TOLERANCE:
                        violations.append(
                            {"file": name, "row": row_number, "kind": "gap-exceeds-regret", "gap": gap, "bound": scaled}
                        )
                total_rows += 1
        print(f"checked {name}")
    if violations:
        sys.stderr.write(json.dumps({"error": {"kind": "verification-failed", "detail": violations[:20]}}) + "\n")
        return 1
    print(f"verified {len(names)} file(s), {total_rows} row(s): gap <= scaled regret sum everywhere")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conemwu", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="execute an experiment and write CSV metrics")
    run_parser.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    run_parser.add_argument("--algo", default="both", choices=ALGORITHMS)
    run_parser.add_argument("--eta", default="auto", help="step size, or 'auto' for the schedule value")
    run_parser.add_argument("--T", default="auto", help="round count, or 'auto' to derive it from --eps")
    run_parser.add_argument("--eps", type=float, default=None, help="target accuracy for T=auto")
    run_parser.add_argument("--seeds", default="0", help="comma-separated integer seeds")
    run_parser.add_argument("--record-every", type=int, default=10, dest="record_every")
    run_parser.add_argument("--data", default=None, help="labeled CSV dataset (metric-learning)")
    run_parser.add_argument("--game", default=None, help="JSON game file (game-file)")
    run_parser.add_argument("--out", required=True, help="output directory")

    verify_parser = commands.add_parser("verify", help="re-check emitted CSVs against the gap bound")
    verify_parser.add_argument("directory", help="directory holding per-seed CSV files")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as err:
        if err.code in (0, None):  # --help and friends
            raise
        sys.stderr.write(
            json.dumps({"error": {"kind": "invalid-arguments", "detail": "see usage above"}}) + "\n"
        )
        return 2
    try:
        if ns.command == "run":
            return _run(ns)
        return _verify(ns)
    except CliError as err:
        sys.stderr.write(json.dumps({"error": {"kind": err.kind, "detail": err.detail}}) + "\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
