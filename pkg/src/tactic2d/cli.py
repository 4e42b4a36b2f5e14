"""Command line interface.

Subcommands: gen-states, gen-data, train, eval, decide, bench. A key=value
config file passed with --config overrides every physics and algorithm
default; exit codes are 0 (success), 1 (usage error), 2 (data or validation
error).
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import extractor, harness, predictor as predictor_mod, world
from .config import Config, DEFAULT_CONFIG, config_defaults_help, load_config

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


class CliDataError(Exception):
    pass


def _load_predictor(path: Optional[str], config: Config):
    if path is None or path == "heuristic":
        return predictor_mod.HeuristicPredictor(config)
    try:
        model = predictor_mod.load_model(path)
    except (OSError, ValueError, KeyError) as exc:
        raise CliDataError(f"cannot load model {path}: {exc}") from exc
    return predictor_mod.MlpPredictor(model, config)


def _cmd_gen_states(args, config: Config) -> int:
    scenario = harness.ScenarioConfig(seed=args.seed, n_states=args.count,
                                      teammate_spread=args.spread,
                                      opponent_spread=args.spread)
    states = harness.generate_states(scenario, config)
    world.save_states_jsonl(states, args.out)
    print(f"wrote {len(states)} states to {args.out}")
    return 0


def _cmd_gen_data(args, config: Config) -> int:
    try:
        states = list(world.load_states_jsonl(args.states, config))
    except (OSError, ValueError, KeyError) as exc:
        raise CliDataError(f"cannot read states {args.states}: {exc}") from exc
    samples = extractor.build_dataset(states, augment_mirror=args.mirror, config=config)
    if not samples:
        raise CliDataError("no valid states to label")
    extractor.write_samples_csv(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def _read_samples(path: str):
    try:
        return extractor.read_samples_csv(path)
    except (OSError, ValueError) as exc:
        raise CliDataError(f"cannot read dataset {path}: {exc}") from exc


def _cmd_train(args, config: Config) -> int:
    samples = _read_samples(args.data)
    try:
        train_set, test_set = extractor.split_dataset(samples, args.split, args.seed)
    except ValueError as exc:
        raise CliDataError(str(exc)) from exc
    model = predictor_mod.init(args.seed)
    train_config = predictor_mod.TrainConfig(
        learning_rate=args.lr, batch_size=args.batch, epochs=args.epochs,
        seed=args.seed, l2=args.l2, standardize=not args.no_standardize,
    )
    trained, history = predictor_mod.train(model, train_set, test_set, train_config)
    for stats in history:
        print(f"epoch {stats.epoch:3d}  loss {stats.train_loss:.4f}  "
              f"test_accuracy {stats.test_accuracy:.4f}")
    predictor_mod.save_model(trained, args.out)
    print(f"saved model to {args.out}")
    return 0


def _cmd_eval(args, config: Config) -> int:
    samples = _read_samples(args.data)
    pred = _load_predictor(args.model, config)
    if not isinstance(pred, predictor_mod.MlpPredictor):
        raise CliDataError("eval requires a trained model file")
    acc = predictor_mod.accuracy(pred.model, samples)
    print(f"top-1 accuracy {acc:.4f} on {len(samples)} samples")
    return 0


def _cmd_decide(args, config: Config) -> int:
    try:
        with open(args.state, "r", encoding="utf-8") as fh:
            state = world.load_state(fh.read(), config)
    except (OSError, ValueError, KeyError) as exc:
        raise CliDataError(f"cannot read state {args.state}: {exc}") from exc
    problems = world.validate(state, config)
    if problems:
        raise CliDataError(f"invalid state: {'; '.join(problems)}")
    if not 1 <= args.unmarker <= 11:
        raise CliDataError(f"unmarker must be 1..11, got {args.unmarker}")
    pred = _load_predictor(args.model, config)

    from .decisioning import NoPossession, SelfOwner, decide_unmark
    from .positioning import evaluate_candidates

    try:
        decision, tree = decide_unmark(state, args.unmarker, pred, config)
    except (NoPossession, SelfOwner) as exc:
        raise CliDataError(f"no unmark decision: {exc}") from exc
    if args.dump_tree:
        with open(args.dump_tree, "w", encoding="utf-8") as fh:
            fh.write(tree.to_json())
    candidates = evaluate_candidates(decision.root_state, decision.passer,
                                     args.unmarker, config)
    chosen = None
    from .positioning import choose_position

    point = choose_position(decision.root_state, decision.passer, args.unmarker, config)
    if point is not None:
        chosen = {"x": point.x, "y": point.y}
    doc = {
        "unmarker": args.unmarker,
        "passer": decision.passer,
        "found_in_tree": decision.found_in_tree,
        "point": chosen,
        "candidates": [
            {
                "x": c.point.x, "y": c.point.y,
                "ring_radius": c.ring_radius, "angle_index": c.angle_index,
                "valid": c.valid, "score": c.score,
            }
            for c in candidates
        ],
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_bench(args, config: Config) -> int:
    versions = [v.strip() for v in args.versions.split(",") if v.strip()]
    if not versions:
        raise CliDataError("no versions given")
    pred = _load_predictor(args.model, config)
    try:
        report = harness.bench(versions, args.episodes, args.seed, pred,
                               config=config, workers=args.workers)
    except ValueError as exc:
        raise CliDataError(str(exc)) from exc
    csv_text = harness.report_to_csv(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    print(harness.report_to_table(report))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="tactic2d",
        description="Tactical decision engine for simulated 2D soccer.",
        epilog="config defaults (override via --config key=value file):\n"
        + config_defaults_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", metavar="FILE", default=None,
                        help="key=value file overriding the defaults below")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-states", help="generate seeded scenario states (.jsonl)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--spread", type=float, default=6.0,
                   help="formation jitter in meters (default: 6.0)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-data", help="label states into a dataset CSV")
    p.add_argument("--states", required=True)
    p.add_argument("--mirror", action="store_true", help="add y-mirrored samples")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train the pass-prediction MLP")
    p.add_argument("--data", required=True)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--no-standardize", action="store_true",
                   help="train on raw features instead of standardized ones")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="top-1 accuracy of a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("decide", help="unmark decision for one state")
    p.add_argument("--model", default=None,
                   help="model file, or 'heuristic' (default) for the model-free backend")
    p.add_argument("--state", required=True, help="single-state JSON file")
    p.add_argument("--unmarker", type=int, required=True)
    p.add_argument("--dump-tree", default=None, metavar="FILE")

    p = sub.add_parser("bench", help="paired strategy benchmark")
    p.add_argument("--versions", default="V1,V2,V3,V4,V5,V6")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", default=None,
                   help="model file, or 'heuristic' (default) for the model-free backend")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, metavar="CSV")

    return parser


_COMMANDS = {
    "gen-states": _cmd_gen_states,
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "decide": _cmd_decide,
    "bench": _cmd_bench,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            config = load_config(args.config)
        except (OSError, ValueError) as exc:
            print(f"tactic2d: bad config: {exc}", file=sys.stderr)
            return USAGE_ERROR
    else:
        config = DEFAULT_CONFIG
    try:
        return _COMMANDS[args.command](args, config)
    except CliDataError as exc:
        print(f"tactic2d: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
