"""Command-line entry point.

Subcommands: generate, train, eval, deconflict, sweep.  Each command is a
pure function of (config file, flags, seed): rerunning with identical
inputs produces byte-identical output files.  Flags override config-file
values.  Exit codes: 0 success, 1 usage/validation, 2 I/O, 3 numeric.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import icdab, swarm, training
from .activations import ACTIVATION_KINDS, ActivationSpec, spec_from_json
from .network import load_model, model_to_dict, save_model
from .training import NumericError, TrainConfig

DEFAULT_SWEEP_RADII = (0.5, 0.7, 1.9, 2.1, 2.3, 2.5, 2.7, 2.9)


class _CliParser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; route them to exit 1.
    def error(self, message):
        raise ValueError(message)


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValueError("config file must hold a JSON object")
    return obj


def _setting(args, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    return config.get(key, default)


def _require_seed(args, config) -> int:
    seed = _setting(args, config, "seed")
    if seed is None:
        raise ValueError("a seed is required (use --seed or put \"seed\" in the config file)")
    return int(seed)


def cmd_generate(args) -> int:
    config = _load_config(args.config)
    gen = swarm.GenConfig(
        seed=_require_seed(args, config),
        n_uavs=int(_setting(args, config, "n_uavs", 500)),
        init_range_xy=tuple(config.get("init_range_xy", (10.0, 50.0))),
        dest_range_xy=tuple(config.get("dest_range_xy", (200.0, 300.0))),
        altitude_range=tuple(config.get("altitude_range", (30.0, 40.0))),
        cruise_speed=float(config.get("cruise_speed", 5.0)),
    )
    dataset = swarm.generate(gen)
    swarm.save_dataset_json(dataset, args.out)
    if args.csv:
        swarm.save_dataset_csv(dataset, args.csv)
    print(f"generated {gen.n_uavs} trajectories (seed={gen.seed}) -> {args.out}")
    print(f"  start XY in {list(gen.init_range_xy)}, dest XY in {list(gen.dest_range_xy)}, "
          f"peak altitude in {list(gen.altitude_range)}, cruise speed {gen.cruise_speed}")
    return 0


def _requested_activations(args, config) -> list[ActivationSpec]:
    raw = _setting(args, config, "activations")
    if raw is None:
        raw = list(ACTIVATION_KINDS)
    elif isinstance(raw, str):
        raw = [k.strip() for k in raw.split(",") if k.strip()]
    specs = []
    for item in raw:
        specs.append(spec_from_json(item) if isinstance(item, dict) else ActivationSpec(kind=item))
    order = {kind: i for i, kind in enumerate(ACTIVATION_KINDS)}
    specs.sort(key=lambda s: order[s.kind])
    return specs


def _requested_axes(args, config) -> list[str]:
    raw = _setting(args, config, "axes", "x,y,z")
    if isinstance(raw, str):
        raw = [a.strip().lower() for a in raw.split(",") if a.strip()]
    for axis in raw:
        if axis not in training.AXES:
            raise ValueError(f"unknown axis {axis!r}, expected one of {training.AXES}")
    return [a for a in training.AXES if a in raw]


def cmd_train(args) -> int:
    config = _load_config(args.config)
    dataset = swarm.load_dataset_json(args.dataset)
    train_config = TrainConfig(
        seed=_require_seed(args, config),
        max_epochs=int(_setting(args, config, "max_epochs", 1000)),
        lambda_init=float(config.get("lambda_init", 1e-3)),
        lambda_up=float(config.get("lambda_up", 10.0)),
        lambda_down=float(config.get("lambda_down", 0.1)),
        lambda_max=float(config.get("lambda_max", 1e10)),
        val_patience=int(config.get("val_patience", 6)),
        split=tuple(config.get("split", (0.70, 0.15, 0.15))),
        calibrate_activation=bool(config.get("calibrate_activation", False)),
    )
    specs = _requested_activations(args, config)
    axes = _requested_axes(args, config)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for axis in axes:
        for spec in specs:
            try:
                model, report = training.train(dataset, axis, spec, train_config)
            except NumericError as exc:
                raise NumericError(f"activation={spec.kind} axis={axis}: {exc}") from exc
            save_model(model, out_dir / f"model_{spec.kind}_{axis}.json")
            payload = {"format_version": "1", **report.to_dict()}
            _write_json(out_dir / f"report_{spec.kind}_{axis}.json", payload)
            rows.append((spec.kind, axis, report.test_mse, report.test_smape))
            print(f"trained {spec.kind:<20s} axis={axis}  epochs={report.epochs_run:<5d} "
                  f"test MSE={report.test_mse:.3e}  test SMAPE={report.test_smape:.4f}%")

    csv_path = out_dir / "results.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write("# format_version=1\n")
        fh.write(f"# seed={train_config.seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["activation", "axis", "mse", "smape"])
        for kind, axis, mse, smape in rows:
            writer.writerow([kind, axis, repr(mse), repr(smape)])
    print(f"wrote {len(rows)} result rows -> {csv_path}")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    dataset = swarm.load_dataset_json(args.dataset)
    if args.split == "all":
        indices = None
    else:
        split_config = TrainConfig(seed=model.seed, split=model.split)
        train_idx, val_idx, test_idx = training.split_dataset(dataset, split_config)
        indices = {"train": train_idx, "val": val_idx, "test": test_idx}[args.split]
    result = training.evaluate_model(model, dataset, indices)
    payload = {
        "format_version": "1",
        "seed": model.seed,
        "axis": model.axis,
        "activation": model_to_dict(model)["activation"],
        "split": args.split,
        **result.to_dict(),
    }
    if args.out:
        _write_json(args.out, payload)
        print(f"wrote metrics -> {args.out}")
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def _icdab_config(args, config: dict) -> icdab.IcdabConfig:
    return icdab.IcdabConfig(
        radius_r=float(_setting(args, config, "radius_r", 0.5)),
        safe_distance=float(_setting(args, config, "safe_distance", 0.5)),
        time_threshold=float(_setting(args, config, "time_threshold", 1.0)),
        manipulation_limit=int(_setting(args, config, "manipulation_limit", 10)),
        padding_halfwidth=int(_setting(args, config, "padding_halfwidth", 10)),
    )


def cmd_deconflict(args) -> int:
    config = _load_config(args.config)
    dataset = swarm.load_dataset_json(args.dataset)
    report = icdab.run_pipeline(dataset, _icdab_config(args, config))
    _write_json(args.out, report.to_dict())
    print(f"collisions: initial={report.initial_collisions} residual={report.residual_collisions} "
          f"(uavs={report.residual_uavs})")
    print(f"batches: {report.n_batches} (max size {report.max_batch_size}), "
          f"batching list size {len(report.batching_list)}")
    print(f"wrote report -> {args.out}")
    if not report.all_batches_verified:
        print("error: some batches are not collision-free", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    config = _load_config(args.config)
    dataset = swarm.load_dataset_json(args.dataset)
    raw = _setting(args, config, "radii")
    if raw is None:
        radii = list(DEFAULT_SWEEP_RADII)
    elif isinstance(raw, str):
        radii = [float(v) for v in raw.split(",") if v.strip()]
    else:
        radii = [float(v) for v in raw]
    if not radii:
        raise ValueError("radius list must be non-empty")
    base = _icdab_config(args, config)
    rows = icdab.sweep_safe_distance(dataset, base, radii)
    seed = dataset.gen_config.seed if dataset.gen_config is not None else None
    with open(args.out, "w", newline="") as fh:
        fh.write("# format_version=1\n")
        fh.write(f"# seed={seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["safe_radius", "residual_collisions", "n_batches", "max_batch_size"])
        for row in rows:
            writer.writerow([repr(row["safe_radius"]), row["residual_collisions"],
                             row["n_batches"], row["max_batch_size"]])
            print(f"safe_radius={row['safe_radius']:<4g} residual={row['residual_collisions']:<4d} "
                  f"batches={row['n_batches']:<3d} max_batch={row['max_batch_size']}")
    print(f"wrote sweep -> {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="swarmtraj",
                        description="UAV swarm trajectory prediction and deconfliction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic swarm dataset")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-uavs", dest="n_uavs", type=int)
    p.add_argument("--out", default="dataset.json")
    p.add_argument("--csv", help="also export waypoints as CSV")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train per-axis trajectory networks")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--activations", help="comma-separated activation kinds (default: all)")
    p.add_argument("--axes", help="comma-separated axes (default: x,y,z)")
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--out", default="train_out", help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a stored model on a dataset split")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", choices=("train", "val", "test", "all"), default="test")
    p.add_argument("--out", help="write metrics JSON here instead of stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("deconflict", help="run the detection/avoidance/batching pipeline")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--radius", dest="radius_r", type=float)
    p.add_argument("--safe-distance", dest="safe_distance", type=float)
    p.add_argument("--time-threshold", dest="time_threshold", type=float)
    p.add_argument("--manipulation-limit", dest="manipulation_limit", type=int)
    p.add_argument("--padding-halfwidth", dest="padding_halfwidth", type=int)
    p.add_argument("--out", default="deconfliction.json")
    p.set_defaults(func=cmd_deconflict)

    p = sub.add_parser("sweep", help="pipeline outcomes over a safe-distance grid")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--radii", help="comma-separated safe distances")
    p.add_argument("--radius", dest="radius_r", type=float)
    p.add_argument("--time-threshold", dest="time_threshold", type=float)
    p.add_argument("--manipulation-limit", dest="manipulation_limit", type=int)
    p.add_argument("--padding-halfwidth", dest="padding_halfwidth", type=int)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
