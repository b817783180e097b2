"""Synthetic UAV swarm trajectory dataset: generation, validation, and I/O.

Each UAV flies a straight XY line from a ground start to a ground
destination with a smooth sin^2 altitude bump, sampled at 201 waypoints.
Timestamps assume constant cruise speed along the 3-D polyline, with all
UAVs taking off at t = 0.  Positions are in meters, timestamps in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple
import csv
import json
import math

import numpy as np

FORMAT_VERSION = "1"
N_WAYPOINTS = 201


class Waypoint(NamedTuple):
    x: float
    y: float
    z: float
    t: float


@dataclass(frozen=True)
class GenConfig:
    seed: int
    n_uavs: int = 500
    init_range_xy: tuple[float, float] = (10.0, 50.0)
    dest_range_xy: tuple[float, float] = (200.0, 300.0)
    altitude_range: tuple[float, float] = (30.0, 40.0)
    cruise_speed: float = 5.0

    def __post_init__(self):
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.n_uavs < 1:
            raise ValueError("n_uavs must be >= 1")
        for name in ("init_range_xy", "dest_range_xy", "altitude_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"{name} must be a finite well-ordered interval")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if not (math.isfinite(self.cruise_speed) and self.cruise_speed > 0):
            raise ValueError("cruise_speed must be > 0")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_uavs": self.n_uavs,
            "init_range_xy": list(self.init_range_xy),
            "dest_range_xy": list(self.dest_range_xy),
            "altitude_range": list(self.altitude_range),
            "cruise_speed": self.cruise_speed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GenConfig":
        return cls(
            seed=int(obj["seed"]),
            n_uavs=int(obj.get("n_uavs", 500)),
            init_range_xy=tuple(obj.get("init_range_xy", (10.0, 50.0))),
            dest_range_xy=tuple(obj.get("dest_range_xy", (200.0, 300.0))),
            altitude_range=tuple(obj.get("altitude_range", (30.0, 40.0))),
            cruise_speed=float(obj.get("cruise_speed", 5.0)),
        )


@dataclass
class Trajectory:
    uav_id: int
    xyz: np.ndarray  # (n_waypoints, 3)
    t: np.ndarray  # (n_waypoints,)

    @property
    def n_waypoints(self) -> int:
        return self.xyz.shape[0]

    def waypoint(self, k: int) -> Waypoint:
        return Waypoint(*(float(v) for v in self.xyz[k]), float(self.t[k]))

    @property
    def waypoints(self) -> list[Waypoint]:
        return [self.waypoint(k) for k in range(self.n_waypoints)]


@dataclass
class SwarmDataset:
    trajectories: list[Trajectory]
    gen_config: GenConfig | None = None
    format_version: str = FORMAT_VERSION

    @property
    def n_uavs(self) -> int:
        return len(self.trajectories)


@dataclass(frozen=True)
class Violation:
    uav_id: int | None
    field: str
    message: str


def _generate_one(config: GenConfig, uav_id: int) -> Trajectory:
    # Independent substream per UAV so generation can shard by id.
    rng = np.random.default_rng([config.seed, uav_id])
    x0 = rng.uniform(*config.init_range_xy)
    y0 = rng.uniform(*config.init_range_xy)
    xf = rng.uniform(*config.dest_range_xy)
    yf = rng.uniform(*config.dest_range_xy)
    h = rng.uniform(*config.altitude_range)

    s = np.linspace(0.0, 1.0, N_WAYPOINTS)
    xyz = np.empty((N_WAYPOINTS, 3))
    xyz[:, 0] = x0 + s * (xf - x0)
    xyz[:, 1] = y0 + s * (yf - y0)
    z = h * np.sin(np.pi * s) ** 2
    z[-1] = 0.0  # sin(pi) rounds to ~1e-16, pin the landing point exactly
    xyz[:, 2] = z

    seg = np.diff(xyz, axis=0)
    path_length = float(np.sqrt((seg * seg).sum(axis=1)).sum())
    dt = path_length / (N_WAYPOINTS - 1) / config.cruise_speed
    t = np.arange(N_WAYPOINTS) * dt
    return Trajectory(uav_id=uav_id, xyz=xyz, t=t)


def generate(config: GenConfig) -> SwarmDataset:
    """Deterministically generate the swarm dataset for a config."""
    trajectories = [_generate_one(config, uid) for uid in range(config.n_uavs)]
    return SwarmDataset(trajectories=trajectories, gen_config=config)


def validate(dataset: SwarmDataset) -> list[Violation]:
    """Check every trajectory invariant and, when known, the generation ranges."""
    violations: list[Violation] = []
    ids = [traj.uav_id for traj in dataset.trajectories]
    if sorted(ids) != list(range(len(ids))):
        violations.append(Violation(None, "uav_id", "ids must be unique and contiguous from 0"))

    cfg = dataset.gen_config
    for traj in dataset.trajectories:
        uid = traj.uav_id
        if traj.n_waypoints != N_WAYPOINTS:
            violations.append(
                Violation(uid, "waypoints", f"expected {N_WAYPOINTS} waypoints, got {traj.n_waypoints}")
            )
            continue
        if not (np.isfinite(traj.xyz).all() and np.isfinite(traj.t).all()):
            violations.append(Violation(uid, "waypoints", "non-finite coordinate or timestamp"))
            continue
        if not (np.diff(traj.t) > 0).all():
            violations.append(Violation(uid, "t", "timestamps must be strictly increasing"))
        z = traj.xyz[:, 2]
        if (z < 0).any():
            violations.append(Violation(uid, "z", "altitude must be >= 0"))
        if z[0] != 0.0 or z[-1] != 0.0:
            violations.append(Violation(uid, "z", "first and last waypoint must be at z = 0"))
        if cfg is not None:
            lo, hi = cfg.init_range_xy
            if not (lo <= traj.xyz[0, 0] <= hi and lo <= traj.xyz[0, 1] <= hi):
                violations.append(Violation(uid, "start", f"start XY outside [{lo}, {hi}]"))
            lo, hi = cfg.dest_range_xy
            if not (lo <= traj.xyz[-1, 0] <= hi and lo <= traj.xyz[-1, 1] <= hi):
                violations.append(Violation(uid, "dest", f"destination XY outside [{lo}, {hi}]"))
            lo, hi = cfg.altitude_range
            if not (lo <= z.max() <= hi):
                violations.append(Violation(uid, "altitude", f"peak altitude outside [{lo}, {hi}]"))
    return violations


def dataset_to_dict(dataset: SwarmDataset) -> dict:
    return {
        "format_version": dataset.format_version,
        "gen_config": None if dataset.gen_config is None else dataset.gen_config.to_dict(),
        "trajectories": [
            {
                "uav_id": traj.uav_id,
                "waypoints": [
                    [float(traj.xyz[k, 0]), float(traj.xyz[k, 1]), float(traj.xyz[k, 2]), float(traj.t[k])]
                    for k in range(traj.n_waypoints)
                ],
            }
            for traj in dataset.trajectories
        ],
    }


def dataset_from_dict(obj: dict) -> SwarmDataset:
    cfg = obj.get("gen_config")
    trajectories = []
    for rec in obj["trajectories"]:
        wp = np.asarray(rec["waypoints"], dtype=np.float64)
        trajectories.append(Trajectory(uav_id=int(rec["uav_id"]), xyz=wp[:, :3].copy(), t=wp[:, 3].copy()))
    return SwarmDataset(
        trajectories=trajectories,
        gen_config=None if cfg is None else GenConfig.from_dict(cfg),
        format_version=str(obj.get("format_version", FORMAT_VERSION)),
    )


def save_dataset_json(dataset: SwarmDataset, path) -> None:
    with open(path, "w") as fh:
        json.dump(dataset_to_dict(dataset), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset_json(path) -> SwarmDataset:
    with open(path) as fh:
        return dataset_from_dict(json.load(fh))


def save_dataset_csv(dataset: SwarmDataset, path) -> None:
    """One row per waypoint: uav_id, k, x, y, z, t."""
    seed = None if dataset.gen_config is None else dataset.gen_config.seed
    with open(path, "w", newline="") as fh:
        fh.write(f"# format_version={dataset.format_version}\n")
        fh.write(f"# seed={seed}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["uav_id", "k", "x", "y", "z", "t"])
        for traj in dataset.trajectories:
            for k in range(traj.n_waypoints):
                writer.writerow(
                    [traj.uav_id, k, repr(float(traj.xyz[k, 0])), repr(float(traj.xyz[k, 1])),
                     repr(float(traj.xyz[k, 2])), repr(float(traj.t[k]))]
                )
