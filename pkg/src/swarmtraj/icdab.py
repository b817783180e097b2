"""Integrated collision detection, avoidance, and batching for UAV swarms.

Detection: two UAVs collide when their positions at some waypoint pair are
closer than twice the collision-sphere radius while their timestamps differ
by at most the time threshold.  Avoidance: a triangular altitude bump
(rising to 2R + safe_distance) is added around the collision waypoint of
one UAV, capped per UAV by a manipulation limit with the overflow moved to
a batching list.  Batching: UAVs never on the list launch as batch 0;
listed UAVs are greedily grouped into pairwise collision-free batches.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
import math

import numpy as np

from .swarm import SwarmDataset, Trajectory

REPORT_FORMAT_VERSION = "1"


@dataclass(frozen=True)
class IcdabConfig:
    radius_r: float = 0.5
    safe_distance: float = 0.5
    time_threshold: float = 1.0
    manipulation_limit: int = 10
    padding_halfwidth: int = 10

    def __post_init__(self):
        if not (math.isfinite(self.radius_r) and self.radius_r > 0):
            raise ValueError("radius_r must be > 0")
        if not (math.isfinite(self.safe_distance) and self.safe_distance >= 0):
            raise ValueError("safe_distance must be >= 0")
        if not (math.isfinite(self.time_threshold) and self.time_threshold > 0):
            raise ValueError("time_threshold must be > 0")
        if self.manipulation_limit < 1:
            raise ValueError("manipulation_limit must be >= 1")
        if self.padding_halfwidth < 1:
            raise ValueError("padding_halfwidth must be >= 1")

    def to_dict(self) -> dict:
        return {
            "radius_r": self.radius_r,
            "safe_distance": self.safe_distance,
            "time_threshold": self.time_threshold,
            "manipulation_limit": self.manipulation_limit,
            "padding_halfwidth": self.padding_halfwidth,
        }


@dataclass(frozen=True)
class CollisionEvent:
    uav_a: int
    uav_b: int
    waypoint_index_a: int
    waypoint_index_b: int
    distance: float
    time_gap: float

    def to_dict(self) -> dict:
        return {
            "uav_a": self.uav_a,
            "uav_b": self.uav_b,
            "waypoint_index_a": self.waypoint_index_a,
            "waypoint_index_b": self.waypoint_index_b,
            "distance": self.distance,
            "time_gap": self.time_gap,
        }


def detect_pair(traj_a: Trajectory, traj_b: Trajectory, config: IcdabConfig):
    """Earliest colliding waypoint pair, or None.

    Earliest means lexicographically smallest (index in traj_a, index in
    traj_b).  Only waypoint pairs within the time threshold are examined;
    timestamps are sorted, so the candidate indices per row form a
    contiguous window found by binary search.
    """
    ta, tb = traj_a.t, traj_b.t
    lo = np.searchsorted(tb, ta - config.time_threshold, side="left")
    hi = np.searchsorted(tb, ta + config.time_threshold, side="right")
    counts = hi - lo
    total = int(counts.sum())
    if total == 0:
        return None
    ii = np.repeat(np.arange(ta.size), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    jj = np.repeat(lo, counts) + offsets
    d = traj_a.xyz[ii] - traj_b.xyz[jj]
    dist = np.sqrt(np.einsum("ij,ij->i", d, d))
    hit = dist < 2.0 * config.radius_r
    if not hit.any():
        return None
    k = int(np.argmax(hit))
    i, j = int(ii[k]), int(jj[k])
    gap = float(abs(ta[i] - tb[j]))
    if traj_a.uav_id < traj_b.uav_id:
        return CollisionEvent(traj_a.uav_id, traj_b.uav_id, i, j, float(dist[k]), gap)
    return CollisionEvent(traj_b.uav_id, traj_a.uav_id, j, i, float(dist[k]), gap)


def detect_all(dataset: SwarmDataset, config: IcdabConfig) -> list[CollisionEvent]:
    """First collision per unordered pair, ordered by (uav_a, uav_b)."""
    trajs = sorted(dataset.trajectories, key=lambda t: t.uav_id)
    events = []
    for ai in range(len(trajs)):
        for bi in range(ai + 1, len(trajs)):
            ev = detect_pair(trajs[ai], trajs[bi], config)
            if ev is not None:
                events.append(ev)
    return events


def make_padding(length: int, peak: float) -> np.ndarray:
    """Symmetric triangular profile: 0 up to peak and back, uniform steps."""
    if length < 3 or length % 2 == 0:
        raise ValueError(f"padding length must be odd and >= 3, got {length}")
    if not (math.isfinite(peak) and peak > 0):
        raise ValueError("padding peak must be > 0")
    up = np.linspace(0.0, peak, length // 2 + 1)
    return np.concatenate([up, up[-2::-1]])


def apply_avoidance(traj: Trajectory, collision_index: int, padding) -> Trajectory:
    """Add the padding profile to the Z coordinate around a collision waypoint.

    The window is clamped at the trajectory ends; the triangular ramps are
    then re-normalized so the profile still reaches its peak exactly at
    collision_index.  X, Y, and timestamps are never touched.
    """
    padding = np.asarray(padding, dtype=np.float64)
    if padding.ndim != 1 or padding.size < 3 or padding.size % 2 == 0:
        raise ValueError("padding must be a 1-D odd-length vector of size >= 3")
    n = traj.n_waypoints
    if not 0 <= collision_index < n:
        raise ValueError(f"collision_index {collision_index} outside trajectory of {n} waypoints")
    half = padding.size // 2
    peak = float(padding.max())
    lo = max(0, collision_index - half)
    hi = min(n - 1, collision_index + half)
    left = np.linspace(0.0, peak, collision_index - lo + 1)
    right = np.linspace(peak, 0.0, hi - collision_index + 1)
    profile = np.concatenate([left[:-1], [peak], right[1:]])
    xyz = traj.xyz.copy()
    xyz[lo:hi + 1, 2] += profile
    return Trajectory(uav_id=traj.uav_id, xyz=xyz, t=traj.t.copy())


def avoid_all(dataset: SwarmDataset, config: IcdabConfig):
    """Run capped collision avoidance over the whole swarm.

    Scans all pairs in id order.  On a collision the lower-id UAV is
    manipulated while its manipulation count is under the limit, then the
    other; when both are capped the pair goes onto the batching list (as
    separate entries) and is left alone.  After every manipulation the
    manipulated UAV is re-checked against all others before the scan
    resumes.  Returns (modified dataset, manipulation counts, batching
    list, residual collisions).
    """
    trajs = {t.uav_id: t for t in dataset.trajectories}
    order = sorted(trajs)
    counts = {uid: 0 for uid in order}
    batching: list[int] = []
    on_list: set[int] = set()
    # Trajectory versions let clean re-checks of unchanged pairs be skipped.
    version = {uid: 0 for uid in order}
    checked: dict[tuple[int, int], tuple[int, int]] = {}
    padding = make_padding(2 * config.padding_halfwidth + 1,
                           2.0 * config.radius_r + config.safe_distance)

    pending = deque((a, b) for ai, a in enumerate(order) for b in order[ai + 1:])
    while pending:
        a, b = pending.popleft()
        if checked.get((a, b)) == (version[a], version[b]):
            continue
        ev = detect_pair(trajs[a], trajs[b], config)
        if ev is None:
            checked[(a, b)] = (version[a], version[b])
            continue
        if counts[a] < config.manipulation_limit:
            target, idx = a, ev.waypoint_index_a
        elif counts[b] < config.manipulation_limit:
            target, idx = b, ev.waypoint_index_b
        else:
            for uid in (a, b):
                if uid not in on_list:
                    on_list.add(uid)
                    batching.append(uid)
            checked[(a, b)] = (version[a], version[b])
            continue
        trajs[target] = apply_avoidance(trajs[target], idx, padding)
        counts[target] += 1
        version[target] += 1
        recheck = [(min(target, o), max(target, o)) for o in order if o != target]
        pending.extendleft(reversed(recheck))

    modified = SwarmDataset(
        trajectories=[trajs[t.uav_id] for t in dataset.trajectories],
        gen_config=dataset.gen_config,
        format_version=dataset.format_version,
    )
    residual = detect_all(modified, config)
    return modified, counts, batching, residual


def build_batches(dataset: SwarmDataset, batching_list: list[int],
                  config: IcdabConfig) -> list[list[int]]:
    """Greedy collision-free batch formation.

    Batch 0 holds every UAV never placed on the batching list.  Then,
    repeatedly: the first unassigned listed UAV opens a batch and every
    later unassigned listed UAV joins it if it is collision-free against
    all current members.
    """
    trajs = {t.uav_id: t for t in dataset.trajectories}
    missing = [uid for uid in batching_list if uid not in trajs]
    if missing:
        raise ValueError(f"batching list ids not in dataset: {missing}")
    listed = set(batching_list)
    batches = [[uid for uid in sorted(trajs) if uid not in listed]]
    remaining = list(batching_list)
    while remaining:
        current = [remaining[0]]
        rest = []
        for cand in remaining[1:]:
            if all(detect_pair(trajs[cand], trajs[m], config) is None for m in current):
                current.append(cand)
            else:
                rest.append(cand)
        batches.append(current)
        remaining = rest
    return batches


@dataclass
class DeconflictionReport:
    config: IcdabConfig
    initial_collisions: int
    residual_collisions: int
    residual_uavs: int
    tracking: dict[int, int]
    batching_list: list[int]
    batches: list[list[int]]
    verified_collision_free: list[bool]
    seed: int | None
    format_version: str = REPORT_FORMAT_VERSION

    @property
    def n_batches(self) -> int:
        return len(self.batches)

    @property
    def max_batch_size(self) -> int:
        return max(len(b) for b in self.batches)

    @property
    def all_batches_verified(self) -> bool:
        return all(self.verified_collision_free)

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "seed": self.seed,
            "config": self.config.to_dict(),
            "initial_collisions": self.initial_collisions,
            "residual_collisions": self.residual_collisions,
            "residual_uavs": self.residual_uavs,
            "tracking": {str(uid): c for uid, c in sorted(self.tracking.items())},
            "batching_list": self.batching_list,
            "batches": self.batches,
            "verified_collision_free": self.verified_collision_free,
            "n_batches": self.n_batches,
            "max_batch_size": self.max_batch_size,
        }


def run_pipeline(dataset: SwarmDataset, config: IcdabConfig) -> DeconflictionReport:
    """detect_all -> avoid_all -> build_batches, with per-batch verification."""
    initial = detect_all(dataset, config)
    modified, tracking, batching, residual = avoid_all(dataset, config)
    batches = build_batches(modified, batching, config)

    trajs = {t.uav_id: t for t in modified.trajectories}
    verified = []
    for batch in batches:
        ok = True
        for x in range(len(batch)):
            for y in range(x + 1, len(batch)):
                if detect_pair(trajs[batch[x]], trajs[batch[y]], config) is not None:
                    ok = False
                    break
            if not ok:
                break
        verified.append(ok)

    residual_uavs = len({u for ev in residual for u in (ev.uav_a, ev.uav_b)})
    return DeconflictionReport(
        config=config,
        initial_collisions=len(initial),
        residual_collisions=len(residual),
        residual_uavs=residual_uavs,
        tracking=tracking,
        batching_list=batching,
        batches=batches,
        verified_collision_free=verified,
        seed=dataset.gen_config.seed if dataset.gen_config is not None else None,
    )


def sweep_safe_distance(dataset: SwarmDataset, config: IcdabConfig,
                        radii: list[float]) -> list[dict]:
    """Run the full pipeline once per safe_distance value."""
    if not radii:
        raise ValueError("radius list must be non-empty")
    rows = []
    for r in radii:
        report = run_pipeline(dataset, replace(config, safe_distance=float(r)))
        rows.append({
            "safe_radius": float(r),
            "residual_collisions": report.residual_collisions,
            "n_batches": report.n_batches,
            "max_batch_size": report.max_batch_size,
        })
    return rows
