"""Trajectory recording and on-disk databases.

A trajectory is the unit of demonstration data: per-frame observation
images paired with the commanded action, wrist angle, and pose. Databases
group whole trajectories and carry a domain tag (source/target/synthetic).

Archive layout (schema version 1):

    db_dir/
      index.json                  name, domain_tag, trajectory dir names
      t0000/
        manifest.json             scene_id, length, source_tag, dt, extras
        records.jsonl             one line per step: action, theta, pose, counts
        frame_000000.png          lossless 8-bit frames, zero-padded index
        ...

Images round-trip byte-identically (PNG is lossless); actions and poses
are stored as full-precision floats in the JSONL records.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .envsim.simulator import DT, ActionVector, Observation, SimState

SCHEMA_VERSION = 1

SOURCE_TAGS = ("human-teleop", "oracle", "synthetic", "policy")
DOMAIN_TAGS = ("source", "target", "synthetic")


class RecordingError(ValueError):
    """Raised when an episode stream cannot form a valid trajectory."""


class DatabaseError(ValueError):
    """Raised on malformed archives or failed database construction."""


@dataclass
class Trajectory:
    scene_id: str
    images: np.ndarray      # (T, H, W, 3) uint8
    actions: np.ndarray     # (T, 4) float64, commanded [v_x, v_y, v_z, theta]
    thetas: np.ndarray      # (T,) float64, actual wrist angle at frame time
    poses: np.ndarray       # (T, 3) float64
    source_tag: str
    dt: float = DT
    counts: np.ndarray | None = None  # (T, 3) [in_source, in_target, spilled]
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        T = self.images.shape[0]
        if T < 2:
            raise RecordingError(f"trajectory must have at least 2 steps, got {T}")
        if self.images.ndim != 4 or self.images.shape[3] != 3:
            raise RecordingError(f"bad image stack shape {self.images.shape}")
        if self.images.dtype != np.uint8:
            raise RecordingError(f"images must be uint8, got {self.images.dtype}")
        if self.actions.shape != (T, 4):
            raise RecordingError(f"actions shape {self.actions.shape} != ({T}, 4)")
        if self.thetas.shape != (T,) or self.poses.shape != (T, 3):
            raise RecordingError("theta/pose logs misaligned with frames")
        if self.source_tag not in SOURCE_TAGS:
            raise RecordingError(f"unknown source_tag {self.source_tag!r}")
        if not np.all(np.isfinite(self.actions)):
            raise RecordingError("non-finite action in trajectory")

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def image_hw(self) -> tuple[int, int]:
        return (int(self.images.shape[1]), int(self.images.shape[2]))

    def steps(self):
        """Iterate (Observation, ActionVector, theta, pose) tuples."""
        for t in range(len(self)):
            yield (
                Observation(image=self.images[t], frame_index=t),
                ActionVector.from_array(self.actions[t]),
                float(self.thetas[t]),
                tuple(self.poses[t]),
            )


@dataclass
class Database:
    name: str
    domain_tag: str
    trajectories: list[Trajectory]

    def __post_init__(self):
        if self.domain_tag not in DOMAIN_TAGS:
            raise DatabaseError(f"unknown domain_tag {self.domain_tag!r}")

    def __len__(self) -> int:
        return len(self.trajectories)

    def num_frames(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def scene_ids(self) -> list[str]:
        return sorted({t.scene_id for t in self.trajectories})


# -- recording ----------------------------------------------------------


def record(stream, scene_id: str, source_tag: str, dt: float = DT,
           extra: dict | None = None) -> Trajectory:
    """Assemble a trajectory from an episode stream.

    The stream yields (Observation, ActionVector, SimState) tuples, one per
    simulated frame, observation first (the action is the one commanded at
    that frame). Frame indices must be contiguous and image dims constant.
    """
    images, actions, thetas, poses, counts = [], [], [], [], []
    expected_t = None
    shape = None
    for obs, action, state in stream:
        if not isinstance(obs, Observation):
            raise RecordingError(f"stream yielded {type(obs).__name__}, expected Observation")
        if expected_t is not None and obs.frame_index != expected_t:
            raise RecordingError(
                f"frame gap: expected index {expected_t}, got {obs.frame_index}")
        expected_t = obs.frame_index + 1
        if shape is None:
            shape = obs.image.shape
        elif obs.image.shape != shape:
            raise RecordingError(
                f"mixed image sizes in stream: {obs.image.shape} vs {shape}")
        images.append(obs.image)
        actions.append(action.as_array())
        if isinstance(state, SimState):
            thetas.append(state.theta)
            poses.append(state.pose)
            counts.append((state.in_source, state.in_target, state.spilled))
        else:  # (theta, pose) fallback for non-simulated streams
            theta, pose = state
            thetas.append(float(theta))
            poses.append(tuple(pose))
            counts.append((0, 0, 0))
    if not images:
        raise RecordingError("empty episode stream")
    return Trajectory(
        scene_id=scene_id,
        images=np.stack(images).astype(np.uint8),
        actions=np.asarray(actions, dtype=np.float64),
        thetas=np.asarray(thetas, dtype=np.float64),
        poses=np.asarray(poses, dtype=np.float64),
        source_tag=source_tag,
        dt=dt,
        counts=np.asarray(counts, dtype=np.int64),
        extra=dict(extra or {}),
    )


# -- archive io ----------------------------------------------------------


def save_trajectory(traj: Trajectory, directory: str | Path) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "scene_id": traj.scene_id,
        "length": len(traj),
        "source_tag": traj.source_tag,
        "dt": traj.dt,
        "image_hw": list(traj.image_hw),
        "extra": traj.extra,
    }
    with open(d / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
    with open(d / "records.jsonl", "w") as f:
        for t in range(len(traj)):
            rec = {
                "t": t,
                "action": traj.actions[t].tolist(),
                "theta": float(traj.thetas[t]),
                "pose": traj.poses[t].tolist(),
            }
            if traj.counts is not None:
                rec["counts"] = traj.counts[t].tolist()
            f.write(json.dumps(rec) + "\n")
    for t in range(len(traj)):
        Image.fromarray(traj.images[t]).save(d / f"frame_{t:06d}.png")
    return d


def load_trajectory(directory: str | Path) -> Trajectory:
    d = Path(directory)
    try:
        with open(d / "manifest.json") as f:
            manifest = json.load(f)
    except FileNotFoundError as e:
        raise DatabaseError(f"not a trajectory dir (no manifest): {d}") from e
    T = int(manifest["length"])
    images = np.stack([
        np.asarray(Image.open(d / f"frame_{t:06d}.png"), dtype=np.uint8)
        for t in range(T)
    ])
    actions = np.empty((T, 4), dtype=np.float64)
    thetas = np.empty(T, dtype=np.float64)
    poses = np.empty((T, 3), dtype=np.float64)
    counts = np.zeros((T, 3), dtype=np.int64)
    have_counts = False
    with open(d / "records.jsonl") as f:
        for line in f:
            rec = json.loads(line)
            t = rec["t"]
            actions[t] = rec["action"]
            thetas[t] = rec["theta"]
            poses[t] = rec["pose"]
            if "counts" in rec:
                counts[t] = rec["counts"]
                have_counts = True
    return Trajectory(
        scene_id=manifest["scene_id"],
        images=images,
        actions=actions,
        thetas=thetas,
        poses=poses,
        source_tag=manifest["source_tag"],
        dt=float(manifest.get("dt", DT)),
        counts=counts if have_counts else None,
        extra=dict(manifest.get("extra", {})),
    )


def save_database(db: Database, directory: str | Path) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for i, traj in enumerate(db.trajectories):
        name = f"t{i:04d}"
        save_trajectory(traj, d / name)
        names.append(name)
    index = {
        "schema_version": SCHEMA_VERSION,
        "name": db.name,
        "domain_tag": db.domain_tag,
        "trajectories": names,
    }
    with open(d / "index.json", "w") as f:
        json.dump(index, f, indent=1, sort_keys=True)
    return d


def load_database(directory: str | Path) -> Database:
    d = Path(directory)
    try:
        with open(d / "index.json") as f:
            index = json.load(f)
    except FileNotFoundError as e:
        raise DatabaseError(f"not a database dir (no index.json): {d}") from e
    trajs = [load_trajectory(d / name) for name in index["trajectories"]]
    return Database(name=index["name"], domain_tag=index["domain_tag"],
                    trajectories=trajs)


# -- database construction ------------------------------------------------


def build_training_db(scenes, trials_per_scene: int, base_seed: int = 1000,
                      name: str = "dt", domain_tag: str = "source",
                      retry_budget: int = 4, noise_amplitude: float = 1.0,
                      progress=None) -> Database:
    """Run the scripted demonstrator trials_per_scene times per scene.

    Every kept trajectory is a successful episode; scenes whose retries are
    exhausted abort the build with an error naming the scene.
    """
    from .envsim.oracle import OracleFailure, demo_oracle

    if trials_per_scene < 1:
        raise DatabaseError("trials_per_scene must be >= 1")
    scenes = list(scenes)
    if not scenes:
        raise DatabaseError("no scenes given")
    trajs = []
    for scene in scenes:
        for k in range(trials_per_scene):
            traj = None
            for attempt in range(retry_budget):
                seed = base_seed + 101 * k + 7919 * attempt
                try:
                    traj = demo_oracle(scene, seed, noise_amplitude=noise_amplitude)
                    break
                except OracleFailure:
                    continue
            if traj is None:
                raise DatabaseError(
                    f"demonstrator failed on scene {scene.scene_id} "
                    f"(trial {k}) after {retry_budget} attempts")
            trajs.append(traj)
            if progress is not None:
                progress(scene.scene_id, k)
    return Database(name=name, domain_tag=domain_tag, trajectories=trajs)


def subsample_db(db: Database, fraction: float, seed: int) -> Database:
    """Keep a whole-trajectory random subset; deterministic per seed."""
    if not (0 < fraction <= 1):
        raise DatabaseError(f"fraction must be in (0, 1], got {fraction}")
    n = len(db.trajectories)
    count = max(1, int(round(fraction * n)))
    if count == n:
        return Database(name=db.name, domain_tag=db.domain_tag,
                        trajectories=list(db.trajectories))
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(n, size=count, replace=False))
    if count < n:
        warn_small = count < 2
        if warn_small:
            warnings.warn("subsampled database has a single trajectory")
    return Database(
        name=f"{db.name}_{int(round(fraction * 100))}pct",
        domain_tag=db.domain_tag,
        trajectories=[db.trajectories[i] for i in keep],
    )
