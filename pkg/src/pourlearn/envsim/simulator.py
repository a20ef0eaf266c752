"""Seedable 4-DOF pouring simulator.

The hand-held source container moves with commanded linear velocities
[v_x, v_y, v_z] and tracks a commanded tilt angle (rate-limited by the
mechanical wrist speed). Once the tilt exceeds a fill-dependent onset
angle, granules leave the rim at a rate proportional to the excess tilt
and fall ballistically. A particle crossing the target rim plane inside
the opening (and close enough in depth) is collected; everything else
ends up on the table as spillage. Counts are conserved exactly at every
step.

Axes: x lateral (canvas horizontal), y depth (rendered as scale), z up.
Randomness is counter-based: every step draws from a generator seeded by
(scene, episode seed, step index), so trajectories replay bit-identically
from (scene, seed) alone and states remain plain data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .scene import SceneConfig

# Physical and mechanical constants. dt matches 30 fps capture.
DT = 1.0 / 30.0
GRAVITY = 9.81
V_LIMIT = 0.35          # |linear velocity| ceiling per axis, m/s
OMEGA_LIMIT = 3.0       # wrist mechanical tilt rate, rad/s
THETA_RANGE = (0.0, 1.92)   # wrist mechanical tilt range, rad

WORKSPACE_X = (-0.25, 0.30)
WORKSPACE_Y = (-0.12, 0.12)
WORKSPACE_Z = (0.03, 0.46)

# Source container (fixed tool geometry).
SOURCE_W = 0.055
SOURCE_H = 0.075

# Outflow model: granules leave once tilt exceeds an onset angle that
# grows as the container empties; the rate is proportional to the excess.
ONSET_FULL = 0.45       # onset angle with a full container, rad
ONSET_SPAN = 0.85       # extra onset by the time the container is empty
FLOW_RATE = 520.0       # particles/s per rad of excess tilt, at flow factor 1

# Release and landing scatter (per-particle, seeded per step).
RELEASE_POS_JITTER = 0.004
RELEASE_DEPTH_JITTER = 0.003
RELEASE_VX_JITTER = 0.022
RELEASE_VZ0 = -0.05
TABLE_LEVEL = 0.004

# Depth acceptance when crossing the rim plane: a fraction of the opening
# half-width with a floor so shallow containers are not impossible.
DEPTH_TOL_FACTOR = 0.8
DEPTH_TOL_MIN = 0.030

# Per-episode jitter applied at reset (target placement, start pose).
TARGET_X_JITTER = 0.045
TARGET_Y_JITTER = 0.028
START_JITTER = (0.075, 0.035, 0.045)

SUCCESS_FRACTION = 0.9


class SimulationError(ValueError):
    """Raised on invalid actions or states fed to the simulator."""


@dataclass(frozen=True)
class ActionVector:
    """One control command: linear velocities (m/s) and wrist tilt (rad)."""

    v_x: float
    v_y: float
    v_z: float
    theta: float

    def __post_init__(self) -> None:
        for name in ("v_x", "v_y", "v_z", "theta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise SimulationError(f"non-finite action component {name}={v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.v_x, self.v_y, self.v_z, self.theta], dtype=np.float64)

    @classmethod
    def from_array(cls, a) -> "ActionVector":
        a = np.asarray(a, dtype=np.float64)
        if a.shape != (4,):
            raise SimulationError(f"action must have 4 components, got shape {a.shape}")
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class SimState:
    """Full simulator state; plain data, safe to copy and compare."""

    pose: tuple[float, float, float]   # source container center [x, y, z]
    theta: float                       # actual wrist tilt, rad
    in_source: int
    in_target: int
    spilled: int
    flight_pos: np.ndarray             # (k, 3) particle positions [x, y, z]
    flight_vel: np.ndarray             # (k, 2) particle velocities [vx, vz]
    outflow_carry: float               # fractional particles owed to the stream
    time_step: int
    episode_seed: int
    target_x: float                    # jittered container placement for this episode
    target_y: float

    @property
    def in_flight(self) -> int:
        return int(self.flight_pos.shape[0])

    def total_particles(self) -> int:
        return self.in_source + self.in_target + self.spilled + self.in_flight

    def equals(self, other: "SimState") -> bool:
        return (
            self.pose == other.pose
            and self.theta == other.theta
            and self.in_source == other.in_source
            and self.in_target == other.in_target
            and self.spilled == other.spilled
            and self.outflow_carry == other.outflow_carry
            and self.time_step == other.time_step
            and self.episode_seed == other.episode_seed
            and self.target_x == other.target_x
            and self.target_y == other.target_y
            and self.flight_pos.shape == other.flight_pos.shape
            and bool(np.all(self.flight_pos == other.flight_pos))
            and bool(np.all(self.flight_vel == other.flight_vel))
        )


@dataclass(frozen=True)
class Observation:
    image: np.ndarray  # (H, W, 3) uint8
    frame_index: int


@dataclass(frozen=True)
class EpisodeScore:
    success: bool
    in_target_fraction: float
    spilled_fraction: float
    denominator: int


def onset_angle(in_source: int, granule_count: int) -> float:
    """Tilt at which granules start to leave, given the current fill."""
    fill = in_source / granule_count if granule_count > 0 else 0.0
    return ONSET_FULL + (1.0 - fill) * ONSET_SPAN


def rim_offset(theta: float) -> tuple[float, float]:
    """Pouring-side rim corner of the source cup relative to its center.

    The cup tilts toward +x; local corner (+w/2, +h/2) rotated by theta.
    """
    u, w = SOURCE_W / 2.0, SOURCE_H / 2.0
    return (u * math.cos(theta) + w * math.sin(theta),
            -u * math.sin(theta) + w * math.cos(theta))


def depth_tolerance(scene: SceneConfig) -> float:
    return max(DEPTH_TOL_MIN, DEPTH_TOL_FACTOR * scene.container_opening_width / 2.0)


def score_episode(final: SimState, scene: SceneConfig) -> EpisodeScore:
    """Grade a finished episode.

    The denominator is min(total granules, target capacity): when the source
    holds less than the target fits, success means moving at least 90% of the
    load; when the target is the smaller vessel, it must be filled to at
    least 90% of capacity. Spillage beyond the 10% complement disqualifies.
    """
    denom = min(scene.granule_count, scene.container_capacity)
    frac = final.in_target / denom
    spilled_frac = final.spilled / denom
    success = frac >= SUCCESS_FRACTION and spilled_frac <= (1.0 - SUCCESS_FRACTION)
    return EpisodeScore(success=bool(success), in_target_fraction=float(frac),
                        spilled_fraction=float(spilled_frac), denominator=int(denom))


def _step_rng(scene: SceneConfig, state: SimState) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((scene.seed_key, state.episode_seed & 0xFFFFFFFF, state.time_step))
    )


class PouringSimulator:
    """Single-scene simulator instance. No mutable state is shared between
    instances; all episode state lives in SimState values."""

    def __init__(self, scene: SceneConfig):
        scene.validate()
        self.scene = scene

    # -- lifecycle -----------------------------------------------------

    def reset(self, seed: int) -> SimState:
        rng = np.random.default_rng(
            np.random.SeedSequence((self.scene.seed_key, int(seed) & 0xFFFFFFFF, 0xA5))
        )
        sx, sy, sz = self.scene.start_pose
        jx, jy, jz = START_JITTER
        pose = (
            float(np.clip(sx + rng.uniform(-jx, jx), *WORKSPACE_X)),
            float(np.clip(sy + rng.uniform(-jy, jy), *WORKSPACE_Y)),
            float(np.clip(sz + rng.uniform(-jz, jz), *WORKSPACE_Z)),
        )
        tx = float(np.clip(self.scene.target_x + rng.uniform(-TARGET_X_JITTER, TARGET_X_JITTER),
                           WORKSPACE_X[0] + 0.08, WORKSPACE_X[1] - 0.02))
        ty = float(np.clip(self.scene.target_y + rng.uniform(-TARGET_Y_JITTER, TARGET_Y_JITTER),
                           -0.06, 0.06))
        return SimState(
            pose=pose,
            theta=0.0,
            in_source=self.scene.granule_count,
            in_target=0,
            spilled=0,
            flight_pos=np.zeros((0, 3), dtype=np.float64),
            flight_vel=np.zeros((0, 2), dtype=np.float64),
            outflow_carry=0.0,
            time_step=0,
            episode_seed=int(seed),
            target_x=tx,
            target_y=ty,
        )

    # -- dynamics ------------------------------------------------------

    def step(self, state: SimState, action: ActionVector, dt: float = DT) -> SimState:
        if not (dt > 0):
            raise SimulationError(f"dt must be positive, got {dt}")
        scene = self.scene
        rng = _step_rng(scene, state)

        # Pose integration under mechanical limits.
        vx = float(np.clip(action.v_x, -V_LIMIT, V_LIMIT))
        vy = float(np.clip(action.v_y, -V_LIMIT, V_LIMIT))
        vz = float(np.clip(action.v_z, -V_LIMIT, V_LIMIT))
        x = float(np.clip(state.pose[0] + vx * dt, *WORKSPACE_X))
        y = float(np.clip(state.pose[1] + vy * dt, *WORKSPACE_Y))
        z = float(np.clip(state.pose[2] + vz * dt, *WORKSPACE_Z))

        # Tilt tracks the commanded angle at bounded rate.
        theta_cmd = float(np.clip(action.theta, *THETA_RANGE))
        dtheta = float(np.clip(theta_cmd - state.theta, -OMEGA_LIMIT * dt, OMEGA_LIMIT * dt))
        theta = float(np.clip(state.theta + dtheta, *THETA_RANGE))

        in_target = state.in_target
        spilled = state.spilled
        rim_z = scene.container_height
        half_open = scene.container_opening_width / 2.0
        d_tol = depth_tolerance(scene)

        # Advance in-flight particles, then bin the ones that land.
        pos = state.flight_pos.copy()
        vel = state.flight_vel.copy()
        if pos.shape[0]:
            prev_z = pos[:, 2].copy()
            pos[:, 0] += vel[:, 0] * dt
            pos[:, 2] += vel[:, 1] * dt - 0.5 * GRAVITY * dt * dt
            vel[:, 1] -= GRAVITY * dt

            crossing = (prev_z > rim_z) & (pos[:, 2] <= rim_z)
            over_opening = (np.abs(pos[:, 0] - state.target_x) <= half_open) & (
                np.abs(pos[:, 1] - state.target_y) <= d_tol
            )
            candidates = np.flatnonzero(crossing & over_opening)
            caught = candidates[: max(0, scene.container_capacity - in_target)]
            in_target += caught.size
            overflow = candidates[caught.size:]
            spilled += overflow.size

            grounded = np.flatnonzero(pos[:, 2] <= TABLE_LEVEL)
            grounded = np.setdiff1d(grounded, candidates, assume_unique=False)
            spilled += grounded.size

            keep = np.ones(pos.shape[0], dtype=bool)
            keep[caught] = False
            keep[overflow] = False
            keep[grounded] = False
            pos = pos[keep]
            vel = vel[keep]

        # Release new particles from the rim.
        in_source = state.in_source
        carry = state.outflow_carry
        excess = theta - onset_angle(in_source, scene.granule_count)
        if excess > 0 and in_source > 0:
            carry += FLOW_RATE * scene.flow_factor * excess * dt
            n_out = min(int(carry), in_source)
            carry -= int(carry)
            if n_out > 0:
                dx, dz = rim_offset(theta)
                px = x + dx + rng.normal(0.0, RELEASE_POS_JITTER, n_out)
                py = y + rng.normal(0.0, RELEASE_DEPTH_JITTER, n_out)
                pz = np.full(n_out, z + dz, dtype=np.float64)
                pvx = vx + rng.normal(0.0, RELEASE_VX_JITTER, n_out)
                pvz = np.full(n_out, RELEASE_VZ0, dtype=np.float64)
                pos = np.concatenate([pos, np.stack([px, py, pz], axis=1)], axis=0)
                vel = np.concatenate([vel, np.stack([pvx, pvz], axis=1)], axis=0)
                in_source -= n_out
        else:
            carry = 0.0

        new_state = SimState(
            pose=(x, y, z),
            theta=theta,
            in_source=in_source,
            in_target=in_target,
            spilled=spilled,
            flight_pos=pos,
            flight_vel=vel,
            outflow_carry=float(carry),
            time_step=state.time_step + 1,
            episode_seed=state.episode_seed,
            target_x=state.target_x,
            target_y=state.target_y,
        )
        assert new_state.total_particles() == scene.granule_count, "particle count leak"
        return new_state

    # -- views ----------------------------------------------------------

    def render(self, state: SimState) -> Observation:
        from .render import render_frame

        return Observation(image=render_frame(state, self.scene),
                           frame_index=state.time_step)

    def score(self, state: SimState) -> EpisodeScore:
        return score_episode(state, self.scene)
