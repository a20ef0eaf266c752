"""Scripted demonstrator standing in for human teleoperation.

Produces three-stage pours: drive the source container to a pose above
the target, tilt up quickly until granules start flowing, keep tilting
slowly to sustain the stream, then restore the wrist once enough has
landed. Seeded jitter on the start pose, target placement, and commands
makes repeated demonstrations distinct while staying successful.
"""

from __future__ import annotations

import numpy as np

from ..dataset import Trajectory, record
from .scene import SceneConfig
from .simulator import (
    DT,
    ActionVector,
    PouringSimulator,
    onset_angle,
    rim_offset,
    score_episode,
)

APPROACH_GAIN = 3.0
APPROACH_V_MAX = 0.22
HOLD_GAIN = 1.2
HOLD_V_MAX = 0.05
POSITION_TOL = 0.008
TILT_RATE_FAST = 1.35   # stage 1: reach the outflow onset quickly
TILT_RATE_POUR = 0.45   # stage 2: sustain the stream
TILT_RATE_RESTORE = 1.8
TILT_DEMO_MAX = 1.55
POUR_STOP_FRACTION = 0.93
POUR_CLEARANCE = 0.055  # source center height above the target rim
SETTLE_FRAMES = 4
NOISE_V = 0.004
NOISE_TILT = 0.012


class OracleFailure(RuntimeError):
    """The scripted demonstration did not end in a successful pour."""


def _pour_pose(scene: SceneConfig, tx: float, ty: float) -> np.ndarray:
    dx, _ = rim_offset(0.95)  # rim offset is nearly constant over the pour
    return np.array([tx - dx, ty, scene.container_height + POUR_CLEARANCE])


def demo_oracle(scene: SceneConfig, noise_seed: int, noise_amplitude: float = 1.0,
                max_steps: int = 400) -> Trajectory:
    """Run one scripted demonstration episode and return its recording.

    Deterministic for equal (scene, noise_seed, noise_amplitude). Raises
    OracleFailure when the resulting episode does not pass the success rule.
    """
    sim = PouringSimulator(scene)
    state = sim.reset(noise_seed)
    rng = np.random.default_rng(
        np.random.SeedSequence((scene.seed_key, int(noise_seed) & 0xFFFFFFFF, 0xDE))
    )
    pour_pose = _pour_pose(scene, state.target_x, state.target_y)
    denom = min(scene.granule_count, scene.container_capacity)
    stop_count = POUR_STOP_FRACTION * denom

    phase = "approach"
    theta_cmd = 0.0
    settle = 0
    steps = []

    for _ in range(max_steps):
        obs = sim.render(state)
        pos = np.array(state.pose)
        err = pour_pose - pos

        if phase == "approach":
            v = np.clip(APPROACH_GAIN * err, -APPROACH_V_MAX, APPROACH_V_MAX)
            if float(np.linalg.norm(err)) < POSITION_TOL:
                phase = "tilt"
        else:
            v = np.clip(HOLD_GAIN * err, -HOLD_V_MAX, HOLD_V_MAX)

        if phase == "tilt":
            theta_cmd += TILT_RATE_FAST * DT
            if state.theta >= onset_angle(state.in_source, scene.granule_count) + 0.02:
                phase = "pour"
        elif phase == "pour":
            theta_cmd += TILT_RATE_POUR * DT
            poured = state.in_target + state.in_flight
            if poured >= stop_count or theta_cmd >= TILT_DEMO_MAX:
                phase = "restore"
        elif phase == "restore":
            theta_cmd = max(0.0, theta_cmd - TILT_RATE_RESTORE * DT)

        noise_v = rng.normal(0.0, NOISE_V * noise_amplitude, 3)
        noise_t = rng.normal(0.0, NOISE_TILT * noise_amplitude)
        action = ActionVector(
            v_x=float(v[0] + noise_v[0]),
            v_y=float(v[1] + noise_v[1]),
            v_z=float(v[2] + noise_v[2]),
            theta=float(np.clip(theta_cmd + noise_t, 0.0, TILT_DEMO_MAX)),
        )
        steps.append((obs, action, state))
        state = sim.step(state, action)

        if phase == "restore" and state.theta <= 0.02 and state.in_flight == 0:
            settle += 1
            if settle > SETTLE_FRAMES:
                break

    score = score_episode(state, scene)
    if not score.success:
        raise OracleFailure(
            f"scripted pour failed on {scene.scene_id} (seed {noise_seed}): "
            f"fraction {score.in_target_fraction:.3f}, spilled {state.spilled}")
    traj = record(
        steps,
        scene_id=scene.scene_id,
        source_tag="oracle",
        dt=DT,
        extra={
            "noise_seed": int(noise_seed),
            "success": score.success,
            "in_target_fraction": score.in_target_fraction,
        },
    )
    return traj
