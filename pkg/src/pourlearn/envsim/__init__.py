from .scene import SceneConfig, CameraConfig, load_scene, bundled_scene_ids, scene_path
from .simulator import (
    ActionVector,
    SimState,
    Observation,
    EpisodeScore,
    PouringSimulator,
    score_episode,
    DT,
)
from .oracle import demo_oracle, OracleFailure

__all__ = [
    "SceneConfig",
    "CameraConfig",
    "load_scene",
    "bundled_scene_ids",
    "scene_path",
    "ActionVector",
    "SimState",
    "Observation",
    "EpisodeScore",
    "PouringSimulator",
    "score_episode",
    "demo_oracle",
    "OracleFailure",
    "DT",
]
