"""Scene configuration for the simulated pouring environment.

A scene fixes everything that does not change during an episode: target
container geometry and color, granule type and color, background, camera
framing, and the nominal start pose of the hand-held source container.
Scenes are declarative JSON files; a bundled set (s01..s20) covers the
training scenes, two seen-combination test scenes, and the novel
background / granule / container scenes used for adaptation experiments.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field, asdict
from importlib import resources
from pathlib import Path


class SceneConfigError(ValueError):
    """Raised on invalid or inconsistent scene parameters."""


CONTAINER_KINDS = ("goblet", "plate", "cup", "jar", "custom")
GRANULE_KINDS = ("lentils", "rice", "couscous", "coffee")

# Granule type code: a stable integer per kind, also used as the task
# characteristic P. Flow factor scales the outflow rate (irregular grains
# pour slower).
GRANULE_CODE = {"lentils": 0, "rice": 1, "couscous": 2, "coffee": 3}
GRANULE_FLOW_FACTOR = {"lentils": 1.0, "rice": 1.12, "couscous": 1.05, "coffee": 0.78}
MAX_GRANULE_CODE = max(GRANULE_CODE.values())

# Capacity buckets for the task characteristic C (small/medium/big).
CAPACITY_BUCKETS = (180, 300)  # cap <= 180 -> 0, <= 300 -> 1, else 2


def capacity_bucket(capacity: int) -> int:
    for bucket, limit in enumerate(CAPACITY_BUCKETS):
        if capacity <= limit:
            return bucket
    return len(CAPACITY_BUCKETS)


@dataclass(frozen=True)
class CameraConfig:
    """Fixed side-view camera: square canvas over a world window.

    Depth (y) is not a separate axis on the canvas; it is rendered as a
    scale change plus a small vertical shift of the source container.
    """

    render_size: int = 128
    view_x: tuple[float, float] = (-0.27, 0.33)
    view_z: tuple[float, float] = (-0.035, 0.525)

    def validate(self) -> None:
        if self.render_size < 16:
            raise SceneConfigError(f"render_size too small: {self.render_size}")
        if self.view_x[1] <= self.view_x[0] or self.view_z[1] <= self.view_z[0]:
            raise SceneConfigError("camera view window is empty")


@dataclass(frozen=True)
class SceneConfig:
    scene_id: str
    container_kind: str
    container_opening_width: float  # m
    container_height: float  # m, rim height above the table
    container_capacity: int  # particle count
    container_color: tuple[int, int, int]
    container_opaque: bool
    granule_kind: str
    granule_color: tuple[int, int, int]
    granule_count: int
    background_color: tuple[int, int, int]
    background_texture: str  # "flat" | "tissue-noise"
    target_x: float  # nominal container center, jittered per episode seed
    target_y: float
    start_pose: tuple[float, float, float]  # nominal source start [x, y, z]
    camera: CameraConfig = field(default_factory=CameraConfig)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.container_kind not in CONTAINER_KINDS:
            raise SceneConfigError(f"unknown container kind {self.container_kind!r}")
        if self.granule_kind not in GRANULE_KINDS:
            raise SceneConfigError(f"unknown granule kind {self.granule_kind!r}")
        if self.background_texture not in ("flat", "tissue-noise"):
            raise SceneConfigError(f"unknown background texture {self.background_texture!r}")
        if self.container_opening_width <= 0:
            raise SceneConfigError("container_opening_width must be > 0")
        if self.container_height <= 0:
            raise SceneConfigError("container_height must be > 0")
        if self.container_capacity <= 0:
            raise SceneConfigError("container_capacity must be > 0")
        if self.granule_count <= 0:
            raise SceneConfigError("granule_count must be > 0")
        for name, c in (("container_color", self.container_color),
                        ("granule_color", self.granule_color),
                        ("background_color", self.background_color)):
            if len(c) != 3 or any(not (0 <= v <= 255) for v in c):
                raise SceneConfigError(f"{name} must be an RGB triple in 0..255")
        self.camera.validate()

    @property
    def granule_code(self) -> int:
        return GRANULE_CODE[self.granule_kind]

    @property
    def flow_factor(self) -> float:
        return GRANULE_FLOW_FACTOR[self.granule_kind]

    @property
    def task_z(self) -> tuple[int, int]:
        """Task characteristics [C, P]: capacity bucket and granule code."""
        return (capacity_bucket(self.container_capacity), self.granule_code)

    @property
    def seed_key(self) -> int:
        """Stable integer identity used to decorrelate per-scene randomness."""
        return zlib.crc32(self.scene_id.encode())

    def to_json(self) -> dict:
        d = asdict(self)
        d["camera"] = asdict(self.camera)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SceneConfig":
        d = dict(d)
        cam = d.pop("camera", {})
        cam = CameraConfig(
            render_size=int(cam.get("render_size", 128)),
            view_x=tuple(cam.get("view_x", (-0.27, 0.33))),
            view_z=tuple(cam.get("view_z", (-0.035, 0.525))),
        )
        return cls(
            scene_id=str(d["scene_id"]),
            container_kind=str(d["container_kind"]),
            container_opening_width=float(d["container_opening_width"]),
            container_height=float(d["container_height"]),
            container_capacity=int(d["container_capacity"]),
            container_color=tuple(int(v) for v in d["container_color"]),
            container_opaque=bool(d["container_opaque"]),
            granule_kind=str(d["granule_kind"]),
            granule_color=tuple(int(v) for v in d["granule_color"]),
            granule_count=int(d["granule_count"]),
            background_color=tuple(int(v) for v in d["background_color"]),
            background_texture=str(d["background_texture"]),
            target_x=float(d["target_x"]),
            target_y=float(d["target_y"]),
            start_pose=tuple(float(v) for v in d["start_pose"]),
            camera=cam,
        )

    def with_render_size(self, render_size: int) -> "SceneConfig":
        cam = CameraConfig(render_size=render_size, view_x=self.camera.view_x,
                           view_z=self.camera.view_z)
        d = self.to_json()
        d["camera"] = asdict(cam)
        return SceneConfig.from_json(d)


def _bundled_dir():
    return resources.files("pourlearn") / "scenes"


def bundled_scene_ids() -> list[str]:
    return sorted(p.name[:-5] for p in _bundled_dir().iterdir() if p.name.endswith(".json"))


def scene_path(scene_id: str) -> Path:
    return Path(str(_bundled_dir() / f"{scene_id}.json"))


def load_scene(spec: str | Path, render_size: int | None = None) -> SceneConfig:
    """Load a scene by bundled id (e.g. "s03") or by file path.

    render_size, when given, overrides the camera resolution so experiments
    can run below the camera's native setting.
    """
    p = Path(spec)
    if not p.suffix:
        p = scene_path(str(spec))
    if not p.exists():
        raise SceneConfigError(f"scene file not found: {p}")
    with open(p) as f:
        scene = SceneConfig.from_json(json.load(f))
    if render_size is not None and render_size != scene.camera.render_size:
        scene = scene.with_render_size(render_size)
    return scene
