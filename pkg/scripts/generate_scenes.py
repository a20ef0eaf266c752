#!/usr/bin/env python3
"""Regenerate the bundled scene set (src/pourlearn/scenes/*.json).

Twenty scenes: s01-s10 are the training combinations (goblet/plate/cup/jar
x lentils/rice/couscous on the orange board), s11-s12 are seen-style test
combinations, s13-s15 swap in the blue tissue background, s16-s18 the
irregular coffee granules, and s19-s20 a big black cup unseen in training.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "pourlearn" / "scenes"

CONTAINERS = {
    "goblet": dict(opening=0.085, height=0.120, capacity=260,
                   color=(235, 235, 235), opaque=True),
    "plate": dict(opening=0.130, height=0.040, capacity=150,
                  color=(235, 235, 235), opaque=True),
    "cup": dict(opening=0.072, height=0.095, capacity=150,
                color=(235, 235, 235), opaque=True),
    "jar": dict(opening=0.105, height=0.150, capacity=420,
                color=(178, 190, 202), opaque=False),
    # the novel target: a big black cup
    "custom": dict(opening=0.095, height=0.135, capacity=380,
                   color=(32, 32, 38), opaque=True),
}

GRANULES = {
    "lentils": (96, 150, 62),
    "rice": (242, 240, 233),
    "couscous": (226, 196, 70),
    "coffee": (112, 72, 42),
}

BOARD = dict(color=(226, 128, 42), texture="flat")
TISSUE = dict(color=(82, 116, 202), texture="tissue-noise")

# (container, granules, background)
ROWS = [
    ("goblet", "lentils", BOARD),   # s01
    ("goblet", "rice", BOARD),      # s02
    ("goblet", "couscous", BOARD),  # s03
    ("plate", "lentils", BOARD),    # s04
    ("plate", "rice", BOARD),       # s05
    ("plate", "couscous", BOARD),   # s06
    ("cup", "lentils", BOARD),      # s07
    ("cup", "rice", BOARD),         # s08
    ("jar", "lentils", BOARD),      # s09
    ("jar", "rice", BOARD),         # s10
    ("cup", "couscous", BOARD),     # s11
    ("jar", "couscous", BOARD),     # s12
    ("jar", "lentils", TISSUE),     # s13 new background
    ("plate", "lentils", TISSUE),   # s14 new background
    ("goblet", "lentils", TISSUE),  # s15 new background
    ("cup", "coffee", BOARD),       # s16 new granules
    ("plate", "coffee", BOARD),     # s17 new granules
    ("goblet", "coffee", BOARD),    # s18 new granules
    ("custom", "rice", BOARD),      # s19 new container
    ("custom", "couscous", BOARD),  # s20 new container
]

TARGET_X_CYCLE = [0.06, 0.10, 0.14, 0.08, 0.12]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for i, (kind, granule, bg) in enumerate(ROWS):
        sid = f"s{i + 1:02d}"
        c = CONTAINERS[kind]
        tx = TARGET_X_CYCLE[i % len(TARGET_X_CYCLE)]
        start_x = tx - 0.15 if i % 2 == 0 else tx + 0.15
        start_y = -0.03 if (i // 2) % 2 == 0 else 0.03
        scene = {
            "scene_id": sid,
            "container_kind": kind,
            "container_opening_width": c["opening"],
            "container_height": c["height"],
            "container_capacity": c["capacity"],
            "container_color": list(c["color"]),
            "container_opaque": c["opaque"],
            "granule_kind": granule,
            "granule_color": list(GRANULES[granule]),
            "granule_count": 200,
            "background_color": list(bg["color"]),
            "background_texture": bg["texture"],
            "target_x": tx,
            "target_y": 0.0,
            "start_pose": [round(start_x, 4), start_y, 0.20],
            "camera": {
                "render_size": 128,
                "view_x": [-0.27, 0.33],
                "view_z": [-0.035, 0.525],
            },
        }
        with open(OUT / f"{sid}.json", "w") as f:
            json.dump(scene, f, indent=1, sort_keys=True)
            f.write("\n")
    print(f"wrote {len(ROWS)} scenes to {OUT}")


if __name__ == "__main__":
    main()
