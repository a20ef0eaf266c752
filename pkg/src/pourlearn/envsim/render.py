"""Deterministic rasterizer for the pouring scene.

Pure function of (state, scene): equal inputs produce identical byte
arrays. The fixed side camera shows x on the canvas horizontal and z on
the vertical; depth (y) appears as a scale factor plus a small vertical
shift, so all four controlled degrees of freedom are visible.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .scene import SceneConfig
from .simulator import SimState, SOURCE_W, SOURCE_H

WALL_T = 0.007          # container wall thickness, m
BASE_T = 0.009
GOBLET_BOWL_Z = 0.05    # bowl floor height for stemmed containers
PLATE_KINDS_FLAT_FILL = ("plate",)
TABLE_COLOR = (84, 70, 58)
ARM_COLOR = (105, 105, 112)

DEPTH_SCALE_GAIN = 2.6  # size change per metre of depth
DEPTH_Z_SHIFT = 0.35    # vertical pseudo-perspective shift per metre of depth


def depth_scale(y: float) -> float:
    return 1.0 / (1.0 + DEPTH_SCALE_GAIN * y)


@lru_cache(maxsize=64)
def _background(scene_key: int, size: int, color: tuple, texture: str) -> np.ndarray:
    canvas = np.empty((size, size, 3), dtype=np.float32)
    canvas[:] = np.array(color, dtype=np.float32)
    if texture == "tissue-noise":
        rng = np.random.default_rng(np.random.SeedSequence((scene_key, 0xB6)))
        cells = max(6, size // 8)
        noise = rng.uniform(-22.0, 22.0, (cells, cells)).astype(np.float32)
        rep = int(np.ceil(size / cells))
        noise = np.kron(noise, np.ones((rep, rep), dtype=np.float32))[:size, :size]
        canvas += noise[:, :, None]
    return np.clip(canvas, 0, 255)


class _Canvas:
    def __init__(self, scene: SceneConfig):
        cam = scene.camera
        self.size = cam.render_size
        self.x0, self.x1 = cam.view_x
        self.z0, self.z1 = cam.view_z
        self.px_per_m = self.size / (self.x1 - self.x0)
        self.img = _background(scene.seed_key, self.size, tuple(scene.background_color),
                               scene.background_texture).copy()

    def col_of(self, x):
        return (np.asarray(x) - self.x0) / (self.x1 - self.x0) * self.size

    def row_of(self, z):
        return (self.z1 - np.asarray(z)) / (self.z1 - self.z0) * self.size

    def x_of_cols(self, cols):
        return self.x0 + (cols + 0.5) * (self.x1 - self.x0) / self.size

    def z_of_rows(self, rows):
        return self.z1 - (rows + 0.5) * (self.z1 - self.z0) / self.size

    def fill_rect(self, x_lo, x_hi, z_lo, z_hi, color, alpha=1.0):
        c0 = int(np.floor(self.col_of(x_lo)))
        c1 = int(np.ceil(self.col_of(x_hi)))
        r0 = int(np.floor(self.row_of(z_hi)))
        r1 = int(np.ceil(self.row_of(z_lo)))
        c0, c1 = max(0, c0), min(self.size, c1)
        r0, r1 = max(0, r0), min(self.size, r1)
        if c1 <= c0 or r1 <= r0:
            return
        region = self.img[r0:r1, c0:c1]
        col = np.array(color, dtype=np.float32)
        region[:] = region * (1.0 - alpha) + col * alpha

    def scatter(self, xs, zs, color, big=False):
        cols = np.round(self.col_of(xs)).astype(int)
        rows = np.round(self.row_of(zs)).astype(int)
        ok = (cols >= 0) & (cols < self.size) & (rows >= 0) & (rows < self.size)
        self.img[rows[ok], cols[ok]] = color
        if big:
            cols2 = np.clip(cols[ok] + 1, 0, self.size - 1)
            self.img[rows[ok], cols2] = color

    def finish(self) -> np.ndarray:
        return np.clip(np.rint(self.img), 0, 255).astype(np.uint8)


def _draw_table(cv: _Canvas):
    cv.fill_rect(cv.x0, cv.x1, cv.z0, 0.0, TABLE_COLOR)


def _draw_target(cv: _Canvas, state: SimState, scene: SceneConfig):
    s = depth_scale(state.target_y)
    tx = state.target_x
    z_off = DEPTH_Z_SHIFT * state.target_y
    rim = scene.container_height * s + z_off
    base = z_off
    half = scene.container_opening_width * s / 2.0
    wall = WALL_T * s
    opaque = scene.container_opaque
    wall_alpha = 1.0 if opaque else 0.45

    bowl_floor = base
    if scene.container_kind == "goblet":
        bowl_floor = base + GOBLET_BOWL_Z * s
        stem_half = 0.011 * s
        cv.fill_rect(tx - stem_half, tx + stem_half, base, bowl_floor, scene.container_color)
        cv.fill_rect(tx - half, tx + half, bowl_floor, bowl_floor + BASE_T * s,
                     scene.container_color)
    else:
        cv.fill_rect(tx - half - wall, tx + half + wall, base, base + BASE_T * s,
                     scene.container_color)

    # Fill level: always drawn inside the opening so fullness is observable
    # from the fixed camera regardless of wall opacity.
    frac = state.in_target / scene.container_capacity
    if frac > 0:
        inner_lo = bowl_floor + BASE_T * s
        fill_top = inner_lo + frac * max(0.0, rim - inner_lo) * 0.94
        cv.fill_rect(tx - half + wall, tx + half - wall, inner_lo, fill_top,
                     scene.granule_color)

    cv.fill_rect(tx - half - wall, tx - half, bowl_floor, rim, scene.container_color,
                 alpha=wall_alpha)
    cv.fill_rect(tx + half, tx + half + wall, bowl_floor, rim, scene.container_color,
                 alpha=wall_alpha)


def _draw_source(cv: _Canvas, state: SimState, scene: SceneConfig):
    x, y, z = state.pose
    s = depth_scale(y)
    cx, cz = x, z + DEPTH_Z_SHIFT * y
    w, h = SOURCE_W * s, SOURCE_H * s
    wall = 0.0085 * s
    theta = state.theta

    # Pixel block around the cup, then inverse-rotate into cup coordinates.
    radius = 0.62 * (w + h)
    c0 = int(np.floor(cv.col_of(cx - radius)))
    c1 = int(np.ceil(cv.col_of(cx + radius)))
    r0 = int(np.floor(cv.row_of(cz + radius)))
    r1 = int(np.ceil(cv.row_of(cz - radius)))
    c0, c1 = max(0, c0), min(cv.size, c1)
    r0, r1 = max(0, r0), min(cv.size, r1)
    if c1 <= c0 or r1 <= r0:
        return
    cols, rows = np.meshgrid(np.arange(c0, c1), np.arange(r0, r1))
    dx = cv.x_of_cols(cols) - cx
    dz = cv.z_of_rows(rows) - cz
    ct, st = math.cos(theta), math.sin(theta)
    u = dx * ct - dz * st
    t = dx * st + dz * ct

    inside = (np.abs(u) <= w / 2) & (np.abs(t) <= h / 2)
    interior = (np.abs(u) < w / 2 - wall) & (t > -h / 2 + wall) & (t <= h / 2)
    walls = inside & ~interior

    # Granule surface stays horizontal in the world frame.
    fill = state.in_source / scene.granule_count
    surface = interior & (dz <= (fill - 0.5) * h * ct) & (fill > 0)

    region = cv.img[r0:r1, c0:c1]
    gran = np.array(scene.granule_color, dtype=np.float32)
    cup = np.array((200, 202, 206), dtype=np.float32)
    region[surface] = gran
    region[walls] = cup

    # Wrist stem so the grip point (and thus tilt) reads clearly.
    grip_u = np.abs(u + w / 2) < 0.006 * s
    grip_t = (t > h * 0.05) & (t < h * 0.62)
    region[grip_u & grip_t & ~surface] = np.array(ARM_COLOR, dtype=np.float32)


def _draw_particles(cv: _Canvas, state: SimState, scene: SceneConfig):
    if state.in_flight == 0:
        return
    pos = state.flight_pos
    z_off = DEPTH_Z_SHIFT * pos[:, 1]
    cv.scatter(pos[:, 0], pos[:, 2] + z_off, scene.granule_color,
               big=cv.size >= 96)


def render_frame(state: SimState, scene: SceneConfig) -> np.ndarray:
    cv = _Canvas(scene)
    _draw_table(cv)
    _draw_target(cv, state, scene)
    _draw_particles(cv, state, scene)
    _draw_source(cv, state, scene)
    return cv.finish()
