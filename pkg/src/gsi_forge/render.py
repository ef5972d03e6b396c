"""Deterministic flat-shaded software rasterizer for box scenes.

Produces color, depth, and instance-id planes. Determinism contract:
identical scene in, bit-identical buffers out, on any platform. Vertex
pixel coordinates are snapped to a 1/256 subpixel grid before filling and
all arithmetic is straight float64, so there is no order- or
platform-dependent state.

Receptacles are drawn as open five-slab shells (four walls plus bottom,
wall thickness matching the scene model's interior definition) so that
contained objects remain visible from above.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image

from .colors import BACKGROUND_COLOR, SHADE_FACTORS
from .errors import DimensionMismatch
from .geometry import Obb
from .scene import Scene, WALL_FRACTION

NEAR_CLIP = 1e-4
SUBPIXEL = 256.0

# Corner sign order matches Obb.corners(): index = 4*sx + 2*sy + sz.
_FACE_QUADS = (
    ((0, 1, 3, 2), 0, -1),  # -x
    ((4, 5, 7, 6), 0, +1),  # +x
    ((0, 1, 5, 4), 1, -1),  # -y
    ((2, 3, 7, 6), 1, +1),  # +y
    ((0, 2, 6, 4), 2, -1),  # -z
    ((1, 3, 7, 5), 2, +1),  # +z
)

_RGB_SUFFIX = "_rgb.png"
_IID_SUFFIX = "_iid.pgm"
_DEPTH_SUFFIX = "_d.pgm"


@dataclass(eq=False)
class FrameBuffers:
    """Rasterizer output planes; background is instance 0 / depth +inf."""

    color: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float64, +inf where empty
    instance: np.ndarray  # (H, W) int32, 0 = background

    @property
    def width(self) -> int:
        return self.color.shape[1]

    @property
    def height(self) -> int:
        return self.color.shape[0]


def draw_boxes(scene: Scene) -> list[tuple[int, Obb, tuple[int, int, int]]]:
    """Solid boxes the rasterizer fills, with their instance ids and base
    colors. Shared between rendering and the analytic ray-depth oracle."""
    out = []
    for i, obj in enumerate(scene.objects):
        iid = i + 1
        if obj.is_receptacle:
            h = obj.size / 2.0
            tx, ty, tz = 2 * WALL_FRACTION * h
            hz_wall = h[2] - tz / 2.0
            locals_ = [
                ((0.0, 0.0, -h[2] + tz / 2.0), (h[0], h[1], tz / 2.0)),
                ((-h[0] + tx / 2.0, 0.0, tz / 2.0), (tx / 2.0, h[1], hz_wall)),
                ((h[0] - tx / 2.0, 0.0, tz / 2.0), (tx / 2.0, h[1], hz_wall)),
                ((0.0, -h[1] + ty / 2.0, tz / 2.0), (h[0], ty / 2.0, hz_wall)),
                ((0.0, h[1] - ty / 2.0, tz / 2.0), (h[0], ty / 2.0, hz_wall)),
            ]
            for local_center, half in locals_:
                center = obj.center + obj.rotation.m @ np.asarray(local_center)
                out.append((iid, Obb(center, np.asarray(half), obj.rotation),
                            obj.color))
        else:
            out.append((iid, obj.obb(), obj.color))
    return out


def shade_level(world_normal: np.ndarray) -> float:
    """Quantized flat-shade factor by the dominant axis of the face normal."""
    a = np.abs(world_normal)
    if a[2] >= a[0] and a[2] >= a[1]:
        return SHADE_FACTORS[0]
    if a[1] >= a[0]:
        return SHADE_FACTORS[1]
    return SHADE_FACTORS[2]


def _clip_near(poly_cam: list[np.ndarray]) -> list[np.ndarray]:
    """Sutherland-Hodgman clip of a camera-space polygon against z >= NEAR."""
    out: list[np.ndarray] = []
    n = len(poly_cam)
    for i in range(n):
        cur, nxt = poly_cam[i], poly_cam[(i + 1) % n]
        cur_in, nxt_in = cur[2] >= NEAR_CLIP, nxt[2] >= NEAR_CLIP
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in:
            t = (NEAR_CLIP - cur[2]) / (nxt[2] - cur[2])
            out.append(cur + t * (nxt - cur))
    return out


def _edge(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def scaled_intrinsics(k, width: int, height: int):
    """Intrinsics resampled to a raster of the given size."""
    from .geometry import Intrinsics

    if width == k.width and height == k.height:
        return k
    sx, sy = width / k.width, height / k.height
    return Intrinsics(fx=k.fx * sx, fy=k.fy * sy, cx=k.cx * sx, cy=k.cy * sy,
                      width=width, height=height)


def render(scene: Scene, width: int, height: int) -> FrameBuffers:
    """Rasterize the scene. Draw order is fixed (scene object order, fixed
    face order) and depth ties keep the first writer, so output is exactly
    reproducible."""
    color = np.empty((height, width, 3), dtype=np.uint8)
    color[:] = BACKGROUND_COLOR
    depth = np.full((height, width), np.inf, dtype=np.float64)
    instance = np.zeros((height, width), dtype=np.int32)

    cam = scene.camera
    k = scaled_intrinsics(cam.intrinsics, width, height)
    rot = cam.rotation.m
    t = cam.translation

    for iid, box, base_color in draw_boxes(scene):
        corners_world = box.corners()
        corners_cam = corners_world @ rot.T + t
        axes = box.rotation.m
        for quad, axis, sign in _FACE_QUADS:
            normal_world = sign * axes[:, axis]
            shade = shade_level(normal_world)
            rgb = np.rint(np.asarray(base_color, dtype=float) * shade)
            rgb = rgb.astype(np.uint8)
            poly = _clip_near([corners_cam[i] for i in quad])
            if len(poly) < 3:
                continue
            zs = np.array([p[2] for p in poly])
            xs = np.array([k.fx * p[0] / p[2] + k.cx for p in poly])
            ys = np.array([k.fy * p[1] / p[2] + k.cy for p in poly])
            # 8-bit subpixel snap keeps coordinates on an exact grid.
            xs = np.rint(xs * SUBPIXEL) / SUBPIXEL
            ys = np.rint(ys * SUBPIXEL) / SUBPIXEL
            for a, b in [(j, j + 1) for j in range(1, len(poly) - 1)]:
                _fill_triangle(
                    xs[[0, a, b]], ys[[0, a, b]], zs[[0, a, b]],
                    rgb, iid, color, depth, instance,
                )
    return FrameBuffers(color=color, depth=depth, instance=instance)


def _fill_triangle(xs, ys, zs, rgb, iid, color, depth, instance):
    height, width = depth.shape
    area = _edge(xs[0], ys[0], xs[1], ys[1], xs[2], ys[2])
    if area == 0.0:
        return
    col_min = max(0, int(np.ceil(xs.min() - 0.5)))
    col_max = min(width - 1, int(np.floor(xs.max() - 0.5)))
    row_min = max(0, int(np.ceil(ys.min() - 0.5)))
    row_max = min(height - 1, int(np.floor(ys.max() - 0.5)))
    if col_min > col_max or row_min > row_max:
        return
    px = np.arange(col_min, col_max + 1, dtype=np.float64) + 0.5
    py = np.arange(row_min, row_max + 1, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(px, py)
    w0 = _edge(xs[1], ys[1], xs[2], ys[2], gx, gy)
    w1 = _edge(xs[2], ys[2], xs[0], ys[0], gx, gy)
    w2 = _edge(xs[0], ys[0], xs[1], ys[1], gx, gy)
    if area > 0:
        inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
    else:
        inside = (w0 <= 0) & (w1 <= 0) & (w2 <= 0)
    if not inside.any():
        return
    # Perspective-correct depth: 1/z interpolates linearly in screen space.
    inv_z = (w0 / area) / zs[0] + (w1 / area) / zs[1] + (w2 / area) / zs[2]
    with np.errstate(divide="ignore"):
        z = np.where(inv_z > 0, 1.0 / inv_z, np.inf)
    window = depth[row_min:row_max + 1, col_min:col_max + 1]
    closer = inside & (z < window)
    window[closer] = z[closer]
    instance[row_min:row_max + 1, col_min:col_max + 1][closer] = iid
    color[row_min:row_max + 1, col_min:col_max + 1][closer] = rgb


def instance_counts(fb: FrameBuffers) -> dict[int, int]:
    ids, counts = np.unique(fb.instance, return_counts=True)
    return {int(i): int(c) for i, c in zip(ids, counts) if i != 0}


def pixel_change_fraction(a: FrameBuffers, b: FrameBuffers) -> float:
    """Fraction of pixels whose instance id differs or whose color moved by
    more than 8/255 in any channel."""
    if a.color.shape != b.color.shape:
        raise DimensionMismatch(f"{a.color.shape} vs {b.color.shape}")
    color_moved = np.any(
        np.abs(a.color.astype(np.int16) - b.color.astype(np.int16)) > 8, axis=2
    )
    changed = (a.instance != b.instance) | color_moved
    return float(changed.mean())


# ---------------------------------------------------------------------------
# Image files
# ---------------------------------------------------------------------------


def png_bytes(rgb: np.ndarray) -> bytes:
    buf = BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def write_pgm16(path: Path, values: np.ndarray) -> None:
    """Binary PGM, maxval 65535, big-endian rows."""
    h, w = values.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(values.astype(">u2").tobytes())


def read_pgm16(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P5":
        raise ValueError(f"not a binary PGM: {magic!r}")
    w, h = (int(x) for x in dims.split())
    if int(maxval) != 65535:
        raise ValueError("expected 16-bit PGM")
    return np.frombuffer(rest[: w * h * 2], dtype=">u2").reshape(h, w).astype(
        np.uint16
    )


def depth_to_millimeters(depth: np.ndarray) -> np.ndarray:
    mm = np.where(np.isfinite(depth), np.rint(depth * 1000.0), 65535.0)
    return np.clip(mm, 0, 65535).astype(np.uint16)


def write_frame(fb: FrameBuffers, directory: Path, stem: str) -> dict[str, str]:
    """Write the three planes with the documented suffix convention; returns
    relative file names keyed by plane."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rgb_name = stem + _RGB_SUFFIX
    iid_name = stem + _IID_SUFFIX
    d_name = stem + _DEPTH_SUFFIX
    (directory / rgb_name).write_bytes(png_bytes(fb.color))
    write_pgm16(directory / iid_name, fb.instance.astype(np.uint16))
    write_pgm16(directory / d_name, depth_to_millimeters(fb.depth))
    return {"rgb": rgb_name, "iid": iid_name, "depth": d_name}


def read_png(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
