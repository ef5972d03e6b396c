"""Scene container: objects, camera, floor, and support surfaces.

Scenes are immutable snapshots. `load_scene` / `save_scene` round-trip a
canonical UTF-8 JSON form ("gsi-scene/1") in which every float is written
as a decimal string with 9 significant digits, so a canonicalized document
survives save/load byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .colors import NAMED_COLORS
from .errors import NoSupport, ParseError, ValidationError
from .geometry import Intrinsics, Obb, Rotation, obb_intersects, project_obb

SCENE_VERSION = "gsi-scene/1"
FLOOR_ID = "floor"

# Receptacle walls take this fraction of the full extent on each side.
WALL_FRACTION = 0.05

_SUPPORT_TOL = 1e-4


def fmt_float(x: float) -> str:
    """Canonical 9-significant-digit decimal form."""
    return f"{float(x):.9g}"


def _fmt_vec(v) -> list[str]:
    return [fmt_float(x) for x in np.asarray(v, dtype=float).ravel()]


def _parse_vec(items, n: int, where: str) -> np.ndarray:
    try:
        a = np.array([float(x) for x in items], dtype=float)
    except (TypeError, ValueError) as e:
        raise ParseError(f"{where}: {e}") from None
    if a.size != n:
        raise ParseError(f"{where}: expected {n} numbers, got {a.size}")
    return a


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle on a horizontal plane, world x/y meters."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (self.xmin - tol <= x <= self.xmax + tol
                and self.ymin - tol <= y <= self.ymax + tol)

    def contains_points(self, pts, tol: float = 0.0) -> bool:
        pts = np.asarray(pts, dtype=float)
        return bool(
            np.all(pts[:, 0] >= self.xmin - tol)
            and np.all(pts[:, 0] <= self.xmax + tol)
            and np.all(pts[:, 1] >= self.ymin - tol)
            and np.all(pts[:, 1] <= self.ymax + tol)
        )

    @property
    def center(self) -> tuple[float, float]:
        return ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin


@dataclass(frozen=True)
class Surface:
    """Named horizontal support rectangle at a fixed height."""

    id: str
    rect: Rect
    height: float


@dataclass(frozen=True, eq=False)
class ObjectState:
    """One box-shaped object: pose, full extents, palette color, support."""

    id: str
    category: str
    center: np.ndarray
    size: np.ndarray  # full extents, meters
    rotation: Rotation
    color: tuple[int, int, int]
    support_id: str | None = None
    manipulable: bool = True
    is_receptacle: bool = False

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).copy()
        s = np.asarray(self.size, dtype=float).copy()
        c.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "size", s)
        object.__setattr__(self, "color", tuple(int(v) for v in self.color))

    def obb(self) -> Obb:
        return Obb(self.center, self.size / 2.0, self.rotation)

    def half_height(self) -> float:
        """World-frame vertical half-extent (rotation-aware)."""
        return self.obb().extent_along((0.0, 0.0, 1.0))

    def base_z(self) -> float:
        return float(self.center[2]) - self.half_height()


@dataclass(frozen=True, eq=False)
class CameraState:
    """World->camera pose plus pinhole intrinsics."""

    rotation: Rotation
    translation: np.ndarray
    intrinsics: Intrinsics

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).copy()
        t.flags.writeable = False
        object.__setattr__(self, "translation", t)


@dataclass(frozen=True, eq=False)
class Scene:
    """Immutable scene snapshot: ordered objects, camera, floor, surfaces."""

    objects: tuple[ObjectState, ...]
    camera: CameraState
    floor: Rect
    surfaces: tuple[Surface, ...] = ()
    name: str = ""

    def object_by_id(self, object_id: str) -> ObjectState:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    def has_object(self, object_id: str) -> bool:
        return any(o.id == object_id for o in self.objects)

    def index_of(self, object_id: str) -> int:
        """1-based index used as the renderer's instance id."""
        for i, obj in enumerate(self.objects):
            if obj.id == object_id:
                return i + 1
        raise KeyError(object_id)

    def with_objects(self, objects: Iterable[ObjectState]) -> Scene:
        return replace(self, objects=tuple(objects))

    def with_camera(self, camera: CameraState) -> Scene:
        return replace(self, camera=camera)


def interior_of(receptacle: ObjectState) -> Obb:
    """Open cavity of a receptacle: footprint shrunk by the wall fraction,
    extending from the interior floor up to the rim."""
    h = receptacle.size / 2.0
    half = np.array([h[0] * (1 - 2 * WALL_FRACTION),
                     h[1] * (1 - 2 * WALL_FRACTION),
                     h[2] * (1 - WALL_FRACTION)])
    offset = receptacle.rotation.m @ np.array([0.0, 0.0, h[2] * WALL_FRACTION])
    return Obb(receptacle.center + offset, half, receptacle.rotation)


def interior_floor_height(receptacle: ObjectState) -> float:
    """World height of the cavity floor (base plus bottom wall)."""
    box = receptacle.obb()
    return box.bottom_z() + 2 * WALL_FRACTION * receptacle.half_height()


def support_surface_of(scene: Scene, object_id: str) -> tuple[Rect, float]:
    """Support rectangle and height for an object's support_id.

    The floor id resolves to the scene floor at height 0; receptacle ids
    resolve to the cavity footprint (axis-aligned bound) at the interior
    floor height.
    """
    obj = scene.object_by_id(object_id)
    if obj.support_id is None:
        raise NoSupport(object_id)
    return resolve_support(scene, obj.support_id)


def resolve_support(scene: Scene, support_id: str) -> tuple[Rect, float]:
    if support_id == FLOOR_ID:
        return scene.floor, 0.0
    for surf in scene.surfaces:
        if surf.id == support_id:
            return surf.rect, surf.height
    for obj in scene.objects:
        if obj.id == support_id and obj.is_receptacle:
            cavity = interior_of(obj)
            pts = cavity.corners()[:, :2]
            rect = Rect(float(pts[:, 0].min()), float(pts[:, 1].min()),
                        float(pts[:, 0].max()), float(pts[:, 1].max()))
            return rect, interior_floor_height(obj)
    raise NoSupport(support_id)


def collision_exempt(a: ObjectState, b: ObjectState) -> bool:
    """Support pairs are exempt: a contained object necessarily lies inside
    its receptacle's outer box."""
    return a.support_id == b.id or b.support_id == a.id


def validate_scene(scene: Scene, *, collisions_fatal: bool = True) -> list[str]:
    """Check all scene invariants; raises ValidationError on the first hard
    violation. With collisions_fatal=False, intersecting pairs are returned
    as warnings instead (grounded real-world scenes may interpenetrate).
    """
    ids = [o.id for o in scene.objects]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})[0]
        raise ValidationError("id", f"duplicate object id {dup!r}")
    colors = [o.color for o in scene.objects]
    if len(set(colors)) != len(colors):
        raise ValidationError("color", "palette colors must be unique per scene")
    for obj in scene.objects:
        if not np.all(obj.size > 0):
            raise ValidationError("size", f"{obj.id}: extents must be positive")
        if obj.support_id is not None:
            try:
                _, height = resolve_support(scene, obj.support_id)
            except NoSupport:
                raise ValidationError(
                    "support_id", f"{obj.id}: unknown support {obj.support_id!r}"
                ) from None
            if abs(obj.base_z() - height) > _SUPPORT_TOL:
                raise ValidationError(
                    "support_id",
                    f"{obj.id}: base at {obj.base_z():.6f} but support top at "
                    f"{height:.6f}",
                )
    if any(s.id == FLOOR_ID for s in scene.surfaces):
        raise ValidationError("surfaces", f"surface id {FLOOR_ID!r} is reserved")

    warnings = []
    for i in range(len(scene.objects)):
        for j in range(i + 1, len(scene.objects)):
            a, b = scene.objects[i], scene.objects[j]
            if collision_exempt(a, b):
                continue
            if obb_intersects(a.obb(), b.obb()):
                msg = f"objects {a.id!r} and {b.id!r} intersect"
                if collisions_fatal:
                    raise ValidationError("collision", msg)
                warnings.append(msg)
    return warnings


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def scene_to_dict(scene: Scene) -> dict:
    return {
        "version": SCENE_VERSION,
        "name": scene.name,
        "objects": [
            {
                "id": o.id,
                "category": o.category,
                "center": _fmt_vec(o.center),
                "size": _fmt_vec(o.size),
                "rotation": _fmt_vec(o.rotation.m),
                "color": list(o.color),
                "support_id": o.support_id,
                "manipulable": o.manipulable,
                "is_receptacle": o.is_receptacle,
            }
            for o in scene.objects
        ],
        "camera": {
            "rotation": _fmt_vec(scene.camera.rotation.m),
            "translation": _fmt_vec(scene.camera.translation),
            "intrinsics": {
                "fx": fmt_float(scene.camera.intrinsics.fx),
                "fy": fmt_float(scene.camera.intrinsics.fy),
                "cx": fmt_float(scene.camera.intrinsics.cx),
                "cy": fmt_float(scene.camera.intrinsics.cy),
                "width": scene.camera.intrinsics.width,
                "height": scene.camera.intrinsics.height,
            },
        },
        "floor": _fmt_vec([scene.floor.xmin, scene.floor.ymin,
                           scene.floor.xmax, scene.floor.ymax]),
        "surfaces": [
            {
                "id": s.id,
                "rect": _fmt_vec([s.rect.xmin, s.rect.ymin, s.rect.xmax,
                                  s.rect.ymax]),
                "height": fmt_float(s.height),
            }
            for s in scene.surfaces
        ],
    }


def scene_from_dict(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise ParseError("scene document must be a JSON object")
    if doc.get("version") != SCENE_VERSION:
        raise ParseError(f"unsupported scene version {doc.get('version')!r}")
    for key in ("objects", "camera", "floor"):
        if key not in doc:
            raise ParseError(f"missing top-level key {key!r}")
    try:
        objects = tuple(
            ObjectState(
                id=str(o["id"]),
                category=str(o["category"]),
                center=_parse_vec(o["center"], 3, "object center"),
                size=_parse_vec(o["size"], 3, "object size"),
                rotation=Rotation(_parse_vec(o["rotation"], 9,
                                             "object rotation").reshape(3, 3)),
                color=tuple(int(c) for c in o["color"]),
                support_id=o.get("support_id"),
                manipulable=bool(o.get("manipulable", True)),
                is_receptacle=bool(o.get("is_receptacle", False)),
            )
            for o in doc["objects"]
        )
        cam = doc["camera"]
        ki = cam["intrinsics"]
        camera = CameraState(
            rotation=Rotation(_parse_vec(cam["rotation"], 9,
                                         "camera rotation").reshape(3, 3)),
            translation=_parse_vec(cam["translation"], 3, "camera translation"),
            intrinsics=Intrinsics(
                fx=float(ki["fx"]), fy=float(ki["fy"]),
                cx=float(ki["cx"]), cy=float(ki["cy"]),
                width=int(ki["width"]), height=int(ki["height"]),
            ),
        )
        floor = Rect(*(float(x) for x in doc["floor"]))
        surfaces = tuple(
            Surface(id=str(s["id"]),
                    rect=Rect(*(float(x) for x in s["rect"])),
                    height=float(s["height"]))
            for s in doc.get("surfaces", [])
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(str(e)) from None
    return Scene(objects=objects, camera=camera, floor=floor, surfaces=surfaces,
                 name=str(doc.get("name", "")))


def save_scene(scene: Scene) -> bytes:
    """Canonical bytes: sorted keys, compact separators, UTF-8."""
    return json.dumps(scene_to_dict(scene), sort_keys=True,
                      separators=(",", ":")).encode("utf-8")


def load_scene(data: bytes, *, collisions_fatal: bool = True) -> Scene:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(str(e)) from None
    scene = scene_from_dict(doc)
    validate_scene(scene, collisions_fatal=collisions_fatal)
    return scene


def scenes_equal(a: Scene, b: Scene) -> bool:
    """Equality on the canonical serialized form."""
    return save_scene(a) == save_scene(b)


def visible_objects(scene: Scene, min_fraction: float, *,
                    render_size: int = 256,
                    occlusion_ratio: float = 0.5) -> list[tuple[str, float]]:
    """Objects whose projected bbox keeps at least min_fraction of its area
    in frame and whose rendered instance mask keeps at least occlusion_ratio
    of its unoccluded pixel count."""
    from .render import instance_counts, render  # deferred: render imports scene

    candidates = []
    for obj in scene.objects:
        _, fraction = project_obb(obj.obb(), scene.camera.rotation,
                                  scene.camera.translation,
                                  scene.camera.intrinsics)
        if fraction >= min_fraction:
            candidates.append((obj, fraction))
    if not candidates:
        return []

    full = instance_counts(render(scene, render_size, render_size))
    out = []
    for obj, fraction in candidates:
        idx = scene.index_of(obj.id)
        solo = scene.with_objects([obj])
        solo_counts = instance_counts(render(solo, render_size, render_size))
        unoccluded = solo_counts.get(1, 0)
        visible = full.get(idx, 0)
        if unoccluded > 0 and visible >= occlusion_ratio * unoccluded:
            out.append((obj.id, fraction))
    return out


def palette_of(scene: Scene) -> dict[str, tuple[int, int, int]]:
    return {o.id: o.color for o in scene.objects}


def color_in_palette(color: tuple[int, int, int]) -> bool:
    return tuple(color) in NAMED_COLORS.values()
