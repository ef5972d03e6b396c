"""Bundled benchmark environments.

Each environment is an ordinary scene built from box primitives with the
named flat palette. Table tops are declared as explicit support surfaces
2 mm above the table box so resting objects never touch the table's
collision volume (touching counts as intersecting).
"""

from __future__ import annotations

import numpy as np

from .colors import NAMED_COLORS
from .geometry import Intrinsics, Rotation, look_at_rotation, translation_for
from .scene import CameraState, ObjectState, Rect, Scene, Surface, validate_scene

DEFAULT_INTRINSICS = Intrinsics(fx=430.0, fy=430.0, cx=256.0, cy=256.0,
                                width=512, height=512)


def _camera(eye, target, intrinsics=DEFAULT_INTRINSICS) -> CameraState:
    rot = look_at_rotation(eye, target)
    return CameraState(rotation=rot, translation=translation_for(rot, eye),
                       intrinsics=intrinsics)


def _obj(object_id, category, color_name, center, size, support,
         manipulable=True, receptacle=False) -> ObjectState:
    return ObjectState(
        id=object_id,
        category=category,
        center=np.asarray(center, dtype=float),
        size=np.asarray(size, dtype=float),
        rotation=Rotation.identity(),
        color=NAMED_COLORS[color_name],
        support_id=support,
        manipulable=manipulable,
        is_receptacle=receptacle,
    )


def tabletop_small() -> Scene:
    """A table with five small manipulable objects and an open basket."""
    objects = (
        _obj("table", "table", "brown", (0.0, 0.0, 0.374), (1.6, 1.0, 0.748),
             "floor", manipulable=False),
        _obj("blk_red", "block", "red", (-0.45, 0.05, 0.78),
             (0.08, 0.05, 0.06), "tabletop"),
        _obj("blk_blue", "block", "blue", (0.3, -0.15, 0.785),
             (0.06, 0.09, 0.07), "tabletop"),
        _obj("book_green", "book", "green", (-0.05, -0.25, 0.77),
             (0.14, 0.1, 0.04), "tabletop"),
        _obj("cup_yellow", "cup", "yellow", (0.05, 0.18, 0.79),
             (0.05, 0.05, 0.08), "tabletop"),
        _obj("box_purple", "box", "purple", (0.5, 0.2, 0.78),
             (0.12, 0.07, 0.06), "tabletop"),
        _obj("basket", "basket", "cyan", (-0.35, -0.28, 0.8),
             (0.36, 0.28, 0.1), "tabletop", manipulable=False,
             receptacle=True),
    )
    scene = Scene(
        objects=objects,
        camera=_camera((0.0, -1.7, 1.5), (0.0, 0.0, 0.78)),
        floor=Rect(-2.0, -2.0, 2.0, 2.0),
        surfaces=(Surface("tabletop", Rect(-0.78, -0.48, 0.78, 0.48), 0.75),),
        name="tabletop-small",
    )
    validate_scene(scene)
    return scene


def room_small() -> Scene:
    """Two floor areas separated by a full-width divider, for multi-room
    viewpoint curation."""
    objects = (
        _obj("divider", "divider", "white", (0.0, 0.0, 0.6), (0.5, 4.0, 1.2),
             "floor", manipulable=False),
        _obj("crate_red", "crate", "red", (-1.8, 0.5, 0.15), (0.3, 0.3, 0.3),
             "floor"),
        _obj("crate_green", "crate", "green", (-1.2, -0.8, 0.125),
             (0.25, 0.35, 0.25), "floor"),
        _obj("bin_orange", "bin", "orange", (1.5, 0.6, 0.2), (0.4, 0.3, 0.4),
             "floor"),
        _obj("box_teal", "box", "teal", (2.0, -0.7, 0.1), (0.2, 0.2, 0.2),
             "floor"),
        _obj("box_magenta", "box", "magenta", (1.0, -0.3, 0.09),
             (0.18, 0.24, 0.18), "floor"),
    )
    scene = Scene(
        objects=objects,
        camera=_camera((-2.5, -1.5, 1.5), (0.0, 0.0, 0.5)),
        floor=Rect(-3.0, -2.0, 3.0, 2.0),
        surfaces=(),
        name="room-small",
    )
    validate_scene(scene)
    return scene


ENVIRONMENTS = {
    "tabletop-small": tabletop_small,
    "room-small": room_small,
}


def get_env(name: str) -> Scene:
    try:
        return ENVIRONMENTS[name]()
    except KeyError:
        raise KeyError(
            f"unknown environment {name!r}; available: {sorted(ENVIRONMENTS)}"
        ) from None
