import math

import numpy as np
import pytest

from gsi_forge.errors import BehindCamera, InvalidMargin
from gsi_forge.geometry import (
    Intrinsics,
    Obb,
    PixelBox,
    Rotation,
    back_project,
    camera_pose_from_yaw_pitch,
    camera_position,
    geodesic_distance,
    look_at_rotation,
    obb_contains,
    obb_intersects,
    project_obb,
    project_point,
    translation_for,
)

CAM = Intrinsics(fx=100.0, fy=100.0, cx=50.0, cy=50.0, width=100, height=100)
IDENT = Rotation.identity()
ZERO = np.zeros(3)


def sample_obb_points(box: Obb, n: int = 20) -> np.ndarray:
    """Regular n^3 grid of points spanning the box volume (oracle helper)."""
    ticks = np.linspace(-1.0, 1.0, n)
    gx, gy, gz = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    local = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3) * box.half_extents
    return box.center + local @ box.rotation.m.T


def intersects_oracle(a: Obb, b: Obb, n: int = 20) -> bool:
    """Monte-Carlo style containment sampling: any grid point of one box
    inside the other. Independent of the separating-axis implementation."""
    for pts, other in ((sample_obb_points(a, n), b), (sample_obb_points(b, n), a)):
        local = (pts - other.center) @ other.rotation.m
        if np.any(np.all(np.abs(local) <= other.half_extents, axis=1)):
            return True
    return False


class TestRotation:
    def test_identity_round_trip(self):
        r = Rotation.about_z(0.7)
        assert np.allclose(r.compose(r.inverse()).m, np.eye(3))

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            Rotation(np.eye(3) * 2.0)

    def test_rejects_reflection(self):
        m = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            Rotation(m)

    def test_quaternion_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            r = Rotation.random(rng)
            r2 = Rotation.from_quaternion(r.to_quaternion())
            assert np.allclose(r2.m, r.m, atol=1e-12)

    def test_axis_angle_matches_named_constructors(self):
        assert np.allclose(
            Rotation.from_axis_angle((0, 0, 1), 0.4).m, Rotation.about_z(0.4).m
        )


class TestGeodesicDistance:
    def test_zero_for_equal(self):
        r = Rotation.about_x(1.1)
        assert geodesic_distance(r, r) == 0.0

    def test_quarter_turn(self):
        assert geodesic_distance(IDENT, Rotation.about_z(math.pi / 2)) == pytest.approx(
            math.pi / 2
        )

    def test_axis_angle_composition_oracle(self):
        # Two rotations about the same axis differ by the angle difference.
        assert geodesic_distance(
            Rotation.about_x(0.3), Rotation.about_x(0.7)
        ) == pytest.approx(0.4, abs=1e-12)

    def test_metric_axioms_on_random_triples(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            a, b, c = (Rotation.random(rng) for _ in range(3))
            dab = geodesic_distance(a, b)
            dba = geodesic_distance(b, a)
            assert abs(dab - dba) <= 1e-9
            assert 0.0 <= dab <= math.pi
            assert geodesic_distance(a, c) <= dab + geodesic_distance(b, c) + 1e-7
        assert geodesic_distance(a, a) == 0.0


class TestProjection:
    def test_optical_axis_point(self):
        px, depth = project_point((0, 0, 2), IDENT, ZERO, CAM)
        assert np.allclose(px, (50, 50))
        assert depth == 2.0

    def test_off_axis_point(self):
        px, depth = project_point((1, 0, 2), IDENT, ZERO, CAM)
        assert np.allclose(px, (100, 50))
        assert depth == 2.0

    def test_behind_camera(self):
        with pytest.raises(BehindCamera):
            project_point((0, 0, -1), IDENT, ZERO, CAM)

    def test_round_trip_recovers_point(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            rot = Rotation.random(rng)
            t = rng.uniform(-2, 2, size=3)
            p = rng.uniform(-3, 3, size=3)
            z = float((rot.m @ p + t)[2])
            if z <= 1e-3:
                continue
            px, depth = project_point(p, rot, t, CAM)
            p2 = back_project(px, depth, rot, t, CAM)
            assert np.linalg.norm(p2 - p) < 1e-6

    def test_camera_position_inverts_translation(self):
        rot = camera_pose_from_yaw_pitch((1.0, 2.0, 1.5), 0.3, -0.2)
        t = translation_for(rot, (1.0, 2.0, 1.5))
        assert np.allclose(camera_position(rot, t), (1.0, 2.0, 1.5))

    def test_look_at_points_forward(self):
        eye = np.array([0.0, -2.0, 1.0])
        target = np.array([0.0, 0.0, 0.0])
        rot = look_at_rotation(eye, target)
        pc = rot.m @ (target - eye)
        assert pc[2] == pytest.approx(np.linalg.norm(target - eye))
        assert abs(pc[0]) < 1e-12 and abs(pc[1]) < 1e-12


class TestObbIntersects:
    def test_identical_boxes(self):
        a = Obb((0, 0, 0), (1, 1, 1))
        assert obb_intersects(a, a)

    def test_gap_on_x_axis(self):
        a = Obb((0, 0, 0), (0.5, 0.5, 0.5))
        b = Obb((3, 0, 0), (0.5, 0.5, 0.5))
        assert not obb_intersects(a, b)

    def test_touching_faces_count_as_intersecting(self):
        a = Obb((0, 0, 0), (0.5, 0.5, 0.5))
        b = Obb((1.0, 0, 0), (0.5, 0.5, 0.5))
        assert obb_intersects(a, b)

    def test_rotated_pair_matches_sampling_oracle(self):
        a = Obb((0, 0, 0), (0.5, 0.5, 0.5))
        b = Obb((1.2, 1.2, 0), (0.5, 0.5, 0.5), Rotation.about_z(math.pi / 4))
        assert obb_intersects(a, b) == intersects_oracle(a, b)

    def test_agreement_with_oracle_on_random_pairs(self):
        rng = np.random.default_rng(42)
        disagreements = 0
        for _ in range(1000):
            a = Obb(rng.uniform(-1, 1, 3), rng.uniform(0.1, 0.8, 3),
                    Rotation.random(rng))
            b = Obb(rng.uniform(-1, 1, 3), rng.uniform(0.1, 0.8, 3),
                    Rotation.random(rng))
            got = obb_intersects(a, b)
            want = intersects_oracle(a, b)
            assert got == obb_intersects(b, a)
            if got != want:
                # The grid oracle misses slivers; only thin contacts may differ.
                assert got and not want
                disagreements += 1
        assert disagreements <= 10

    def test_deep_overlap_never_disagrees_with_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a = Obb(rng.uniform(-0.2, 0.2, 3), rng.uniform(0.4, 0.8, 3),
                    Rotation.random(rng))
            b = Obb(rng.uniform(-0.2, 0.2, 3), rng.uniform(0.4, 0.8, 3),
                    Rotation.random(rng))
            assert obb_intersects(a, b) and intersects_oracle(a, b)


class TestObbContains:
    def test_nested_cubes(self):
        outer = Obb((0, 0, 0), (1, 1, 1))
        inner = Obb((0, 0, 0), (0.4, 0.4, 0.4))
        assert obb_contains(outer, inner, 0.1)

    def test_offset_inner_escapes(self):
        outer = Obb((0, 0, 0), (1, 1, 1))
        inner = Obb((0.8, 0, 0), (0.4, 0.4, 0.4))
        assert not obb_contains(outer, inner, 0.1)

    def test_self_containment_zero_margin(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            box = Obb(rng.uniform(-1, 1, 3), rng.uniform(0.1, 1.0, 3),
                      Rotation.random(rng))
            assert obb_contains(box, box, 0.0)

    def test_invalid_margin(self):
        outer = Obb((0, 0, 0), (0.3, 1, 1))
        with pytest.raises(InvalidMargin):
            obb_contains(outer, outer, 0.3)

    def test_tilted_inner_matches_corner_oracle(self):
        outer = Obb((0, 0, 0), (1, 1, 1))
        rng = np.random.default_rng(21)
        for _ in range(200):
            inner = Obb(rng.uniform(-0.5, 0.5, 3), rng.uniform(0.1, 0.6, 3),
                        Rotation.about_z(math.radians(30)))
            margin = float(rng.uniform(0, 0.2))
            # Oracle: transform each corner explicitly and compare componentwise.
            want = all(
                np.all(np.abs(outer.rotation.m.T @ (c - outer.center))
                       <= outer.half_extents - margin + 1e-9)
                for c in inner.corners()
            )
            assert obb_contains(outer, inner, margin) == want


class TestProjectObb:
    def test_fully_visible_cube(self):
        box = Obb((0, 0, 4), (0.5, 0.5, 0.5))
        bbox, fraction = project_obb(box, IDENT, ZERO, CAM)
        assert fraction == 1.0
        assert not bbox.is_empty

    def test_behind_camera_gives_empty(self):
        box = Obb((0, 0, -4), (0.5, 0.5, 0.5))
        bbox, fraction = project_obb(box, IDENT, ZERO, CAM)
        assert fraction == 0.0
        assert bbox.is_empty

    def test_half_off_edge_fraction(self):
        # Box centered on the right image border: half the bbox is clipped.
        box = Obb((2, 0, 4), (0.5, 0.5, 1e-6 + 0.5))
        bbox, fraction = project_obb(box, IDENT, ZERO, CAM)
        assert 0.0 < fraction < 1.0

    def test_pixelbox_union_and_area(self):
        a = PixelBox(0, 0, 2, 2)
        b = PixelBox(1, 1, 4, 3)
        u = a.union(b)
        assert (u.x0, u.y0, u.x1, u.y1) == (0, 0, 4, 3)
        assert PixelBox.empty().union(a) == a
        assert PixelBox.empty().area == 0.0
