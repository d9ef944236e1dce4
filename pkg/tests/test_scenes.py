"""Tests for the analytic scenes and the sparsity penalty."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snerg.scenes import (
    SparsityParams,
    eval_scene,
    make_scene,
    parse_scene_params,
    scene_names,
    smoothstep,
    sparsity_loss,
)


class TestSparsityLoss:
    def test_single_unit_density(self):
        # weight 1e-4, scale 1/2: loss = 1e-4 * log(1 + 1 / 0.5) = 1e-4 * ln 3.
        assert sparsity_loss([1.0]) == pytest.approx(1e-4 * math.log(3.0), rel=1e-12)

    def test_zero_density_is_zero(self):
        assert sparsity_loss(np.zeros(100)) == 0.0

    def test_additive_over_concatenation(self):
        rng = np.random.default_rng(0)
        a, b = rng.uniform(0, 10, 50), rng.uniform(0, 10, 70)
        total = sparsity_loss(np.concatenate([a, b]))
        assert total == pytest.approx(sparsity_loss(a) + sparsity_loss(b), rel=1e-12)

    def test_monotone_in_density(self):
        assert sparsity_loss([2.0]) > sparsity_loss([1.0]) > sparsity_loss([0.5])

    def test_custom_params(self):
        params = SparsityParams(weight=0.5, scale=2.0)
        assert sparsity_loss([2.0], params) == pytest.approx(0.5 * math.log(3.0), rel=1e-12)

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError):
            sparsity_loss([-1.0])
        with pytest.raises(ValueError):
            SparsityParams(weight=-1.0)
        with pytest.raises(ValueError):
            SparsityParams(scale=0.0)

    @given(st.lists(st.floats(min_value=0, max_value=100), max_size=20))
    @settings(max_examples=50, deadline=None)
    def test_non_negative(self, densities):
        assert sparsity_loss(densities) >= 0.0


class TestSmoothstep:
    def test_endpoints_and_midpoint(self):
        assert smoothstep(0.0) == 0.0
        assert smoothstep(1.0) == 1.0
        assert smoothstep(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_clamped(self):
        assert smoothstep(-3.0) == 0.0
        assert smoothstep(7.0) == 1.0


class TestRegistry:
    def test_names(self):
        assert scene_names() == ["enclosed-core", "lambert-spheres", "slab"]

    def test_unknown_scene_rejected(self):
        with pytest.raises(ValueError):
            make_scene("teapot")

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ValueError):
            make_scene("slab", wobble=3.0)

    def test_parse_scene_params(self):
        assert parse_scene_params(["sigma=4.5", "z0=-0.1"]) == {"sigma": 4.5, "z0": -0.1}
        with pytest.raises(ValueError):
            parse_scene_params(["sigma"])
        with pytest.raises(ValueError):
            parse_scene_params(["sigma=soft"])

    def test_seed_controls_mlp(self):
        a = make_scene("slab", seed=1)
        b = make_scene("slab", seed=1)
        c = make_scene("slab", seed=2)
        np.testing.assert_array_equal(a.mlp.weights[0], b.mlp.weights[0])
        assert np.any(a.mlp.weights[0] != c.mlp.weights[0])


class TestLambertSpheres:
    def test_density_at_sphere_centre_equals_peak(self):
        scene = make_scene("lambert-spheres")
        for centre, peak in zip(scene.centers, scene.peaks):
            sample = eval_scene(scene, centre)
            assert sample.density == pytest.approx(peak, rel=1e-12)

    def test_density_midway_through_falloff_is_half_peak(self):
        scene = make_scene("lambert-spheres")
        centre, radius, falloff = scene.centers[0], scene.radii[0], scene.falloffs[0]
        # Midway through the falloff shell [r - w, r]: distance r - w/2.
        point = centre + np.array([radius - falloff / 2.0, 0.0, 0.0])
        sample = eval_scene(scene, point)
        assert sample.density == pytest.approx(0.5 * scene.peaks[0], rel=1e-9)

    def test_density_zero_beyond_radius(self):
        scene = make_scene("lambert-spheres")
        point = scene.centers[0] + np.array([scene.radii[0] + 1e-6, 0.0, 0.0])
        # Clear of the other two spheres as well.
        assert eval_scene(scene, point).density == pytest.approx(0.0, abs=1e-12)

    def test_albedo_at_centre(self):
        scene = make_scene("lambert-spheres")
        sample = eval_scene(scene, scene.centers[1])
        np.testing.assert_allclose(sample.diffuse, scene.albedos[1], atol=1e-12)
        np.testing.assert_allclose(sample.feature, scene.features[1], atol=1e-12)

    def test_outside_bounds_zero_density(self):
        scene = make_scene("lambert-spheres")
        assert eval_scene(scene, (1.5, 0.0, 0.0)).density == 0.0

    def test_density_override(self):
        scene = make_scene("lambert-spheres", density=40.0)
        assert eval_scene(scene, scene.centers[0]).density == pytest.approx(40.0, rel=1e-12)

    def test_spheres_disjoint(self):
        scene = make_scene("lambert-spheres")
        for i in range(3):
            for j in range(i + 1, 3):
                gap = np.linalg.norm(scene.centers[i] - scene.centers[j])
                assert gap > scene.radii[i] + scene.radii[j]

    def test_batch_shapes(self):
        scene = make_scene("lambert-spheres")
        pts = np.zeros((5, 7, 3))
        density, diffuse, feature = scene.evaluate(pts)
        assert density.shape == (5, 7)
        assert diffuse.shape == (5, 7, 3)
        assert feature.shape == (5, 7, 4)


class TestSlab:
    def test_midpoint_sample(self):
        scene = make_scene("slab", sigma=8.0)
        sample = eval_scene(scene, (0.2, -0.3, 0.0))
        assert sample.density == 8.0
        np.testing.assert_allclose(sample.diffuse, scene.diffuse, atol=0)
        np.testing.assert_allclose(sample.feature, scene.feature, atol=0)

    def test_outside_planes_zero(self):
        scene = make_scene("slab")
        assert eval_scene(scene, (0.0, 0.0, 0.3)).density == 0.0
        assert eval_scene(scene, (0.0, 0.0, -0.3)).density == 0.0
        # Emissions stay defined in empty space.
        np.testing.assert_allclose(
            eval_scene(scene, (0.0, 0.0, 0.9)).diffuse, scene.diffuse, atol=0
        )

    def test_boundary_inclusive(self):
        scene = make_scene("slab", sigma=4.0, z0=-0.25, z1=0.25)
        assert eval_scene(scene, (0.0, 0.0, 0.25)).density == 4.0

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            make_scene("slab", sigma=-1.0)
        with pytest.raises(ValueError):
            make_scene("slab", z0=0.3, z1=0.1)


class TestEnclosedCore:
    def test_shell_opaque_and_core_distinct(self):
        scene = make_scene("enclosed-core")
        mid_shell = (scene.r_in + scene.r_out) / 2.0
        shell_sample = eval_scene(scene, (mid_shell, 0.0, 0.0))
        assert shell_sample.density == pytest.approx(scene.shell_density, rel=1e-9)
        np.testing.assert_allclose(shell_sample.diffuse, scene.shell_albedo, atol=1e-12)
        core_sample = eval_scene(scene, (0.0, 0.0, 0.0))
        assert core_sample.density == pytest.approx(scene.core_density, rel=1e-9)
        np.testing.assert_allclose(core_sample.diffuse, scene.core_albedo, atol=1e-12)

    def test_gap_between_core_and_shell_is_empty(self):
        scene = make_scene("enclosed-core")
        gap_radius = (scene.core_radius + scene.r_in) / 2.0
        assert eval_scene(scene, (0.0, gap_radius, 0.0)).density == pytest.approx(0.0, abs=1e-12)

    def test_core_must_fit_inside(self):
        with pytest.raises(ValueError):
            make_scene("enclosed-core", core_radius=0.5, r_in=0.45)


class TestEvalScene:
    def test_returns_sample_value(self):
        scene = make_scene("slab")
        sample = eval_scene(scene, (0.0, 0.0, 0.0))
        assert sample.density == scene.sigma
        assert sample.diffuse.shape == (3,)
        assert sample.feature.shape == (4,)

    def test_non_finite_point_rejected(self):
        scene = make_scene("slab")
        with pytest.raises(ValueError):
            eval_scene(scene, (np.nan, 0.0, 0.0))

    def test_channels_within_unit_interval_across_space(self):
        rng = np.random.default_rng(8)
        for name in scene_names():
            scene = make_scene(name)
            pts = rng.uniform(-1.2, 1.2, (2000, 3))
            density, diffuse, feature = scene.evaluate(pts)
            assert np.all(density >= 0)
            assert np.all((diffuse >= 0) & (diffuse <= 1))
            assert np.all((feature >= 0) & (feature <= 1))
