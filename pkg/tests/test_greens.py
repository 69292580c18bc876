"""Tests for the Green-tensor building blocks.

Expected values come from hand-evaluated closed forms (free-space tensors,
image constructions, reflection-coefficient arithmetic, geometric series for
the sphere) and from an independent Gauss-Legendre volume integral for the
weak-contrast (Born) consistency check.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersia.core import GreenTensorValue, MaterialResponse, TensorKind
from dispersia.greens import (
    CoincidentPointsError,
    FresnelCoefficients,
    IMAGE_REFLECTION,
    curl_g0_nonretarded,
    free_tensor_batch,
    fresnel_imaginary,
    g0_nonretarded,
    g0_retarded,
    g1_halfspace,
    g1_perfect_plate,
    g1_slab,
    g1_sphere_nonretarded_potential_kernel,
    halfspace_diagonal_stacked_batch,
    mirror_point,
    plate_scattering_batch,
    quasi_static_image_kernel,
    quasi_static_image_trace_coincident,
    slab_reflection,
    sphere_kernel_closed_form,
)
from dispersia.quadrature import NonConvergenceError, QuadratureConfig

from oracles import first_born_halfspace

RNG_SEED = 20240817


def _random_pair(rng, plate=False):
    r = rng.uniform(-1.5, 1.5, size=3)
    rp = rng.uniform(-1.5, 1.5, size=3)
    if plate:
        r[2] = rng.uniform(0.2, 2.0)
        rp[2] = rng.uniform(0.2, 2.0)
    return r, rp


# ---------------------------------------------------------------------------
# Free space
# ---------------------------------------------------------------------------


class TestFreeSpace:
    def test_axial_unit_values(self):
        # u = 1 on the z axis: e^-1/(4 pi) * diag(3, 3, -4)
        value = g0_retarded((0.0, 0.0, 1.0), (0.0, 0.0, 0.0), 1.0)
        assert isinstance(value, GreenTensorValue)
        assert value.kind == TensorKind.BULK
        expected = math.exp(-1.0) / (4.0 * math.pi) * np.diag([3.0, 3.0, -4.0])
        np.testing.assert_allclose(value.components, expected, rtol=1e-14, atol=0)

    def test_transverse_direction(self):
        value = g0_retarded((2.0, 0.0, 0.0), (0.0, 0.0, 0.0), 0.5).components
        u = 1.0
        pref = math.exp(-1.0) / (4.0 * math.pi * 0.25 * 8.0)
        assert value[0, 0] == pytest.approx(pref * (3.0 - 7.0), rel=1e-14)
        assert value[1, 1] == pytest.approx(pref * 3.0, rel=1e-14)
        assert value[2, 2] == value[1, 1]
        assert value[0, 1] == 0.0

    def test_symmetric_and_even(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(25):
            r, rp = _random_pair(rng)
            xi = rng.uniform(0.1, 3.0)
            a = g0_retarded(r, rp, xi).components
            b = g0_retarded(rp, r, xi).components
            np.testing.assert_array_equal(a, a.T)
            np.testing.assert_array_equal(a, b)

    def test_retarded_scaling_identity(self):
        # a * G0(a r, a r', xi / a) == G0(r, r', xi)
        rng = np.random.default_rng(RNG_SEED + 1)
        for a in (0.5, 2.0, 3.0):
            r, rp = _random_pair(rng)
            xi = 0.9
            base = g0_retarded(r, rp, xi).components
            scaled = a * g0_retarded(a * r, a * rp, xi / a).components
            np.testing.assert_allclose(scaled, base, rtol=1e-13)

    def test_quasi_static_kernel_axial(self):
        value = g0_nonretarded((0.0, 0.0, 1.0), (0.0, 0.0, 0.0))
        expected = -np.diag([1.0, 1.0, -2.0]) / (4.0 * math.pi)
        np.testing.assert_allclose(value.components, expected, rtol=1e-15)
        assert value.trace == pytest.approx(0.0, abs=1e-16)

    def test_quasi_static_kernel_scaling(self):
        base = g0_nonretarded((0.3, -0.4, 0.5), (0.0, 0.1, -0.2)).components
        scaled = g0_nonretarded(
            (0.6, -0.8, 1.0), (0.0, 0.2, -0.4)
        ).components
        np.testing.assert_allclose(scaled, base / 8.0, rtol=1e-13)

    def test_quasi_static_is_low_frequency_limit(self):
        # physical tensor -K0/xi^2 matches the retarded tensor as xi -> 0
        r, rp = (0.2, 0.5, -0.3), (-0.4, 0.1, 0.6)
        xi = 1e-5
        kernel = g0_nonretarded(r, rp).components
        retarded = g0_retarded(r, rp, xi).components
        np.testing.assert_allclose(-kernel / xi**2, retarded, rtol=1e-4)

    def test_curl_axial_value(self):
        value = curl_g0_nonretarded((0.0, 0.0, 1.0), (0.0, 0.0, 0.0))
        assert value.kind == TensorKind.CURL_LEFT
        expected = -np.array(
            [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
        ) / (4.0 * math.pi)
        np.testing.assert_allclose(value.components, expected, rtol=1e-15)

    def test_curl_antisymmetric(self):
        rng = np.random.default_rng(RNG_SEED + 2)
        r, rp = _random_pair(rng)
        c = curl_g0_nonretarded(r, rp).components
        np.testing.assert_allclose(c, -c.T, atol=1e-16)

    def test_coincident_points_raise(self):
        with pytest.raises(CoincidentPointsError):
            g0_retarded((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), 1.0)
        with pytest.raises(CoincidentPointsError):
            g0_nonretarded((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))

    def test_invalid_frequency_raises(self):
        for xi in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                g0_retarded((0.0, 0.0, 1.0), (0.0, 0.0, 0.0), xi)

    @given(
        st.floats(0.05, 5.0),
        st.floats(0.2, 4.0),
    )
    @settings(max_examples=30, deadline=None)
    def test_trace_positive_and_decaying(self, xi, rho):
        # trace = e^-u (3 + 3u + 3u^2 - 3 - 3u - u^2)/(...) = 2u^2 e^-u ... > 0
        value = g0_retarded((0.0, 0.0, rho), (0.0, 0.0, 0.0), xi)
        assert value.trace > 0


# ---------------------------------------------------------------------------
# Perfectly conducting plate
# ---------------------------------------------------------------------------


class TestPerfectPlate:
    def test_kind_and_finite_coincident(self):
        value = g1_perfect_plate((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 1.0)
        assert value.kind == TensorKind.SCATTERING
        assert np.all(np.isfinite(value.components))

    def test_coincident_trace_closed_form(self):
        # Tr G1(r, r) = -(2 + 2u + u^2) e^-u / (16 pi xi^2 z^3), u = 2 xi z
        for z, xi in [(0.5, 0.7), (1.0, 1.0), (2.0, 0.3)]:
            u = 2.0 * xi * z
            expected = (
                -(2.0 + 2.0 * u + u**2)
                * math.exp(-u)
                / (16.0 * math.pi * xi**2 * z**3)
            )
            value = g1_perfect_plate((0.0, 0.0, z), (0.0, 0.0, z), xi)
            assert value.trace == pytest.approx(expected, rel=1e-13)

    def test_equals_image_tensor(self):
        r, rp, xi = np.array([0.4, -0.2, 1.1]), np.array([0.1, 0.3, 0.6]), 0.8
        direct = g1_perfect_plate(r, rp, xi).components
        image = (
            g0_retarded(r, mirror_point(rp), xi).components @ IMAGE_REFLECTION
        )
        np.testing.assert_array_equal(direct, image)

    def test_reciprocity_exact(self):
        rng = np.random.default_rng(RNG_SEED + 3)
        for _ in range(50):
            r, rp = _random_pair(rng, plate=True)
            xi = rng.uniform(0.1, 2.5)
            a = g1_perfect_plate(r, rp, xi).components
            b = g1_perfect_plate(rp, r, xi).components
            np.testing.assert_array_equal(a, b.T)

    def test_scaling_identity(self):
        rng = np.random.default_rng(RNG_SEED + 4)
        for a in (0.5, 2.0, 3.0):
            r, rp = _random_pair(rng, plate=True)
            xi = 1.2
            base = g1_perfect_plate(r, rp, xi).components
            scaled = a * g1_perfect_plate(a * r, a * rp, xi / a).components
            np.testing.assert_allclose(scaled, base, rtol=1e-13)

    def test_points_below_surface_raise(self):
        with pytest.raises(ValueError):
            g1_perfect_plate((0.0, 0.0, -0.5), (0.0, 0.0, 0.5), 1.0)
        with pytest.raises(ValueError):
            g1_perfect_plate((0.0, 0.0, 0.5), (0.0, 0.0, 0.0), 1.0)

    def test_batch_matches_scalar(self):
        xis = np.array([0.3, 1.0, 2.4])
        batch = plate_scattering_batch((0.1, 0.2, 0.9), (0.0, -0.3, 0.7), xis)
        for i, xi in enumerate(xis):
            single = g1_perfect_plate(
                (0.1, 0.2, 0.9), (0.0, -0.3, 0.7), xi
            ).components
            np.testing.assert_array_equal(batch[i], single)


# ---------------------------------------------------------------------------
# Fresnel coefficients
# ---------------------------------------------------------------------------


class TestFresnel:
    def test_vacuum_reflects_nothing(self):
        r_s, r_p = fresnel_imaginary(np.array([0.0, 1.0, 7.0]), 1.3, 1.0, 1.0)
        np.testing.assert_array_equal(r_s, 0.0)
        np.testing.assert_array_equal(r_p, 0.0)

    def test_perfect_conductor_branch(self):
        r_s, r_p = fresnel_imaginary(np.array([0.2, 2.0]), 0.7, math.inf, 1.0)
        np.testing.assert_array_equal(r_s, -1.0)
        np.testing.assert_array_equal(r_p, 1.0)

    def test_hand_evaluated_point(self):
        # eps = 3, mu = 1, xi = 1, kpar = 1: kappa = sqrt(2), kappa1 = 2
        r_s, r_p = fresnel_imaginary(1.0, 1.0, 3.0, 1.0)
        rt2 = math.sqrt(2.0)
        assert r_s == pytest.approx((rt2 - 2.0) / (rt2 + 2.0), rel=1e-14)
        assert r_p == pytest.approx((3.0 * rt2 - 2.0) / (3.0 * rt2 + 2.0), rel=1e-14)

    def test_signs_for_pure_media(self):
        # dielectric: r_p > 0, r_s < 0; magnetic: r_p < 0, r_s > 0
        r_s, r_p = fresnel_imaginary(0.8, 1.0, 4.0, 1.0)
        assert r_p > 0 and r_s < 0
        r_s, r_p = fresnel_imaginary(0.8, 1.0, 1.0, 3.0)
        assert r_p < 0 and r_s > 0

    def test_slab_arithmetic(self):
        # r = 1/2 and kappa1 d = ln 2 give exactly 0.4
        assert slab_reflection(0.5, math.log(2.0), 1.0) == pytest.approx(
            0.4, rel=1e-15
        )

    def test_slab_object_limits(self):
        refl_half = FresnelCoefficients(
            MaterialResponse.static(2.0), MaterialResponse.static(1.0, "magnetic")
        )
        refl_thick = FresnelCoefficients(
            MaterialResponse.static(2.0),
            MaterialResponse.static(1.0, "magnetic"),
            thickness=60.0,
        )
        kpar = np.array([0.5, 1.5])
        for a, b in zip(refl_half.evaluate(kpar, 1.0), refl_thick.evaluate(kpar, 1.0)):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


# ---------------------------------------------------------------------------
# Half-space and slab scattering tensors
# ---------------------------------------------------------------------------


class TestPlanarScattering:
    def test_conductor_matches_image(self):
        cases = [
            ((0.0, 0.0, 1.0), (0.0, 0.0, 0.7), 0.8),
            ((0.3, -0.2, 0.9), (0.7, 0.4, 1.2), 1.3),
            ((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 2.0),
        ]
        for r, rp, xi in cases:
            somm = g1_halfspace(r, rp, xi, math.inf).components
            image = g1_perfect_plate(r, rp, xi).components
            scale = np.linalg.norm(image)
            assert np.linalg.norm(somm - image) <= 1e-8 * scale

    def test_vacuum_halfspace_is_zero(self):
        value = g1_halfspace((0.0, 0.0, 1.0), (0.2, 0.0, 0.8), 1.0, 1.0)
        np.testing.assert_allclose(value.components, 0.0, atol=1e-12)

    def test_reciprocity_exact(self):
        eps = MaterialResponse.static(3.0)
        mu = MaterialResponse.static(1.5, "magnetic")
        rng = np.random.default_rng(RNG_SEED + 5)
        for _ in range(5):
            r, rp = _random_pair(rng, plate=True)
            xi = rng.uniform(0.3, 1.5)
            a = g1_halfspace(r, rp, xi, eps, mu).components
            b = g1_halfspace(rp, r, xi, eps, mu).components
            np.testing.assert_array_equal(a, b.T)

    def test_quasi_static_trace_limit(self):
        # small xi, static eps: trace -> -(eps-1)/(eps+1) / (8 pi xi^2 z^3)
        xi, z, eps = 1e-3, 0.8, 3.0
        value = g1_halfspace((0.0, 0.0, z), (0.0, 0.0, z), xi, MaterialResponse.static(eps))
        predicted = -((eps - 1.0) / (eps + 1.0)) / (8.0 * math.pi * xi**2 * z**3)
        assert value.trace == pytest.approx(predicted, rel=5e-3)

    def test_scaling_identity(self):
        # a * G1(a r, a r', xi / a) == G1(r, r', xi) for static media
        eps = MaterialResponse.static(4.0)
        mu = MaterialResponse.static(1.2, "magnetic")
        r = np.array([0.2, -0.1, 0.9])
        rp = np.array([-0.3, 0.4, 0.6])
        xi = 1.1
        base = g1_halfspace(r, rp, xi, eps, mu).components
        for a in (0.5, 2.0, 3.0):
            scaled = a * g1_halfspace(a * r, a * rp, xi / a, eps, mu).components
            np.testing.assert_allclose(scaled, base, rtol=1e-8)

    def test_weak_contrast_matches_volume_integral(self):
        # first Born approximation from an independent volume quadrature
        r, rp, xi, delta = (0.0, 0.0, 1.0), (0.35, 0.0, 0.8), 0.3, 1e-3
        somm = g1_halfspace(
            r, rp, xi, MaterialResponse.static(1.0 + delta)
        ).components
        born = first_born_halfspace(r, rp, xi, delta, n_phi=48, n_rad=40, n_depth=40)
        scale = np.linalg.norm(
            g0_retarded(r, mirror_point(rp), xi).components
        )
        assert np.linalg.norm(somm - born) <= 5e-6 * scale

    def test_antisymmetric_offdiagonal_block(self):
        value = g1_halfspace(
            (0.6, 0.0, 1.0), (0.0, 0.0, 0.8), 0.9, MaterialResponse.static(5.0)
        ).components
        assert value[0, 2] == pytest.approx(-value[2, 0], rel=1e-12)
        assert value[0, 1] == pytest.approx(0.0, abs=1e-15)
        assert value[1, 2] == pytest.approx(0.0, abs=1e-15)

    def test_slab_thick_limit_is_halfspace(self):
        eps = MaterialResponse.static(2.0)
        half = g1_halfspace((0.0, 0.0, 1.0), (0.0, 0.0, 0.8), 1.0, eps).components
        thick = g1_slab((0.0, 0.0, 1.0), (0.0, 0.0, 0.8), 1.0, 20.0, eps).components
        np.testing.assert_allclose(thick, half, rtol=1e-10)

    def test_slab_thin_limit_vanishes_linearly(self):
        eps = MaterialResponse.static(2.0)
        half = g1_halfspace((0.0, 0.0, 1.0), (0.0, 0.0, 0.8), 1.0, eps).components
        thin = g1_slab((0.0, 0.0, 1.0), (0.0, 0.0, 0.8), 1.0, 1e-6, eps).components
        thinner = g1_slab((0.0, 0.0, 1.0), (0.0, 0.0, 0.8), 1.0, 5e-7, eps).components
        assert np.linalg.norm(thin) <= 1e-4 * np.linalg.norm(half)
        ratio = np.linalg.norm(thin) / np.linalg.norm(thinner)
        assert ratio == pytest.approx(2.0, rel=1e-3)

    def test_invalid_slab_thickness(self):
        with pytest.raises(ValueError):
            g1_slab((0.0, 0.0, 1.0), (0.0, 0.0, 0.8), 1.0, 0.0, 2.0)

    def test_pair_batch_matches_single_frequency_calls(self):
        from dispersia.greens import planar_scattering_pair_batch

        refl = FresnelCoefficients(
            MaterialResponse.static(3.0),
            MaterialResponse.static(1.5, "magnetic"),
        )
        xis = np.array([0.4, 1.0, 2.2])
        for r, rp in [
            ((0.5, -0.3, 1.0), (0.0, 0.2, 0.8)),
            ((0.0, 0.0, 1.0), (0.0, 0.0, 0.6)),
        ]:
            batch = planar_scattering_pair_batch(
                r, rp, xis, refl, QuadratureConfig()
            )
            for i, xi in enumerate(xis):
                single = g1_halfspace(
                    r,
                    rp,
                    xi,
                    MaterialResponse.static(3.0),
                    MaterialResponse.static(1.5, "magnetic"),
                ).components
                np.testing.assert_allclose(
                    batch[i], single, rtol=1e-8, atol=1e-13 * np.abs(single).max()
                )

    def test_stacked_batch_matches_full_tensor(self):
        refl = FresnelCoefficients(
            MaterialResponse.static(2.5),
            MaterialResponse.static(1.4, "magnetic"),
        )
        xis = np.array([0.3, 1.1, 4.0])
        out = halfspace_diagonal_stacked_batch(1.7, xis, refl, QuadratureConfig())
        for i, xi in enumerate(xis):
            full = g1_halfspace(
                (0.0, 0.0, 1.0),
                (0.0, 0.0, 0.7),
                xi,
                MaterialResponse.static(2.5),
                MaterialResponse.static(1.4, "magnetic"),
            ).components
            assert out[i, 0] == pytest.approx(full[0, 0], rel=1e-9)
            assert out[i, 0] == pytest.approx(full[1, 1], rel=1e-9)
            assert out[i, 1] == pytest.approx(full[2, 2], rel=1e-9)


# ---------------------------------------------------------------------------
# Quasi-static planar image kernels
# ---------------------------------------------------------------------------


class TestQuasiStaticImage:
    def test_coincident_trace(self):
        for z in (0.3, 1.0, 2.5):
            for r0 in (1.0, 0.5, -0.25):
                kernel = quasi_static_image_kernel(
                    (0.0, 0.0, z), (0.0, 0.0, z), r0
                )
                expected = quasi_static_image_trace_coincident(z, r0)
                assert np.trace(kernel) == pytest.approx(expected, rel=1e-13)
                assert expected == pytest.approx(r0 / (8.0 * math.pi * z**3), rel=1e-15)

    def test_coincident_diagonal_structure(self):
        # K1(r, r) = (r0/(32 pi z^3)) diag(1, 1, 2)
        z, r0 = 0.7, 0.6
        kernel = quasi_static_image_kernel((0.0, 0.0, z), (0.0, 0.0, z), r0)
        base = r0 / (32.0 * math.pi * z**3)
        np.testing.assert_allclose(kernel, base * np.diag([1.0, 1.0, 2.0]), rtol=1e-13)

    def test_matches_sommerfeld_low_frequency(self):
        # full tensor ~ -K1/xi^2 as xi -> 0 for a static dielectric
        eps = 2.5
        r0 = (eps - 1.0) / (eps + 1.0)
        xi = 1e-3
        r, rp = (0.3, 0.0, 0.9), (0.0, 0.0, 0.6)
        kernel = quasi_static_image_kernel(r, rp, r0)
        full = g1_halfspace(r, rp, xi, MaterialResponse.static(eps)).components
        np.testing.assert_allclose(full, -kernel / xi**2, rtol=6e-3, atol=1e-3)


# ---------------------------------------------------------------------------
# Conducting sphere multipoles
# ---------------------------------------------------------------------------


class TestSphereKernel:
    def test_matches_closed_form(self):
        for z in (3.0, 1.3, 1.05):
            adaptive = g1_sphere_nonretarded_potential_kernel(z, 1.0)
            closed = sphere_kernel_closed_form(z, 1.0)
            assert adaptive == pytest.approx(closed, rel=1e-10)

    def test_grounded_adds_monopole(self):
        z, radius = 2.0, 1.0
        neutral = g1_sphere_nonretarded_potential_kernel(z, radius)
        grounded = g1_sphere_nonretarded_potential_kernel(z, radius, grounded=True)
        monopole = 2.0 * math.pi * radius / z**4
        assert grounded - neutral == pytest.approx(monopole, rel=1e-10)
        assert grounded == pytest.approx(
            sphere_kernel_closed_form(z, radius, grounded=True), rel=1e-10
        )

    def test_small_sphere_dipole_limit(self):
        # leading multipole: K ~ 12 pi R^3 / z^6
        radius, z = 1e-3, 1.0
        kernel = g1_sphere_nonretarded_potential_kernel(z, radius)
        assert kernel == pytest.approx(12.0 * math.pi * radius**3 / z**6, rel=1e-5)

    def test_near_contact_approaches_plane(self):
        # K -> pi / (z - R)^3 as the gap closes
        radius = 1.0
        z = 1.01 * radius
        kernel = g1_sphere_nonretarded_potential_kernel(z, radius)
        assert kernel == pytest.approx(math.pi / (z - radius) ** 3, rel=0.03)

    def test_monotone_in_radius(self):
        z = 2.0
        values = [
            g1_sphere_nonretarded_potential_kernel(z, radius)
            for radius in (0.2, 0.5, 1.0, 1.5, 1.9)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_inside_sphere_rejected(self):
        with pytest.raises(ValueError):
            g1_sphere_nonretarded_potential_kernel(0.9, 1.0)
        with pytest.raises(ValueError):
            g1_sphere_nonretarded_potential_kernel(1.0, 1.0)

    def test_cap_raises_with_best_estimate(self):
        with pytest.raises(NonConvergenceError) as info:
            g1_sphere_nonretarded_potential_kernel(1.05, 1.0, l_max=10)
        best = info.value.best_estimate
        assert 0.0 < best < sphere_kernel_closed_form(1.05, 1.0)
