"""Tests for response models, scenes, and shared value types."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersia.core import (
    Atom,
    ConductingSphere,
    GreenTensorValue,
    HalfSpace,
    MaterialResponse,
    PerfectPlate,
    Polarizability,
    Regime,
    Scene,
    SceneValidationError,
    Slab,
    TensorKind,
    UnitsConvention,
    evaluate_response,
    require_regime_compatible,
    scene_from_json,
)


class TestEvaluateResponse:
    def test_static_is_constant(self):
        m = MaterialResponse.static(11.7)
        assert evaluate_response(m, 3.2) == 11.7

    def test_resonance_polarizability_at_omega(self):
        p = Polarizability.resonance(1.0, 1.0)
        assert evaluate_response(p, 1.0) == pytest.approx(0.5)

    def test_resonance_epsilon_zero_frequency(self):
        m = MaterialResponse.resonance(5.0, 2.0)
        assert evaluate_response(m, 0.0) == pytest.approx(5.0)

    def test_perfect_flag_value(self):
        m = MaterialResponse.perfect()
        assert math.isinf(evaluate_response(m, 1.0))

    def test_atom_delegates_to_polarizability(self):
        atom = Atom((0, 0, 1), Polarizability.resonance(2.0, 1.0))
        assert evaluate_response(atom, 1.0) == pytest.approx(1.0)

    def test_rejects_negative_xi(self):
        with pytest.raises(ValueError):
            evaluate_response(MaterialResponse.static(2.0), -1.0)

    def test_rejects_non_finite_xi(self):
        with pytest.raises(ValueError):
            evaluate_response(MaterialResponse.static(2.0), math.nan)

    def test_vectorized_evaluation(self):
        m = MaterialResponse.resonance(3.0, 1.0)
        xi = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(m.at(xi), [3.0, 2.0, 1.4])

    @settings(max_examples=40, deadline=None)
    @given(
        xi1=st.floats(min_value=0.0, max_value=50.0),
        xi2=st.floats(min_value=0.0, max_value=50.0),
        eps=st.floats(min_value=1.0, max_value=100.0),
        omega=st.floats(min_value=0.01, max_value=10.0),
    )
    def test_electric_models_nonincreasing(self, xi1, xi2, eps, omega):
        lo, hi = sorted((xi1, xi2))
        m = MaterialResponse.resonance(eps, omega)
        assert evaluate_response(m, lo) >= evaluate_response(m, hi)
        p = Polarizability.resonance(eps, omega)
        assert evaluate_response(p, lo) >= evaluate_response(p, hi)

    def test_chi_nonnegative(self):
        m = MaterialResponse.resonance(4.0, 1.0)
        for xi in (0.0, 0.5, 3.0):
            assert m.chi(xi) >= 0

    def test_zeta_sign_opposite_mu_minus_one(self):
        para = MaterialResponse.resonance(2.0, 1.0, role="magnetic")
        assert para.zeta(1.0) < 0
        dia = MaterialResponse.static(0.5, role="magnetic")
        assert dia.zeta(1.0) > 0


class TestModelValidation:
    def test_electric_below_one_rejected(self):
        with pytest.raises(SceneValidationError):
            MaterialResponse.static(0.5, "electric")

    def test_magnetic_positive_allowed(self):
        m = MaterialResponse.static(0.5, "magnetic")
        assert m.at(0.0) == 0.5

    def test_magnetic_nonpositive_rejected(self):
        with pytest.raises(SceneValidationError):
            MaterialResponse.static(0.0, "magnetic")

    def test_resonance_needs_omega(self):
        with pytest.raises(SceneValidationError):
            MaterialResponse("resonance", 5.0, None)

    def test_polarizability_positive(self):
        with pytest.raises(SceneValidationError):
            Polarizability.static(-1.0)

    def test_perfect_is_electric_only(self):
        with pytest.raises(SceneValidationError):
            MaterialResponse("perfect", role="magnetic")


class TestScene:
    def test_single_body_limit(self):
        with pytest.raises(SceneValidationError):
            Scene(bodies=(PerfectPlate(), PerfectPlate()))

    def test_atom_inside_halfspace_rejected(self):
        atom = Atom((0, 0, -1.0), Polarizability.static(1.0))
        with pytest.raises(SceneValidationError):
            Scene(
                bodies=(HalfSpace(MaterialResponse.static(2.0)),),
                atoms=(atom,),
            )

    def test_atom_on_surface_rejected(self):
        atom = Atom((0, 0, 0.0), Polarizability.static(1.0))
        with pytest.raises(SceneValidationError):
            Scene(bodies=(PerfectPlate(),), atoms=(atom,))

    def test_atom_inside_sphere_rejected(self):
        sphere = ConductingSphere(1.0, (0, 0, 0))
        atom = Atom((0.5, 0, 0), Polarizability.static(1.0))
        with pytest.raises(SceneValidationError):
            Scene(bodies=(sphere,), atoms=(atom,))

    def test_valid_scene(self):
        scene = Scene(
            bodies=(HalfSpace(MaterialResponse.static(3.0)),),
            atoms=(Atom((0, 0, 1.0), Polarizability.static(1.0)),),
        )
        assert scene.body is not None
        assert len(scene.atoms) == 1

    def test_empty_scene(self):
        assert Scene().body is None

    def test_slab_validation(self):
        with pytest.raises(SceneValidationError):
            Slab(0.0, MaterialResponse.static(2.0))


class TestRegime:
    def test_retarded_rejects_dispersive_media(self):
        scene = Scene(
            bodies=(HalfSpace(MaterialResponse.resonance(3.0, 1.0)),),
        )
        with pytest.raises(SceneValidationError):
            require_regime_compatible(scene, Regime.RETARDED)

    def test_retarded_rejects_dispersive_atom(self):
        scene = Scene(
            bodies=(PerfectPlate(),),
            atoms=(Atom((0, 0, 1.0), Polarizability.resonance(1.0, 1.0)),),
        )
        with pytest.raises(SceneValidationError):
            require_regime_compatible(scene, Regime.RETARDED)

    def test_retarded_accepts_static_and_perfect(self):
        scene = Scene(
            bodies=(HalfSpace(MaterialResponse.perfect()),),
            atoms=(Atom((0, 0, 1.0), Polarizability.static(1.0)),),
        )
        require_regime_compatible(scene, Regime.RETARDED)

    def test_other_regimes_accept_dispersive(self):
        scene = Scene(
            bodies=(HalfSpace(MaterialResponse.resonance(3.0, 1.0)),),
        )
        require_regime_compatible(scene, Regime.NONRETARDED)
        require_regime_compatible(scene, Regime.FULL_DISPERSIVE)


class TestGreenTensorValue:
    def test_shape_enforced(self):
        with pytest.raises(ValueError):
            GreenTensorValue(np.zeros((2, 2)), TensorKind.BULK)

    def test_immutable_components(self):
        g = GreenTensorValue(np.eye(3), TensorKind.BULK)
        with pytest.raises(ValueError):
            g.components[0, 0] = 5.0

    def test_trace(self):
        g = GreenTensorValue(np.diag([1.0, 2.0, 3.0]), TensorKind.SCATTERING)
        assert g.trace == 6.0


class TestUnits:
    def test_to_si_potential(self):
        u = UnitsConvention(length_unit_si=1e-9)
        # U_nat = 1 at L = 1 nm: hbar*c/L ~ 3.16e-17 J
        val = u.to_si(1.0, 1)
        assert val == pytest.approx(3.1615e-17, rel=1e-3)

    def test_no_unit_raises(self):
        with pytest.raises(ValueError):
            UnitsConvention(None).to_si(1.0, 1)


class TestSceneJson:
    def test_round_trip_halfspace(self):
        text = json.dumps(
            {
                "bodies": [
                    {
                        "type": "half_space",
                        "epsilon": {"model": "static", "value": 11.7},
                        "mu": {"model": "static", "value": 1.5},
                    }
                ],
                "atoms": [
                    {
                        "position": [0, 0, 1.0],
                        "alpha": {"model": "static", "value": 1.0},
                    }
                ],
            }
        )
        scene = scene_from_json(text)
        body = scene.body
        assert isinstance(body, HalfSpace)
        assert body.epsilon.at(0.0) == 11.7
        assert body.mu.at(0.0) == 1.5
        assert scene.atoms[0].position == (0.0, 0.0, 1.0)

    def test_perfect_plate_and_resonance_atom(self):
        scene = scene_from_json(
            {
                "bodies": [{"type": "perfect_plate"}],
                "atoms": [
                    {
                        "position": [0, 0, 2.0],
                        "alpha": {"model": "resonance", "value": 1.0, "omega": 1.0},
                    }
                ],
            }
        )
        assert isinstance(scene.body, PerfectPlate)
        assert scene.atoms[0].polarizability.is_dispersive

    def test_slab_and_sphere(self):
        scene = scene_from_json(
            {
                "bodies": [
                    {
                        "type": "slab",
                        "d": 0.5,
                        "epsilon": {"model": "static", "value": 11.7},
                    }
                ],
                "atoms": [],
            }
        )
        assert isinstance(scene.body, Slab)
        assert scene.body.thickness == 0.5

        scene2 = scene_from_json(
            {
                "bodies": [
                    {"type": "sphere", "radius": 1.0, "center": [0, 0, -2.0]}
                ],
                "atoms": [],
            }
        )
        body = scene2.body
        assert isinstance(body, ConductingSphere)
        assert body.center == (0.0, 0.0, -2.0)
        assert body.grounded is False

    def test_length_unit(self):
        scene = scene_from_json({"bodies": [], "atoms": [], "length_unit_si": 1e-9})
        assert scene.length_unit_si == 1e-9

    def test_rejects_unknown_keys(self):
        with pytest.raises(SceneValidationError):
            scene_from_json({"bodies": [], "atoms": [], "extra": 1})
        with pytest.raises(SceneValidationError):
            scene_from_json({"bodies": [{"type": "perfect_plate", "x": 1}]})

    def test_rejects_bad_json_text(self):
        with pytest.raises(SceneValidationError):
            scene_from_json("{not json")

    def test_rejects_perfect_alpha(self):
        with pytest.raises(SceneValidationError):
            scene_from_json(
                {
                    "bodies": [],
                    "atoms": [
                        {"position": [0, 0, 1], "alpha": {"model": "perfect"}}
                    ],
                }
            )

    def test_rejects_atom_inside_body(self):
        with pytest.raises(SceneValidationError):
            scene_from_json(
                {
                    "bodies": [{"type": "perfect_plate"}],
                    "atoms": [
                        {
                            "position": [0, 0, -1.0],
                            "alpha": {"model": "static", "value": 1.0},
                        }
                    ],
                }
            )
