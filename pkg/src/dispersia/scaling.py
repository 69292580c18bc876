"""Scene scaling, power-law verification, scale functions, and maps.

This module turns the engines of :mod:`dispersia.potentials` into the
package's headline diagnostics:

* :func:`scale_scene` applies the uniform geometric dilation under which
  dispersion interactions obey universal power laws — every length in the
  scene (atom positions, slab thickness, sphere radius and centre) is
  multiplied by the factor while all response models keep their values.
* :func:`measure_exponent` evaluates one interaction quantity on a family
  of scaled scenes, fits ``value = A * a**p``, and compares the fitted
  exponent with the universal expectation for that quantity and regime.
* :func:`verify_scaling_laws` runs the full 12-cell survey (four
  quantities, three regime columns) on canonical scenes.
* :func:`scale_function` extracts the dimensionless saturation curves
  ``f(x)`` that carry all finite-size information for a slab of thickness
  ``d = x*z`` and a sphere of radius ``R = x*z``.
* :func:`enhancement_map` maps the plate-induced enhancement ratio of the
  two-atom potential next to an ideal mirror.

All quantities use the conventions of :mod:`dispersia.potentials`
(hbar = c = 1, lengths in units of an inverse resonance frequency).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Atom,
    ConductingSphere,
    HalfSpace,
    MaterialResponse,
    PerfectPlate,
    Polarizability,
    Regime,
    Scene,
    SceneValidationError,
    Slab,
)
from .potentials import (
    _as_regime,
    cp_force,
    cp_potential,
    lifshitz_pressure,
    vdw_potential,
)
from .quadrature import (
    NonConvergenceError,
    QuadratureConfig,
    fit_power_law,
)

__all__ = [
    "EnhancementMap",
    "MapGridSpec",
    "ScaleFunctionCurve",
    "ScalingReport",
    "enhancement_map",
    "measure_exponent",
    "scale_function",
    "scale_scene",
    "verify_scaling_laws",
]

QUANTITIES = ("cp", "cp_force", "vdw_U0", "vdw_U1", "pressure")

#: Universal exponents by quantity and regime column: the long-distance
#: (retarded) laws, the short-distance laws near electric bodies, and the
#: short-distance laws near purely magnetic bodies.
_EXPECTED_EXPONENTS = {
    "cp": {
        "long-distance": -4.0,
        "nonretarded-electric": -3.0,
        "nonretarded-magnetic": -1.0,
    },
    "cp_force": {
        "long-distance": -5.0,
        "nonretarded-electric": -4.0,
        "nonretarded-magnetic": -2.0,
    },
    "vdw_U0": {
        "long-distance": -7.0,
        "nonretarded-electric": -6.0,
        "nonretarded-magnetic": -6.0,
    },
    "vdw_U1": {
        "long-distance": -7.0,
        "nonretarded-electric": -6.0,
        "nonretarded-magnetic": -4.0,
    },
    "pressure": {
        "long-distance": -4.0,
        "nonretarded-electric": -3.0,
        "nonretarded-magnetic": -3.0,
    },
}

#: Zero-frequency permittivity of silicon, the default slab material.
SILICON_EPSILON = 11.7


# ---------------------------------------------------------------------------
# scene dilation
# ---------------------------------------------------------------------------


def _check_scale_factor(a) -> float:
    if isinstance(a, bool) or not isinstance(a, (int, float)):
        raise SceneValidationError("scale factor must be a real number")
    a = float(a)
    if not (math.isfinite(a) and a > 0.0):
        raise SceneValidationError("scale factor must be positive and finite")
    return a


def _scale_body(body, a: float):
    if isinstance(body, PerfectPlate):
        return body
    if isinstance(body, HalfSpace):
        return body
    if isinstance(body, Slab):
        return Slab(a * body.thickness, body.epsilon, body.mu)
    if isinstance(body, ConductingSphere):
        return ConductingSphere(
            radius=a * body.radius,
            center=tuple(a * c for c in body.center),
            grounded=body.grounded,
        )
    raise SceneValidationError(f"unknown body type {type(body).__name__}")


def scale_scene(scene: Scene, a) -> Scene:
    """Dilate every length in the scene by the factor ``a``.

    Atom positions, the slab thickness, and the sphere radius and centre
    are multiplied by ``a``; polarizabilities and material responses keep
    their models and values (the response at a point follows the point).
    Plates and half-spaces bound the same ``z = 0`` plane and are
    unchanged.

    Parameters
    ----------
    scene : Scene
        The arrangement to dilate.
    a : float
        Scale factor, positive and finite.

    Returns
    -------
    Scene
        The dilated arrangement.  ``scale_scene(scene, 1.0)`` compares
        equal to ``scene``, and dilations compose:
        ``scale_scene(scale_scene(s, a), b) == scale_scene(s, a * b)`` up
        to floating-point rounding of the products.
    """
    a = _check_scale_factor(a)
    bodies = tuple(_scale_body(body, a) for body in scene.bodies)
    atoms = tuple(
        Atom(tuple(a * c for c in atom.position), atom.polarizability)
        for atom in scene.atoms
    )
    return Scene(
        bodies=bodies, atoms=atoms, length_unit_si=scene.length_unit_si
    )


# ---------------------------------------------------------------------------
# exponent measurement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingReport:
    """Fitted power law of one quantity under uniform scene dilation.

    Attributes
    ----------
    quantity : str
        One of :data:`QUANTITIES`.
    regime : Regime
        Frequency-integration regime the quantity was evaluated in.
    column : str
        Regime column of the universal table the measurement belongs to:
        "long-distance", "nonretarded-electric", or "nonretarded-magnetic".
    exponent : float
        Fitted exponent p of value = amplitude * a**p.
    expected : float
        Universal exponent for this quantity and column.
    amplitude : float
        Signed fitted prefactor.
    samples : tuple of (float, float)
        The (a, value) pairs that entered the fit.
    warning : str or None
        Set when the scaled distances leave the validity window of the
        requested regime; the fit is still reported.
    """

    quantity: str
    regime: Regime
    column: str
    exponent: float
    expected: float
    amplitude: float
    samples: tuple
    warning: str | None = None

    @property
    def deviation(self) -> float:
        """Absolute difference between fitted and expected exponent."""
        return abs(self.exponent - self.expected)


def _is_purely_magnetic(body) -> bool:
    if isinstance(body, (HalfSpace, Slab)):
        return body.epsilon.is_vacuum and not body.mu.is_vacuum
    return False


def _table_column(scene: Scene, regime: Regime) -> str:
    if regime == Regime.RETARDED:
        return "long-distance"
    if scene.bodies and all(_is_purely_magnetic(b) for b in scene.bodies):
        return "nonretarded-magnetic"
    return "nonretarded-electric"


def _dispersive_omegas(scene: Scene) -> list[float]:
    omegas = []
    for atom in scene.atoms:
        if atom.polarizability.model == "resonance":
            omegas.append(atom.polarizability.omega)
    for body in scene.bodies:
        if isinstance(body, (HalfSpace, Slab)):
            for model in (body.epsilon, body.mu):
                if model.model == "resonance":
                    omegas.append(model.omega)
    return omegas


def _characteristic_lengths(quantity: str, scene: Scene, gap) -> list[float]:
    if quantity == "pressure":
        return [float(gap)]
    lengths = []
    body = scene.body
    for atom in scene.atoms[: (1 if quantity in ("cp", "cp_force") else 2)]:
        if isinstance(body, ConductingSphere):
            lengths.append(
                math.dist(atom.position, body.center) - body.radius
            )
        elif body is not None:
            lengths.append(atom.position[2])
    if quantity in ("vdw_U0", "vdw_U1") and len(scene.atoms) >= 2:
        lengths.append(
            math.dist(scene.atoms[0].position, scene.atoms[1].position)
        )
    return lengths


def _window_warning(
    quantity: str, scene: Scene, regime: Regime, a_values, gap
) -> str | None:
    if regime != Regime.FULL_DISPERSIVE:
        return None
    omegas = _dispersive_omegas(scene)
    if not omegas:
        return None
    # the most restrictive resonance bounds the short-distance window
    window_lo = 1e-3 / max(omegas)
    window_hi = 1e-2 / max(omegas)
    lengths = _characteristic_lengths(quantity, scene, gap)
    for a in a_values:
        for length in lengths:
            scaled = a * length
            if not (
                window_lo * (1.0 - 1e-9) <= scaled <= window_hi * (1.0 + 1e-9)
            ):
                return (
                    f"scaled length {scaled:.6g} lies outside the "
                    f"short-distance fit window "
                    f"[{window_lo:.6g}, {window_hi:.6g}]"
                )
    return None


def _evaluate_quantity(
    quantity: str, scene: Scene, regime: Regime, gap, config
) -> float:
    if quantity == "cp":
        return float(cp_potential(scene.atoms[0], scene, regime, config))
    if quantity == "cp_force":
        return float(cp_force(scene.atoms[0], scene, regime, config)[2])
    if quantity in ("vdw_U0", "vdw_U1"):
        result = vdw_potential(
            scene.atoms[0], scene.atoms[1], scene, regime, config
        )
        return (
            result.free_space if quantity == "vdw_U0" else result.body_induced
        )
    side = scene.body
    return float(lifshitz_pressure(gap, side, side, regime, config))


def measure_exponent(
    quantity: str,
    scene: Scene,
    regime,
    a_samples,
    *,
    gap: float | None = None,
    config: QuadratureConfig | None = None,
) -> ScalingReport:
    """Fit the power law of one quantity under uniform scene dilation.

    The quantity is evaluated on ``scale_scene(scene, a)`` for every ``a``
    in ``a_samples`` and a least-squares power law is fitted through the
    (a, value) pairs; the report compares the fitted exponent with the
    universal expectation for the quantity and the regime column implied
    by the scene's materials.

    Parameters
    ----------
    quantity : str
        One of ``"cp"``, ``"cp_force"``, ``"vdw_U0"``, ``"vdw_U1"``,
        ``"pressure"``.  CP quantities use the scene's first atom, vdW
        quantities its first two; the pressure acts between two
        half-spaces carrying the scene body's materials.
    scene : Scene
        Base arrangement (dilation factor 1).
    regime : Regime or str
        Frequency-integration regime passed through to the engines.
    a_samples : sequence of float
        At least three distinct positive dilation factors.
    gap : float, optional
        Base cavity width, required for (and only for) ``"pressure"``;
        it is dilated along with the scene.
    config : QuadratureConfig, optional
        Quadrature settings for the underlying integrals.

    Returns
    -------
    ScalingReport

    Raises
    ------
    SceneValidationError
        On an unknown quantity, a scene lacking the atoms or body the
        quantity needs, or a missing/invalid ``gap`` for the pressure.
    """
    if quantity not in QUANTITIES:
        raise SceneValidationError(
            f"unknown quantity {quantity!r}; expected one of {QUANTITIES}"
        )
    regime = _as_regime(regime)
    if quantity in ("cp", "cp_force") and not scene.atoms:
        raise SceneValidationError(f"{quantity} needs an atom in the scene")
    if quantity in ("vdw_U0", "vdw_U1") and len(scene.atoms) < 2:
        raise SceneValidationError(f"{quantity} needs two atoms in the scene")
    if quantity == "pressure":
        if scene.body is None:
            raise SceneValidationError(
                "pressure needs a body supplying the cavity materials"
            )
        if gap is None or not (
            isinstance(gap, (int, float)) and math.isfinite(gap) and gap > 0
        ):
            raise SceneValidationError(
                "pressure needs a positive finite base gap"
            )
    elif gap is not None:
        raise SceneValidationError(
            f"gap applies only to the pressure, not {quantity!r}"
        )

    a_values = [_check_scale_factor(a) for a in a_samples]
    samples = []
    for a in a_values:
        scaled = scale_scene(scene, a)
        scaled_gap = a * gap if gap is not None else None
        samples.append(
            (a, _evaluate_quantity(quantity, scaled, regime, scaled_gap, config))
        )
    fit = fit_power_law(samples)
    column = _table_column(scene, regime)
    return ScalingReport(
        quantity=quantity,
        regime=regime,
        column=column,
        exponent=fit.exponent,
        expected=_EXPECTED_EXPONENTS[quantity][column],
        amplitude=fit.amplitude,
        samples=tuple(samples),
        warning=_window_warning(quantity, scene, regime, a_values, gap),
    )


# ---------------------------------------------------------------------------
# the 12-cell survey
# ---------------------------------------------------------------------------


def verify_scaling_laws(
    config: QuadratureConfig | None = None,
) -> tuple[ScalingReport, ...]:
    """Measure all 12 universal exponents on canonical scenes.

    Four quantities (single-atom potential, free-space and body-induced
    two-atom potentials, cavity pressure) are fitted in three regime
    columns each.  The long-distance column uses static models with the
    retarded engines and the electric short-distance column uses the
    quasi-static engines; both are exact power laws, so their fits check
    engine consistency at tight tolerance.  The purely magnetic
    short-distance column is fitted from the full dispersive engines on
    scenes sized into the short-distance window, where the universal law
    emerges only asymptotically.

    Returns
    -------
    tuple of ScalingReport
        Twelve reports, grouped by quantity (cp, vdw_U0, vdw_U1,
        pressure) with the columns long-distance, nonretarded-electric,
        nonretarded-magnetic inside each group.
    """
    a_samples = (1.0, 1.5, 2.0, 3.0)
    # the magnetic-column laws emerge asymptotically, so its samples stay
    # deep in the short-distance window (small dilations) and its atom
    # resonance sits below the medium's to damp retardation corrections
    a_magnetic = (1.0, 1.2, 1.5, 2.0)
    static_atom = Polarizability.static(1.0)
    london = Polarizability.resonance(1.0, 1.0)
    soft_atom = Polarizability.resonance(1.0, 0.1)
    magnetic_halfspace = HalfSpace(
        MaterialResponse.static(1.0),
        MaterialResponse.resonance(1.8, 1.0, "magnetic"),
    )
    resonant_dielectric = MaterialResponse.resonance(3.0, 1.0)
    z_short = 1.0e-3

    cp_scenes = (
        (
            Scene(
                bodies=(PerfectPlate(),),
                atoms=(Atom((0.0, 0.0, 1.0), static_atom),),
            ),
            Regime.RETARDED,
            None,
        ),
        (
            Scene(
                bodies=(HalfSpace(resonant_dielectric),),
                atoms=(Atom((0.0, 0.0, z_short), london),),
            ),
            Regime.NONRETARDED,
            None,
        ),
        (
            Scene(
                bodies=(magnetic_halfspace,),
                atoms=(Atom((0.0, 0.0, z_short), soft_atom),),
            ),
            Regime.FULL_DISPERSIVE,
            None,
        ),
    )
    vdw_scenes = (
        (
            Scene(
                bodies=(PerfectPlate(),),
                atoms=(
                    Atom((0.0, 0.0, 1.0), static_atom),
                    Atom((0.0, 0.0, 1.6), static_atom),
                ),
            ),
            Regime.RETARDED,
            None,
        ),
        (
            Scene(
                bodies=(PerfectPlate(),),
                atoms=(
                    Atom((0.0, 0.0, z_short), london),
                    Atom((0.0, 0.0, 2.0 * z_short), london),
                ),
            ),
            Regime.NONRETARDED,
            None,
        ),
        (
            Scene(
                bodies=(magnetic_halfspace,),
                atoms=(
                    Atom((0.0, 0.0, z_short), soft_atom),
                    Atom((0.0, 0.0, 2.0 * z_short), soft_atom),
                ),
            ),
            Regime.FULL_DISPERSIVE,
            None,
        ),
    )
    pressure_scenes = (
        (Scene(bodies=(PerfectPlate(),)), Regime.RETARDED, 1.0),
        (
            Scene(bodies=(HalfSpace(resonant_dielectric),)),
            Regime.NONRETARDED,
            z_short,
        ),
        (Scene(bodies=(magnetic_halfspace,)), Regime.FULL_DISPERSIVE, z_short),
    )

    def samples_for(regime):
        return a_magnetic if regime == Regime.FULL_DISPERSIVE else a_samples

    reports = []
    for scene, regime, _ in cp_scenes:
        reports.append(
            measure_exponent("cp", scene, regime, samples_for(regime), config=config)
        )
    for quantity in ("vdw_U0", "vdw_U1"):
        for scene, regime, _ in vdw_scenes:
            reports.append(
                measure_exponent(
                    quantity, scene, regime, samples_for(regime), config=config
                )
            )
    for scene, regime, gap in pressure_scenes:
        reports.append(
            measure_exponent(
                "pressure", scene, regime, samples_for(regime), gap=gap, config=config
            )
        )
    return tuple(reports)


# ---------------------------------------------------------------------------
# scale functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaleFunctionCurve:
    """Saturation curve f(x) of a finite-size body, with f(inf) = 1.

    Attributes
    ----------
    family : str
        "plate-thickness" (slab of thickness d = x*z, long-distance) or
        "sphere-radius" (conducting sphere of radius R = x*z at surface
        gap z, short-distance).
    samples : tuple of (float, float)
        The (x, f(x)) pairs, ascending in x.
    """

    family: str
    samples: tuple

    @property
    def x(self) -> np.ndarray:
        """Abscissas as an array."""
        return np.array([s[0] for s in self.samples])

    @property
    def f(self) -> np.ndarray:
        """Curve values as an array."""
        return np.array([s[1] for s in self.samples])


_FAMILY_ALIASES = {
    "plate": "plate-thickness",
    "plate-thickness": "plate-thickness",
    "sphere": "sphere-radius",
    "sphere-radius": "sphere-radius",
}


def _check_x_grid(x_grid) -> np.ndarray:
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise SceneValidationError("x_grid must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(xs)) or np.any(xs <= 0.0):
        raise SceneValidationError("x_grid values must be positive and finite")
    if np.any(np.diff(xs) <= 0.0):
        raise SceneValidationError("x_grid must be strictly ascending")
    return xs


def _plate_curve_value(x, z_ref, epsilon, config):
    atom = Atom((0.0, 0.0, z_ref), Polarizability.static(1.0))
    u_half = cp_potential(
        atom, Scene(bodies=(HalfSpace(epsilon),)), Regime.RETARDED, config
    )
    u_slab = cp_potential(
        atom,
        Scene(bodies=(Slab(x * z_ref, epsilon),)),
        Regime.RETARDED,
        config,
    )
    return u_slab / u_half


def _sphere_curve_value(x, z_ref, config):
    atom_alpha = Polarizability.resonance(1.0, 1.0)
    u_half = cp_potential(
        Atom((0.0, 0.0, z_ref), atom_alpha),
        Scene(bodies=(PerfectPlate(),)),
        Regime.NONRETARDED,
        config,
    )
    radius = x * z_ref
    u_sphere = cp_potential(
        Atom((0.0, 0.0, radius + z_ref), atom_alpha),
        Scene(bodies=(ConductingSphere(radius=radius),)),
        Regime.NONRETARDED,
        config,
    )
    return u_sphere / u_half


def scale_function(
    family: str,
    x_grid,
    config: QuadratureConfig | None = None,
    *,
    epsilon: MaterialResponse | None = None,
) -> ScaleFunctionCurve:
    """Saturation curve of a finite-size body against its half-space limit.

    Plate-thickness family: the long-distance potential of a static-
    polarizability atom at height z in front of a dielectric slab of
    thickness d = x*z, divided by the same atom's half-space potential,
    so f(x) -> 1 as the slab thickens.  The default material is silicon
    (static permittivity 11.7).  Sphere-radius family: the short-distance
    potential near a conducting sphere of radius R = x*z at surface gap
    z, divided by the ideal-mirror half-space potential at the same gap.

    Both ratios are independent of the reference height by scale
    invariance; the curve is computed at z = 1 and this invariance is
    verified at one grid point against z = 2.

    Parameters
    ----------
    family : str
        "plate-thickness" (alias "plate") or "sphere-radius" (alias
        "sphere").
    x_grid : sequence of float
        Strictly ascending positive abscissas x = d/z or R/z.
    config : QuadratureConfig, optional
        Quadrature settings.
    epsilon : MaterialResponse, optional
        Slab permittivity for the plate family (default: static silicon).

    Returns
    -------
    ScaleFunctionCurve

    Raises
    ------
    SceneValidationError
        On an unknown family or an invalid grid, or when ``epsilon`` is
        passed for the sphere family.
    NonConvergenceError
        When the reference-height invariance check fails, indicating an
        inconsistency between the quadratures at the two heights.
    """
    try:
        canonical = _FAMILY_ALIASES[family]
    except (KeyError, TypeError):
        raise SceneValidationError(
            f"unknown scale-function family {family!r}"
        ) from None
    xs = _check_x_grid(x_grid)

    if canonical == "plate-thickness":
        material = (
            epsilon
            if epsilon is not None
            else MaterialResponse.static(SILICON_EPSILON)
        )
        if material.role != "electric":
            raise SceneValidationError(
                "the plate family takes an electric response"
            )
        values = [_plate_curve_value(x, 1.0, material, config) for x in xs]
        evaluate = lambda x, z: _plate_curve_value(x, z, material, config)
    else:
        if epsilon is not None:
            raise SceneValidationError(
                "the sphere family is a perfect conductor; epsilon does not apply"
            )
        values = [_sphere_curve_value(x, 1.0, config) for x in xs]
        evaluate = lambda x, z: _sphere_curve_value(x, z, config)

    probe = xs[xs.size // 2]
    reference = values[xs.size // 2]
    other = evaluate(probe, 2.0)
    if not math.isclose(reference, other, rel_tol=1e-7):
        raise NonConvergenceError(
            "scale function is not invariant under the reference height: "
            f"f({probe:g}) = {reference:.12g} at z=1 vs {other:.12g} at z=2",
            best_estimate=reference,
            error_bound=abs(reference - other),
        )
    samples = tuple(
        (float(x), float(v)) for x, v in zip(xs, values)
    )
    return ScaleFunctionCurve(family=canonical, samples=samples)


# ---------------------------------------------------------------------------
# plate-assisted enhancement map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MapGridSpec:
    """Grid for the enhancement map, in units of the fixed atom's height.

    The grid spans transverse offsets x in [-half_width, half_width] and
    heights z in (0, height], with a disc of ``exclusion_radius`` around
    the fixed atom left out (marked NaN in the map).
    """

    half_width: float = 4.0
    height: float = 4.0
    nx: int = 161
    nz: int = 80
    exclusion_radius: float = 0.15

    def __post_init__(self):
        if not (
            math.isfinite(self.half_width)
            and self.half_width > 0
            and math.isfinite(self.height)
            and self.height > 0
        ):
            raise SceneValidationError("grid extents must be positive")
        if self.nx < 3 or self.nz < 2:
            raise SceneValidationError("grid needs nx >= 3 and nz >= 2")
        if not (
            math.isfinite(self.exclusion_radius)
            and 0.0 < self.exclusion_radius < self.height
        ):
            raise SceneValidationError(
                "exclusion radius must be positive and smaller than the grid"
            )


@dataclass(frozen=True)
class EnhancementMap:
    """Ratio of the two-atom potential to its free-space value on a grid.

    Attributes
    ----------
    z_b : float
        Height of the fixed atom above the mirror plane.
    x : ndarray, shape (nx,)
        Transverse positions of the movable atom (absolute lengths).
    z : ndarray, shape (nz,)
        Heights of the movable atom (absolute lengths).
    ratio : ndarray, shape (nz, nx)
        U / U_free at each (z, x); NaN inside the exclusion disc.
    grid_spec : MapGridSpec
        The grid the map was computed on.
    """

    z_b: float
    x: np.ndarray
    z: np.ndarray
    ratio: np.ndarray
    grid_spec: MapGridSpec = field(default_factory=MapGridSpec)

    @property
    def transverse_argmax(self) -> float:
        """|x| of the largest ratio along the grid row nearest z = z_b.

        Reported as a lobe-location proxy; note that the enhancement
        lobes of a plate-assisted pair sit near the surface, below the
        fixed atom's height, so on this row the ratio peaks at the
        exclusion-disc edge while its deviation from one peaks at the
        lobe's transverse distance (see ``transverse_deviation_argmax``).
        """
        row = self.ratio[int(np.argmin(np.abs(self.z - self.z_b)))]
        keep = ~np.isnan(row)
        return float(np.abs(self.x[keep][np.argmax(row[keep])]))

    @property
    def transverse_deviation_argmax(self) -> float:
        """|x| of the largest |ratio - 1| along the grid row nearest z = z_b."""
        row = self.ratio[int(np.argmin(np.abs(self.z - self.z_b)))]
        keep = ~np.isnan(row)
        return float(np.abs(self.x[keep][np.argmax(np.abs(row[keep] - 1.0))]))


def _map_ratio(position, atom_b, scene, alpha, config) -> float:
    result = vdw_potential(
        Atom(position, alpha), atom_b, scene, Regime.RETARDED, config
    )
    return result.total / result.free_space


def enhancement_map(
    z_b: float,
    grid_spec: MapGridSpec | None = None,
    config: QuadratureConfig | None = None,
    *,
    workers: int | None = None,
) -> EnhancementMap:
    """Map the plate-induced enhancement of the two-atom potential.

    One static-polarizability atom is fixed at height ``z_b`` above an
    ideal mirror; a second sweeps a grid of transverse offsets and
    heights.  Each grid point records the ratio of the full long-distance
    two-atom potential (free-space plus plate-induced parts) to its
    free-space value.  The ratio is a pure geometry function — the two
    polarizability magnitudes cancel, which is verified at one grid point
    — and grid points inside the exclusion disc around the fixed atom are
    NaN.

    Parameters
    ----------
    z_b : float
        Height of the fixed atom, positive and finite.
    grid_spec : MapGridSpec, optional
        Grid extents and resolution in units of ``z_b``.
    config : QuadratureConfig, optional
        Quadrature settings.
    workers : int, optional
        Evaluate grid columns in this many threads.  The columns are
        gathered in grid order, so the result is identical to the serial
        map.  None or 1 evaluates serially.

    Returns
    -------
    EnhancementMap
    """
    if not (
        isinstance(z_b, (int, float)) and math.isfinite(z_b) and z_b > 0
    ):
        raise SceneValidationError("z_b must be positive and finite")
    z_b = float(z_b)
    spec = grid_spec if grid_spec is not None else MapGridSpec()
    if not isinstance(spec, MapGridSpec):
        raise SceneValidationError("grid_spec must be a MapGridSpec")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        raise SceneValidationError("workers must be a positive integer")

    alpha = Polarizability.static(1.0)
    atom_b = Atom((0.0, 0.0, z_b), alpha)
    scene = Scene(bodies=(PerfectPlate(),))
    exclusion = spec.exclusion_radius * z_b * (1.0 - 1e-12)

    zs = z_b * spec.height * (np.arange(1, spec.nz + 1) / spec.nz)
    if spec.nx % 2 == 1:
        # build an exactly antisymmetric transverse grid and exploit the
        # mirror symmetry of the arrangement about x = 0
        half_n = spec.nx // 2
        half = np.arange(half_n + 1) * (spec.half_width * z_b / half_n)
        xs = np.concatenate((-half[:0:-1], half))
        compute_cols = range(half_n, spec.nx)
        mirror = True
    else:
        xs = np.linspace(
            -spec.half_width * z_b, spec.half_width * z_b, spec.nx
        )
        compute_cols = range(spec.nx)
        mirror = False

    def column(xj: float) -> np.ndarray:
        values = np.full(spec.nz, np.nan)
        for i, zi in enumerate(zs):
            if math.hypot(xj, zi - z_b) < exclusion:
                continue
            values[i] = _map_ratio(
                (xj, 0.0, zi), atom_b, scene, alpha, config
            )
        return values

    ratio = np.full((spec.nz, spec.nx), np.nan)
    if workers is not None and workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(column, (xs[j] for j in compute_cols)))
        for j, values in zip(compute_cols, columns):
            ratio[:, j] = values
    else:
        for j in compute_cols:
            ratio[:, j] = column(xs[j])
    if mirror:
        half_n = spec.nx // 2
        ratio[:, :half_n] = ratio[:, :half_n:-1]

    # the ratio must not depend on the polarizability magnitudes
    valid = np.argwhere(np.isfinite(ratio))
    if valid.size:
        i, j = valid[len(valid) // 2]
        probe = _map_ratio(
            (xs[j], 0.0, zs[i]),
            Atom((0.0, 0.0, z_b), Polarizability.static(0.4)),
            scene,
            Polarizability.static(2.5),
            config,
        )
        if not math.isclose(probe, ratio[i, j], rel_tol=1e-10):
            raise NonConvergenceError(
                "enhancement ratio depends on the polarizability magnitudes: "
                f"{probe:.12g} vs {ratio[i, j]:.12g}",
                best_estimate=ratio[i, j],
                error_bound=abs(probe - ratio[i, j]),
            )

    return EnhancementMap(
        z_b=z_b, x=xs, z=zs, ratio=ratio, grid_spec=spec
    )
