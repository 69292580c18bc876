"""Dispersion interaction energies built from the Green tensors.

Single-atom potentials and forces, two-atom potentials split into their
free-space and body-induced parts, the pressure between planar half-spaces,
and the short-distance coefficients of the planar single-atom potential.

Conventions (natural units, hbar = c = eps0 = mu0 = 1; alpha' = alpha/4pi eps0
carries units of length cubed):

* single atom:  U(r) = 2 * int_0^inf dxi xi^2 alpha'(i xi) Tr G1(r, r, i xi)
* two atoms:    U = -8 pi * int_0^inf dxi xi^4 alpha'_A alpha'_B
                    ||G(r_A, r_B, i xi)||_F^2           (reciprocity turns
                    Tr[G_AB G_BA] into a Frobenius norm)
* pressure:     P(z) = -(1/2 pi^2) int dxi int dkpar kpar kappa
                    sum_sigma y / (1 - y),  y = r1 r2 exp(-2 kappa z)

The global prefactors are pinned jointly by the perfect-plate closed form
-3 alpha'/(8 pi z^4) and the free-space closed form
-23 alpha'_A alpha'_B/(4 pi r^7), which the tests enforce.

Short-distance (quasi-static) engines use the frequency-rescaled kernels.
For a planar body the potential takes the two-term form -C3/z^3 + C1/z.
The coefficient of 1/z produced by the full engine is not the bare
s-polarization moment: expanding the reflection coefficients to next order
in inverse transverse momentum adds an electric cross term, giving

    C1 = (1/4 pi) int dxi xi^2 alpha'(i xi) [ (eps-1)/(eps+1)
          + (mu-1)/(mu+1) + 2 eps (eps mu - 1)/(eps+1)^2 ]

(for a perfect conductor the channels cancel and C1 = 0 exactly).  The
quasi-static *engine* keeps only the leading kernels of each polarization
(-C3/z^3 plus the bare s-channel term), while `nonretarded_halfspace_coefficients`
returns the operational C3 and C1 above, the ones a fit of the full
potential recovers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

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
    VACUUM_MAGNETIC,
    require_regime_compatible,
)
from .greens import (
    CoincidentPointsError,
    FresnelCoefficients,
    free_tensor_batch,
    g1_sphere_nonretarded_potential_kernel,
    halfspace_diagonal_stacked_batch,
    plate_scattering_batch,
    planar_scattering_pair_batch,
    quasi_static_free_kernel,
    quasi_static_image_kernel,
)
from .quadrature import (
    QuadratureConfig,
    gradient_fd,
    integrate_semi_infinite,
    integrate_semi_infinite_rows,
    integrate_semi_infinite_vector,
)

__all__ = [
    "VdwResult",
    "NonretardedCoefficients",
    "cp_potential",
    "cp_force",
    "vdw_potential",
    "lifshitz_pressure",
    "nonretarded_halfspace_coefficients",
]

_FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class VdwResult:
    """Two-atom potential split into its free-space and body-induced parts.

    Attributes
    ----------
    total : float
        Full potential; equals free_space + body_induced exactly (both parts
        are accumulated on one shared quadrature grid).
    free_space : float
        Contribution of the bulk tensor alone (body-independent).
    body_induced : float
        Mixed and pure-scattering contributions; zero for an empty scene.
    error_estimate : float
        Combined quadrature error estimate for the parts.
    """

    total: float
    free_space: float
    body_induced: float
    error_estimate: float = 0.0


@dataclass(frozen=True)
class NonretardedCoefficients:
    """Short-distance coefficients of the planar potential -C3/z^3 + C1/z.

    c3 is nonnegative for passive dielectrics; c1 is positive for purely
    magnetic media and carries the electric cross term otherwise.
    """

    c3: float
    c1: float
    c3_error: float = 0.0
    c1_error: float = 0.0


# ---------------------------------------------------------------------------
# shared validation and scales
# ---------------------------------------------------------------------------


def _as_regime(regime) -> Regime:
    return regime if isinstance(regime, Regime) else Regime(regime)


def _scene_with_atoms(scene: Scene, *atoms: Atom) -> Scene:
    """Re-validate the body/atom arrangement with the explicit atoms."""
    return Scene(bodies=scene.bodies, atoms=atoms)


def _body_models(body) -> tuple[MaterialResponse, ...]:
    if isinstance(body, (HalfSpace, Slab)):
        return (body.epsilon, body.mu)
    return ()


def _resonance_floor(models) -> float | None:
    """Smallest resonance frequency among dispersive response models."""
    omegas = [
        m.omega
        for m in models
        if m is not None and getattr(m, "is_dispersive", False)
    ]
    return min(omegas) if omegas else None


def _outer_scale(length: float, models) -> float:
    """Characteristic imaginary frequency of a retardation-damped integral."""
    base = 1.0 / (2.0 * length)
    omega = _resonance_floor(models)
    return min(omega, base) if omega is not None else base


def _moment_scale(models) -> float:
    """Characteristic frequency of an undamped response moment."""
    omega = _resonance_floor(models)
    return omega if omega is not None else 1.0


def _require_dispersive_atom(alpha: Polarizability, what: str) -> None:
    if not alpha.is_dispersive:
        raise SceneValidationError(
            f"{what} requires a dispersive (resonance) polarizability: "
            "the frequency integral of a static model diverges"
        )


def _quasi_static_strength(model: MaterialResponse):
    """Zero-frequency-limit reflection (m-1)/(m+1) as a function of xi.

    1 for a conductor; formed from the contrast chi = m - 1 as chi/(2 + chi)
    so the large-xi tail keeps full relative precision.
    """
    if model.is_perfect:
        return lambda xi: np.ones(np.shape(xi)) if np.ndim(xi) else 1.0

    def strength(xi):
        c = model.contrast(xi)
        return c / (2.0 + c)

    return strength


def _height_above_plane(position) -> float:
    z = float(position[2])
    if z <= 0:
        raise SceneValidationError("atom must lie strictly above the surface")
    return z


# ---------------------------------------------------------------------------
# single-atom potential
# ---------------------------------------------------------------------------


def cp_potential(
    atom: Atom,
    scene: Scene,
    regime,
    config: QuadratureConfig | None = None,
    *,
    full_output: bool = False,
):
    """Single-atom dispersion potential in the scene's body's field.

    Parameters
    ----------
    atom : Atom
        Position and polarizability; the scene's own atom list is ignored.
    scene : Scene
        Supplies the body (empty scene gives exactly 0).
    regime : Regime or str
        "retarded" (static responses enforced), "nonretarded" (quasi-static
        kernels), or "full" (no approximation).
    config : QuadratureConfig, optional
    full_output : bool
        When true return ``(value, error_estimate)``.

    Returns
    -------
    float or (float, float)
    """
    if config is None:
        config = QuadratureConfig()
    regime = _as_regime(regime)
    checked = _scene_with_atoms(scene, atom)
    require_regime_compatible(checked, regime)
    body = scene.body
    if body is None:
        return (0.0, 0.0) if full_output else 0.0

    if isinstance(body, ConductingSphere):
        value, err = _cp_sphere(atom, body, regime, config)
    elif isinstance(body, PerfectPlate):
        value, err = _cp_perfect_plate(atom, regime, config)
    elif isinstance(body, HalfSpace):
        value, err = _cp_halfspace(atom, body, regime, config)
    elif isinstance(body, Slab):
        value, err = _cp_slab(atom, body, regime, config)
    else:  # pragma: no cover - core validates body types
        raise SceneValidationError(f"unsupported body {type(body).__name__}")
    return (value, err) if full_output else value


def _cp_perfect_plate(atom: Atom, regime: Regime, config: QuadratureConfig):
    z = _height_above_plane(atom.position)
    alpha = atom.polarizability
    if regime == Regime.NONRETARDED:
        # quasi-static image kernel; the conductor's 1/z channels cancel,
        # leaving only -C3/z^3 with C3 = (1/4 pi) int alpha'
        _require_dispersive_atom(alpha, "nonretarded plate potential")
        moment, err = integrate_semi_infinite(
            lambda xi: alpha.at(xi),
            config,
            scale=_moment_scale([alpha]),
            full_output=True,
        )
        return -moment / (_FOUR_PI * z**3), err / (_FOUR_PI * z**3)

    def integrand(xi):
        u = 2.0 * xi * z
        return (
            -alpha.at(xi)
            * (2.0 + 2.0 * u + u**2)
            * np.exp(-u)
            / (8.0 * math.pi * z**3)
        )

    return integrate_semi_infinite(
        integrand,
        config,
        scale=_outer_scale(z, [alpha]),
        full_output=True,
    )


def _static_v_form_factor(eps_value: float, mu_value: float, config) -> tuple[float, float]:
    """J = int_1^inf dv [(2v^2 - 1) r_p(v) - r_s(v)] / v^4 for static media."""

    def integrand(x):
        v = 1.0 + x
        if math.isinf(eps_value):
            r_p = 1.0
            r_s = -1.0
        else:
            w = np.sqrt(v**2 + eps_value * mu_value - 1.0)
            r_p = (eps_value * v - w) / (eps_value * v + w)
            r_s = (mu_value * v - w) / (mu_value * v + w)
        return ((2.0 * v**2 - 1.0) * r_p - r_s) / v**4

    return integrate_semi_infinite(integrand, config, scale=1.0, full_output=True)


def _cp_halfspace(atom: Atom, body: HalfSpace, regime: Regime, config):
    z = _height_above_plane(atom.position)
    alpha = atom.polarizability
    if regime == Regime.RETARDED:
        # static responses: the frequency moment is closed, leaving a single
        # one-dimensional shape integral and an exact 1/z^4 law
        factor, ferr = _static_v_form_factor(
            math.inf if body.epsilon.is_perfect else body.epsilon.value,
            body.mu.value,
            config,
        )
        pref = -3.0 * alpha.value / (16.0 * math.pi * z**4)
        return pref * factor, abs(pref) * ferr
    if regime == Regime.NONRETARDED:
        return _cp_halfspace_nonretarded(alpha, body, z, config)
    return _cp_planar_dispersive(
        alpha, FresnelCoefficients(body.epsilon, body.mu), z, config
    )


def _cp_halfspace_nonretarded(alpha, body: HalfSpace, z: float, config):
    # two-term short-distance potential -C3/z^3 + C1/z.  C1 needs every
    # response moment to decay at high frequency; for a static dielectric
    # (where it diverges) only the leading -C3/z^3 term survives, with the
    # moment damped by the atom's resonance.
    _require_dispersive_atom(alpha, "nonretarded half-space potential")
    eps, mu = body.epsilon, body.mu
    static_eps = not (eps.is_vacuum or eps.is_perfect or eps.is_dispersive)
    if static_eps:
        if not mu.is_vacuum:
            raise SceneValidationError(
                "the 1/z term of the nonretarded potential diverges for a "
                "static dielectric with a magnetic response; use a "
                "resonance model for the permittivity"
            )
        p_strength = _quasi_static_strength(eps)
        c3, c3_err = integrate_semi_infinite(
            lambda xi: alpha.at(xi) * p_strength(xi),
            config,
            scale=_moment_scale([alpha, eps, mu]),
            full_output=True,
        )
        return -c3 / (_FOUR_PI * z**3), c3_err / (_FOUR_PI * z**3)
    coeffs = _nonretarded_c3_c1(alpha, eps, mu, config)
    value = -coeffs.c3 / z**3 + coeffs.c1 / z
    err = coeffs.c3_error / z**3 + coeffs.c1_error / z
    return value, err


def _cp_planar_dispersive(alpha, reflection: FresnelCoefficients, z: float, config):
    """Full frequency-dependent planar potential from the coincident trace."""

    def integrand(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        diag = halfspace_diagonal_stacked_batch(2.0 * z, xi, reflection, config)
        trace = 2.0 * diag[:, 0] + diag[:, 1]
        return 2.0 * xi**2 * alpha.at(xi) * trace

    models = [alpha, reflection.epsilon, reflection.mu]
    return integrate_semi_infinite(
        integrand, config, scale=_outer_scale(z, models), full_output=True
    )


def _cp_slab(atom: Atom, body: Slab, regime: Regime, config):
    z = _height_above_plane(atom.position)
    alpha = atom.polarizability
    if regime == Regime.NONRETARDED:
        raise SceneValidationError(
            "nonretarded slab potential is not supported: the quasi-static "
            "slab reflection is momentum-dependent; use full_dispersive"
        )
    eps, mu = body.epsilon, body.mu
    d = body.thickness

    def outer(xi_batch):
        xi_batch = np.atleast_1d(np.asarray(xi_batch, dtype=float))

        def inner(x, rows):
            xi_r = xi_batch[rows][:, None]
            v = 1.0 + x
            e = eps.at(xi_r)
            m = mu.at(xi_r)
            if np.any(np.isinf(e)):
                r_p = np.ones_like(v)
                r_s = -np.ones_like(v)
            else:
                w = np.sqrt(v**2 + e * m - 1.0)
                r_p = (e * v - w) / (e * v + w)
                r_s = (m * v - w) / (m * v + w)
                q = np.exp(-2.0 * xi_r * w * d)
                r_p = r_p * (1.0 - q) / (1.0 - r_p**2 * q)
                r_s = r_s * (1.0 - q) / (1.0 - r_s**2 * q)
            return np.exp(-2.0 * xi_r * z * v) * (
                (2.0 * v**2 - 1.0) * r_p - r_s
            )

        shape, _ = integrate_semi_infinite_rows(
            inner, 1.0 / (2.0 * xi_batch * z), config
        )
        return -(1.0 / (2.0 * math.pi)) * xi_batch**3 * alpha.at(xi_batch) * shape

    models = [alpha, eps, mu]
    return integrate_semi_infinite(
        outer, config, scale=_outer_scale(z, models), full_output=True
    )


def _cp_sphere(atom: Atom, body: ConductingSphere, regime: Regime, config):
    if regime != Regime.NONRETARDED:
        raise SceneValidationError(
            "the conducting sphere supports only the nonretarded regime"
        )
    alpha = atom.polarizability
    _require_dispersive_atom(alpha, "nonretarded sphere potential")
    z = math.dist(atom.position, body.center)
    kernel = g1_sphere_nonretarded_potential_kernel(
        z, body.radius, grounded=body.grounded
    )
    moment, err = integrate_semi_infinite(
        lambda xi: alpha.at(xi),
        config,
        scale=_moment_scale([alpha]),
        full_output=True,
    )
    pref = -kernel / (4.0 * math.pi**2)
    return pref * moment, abs(pref) * err


# ---------------------------------------------------------------------------
# force
# ---------------------------------------------------------------------------


def cp_force(
    atom: Atom,
    scene: Scene,
    regime,
    config: QuadratureConfig | None = None,
    *,
    step: float | None = None,
) -> np.ndarray:
    """Force on the atom, -grad U, by central differences.

    The default step is 1e-5 times the atom-body distance.  Planar scenes
    give exactly zero transverse components because the potential depends
    on height alone.
    """
    if config is None:
        config = QuadratureConfig()
    body = scene.body
    if body is None:
        return np.zeros(3)
    if step is None:
        if isinstance(body, ConductingSphere):
            distance = math.dist(atom.position, body.center) - body.radius
        else:
            distance = float(atom.position[2])
        step = 1e-5 * distance
    alpha = atom.polarizability

    def potential(r):
        moved = Atom(position=tuple(r), polarizability=alpha)
        return cp_potential(moved, scene, regime, config)

    return -gradient_fd(potential, atom.r, step)


# ---------------------------------------------------------------------------
# two-atom potential
# ---------------------------------------------------------------------------


def vdw_potential(
    atomA: Atom,
    atomB: Atom,
    scene: Scene,
    regime,
    config: QuadratureConfig | None = None,
) -> VdwResult:
    """Two-atom dispersion potential near the scene's body.

    Returns the total along with its free-space part (bulk tensor only,
    independent of the body) and the body-induced remainder, accumulated on
    one shared frequency grid so the split is exact.
    """
    if config is None:
        config = QuadratureConfig()
    regime = _as_regime(regime)
    if tuple(atomA.position) == tuple(atomB.position):
        raise CoincidentPointsError("the two atoms must be at distinct points")
    checked = _scene_with_atoms(scene, atomA, atomB)
    require_regime_compatible(checked, regime)
    body = scene.body
    if regime == Regime.NONRETARDED:
        return _vdw_nonretarded(atomA, atomB, body, config)
    if isinstance(body, ConductingSphere):
        raise SceneValidationError(
            "two-atom potentials near the sphere are not supported"
        )
    return _vdw_full(atomA, atomB, body, config)


def _vdw_full(atomA: Atom, atomB: Atom, body, config) -> VdwResult:
    rA, rB = atomA.r, atomB.r
    rho = float(np.linalg.norm(rA - rB))
    alphaA, alphaB = atomA.polarizability, atomB.polarizability

    if body is None:
        scatter = None
    elif isinstance(body, PerfectPlate):
        scatter = lambda xi: plate_scattering_batch(rA, rB, xi)
    elif isinstance(body, (HalfSpace, Slab)):
        thickness = body.thickness if isinstance(body, Slab) else None
        reflection = FresnelCoefficients(body.epsilon, body.mu, thickness)
        scatter = lambda xi: planar_scattering_pair_batch(
            rA, rB, xi, reflection, config
        )
    else:  # pragma: no cover
        raise SceneValidationError(f"unsupported body {type(body).__name__}")

    def integrand(xi):
        bulk = free_tensor_batch(rA - rB, xi)
        pref = -8.0 * math.pi * xi**4 * alphaA.at(xi) * alphaB.at(xi)
        c_free = np.einsum("nij,nij->n", bulk, bulk)
        if scatter is None:
            c_body = np.zeros_like(c_free)
        else:
            g1 = scatter(xi)
            c_body = 2.0 * np.einsum("nij,nij->n", bulk, g1) + np.einsum(
                "nij,nij->n", g1, g1
            )
        return np.stack([pref * c_free, pref * c_body], axis=1)

    models = [alphaA, alphaB] + list(_body_models(body))
    (u_free, u_body), errs = integrate_semi_infinite_vector(
        integrand, 2, config, scale=_outer_scale(rho, models)
    )
    return VdwResult(
        total=u_free + u_body,
        free_space=u_free,
        body_induced=u_body,
        error_estimate=float(np.sum(errs)),
    )


def _vdw_nonretarded(atomA: Atom, atomB: Atom, body, config) -> VdwResult:
    alphaA, alphaB = atomA.polarizability, atomB.polarizability
    if not (alphaA.is_dispersive or alphaB.is_dispersive):
        # the moments integrate the product of the two polarizabilities, so
        # one resonance is enough to damp them
        raise SceneValidationError(
            "nonretarded two-atom potential requires at least one dispersive "
            "(resonance) polarizability"
        )
    rA, rB = atomA.r, atomB.r
    bulk = quasi_static_free_kernel(rA - rB)
    scale = _moment_scale([alphaA, alphaB] + list(_body_models(body)))

    def pair_moment(extra=None):
        if extra is None:
            f = lambda xi: alphaA.at(xi) * alphaB.at(xi)
        else:
            f = lambda xi: alphaA.at(xi) * alphaB.at(xi) * extra(xi)
        return integrate_semi_infinite(f, config, scale=scale, full_output=True)

    m_plain, err_plain = pair_moment()
    norm_bulk = float(np.sum(bulk * bulk))
    u_free = -8.0 * math.pi * m_plain * norm_bulk
    err = 8.0 * math.pi * err_plain * norm_bulk

    if body is None:
        return VdwResult(u_free, u_free, 0.0, err)
    if isinstance(body, (Slab, ConductingSphere)):
        raise SceneValidationError(
            "nonretarded two-atom potentials support free space, the perfect "
            "plate, and the electric half-space only"
        )
    if isinstance(body, HalfSpace):
        if not body.mu.is_vacuum:
            raise SceneValidationError(
                "nonretarded two-atom potentials near magnetic media are not "
                "supported (the quasi-static electric kernel has no "
                "s-channel image)"
            )
        p_strength = _quasi_static_strength(body.epsilon)
    else:  # PerfectPlate
        p_strength = _quasi_static_strength(MaterialResponse.perfect())

    image = quasi_static_image_kernel(rA, rB, 1.0)
    cross = float(np.sum(bulk * image))
    norm_image = float(np.sum(image * image))
    m_r, err_r = pair_moment(p_strength)
    m_rr, err_rr = pair_moment(lambda xi: p_strength(xi) ** 2)
    u_body = -8.0 * math.pi * (2.0 * m_r * cross + m_rr * norm_image)
    err += 8.0 * math.pi * (2.0 * err_r * abs(cross) + err_rr * norm_image)
    return VdwResult(u_free + u_body, u_free, u_body, err)


# ---------------------------------------------------------------------------
# planar pressure
# ---------------------------------------------------------------------------


def _normalize_material(mat) -> tuple[MaterialResponse, MaterialResponse]:
    if isinstance(mat, PerfectPlate):
        return MaterialResponse.perfect(), VACUUM_MAGNETIC
    if isinstance(mat, HalfSpace):
        return mat.epsilon, mat.mu
    if isinstance(mat, MaterialResponse):
        if mat.role != "electric":
            raise SceneValidationError(
                "a lone response model must be electric; pass (eps, mu)"
            )
        return mat, VACUUM_MAGNETIC
    if isinstance(mat, (tuple, list)) and len(mat) == 2:
        eps, mu = mat
        if not (
            isinstance(eps, MaterialResponse) and isinstance(mu, MaterialResponse)
        ):
            raise SceneValidationError("material pair must be MaterialResponse")
        if eps.role != "electric" or mu.role != "magnetic":
            raise SceneValidationError("material pair must be (electric, magnetic)")
        return eps, mu
    raise SceneValidationError(
        "material must be PerfectPlate, HalfSpace, MaterialResponse, or "
        "(eps, mu) pair"
    )


def _polylog3(x):
    """Trilogarithm sum_k x^k/k^3 on (-1, 1), vectorized.

    Near x = 1 the direct series stalls, so that region uses the expansion
    in t = -ln x:  zeta(3) - zeta(2) t + t^2 (3 - 2 ln t)/4 + t^3/12
    - t^4/288 + t^6/86400 + O(t^8).
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    if np.any(x >= 1.0) or np.any(x <= -1.0):
        raise ValueError("trilogarithm argument must lie in (-1, 1)")

    def series(y):
        # |y| <= exp(-0.25): at most ~140 terms for 1e-16 accuracy
        total = np.zeros_like(y)
        power = np.ones_like(y)
        for k in range(1, 200):
            power = power * y
            term = power / k**3
            total += term
            if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
                break
        return total

    def near_one(y):
        t = -np.log(y)
        zeta3 = 1.2020569031595943
        zeta2 = math.pi**2 / 6.0
        return (
            zeta3
            - zeta2 * t
            + t**2 * (3.0 - 2.0 * np.log(t)) / 4.0
            + t**3 / 12.0
            - t**4 / 288.0
            + t**6 / 86400.0
        )

    cut = math.exp(-0.25)
    pos_large = x > cut
    neg_large = x < -cut
    mid = ~(pos_large | neg_large)
    if np.any(mid):
        out[mid] = series(x[mid])
    if np.any(pos_large):
        out[pos_large] = near_one(x[pos_large])
    if np.any(neg_large):
        y = -x[neg_large]
        # Li3(-y) = Li3(y^2)/4 - Li3(y)
        y2 = y * y
        li_y = np.where(y > cut, near_one(y), series(y))
        li_y2 = np.where(y2 > cut, near_one(y2), series(y2))
        out[neg_large] = li_y2 / 4.0 - li_y
    return float(out[0]) if scalar else out


def _check_channel_converges(m1: MaterialResponse, m2: MaterialResponse, label):
    """A quasi-static reflection product must vanish at high frequency."""
    vanishes = m1.is_vacuum or m2.is_vacuum
    decays = m1.is_dispersive or m2.is_dispersive
    if not (vanishes or decays):
        raise SceneValidationError(
            f"nonretarded pressure diverges: the {label} reflection product "
            "stays finite at all frequencies (static or perfect models on "
            "both sides)"
        )


def lifshitz_pressure(
    gap: float,
    mat1,
    mat2,
    regime,
    config: QuadratureConfig | None = None,
    *,
    full_output: bool = False,
):
    """Pressure between two planar half-spaces across a vacuum gap.

    Parameters
    ----------
    gap : float
        Surface separation, > 0.
    mat1, mat2 : PerfectPlate | HalfSpace | MaterialResponse | (eps, mu)
        The facing materials.
    regime : Regime or str
    config : QuadratureConfig, optional
    full_output : bool
        When true return ``(value, error_estimate)``.

    Returns
    -------
    float or (float, float)
        Negative values mean attraction.
    """
    if config is None:
        config = QuadratureConfig()
    regime = _as_regime(regime)
    gap = float(gap)
    if not (math.isfinite(gap) and gap > 0):
        raise SceneValidationError("gap must be positive and finite")
    eps1, mu1 = _normalize_material(mat1)
    eps2, mu2 = _normalize_material(mat2)
    models = [eps1, mu1, eps2, mu2]
    if regime == Regime.RETARDED:
        for m in models:
            if m.is_dispersive:
                raise SceneValidationError(
                    "retarded pressure requires static or perfect responses"
                )
    if regime == Regime.NONRETARDED:
        return _lifshitz_nonretarded(
            gap, eps1, mu1, eps2, mu2, config, full_output
        )

    refl1 = FresnelCoefficients(eps1, mu1)
    refl2 = FresnelCoefficients(eps2, mu2)

    def outer(xi_batch):
        xi_batch = np.atleast_1d(np.asarray(xi_batch, dtype=float))

        def inner(kpar, rows):
            x = xi_batch[rows][:, None]
            kappa = np.sqrt(kpar**2 + x**2)
            rs1, rp1 = refl1.evaluate(kpar, x)
            rs2, rp2 = refl2.evaluate(kpar, x)
            damp = np.exp(-2.0 * kappa * gap)
            y_p = rp1 * rp2 * damp
            y_s = rs1 * rs2 * damp
            return kpar * kappa * (y_p / (1.0 - y_p) + y_s / (1.0 - y_s))

        vals, _ = integrate_semi_infinite_rows(
            inner, np.full(xi_batch.shape, 1.0 / (2.0 * gap)), config
        )
        return -vals / (2.0 * math.pi**2)

    return integrate_semi_infinite(
        outer, config, scale=_outer_scale(gap, models), full_output=full_output
    )


def _lifshitz_nonretarded(gap, eps1, mu1, eps2, mu2, config, full_output):
    _check_channel_converges(eps1, eps2, "electric (p)")
    _check_channel_converges(mu1, mu2, "magnetic (s)")

    rp1, rp2 = _quasi_static_strength(eps1), _quasi_static_strength(eps2)
    rs1, rs2 = _quasi_static_strength(mu1), _quasi_static_strength(mu2)

    def integrand(xi):
        return _polylog3(rp1(xi) * rp2(xi)) + _polylog3(rs1(xi) * rs2(xi))

    omega = _resonance_floor([eps1, mu1, eps2, mu2])
    scale = omega if omega is not None else 1.0
    moment, err = integrate_semi_infinite(
        integrand, config, scale=scale, full_output=True
    )
    pref = -1.0 / (8.0 * math.pi**2 * gap**3)
    value = pref * moment
    return (value, abs(pref) * err) if full_output else value


# ---------------------------------------------------------------------------
# short-distance coefficients
# ---------------------------------------------------------------------------


def nonretarded_halfspace_coefficients(
    atom,
    epsilon: MaterialResponse,
    mu: MaterialResponse | None = None,
    config: QuadratureConfig | None = None,
) -> NonretardedCoefficients:
    """Coefficients C3 and C1 of the short-distance planar potential.

    U(z) = -C3/z^3 + C1/z reproduces the full planar potential in the
    short-distance window.  C3 is the frequency moment of the quasi-static
    p reflection; C1 carries the s-channel moment plus the electric cross
    term from the next order of the p reflection (see the module docstring).
    A perfect conductor gives C1 = 0 exactly.

    Parameters
    ----------
    atom : Atom or Polarizability
        Must be dispersive; static models make the moments divergent.
    epsilon : MaterialResponse
        Electric response; dispersive, vacuum, or perfect.
    mu : MaterialResponse, optional
        Magnetic response; dispersive or vacuum (default vacuum).
    config : QuadratureConfig, optional
    """
    if config is None:
        config = QuadratureConfig()
    alpha = atom.polarizability if isinstance(atom, Atom) else atom
    if not isinstance(alpha, Polarizability):
        raise SceneValidationError("atom must be an Atom or Polarizability")
    _require_dispersive_atom(alpha, "short-distance coefficients")
    if mu is None:
        mu = VACUUM_MAGNETIC
    if epsilon.role != "electric" or mu.role != "magnetic":
        raise SceneValidationError("responses must be (electric, magnetic)")
    return _nonretarded_c3_c1(alpha, epsilon, mu, config)


def _nonretarded_c3_c1(
    alpha: Polarizability,
    epsilon: MaterialResponse,
    mu: MaterialResponse,
    config: QuadratureConfig,
) -> NonretardedCoefficients:
    """Frequency moments behind the two-term short-distance potential."""
    omega = _resonance_floor([alpha, epsilon, mu])
    scale = omega if omega is not None else 1.0

    if epsilon.is_perfect:
        c3, c3_err = integrate_semi_infinite(
            lambda xi: alpha.at(xi), config, scale=scale, full_output=True
        )
        # the conductor's p and s channels cancel at order 1/z
        return NonretardedCoefficients(
            c3 / _FOUR_PI, 0.0, c3_err / _FOUR_PI, 0.0
        )

    if not (epsilon.is_vacuum or epsilon.is_dispersive):
        raise SceneValidationError(
            "C1 diverges for a static dielectric; use a resonance model"
        )
    if not (mu.is_vacuum or mu.is_dispersive):
        raise SceneValidationError(
            "C1 diverges for a static magnetic response; use a resonance model"
        )

    p_strength = _quasi_static_strength(epsilon)
    s_strength = _quasi_static_strength(mu)

    def cross_term(xi):
        # 2 eps (eps mu - 1)/(eps+1)^2 written in the contrasts
        # ce = eps - 1, cm = mu - 1 so the large-xi tail stays exact
        ce = epsilon.contrast(xi)
        cm = mu.contrast(xi)
        return 2.0 * (1.0 + ce) * (ce + cm + ce * cm) / (2.0 + ce) ** 2

    c3, c3_err = integrate_semi_infinite(
        lambda xi: alpha.at(xi) * p_strength(xi),
        config,
        scale=scale,
        full_output=True,
    )
    c1, c1_err = integrate_semi_infinite(
        lambda xi: xi**2
        * alpha.at(xi)
        * (p_strength(xi) + s_strength(xi) + cross_term(xi)),
        config,
        scale=scale,
        full_output=True,
    )
    return NonretardedCoefficients(
        c3 / _FOUR_PI, c1 / _FOUR_PI, c3_err / _FOUR_PI, c1_err / _FOUR_PI
    )
