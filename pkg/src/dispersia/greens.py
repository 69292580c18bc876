"""Electromagnetic Green tensors at imaginary frequency.

Closed forms for free space (retarded and quasi-static kernels, plus the
quasi-static curl), an image construction for the perfectly conducting
plate, transverse-momentum (Sommerfeld) integrals for magnetoelectric
half-spaces and slabs, quasi-static planar image kernels, and the
quasi-static multipole kernel of a perfectly conducting sphere.

Conventions fixed here and validated by tests rather than taken on trust:

* free-space retarded tensor with u = xi*rho:
  G0 = e^(-u)/(4 pi xi^2 rho^3) * [(1+u+u^2) I - (3+3u+u^2) ee]
* quasi-static bulk kernel K0 = -[I - 3 ee]/(4 pi rho^3); the physical
  tensor at imaginary frequency xi is -K0/xi^2 (the u -> 0 limit of G0)
* plate scattering tensor by reflecting the source through z = 0 and
  applying diag(-1, -1, +1), which makes the tangential electric field
  vanish on the surface
* Fresnel coefficients at imaginary frequency:
  r_s = (mu k - k1)/(mu k + k1), r_p = (eps k - k1)/(eps k + k1),
  k = sqrt(kpar^2 + xi^2), k1 = sqrt(kpar^2 + eps mu xi^2); a perfect
  conductor gives r_p = +1, r_s = -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0 as _bessel_j0, j1 as _bessel_j1

from .core import (
    GreenTensorValue,
    MaterialResponse,
    TensorKind,
)
from .quadrature import (
    NonConvergenceError,
    QuadratureConfig,
    integrate_semi_infinite_rows,
    integrate_semi_infinite_vector,
)

__all__ = [
    "CoincidentPointsError",
    "SeparationGeometry",
    "FresnelCoefficients",
    "g0_retarded",
    "g0_nonretarded",
    "curl_g0_nonretarded",
    "g1_perfect_plate",
    "g1_halfspace",
    "g1_slab",
    "g1_sphere_nonretarded_potential_kernel",
    "IMAGE_REFLECTION",
]

#: Reflection applied to a source mirrored through the z = 0 plane.
IMAGE_REFLECTION = np.diag([-1.0, -1.0, 1.0])
IMAGE_REFLECTION.setflags(write=False)

#: Relative tolerance for truncating the sphere multipole series.
_SPHERE_SERIES_RTOL = 1e-10
#: Hard cap on the sphere multipole order near contact.
_SPHERE_L_CAP = 5000


class CoincidentPointsError(ValueError):
    """Bulk tensors are singular at coincident points."""


@dataclass(frozen=True)
class SeparationGeometry:
    """Separation vector between field and source points.

    Attributes
    ----------
    vector : ndarray, shape (3,)
        r - r'.
    distance : float
        |r - r'| > 0.
    unit : ndarray, shape (3,)
        (r - r') / |r - r'|.
    """

    vector: np.ndarray
    distance: float
    unit: np.ndarray

    @staticmethod
    def between(r, rp) -> "SeparationGeometry":
        vec = np.asarray(r, dtype=float) - np.asarray(rp, dtype=float)
        if vec.shape != (3,):
            raise ValueError("points must be 3-vectors")
        dist = float(np.linalg.norm(vec))
        if dist == 0.0:
            raise CoincidentPointsError(
                "bulk Green tensor requested at coincident points"
            )
        vec = vec.copy()
        unit = vec / dist
        vec.setflags(write=False)
        unit.setflags(write=False)
        return SeparationGeometry(vec, dist, unit)


def _check_xi_positive(xi: float) -> float:
    xi = float(xi)
    if not (math.isfinite(xi) and xi > 0):
        raise ValueError("xi must be finite and > 0")
    return xi


def _response_value(model, xi):
    """Material value at i*xi from a model object or a plain number."""
    if isinstance(model, MaterialResponse):
        return model.at(xi)
    value = np.asarray(model, dtype=float)
    return value if value.ndim else float(value)


# ---------------------------------------------------------------------------
# Free space
# ---------------------------------------------------------------------------


def free_tensor_batch(dvec, xi) -> np.ndarray:
    """Retarded free-space tensor for one separation at many frequencies.

    Parameters
    ----------
    dvec : array-like, shape (3,)
        Separation r - r', nonzero.
    xi : ndarray, shape (n,)
        Positive imaginary frequencies.

    Returns
    -------
    ndarray, shape (n, 3, 3)
    """
    geom = SeparationGeometry.between(dvec, (0.0, 0.0, 0.0))
    xi = np.asarray(xi, dtype=float)
    u = xi * geom.distance
    pref = np.exp(-u) / (4.0 * math.pi * xi**2 * geom.distance**3)
    iso = 1.0 + u + u**2
    aniso = 3.0 + 3.0 * u + u**2
    ee = np.outer(geom.unit, geom.unit)
    eye = np.eye(3)
    return pref[:, None, None] * (
        iso[:, None, None] * eye - aniso[:, None, None] * ee
    )


def g0_retarded(r, rp, xi) -> GreenTensorValue:
    """Retarded free-space Green tensor at imaginary frequency.

    Parameters
    ----------
    r, rp : array-like, shape (3,)
        Field and source points, r != rp.
    xi : float
        Imaginary frequency, > 0.

    Returns
    -------
    GreenTensorValue
        Kind ``bulk``; the coincidence (delta-function) term is excluded by
        contract, so coincident points raise instead.
    """
    xi = _check_xi_positive(xi)
    geom = SeparationGeometry.between(r, rp)
    components = free_tensor_batch(geom.vector, np.array([xi]))[0]
    return GreenTensorValue(components, TensorKind.BULK)


def quasi_static_free_kernel(dvec) -> np.ndarray:
    """Quasi-static bulk kernel K0 = -[I - 3 ee]/(4 pi rho^3).

    The physical tensor at imaginary frequency xi is -K0/xi^2.
    """
    geom = SeparationGeometry.between(dvec, (0.0, 0.0, 0.0))
    ee = np.outer(geom.unit, geom.unit)
    return -(np.eye(3) - 3.0 * ee) / (4.0 * math.pi * geom.distance**3)


def g0_nonretarded(r, rp) -> GreenTensorValue:
    """Quasi-static (frequency-rescaled) free-space kernel.

    Returns the kernel K0 = -[I - 3 ee]/(4 pi rho^3) with the convention
    that the physical tensor is (c^2/omega^2) times this kernel, i.e.
    -K0/xi^2 on the imaginary axis; quasi-static engines consume the kernel
    directly.
    """
    geom = SeparationGeometry.between(r, rp)
    return GreenTensorValue(
        quasi_static_free_kernel(geom.vector), TensorKind.BULK
    )


def _cross_matrix(v: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def curl_g0_nonretarded(r, rp) -> GreenTensorValue:
    """Left curl of the quasi-static free-space tensor.

    curl G0 = -G0 x curl' = -(e x I)/(4 pi rho^2) with (e x I) the
    cross-product matrix of the unit separation vector.
    """
    geom = SeparationGeometry.between(r, rp)
    components = -_cross_matrix(geom.unit) / (
        4.0 * math.pi * geom.distance**2
    )
    return GreenTensorValue(components, TensorKind.CURL_LEFT)


# ---------------------------------------------------------------------------
# Perfectly conducting plate (image construction)
# ---------------------------------------------------------------------------


def _require_above_plate(r, rp):
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    if r.shape != (3,) or rp.shape != (3,):
        raise ValueError("points must be 3-vectors")
    if r[2] <= 0.0 or rp[2] <= 0.0:
        raise ValueError("both points must lie strictly above the surface z = 0")
    return r, rp


def mirror_point(rp) -> np.ndarray:
    """Reflection of a point through the z = 0 plane."""
    rp = np.asarray(rp, dtype=float)
    return np.array([rp[0], rp[1], -rp[2]])


def plate_scattering_batch(r, rp, xi) -> np.ndarray:
    """Perfect-plate scattering tensor for one point pair, many frequencies."""
    r, rp = _require_above_plate(r, rp)
    d = r - mirror_point(rp)
    return free_tensor_batch(d, xi) @ IMAGE_REFLECTION


def g1_perfect_plate(r, rp, xi) -> GreenTensorValue:
    """Scattering Green tensor of a perfectly conducting plate at z = 0.

    Image construction: the mirrored source at (x', y', -z') enters through
    the free-space tensor with reflection diag(-1, -1, +1), which makes the
    tangential electric field vanish on the surface.  Finite at coincident
    field and source points.
    """
    xi = _check_xi_positive(xi)
    components = plate_scattering_batch(r, rp, np.array([xi]))[0]
    return GreenTensorValue(components, TensorKind.SCATTERING)


# ---------------------------------------------------------------------------
# Fresnel coefficients at imaginary frequency
# ---------------------------------------------------------------------------


def fresnel_imaginary(kpar, xi, eps_value, mu_value):
    """Half-space reflection coefficients r_s, r_p at imaginary frequency.

    Parameters
    ----------
    kpar : ndarray or float
        Transverse momentum >= 0.
    xi : float
        Imaginary frequency > 0.
    eps_value, mu_value : float or ndarray
        Response values at i*xi; ``inf`` for eps marks a perfect conductor
        (r_p = +1, r_s = -1).

    Returns
    -------
    (r_s, r_p) : pair of ndarray or float
    """
    kpar = np.asarray(kpar, dtype=float)
    kappa = np.sqrt(kpar**2 + xi**2)
    if np.any(np.isinf(eps_value)):
        shape = kpar.shape
        return -np.ones(shape), np.ones(shape)
    kappa1 = np.sqrt(kpar**2 + eps_value * mu_value * xi**2)
    # difference-of-squares forms: (m kappa - kappa1) computed directly
    # cancels catastrophically at kpar >> xi whenever m kappa ~ kappa1
    # (e.g. r_p of a purely magnetic body), and downstream integrands
    # amplify that noise by kappa^2/xi^2
    r_s = ((mu_value**2 - 1.0) * kpar**2 + mu_value * (mu_value - eps_value) * xi**2) / (
        mu_value * kappa + kappa1
    ) ** 2
    r_p = ((eps_value**2 - 1.0) * kpar**2 + eps_value * (eps_value - mu_value) * xi**2) / (
        eps_value * kappa + kappa1
    ) ** 2
    return r_s, r_p


def slab_reflection(r_half, kappa1, thickness):
    """Two-interface slab coefficient from the half-space coefficient.

    r_slab = r (1 - q)/(1 - r^2 q) with q = exp(-2 kappa1 d).
    """
    q = np.exp(-2.0 * kappa1 * thickness)
    return r_half * (-np.expm1(-2.0 * kappa1 * thickness)) / (1.0 - r_half**2 * q)


@dataclass(frozen=True)
class FresnelCoefficients:
    """Planar reflection coefficients of a half-space or slab.

    Evaluates r_s(kpar, xi) and r_p(kpar, xi) from the body's response
    models; a positive ``thickness`` selects the two-interface slab form.
    """

    epsilon: MaterialResponse
    mu: MaterialResponse
    thickness: float | None = None

    def evaluate(self, kpar, xi):
        eps = _response_value(self.epsilon, xi)
        mu = _response_value(self.mu, xi)
        r_s, r_p = fresnel_imaginary(kpar, xi, eps, mu)
        if self.thickness is not None:
            if np.any(np.isinf(eps)):
                return r_s, r_p
            kpar = np.asarray(kpar, dtype=float)
            kappa1 = np.sqrt(kpar**2 + eps * mu * xi**2)
            r_s = slab_reflection(r_s, kappa1, self.thickness)
            r_p = slab_reflection(r_p, kappa1, self.thickness)
        return r_s, r_p


# ---------------------------------------------------------------------------
# Sommerfeld scattering tensors for planar magnetoelectric bodies
# ---------------------------------------------------------------------------


def _bessel_j2(x):
    out = np.empty_like(x)
    small = x < 1e-8
    xs = np.where(small, 1.0, x)
    out = 2.0 * _bessel_j1(xs) / xs - _bessel_j0(xs)
    return np.where(small, x**2 / 8.0, out)


def _planar_scattering_components(
    s, zsum, xi, reflection: FresnelCoefficients, config: QuadratureConfig
):
    """The four cylindrical components of a planar scattering tensor.

    Returns (F_ss, F_phiphi, F_zz, F_sz) for transverse offset s and height
    sum zsum = z + z', from a transverse-momentum integral of s- and
    p-polarized reflected waves sharing one quadrature grid.
    """

    def integrand(kpar):
        kappa = np.sqrt(kpar**2 + xi**2)
        r_s, r_p = reflection.evaluate(kpar, xi)
        damp = np.exp(-kappa * zsum)
        a_s = (kpar / kappa) * damp * r_s
        a_p = (kpar / kappa) * damp * r_p
        x = kpar * s
        b0 = _bessel_j0(x)
        b1 = _bessel_j1(x)
        b2 = _bessel_j2(x)
        pref = 1.0 / (8.0 * math.pi)
        f_ss = pref * (a_s * (b0 + b2) - a_p * (kappa**2 / xi**2) * (b0 - b2))
        f_phi = pref * (a_s * (b0 - b2) - a_p * (kappa**2 / xi**2) * (b0 + b2))
        f_zz = -pref * a_p * (2.0 * kpar**2 / xi**2) * b0
        f_sz = -pref * a_p * (2.0 * kappa * kpar / xi**2) * b1
        return np.stack([f_ss, f_phi, f_zz, f_sz], axis=1)

    values, _ = integrate_semi_infinite_vector(
        integrand, 4, config, scale=1.0 / zsum
    )
    return values


def _planar_scattering_tensor(
    r, rp, xi, reflection: FresnelCoefficients, config: QuadratureConfig
) -> np.ndarray:
    r, rp = _require_above_plate(r, rp)
    xi = _check_xi_positive(xi)
    dx = r[0] - rp[0]
    dy = r[1] - rp[1]
    s = math.hypot(dx, dy)
    zsum = r[2] + rp[2]
    f_ss, f_phi, f_zz, f_sz = _planar_scattering_components(
        s, zsum, xi, reflection, config
    )
    if s == 0.0:
        s_hat = np.array([1.0, 0.0, 0.0])
    else:
        s_hat = np.array([dx / s, dy / s, 0.0])
    z_hat = np.array([0.0, 0.0, 1.0])
    phi_hat = np.cross(z_hat, s_hat)
    return (
        f_ss * np.outer(s_hat, s_hat)
        + f_phi * np.outer(phi_hat, phi_hat)
        + f_zz * np.outer(z_hat, z_hat)
        + f_sz * (np.outer(s_hat, z_hat) - np.outer(z_hat, s_hat))
    )


def g1_halfspace(
    r, rp, xi, epsilon, mu=None, config: QuadratureConfig | None = None
) -> GreenTensorValue:
    """Scattering Green tensor of a magnetoelectric half-space (z < 0).

    Parameters
    ----------
    r, rp : array-like, shape (3,)
        Field and source points strictly above the surface.
    xi : float
        Imaginary frequency > 0.
    epsilon, mu : MaterialResponse or float
        Responses of the half-space (mu defaults to vacuum).
    config : QuadratureConfig, optional
        Tolerances for the transverse-momentum integral.

    Returns
    -------
    GreenTensorValue
        Kind ``scattering``; finite at coincident points.
    """
    if config is None:
        config = QuadratureConfig()
    reflection = _reflection_for(epsilon, mu, None)
    components = _planar_scattering_tensor(r, rp, xi, reflection, config)
    return GreenTensorValue(components, TensorKind.SCATTERING)


def g1_slab(
    r,
    rp,
    xi,
    thickness,
    epsilon,
    mu=None,
    config: QuadratureConfig | None = None,
) -> GreenTensorValue:
    """Scattering Green tensor of a planar slab (-d < z < 0)."""
    if config is None:
        config = QuadratureConfig()
    thickness = float(thickness)
    if not (math.isfinite(thickness) and thickness > 0):
        raise ValueError("slab thickness must be > 0")
    reflection = _reflection_for(epsilon, mu, thickness)
    components = _planar_scattering_tensor(r, rp, xi, reflection, config)
    return GreenTensorValue(components, TensorKind.SCATTERING)


def _reflection_for(epsilon, mu, thickness) -> FresnelCoefficients:
    if not isinstance(epsilon, MaterialResponse):
        eps_val = float(epsilon)
        epsilon = (
            MaterialResponse.perfect()
            if math.isinf(eps_val)
            else MaterialResponse.static(eps_val)
        )
    if mu is None:
        mu = MaterialResponse.static(1.0, "magnetic")
    elif not isinstance(mu, MaterialResponse):
        mu = MaterialResponse.static(float(mu), "magnetic")
    return FresnelCoefficients(epsilon, mu, thickness)


def halfspace_diagonal_stacked_batch(
    zsum,
    xi,
    reflection: FresnelCoefficients,
    config: QuadratureConfig,
) -> np.ndarray:
    """Diagonal scattering components for vertically stacked points.

    For transverse offset zero the tensor is diagonal with entries
    (F_t, F_t, F_zz).  Evaluates them for a whole array of frequencies with
    per-frequency inner integrals, each frozen at its own convergence level.

    Returns
    -------
    ndarray, shape (len(xi), 2)
        Columns (F_t, F_zz).
    """
    xi = np.asarray(xi, dtype=float)

    def transverse(kpar, rows):
        x = xi[rows][:, None]
        kappa = np.sqrt(kpar**2 + x**2)
        r_s, r_p = reflection.evaluate(kpar, x)
        damp = np.exp(-kappa * zsum)
        a = (kpar / kappa) * damp
        return (a * (r_s - r_p * (kappa**2 / x**2))) / (8.0 * math.pi)

    def normal(kpar, rows):
        x = xi[rows][:, None]
        kappa = np.sqrt(kpar**2 + x**2)
        _, r_p = reflection.evaluate(kpar, x)
        damp = np.exp(-kappa * zsum)
        a = (kpar / kappa) * damp * r_p
        return -(a * (2.0 * kpar**2 / x**2)) / (8.0 * math.pi)

    scales = np.full(xi.shape, 1.0 / zsum)
    f_t, _ = integrate_semi_infinite_rows(transverse, scales, config)
    f_zz, _ = integrate_semi_infinite_rows(normal, scales, config)
    return np.stack([f_t, f_zz], axis=1)


def planar_components_rows_batch(
    s, zsum, xi, reflection: FresnelCoefficients, config: QuadratureConfig
) -> np.ndarray:
    """Cylindrical scattering components for one point pair, many frequencies.

    Returns an array of shape (len(xi), 4) with columns
    (F_ss, F_phiphi, F_zz, F_sz); each frequency's transverse-momentum
    integral is converged and frozen independently of the batch.
    """
    xi = np.asarray(xi, dtype=float)
    pref = 1.0 / (8.0 * math.pi)

    def make(which):
        def integrand(kpar, rows):
            x = xi[rows][:, None]
            kappa = np.sqrt(kpar**2 + x**2)
            r_s, r_p = reflection.evaluate(kpar, x)
            damp = np.exp(-kappa * zsum)
            a_s = (kpar / kappa) * damp * r_s
            a_p = (kpar / kappa) * damp * r_p
            arg = kpar * s
            b0 = _bessel_j0(arg)
            if which == "zz":
                return -pref * a_p * (2.0 * kpar**2 / x**2) * b0
            if which == "sz":
                return -pref * a_p * (2.0 * kappa * kpar / x**2) * _bessel_j1(arg)
            b2 = _bessel_j2(arg)
            if which == "ss":
                return pref * (
                    a_s * (b0 + b2) - a_p * (kappa**2 / x**2) * (b0 - b2)
                )
            return pref * (
                a_s * (b0 - b2) - a_p * (kappa**2 / x**2) * (b0 + b2)
            )

        return integrand

    scales = np.full(xi.shape, 1.0 / zsum)
    out = np.empty((xi.size, 4))
    for col, which in enumerate(("ss", "phiphi", "zz", "sz")):
        out[:, col], _ = integrate_semi_infinite_rows(
            make(which), scales, config
        )
    return out


def planar_scattering_pair_batch(
    r, rp, xi, reflection: FresnelCoefficients, config: QuadratureConfig
) -> np.ndarray:
    """Planar scattering tensors for one point pair at many frequencies.

    Returns an array of shape (len(xi), 3, 3).  Vertically stacked pairs
    (zero transverse offset) skip the Bessel factors entirely.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    _require_above_plate(r, rp)
    xi = np.asarray(xi, dtype=float)
    dx = r[0] - rp[0]
    dy = r[1] - rp[1]
    s = math.hypot(dx, dy)
    zsum = r[2] + rp[2]
    out = np.zeros((xi.size, 3, 3))
    if s == 0.0:
        diag = halfspace_diagonal_stacked_batch(zsum, xi, reflection, config)
        out[:, 0, 0] = diag[:, 0]
        out[:, 1, 1] = diag[:, 0]
        out[:, 2, 2] = diag[:, 1]
        return out
    comps = planar_components_rows_batch(s, zsum, xi, reflection, config)
    s_hat = np.array([dx / s, dy / s, 0.0])
    z_hat = np.array([0.0, 0.0, 1.0])
    phi_hat = np.cross(z_hat, s_hat)
    basis = np.stack(
        [
            np.outer(s_hat, s_hat),
            np.outer(phi_hat, phi_hat),
            np.outer(z_hat, z_hat),
            np.outer(s_hat, z_hat) - np.outer(z_hat, s_hat),
        ]
    )
    return np.einsum("nc,cij->nij", comps, basis)


# ---------------------------------------------------------------------------
# Quasi-static planar image kernels
# ---------------------------------------------------------------------------


def quasi_static_image_kernel(r, rp, reflection_strength) -> np.ndarray:
    """Quasi-static scattering kernel of a planar interface.

    K1 = r0 * K0(r - image(r')) @ diag(-1, -1, +1) with r0 the quasi-static
    p-polarization reflection strength (eps - 1)/(eps + 1); the physical
    scattering tensor is -K1/xi^2.
    """
    r, rp = _require_above_plate(r, rp)
    d = r - mirror_point(rp)
    return reflection_strength * quasi_static_free_kernel(d) @ IMAGE_REFLECTION


def quasi_static_image_trace_coincident(z, reflection_strength) -> float:
    """Trace of the quasi-static image kernel at coincident points.

    Tr K1(r, r) = r0 / (8 pi z^3) for height z above the surface.
    """
    z = float(z)
    if z <= 0:
        raise ValueError("height must be > 0")
    return reflection_strength / (8.0 * math.pi * z**3)


# ---------------------------------------------------------------------------
# Conducting sphere, quasi-static multipoles
# ---------------------------------------------------------------------------


def g1_sphere_nonretarded_potential_kernel(
    z: float,
    radius: float,
    l_max: int | None = None,
    *,
    grounded: bool = False,
) -> float:
    """Quasi-static scattering kernel of a perfectly conducting sphere.

    Returns K(z, R) such that the nonretarded potential of an atom at
    distance z from the sphere's centre is
    U = -(1/4 pi^2) * integral over xi of alpha'(i*xi) * K(z, R).
    The multipole sum K = 2 pi * sum_l (l+1)(2l+1) R^(2l+1) / z^(2l+4)
    starts at l = 1 for a neutral isolated sphere (the default) and at
    l = 0 for a grounded one.

    Parameters
    ----------
    z : float
        Distance from the sphere centre, > radius.
    radius : float
        Sphere radius > 0.
    l_max : int, optional
        Hard cap on the multipole order (default 5000).
    grounded : bool
        Include the monopole response.

    Raises
    ------
    ValueError
        If z <= radius.
    NonConvergenceError
        If the series has not converged at the cap.
    """
    z = float(z)
    radius = float(radius)
    if not (radius > 0 and z > radius):
        raise ValueError("require z > radius > 0")
    cap = _SPHERE_L_CAP if l_max is None else int(l_max)
    if cap < 1:
        raise ValueError("l_max must be >= 1")
    ratio = radius / z
    prefactor = 2.0 * math.pi / z**3
    total = 0.0
    l_start = 0 if grounded else 1
    block = 64
    l_lo = l_start
    while l_lo <= cap:
        l_hi = min(l_lo + block - 1, cap)
        l = np.arange(l_lo, l_hi + 1, dtype=float)
        terms = (l + 1.0) * (2.0 * l + 1.0) * ratio ** (2.0 * l + 1.0)
        total += float(np.sum(terms))
        increment = float(terms[-1])
        if increment <= _SPHERE_SERIES_RTOL * total:
            return prefactor * total
        l_lo = l_hi + 1
        block *= 2
    raise NonConvergenceError(
        f"sphere multipole series not converged by l = {cap} "
        f"(z/R = {z / radius:.6g})",
        best_estimate=prefactor * total,
        error_bound=prefactor * increment,
    )


def sphere_kernel_closed_form(z: float, radius: float, grounded: bool = False) -> float:
    """Closed geometric-series form of the sphere kernel (oracle for tests)."""
    z = float(z)
    radius = float(radius)
    if not (radius > 0 and z > radius):
        raise ValueError("require z > radius > 0")
    s = (radius / z) ** 2
    # sum_{l>=1} (2 l^2 + 3 l + 1) s^l in closed form
    sum_l2 = s * (1.0 + s) / (1.0 - s) ** 3
    sum_l1 = s / (1.0 - s) ** 2
    sum_l0 = s / (1.0 - s)
    series = 2.0 * sum_l2 + 3.0 * sum_l1 + sum_l0
    if grounded:
        series += 1.0
    return 2.0 * math.pi * (radius / z**4) * series
