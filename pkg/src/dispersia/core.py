"""Response models, scene description, and shared value types.

Everything internal works in natural units hbar = c = eps0 = mu0 = 1:
potentials carry dimension 1/length (times hbar*c), pressures 1/length**4,
polarizability volumes length**3.  An optional metres-per-length-unit factor
travels with the scene purely for conversion at the CLI boundary.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np
import scipy.constants

__all__ = [
    "SceneValidationError",
    "MaterialResponse",
    "Polarizability",
    "Atom",
    "PerfectPlate",
    "HalfSpace",
    "Slab",
    "ConductingSphere",
    "Scene",
    "GreenTensorValue",
    "TensorKind",
    "Regime",
    "UnitsConvention",
    "evaluate_response",
    "scene_from_json",
    "require_regime_compatible",
]


class SceneValidationError(ValueError):
    """Invalid scene, model, or regime/scene combination."""


def _check_xi(xi) -> np.ndarray | float:
    arr = np.asarray(xi, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("imaginary frequency xi must be finite and >= 0")
    return arr if arr.ndim else float(arr)


@dataclass(frozen=True)
class MaterialResponse:
    """Permittivity or permeability evaluated on the imaginary axis.

    Models: ``static`` (constant value), ``resonance`` (single-resonance
    value(i*xi) = 1 + (static_value - 1)/(1 + xi**2/omega**2)), and
    ``perfect`` (perfect conductor, signalled as an infinite response and
    consumed by reflection-coefficient code as r_p = +1, r_s = -1).

    Attributes
    ----------
    model : str
        One of "static", "resonance", "perfect".
    value : float
        Zero-frequency value (ignored for "perfect").
    omega : float or None
        Resonance frequency in inverse length units ("resonance" only).
    role : str
        "electric" for a permittivity, "magnetic" for a permeability.
    """

    model: str
    value: float = 1.0
    omega: float | None = None
    role: str = "electric"

    def __post_init__(self):
        if self.model not in ("static", "resonance", "perfect"):
            raise SceneValidationError(f"unknown response model {self.model!r}")
        if self.role not in ("electric", "magnetic"):
            raise SceneValidationError(f"unknown response role {self.role!r}")
        if self.model == "perfect":
            if self.role != "electric":
                raise SceneValidationError(
                    "perfect-conductor model is an electric response"
                )
            return
        v = self.value
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise SceneValidationError("response value must be finite")
        if self.role == "electric" and v < 1.0:
            raise SceneValidationError("electric response requires value >= 1")
        if self.role == "magnetic" and v <= 0.0:
            raise SceneValidationError("magnetic response requires value > 0")
        if self.model == "resonance":
            if self.omega is None or not (
                math.isfinite(self.omega) and self.omega > 0
            ):
                raise SceneValidationError(
                    "resonance model requires omega > 0"
                )

    @staticmethod
    def static(value: float, role: str = "electric") -> "MaterialResponse":
        return MaterialResponse("static", float(value), None, role)

    @staticmethod
    def resonance(
        value: float, omega: float, role: str = "electric"
    ) -> "MaterialResponse":
        return MaterialResponse("resonance", float(value), float(omega), role)

    @staticmethod
    def perfect() -> "MaterialResponse":
        return MaterialResponse("perfect")

    @property
    def is_perfect(self) -> bool:
        return self.model == "perfect"

    @property
    def is_dispersive(self) -> bool:
        return self.model == "resonance"

    @property
    def is_vacuum(self) -> bool:
        """True when the response is identically 1 at all frequencies."""
        return self.model != "perfect" and self.value == 1.0

    def at(self, xi):
        """Response value at imaginary frequency i*xi (scalar or ndarray)."""
        xi = _check_xi(xi)
        if self.model == "perfect":
            return (
                np.full(np.shape(xi), np.inf)
                if isinstance(xi, np.ndarray)
                else math.inf
            )
        if self.model == "static":
            return (
                np.full(np.shape(xi), self.value)
                if isinstance(xi, np.ndarray)
                else self.value
            )
        return 1.0 + (self.value - 1.0) / (1.0 + (xi / self.omega) ** 2)

    def contrast(self, xi):
        """Response value minus one, computed without cancellation.

        At large xi a resonance contrast decays like 1/xi**2; forming it as
        at(xi) - 1.0 would round that tail to zero near machine epsilon, so
        the contrast is evaluated from the model parameters directly.
        """
        xi = _check_xi(xi)
        if self.model == "perfect":
            return (
                np.full(np.shape(xi), np.inf)
                if isinstance(xi, np.ndarray)
                else math.inf
            )
        if self.model == "static":
            return (
                np.full(np.shape(xi), self.value - 1.0)
                if isinstance(xi, np.ndarray)
                else self.value - 1.0
            )
        return (self.value - 1.0) / (1.0 + (xi / self.omega) ** 2)

    def chi(self, xi):
        """Electric susceptibility eps(i*xi) - 1 (electric role only)."""
        if self.role != "electric":
            raise ValueError("chi is defined for electric responses")
        return self.contrast(xi)

    def zeta(self, xi):
        """Inverse-permeability contrast 1/mu(i*xi) - 1 (magnetic role)."""
        if self.role != "magnetic":
            raise ValueError("zeta is defined for magnetic responses")
        c = self.contrast(xi)
        return -c / (1.0 + c)


VACUUM_ELECTRIC = MaterialResponse.static(1.0, "electric")
VACUUM_MAGNETIC = MaterialResponse.static(1.0, "magnetic")


@dataclass(frozen=True)
class Polarizability:
    """Atomic polarizability volume alpha'(i*xi) (units length**3).

    Models: ``static`` (constant alpha'_0) and ``resonance``
    (alpha'(i*xi) = alpha'_0 / (1 + xi**2/omega**2)).
    """

    model: str
    value: float
    omega: float | None = None

    def __post_init__(self):
        if self.model not in ("static", "resonance"):
            raise SceneValidationError(
                f"unknown polarizability model {self.model!r}"
            )
        if not (math.isfinite(self.value) and self.value > 0):
            raise SceneValidationError("polarizability volume must be > 0")
        if self.model == "resonance":
            if self.omega is None or not (
                math.isfinite(self.omega) and self.omega > 0
            ):
                raise SceneValidationError(
                    "resonance polarizability requires omega > 0"
                )

    @staticmethod
    def static(value: float) -> "Polarizability":
        return Polarizability("static", float(value))

    @staticmethod
    def resonance(value: float, omega: float) -> "Polarizability":
        return Polarizability("resonance", float(value), float(omega))

    @property
    def is_dispersive(self) -> bool:
        return self.model == "resonance"

    def at(self, xi):
        """Polarizability volume at imaginary frequency i*xi."""
        xi = _check_xi(xi)
        if self.model == "static":
            return (
                np.full(np.shape(xi), self.value)
                if isinstance(xi, np.ndarray)
                else self.value
            )
        return self.value / (1.0 + (xi / self.omega) ** 2)


@dataclass(frozen=True)
class Atom:
    """Point atom: position (length units) plus polarizability volume."""

    position: tuple[float, float, float]
    polarizability: Polarizability

    def __post_init__(self):
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 3 or any(not math.isfinite(c) for c in pos):
            raise SceneValidationError("atom position must be a finite 3-vector")
        object.__setattr__(self, "position", pos)

    @property
    def r(self) -> np.ndarray:
        return np.array(self.position)


@dataclass(frozen=True)
class PerfectPlate:
    """Perfectly conducting plate occupying z < 0, surface at z = 0."""


@dataclass(frozen=True)
class HalfSpace:
    """Magnetoelectric half-space occupying z < 0."""

    epsilon: MaterialResponse
    mu: MaterialResponse = VACUUM_MAGNETIC

    def __post_init__(self):
        if self.epsilon.role != "electric":
            raise SceneValidationError("half-space epsilon must be electric")
        if self.mu.role != "magnetic":
            raise SceneValidationError("half-space mu must be magnetic")


@dataclass(frozen=True)
class Slab:
    """Planar slab of thickness d occupying -d < z < 0."""

    thickness: float
    epsilon: MaterialResponse
    mu: MaterialResponse = VACUUM_MAGNETIC

    def __post_init__(self):
        if not (math.isfinite(self.thickness) and self.thickness > 0):
            raise SceneValidationError("slab thickness must be > 0")
        if self.epsilon.role != "electric":
            raise SceneValidationError("slab epsilon must be electric")
        if self.mu.role != "magnetic":
            raise SceneValidationError("slab mu must be magnetic")


@dataclass(frozen=True)
class ConductingSphere:
    """Perfectly conducting sphere; neutral and isolated unless grounded."""

    radius: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    grounded: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise SceneValidationError("sphere radius must be > 0")
        c = tuple(float(x) for x in self.center)
        if len(c) != 3 or any(not math.isfinite(x) for x in c):
            raise SceneValidationError("sphere center must be a finite 3-vector")
        object.__setattr__(self, "center", c)


Body = Union[PerfectPlate, HalfSpace, Slab, ConductingSphere]


def _atom_outside(body: Body, position: Sequence[float]) -> bool:
    x, y, z = position
    if isinstance(body, (PerfectPlate, HalfSpace, Slab)):
        return z > 0.0
    if isinstance(body, ConductingSphere):
        d = math.dist(position, body.center)
        return d > body.radius
    raise SceneValidationError(f"unknown body type {type(body).__name__}")


@dataclass(frozen=True)
class Scene:
    """Immutable arrangement of at most one body and up to two atoms.

    Attributes
    ----------
    bodies : tuple of body objects
        Zero or one canonical body.
    atoms : tuple of Atom
        Zero, one, or two atoms, all strictly outside the body.
    length_unit_si : float or None
        Metres per program length unit, used only at the CLI boundary.
    """

    bodies: tuple = ()
    atoms: tuple = ()
    length_unit_si: float | None = None

    def __post_init__(self):
        bodies = tuple(self.bodies)
        atoms = tuple(self.atoms)
        if len(bodies) > 1:
            raise SceneValidationError(
                "a scene holds at most one body (canonical geometries only)"
            )
        for body in bodies:
            if not isinstance(
                body, (PerfectPlate, HalfSpace, Slab, ConductingSphere)
            ):
                raise SceneValidationError(
                    f"unknown body type {type(body).__name__}"
                )
        for atom in atoms:
            if not isinstance(atom, Atom):
                raise SceneValidationError("scene atoms must be Atom instances")
            for body in bodies:
                if not _atom_outside(body, atom.position):
                    raise SceneValidationError(
                        f"atom at {atom.position} is not strictly outside the body"
                    )
        if self.length_unit_si is not None:
            if not (
                math.isfinite(self.length_unit_si) and self.length_unit_si > 0
            ):
                raise SceneValidationError("length_unit_si must be > 0")
        object.__setattr__(self, "bodies", bodies)
        object.__setattr__(self, "atoms", atoms)

    @property
    def body(self) -> Body | None:
        return self.bodies[0] if self.bodies else None


class TensorKind(str, Enum):
    """What a 3x3 Green-tensor value represents."""

    FULL = "full"
    BULK = "bulk"
    SCATTERING = "scattering"
    CURL_LEFT = "curl-left"
    CURL_RIGHT = "curl-right"
    CURL_CURL = "curl-curl"


@dataclass(frozen=True, eq=False)
class GreenTensorValue:
    """A real 3x3 Green-tensor value at purely imaginary frequency."""

    components: np.ndarray
    kind: TensorKind

    def __post_init__(self):
        arr = np.array(self.components, dtype=float)
        if arr.shape != (3, 3):
            raise ValueError("components must be a 3x3 matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("components must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "components", arr)
        object.__setattr__(self, "kind", TensorKind(self.kind))

    @property
    def trace(self) -> float:
        return float(np.trace(self.components))


class Regime(str, Enum):
    """Evaluation regime for dispersion observables.

    RETARDED freezes every response at its zero-frequency value (valid far
    from all bodies; requires static or perfect-conductor models),
    NONRETARDED uses quasi-static kernels (valid close in; requires
    dispersive models so the frequency integrals converge), FULL_DISPERSIVE
    makes no approximation.
    """

    RETARDED = "retarded"
    NONRETARDED = "nonretarded"
    FULL_DISPERSIVE = "full"


def require_regime_compatible(scene: Scene, regime: Regime) -> None:
    """Enforce model constraints a regime imposes on a scene.

    The retarded regime requires static or perfect-conductor material models
    and static atom polarizabilities; dispersive models there are an error
    rather than a silent approximation.
    """
    regime = Regime(regime)
    if regime is not Regime.RETARDED:
        return
    for body in scene.bodies:
        for m in _body_materials(body):
            if m.is_dispersive:
                raise SceneValidationError(
                    "retarded regime requires static or perfect-conductor "
                    "material models"
                )
    for atom in scene.atoms:
        if atom.polarizability.is_dispersive:
            raise SceneValidationError(
                "retarded regime requires static atom polarizabilities"
            )


def _body_materials(body: Body) -> tuple[MaterialResponse, ...]:
    if isinstance(body, (HalfSpace, Slab)):
        return (body.epsilon, body.mu)
    return ()


@dataclass(frozen=True)
class UnitsConvention:
    """Natural internal units with an optional SI boundary conversion.

    Internally hbar = c = eps0 = mu0 = 1; a quantity of natural dimension
    1/length**k converts to SI as value * hbar * c / L**k with L the length
    unit in metres.
    """

    length_unit_si: float | None = None

    HBAR_SI = scipy.constants.hbar  # J s
    C_SI = scipy.constants.c  # m / s

    def to_si(self, value: float, inverse_length_power: int) -> float:
        """Convert a natural-units value of dimension 1/length**k to SI."""
        if self.length_unit_si is None:
            raise ValueError("scene carries no length_unit_si")
        return (
            value
            * self.HBAR_SI
            * self.C_SI
            / self.length_unit_si**inverse_length_power
        )


def evaluate_response(model, xi):
    """Value of a material response or polarizability at i*xi.

    Parameters
    ----------
    model : MaterialResponse, Polarizability, or Atom
        The response to evaluate (an Atom means its polarizability).
    xi : float or ndarray
        Imaginary-frequency argument, finite and >= 0.

    Returns
    -------
    float or ndarray
        Real response value; a perfect conductor yields ``inf`` as a flag
        for reflection-coefficient code, never a finite permittivity.
    """
    if isinstance(model, Atom):
        model = model.polarizability
    if not isinstance(model, (MaterialResponse, Polarizability)):
        raise TypeError("model must be MaterialResponse, Polarizability, or Atom")
    return model.at(xi)


# ---------------------------------------------------------------------------
# Scene JSON schema
# ---------------------------------------------------------------------------

_RESPONSE_KEYS = {"model", "value", "omega"}
_BODY_KEYS = {"type", "epsilon", "mu", "d", "radius", "center", "grounded"}
_ATOM_KEYS = {"position", "alpha"}
_TOP_KEYS = {"bodies", "atoms", "length_unit_si"}


def _parse_response(obj, role: str, where: str) -> MaterialResponse:
    if not isinstance(obj, dict):
        raise SceneValidationError(f"{where}: response must be an object")
    unknown = set(obj) - _RESPONSE_KEYS
    if unknown:
        raise SceneValidationError(f"{where}: unknown keys {sorted(unknown)}")
    model = obj.get("model")
    if model == "perfect":
        if role != "electric":
            raise SceneValidationError(
                f"{where}: perfect model applies to epsilon only"
            )
        return MaterialResponse.perfect()
    if model == "static":
        if "value" not in obj:
            raise SceneValidationError(f"{where}: static model needs a value")
        return MaterialResponse.static(obj["value"], role)
    if model == "resonance":
        if "value" not in obj or "omega" not in obj:
            raise SceneValidationError(
                f"{where}: resonance model needs value and omega"
            )
        return MaterialResponse.resonance(obj["value"], obj["omega"], role)
    raise SceneValidationError(f"{where}: unknown response model {model!r}")


def _parse_polarizability(obj, where: str) -> Polarizability:
    if not isinstance(obj, dict):
        raise SceneValidationError(f"{where}: alpha must be an object")
    unknown = set(obj) - _RESPONSE_KEYS
    if unknown:
        raise SceneValidationError(f"{where}: unknown keys {sorted(unknown)}")
    model = obj.get("model")
    if model == "static":
        if "value" not in obj:
            raise SceneValidationError(f"{where}: static alpha needs a value")
        return Polarizability.static(obj["value"])
    if model == "resonance":
        if "value" not in obj or "omega" not in obj:
            raise SceneValidationError(
                f"{where}: resonance alpha needs value and omega"
            )
        return Polarizability.resonance(obj["value"], obj["omega"])
    raise SceneValidationError(
        f"{where}: unknown polarizability model {model!r}"
    )


def _parse_body(obj, index: int) -> Body:
    where = f"bodies[{index}]"
    if not isinstance(obj, dict):
        raise SceneValidationError(f"{where}: body must be an object")
    unknown = set(obj) - _BODY_KEYS
    if unknown:
        raise SceneValidationError(f"{where}: unknown keys {sorted(unknown)}")
    kind = obj.get("type")
    if kind == "perfect_plate":
        return PerfectPlate()
    if kind in ("half_space", "slab"):
        if "epsilon" not in obj:
            raise SceneValidationError(f"{where}: {kind} requires epsilon")
        eps = _parse_response(obj["epsilon"], "electric", f"{where}.epsilon")
        mu = (
            _parse_response(obj["mu"], "magnetic", f"{where}.mu")
            if "mu" in obj
            else VACUUM_MAGNETIC
        )
        if kind == "half_space":
            return HalfSpace(eps, mu)
        if "d" not in obj:
            raise SceneValidationError(f"{where}: slab requires thickness d")
        return Slab(float(obj["d"]), eps, mu)
    if kind == "sphere":
        if "radius" not in obj:
            raise SceneValidationError(f"{where}: sphere requires radius")
        center = obj.get("center", (0.0, 0.0, 0.0))
        return ConductingSphere(
            float(obj["radius"]),
            tuple(float(c) for c in center),
            bool(obj.get("grounded", False)),
        )
    raise SceneValidationError(f"{where}: unknown body type {kind!r}")


def _parse_atom(obj, index: int) -> Atom:
    where = f"atoms[{index}]"
    if not isinstance(obj, dict):
        raise SceneValidationError(f"{where}: atom must be an object")
    unknown = set(obj) - _ATOM_KEYS
    if unknown:
        raise SceneValidationError(f"{where}: unknown keys {sorted(unknown)}")
    if "position" not in obj or "alpha" not in obj:
        raise SceneValidationError(f"{where}: atom needs position and alpha")
    pos = obj["position"]
    if not (isinstance(pos, (list, tuple)) and len(pos) == 3):
        raise SceneValidationError(f"{where}: position must be [x, y, z]")
    return Atom(
        tuple(float(c) for c in pos),
        _parse_polarizability(obj["alpha"], f"{where}.alpha"),
    )


def scene_from_json(source) -> Scene:
    """Build a Scene from its JSON description.

    Parameters
    ----------
    source : str or dict
        JSON text or an already-decoded object with keys "bodies" (array),
        "atoms" (array), and optional "length_unit_si" (metres per length
        unit).

    Raises
    ------
    SceneValidationError
        On malformed JSON, unknown keys, or physically invalid content.
    """
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SceneValidationError(f"scene is not valid JSON: {exc}") from exc
    if not isinstance(source, dict):
        raise SceneValidationError("scene JSON must be an object")
    unknown = set(source) - _TOP_KEYS
    if unknown:
        raise SceneValidationError(f"unknown top-level keys {sorted(unknown)}")
    bodies = source.get("bodies", [])
    atoms = source.get("atoms", [])
    if not isinstance(bodies, list) or not isinstance(atoms, list):
        raise SceneValidationError("bodies and atoms must be arrays")
    return Scene(
        bodies=tuple(_parse_body(b, i) for i, b in enumerate(bodies)),
        atoms=tuple(_parse_atom(a, i) for i, a in enumerate(atoms)),
        length_unit_si=(
            float(source["length_unit_si"])
            if source.get("length_unit_si") is not None
            else None
        ),
    )
