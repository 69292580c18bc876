"""Command-line front end for the dispersion-force engines.

Subcommands cover the single-atom potential and force, the two-atom
potential, the cavity pressure, the short-distance coefficients, the
finite-size scale functions, the plate-assisted enhancement map, and the
scaling-law survey.  Scenes come from JSON files (schema in
:func:`dispersia.core.scene_from_json`); results go to stdout or a file
as JSON objects with fixed key order or as CSV with one ``#`` header
line.  Floats are written in shortest round-trip form, so repeated runs
with identical inputs produce byte-identical output.

Internally everything is computed in natural units (hbar = c = 1) with
lengths in the scene's length unit.  When the scene declares
``length_unit_si`` (metres per length unit), scalar results are converted
to SI on output; otherwise they are reported in natural units.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.constants import c as _C_SI
from scipy.constants import hbar as _HBAR_SI

from .core import (
    Atom,
    HalfSpace,
    MaterialResponse,
    PerfectPlate,
    Polarizability,
    Scene,
    SceneValidationError,
    scene_from_json,
)
from .potentials import (
    cp_force,
    cp_potential,
    lifshitz_pressure,
    nonretarded_halfspace_coefficients,
    vdw_potential,
)
from .quadrature import NonConvergenceError, QuadratureConfig
from .scaling import (
    MapGridSpec,
    enhancement_map,
    scale_function,
    verify_scaling_laws,
)

_HBAR_C = _HBAR_SI * _C_SI  # J m

_REGIMES = ("retarded", "nonretarded", "full")


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(value))


def _thread_count() -> int | None:
    raw = os.environ.get("DISPERSIA_THREADS")
    if raw is None:
        return None
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        raise SceneValidationError(
            f"DISPERSIA_THREADS must be a positive integer, got {raw!r}"
        )
    return count


def _load_scene(path: str) -> Scene:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SceneValidationError(f"cannot read scene file {path}: {exc}")
    return scene_from_json(text)


def _quad_config(args) -> QuadratureConfig | None:
    if args.rel_tol is None and args.abs_tol is None:
        return None
    defaults = QuadratureConfig()
    return QuadratureConfig(
        rel_tol=args.rel_tol if args.rel_tol is not None else defaults.rel_tol,
        abs_tol=args.abs_tol if args.abs_tol is not None else defaults.abs_tol,
    )


def _si_factor(scene: Scene, length_power: int) -> tuple[float, bool]:
    """Conversion factor for a natural-unit quantity of dimension
    1/length**(-length_power) ... i.e. value_SI = value_nat * hbar*c * L**length_power
    where L is the scene's length unit in metres."""
    unit = scene.length_unit_si
    if unit is None:
        return 1.0, False
    return _HBAR_C * unit**length_power, True


def _emit_json(inputs: dict, result, error_estimate, units) -> str:
    def clean(obj):
        if isinstance(obj, float) and not math.isfinite(obj):
            return None
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        return obj

    payload = {
        "inputs": clean(inputs),
        "result": clean(result),
        "error_estimate": clean(error_estimate),
        "units": units,
    }
    return json.dumps(payload, indent=2) + "\n"


def _emit_csv(header: str, rows) -> str:
    def cell(value) -> str:
        if isinstance(value, float):
            return _fmt(value)
        text = str(value)
        return f'"{text}"' if "," in text else text

    lines = [f"# {header}"]
    for row in rows:
        lines.append(",".join(cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _scalar_output(args, inputs: dict, result, error, units: str, fields) -> str:
    """Render a scalar result as the JSON envelope or a one-row CSV."""
    if args.format == "json":
        return _emit_json(inputs, result, error, units)
    names = ",".join(name for name, _ in fields)
    values = tuple(value for _, value in fields)
    return _emit_csv(f"{names} (units: {units})", [values])


def _atom_for(args, scene: Scene) -> Atom:
    """The probe atom: the scene's first atom, with CLI overrides."""
    if scene.atoms:
        atom = scene.atoms[0]
        if args.z is not None:
            atom = Atom((0.0, 0.0, args.z), atom.polarizability)
        return atom
    if args.z is None:
        raise SceneValidationError(
            "the scene has no atom; place one with --z (and --alpha/--alpha-omega)"
        )
    if args.alpha_omega is not None:
        alpha = Polarizability.resonance(args.alpha, args.alpha_omega)
    else:
        alpha = Polarizability.static(args.alpha)
    return Atom((0.0, 0.0, args.z), alpha)


def _energy_units(converted: bool) -> str:
    return "J" if converted else "energy (natural units, hbar = c = 1)"


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _run_cp(args) -> str:
    scene = _load_scene(args.scene)
    atom = _atom_for(args, scene)
    value, error = cp_potential(
        atom, scene, args.regime, _quad_config(args), full_output=True
    )
    factor, converted = _si_factor(scene, -1)
    inputs = {
        "scene": args.scene,
        "z": atom.position[2],
        "regime": args.regime,
    }
    return _scalar_output(
        args,
        inputs,
        value * factor,
        error * factor,
        _energy_units(converted),
        [("z", atom.position[2]), ("potential", value * factor),
         ("error_estimate", error * factor)],
    )


def _run_cp_force(args) -> str:
    scene = _load_scene(args.scene)
    atom = _atom_for(args, scene)
    force = cp_force(atom, scene, args.regime, _quad_config(args))
    factor, converted = _si_factor(scene, -2)
    force = [float(f) * factor for f in force]
    units = "N" if converted else "force (natural units, hbar = c = 1)"
    inputs = {
        "scene": args.scene,
        "z": atom.position[2],
        "regime": args.regime,
    }
    return _scalar_output(
        args,
        inputs,
        force,
        None,
        units,
        [("Fx", force[0]), ("Fy", force[1]), ("Fz", force[2])],
    )


def _run_vdw(args) -> str:
    scene = _load_scene(args.scene)
    if len(scene.atoms) < 2:
        raise SceneValidationError("vdw needs two atoms in the scene")
    result = vdw_potential(
        scene.atoms[0],
        scene.atoms[1],
        scene,
        args.regime,
        _quad_config(args),
    )
    factor, converted = _si_factor(scene, -1)
    parts = {
        "total": result.total * factor,
        "free_space": result.free_space * factor,
        "body_induced": result.body_induced * factor,
    }
    error = result.error_estimate * factor
    inputs = {"scene": args.scene, "regime": args.regime}
    return _scalar_output(
        args,
        inputs,
        parts,
        error,
        _energy_units(converted),
        [("total", parts["total"]), ("free_space", parts["free_space"]),
         ("body_induced", parts["body_induced"]), ("error_estimate", error)],
    )


def _run_pressure(args) -> str:
    scene = _load_scene(args.scene)
    if scene.body is None:
        raise SceneValidationError("pressure needs a body in the scene")
    other = scene
    if args.scene2 is not None:
        other = _load_scene(args.scene2)
        if other.body is None:
            raise SceneValidationError("pressure needs a body in scene2")
    value, error = lifshitz_pressure(
        args.gap,
        scene.body,
        other.body,
        args.regime,
        _quad_config(args),
        full_output=True,
    )
    factor, converted = _si_factor(scene, -4)
    units = "Pa" if converted else "pressure (natural units, hbar = c = 1)"
    inputs = {
        "scene": args.scene,
        "scene2": args.scene2,
        "gap": args.gap,
        "regime": args.regime,
    }
    return _scalar_output(
        args,
        inputs,
        value * factor,
        error * factor,
        units,
        [("gap", args.gap), ("pressure", value * factor),
         ("error_estimate", error * factor)],
    )


def _run_coeffs(args) -> str:
    scene = _load_scene(args.scene)
    if not scene.atoms:
        raise SceneValidationError("coeffs needs an atom in the scene")
    body = scene.body
    if isinstance(body, PerfectPlate):
        epsilon, mu = MaterialResponse.perfect(), None
    elif isinstance(body, HalfSpace):
        epsilon, mu = body.epsilon, body.mu
    else:
        raise SceneValidationError(
            "coeffs needs a half-space or perfect-plate body"
        )
    coeffs = nonretarded_halfspace_coefficients(
        scene.atoms[0], epsilon, mu, _quad_config(args)
    )
    unit = scene.length_unit_si
    if unit is not None:
        c3, c1 = coeffs.c3 * _HBAR_C * unit**2, coeffs.c1 * _HBAR_C
        c3_err, c1_err = coeffs.c3_error * _HBAR_C * unit**2, coeffs.c1_error * _HBAR_C
        units = "C3: J*m^3, C1: J*m"
    else:
        c3, c1, c3_err, c1_err = (
            coeffs.c3, coeffs.c1, coeffs.c3_error, coeffs.c1_error
        )
        units = "C3: energy*length^3, C1: energy*length (natural units)"
    inputs = {"scene": args.scene}
    return _scalar_output(
        args,
        inputs,
        {"c3": c3, "c1": c1},
        {"c3": c3_err, "c1": c1_err},
        units,
        [("c3", c3), ("c1", c1), ("c3_error", c3_err), ("c1_error", c1_err)],
    )


def _run_scalefn(args) -> str:
    if args.points < 2:
        raise SceneValidationError("scalefn needs at least 2 points")
    if not (0.0 < args.xmin < args.xmax):
        raise SceneValidationError("scalefn needs 0 < xmin < xmax")
    xs = np.geomspace(args.xmin, args.xmax, args.points)
    epsilon = (
        MaterialResponse.static(args.epsilon)
        if args.epsilon is not None
        else None
    )
    curve = scale_function(
        args.family, tuple(xs), _quad_config(args), epsilon=epsilon
    )
    if args.format == "json":
        return _emit_json(
            {
                "family": curve.family,
                "xmin": args.xmin,
                "xmax": args.xmax,
                "points": args.points,
            },
            [[x, f] for x, f in curve.samples],
            None,
            "dimensionless (x = size/distance, f saturates to 1)",
        )
    return _emit_csv(
        "x,f (dimensionless; f -> 1 as x -> inf)", list(curve.samples)
    )


def _run_map2d(args) -> str:
    spec = MapGridSpec(
        half_width=args.half_width,
        height=args.height,
        nx=args.nx,
        nz=args.nz,
        exclusion_radius=args.exclusion_radius,
    )
    grid = enhancement_map(
        args.zB, spec, _quad_config(args), workers=_thread_count()
    )
    if args.format == "json":
        return _emit_json(
            {"zB": args.zB, "nx": spec.nx, "nz": spec.nz},
            {
                "x": [float(v) for v in grid.x],
                "z": [float(v) for v in grid.z],
                "ratio": [[float(v) for v in row] for row in grid.ratio],
            },
            None,
            "dimensionless ratio U/U_free; lengths in scene units",
        )
    rows = []
    for i, z in enumerate(grid.z):
        for j, x in enumerate(grid.x):
            rows.append((float(x), float(z), float(grid.ratio[i, j])))
    return _emit_csv("x,z,ratio (lengths in scene units; ratio dimensionless)", rows)


def _run_verify_scaling(args) -> str:
    reports = verify_scaling_laws(_quad_config(args))
    if args.format == "json":
        return _emit_json(
            {"cells": len(reports)},
            [
                {
                    "quantity": r.quantity,
                    "column": r.column,
                    "fitted_exponent": r.exponent,
                    "expected_exponent": r.expected,
                    "deviation": r.deviation,
                    "amplitude": r.amplitude,
                    "warning": r.warning,
                }
                for r in reports
            ],
            None,
            "dimensionless exponents",
        )
    rows = [
        (
            r.quantity,
            r.column,
            float(r.exponent),
            float(r.expected),
            float(r.deviation),
            float(r.amplitude),
            r.warning or "",
        )
        for r in reports
    ]
    return _emit_csv(
        "quantity,column,fitted_exponent,expected_exponent,deviation,amplitude,warning",
        rows,
    )


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(parser, *, scene=True, regime=True, fmt="json"):
    if scene:
        parser.add_argument("--scene", required=True, help="scene JSON file")
    if regime:
        parser.add_argument(
            "--regime",
            choices=_REGIMES,
            default="retarded",
            help="frequency-integration regime (default: retarded)",
        )
    parser.add_argument(
        "--format",
        choices=("json", "csv"),
        default=fmt,
        help=f"output format (default: {fmt})",
    )
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument(
        "--rel-tol", type=float, default=None, help="quadrature relative tolerance"
    )
    parser.add_argument(
        "--abs-tol", type=float, default=None, help="quadrature absolute tolerance"
    )


def _add_probe_atom(parser):
    parser.add_argument(
        "--z", type=float, default=None, help="atom height above the body"
    )
    parser.add_argument(
        "--alpha",
        type=float,
        default=1.0,
        help="static polarizability volume when the scene has no atom",
    )
    parser.add_argument(
        "--alpha-omega",
        type=float,
        default=None,
        help="resonance frequency making the probe atom dispersive",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dispersia",
        description="Dispersion forces from electromagnetic Green tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cp", help="single-atom potential")
    _add_common(p)
    _add_probe_atom(p)
    p.set_defaults(handler=_run_cp)

    p = sub.add_parser("cp-force", help="force on a single atom")
    _add_common(p)
    _add_probe_atom(p)
    p.set_defaults(handler=_run_cp_force)

    p = sub.add_parser("vdw", help="two-atom potential (scene's first two atoms)")
    _add_common(p)
    p.set_defaults(handler=_run_vdw)

    p = sub.add_parser("pressure", help="pressure between planar half-spaces")
    _add_common(p)
    p.add_argument("--gap", type=float, required=True, help="surface separation")
    p.add_argument(
        "--scene2", default=None, help="scene JSON supplying the second material"
    )
    p.set_defaults(handler=_run_pressure)

    p = sub.add_parser(
        "coeffs", help="short-distance coefficients C3 and C1 of -C3/z^3 + C1/z"
    )
    _add_common(p, regime=False)
    p.set_defaults(handler=_run_coeffs)

    p = sub.add_parser("scalefn", help="finite-size scale function f(x)")
    _add_common(p, scene=False, regime=False, fmt="csv")
    p.add_argument(
        "--family",
        required=True,
        choices=("plate", "plate-thickness", "sphere", "sphere-radius"),
    )
    p.add_argument("--xmin", type=float, default=1e-3)
    p.add_argument("--xmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=40)
    p.add_argument(
        "--epsilon",
        type=float,
        default=None,
        help="static slab permittivity (plate family; default silicon 11.7)",
    )
    p.set_defaults(handler=_run_scalefn)

    p = sub.add_parser("map2d", help="plate-assisted enhancement map")
    _add_common(p, scene=False, regime=False, fmt="csv")
    p.add_argument("--zB", type=float, required=True, help="fixed atom height")
    p.add_argument("--half-width", type=float, default=4.0)
    p.add_argument("--height", type=float, default=4.0)
    p.add_argument("--nx", type=int, default=161)
    p.add_argument("--nz", type=int, default=80)
    p.add_argument("--exclusion-radius", type=float, default=0.15)
    p.set_defaults(handler=_run_map2d)

    p = sub.add_parser("verify-scaling", help="scaling-law survey (12 cells)")
    _add_common(p, scene=False, regime=False, fmt="csv")
    p.add_argument(
        "--all",
        action="store_true",
        help="measure every quantity and column (the default and only mode)",
    )
    p.set_defaults(handler=_run_verify_scaling)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = args.handler(args)
    except SceneValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
