"""Command-line surface: deterministic artifact emission for all modules.

Subcommands: dirac-check, shift-check, shift, atlas validate,
pendulum spectrum, pendulum monodromy.  Configuration comes from an
optional TOML file plus flag overrides (flags win).  Exit codes: 0 on
success, 2 on configuration or input errors, 3 on numerical or domain
failures.  Data files never contain timestamps; the run manifest does.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .atlas import ActionAngleChart, ChartAtlas, LatticeLabel, atlas_from_json
from .errors import ConfigError, DomainError
from .grid import (
    GridSpec,
    dirac_residual,
    dirac_test_section,
    shift_flow_single_valuedness,
)
from .observables import Observable
from .pendulum import bs_spectrum, monodromy, monodromy_json, spectrum_csv, spectrum_svg
from .shifts import apply_word, parse_word
from .states import QuantumState, state_to_json

log = logging.getLogger("bsq")

_GRID_KEYS = {"dim", "box_halfwidth", "n_action", "n_angle"}
_PENDULUM_KEYS = {
    "planck_h",
    "window",
    "exclusion_radius",
    "loop_center",
    "loop_radius",
    "loop_samples",
    "orientation",
}
_TOP_KEYS = {"planck_h", "grid", "pendulum"}


@dataclass
class RunConfig:
    """Validated run configuration; unknown keys are rejected."""

    planck_h: float = 1.0
    grid_dim: int = 2
    grid_box_halfwidth: float = None
    grid_n_action: int = 49
    grid_n_angle: int = 16
    pendulum_planck_h: float = 0.1
    pendulum_window: tuple = (-0.95, 2.0, -1.2, 1.2)
    pendulum_exclusion_radius: float = 0.02
    loop_center: tuple = (1.0, 0.0)
    loop_radius: float = 0.5
    loop_samples: int = 256
    orientation: str = "ccw"

    def validate(self):
        if not self.planck_h > 0:
            raise ConfigError("planck_h must be positive")
        if self.grid_dim not in (1, 2):
            raise ConfigError("grid.dim must be 1 or 2")
        if self.grid_n_action < 9 or self.grid_n_angle < 8:
            raise ConfigError("grid resolution too small")
        if not self.pendulum_planck_h > 0:
            raise ConfigError("pendulum.planck_h must be positive")
        if len(self.pendulum_window) != 4:
            raise ConfigError("pendulum.window needs 4 entries")
        if not self.loop_radius > 0:
            raise ConfigError("loop radius must be positive")
        if self.loop_samples < 16 or self.loop_samples % 4:
            raise ConfigError("loop samples must be a multiple of 4, at least 16")
        if self.orientation not in ("ccw", "cw"):
            raise ConfigError("orientation must be ccw or cw")
        return self

    def echo(self):
        return {
            "planck_h": self.planck_h,
            "grid": {
                "dim": self.grid_dim,
                "box_halfwidth": self.grid_box_halfwidth,
                "n_action": self.grid_n_action,
                "n_angle": self.grid_n_angle,
            },
            "pendulum": {
                "planck_h": self.pendulum_planck_h,
                "window": list(self.pendulum_window),
                "exclusion_radius": self.pendulum_exclusion_radius,
                "loop_center": list(self.loop_center),
                "loop_radius": self.loop_radius,
                "loop_samples": self.loop_samples,
                "orientation": self.orientation,
            },
        }


def load_config(path=None, overrides=None):
    """Read TOML config (if given), apply flag overrides, validate."""
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        unknown = set(doc) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "planck_h" in doc:
            cfg.planck_h = float(doc["planck_h"])
        grid = doc.get("grid", {})
        unknown = set(grid) - _GRID_KEYS
        if unknown:
            raise ConfigError(f"unknown [grid] keys: {sorted(unknown)}")
        cfg.grid_dim = int(grid.get("dim", cfg.grid_dim))
        if "box_halfwidth" in grid:
            cfg.grid_box_halfwidth = float(grid["box_halfwidth"])
        cfg.grid_n_action = int(grid.get("n_action", cfg.grid_n_action))
        cfg.grid_n_angle = int(grid.get("n_angle", cfg.grid_n_angle))
        pend = doc.get("pendulum", {})
        unknown = set(pend) - _PENDULUM_KEYS
        if unknown:
            raise ConfigError(f"unknown [pendulum] keys: {sorted(unknown)}")
        cfg.pendulum_planck_h = float(pend.get("planck_h", cfg.pendulum_planck_h))
        if "window" in pend:
            cfg.pendulum_window = tuple(float(x) for x in pend["window"])
        cfg.pendulum_exclusion_radius = float(
            pend.get("exclusion_radius", cfg.pendulum_exclusion_radius)
        )
        if "loop_center" in pend:
            cfg.loop_center = tuple(float(x) for x in pend["loop_center"])
        cfg.loop_radius = float(pend.get("loop_radius", cfg.loop_radius))
        cfg.loop_samples = int(pend.get("loop_samples", cfg.loop_samples))
        cfg.orientation = str(pend.get("orientation", cfg.orientation))
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def atomic_write(path, text):
    """Write-temp-then-rename so partial files never appear."""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def emit_manifest(command, cfg, started, results, path=None):
    doc = {
        "tool": "bsq",
        "version": __version__,
        "command": command,
        "config": cfg.echo() if cfg is not None else None,
        "started_unix": started,
        "wall_seconds": time.time() - started,
        "results": results,
    }
    text = json.dumps(doc, indent=2)
    if path:
        atomic_write(path, text + "\n")
    else:
        print(text, file=sys.stderr)


# -- observable registry for dirac-check -------------------------------------


def _family(dim=2):
    return {
        "j1": Observable.action(dim, 0),
        "j2": Observable.action(dim, 1),
        "j1^2": Observable.action(dim, 0, power=2),
        "cos1": Observable.cos_angle(dim, (1, 0)),
        "sin2": Observable.sin_angle(dim, (0, 1)),
        "j1*cos2": Observable.action(dim, 0) * Observable.cos_angle(dim, (0, 1)),
    }


def default_pairs():
    names = list(_family())
    return [(names[i], names[j]) for i in range(len(names)) for j in range(i + 1, len(names))]


def parse_pair(text):
    """Parse 'f=j1,g=j2' against the observable registry."""
    try:
        f_part, g_part = text.split(",")
        f_name = f_part.split("=")[1].strip()
        g_name = g_part.split("=")[1].strip()
    except IndexError:
        raise ConfigError(f"malformed pair spec {text!r} (want f=NAME,g=NAME)") from None
    except ValueError:
        raise ConfigError(f"malformed pair spec {text!r} (want f=NAME,g=NAME)") from None
    family = _family()
    for name in (f_name, g_name):
        if name not in family:
            raise ConfigError(f"unknown observable {name!r}; choose from {sorted(family)}")
    return f_name, g_name


def run_dirac_suite(cfg, pairs, floor=1e-12, min_order=3.5):
    """Residuals at two action resolutions with observed convergence orders.

    A pair passes when both residuals sit at the rounding floor or when the
    observed order under action-grid doubling reaches min_order.
    """
    family = _family()
    half = cfg.grid_box_halfwidth if cfg.grid_box_halfwidth else 2.0 * cfg.planck_h
    n_coarse = cfg.grid_n_action
    n_fine = 2 * n_coarse - 1  # halves the spacing exactly

    def residuals(n_action):
        spec = GridSpec(
            (-half, -half),
            (half, half),
            (n_action, n_action),
            (cfg.grid_n_angle, cfg.grid_n_angle),
            cfg.planck_h,
        )
        psi = dirac_test_section(spec)
        return {
            (fn, gn): dirac_residual(family[fn], family[gn], psi) for fn, gn in pairs
        }

    coarse = residuals(n_coarse)
    fine = residuals(n_fine)
    rows = []
    for key in pairs:
        r1, r2 = coarse[key], fine[key]
        at_floor = r1 < floor and r2 < floor
        order = math.log2(r1 / r2) if (r1 > 0 and r2 > 0) else float("inf")
        ok = at_floor or order >= min_order
        rows.append(
            {
                "f": key[0],
                "g": key[1],
                "coarse": r1,
                "fine": r2,
                "order": None if at_floor else order,
                "floor": at_floor,
                "pass": ok,
            }
        )
    return rows


# -- subcommand implementations ----------------------------------------------


def cmd_dirac_check(args):
    cfg = load_config(args.config)
    started = time.time()
    pairs = [parse_pair(p) for p in args.pairs] if args.pairs else default_pairs()
    rows = run_dirac_suite(cfg, pairs)
    print(f"{'f':>8} {'g':>8} {'coarse':>12} {'fine':>12} {'order':>7}  verdict")
    for row in rows:
        order = "floor" if row["floor"] else f"{row['order']:.2f}"
        verdict = "pass" if row["pass"] else "FAIL"
        print(
            f"{row['f']:>8} {row['g']:>8} {row['coarse']:>12.3e} "
            f"{row['fine']:>12.3e} {order:>7}  {verdict}"
        )
    ok = all(row["pass"] for row in rows)
    emit_manifest(
        "dirac-check",
        cfg,
        started,
        {"pairs": len(rows), "all_pass": ok},
        args.manifest,
    )
    return 0 if ok else 3


def cmd_shift_check(args):
    cfg = load_config(args.config)
    started = time.time()
    half = cfg.grid_box_halfwidth if cfg.grid_box_halfwidth else 2.0 * cfg.planck_h
    n_action = cfg.grid_n_action
    # spacing must divide h and h/2 for exact index shifts
    steps = (n_action - 1) / (2.0 * half / cfg.planck_h)
    if abs(steps - round(steps)) > 1e-9 or round(steps) % 2:
        raise ConfigError(
            "grid spacing must divide planck_h/2: choose n_action so that "
            "(n_action - 1) * planck_h / (2 * box_halfwidth) is an even integer"
        )
    spec = GridSpec((-half,), (half,), (n_action,), (max(cfg.grid_n_angle, 32),), cfg.planck_h)
    at_h = shift_flow_single_valuedness(spec, 0)
    at_half = shift_flow_single_valuedness(spec, 0, t=0.5 * cfg.planck_h)
    print(f"two-window discrepancy at t =  h : {at_h:.3e}")
    print(f"two-window discrepancy at t = h/2: {at_half:.3e}  (negative control)")
    ok = at_h < 1e-12 and at_half > 0.1
    print("single-valuedness holds exactly at t = h" if ok else "FAIL")
    emit_manifest(
        "shift-check",
        cfg,
        started,
        {"discrepancy_at_h": at_h, "discrepancy_at_half_h": at_half, "pass": ok},
        args.manifest,
    )
    return 0 if ok else 3


def _parse_label(text):
    try:
        chart, comps = text.split(":")
        return LatticeLabel(int(chart), tuple(int(x) for x in comps.split(",")))
    except ValueError:
        raise ConfigError(f"malformed label {text!r} (want CHART:n1,n2,...)") from None


def _default_atlas(dim, planck_h, halfwidth_units=100):
    half = halfwidth_units * planck_h
    chart = ActionAngleChart(0, (-half,) * dim, (half,) * dim)
    return ChartAtlas([chart], (), planck_h=planck_h)


def cmd_shift(args):
    cfg = load_config(args.config)
    started = time.time()
    label = _parse_label(args.label)
    try:
        steps = parse_word(args.word) if args.word else ()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.atlas:
        with open(args.atlas) as fh:
            atlas = atlas_from_json(fh.read())
    else:
        atlas = _default_atlas(label.dim, cfg.planck_h)
    state = QuantumState.basis(label, atlas=atlas)
    result = apply_word(steps, state, atlas)
    payload = {
        "state": json.loads(state_to_json(result)),
        "phase_angle": 0.0,
        "phase": [1.0, 0.0],
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        atomic_write(args.out, text + "\n")
    else:
        print(text)
    emit_manifest(
        "shift", cfg, started, {"steps": len(steps), "labels": len(result.amplitudes)},
        args.manifest,
    )
    return 0


def cmd_atlas_validate(args):
    started = time.time()
    try:
        with open(args.path) as fh:
            atlas = atlas_from_json(fh.read())
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid atlas: {exc}", file=sys.stderr)
        return 2
    from .atlas import is_globally_labelable

    ok, witness = is_globally_labelable(atlas)
    payload = {
        "charts": len(atlas.charts),
        "transitions": len(atlas.transitions),
        "planck_h": atlas.planck_h,
        "globally_labelable": ok,
        "witness_loop": witness,
    }
    print(json.dumps(payload, indent=2))
    emit_manifest("atlas validate", None, started, payload, args.manifest)
    return 0


def cmd_pendulum_spectrum(args):
    cfg = load_config(
        args.config,
        {
            "pendulum_planck_h": args.planck_h,
            "pendulum_exclusion_radius": args.exclusion_radius,
            "pendulum_window": tuple(args.window) if args.window else None,
        },
    )
    started = time.time()
    result = bs_spectrum(
        cfg.pendulum_window,
        cfg.pendulum_planck_h,
        exclusion_radius=cfg.pendulum_exclusion_radius,
    )
    for warning in result.warnings:
        log.warning("%s", warning)
    csv = spectrum_csv(result)
    if args.out:
        atomic_write(args.out, csv)
    else:
        sys.stdout.write(csv)
    if args.svg:
        atomic_write(args.svg, spectrum_svg(result))
    emit_manifest(
        "pendulum spectrum",
        cfg,
        started,
        {"points": len(result.points), "warnings": len(result.warnings)},
        args.manifest,
    )
    return 0


def cmd_pendulum_monodromy(args):
    cfg = load_config(
        args.config,
        {
            "loop_radius": args.radius,
            "loop_samples": args.samples,
            "orientation": args.orientation,
        },
    )
    started = time.time()
    report = monodromy(
        center=cfg.loop_center,
        radius=cfg.loop_radius,
        samples=cfg.loop_samples,
        orientation=cfg.orientation,
    )
    text = monodromy_json(report)
    if args.out:
        atomic_write(args.out, text + "\n")
    else:
        print(text)
    emit_manifest(
        "pendulum monodromy",
        cfg,
        started,
        {
            "matrix": [list(r) for r in report.matrix],
            "residual": report.residual,
            "orientation": report.orientation,
        },
        args.manifest,
    )
    return 0


# -- argument parsing ----------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bsq",
        description="Bohr-Sommerfeld quantization toolkit",
    )
    parser.add_argument("--version", action="version", version=f"bsq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--manifest", help="write the run manifest to this path")

    p = sub.add_parser("dirac-check", help="commutation-relation residuals and orders")
    common(p)
    p.add_argument("--pairs", action="append", help="pair spec f=NAME,g=NAME (repeatable)")
    p.set_defaults(fn=cmd_dirac_check)

    p = sub.add_parser("shift-check", help="single-valuedness of the time-h shift flow")
    common(p)
    p.set_defaults(fn=cmd_shift_check)

    p = sub.add_parser("shift", help="apply a shift word to a basis state")
    common(p)
    p.add_argument("--word", default="", help="word grammar: 'a:1,0 b:0,1 ...'")
    p.add_argument("--label", required=True, help="start label CHART:n1,n2,...")
    p.add_argument("--atlas", help="atlas JSON file (default: one wide chart)")
    p.add_argument("--out", help="write the state JSON here instead of stdout")
    p.set_defaults(fn=cmd_shift)

    p = sub.add_parser("atlas", help="atlas utilities")
    atlas_sub = p.add_subparsers(dest="atlas_command", required=True)
    q = atlas_sub.add_parser("validate", help="validate an atlas JSON document")
    q.add_argument("path")
    q.add_argument("--manifest", help="write the run manifest to this path")
    q.set_defaults(fn=cmd_atlas_validate)

    p = sub.add_parser("pendulum", help="spherical pendulum computations")
    pend_sub = p.add_subparsers(dest="pendulum_command", required=True)

    q = pend_sub.add_parser("spectrum", help="Bohr-Sommerfeld joint spectrum CSV/SVG")
    common(q)
    q.add_argument("--planck-h", dest="planck_h", type=float)
    q.add_argument("--window", nargs=4, type=float, metavar=("HMIN", "HMAX", "JMIN", "JMAX"))
    q.add_argument("--exclusion-radius", dest="exclusion_radius", type=float)
    q.add_argument("--out", help="CSV output path (default stdout)")
    q.add_argument("--svg", help="also write an SVG scatter plot")
    q.set_defaults(fn=cmd_pendulum_spectrum)

    q = pend_sub.add_parser("monodromy", help="monodromy matrix around the critical value")
    common(q)
    q.add_argument("--radius", type=float)
    q.add_argument("--samples", type=int)
    q.add_argument("--orientation", choices=("ccw", "cw"))
    q.add_argument("--out", help="JSON output path (default stdout)")
    q.set_defaults(fn=cmd_pendulum_monodromy)

    return parser


def main(argv=None):
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("BS_LOG", "error"), logging.ERROR
    )
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
