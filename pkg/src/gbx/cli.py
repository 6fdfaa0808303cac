"""Command-line interface.

Subcommands: verify, structure, cech, demo, dump. Exit codes:
0 pass, 1 verification failed (residual above tolerance), 2 config or
parse error, 3 numerical failure. Errors print one machine-parsable
line on stderr: "gbx: error=<kind> detail=<message>".
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys

import numpy as np

from . import backend
from .cech import build_cocycle, check_cocycle, obstruction_class
from .config import ScenarioConfig, load_config
from .errors import ConfigError, GbxError, NumericalError
from .frames import circle_vertical_form, projective_alpha, surface_frames
from .geom import area_density, check_overlap_consistency, quadrature_nodes
from .sections import check_nonvanishing, check_section_consistency
from .verify import (
    VerificationReport,
    structure_check,
    verify_hopf,
    verify_projective,
    verify_whitney,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _report_json(payload: dict) -> str:
    """Canonical report serialization: stable key order, no timestamps
    outside the meta block."""
    meta = {
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "backend": backend.ACTIVE,
    }
    body = dict(payload)
    body["meta"] = meta
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def _emit(payload: dict, out_path: str | None):
    text = _report_json(payload)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verdict_exit(report) -> int:
    if report.passed:
        return EXIT_PASS
    sys.stderr.write(
        f"gbx: error=verification-failed detail=residual {report.residual:.6e} "
        f"exceeds tolerance {report.tolerance:.6e} for {report.scenario}\n"
    )
    return EXIT_FAIL


def run_section_scenario(cfg: ScenarioConfig) -> VerificationReport:
    surface = cfg.surface
    surface.validate()
    if surface.gluing == "sphere-stereographic-pair":
        disc = check_overlap_consistency(surface)
        if disc > 1e-6:
            raise ConfigError(
                f"chart metrics disagree on the overlap (discrepancy {disc:.3e})"
            )
    if cfg.identity == "hopf":
        check_section_consistency(surface, cfg.section)
        check_nonvanishing(surface, cfg.section)
        return verify_hopf(
            surface,
            cfg.section,
            cfg.resolution,
            n_samples=cfg.loop_samples,
            tolerance=cfg.tolerance,
            scenario=cfg.name,
        )
    if cfg.identity == "projective":
        check_section_consistency(surface, cfg.section)
        check_nonvanishing(surface, cfg.section)
        return verify_projective(
            surface,
            cfg.section,
            cfg.resolution,
            n_samples=cfg.loop_samples,
            tolerance=cfg.tolerance,
            scenario=cfg.name,
        )
    if cfg.identity == "whitney":
        for fsurf, fsec in cfg.factors:
            check_section_consistency(fsurf, fsec)
            check_nonvanishing(fsurf, fsec)
        return verify_whitney(
            surface,
            cfg.factors,
            cfg.resolution,
            n_samples=cfg.loop_samples,
            tolerance=cfg.tolerance,
            scenario=cfg.name,
        )
    # structure
    frames = surface_frames(surface)
    form = (
        projective_alpha(frames)
        if cfg.form_kind == "projective"
        else circle_vertical_form(frames)
    )
    return structure_check(surface, form, frames, scenario=cfg.name)


def _scenario_payload(cfg: ScenarioConfig, report: VerificationReport) -> dict:
    payload = report.to_dict()
    payload["config"] = cfg.raw
    return payload


def cmd_verify(args) -> int:
    cfg = load_config(args.config).with_overrides(
        resolution=args.resolution,
        loop_samples=args.loop_samples,
        tolerance=args.tolerance,
    )
    if cfg.mode != "section":
        raise ConfigError("verify expects a section-based config (use 'gbx cech')")
    report = run_section_scenario(cfg)
    _emit(_scenario_payload(cfg, report), args.out)
    return _verdict_exit(report)


def cmd_structure(args) -> int:
    cfg = load_config(args.config)
    if cfg.mode != "section":
        raise ConfigError("structure expects a section-based config")
    surface = cfg.surface
    frames = surface_frames(surface)
    form = (
        projective_alpha(frames)
        if cfg.form_kind == "projective"
        else circle_vertical_form(frames)
    )
    report = structure_check(surface, form, frames, scenario=cfg.name)
    _emit(_scenario_payload(cfg, report), args.out)
    return _verdict_exit(report)


def run_cech(nerve, lifts, out_path=None, name="cech") -> int:
    z = build_cocycle(nerve, lifts)
    ok = check_cocycle(z, nerve)
    if not ok:
        raise ConfigError("triangle signs fail the cocycle identity")
    verdict = obstruction_class(z, nerve, lifts)
    payload = {
        "schema": "gbx_report_v1",
        "scenario": name,
        "identity": "cech",
        "cocycle_support": [list(t) for t in z.support()],
        "cocycle_valid": ok,
        "result": verdict,
        "pass": True,
    }
    _emit(payload, out_path)
    return EXIT_PASS


def cmd_cech(args) -> int:
    with open(args.input) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"cech input is not valid JSON (line {exc.lineno}, column {exc.colno})"
            ) from exc
    from .config import build_nerve_and_lifts

    nerve, lifts = build_nerve_and_lifts(raw)
    if lifts is None:
        raise ConfigError("cech input needs a lift matrix on every edge")
    return run_cech(nerve, lifts, args.out, name=raw.get("name", "cech"))


def cmd_demo(args) -> int:
    from .scenarios import DEMOS

    if args.action == "list":
        for name in DEMOS:
            print(name)
        return EXIT_PASS
    if args.name not in DEMOS:
        raise ConfigError(
            f"unknown demo {args.name!r}; available: {', '.join(DEMOS)}"
        )
    raw = DEMOS[args.name]()
    cfg = ScenarioConfig(raw)
    if cfg.mode == "cech":
        return run_cech(cfg.nerve, cfg.lifts, args.out, name=cfg.name)
    report = run_section_scenario(cfg)
    _emit(_scenario_payload(cfg, report), args.out)
    return _verdict_exit(report)


def cmd_dump(args) -> int:
    cfg = load_config(args.config)
    if cfg.mode != "section":
        raise ConfigError("dump expects a section-based config")
    os.makedirs(args.out, exist_ok=True)
    surface = cfg.surface
    frames = surface_frames(surface)
    res = min(cfg.resolution, 64)
    for chart in surface.charts:
        us, vs, _ = quadrature_nodes(chart, res)
        k = frames[chart.id].curvature.eval(us, vs)
        sg = area_density(chart, us, vs)
        path = os.path.join(args.out, f"fields_{chart.id}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["u", "v", "curvature", "sqrt_det_g"])
            for row in zip(us, vs, np.atleast_1d(k), np.atleast_1d(sg)):
                writer.writerow([f"{x:.17g}" for x in row])
    sections = []
    if cfg.section is not None:
        sections.append((0, cfg.section, frames))
    if cfg.factors:
        for j, (fsurf, fsec) in enumerate(cfg.factors):
            sections.append((j, fsec, surface_frames(fsurf)))
    from .sections import angle_in_frame, blowup_loop

    for j, section, fr in sections:
        for p in section.singular_points:
            loop = blowup_loop(p, cfg.loop_samples, chart=surface.chart(p.chart_id))
            psi = angle_in_frame(section, fr[p.chart_id], p.chart_id, loop.us, loop.vs)
            period = np.pi if section.kind == "line-field" else 2 * np.pi
            diffs = np.diff(psi)
            diffs -= period * np.round(diffs / period)
            unwrapped = np.concatenate([[psi[0]], psi[0] + np.cumsum(diffs)])
            phis = 2 * np.pi * np.arange(loop.n_samples) / loop.n_samples
            path = os.path.join(args.out, f"loop_point{p.label}_factor{j}.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["phi", "psi_unwrapped"])
                for row in zip(phis, unwrapped):
                    writer.writerow([f"{x:.17g}" for x in row])
    print(f"wrote CSV dumps to {args.out}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbx",
        description=(
            "Numerically verify curvature-integral vs singularity-index "
            "identities on closed surfaces, and decide Z2 lifting "
            "obstructions of projective transition cocycles."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the identity configured in a scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--loop-samples", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("structure", help="finite-difference structure residuals")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_structure)

    p = sub.add_parser("cech", help="decide the Z2 lifting obstruction")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_cech)

    p = sub.add_parser("demo", help="list or run bundled scenarios")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_demo)

    p = sub.add_parser("dump", help="write CSV field samples and loop traces")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_dump)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "demo" and args.action == "run" and not args.name:
        sys.stderr.write("gbx: error=config detail=demo run needs a name\n")
        return EXIT_CONFIG
    try:
        return args.fn(args)
    except ConfigError as exc:
        sys.stderr.write(f"gbx: error=config detail={exc}\n")
        return EXIT_CONFIG
    except NumericalError as exc:
        sys.stderr.write(f"gbx: error=numerical detail={exc}\n")
        return EXIT_NUMERIC
    except GbxError as exc:  # pragma: no cover - safety net
        sys.stderr.write(f"gbx: error=internal detail={exc}\n")
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
