"""Command-line front end: ``nlsist <verb> [--manifest FILE] [--t T] [--out PATH]``.

The exit status is 0 when every criterion evaluated by the command passes
(commands that evaluate none succeed unless a stage fails), 1 otherwise, and
2 for unusable input.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .asymptotics import asymptotic_soliton, radiation_profile
from .core import ComplexField1D, NlsistError, RealGrid
from .experiments import ExperimentManifest, run
from .flow import CONVENTIONS, DEFAULT_CONVENTION, evolve_spectral
from .integrator import evolve_reference, fft_friendly_grid
from .io import load_spectral, save_field, save_spectral

VERB_KINDS = {
    "scatter": "scatter",
    "reconstruct": "reconstruct",
    "backlund": "backlund_pipeline",
    "validate": "validate_all",
}


def _manifest(args, kind: str) -> ExperimentManifest:
    if args.manifest:
        spec_path = Path(args.manifest)
        spec = json.loads(spec_path.read_text())
        base = spec_path.parent
    else:
        spec, base = {}, Path(".")
    spec = dict(spec)
    spec["kind"] = kind
    if getattr(args, "spectral", None):
        spec["spectral_file"] = str(Path(args.spectral).resolve())
    m = ExperimentManifest.from_json(spec, base)
    changes = {}
    if args.t is not None:
        changes["times"] = tuple(args.t)
    if args.out is not None:
        changes["output_dir"] = Path(args.out)
    if args.convention is not None:
        changes["convention"] = args.convention
    return dataclasses.replace(m, **changes) if changes else m


def _print_report(report: dict) -> int:
    for cid in sorted(report["criteria"]):
        row = report["criteria"][cid]
        print(f"{cid} {'PASS' if row['passed'] else 'FAIL'}" + (f"  {row['note']}" if row.get("note") else ""))
    for err in report["errors"]:
        print(f"error in stage {err['stage']}: {err['message']}", file=sys.stderr)
    if report["errors"]:
        return 1
    return 0 if all(c["passed"] for c in report["criteria"].values()) else 1


def _cmd_manifest(args) -> int:
    report = run(_manifest(args, VERB_KINDS[args.verb]))
    return _print_report(report)


def _cmd_evolve_spectral(args) -> int:
    source = args.spectral or (_manifest(args, "reconstruct").spectral_file if args.manifest else None)
    if source is None:
        raise NlsistError("evolve-spectral needs --spectral FILE or a manifest with spectral_file")
    data = load_spectral(source)
    t = args.t[0] if args.t else 0.0
    out = Path(args.out or "spectral_t.json")
    save_spectral(out, evolve_spectral(data, t, args.convention or DEFAULT_CONVENTION))
    print(f"wrote {out}")
    return 0


def _cmd_simulate(args) -> int:
    m = _manifest(args, "reconstruct")
    if m.datum is None:
        raise NlsistError("simulate needs a manifest with an initial_datum")
    times = tuple(sorted(m.times)) or (m.integrator.t_end,)
    box = m.box or fft_friendly_grid(200.0, 0.05)
    cfg = dataclasses.replace(m.integrator, t_end=max(times))
    evo = evolve_reference(m.datum.sample(box), cfg, times)
    m.output_dir.mkdir(parents=True, exist_ok=True)
    for t, snap in zip(times, evo):
        save_field(m.output_dir / f"u_t{t:g}.bin", snap)
    summary = {"times": list(times), "mass_drift": evo.mass_drift,
               "error_estimates": [None if np.isnan(e) else e for e in evo.error_estimates]}
    (m.output_dir / "simulate.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")
    print(f"mass drift {evo.mass_drift:.3e}; snapshots in {m.output_dir}")
    return 0


def _cmd_asymptote(args) -> int:
    m = _manifest(args, "reconstruct")
    if m.spectral_file is None:
        raise NlsistError("asymptote needs spectral data (--spectral FILE or spectral_file in the manifest)")
    data = load_spectral(m.spectral_file)
    xs = np.asarray(m.sample_x, dtype=float)
    m.output_dir.mkdir(parents=True, exist_ok=True)
    for t in m.times or (20.0,):
        if data.discrete:
            u = asymptotic_soliton(data, "plus" if t >= 0 else "minus", t, xs)
        else:
            u = radiation_profile(data, t, xs)
        path = m.output_dir / f"asymptote_t{t:g}.csv"
        if _is_uniform(xs):
            save_field(path, ComplexField1D(RealGrid(float(xs[0]), float(xs[-1]), xs.size), u))
        else:
            _write_points(path, xs, u)
        print(f"wrote {path}")
    return 0


def _is_uniform(xs) -> bool:
    return xs.size >= 2 and np.allclose(np.diff(xs), xs[1] - xs[0], rtol=1e-9, atol=0)


def _write_points(path, xs, u):
    lines = ["x,re,im"] + [f"{x:.17g},{v.real:.17g},{v.imag:.17g}" for x, v in zip(xs, u)]
    Path(path).write_text("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="JSON experiment manifest")
    common.add_argument("--t", type=float, action="append", help="time override (repeatable)")
    common.add_argument("--out", help="output directory (or file for evolve-spectral)")
    common.add_argument("--convention", choices=sorted(CONVENTIONS), help="sign convention of the spectral flow")
    common.add_argument("--spectral", help="spectral-data JSON file")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="nlsist", description="Inverse scattering toolkit for the focusing cubic NLS.")
    sub = parser.add_subparsers(dest="verb", required=True)
    helps = {
        "scatter": "direct scattering of the manifest's initial datum",
        "reconstruct": "inverse scattering at the requested times",
        "evolve-spectral": "evolve spectral data to time t",
        "backlund": "soliton dressing pipeline compared with split-step",
        "simulate": "split-step evolution of the initial datum",
        "asymptote": "long-time asymptotic profile at time t",
        "validate": "run the acceptance suite",
    }
    for verb, text in helps.items():
        sub.add_parser(verb, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"evolve-spectral": _cmd_evolve_spectral, "simulate": _cmd_simulate, "asymptote": _cmd_asymptote}
    try:
        return handlers.get(args.verb, _cmd_manifest)(args)
    except (NlsistError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"nlsist {args.verb}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
