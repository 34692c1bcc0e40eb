"""Command-line front end.

Thin adapters over the library: every number printed or written comes
from a library call, never from CLI-side math. Exit codes: 0 success,
2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import config as cfgmod
from . import linkbudget, reporting, simulation
from .simulation import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parse_values(spec: str) -> list[float]:
    """'2:7:0.5' or '2,3.5,5'."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"values: expected start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("values: step must be positive")
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(round(v, 9))
            v += step
        return out
    return [float(p) for p in spec.split(",") if p.strip()]


def _overrides_from_args(args) -> dict:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "blockage", None) is not None:
        overrides["blockage"] = args.blockage
    return overrides


def _load(args):
    return cfgmod.load_config(args.config, _overrides_from_args(args))


def _ensure_outdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def cmd_validate(args) -> int:
    cfg, settings = _load(args)
    print(f"configuration ok (hash {cfgmod.settings_hash(settings)[:12]})")
    print(f"placement {cfg.placement_type}{cfg.n_aps}, "
          f"effective height {cfg.resolve_height().effective_height_m():g} m, "
          f"per-AP power {cfg.link.p_t_w:g} W")
    return EXIT_OK


def cmd_radius(args) -> int:
    cfg, _ = _load(args)
    if args.ceil:
        print(linkbudget.coverage_radius_ceiled(cfg.link, args.spectral_efficiency))
    else:
        r = linkbudget.coverage_radius(cfg.link, args.spectral_efficiency)
        print(f"{r:.6f}")
    return EXIT_OK


def cmd_coverage_sweep(args) -> int:
    cfg, _ = _load(args)
    freqs = _parse_values(args.frequencies_ghz)
    widths = _parse_values(args.beamwidths_deg)
    if not freqs or not widths:
        raise ConfigError("coverage sweep needs non-empty frequency and beamwidth axes")
    from dataclasses import replace

    lines = ["f_c_ghz,beamwidth_deg,radius_m"]
    for f in freqs:
        for bw in widths:
            link = replace(cfg.link, f_c_hz=f * 1e9,
                           tx_beamwidth_deg=bw, rx_beamwidth_deg=bw)
            r = linkbudget.coverage_radius(link, args.spectral_efficiency)
            lines.append(f"{reporting.fmt(f)},{reporting.fmt(bw)},{reporting.fmt(r)}")
    text = "\n".join(lines)
    if args.out:
        out = _ensure_outdir(args.out)
        path = os.path.join(out, "coverage_sweep.csv")
        with open(path, "w", newline="\n") as fh:
            fh.write(text + "\n")
        print(path)
    else:
        print(text)
    return EXIT_OK


def cmd_heatmap(args) -> int:
    cfg, settings = _load(args)
    if args.type:
        cfg = simulation.with_placement(cfg, args.type, args.n)
        settings = dict(settings, placement_type=cfg.placement_type, n_aps=cfg.n_aps)
    grid = simulation.heatmap(cfg, args.resolution, args.probe_rate_gbps * 1e9)
    out = _ensure_outdir(args.out)
    rates = os.path.join(out, "heatmap_rates.csv")
    labels = os.path.join(out, "heatmap_labels.csv")
    meta = os.path.join(out, "heatmap_meta.json")
    reporting.write_heatmap(grid, rates, labels, meta)
    manifest = cfgmod.run_manifest(settings)
    reporting.write_json(manifest, os.path.join(out, "manifest.json"))
    print(rates)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg, settings = _load(args)
    report = simulation.run(cfg, record_events=args.events)
    out = _ensure_outdir(args.out)
    reporting.write_results([report], os.path.join(out, "results.csv"))
    summary = reporting.summary_payload(report)
    summary["manifest"] = cfgmod.run_manifest(settings)
    reporting.write_json(summary, os.path.join(out, "summary.json"))
    if args.events:
        reporting.write_events(report.events, os.path.join(out, "events.csv"))
    print(os.path.join(out, "results.csv"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, settings = _load(args)
    values = _parse_values(args.values)
    series = [s for s in args.types.split(",") if s.strip()] if args.types else [None]
    reports = []
    for label in series:
        base = cfg
        if label is not None:
            t, n = simulation.parse_series(label)
            base = simulation.with_placement(cfg, t, n)
        reports.extend(simulation.sweep(base, args.axis, values, jobs=args.jobs))
    out = _ensure_outdir(args.out)
    path = os.path.join(out, "sweep.csv")
    reporting.write_results(reports, path)
    manifest = cfgmod.run_manifest(settings)
    manifest["sweep"] = {"axis": args.axis, "values": values,
                         "types": args.types or ""}
    reporting.write_json(manifest, os.path.join(out, "manifest.json"))
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="thzplan",
        description="Indoor THz access-point placement planning and simulation",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default=None):
        sp.add_argument("--config", default=None, help="INI config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--blockage", choices=("on", "off"), default=None)
        if out_default is not None:
            sp.add_argument("--out", default=out_default, help="output directory")

    sp = sub.add_parser("validate", help="check a configuration and exit")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("radius", help="illumination radius for a spectral efficiency")
    common(sp)
    sp.add_argument("--spectral-efficiency", "-s", type=float, default=0.1,
                    dest="spectral_efficiency", help="bit/s/Hz")
    sp.add_argument("--ceil", action="store_true", help="round up to whole meters")
    sp.set_defaults(func=cmd_radius)

    sp = sub.add_parser("coverage-sweep", help="radius over frequency x beamwidth")
    common(sp)
    sp.add_argument("--frequencies", dest="frequencies_ghz", default="570",
                    help="GHz list or start:stop:step")
    sp.add_argument("--beamwidths", dest="beamwidths_deg", default="5,10,20",
                    help="degrees list or start:stop:step")
    sp.add_argument("--spectral-efficiency", "-s", type=float, default=0.1,
                    dest="spectral_efficiency")
    sp.add_argument("--out", default=None, help="write CSV here instead of stdout")
    sp.set_defaults(func=cmd_coverage_sweep)

    sp = sub.add_parser("heatmap", help="rasterized best-AP rate field")
    common(sp, out_default="out")
    sp.add_argument("--type", default=None, help="placement type letter override")
    sp.add_argument("--n", type=int, default=None, help="AP count override")
    sp.add_argument("--resolution", type=float, default=10.0, help="cells per meter")
    sp.add_argument("--probe-rate", dest="probe_rate_gbps", type=float, default=1.0,
                    help="darkness threshold, Gbps")
    sp.set_defaults(func=cmd_heatmap)

    sp = sub.add_parser("simulate", help="run one configured simulation")
    common(sp, out_default="out")
    sp.add_argument("--events", action="store_true", help="also write the event log")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="metric sweeps along H, N, or placement type")
    common(sp, out_default="out")
    sp.add_argument("--axis", choices=("H", "N", "placement_type"), default="H")
    sp.add_argument("--values", default="2:7:0.5")
    sp.add_argument("--types", default=None,
                    help="comma list of series like A,B4,C4; default: config placement")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
