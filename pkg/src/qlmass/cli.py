"""Command line: ``qlmass <stage> ...``.

Exit codes: 0 when every check passes, 1 when a stage fails or a check does
not hold, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .config import ConfigError, Scenario, parse_surface_spec

log = logging.getLogger("qlmass")


def _scenario(args) -> Scenario:
    if getattr(args, "config", None):
        sc = Scenario.from_toml(args.config)
        raw, base = sc.data, sc.base_dir
    else:
        raw, base = {}, Path(".")
    raw = {k: dict(v) for k, v in raw.items()}
    if getattr(args, "surface", None):
        spec = parse_surface_spec(args.surface)
        kept = {"N": raw.get("surface", {}).get("N", 128)}
        raw["surface"] = {**kept, **spec}
    over = {("ambient", "n"): getattr(args, "n", None), ("ambient", "k"): getattr(args, "k", None),
            ("surface", "N"): getattr(args, "N", None),
            ("flow", "t_end"): getattr(args, "t_end", None), ("flow", "dt"): getattr(args, "dt", None),
            ("flow", "delta_convex"): getattr(args, "delta_convex", None)}
    for (sec, key), val in over.items():
        if val is not None:
            raw.setdefault(sec, {})[key] = val
    return Scenario.from_dict(raw, base)


def _path(arg, sc: Scenario, key: str) -> Path:
    return Path(arg) if arg else sc.output_dir / pl.FILES[key]


def cmd_flow(args, sc):
    c = pl._stage("flow", pl.run_flow, sc)
    out = _path(args.out, sc, "collar")
    pl.write_collar(out, sc, c)
    r = c.slices[-1].r
    print(f"flow: {c.M} steps to t={c.T:.6g}; final radius min={r.min():.10g} max={r.max():.10g}"
          f" -> {out}")
    return 0


def cmd_lapse(args, sc):
    c = pl.read_collar(_path(args.collar, sc, "collar"), sc)
    lapse = pl._stage("lapse", pl.run_lapse, sc, c)
    out = _path(args.out, sc, "lapse")
    pl.write_lapse(out, sc, c, lapse)
    b = lapse.barriers
    print(f"lapse: u in [{lapse.u.min():.6g}, {lapse.u.max():.6g}], barriers beta={b.beta:.6g} "
          f"gamma={b.gamma:.6g} C={b.C:.6g} -> {out}")
    return 0


def cmd_exterior(args, sc):
    c = pl.read_collar(_path(args.collar, sc, "collar"), sc)
    lapse = pl.read_lapse(_path(args.lapse, sc, "lapse"), sc, c)
    ext = pl._stage("exterior", pl.run_exterior, sc, c, lapse)
    out = _path(args.out, sc, "exterior")
    pl.write_exterior(out, sc, ext)
    print(f"exterior: {ext.fol.M} levels to rho={ext.rho[-1]:.6g}, "
          f"max|v-1| at end {abs(ext.w[-1]).max():.3g} -> {out}")
    return 0


def _load_upstream(args, sc):
    c = pl.read_collar(_path(args.collar, sc, "collar"), sc)
    lapse = pl.read_lapse(_path(args.lapse, sc, "lapse"), sc, c)
    ext = pl.read_exterior(_path(args.exterior, sc, "exterior"), sc, c)
    return c, lapse, ext


def cmd_transport(args, sc):
    c, lapse, ext = _load_upstream(args, sc)
    tr = pl._stage("transport", pl.run_transport, sc, c, lapse, ext)
    out = _path(args.out, sc, "transport")
    pl.write_transport(out, sc, tr, c.slices[0].theta)
    print(f"transport: W past-directed non-spacelike on all levels and slices -> {out}")
    return 0


def _finish(rep, sc, report_path, series_path):
    pl.write_report(report_path, rep)
    pl.write_series(series_path, sc, rep)
    print(f"mass vector {rep.mass_vector.tolist()} class {rep.causal_class.value}; "
          f"monotone={rep.all_monotone} junction={rep.junction_ok} -> {report_path}")
    return 0 if rep.ok else 1


def cmd_mass(args, sc):
    c, lapse, ext = _load_upstream(args, sc)
    tr = pl.read_transport(_path(args.transport, sc, "transport"), sc, c, ext)
    rep = pl._stage("mass", pl.run_mass, sc, c, lapse, ext, tr)
    return _finish(rep, sc, _path(args.out, sc, "report"), _path(args.series, sc, "series"))


def cmd_pipeline(args, sc):
    out = Path(args.out_dir) if args.out_dir else sc.output_dir
    res = pl.run_pipeline(sc, out)
    rep = res.report
    print(f"mass vector {rep.mass_vector.tolist()} class {rep.causal_class.value}; "
          f"monotone={rep.all_monotone} junction={rep.junction_ok} -> {out}")
    return 0 if rep.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlmass", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("flow", help="run the expanding flow and dump the collar")
    f.add_argument("--config")
    f.add_argument("--surface", help="sphere:r0=1 | perturbed_sphere:r0=1,amp=0.05,mode=2 | profile:@FILE")
    f.add_argument("--n", type=int)
    f.add_argument("--k", type=float)
    f.add_argument("--N", type=int)
    f.add_argument("--t-end", dest="t_end", type=float)
    f.add_argument("--dt", type=float)
    f.add_argument("--delta-convex", dest="delta_convex", type=float)
    f.add_argument("--out")
    f.set_defaults(fn=cmd_flow)

    def staged(name, fn, inputs, helptext):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True)
        for i in inputs:
            s.add_argument(f"--{i}", help=f"input dump (default: <output dir>/{pl.FILES[i]})")
        s.add_argument("--out")
        s.set_defaults(fn=fn)
        return s

    staged("lapse", cmd_lapse, ["collar"], "solve the lapse on a dumped collar")
    staged("exterior", cmd_exterior, ["collar", "lapse"], "solve the exterior v equation")
    staged("transport", cmd_transport, ["collar", "lapse", "exterior"], "transport the weight W")
    m = staged("mass", cmd_mass, ["collar", "lapse", "exterior", "transport"],
               "mass series, checks and the JSON report")
    m.add_argument("--series")

    q = sub.add_parser("pipeline", help="run every stage and write all dumps")
    q.add_argument("--config", required=True)
    q.add_argument("--out-dir", dest="out_dir")
    q.set_defaults(fn=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = _scenario(args)
        return args.fn(args, sc)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2
    except pl.StageError as exc:
        print(f"stage failed: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
