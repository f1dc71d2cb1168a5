"""Command line: ``aqc {run,presets,identities,wigner}``.

Errors go to stderr as one JSON line {"error": category, "message": ...}
with a nonzero exit code.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

from . import experiments
from .errors import AQCError, ConfigInvalid, IOFailure, TruncationInsufficient

log = logging.getLogger("aqc")

EXIT_CODES = {ConfigInvalid: 2, TruncationInsufficient: 3, IOFailure: 4}


def _cell(v):
    if v is None:
        return experiments.UNDEFINED
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v) if v == v and abs(v) != float("inf") else experiments.UNDEFINED
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if v is None:
        return experiments.UNDEFINED
    if isinstance(v, float) and (v != v or abs(v) == float("inf")):
        return experiments.UNDEFINED
    return v


def to_csv(rows: list[dict]) -> str:
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def to_json(rows: list[dict], config: dict, extra: dict | None = None) -> str:
    doc = {"config": config, "rows": _jsonable(rows)}
    if extra:
        doc.update(_jsonable(extra))
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.stem + ".config.json")


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def emit(rows, config, out, fmt, extra=None) -> None:
    config = experiments.resolved(config)
    text = to_csv(rows) if fmt == "csv" else to_json(rows, config, extra)
    path = Path(out) if out else None
    _write(path, text)
    if path is not None:
        _write(sidecar_path(path), json.dumps(config, indent=1, allow_nan=False) + "\n")


def load_config(args) -> dict:
    if args.config and args.preset:
        raise ConfigInvalid("give either --config or --preset, not both")
    if args.preset:
        cfg = experiments.preset(args.preset)
    elif args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IOFailure(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{args.config} is not valid JSON: {exc}") from exc
    else:
        raise ConfigInvalid("need --config or --preset")
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    for item in getattr(args, "set", None) or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigInvalid(f"--set expects key=value, got {item!r}")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        experiments.set_path(cfg, key, val)
    if getattr(args, "dim", None) is not None:
        if cfg.get("kind") == "identities":
            cfg["dim"] = args.dim
        else:
            experiments.set_path(cfg, "space.dim", args.dim)
    return cfg


def cmd_run(args) -> int:
    cfg = load_config(args)
    t0 = time.perf_counter()
    rows = experiments.run_config(cfg, convergence_check=args.convergence_check)
    log.info("%d rows in %.2f s", len(rows), time.perf_counter() - t0)
    emit(rows, cfg, args.out, args.format)
    return 0


def cmd_presets(args) -> int:
    if args.show:
        sys.stdout.write(json.dumps(experiments.preset(args.show), indent=1) + "\n")
        return 0
    width = max(map(len, experiments.PRESETS))
    for name, cfg in experiments.PRESETS.items():
        sys.stdout.write(f"{name:<{width}}  {cfg.get('description', '')}\n")
    return 0


def cmd_identities(args) -> int:
    cfg = {"kind": "identities", "dim": args.dim or 64, "m": args.m, "n": args.n}
    rows = experiments.run_config(cfg)
    emit(rows, cfg, args.out, args.format)
    return 0


def cmd_wigner(args) -> int:
    if not args.config and not args.preset:
        args.preset = "fig8_wigner"
    cfg = load_config(args)
    if cfg.get("kind") != "wigner":
        raise ConfigInvalid(f"wigner needs a config of kind 'wigner', got {cfg.get('kind')!r}")
    if args.n_points is not None:
        experiments.set_path(cfg, "grid.n_points", args.n_points)
    experiments.validate(cfg)
    grid, summary = experiments.wigner_summary(cfg)
    log.info("min W %.3e, negativity volume %.3e", summary["min_value"], summary["negativity_volume"])
    if args.format == "json":
        extra = {"summary": summary, "x_axis": grid.x_axis.tolist(), "p_axis": grid.p_axis.tolist(),
                 "values": grid.values.tolist()}
        emit([summary], cfg, args.out, "json", extra)
    else:
        rows = experiments.grid_rows(grid)
        emit(rows, {**cfg, "summary": summary}, args.out, "csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aqc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    verbose = argparse.ArgumentParser(add_help=False)
    verbose.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                         help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, dim=True):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--preset", help="bundled config name (see `aqc presets`)")
        sp.add_argument("--out", help="output file (default: stdout, no sidecar)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key by dotted path; VALUE is parsed as JSON")
        if dim:
            sp.add_argument("--dim", type=int, help="Fock-space truncation")

    r = sub.add_parser("run", parents=[verbose], help="evaluate a config or preset")
    common(r)
    r.add_argument("--convergence-check", action="store_true",
                   help="repeat at twice the dimension and report the change")
    r.set_defaults(func=cmd_run)

    ps = sub.add_parser("presets", parents=[verbose], help="list bundled configs")
    ps.add_argument("--show", metavar="NAME", help="print one preset as JSON")
    ps.set_defaults(func=cmd_presets)

    i = sub.add_parser("identities", parents=[verbose], help="residuals of the exponential operator identities")
    i.add_argument("--dim", type=int, default=64)
    i.add_argument("--m", type=float, default=0.2)
    i.add_argument("--n", type=float, default=0.1)
    i.add_argument("--out")
    i.add_argument("--format", choices=("csv", "json"), default="csv")
    i.set_defaults(func=cmd_identities)

    w = sub.add_parser("wigner", parents=[verbose], help="Wigner grid of an evolved branch (default preset fig8_wigner)")
    common(w)
    w.add_argument("--n-points", type=int, help="grid points per axis")
    w.set_defaults(func=cmd_wigner)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except AQCError as exc:
        sys.stderr.write(json.dumps({"error": exc.category, "message": str(exc)}) + "\n")
        return next((c for t, c in EXIT_CODES.items() if isinstance(exc, t)), 1)


if __name__ == "__main__":
    sys.exit(main())
