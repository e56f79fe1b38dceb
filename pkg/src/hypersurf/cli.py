"""Command-line front end.

Exit status: 0 when every executed check is PASS or SKIP, 1 when any check
is FAIL or ERROR, 2 on configuration or model errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, catalog, theorem_lab, verifier
from .errors import HypersurfError
from .hypersurface import Geometry
from .quadrature import THREADS_ENV, default_threads, quadrature_grid

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

CSV_HELP = "CSV columns: " + ", ".join(verifier.CSV_COLUMNS)
DEFAULT_GRID = {2: 64, 3: 20}
DEFAULT_GRID_HIGH = 10


class ConfigError(Exception):
    pass


def default_grid(dim: int) -> list:
    return [DEFAULT_GRID.get(dim, DEFAULT_GRID_HIGH)] * dim


# -- parsing helpers ---------------------------------------------------------------

def parse_params(items: Optional[Sequence[str]]) -> dict:
    out = {}
    for item in items or []:
        for pair in item.split(","):
            pair = pair.strip()
            if not pair:
                continue
            if "=" not in pair:
                raise ConfigError(f"malformed --param entry {pair!r} (expected key=value)")
            k, v = pair.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def parse_grid(text) -> Optional[list]:
    if text is None:
        return None
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = [x for x in str(text).replace("x", ",").split(",") if x.strip()]
    try:
        grid = [int(v) for v in vals]
    except ValueError as exc:
        raise ConfigError(f"malformed grid {text!r}") from exc
    if not grid or min(grid) < 8:
        raise ConfigError(f"grid resolutions must be >= 8, got {grid}")
    return grid


def parse_tolerances(items) -> verifier.Tolerances:
    fields = {}
    overrides = {}
    if isinstance(items, (int, float)):
        items = [str(items)]
    elif isinstance(items, dict):
        items = [f"{k}={v}" for k, v in items.items()]
    for item in items or []:
        for part in verifier.split_check_list(str(item)):
            try:
                if "=" not in part:
                    fields["pointwise"] = float(part)
                    continue
                k, v = part.rsplit("=", 1)
                k = k.strip()
                if k in verifier.Tolerances.__dataclass_fields__ and k != "overrides":
                    fields[k] = float(v)
                else:
                    overrides[verifier.check_spec(k).name if "(" in k or ":" in k else k] = float(v)
            except ValueError as exc:
                raise ConfigError(f"malformed tolerance {part!r}") from exc
            except HypersurfError as exc:
                raise ConfigError(str(exc)) from exc
    try:
        return verifier.Tolerances(**fields, overrides=overrides)
    except HypersurfError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if p.suffix.lower() == ".json":
            data = json.loads(raw.decode())
        else:
            data = tomllib.loads(raw.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a table/object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def merged(args: argparse.Namespace, config: dict, key: str, default=None):
    """Explicit flag wins, then the config file, then the default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    return config.get(key, default)


def resolve_models(name: str, params: dict) -> list:
    """(label, ModelSpec) pairs for a model name, default-model key or model file."""
    if name == "defaults":
        if params:
            raise ConfigError("--param cannot be combined with --model defaults")
        return list(catalog.default_specs().items())
    defaults = catalog.default_specs()
    if name in defaults and not params:
        return [(name, defaults[name])]
    path = Path(name)
    if path.suffix.lower() in (".json", ".toml") and path.exists():
        record = load_config(str(path))
        record.update(params)
        spec = catalog.ModelSpec.from_dict(record)
        return [(spec.label, spec)]
    spec = catalog.make_spec(name, **params)
    return [(spec.label, spec)]


# -- output -----------------------------------------------------------------------

def render_report(report: verifier.VerificationReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "csv":
        return report.to_csv()
    lines = []
    width = max([len(c.check) for c in report.checks] + [5])
    current = None
    for c in report.checks:
        if c.model != current:
            current = c.model
            lines.append(f"model {c.model}  grid {'x'.join(map(str, c.grid))}")
        rmax = "-" if c.residual_max is None else f"{c.residual_max:.3e}"
        lines.append(f"  {c.check:<{width}}  {c.status:<5}  {rmax:>10}  tol {c.tol:.1e}  {c.anchor}"
                     + (f"  [{c.note}]" if c.note else ""))
    counts = {s: sum(1 for c in report.checks if c.status == s) for s in verifier.STATUSES}
    lines.append("summary: " + ", ".join(f"{k} {v}" for k, v in counts.items()))
    return "\n".join(lines) + "\n"


def emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def rows_to_csv(rows: list, columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


# -- commands ----------------------------------------------------------------------

def _suite(args, config, integrals_only: bool) -> int:
    name = merged(args, config, "model")
    if not name:
        raise ConfigError(f"--model is required; valid names: {', '.join(catalog.model_names())}, defaults")
    params = dict(config.get("params", {}))
    params.update(parse_params(args.param))
    order = int(merged(args, config, "order", 4))
    if order not in (3, 4):
        raise ConfigError(f"jet order must be 3 or 4, got {order}")
    tol = parse_tolerances(args.tol if args.tol is not None else config.get("tol"))
    threads = int(merged(args, config, "threads", default_threads()))
    if threads < 1:
        raise ConfigError("thread count must be >= 1")
    checks = merged(args, config, "checks")
    if isinstance(checks, str):
        checks = verifier.split_check_list(checks)
    try:
        checks = [verifier.check_spec(c).name for c in checks] if checks else None
    except HypersurfError as exc:
        raise ConfigError(str(exc)) from exc
    grid = parse_grid(merged(args, config, "grid"))
    stamp = datetime.now(timezone.utc).isoformat() if merged(args, config, "timestamp", False) else None

    report = None
    for label, spec in resolve_models(name, params):
        chart = catalog.instantiate(spec)
        g = grid or default_grid(chart.dim)
        if len(g) == 1:
            g = g * chart.dim
        sel = checks
        if integrals_only and sel is None:
            if not chart.compact:
                raise ConfigError(f"model {label} is not compact; integrals are undefined")
            sel = verifier.default_integrals(chart)
        rep = verifier.run_suite(chart, g, tol, sel, order=order, threads=threads, model=label, timestamp=stamp)
        report = rep if report is None else report.merge(rep)
    emit(render_report(report, merged(args, config, "format", "pretty")), merged(args, config, "output"))
    return EXIT_OK if report.exit_code == 0 else EXIT_FAIL


def cmd_verify(args, config) -> int:
    return _suite(args, config, integrals_only=False)


def cmd_integrals(args, config) -> int:
    return _suite(args, config, integrals_only=True)


def cmd_scan(args, config) -> int:
    rows = theorem_lab.scan_products(args.m, args.m1, args.r1_min, args.r1_max, args.step)
    fmt = merged(args, config, "format", "csv")
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    elif fmt == "pretty":
        text = "".join(f"r1={r['r1']:.4f}  |A|^2={r['normA2']:.6g}  m^2f^2/6={r['m2f2_over_6']:.6g}  "
                       f"hypothesis={r['hypothesis']}  {r['status']}\n" for r in rows)
    else:
        text = rows_to_csv(rows, theorem_lab.SCAN_COLUMNS)
    emit(text, merged(args, config, "output"))
    return EXIT_OK


def cmd_catalog(args, config) -> int:
    if args.model:
        entries = [catalog.describe(spec) | {"name": label}
                   for label, spec in resolve_models(args.model, parse_params(args.param))]
    else:
        entries = [catalog.describe(spec) | {"name": label} for label, spec in catalog.default_specs().items()]
        entries += [{"name": k, "kind": k, "defaults": True} for k in catalog.KINDS]
    fmt = merged(args, config, "format", "pretty")
    if fmt == "json":
        text = json.dumps(entries, indent=2, sort_keys=True) + "\n"
    else:
        text = "".join(f"{e['name']}: " + ", ".join(f"{k}={v}" for k, v in sorted(e.items()) if k != "name") + "\n"
                       for e in entries)
    emit(text, merged(args, config, "output"))
    return EXIT_OK


def cmd_check_theorem(args, config) -> int:
    if args.f is not None or args.normA2 is not None:
        if args.f is None or args.normA2 is None or args.m is None:
            raise ConfigError("direct evaluation needs --f, --normA2 and --m")
        out = {
            "theorem1_hypothesis": theorem_lab.theorem1_hypothesis(args.f, args.normA2, args.m),
            "theorem2_hypothesis": theorem_lab.theorem2_hypothesis(args.f, args.normA2, args.m),
        }
        try:
            out["okumura_bound"] = theorem_lab.okumura_bound(args.c, args.f, args.m)
            out["okumura_bound_holds"] = theorem_lab.okumura_bound_holds(args.c, args.f, args.normA2, args.m)
        except HypersurfError as exc:
            out["okumura_bound"] = None
            out["okumura_note"] = str(exc)
        if args.m >= 3:
            out["two_curvature_branch_f"] = theorem_lab.two_curvature_branch(args.c, args.m)
    else:
        name = merged(args, config, "model")
        if not name:
            raise ConfigError("check-theorem needs --model or --f/--normA2/--m")
        out = {}
        for label, spec in resolve_models(name, parse_params(args.param)):
            chart = catalog.instantiate(spec)
            g = parse_grid(args.grid) or [16] * chart.dim
            qgrid = quadrature_grid(chart, g, require_compact=False).interior()
            out[label] = theorem_lab.theorem_report(Geometry(chart, qgrid.nodes, 4).frames())
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    emit(text, merged(args, config, "output"))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, suite: bool = True) -> None:
    p.add_argument("--model", help="model kind, default-model key, 'defaults', or a .json/.toml model file")
    p.add_argument("--param", action="append", help="parameter overrides k=v[,k=v...]; list values use ':'")
    p.add_argument("--grid", help="per-axis resolutions N[,N2,...] (>= 8)")
    p.add_argument("--format", choices=("json", "csv", "pretty"))
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--config", help="TOML or JSON file with the same keys; explicit flags win")
    if suite:
        p.add_argument("--order", type=int, help="chart jet order, 3 or 4 (default 4)")
        p.add_argument("--tol", action="append",
                       help="FLOAT for the pointwise tolerance, or name=FLOAT for a tolerance class or check")
        p.add_argument("--checks", help="comma list of check ids, e.g. div_phi,box_zero(PHI,f)")
        p.add_argument("--threads", type=int, help=f"worker threads (default from ${THREADS_ENV}, else 1)")
        p.add_argument("--timestamp", action="store_true", default=None,
                       help="record the wall-clock time in the report (breaks byte-identical output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypersurf",
        description="Verify hypersurface identities on catalog models.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run pointwise and integral checks", epilog=CSV_HELP)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("integrals", help="run the integral checks only", epilog=CSV_HELP)
    _common(p)
    p.set_defaults(func=cmd_integrals)

    p = sub.add_parser("scan-products", help="scan S^m1(r1) x S^(m-m1)(r2) against the hypotheses",
                       epilog="CSV columns: " + ", ".join(theorem_lab.SCAN_COLUMNS))
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--m1", type=int, default=1)
    p.add_argument("--r1-min", type=float, default=0.05)
    p.add_argument("--r1-max", type=float, default=0.95)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--format", choices=("json", "csv", "pretty"))
    p.add_argument("--output")
    p.add_argument("--config")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("catalog", help="list or describe models")
    _common(p, suite=False)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("check-theorem", help="evaluate theorem hypotheses on a model or on given numbers")
    _common(p, suite=False)
    p.add_argument("--f", type=float)
    p.add_argument("--normA2", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--c", type=int, default=0)
    p.set_defaults(func=cmd_check_theorem)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        config = load_config(getattr(args, "config", None))
        return args.func(args, config)
    except (ConfigError, HypersurfError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
