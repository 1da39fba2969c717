"""Command-line interface: ``catk <subcommand> ...``.

Exit codes: 0 success, 1 a verification failed, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import inspect
import json
import math
import os
import sys
from pathlib import Path

from . import gallery
from .complex import load
from .domain import Domain, load_domain
from .errors import CatkError
from .measure import curvature_measure, gauss_bonnet_report, measure_of
from .metric import PointRef, distance
from .surgery import CSV_COLUMNS, surgery_schedule
from .verify import check_admissible, check_cat, systole

DIGITS = 12


class UsageError(Exception):
    pass


def _num(x):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{DIGITS}g}")
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _text(doc, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for k, v in doc.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines += _text(v, indent + 1)
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}: [{len(v)}]")
            for item in v:
                lines.append(f"{pad}  - " + ", ".join(f"{a}={_fmt(b)}" for a, b in item.items()))
        else:
            lines.append(f"{pad}{k}: {_fmt(v)}")
    return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.{DIGITS}g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _emit(args, doc: dict) -> None:
    doc = _num(doc)
    if args.report == "json":
        sys.stdout.write(json.dumps(doc) + "\n")
    else:
        sys.stdout.write("\n".join(_text(doc)) + "\n")


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("CATK_THREADS")
        try:
            n = int(env) if env else (os.cpu_count() or 1)
        except ValueError:
            raise UsageError(f"CATK_THREADS must be an integer, got {env!r}")
    if n < 1:
        raise UsageError("thread count must be positive")
    return n


def _domain(path_or_name: str | None, complex_path: str, c):
    if path_or_name is None:
        return None
    if path_or_name == "all":
        return Domain.of(range(c.n_faces), "all")
    p = Path(path_or_name)
    if p.exists():
        return load_domain(p)
    side = Path(complex_path + ".expected.json")
    if side.exists():
        doms = json.loads(side.read_text(encoding="utf-8")).get("domains", {})
        if path_or_name in doms:
            return Domain.of(doms[path_or_name], path_or_name)
    raise UsageError(f"no domain file or named domain {path_or_name!r}")


def _point(s: str) -> PointRef:
    s = s.strip()
    if s.startswith("{"):
        return PointRef.from_dict(json.loads(s))
    try:
        return PointRef.vertex(int(s))
    except ValueError:
        raise UsageError(f"point must be a vertex id or a JSON point, got {s!r}")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_check(args) -> int:
    c = load(args.file)
    v = check_cat(c)
    doc = {"file": args.file, "faces": c.n_faces, "vertices": c.n_vertices, **v.to_dict()}
    d = _domain(args.domain, args.file, c)
    ok = v.passed
    if d is not None:
        adm = check_admissible(c, d)
        doc["admissible"] = bool(adm)
        doc["admissibility_reasons"] = list(adm.reasons)
        ok = ok and bool(adm)
    _emit(args, doc)
    return 0 if ok else 1


def cmd_links(args) -> int:
    c = load(args.file)
    verts = args.vertex if args.vertex else range(c.n_vertices)
    out = []
    for v in verts:
        if not 0 <= v < c.n_vertices:
            raise UsageError(f"no vertex {v}")
        g = c.vertex_link(v)
        item = {"vertex": v, **g.to_dict(), "systole": systole(g), "break_point": c.is_break_point(v)}
        out.append(item)
    if args.report == "json":
        _emit(args, {"links": out})
    else:
        for item in out:
            sys.stdout.write(
                f"vertex {item['vertex']}: nodes={len(item['nodes'])} arcs={len(item['arcs'])} "
                f"length={_fmt(_num(item['total_length']))} chi={item['euler_char']} "
                f"systole={_fmt(_num(item['systole']))} break_point={item['break_point']}\n"
            )
    return 0


def cmd_measure(args) -> int:
    c = load(args.file)
    m = curvature_measure(c)
    doc = {
        "total": m.total(),
        "positive_part": m.positive_part,
        "negative_part": m.negative_part,
        "face_mass": m.face_mass(),
        "atoms": {str(k): v for k, v in sorted(m.atoms().items()) if abs(v) > 1e-12 or args.all_atoms},
    }
    d = _domain(args.domain, args.file, c)
    if d is not None:
        doc["domain"] = {"label": d.label, "open": measure_of(c, m, d, "open"), "closed": measure_of(c, m, d, "closed")}
    _emit(args, doc)
    return 0


def cmd_gb(args) -> int:
    c = load(args.file)
    d = _domain(args.domain or "all", args.file, c)
    rep = gauss_bonnet_report(c, d)
    doc = {**rep.to_dict(), "tolerance": rep.tolerance, "pass": abs(rep.residual) <= rep.tolerance}
    _emit(args, doc)
    return 0 if doc["pass"] else 1


def cmd_dist(args) -> int:
    c = load(args.file)
    if args.refine < 0:
        raise UsageError("--refine must be non-negative")
    a, b = _point(args.a), _point(args.b)
    _emit(args, {"distance": distance(c, a, b, args.refine), "refine": args.refine})
    return 0


def cmd_surgery(args) -> int:
    c = load(args.file)
    if args.schedule:
        eps = [float(x) for x in args.schedule.split(",")]
    elif args.eps is not None:
        eps = [args.eps]
    else:
        raise UsageError("give --eps or --schedule")
    seg = None
    if args.segment:
        seg = [int(x) for x in args.segment.split(",")]
    d = _domain(args.domain, args.file, c)
    sch = surgery_schedule(
        c,
        eps,
        [args.vertex],
        segments={args.vertex: seg} if seg else None,
        domain=d,
        distortion=not args.no_distortion,
        samples=args.samples,
    )
    prefix = Path(args.out)
    files = []
    for e, res in zip(eps, sch.results):
        f = Path(f"{prefix}_eps{e:g}.json")
        res.new_complex.to_json(f)
        files.append(str(f))
    csv_path = Path(f"{prefix}.csv")
    csv_path.write_text(sch.to_csv(), encoding="utf-8")
    doc = {
        "files": files,
        "table": str(csv_path),
        "omega_D": sch.omega_D,
        "tau_boundary": sch.tau_boundary,
        "rows": [{k: r[k] for k in CSV_COLUMNS} for r in sch.rows],
        "warnings": sch.warnings,
    }
    _emit(args, doc)
    return 0 if all(r["cat_pass"] for r in sch.rows) else 1


def _param(s: str):
    if "=" not in s:
        raise UsageError(f"--param expects key=value, got {s!r}")
    k, v = s.split("=", 1)
    try:
        return k, json.loads(v)
    except json.JSONDecodeError:
        return k, v


def cmd_gallery(args) -> int:
    params = dict(_param(p) for p in args.param or [])
    fn = gallery.GENERATORS.get(args.name)
    if fn is None:
        raise UsageError(f"unknown gallery item {args.name!r}; choose from {sorted(gallery.GENERATORS)}")
    if "seed" in inspect.signature(fn).parameters and "seed" not in params:
        params["seed"] = args.seed
    c, exp = gallery.write(args.name, args.out, **params)
    _emit(args, {"file": args.out, "faces": c.n_faces, "vertices": c.n_vertices, "expected": args.out + ".expected.json"})
    return 0


# --------------------------------------------------------------------------


def parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", choices=["text", "json"], default="text")
    common.add_argument("--threads", type=int, default=None, help="worker cap (default: CATK_THREADS or cpu count)")
    common.add_argument("--seed", type=int, default=0)
    p = argparse.ArgumentParser(prog="catk", description="Verify and measure polyhedral complexes with curvature bounded above.")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("check", parents=[common], help="run the CAT gluing check")
    s.add_argument("file")
    s.add_argument("--domain", help="also check admissibility of a domain (file or named domain)")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("links", parents=[common], help="print vertex links")
    s.add_argument("file")
    s.add_argument("--vertex", type=int, action="append")
    s.set_defaults(fn=cmd_links)

    s = sub.add_parser("measure", parents=[common], help="curvature measure atoms and totals")
    s.add_argument("file")
    s.add_argument("--domain")
    s.add_argument("--all-atoms", action="store_true", help="also list zero atoms")
    s.set_defaults(fn=cmd_measure)

    s = sub.add_parser("gb", parents=[common], help="Gauss-Bonnet audit of a domain")
    s.add_argument("file")
    s.add_argument("--domain", help="domain file, named domain from the sidecar, or 'all'")
    s.set_defaults(fn=cmd_gb)

    s = sub.add_parser("dist", parents=[common], help="refined-graph distance between two points")
    s.add_argument("file")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--refine", type=int, default=8)
    s.set_defaults(fn=cmd_dist)

    s = sub.add_parser("surgery", parents=[common], help="eps-surgery at a vertex")
    s.add_argument("file")
    s.add_argument("--vertex", type=int, required=True)
    s.add_argument("--segment", help="comma-separated germ ids of the link segment")
    s.add_argument("--eps", type=float)
    s.add_argument("--schedule", help="comma-separated decreasing eps values")
    s.add_argument("--domain", help="tracked domain")
    s.add_argument("--samples", type=int, default=400)
    s.add_argument("--no-distortion", action="store_true")
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(fn=cmd_surgery)

    s = sub.add_parser("gallery", parents=[common], help="generate a gallery complex")
    s.add_argument("name")
    s.add_argument("--param", action="append", metavar="KEY=VALUE")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_gallery)
    return p


def run(argv=None) -> int:
    p = parser()
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        _threads(args)
        return args.fn(args)
    except (UsageError, CatkError, OSError, ValueError, KeyError, IndexError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"catk {args.cmd}: {type(exc).__name__}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
