"""Command-line entry point: ``reachkit <subcommand> [flags]``.

Exit codes: 0 on success, 1 on invalid input, 2 when the request is outside
the supported envelope. Errors go to stderr as one JSON object.
"""

import argparse
import hashlib
import io
import json
import math
import os
import sys
import tempfile

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .boundary import contains, implicit_degree, implicitize, render_svg, sample_boundary
from .compare import BenchmarkRow, benchmark, hausdorff_p
from .core import ReachSpec
from .errors import CapabilityError, NumericError, ValidationError
from .size import size_curve, size_report, volume, width_map
from .support import support_box

EXACT_COMMANDS = ("size", "implicitize")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route it through exit code 1
    def error(self, message):
        raise ValidationError(message, field=None, code="usage")


def fmt(v):
    """17 significant digits, enough to round-trip a double."""
    return format(float(v), ".17g")


# argument parsing helpers ---------------------------------------------------


def parse_float_list(text, field):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}", field=field, code="parse") from None


def parse_int_list(text, field):
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}", field=field, code="parse") from None
    if not out:
        raise ValidationError("list is empty", field=field, code="empty")
    return out


def parse_range(text, field="t"):
    """``a:step:b`` (inclusive of ``b`` up to rounding) or a comma list."""
    if ":" not in text:
        return parse_float_list(text, field)
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"range must be a:step:b, got {text!r}", field=field, code="parse")
    try:
        a, step, b = (float(v) for v in parts)
    except ValueError:
        raise ValidationError(f"range must be numeric, got {text!r}", field=field, code="parse") from None
    if not (step > 0 and b >= a):
        raise ValidationError(f"range needs step > 0 and b >= a, got {text!r}", field=field, code="range")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + k * step, 12) for k in range(count)]


def parse_p(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"p must be a number or 'inf', got {text!r}", field="p", code="parse") from None


def read_bytes(path, field):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", field=field, code="io") from None


def read_rows(path, field, d):
    text = read_bytes(path, field).decode("utf-8")
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(parse_float_list(line, field))
    if not rows:
        raise ValidationError(f"{path} has no rows", field=field, code="empty")
    bad = [i for i, r in enumerate(rows) if len(r) != d]
    if bad:
        raise ValidationError(f"row {bad[0] + 1} of {path} has {len(rows[bad[0]])} values, expected {d}", field=field, code="shape")
    return np.array(rows)


# output ---------------------------------------------------------------------


def atomic_write(path, data):
    """Write to a sibling temp file, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".reachkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def header(digest):
    return f"reachkit {__version__} input-sha256={digest}"


def csv_text(digest, columns, rows):
    buf = io.StringIO()
    buf.write(f"# {header(digest)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)) for v in row))
        buf.write("\n")
    return buf.getvalue()


def json_text(digest, payload):
    doc = {"reachkit": __version__, "input_sha256": digest}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def jsonable(v):
    v = float(v)
    return v if math.isfinite(v) else str(v)


# subcommands ----------------------------------------------------------------


def cmd_support(args, ctx):
    spec = ctx.spec
    Y = read_rows(args.dirs, "dirs", spec.d)
    ctx.inputs.append(read_bytes(args.dirs, "dirs"))
    cols = [f"y{k}" for k in range(1, spec.d + 1)] + ["h"] + [f"argmax{k}" for k in range(1, spec.d + 1)]
    rows = []
    for y in Y:
        res = support_box(spec, y)
        rows.append([*y, res.value, *res.argmax_state])
    return "csv", cols, rows


def cmd_boundary(args, ctx):
    spec = ctx.spec
    blocks = range(spec.m) if args.block is None else [args.block]
    width = max(spec.r)
    cols = ["block", "sign"] + [f"x{k}" for k in range(1, width + 1)]
    rows = []
    for j in blocks:
        pts, signs = sample_boundary(spec, j, args.grid)
        for p, s in zip(pts, signs):
            rows.append([j, int(s), *p] + [""] * (width - len(p)))
    return "csv", cols, rows


def cmd_implicitize(args, ctx):
    poly = implicitize(args.r)
    return "json", {"r": args.r, "degree": implicit_degree(args.r), "polynomial": poly.to_dict()}


def cmd_render2d(args, ctx):
    return "svg", render_svg(ctx.spec, samples=args.samples)


def cmd_size(args, ctx):
    report = size_report(ctx.spec).to_dict()
    report["diameter_direction"] = [jsonable(v) for v in report["diameter_direction"]]
    if args.exact:
        v = volume(ctx.spec, exact=True)
        report["volume_exact"] = f"{v.numerator}/{v.denominator}"
    return "json", report


def cmd_curves(args, ctx):
    if args.steps < 1:
        raise ValidationError("steps must be >= 1", field="steps", code="range")
    if not args.t_max > 0:
        raise ValidationError("t-max must be positive", field="t_max", code="range")
    d_list = parse_int_list(args.d_list, "d_list")
    ts = [args.t_max * k / args.steps for k in range(1, args.steps + 1)]
    rows = size_curve(args.kind, d_list, ts, mu=args.mu)
    return "csv", ["d", "t", args.kind], rows


def cmd_width_map(args, ctx):
    phi, theta, W = width_map(ctx.spec, args.n_phi, args.n_theta)
    rows = [[p, th, W[i, k]] for i, p in enumerate(phi) for k, th in enumerate(theta)]
    return "csv", ["phi", "theta", "width"], rows


def cmd_benchmark(args, ctx):
    t_grid = parse_range(args.t)
    n_grid = parse_int_list(args.n, "n")
    rows = benchmark(ctx.spec, t_grid, n_grid, mode=args.mode)
    return "csv", list(BenchmarkRow.FIELDS), [r.as_tuple() for r in rows]


def cmd_hausdorff(args, ctx):
    res = hausdorff_p(ctx.spec, parse_p(args.p), starts=args.starts, iters=args.iters, seed=ctx.seed)
    direction = None if res.direction is None else [jsonable(v) for v in res.direction]
    meta = {k: (jsonable(v) if isinstance(v, float) else v) for k, v in res.meta.items()}
    return "json", {"p": args.p, "distance": res.distance, "direction": direction, "meta": meta}


def cmd_contains(args, ctx):
    spec = ctx.spec
    if (args.points is None) == (args.x is None):
        raise ValidationError("give exactly one of --points or --x", field="points", code="usage")
    if args.points is not None:
        X = read_rows(args.points, "points", spec.d)
        ctx.inputs.append(read_bytes(args.points, "points"))
    else:
        x = parse_float_list(args.x, "x")
        if len(x) != spec.d:
            raise ValidationError(f"x has {len(x)} values, expected {spec.d}", field="x", code="shape")
        X = np.array([x])
    cols = [f"x{k}" for k in range(1, spec.d + 1)] + ["label"]
    return "csv", cols, [[*x, contains(spec, x, tol=args.tol)] for x in X]


COMMANDS = {
    "support": cmd_support,
    "boundary": cmd_boundary,
    "implicitize": cmd_implicitize,
    "render2d": cmd_render2d,
    "size": cmd_size,
    "curves": cmd_curves,
    "width-map": cmd_width_map,
    "benchmark": cmd_benchmark,
    "hausdorff": cmd_hausdorff,
    "contains": cmd_contains,
}
NEEDS_SPEC = set(COMMANDS) - {"implicitize", "curves"}


def _common(suppress):
    # subparsers must not overwrite global flags given before the subcommand
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=dflt(1), help="worker threads for numeric kernels")
    common.add_argument("--seed", type=int, default=dflt(0))
    common.add_argument("--exact", action="store_true", default=dflt(False), help="rational arithmetic where supported")
    common.add_argument("--quiet", action="store_true", default=dflt(False))
    common.add_argument("--out", default=dflt(None), help="output path (default: stdout)")
    return common


def build_parser():
    parser = _Parser(prog="reachkit", description="Reach sets of integrator systems.", parents=[_common(False)])
    parser.add_argument("--version", action="version", version=f"reachkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, spec=True):
        p = sub.add_parser(name, help=help_, parents=[_common(True)])
        if spec:
            p.add_argument("--spec", required=True, help="JSON reach-set spec")
        return p

    p = add("support", "support values for directions in a CSV file")
    p.add_argument("--dirs", required=True)
    p = add("boundary", "sample the boundary surfaces")
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--block", type=int)
    p = add("implicitize", "implicit boundary polynomial", spec=False)
    p.add_argument("--r", type=int, required=True)
    p = add("render2d", "SVG drawing of a double-integrator reach set")
    p.add_argument("--samples", type=int, default=512)
    add("size", "volume and diameter report")
    p = add("curves", "volume or diameter of single chains against time", spec=False)
    p.add_argument("--kind", choices=("volume", "diameter"), required=True)
    p.add_argument("--d-list", default="2,3,4,5,6")
    p.add_argument("--t-max", type=float, default=8.0)
    p.add_argument("--steps", type=int, default=160)
    p.add_argument("--mu", type=float, default=1.0)
    p = add("width-map", "width over spherical angles for d = 3")
    p.add_argument("--n-phi", type=int, default=64)
    p.add_argument("--n-theta", type=int, default=128)
    p = add("benchmark", "exact against zonotope volume and diameter")
    p.add_argument("--t", required=True, help="a:step:b or comma list")
    p.add_argument("--n", required=True, help="comma list of generator counts")
    p.add_argument("--mode", choices=("inner-sample", "outer-pad"), default="outer-pad")
    p = add("hausdorff", "distance to the p-norm-ball input reach set")
    p.add_argument("--p", required=True)
    p.add_argument("--starts", type=int, default=2048)
    p.add_argument("--iters", type=int, default=500)
    p = add("contains", "classify states as inside, boundary or outside")
    p.add_argument("--points")
    p.add_argument("--x")
    p.add_argument("--tol", type=float, default=1e-9)
    return parser


class _Context:
    def __init__(self, spec, seed):
        self.spec = spec
        self.seed = seed
        self.inputs = []


def _digest(args, blobs):
    skip = {"out", "quiet", "threads", "spec", "dirs", "points"}
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    h = hashlib.sha256(json.dumps(opts, sort_keys=True).encode())
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    return h.hexdigest()


def run(argv):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        raise ValidationError("threads must be >= 1", field="threads", code="range")
    if args.exact and args.command not in EXACT_COMMANDS:
        raise CapabilityError(f"--exact is supported by {', '.join(EXACT_COMMANDS)} only", field="exact")
    blobs, spec = [], None
    if args.command in NEEDS_SPEC:
        raw = read_bytes(args.spec, "spec")
        blobs.append(raw)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise ValidationError("spec is not UTF-8", field="spec", code="parse") from None
        spec = ReachSpec.from_json(text)
    ctx = _Context(spec, args.seed)
    with threadpool_limits(limits=args.threads):
        kind, *payload = COMMANDS[args.command](args, ctx)
    digest = _digest(args, blobs + ctx.inputs)
    if kind == "csv":
        text = csv_text(digest, *payload)
    elif kind == "json":
        text = json_text(digest, payload[0])
    else:
        text = payload[0].replace("\n", f"\n<!-- {header(digest)} -->\n", 1)
    if args.out:
        atomic_write(args.out, text)
        if not args.quiet:
            print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        return run(argv)
    except ValidationError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 1
    except NumericError as exc:
        print(json.dumps({"code": "numeric", "field": None, "detail": str(exc)}), file=sys.stderr)
        return 1
    except CapabilityError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
