"""Command-line entry point: ``evscan <subcommand> ...``.

Exit codes: 0 on success, 1 when inputs fail validation, 2 for usage errors
and unreadable or malformed input files. Failures print one line to stderr::

    evscan: error: code=<n> type=<ExceptionName> message=<text>
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .block import ScanBlockConfig, run_hsfc_block
from .curves import CurveKind, GridDims, generate, write_binary, write_text
from .events import DEFAULT_BINS, group_events, load_events, read_voxel_grid, single_group, voxel_csv, voxelize, write_voxel_grid
from .locality import format_report, locality_rows
from .ssm import SsmParams, build_kernel, discretize, scan_convolutional, scan_recurrent
from .windowing import DEFAULT_SAMPLES, WindowOffset, build_mask, layer_rng, sample_offset

EXIT_VALIDATION = 1
EXIT_USAGE = 2


class InputFileError(Exception):
    """An input file is missing, unreadable or malformed."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report(EXIT_USAGE, "UsageError", message)
        sys.exit(EXIT_USAGE)


def _report(code, kind, message):
    message = " ".join(str(message).split())
    print(f"evscan: error: code={code} type={kind} message={message}", file=sys.stderr)


def _csv_ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _csv_floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _dims(text):
    try:
        return GridDims.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _emit(data, out):
    """Write str/bytes to ``out`` or stdout."""
    if out is None:
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    path = Path(out)
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        path.write_text(data, encoding="utf-8")


def cmd_curve(args):
    path = generate(args.kind, args.dims)
    buf = io.BytesIO()
    if args.format == "bin":
        write_binary(path, buf)
        _emit(buf.getvalue(), args.out)
    else:
        write_text(path, buf)
        _emit(buf.getvalue().decode("ascii"), args.out)


def cmd_locality(args):
    rows = locality_rows(args.kinds, args.sizes, args.dims, pair_budget=args.pair_budget)
    _emit(format_report(rows), args.out)


def _read_events(path):
    try:
        return load_events(path)
    except (OSError, ValueError) as exc:
        raise InputFileError(str(exc)) from exc


def cmd_voxelize(args):
    parsed = _read_events(args.events)
    if args.dims is not None:
        width, height = args.dims.width, args.dims.height
    elif parsed.width is not None:
        width, height = parsed.width, parsed.height
    else:
        raise ValueError("sensor size unknown: add a 'W H' header line or pass --dims")
    if args.frame_times:
        groups, dropped = group_events(parsed.events, args.frame_times)
        if dropped:
            print(f"dropped {dropped} event(s) outside the frame timestamps", file=sys.stderr)
    else:
        groups = [single_group(parsed.events)]
    grids = [voxelize(g, args.bins, height, width) for g in groups]

    for k, grid in enumerate(grids):
        if args.out is None:
            target = None
        elif len(grids) == 1:
            target = args.out
        else:
            out = Path(args.out)
            target = out.with_name(f"{out.stem}_{k:04d}{out.suffix}")
        if args.format == "csv":
            _emit(voxel_csv(grid), target)
        else:
            buf = io.BytesIO()
            write_voxel_grid(grid, buf)
            _emit(buf.getvalue(), target)


def cmd_mask(args):
    s = args.win_size
    if args.offset is not None:
        if len(args.offset) != 2:
            raise ValueError("--offset takes two integers: dh,dw")
        offset = WindowOffset(args.offset[0], args.offset[1], s)
    else:
        offset = sample_offset(s, layer_rng(args.seed))
    mask = build_mask(args.dims.height, args.dims.width, s, offset)
    header = f"# dh={offset.dh} dw={offset.dw} s={s} regions={mask.region_count}\n"
    _emit(header + mask.to_text(), args.out)


def _ssm_from_args(args):
    # Length-1 lists broadcast to the state size of the longest one.
    vectors = (args.ssm_a, args.ssm_b, args.ssm_c)
    n = max(len(v) for v in vectors)
    a, b, c = (np.array(v * n if len(v) == 1 else v) for v in vectors)
    return SsmParams(a, b, c, args.delta)


def cmd_scanblock(args):
    try:
        vol = read_voxel_grid(args.volume)
    except (OSError, ValueError) as exc:
        raise InputFileError(str(exc)) from exc
    cfg = ScanBlockConfig(
        ssm=_ssm_from_args(args),
        win_size=args.win_size,
        samples=args.samples,
        seed=args.seed,
        curve_dim=args.curve_dim,
        enumerate_offsets=args.enumerate,
    )
    out = run_hsfc_block(cfg, vol)
    if args.format == "csv":
        _emit(voxel_csv(out), args.out)
    else:
        buf = io.BytesIO()
        write_voxel_grid(out, buf)
        _emit(buf.getvalue(), args.out)


BENCH_COLUMNS = ("section", "name", "param", "seconds", "per_second", "checksum")


def _timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def _checksum(arr):
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()[:16]


def cmd_bench(args):
    """Timings are informational; the checksum column is deterministic."""
    rng = layer_rng(args.seed)
    rows = []
    params = SsmParams(-rng.uniform(0.1, 1.0, args.state_dim), rng.normal(size=args.state_dim),
                       rng.normal(size=args.state_dim), 0.5)
    d = discretize(params)
    for m in args.lengths:
        x = rng.normal(size=(args.batch, m))
        kernel = build_kernel(d, m)
        for name, fn in (("recurrent", lambda: scan_recurrent(d, x)),
                         ("convolutional", lambda: scan_convolutional(kernel, x))):
            secs, y = _timed(fn, args.repeat)
            rows.append(("ssm", name, m, secs, args.batch * m / secs, _checksum(y)))
    for kind in args.kinds:
        for side in args.sizes:
            secs, path = _timed(lambda: generate(kind, (side, side)), args.repeat)
            rows.append(("curve", CurveKind(kind).value, side, secs, len(path) / secs, _checksum(path.points)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for section, name, param, secs, rate, digest in rows:
        writer.writerow([section, name, param, f"{secs:.6g}", f"{rate:.6g}", digest])
    _emit(buf.getvalue(), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evscan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"evscan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    kinds = [k.value for k in CurveKind]

    p = sub.add_parser("curve", help="generate a curve and export it")
    p.add_argument("--kind", choices=kinds, default="hilbert")
    p.add_argument("--dims", type=_dims, required=True, help="WxH or WxHxD")
    p.add_argument("--format", choices=("text", "bin"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("locality", help="jump/still/SLR report as CSV")
    p.add_argument("--kinds", type=lambda s: [CurveKind(k) for k in s.split(",")], default=["hilbert", "reshape"])
    p.add_argument("--sizes", type=_csv_ints, default=[2, 4, 8, 16])
    p.add_argument("--dims", type=_csv_ints, default=[2], help="dimensionalities, e.g. 2,3")
    p.add_argument("--pair-budget", type=int, default=1 << 25)
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_locality)

    p = sub.add_parser("voxelize", help="event text file to EVXGRID1 voxel grid")
    p.add_argument("events")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--dims", type=_dims, help="sensor WxH, overrides the file header")
    p.add_argument("--frame-times", type=_csv_floats,
                   help="comma-separated frame timestamps; one grid per interval")
    p.add_argument("--format", choices=("bin", "csv"), default="bin")
    p.add_argument("--out")
    p.set_defaults(func=cmd_voxelize)

    p = sub.add_parser("mask", help="random window offset region labels")
    p.add_argument("--dims", type=_dims, required=True, help="WxH")
    p.add_argument("--win-size", type=int, required=True)
    p.add_argument("--offset", type=_csv_ints, help="dh,dw (sampled from --seed when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text",), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("scanblock", help="dual Hilbert scan block over an EVXGRID1 volume")
    p.add_argument("volume")
    p.add_argument("--win-size", type=int)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--enumerate", action="store_true", help="average over every offset instead of sampling")
    p.add_argument("--curve-dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--ssm-a", type=_csv_floats, default=[-0.5])
    p.add_argument("--ssm-b", type=_csv_floats, default=[1.0])
    p.add_argument("--ssm-c", type=_csv_floats, default=[1.0])
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--format", choices=("bin", "csv"), default="bin")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scanblock)

    p = sub.add_parser("bench", help="throughput tables (CSV)")
    p.add_argument("--lengths", type=_csv_ints, default=[64, 256, 1024, 4096])
    p.add_argument("--state-dim", type=int, default=16)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--kinds", type=lambda s: [CurveKind(k) for k in s.split(",")],
                   default=[CurveKind.HILBERT, CurveKind.ZORDER, CurveKind.RESHAPE])
    p.add_argument("--sizes", type=_csv_ints, default=[64, 256])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InputFileError as exc:
        _report(EXIT_USAGE, "InputFileError", exc)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        _report(EXIT_VALIDATION, type(exc).__name__, exc)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
