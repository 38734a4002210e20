"""Command-line front end emitting deterministic CSV and PGM artifacts.

Every CSV begins with `#` metadata lines (tool version, command, resolved
configuration), numeric fields are formatted to 6 significant digits, and
identical configurations produce byte-identical files.  All outputs of a
command are fully computed before the first byte is written, then written to
temporary files and atomically renamed, so a failing run never leaves
partial artifacts behind.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .codec import DEFAULT_BLOCK_SIZE, ContentSpec, synth_content
from .cpdt import aggregate_by_ratio, build_rd_curve, full_sweep, local_minimum_report
from .pgm import encode_pgm, read_pgm
from .quantizer import AWAY_FROM_ZERO, TOWARD_ZERO, Quantizer, as_fraction
from .reference import FULL_CODEC_REFERENCE
from .requant import (
    DEFAULT_DOMAIN,
    MEAN_ABS,
    METRICS,
    CoefficientDomain,
    boundary_overlap,
    error_surface,
    sweep_qstep_t,
)
from .transform import TRANSFORM_SIZES

__all__ = ["main", "build_parser"]

LOCAL_MIN_QPS = (22, 28, 32, 38)
LOCAL_MIN_RADIUS = 2


@dataclass(frozen=True)
class _Arg:
    """A parsed flag value that remembers its raw spelling for the CSV echo."""

    raw: str
    value: object

    def __str__(self) -> str:
        return self.raw


def _fraction_from_text(text: str) -> Fraction:
    try:
        return as_fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _rational_arg(text: str) -> _Arg:
    return _Arg(text, _fraction_from_text(text))


def _offset_arg(text: str) -> _Arg:
    value = _fraction_from_text(text)
    if not 0 <= value < 1:
        raise argparse.ArgumentTypeError(f"offset must lie in [0, 1), got {text}")
    return _Arg(text, value)


def _parse_range(text: str) -> list[Fraction]:
    """lo:hi:step (or a single value); lo is included, and so is hi whenever
    lo + k*step lands on it (2:40:1 yields 39 values)."""
    parts = text.split(":")
    if len(parts) == 1:
        return [_fraction_from_text(parts[0])]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"range must be a single value or lo:hi:step, got {text!r}"
        )
    lo, hi, step = (_fraction_from_text(p) for p in parts)
    if step <= 0:
        raise argparse.ArgumentTypeError(f"range step must be positive, got {step}")
    if hi < lo:
        raise argparse.ArgumentTypeError(f"range hi must be >= lo, got {text!r}")
    count = int((hi - lo) / step) + 1
    return [lo + k * step for k in range(count)]


def _range_arg(text: str) -> _Arg:
    return _Arg(text, _parse_range(text))


def _int_range_arg(text: str) -> _Arg:
    values = _parse_range(text)
    if any(v.denominator != 1 for v in values):
        raise argparse.ArgumentTypeError(f"range must contain only integers, got {text!r}")
    return _Arg(text, [int(v) for v in values])


def _domain_arg(text: str) -> _Arg:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"domain must be lo:hi (use --domain=-32768:32767 for a negative lo), got {text!r}"
        )
    try:
        lo, hi = int(parts[0]), int(parts[1])
        domain = CoefficientDomain(lo, hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return _Arg(text, domain)


def _fmt(value: object) -> str:
    """CSV cell formatting: 6 significant digits, empty cell for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return f"{value:.6g}"


def _metadata(command: str, config: dict[str, object]) -> list[str]:
    lines = [f"# cpdtlab {__version__}", f"# command: {command}"]
    for key in sorted(config):
        lines.append(f"# {key}: {config[key]}")
    return lines


def _csv_payload(meta: list[str], header: str, rows: list[list[str]]) -> bytes:
    lines = meta + [header] + [",".join(cells) for cells in rows]
    return ("\n".join(lines) + "\n").encode("ascii")


def _write_outputs(outputs: dict[Path, bytes]) -> None:
    """Write every payload to a temp file, then rename all into place."""
    staged: list[tuple[Path, Path]] = []
    try:
        for path, data in outputs.items():
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(data)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise


def _quant_config(args: argparse.Namespace, include_metric: bool) -> dict[str, object]:
    config: dict[str, object] = {
        "offset": args.offset,
        "tie_break": args.tie_break,
        "domain": args.domain,
    }
    if include_metric:
        config["metric"] = args.metric
    return config


def _cmd_requant_sweep(args: argparse.Namespace) -> int:
    points = sweep_qstep_t(
        args.qstep_s.value,
        args.qstep_t.value,
        args.domain.value,
        args.metric,
        args.offset.value,
        args.tie_break,
    )
    meta = _metadata(
        "requant-sweep",
        {"qstep_s": args.qstep_s, "qstep_t": args.qstep_t, **_quant_config(args, True)},
    )
    rows = [
        [_fmt(p.qstep_s), _fmt(p.qstep_t), _fmt(p.e_a), _fmt(p.e_b), _fmt(p.ratio),
         p.metric, _fmt(p.offset)]
        for p in points
    ]
    payload = _csv_payload(meta, "qstep_s,qstep_t,e_a,e_b,ratio,metric,offset", rows)
    _write_outputs({Path(args.out): payload})
    return 0


def _cmd_requant_surface(args: argparse.Namespace) -> int:
    surface = error_surface(
        args.qstep_s.value,
        args.qstep_t.value,
        args.domain.value,
        args.metric,
        args.offset.value,
        args.tie_break,
    )
    meta = _metadata(
        "requant-surface",
        {"qstep_s": args.qstep_s, "qstep_t": args.qstep_t, **_quant_config(args, True)},
    )
    rows = [
        [_fmt(p.qstep_s), _fmt(p.qstep_t), _fmt(p.e_a), _fmt(p.e_b), _fmt(p.ratio),
         p.metric, _fmt(p.offset), p.flag or ""]
        for row in surface.cells
        for p in row
    ]
    payload = _csv_payload(meta, "qstep_s,qstep_t,e_a,e_b,ratio,metric,offset,flag", rows)
    _write_outputs({Path(args.out): payload})
    return 0


def _cmd_requant_overlap(args: argparse.Namespace) -> int:
    q_s = Quantizer(args.qstep_s.value, args.offset.value, args.tie_break)
    q_t = Quantizer(args.qstep_t.value, args.offset.value, args.tie_break)
    report = boundary_overlap(q_s, q_t, args.domain.value)
    meta = _metadata(
        "requant-overlap",
        {"qstep_s": args.qstep_s, "qstep_t": args.qstep_t, **_quant_config(args, False)},
    )
    rows = [
        [_fmt(report.qstep_s), _fmt(report.qstep_t), _fmt(report.offset),
         _fmt(report.aligned_fraction), _fmt(report.max_extra_error),
         report.split_bin_period]
    ]
    payload = _csv_payload(
        meta,
        "qstep_s,qstep_t,offset,aligned_fraction,max_extra_error,split_bin_period",
        rows,
    )
    _write_outputs({Path(args.out): payload})
    return 0


def _cmd_gen_content(args: argparse.Namespace) -> int:
    spec = ContentSpec(
        seed=args.seed, complexity=args.complexity, width=args.width, height=args.height
    )
    plane = synth_content(spec)
    _write_outputs({Path(args.out): encode_pgm(plane)})
    return 0


def _cmd_rd_curve(args: argparse.Namespace) -> int:
    plane = read_pgm(args.input)
    curve = build_rd_curve(plane, args.qp.value, args.block_size)
    meta = _metadata(
        "rd-curve",
        {"input": args.input, "qp": args.qp, "block_size": args.block_size},
    )
    rows = [[_fmt(pt.qp), _fmt(pt.rate), _fmt(pt.psnr)] for pt in curve.samples]
    payload = _csv_payload(meta, "qp,rate,psnr", rows)
    _write_outputs({Path(args.out): payload})
    return 0


def _eligible_local_min_qps(qp_s_values: Sequence[int], qp_t_values: Sequence[int]) -> list[int]:
    qs, qt = set(qp_s_values), set(qp_t_values)
    return [
        q
        for q in LOCAL_MIN_QPS
        if q in qs and all(q + d in qt for d in range(-LOCAL_MIN_RADIUS, LOCAL_MIN_RADIUS + 1))
    ]


def _cmd_cpdt_sweep(args: argparse.Namespace) -> int:
    plane = read_pgm(args.input)
    plane_id = Path(args.input).stem
    curve = build_rd_curve(plane, block_size=args.block_size)
    records = full_sweep(
        plane, args.qp_s.value, args.qp_t.value, curve, block_size=args.block_size
    )
    profile = aggregate_by_ratio(records, args.bin_width)
    by_pair = {(r.qp_s, r.qp_t): r for r in records}
    eligible = [
        q
        for q in _eligible_local_min_qps(args.qp_s.value, args.qp_t.value)
        if by_pair[(q, q)].flag is None
    ]
    local_rows = local_minimum_report(records, eligible) if eligible else []

    config = {
        "input": args.input,
        "qp_s": args.qp_s,
        "qp_t": args.qp_t,
        "bin_width": args.bin_width,
        "block_size": args.block_size,
    }
    record_rows = [
        [plane_id, _fmt(r.qp_s), _fmt(r.qp_t), _fmt(r.source_rate), _fmt(r.target_rate),
         _fmt(r.ratio), _fmt(r.psnr_r), _fmt(r.psnr_t), _fmt(r.psnr_c), _fmt(r.delta_psnr),
         r.flag or ""]
        for r in records
    ]
    records_payload = _csv_payload(
        _metadata("cpdt-sweep", config),
        "plane_id,qp_s,qp_t,source_rate,target_rate,ratio,psnr_r,psnr_t,psnr_c,delta_psnr,flag",
        record_rows,
    )

    reference_note = "# reference full-codec scale (dB): " + " ".join(
        f"{key}={FULL_CODEC_REFERENCE[key]:g}" for key in sorted(FULL_CODEC_REFERENCE)
    )
    profile_rows = [
        [_fmt(b.lo), _fmt(b.hi), _fmt(b.mean_delta_psnr), _fmt(b.count)]
        for b in profile.bins
    ]
    profile_payload = _csv_payload(
        _metadata("cpdt-sweep", config) + [reference_note],
        "ratio_lo,ratio_hi,mean_delta_psnr,count",
        profile_rows,
    )

    local_min_rows = [
        [plane_id, _fmt(r.qp_s), _fmt(r.best_qp_t), _fmt(r.matches), _fmt(r.delta_at_qp_s)]
        for r in local_rows
    ]
    local_min_payload = _csv_payload(
        _metadata("cpdt-sweep", config),
        "plane_id,qp_s,best_qp_t,matches,delta_at_qp_s",
        local_min_rows,
    )

    prefix = Path(args.out_prefix)
    _write_outputs(
        {
            prefix.with_name(prefix.name + "_records.csv"): records_payload,
            prefix.with_name(prefix.name + "_profile.csv"): profile_payload,
            prefix.with_name(prefix.name + "_local_min.csv"): local_min_payload,
        }
    )
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from .acceptance import run_all

    def report(result) -> None:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {result.name}  [{result.seconds:.1f}s]  {result.detail}", flush=True)

    results = run_all(progress=report)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return 0 if passed == len(results) else 2


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit 1 instead of 2."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_quant_flags(parser: argparse.ArgumentParser, include_metric: bool) -> None:
    parser.add_argument(
        "--offset",
        type=_offset_arg,
        default=_Arg("0", Fraction(0)),
        help="dead-zone rounding offset in [0, 1) (default 0)",
    )
    parser.add_argument(
        "--tie-break",
        choices=(TOWARD_ZERO, AWAY_FROM_ZERO),
        default=TOWARD_ZERO,
        help="which level wins when |x|/step + offset is an exact integer",
    )
    if include_metric:
        parser.add_argument(
            "--metric", choices=METRICS, default=MEAN_ABS, help="error statistic to report"
        )
    parser.add_argument(
        "--domain",
        type=_domain_arg,
        default=_Arg("-32768:32767", DEFAULT_DOMAIN),
        help="inclusive integer coefficient domain lo:hi "
        "(write --domain=-100:100 when lo is negative)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cpdtlab",
        description="Requantization error analysis and cascaded transcoding experiments.",
    )
    parser.add_argument("--version", action="version", version=f"cpdtlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    requant = sub.add_parser("requant", help="requantization error analysis")
    rsub = requant.add_subparsers(dest="subcommand", metavar="subcommand")

    sweep = rsub.add_parser("sweep", help="error ratio along a target-step range")
    sweep.add_argument("--qstep-s", type=_rational_arg, required=True,
                       help="source step (rational: 12, 27.6, or 138/5)")
    sweep.add_argument("--qstep-t", type=_range_arg, required=True,
                       help="target step value or range lo:hi:step (hi included when on grid)")
    _add_quant_flags(sweep, include_metric=True)
    sweep.add_argument("--out", required=True, help="output CSV path")
    sweep.set_defaults(handler=_cmd_requant_sweep)

    surface = rsub.add_parser("surface", help="error ratio over a (source, target) grid")
    surface.add_argument("--qstep-s", type=_range_arg, required=True,
                         help="source step value or range lo:hi:step")
    surface.add_argument("--qstep-t", type=_range_arg, required=True,
                         help="target step value or range lo:hi:step")
    _add_quant_flags(surface, include_metric=True)
    surface.add_argument("--out", required=True, help="output CSV path")
    surface.set_defaults(handler=_cmd_requant_surface)

    overlap = rsub.add_parser("overlap", help="decision-boundary alignment report")
    overlap.add_argument("--qstep-s", type=_rational_arg, required=True, help="source step")
    overlap.add_argument("--qstep-t", type=_rational_arg, required=True, help="target step")
    _add_quant_flags(overlap, include_metric=False)
    overlap.add_argument("--out", required=True, help="output CSV path")
    overlap.set_defaults(handler=_cmd_requant_overlap)

    gen = sub.add_parser("gen-content", help="write a deterministic synthetic plane")
    gen.add_argument("--seed", type=int, required=True, help="random seed")
    gen.add_argument("--complexity", type=float, required=True,
                     help="content complexity in [0, 1]")
    gen.add_argument("--width", type=int, default=256, help="plane width (default 256)")
    gen.add_argument("--height", type=int, default=256, help="plane height (default 256)")
    gen.add_argument("--out", required=True, help="output PGM path")
    gen.set_defaults(handler=_cmd_gen_content)

    curve = sub.add_parser("rd-curve", help="rate-distortion curve of a plane")
    curve.add_argument("--input", required=True, help="input PGM path")
    curve.add_argument("--qp", type=_int_range_arg, default=_Arg("0:51:1", list(range(52))),
                       help="qp value or range lo:hi:step (default 0:51:1)")
    curve.add_argument("--block-size", type=int, choices=TRANSFORM_SIZES,
                       default=DEFAULT_BLOCK_SIZE, help="transform block size")
    curve.add_argument("--out", required=True, help="output CSV path")
    curve.set_defaults(handler=_cmd_rd_curve)

    cpdt = sub.add_parser("cpdt-sweep",
                          help="cascaded transcode sweep: records, ratio profile, local minima")
    cpdt.add_argument("--input", required=True, help="input PGM path")
    cpdt.add_argument("--qp-s", type=_int_range_arg, default=_Arg("0:51:1", list(range(52))),
                      help="source qp value or range (default 0:51:1)")
    cpdt.add_argument("--qp-t", type=_int_range_arg, default=_Arg("0:51:1", list(range(52))),
                      help="target qp value or range (default 0:51:1)")
    cpdt.add_argument("--bin-width", type=float, default=0.05,
                      help="transcoding-ratio bin width (default 0.05)")
    cpdt.add_argument("--block-size", type=int, choices=TRANSFORM_SIZES,
                      default=DEFAULT_BLOCK_SIZE, help="transform block size")
    cpdt.add_argument("--out-prefix", required=True,
                      help="writes <prefix>_records.csv, <prefix>_profile.csv, "
                      "<prefix>_local_min.csv")
    cpdt.set_defaults(handler=_cmd_cpdt_sweep)

    verify = sub.add_parser("verify", help="run the acceptance checks and print a table")
    verify.set_defaults(handler=_cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    handler = getattr(args, "handler", None)
    if handler is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return handler(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
