"""Command implementations for scripts/chores.py: run, gen and verify."""

import argparse
import logging
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from src.config.settings import (
    DEFAULT_S_FORMULA,
    EXIT_CODES,
    FILE_NAMES,
    GENERATOR,
    OUTPUT_PATH,
    S_FORMULAS,
)
from src.exceptions import InputError, ProtocolError
from src.geometry import format_fraction
from src.ingest import AllocationReader, InstanceReader, TranscriptReader
from src.protocol import RunConfig, Transcript, run
from src.storage import ParquetWriter, TextWriter, format_instance
from src.utils.logger import configure_logging, get_logger
from src.verify import format_report, verify_run

from .generate import generate_densities

logger = get_logger(__name__)


def summary_frame(transcript: Transcript) -> pd.DataFrame:
    """One row per outer pass: who objected to whom, r, s, epsilon and mini-rounds."""
    rows = []
    for event in transcript:
        d = event.data
        if event.kind == "pass":
            rows.append({"pass": d["index"], "objector": d["objector"], "divider": d["divider"],
                         "r": None, "s": None, "epsilon": None, "mini_rounds": 0})
        elif not rows:
            continue
        elif event.kind == "name_r":
            rows[-1]["r"] = d["r"]
        elif event.kind == "name_s":
            rows[-1]["s"] = d["s"]
        elif event.kind == "epsilon":
            rows[-1]["epsilon"] = format_fraction(d["value"])
        elif event.kind == "mini_round":
            rows[-1]["mini_rounds"] += 1
    return pd.DataFrame(rows, columns=["pass", "objector", "divider", "r", "s", "epsilon", "mini_rounds"])


def format_summary(transcript: Transcript, label: str = "") -> str:
    frame = summary_frame(transcript)
    ia_pairs = [e.data["pair"] for e in transcript.of_kind("ia_insert")]
    lines = [f"instance: {label}"]
    if frame.empty:
        lines.append("settled at Step 3")
    else:
        lines.append(f"settled after {len(frame)} passes")
    lines.append(f"rounds: {len(frame)}")
    lines.append(f"cuts: {transcript.cut_count()}")
    lines.append(f"ia pairs: {len(ia_pairs)} " + " ".join(f"({i},{j})" for i, j in ia_pairs))
    lines.append("r named: " + " ".join(str(r) for r in frame["r"].tolist()))
    lines.append("s named: " + " ".join(str(s) for s in frame["s"].tolist()))
    if not frame.empty:
        lines.append(frame.to_string(index=False))
    return "\n".join(lines) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    logger.info("=" * 60)
    logger.info("Chore division run: %s", args.instance)
    logger.info("=" * 60)
    try:
        instance = InstanceReader(args.instance).read()
    except InputError as e:
        print(f"error: {e}")
        return EXIT_CODES["input_error"]

    out = Path(args.out)
    writer = TextWriter(out)
    config = RunConfig(s_formula=args.s_formula, max_rounds=args.max_rounds)
    try:
        allocation, transcript = run(instance.densities, config)
    except ProtocolError as e:
        path = None
        if e.transcript is not None:
            path = writer.write_transcript(e.transcript, FILE_NAMES["partial_transcript"])
        print(f"protocol error: {e}")
        print(f"transcript prefix: {path}")
        return EXIT_CODES["protocol_error"]

    try:
        writer.write_allocation(allocation, instance.densities, FILE_NAMES["allocation"])
        writer.write_transcript(transcript, FILE_NAMES["transcript"])
        summary = format_summary(transcript, instance.label)
        writer.write(summary, FILE_NAMES["summary"])
        if args.parquet:
            ParquetWriter(out).write_events(transcript, FILE_NAMES["events"])
    except InputError as e:
        logger.error("Could not write run outputs: %s", e)
        print(f"protocol error: outputs not written: {e}")
        return EXIT_CODES["protocol_error"]
    print(summary, end="")

    if args.verify:
        result = verify_run(allocation, transcript, instance.densities)
        print(format_report(result), end="")
        if not result.ok:
            logger.error("Verification failed: %s", ", ".join(result.failed_checks))
            return EXIT_CODES["verify_failed"]
    logger.info("Run complete; outputs in %s", out)
    return EXIT_CODES["ok"]


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        densities = generate_densities(args.n, args.seed, args.budget)
    except InputError as e:
        print(f"error: {e}")
        return EXIT_CODES["input_error"]
    label = f"random n={args.n} seed={args.seed} budget={args.budget}"
    text = format_instance(densities, label)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("Wrote instance %s", path)
    else:
        print(text, end="")
    return EXIT_CODES["ok"]


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        instance = InstanceReader(args.instance).read()
        transcript = TranscriptReader(args.transcript).read()
        allocation = AllocationReader(args.allocation).read()
        if allocation.n != instance.n:
            raise InputError(f"allocation has {allocation.n} shares, instance has {instance.n} players")
        result = verify_run(allocation, transcript, instance.densities)
    except InputError as e:
        print(f"error: {e}")
        return EXIT_CODES["input_error"]
    print(format_report(result), end="")
    if not result.ok:
        print("failed checks: " + ", ".join(result.failed_checks))
        return EXIT_CODES["verify_failed"]
    return EXIT_CODES["ok"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chores", description="Envy-free chore division")
    parser.add_argument("--debug", action="store_true", help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the protocol on an instance file")
    p_run.add_argument("instance", type=Path)
    p_run.add_argument("--out", type=Path, default=OUTPUT_PATH)
    p_run.add_argument("--verify", action="store_true", help="audit the run afterwards")
    p_run.add_argument("--max-rounds", type=int, default=None, help="outer pass cap (default n(n-1)+2)")
    p_run.add_argument("--s-formula", choices=S_FORMULAS, default=DEFAULT_S_FORMULA)
    p_run.add_argument("--parquet", action="store_true", help="also export events.parquet")
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("gen", help="write a seeded random instance")
    p_gen.add_argument("n", type=int)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--budget", type=int, default=GENERATOR["budget"])
    p_gen.add_argument("--out", type=Path, default=None)
    p_gen.set_defaults(func=cmd_gen)

    p_verify = sub.add_parser("verify", help="audit a transcript and allocation")
    p_verify.add_argument("instance", type=Path)
    p_verify.add_argument("transcript", type=Path)
    p_verify.add_argument("allocation", type=Path)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if args.debug else logging.INFO)
    return args.func(args)
