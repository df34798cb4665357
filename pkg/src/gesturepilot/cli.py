"""Command-line entry points.

Subcommands: serve (live socket session), replay (score a recorded log),
train / eval / gen-data (classifier lifecycle), pose (one-frame pose
dump).  Exit codes: 0 success, 1 usage error, 2 runtime error.  The only
environment variable honoured is GESTUREPILOT_LOG (debug/info/warning/
error) for log verbosity.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import os
import sys

from . import __version__
from .command_fsm import FsmConfig, load_command_table
from .drone_sim import (
    default_track,
    load_track,
    read_run_record,
    score_run,
    track_hash,
    write_run_record,
)
from .errors import GesturePilotError, ModelLoadError
from .gesture_net import (
    DEFAULT_LAYER_SIZES,
    TrainConfig,
    evaluate,
    generate_dataset,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
    split_dataset,
    train,
)
from .handpose import HandFrame, PoseCalibration, estimate_pose
from .session import (
    LandmarkSynthesizer,
    ReplaySource,
    SessionConfig,
    decode_ingest,
    run_session,
    serve_session,
)

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_calibration_flags(parser):
    parser.add_argument("--d-near", type=float, default=0.3, metavar="M",
                        help="hand depth for full throttle (default 0.3)")
    parser.add_argument("--d-far", type=float, default=0.8, metavar="M",
                        help="hand depth for zero throttle (default 0.8)")


def _calibration(args, reference: bool) -> PoseCalibration:
    base = PoseCalibration(d_near=args.d_near, d_far=args.d_far)
    if reference:
        # Neutral open-hand reference so an unrotated "five" reads as
        # the identity; synthetic clients match this exactly.
        return LandmarkSynthesizer(base).calibration
    return base


def _load_model_checked(path):
    try:
        return load_model(path)
    except (OSError, GesturePilotError) as exc:
        raise ModelLoadError(f"cannot load model {path}: {exc}") from exc


def _resolve_track(args):
    if args.track is None:
        return default_track()
    return load_track(args.track)


def _fsm_config(args) -> FsmConfig:
    if getattr(args, "rules", None):
        return FsmConfig(rules=load_command_table(args.rules))
    return FsmConfig()


def _session_config(args, model) -> SessionConfig:
    return SessionConfig(
        model=model,
        track=_resolve_track(args),
        calibration=_calibration(args, reference=not args.no_reference),
        fsm=_fsm_config(args),
        record_path=args.record,
        max_time=args.max_time,
        start_position=tuple(args.start),
    )


def _print_metrics(record) -> None:
    m = record.metrics
    print(f"finished {str(m.finished).lower()}")
    print(f"gates {len(record.gate_events)}")
    print(f"completion_time {m.completion_time!r}")
    print(f"path_length {m.path_length!r}")
    print(f"average_velocity {m.average_velocity!r}")


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def _cmd_gen_data(args) -> int:
    dataset = generate_dataset(seed=args.seed, samples_per_class=args.samples_per_class)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} samples to {args.out}")
    return 0


def _cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    if args.holdout > 0.0:
        train_set, eval_set = split_dataset(dataset, 1.0 - args.holdout, seed=args.seed)
    else:
        train_set, eval_set = dataset, None
    layer_sizes = DEFAULT_LAYER_SIZES
    if args.hidden:
        hidden = tuple(int(h) for h in args.hidden.split(","))
        layer_sizes = (DEFAULT_LAYER_SIZES[0],) + hidden + (DEFAULT_LAYER_SIZES[-1],)
    config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                         learning_rate=args.lr, momentum=args.momentum,
                         seed=args.seed, normalize=not args.no_normalize)
    model, history = train(train_set, config, eval_dataset=eval_set,
                           layer_sizes=layer_sizes)
    last = history[-1]
    arch = "x".join(str(s) for s in model.layer_sizes)
    print(f"trained {arch} on {len(train_set)} samples ({config.epochs} epochs)")
    print(f"train accuracy {last.train_accuracy:.4f} loss {last.train_loss:.4f}")
    if last.eval_accuracy is not None:
        print(f"holdout accuracy {last.eval_accuracy:.4f} loss {last.eval_loss:.4f}")
    save_model(model, args.out)
    print(f"model written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = _load_model_checked(args.model)
    dataset = load_dataset(args.data)
    report = evaluate(model, dataset, normalize=not args.no_normalize)
    print(f"accuracy {report.accuracy:.4f}")
    print(f"mean_loss {report.mean_loss:.4f}")
    print("confusion (rows = truth):")
    for row in report.confusion:
        print(" ".join(f"{int(v):5d}" for v in row))
    return 0


def _cmd_pose(args) -> int:
    text = sys.stdin.readline() if args.frame == "-" else open(args.frame).readline()
    message = decode_ingest(text.strip())
    calib = _calibration(args, reference=not args.no_reference)
    frame = HandFrame(timestamp=message.time, landmarks=message.landmarks,
                      handedness=message.handedness)
    pose = estimate_pose(frame, calib)
    print(json.dumps({
        "quaternion": [float(v) for v in pose.quaternion],
        "roll": pose.roll,
        "pitch": pose.pitch,
        "yaw": pose.yaw,
        "throttle": pose.throttle,
    }, sort_keys=True))
    return 0


def _sniff_run_record(path) -> bool:
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                return "type" in json.loads(line)
            except json.JSONDecodeError:
                return False
    return False


def _cmd_replay(args) -> int:
    track = _resolve_track(args)
    if _sniff_run_record(args.log):
        # A finished run record: re-score its trajectory against the track.
        previous = read_run_record(args.log)
        if previous.track_sha256 and previous.track_sha256 != track_hash(track):
            log.warning("record was made on a different track")
        record = score_run(previous.samples, track,
                           track_sha256=track_hash(track), config=previous.config)
    else:
        if args.model is None:
            print("error: replaying a landmark log requires --model", file=sys.stderr)
            return 1
        model = _load_model_checked(args.model)
        config = _session_config(args, model)
        record = run_session(config, ReplaySource(args.log))
    if args.out:
        write_run_record(record, args.out)
        print(f"record written to {args.out}")
    _print_metrics(record)
    return 0


def _cmd_serve(args) -> int:
    model = _load_model_checked(args.model)
    config = _session_config(args, model)
    try:
        record = asyncio.run(serve_session(config, host=args.host, port=args.port))
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 0
    if args.out:
        write_run_record(record, args.out)
        print(f"record written to {args.out}")
    _print_metrics(record)
    return 0


# ---------------------------------------------------------------------------
# Parser assembly.
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="gesturepilot",
                     description="Gesture-controlled drone race simulator.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate the procedural gesture corpus")
    p.add_argument("--out", required=True, help="dataset file to write (CSV)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-per-class", type=int, default=1000)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train the gesture classifier")
    p.add_argument("--data", required=True, help="dataset file (CSV)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", type=float, default=0.2,
                   help="fraction held out for accuracy reporting (0 disables)")
    p.add_argument("--hidden", default="",
                   help="hidden layer sizes, comma separated (default 168,546)")
    p.add_argument("--no-normalize", action="store_true",
                   help="feed raw landmark features instead of normalized ones")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("pose", help="print the 6-DoF pose of one landmark frame")
    p.add_argument("--frame", required=True,
                   help="file with one ingest JSON line, or - for stdin")
    p.add_argument("--no-reference", action="store_true",
                   help="report absolute rotation instead of relative to the "
                        "neutral open hand")
    _add_calibration_flags(p)
    p.set_defaults(func=_cmd_pose)

    for name, help_text in (("replay", "replay a landmark log or re-score a run record"),
                            ("serve", "serve a live session over a websocket")):
        p = sub.add_parser(name, help=help_text)
        if name == "replay":
            p.add_argument("--log", required=True, help="landmark log or run record")
            p.add_argument("--model", help="gesture model (needed for landmark logs)")
        else:
            p.add_argument("--model", required=True, help="gesture model file")
            p.add_argument("--host", default="127.0.0.1")
            p.add_argument("--port", type=int, default=8765)
        p.add_argument("--track", help="track file (default: built-in circuit)")
        p.add_argument("--rules", help="command-table file (default: built-in table)")
        p.add_argument("--record", help="append consumed landmark frames here")
        p.add_argument("--out", help="write the run record here")
        p.add_argument("--max-time", type=float, default=300.0,
                       help="simulated/wall time budget in seconds")
        p.add_argument("--start", type=float, nargs=3, default=[0.0, 0.0, 0.0],
                       metavar=("X", "Y", "Z"), help="drone start position")
        p.add_argument("--no-reference", action="store_true",
                       help="skip the neutral-hand rotation reference")
        _add_calibration_flags(p)
        p.set_defaults(func=_cmd_replay if name == "replay" else _cmd_serve)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("GESTUREPILOT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (GesturePilotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
