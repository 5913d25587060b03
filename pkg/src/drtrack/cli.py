"""Command line: ``track``, ``eval`` and ``synth``.

Exit codes: 0 success, 2 malformed input, 3 failure while running.
"""
import argparse
import dataclasses
import json
import os
import sys

import numpy as np
from PIL import Image

from .errors import ConfigError, DegenerateBox, DegenerateRegion, TargetLeavesFrame, TrackingError
from .evaluation import make_records, ope_metrics, write_results
from .learning import LearnConfig
from .synthetic import (Deformation, Occlusion, SynthSpec, format_box, generate, read_boxes,
                        write_boxes, write_sequence)
from .tracker import ABLATIONS, TrackConfig, ablation_config, track_sequence

IMAGE_EXTS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".pgm", ".ppm")

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3


class InputError(Exception):
    pass


def read_key_values(path):
    """``key=value`` pairs from a text file; ``#`` starts a comment. Keys may repeat."""
    if not os.path.isfile(path):
        raise InputError(f"no such file: {path}")
    pairs = []
    with open(path) as f:
        for n, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            pairs.append((key, value))
    return pairs


def _numbers(text, cast=float):
    parts = text.replace("x", ",").replace(" ", ",").split(",")
    return tuple(cast(p) for p in parts if p)


def _coerce(key, text, default):
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(text)
            return low in ("1", "true", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return _numbers(text, type(default[0]) if default else float)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def _defaults(cls):
    return {f.name: (f.default if f.default is not dataclasses.MISSING else f.default_factory())
            for f in dataclasses.fields(cls)}


def load_run_config(path=None):
    """Tracker settings from a flat ``key=value`` file.

    Keys are the field names of :class:`TrackConfig` and :class:`LearnConfig`
    (e.g. ``update_interval=5``, ``eta=1``, ``grid=3x3``).  Unknown keys and
    out-of-range values raise :class:`ConfigError`.
    """
    track_defaults = _defaults(TrackConfig)
    learn_defaults = _defaults(LearnConfig)
    track_defaults.pop("learn")
    track_kw, learn_kw = {}, {}
    for key, value in (read_key_values(path) if path else []):
        if key in track_defaults:
            track_kw[key] = _coerce(key, value, track_defaults[key])
        elif key in learn_defaults:
            learn_kw[key] = _coerce(key, value, learn_defaults[key])
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        learn = dataclasses.replace(TrackConfig().learn, **learn_kw)
        return TrackConfig(learn=learn, **track_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_synth_spec(path):
    """:class:`SynthSpec` from ``key=value`` lines.

    ``occlusion=x0,y0,x1,y1,start,stop`` and
    ``deformation=x0,y0,x1,y1,start,stop[,amplitude]`` may repeat.
    """
    defaults = _defaults(SynthSpec)
    kw, occ, dfm = {}, [], []
    for key, value in read_key_values(path):
        if key == "occlusion":
            v = _numbers(value)
            if len(v) != 6:
                raise ConfigError(f"occlusion needs 6 numbers, got {value!r}")
            occ.append(Occlusion(v[:4], int(v[4]), int(v[5])))
        elif key == "deformation":
            v = _numbers(value)
            if len(v) not in (6, 7):
                raise ConfigError(f"deformation needs 6 or 7 numbers, got {value!r}")
            dfm.append(Deformation(v[:4], int(v[4]), int(v[5]), *(int(a) for a in v[6:])))
        elif key in defaults and key not in ("occlusions", "deformations"):
            kw[key] = _coerce(key, value, defaults[key])
        else:
            raise ConfigError(f"unknown spec key {key!r}")
    for key in ("frame_size", "target_size"):
        if key in kw:
            kw[key] = tuple(int(v) for v in kw[key])
    try:
        return SynthSpec(occlusions=tuple(occ), deformations=tuple(dfm), **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def list_frames(seq_dir):
    if not os.path.isdir(seq_dir):
        raise InputError(f"not a directory: {seq_dir}")
    names = sorted(n for n in os.listdir(seq_dir) if n.lower().endswith(IMAGE_EXTS))
    if not names:
        raise InputError(f"no image files in {seq_dir}")
    return [os.path.join(seq_dir, n) for n in names]


def load_frame(path):
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB" if "A" in im.mode or im.mode == "P" else "L")
        return np.asarray(im)


def _load_boxes(path):
    if not os.path.isfile(path):
        raise InputError(f"no such file: {path}")
    try:
        boxes = read_boxes(path)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if len(boxes) == 0:
        raise InputError(f"{path}: no boxes")
    return boxes


def cmd_track(seq_dir, gt_file, config_file=None, out_path=None, ablation=None):
    paths = list_frames(seq_dir)
    gt = _load_boxes(gt_file)
    cfg = load_run_config(config_file)
    if ablation:
        cfg = ablation_config(ablation, cfg)
    boxes = track_sequence((load_frame(p) for p in paths), gt[0], cfg)
    if out_path:
        write_boxes(out_path, boxes)
    else:
        for x, y, w, h in boxes:
            print(format_box((x + 1, y + 1, w, h)))
    return EXIT_OK


def cmd_eval(pred_file, gt_file, out_dir=None):
    pred, gt = _load_boxes(pred_file), _load_boxes(gt_file)
    if len(pred) != len(gt):
        raise InputError(f"{len(pred)} predictions but {len(gt)} ground-truth boxes")
    try:
        result = ope_metrics(make_records(pred, gt))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if out_dir:
        write_results(result, out_dir)
    print(json.dumps(result.summary()))
    return EXIT_OK


def cmd_synth(spec_file, out_dir):
    spec = load_synth_spec(spec_file)
    frames, boxes = generate(spec)
    write_sequence(frames, boxes, out_dir)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="drtrack", description="Correlation-filter tracking tools.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("track", help="track a target through an image directory")
    t.add_argument("--seq", required=True, help="directory of frames, sorted by name")
    t.add_argument("--gt", required=True, help="box file; the first line initializes the tracker")
    t.add_argument("--config", help="key=value settings file")
    t.add_argument("--out", help="output box file (default: stdout)")
    t.add_argument("--ablation", choices=ABLATIONS)

    e = sub.add_parser("eval", help="precision/success curves for a prediction file")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--out-dir", help="where to write precision.csv, success.csv, summary.json")

    s = sub.add_parser("synth", help="render a synthetic sequence")
    s.add_argument("--spec", required=True, help="key=value sequence description")
    s.add_argument("--out", required=True, help="output directory")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.command == "track":
            return cmd_track(args.seq, args.gt, args.config, args.out, args.ablation)
        if args.command == "eval":
            return cmd_eval(args.pred, args.gt, args.out_dir)
        return cmd_synth(args.spec, args.out)
    except (InputError, ConfigError, TargetLeavesFrame, DegenerateBox, DegenerateRegion,
            OSError) as exc:
        print(f"drtrack {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (TrackingError, ValueError, FloatingPointError, ArithmeticError) as exc:
        print(f"drtrack {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
