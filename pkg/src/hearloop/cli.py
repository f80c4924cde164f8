"""Command-line entry point: ``hearloop train|eval|process|profile``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
abort, 1 any other library error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import platform
import sys
import time
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy
import soundfile as sf

import hearloop
from hearloop._audio import (
    MODEL_RATE_HZ,
    load_sentence,
    pad_to_multiple,
    peak_limit,
    read_wav,
    resample,
    rms,
    target_rms,
    wav_bytes,
)
from hearloop._checkpoint import CHECKPOINT_NAME, dumps, load_checkpoint
from hearloop._config import RunConfig, TrainConfig
from hearloop._dnnha import ARCHITECTURE_PRESETS, forward_windowed
from hearloop._errors import (
    ArchitectureMismatch,
    DataError,
    HearloopError,
    InvalidConfig,
    InvalidPath,
    NumericalError,
    UnknownPreset,
)
from hearloop._evalkit import evaluate
from hearloop._registry import available_loss_presets, available_profiles, get_profile
from hearloop._rundir import RunDir
from hearloop._trainer import build_dataset, load_corpus, train
from hearloop.periphery import FiberCounts, sloping_profile

if TYPE_CHECKING:
    from collections.abc import Sequence

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def exit_code(exc: HearloopError) -> int:
    """Map a library error to the process exit code."""
    if isinstance(exc, (InvalidConfig, UnknownPreset, ArchitectureMismatch)):
        return EXIT_CONFIG
    if isinstance(exc, (DataError, InvalidPath)):
        return EXIT_DATA
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_ERROR


# region: parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hearloop", description="Closed-loop hearing-loss compensation")
    p.add_argument("--version", action="version", version=f"%(prog)s {hearloop.__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for per-step detail")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a DNN-HA against a hearing profile")
    t.add_argument("--config", type=Path, help="run configuration JSON")
    t.add_argument("--corpus", help="directory of training WAV files")
    t.add_argument("--out", help="run directory")
    t.add_argument("--loss", help="loss preset name or loss JSON file")
    t.add_argument("--profile", help="hearing-impaired profile name or JSON file")
    t.add_argument("--nh-profile", help="reference profile (default NH)")
    t.add_argument("--epochs", type=int)
    t.add_argument("--sentences", type=int, help="use at most this many corpus files")
    t.add_argument("--seed", type=int)
    t.add_argument("--lr", type=float, help="Adam learning rate")
    t.add_argument("--cf-step", type=int, help="use every N-th CF channel in the loss")
    t.add_argument("--window", type=int, help="DNN-HA processing window in samples")
    t.add_argument("--arch", choices=sorted(ARCHITECTURE_PRESETS), help="architecture preset")
    t.add_argument("--noise-snr", type=float, nargs=2, metavar=("LOW", "HIGH"), help="train with white noise")
    t.add_argument("--desk", action="store_true", help="desk-scale defaults (21 CFs, 5 epochs, 20 sentences)")
    t.add_argument("--workers", type=int, default=4)

    e = sub.add_parser("eval", help="evaluate NRMSE and EFR, with or without a trained model")
    e.add_argument("--config", type=Path, help="run configuration JSON")
    e.add_argument("--corpus", help="directory of evaluation WAV files")
    e.add_argument("--out", help="output directory")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--checkpoint", help="checkpoint file or training run directory")
    src.add_argument("--unprocessed", action="store_true", help="evaluate without a model")
    e.add_argument(
        "--arch",
        choices=sorted(ARCHITECTURE_PRESETS),
        help="encoder preset the checkpoint must use (default: train.arch of the run config)",
    )
    e.add_argument("--profile", help="hearing-impaired profile name or JSON file")
    e.add_argument("--nh-profile", help="reference profile (default NH)")
    e.add_argument("--levels", type=float, nargs="+", help="presentation levels in dB SPL")
    e.add_argument("--snr", type=float, nargs="+", help="speech-shaped-noise SNRs in dB")
    e.add_argument("--no-efr", action="store_true", help="skip the SAM-tone EFR")
    e.add_argument("--cf-step", type=int)
    e.add_argument("--sentences", type=int, help="evaluate at most this many corpus files")
    e.add_argument("--seed", type=int)
    e.add_argument("--workers", type=int)

    pr = sub.add_parser("process", help="apply a trained DNN-HA to a WAV file")
    pr.add_argument("checkpoint", help="checkpoint file or training run directory")
    pr.add_argument("input", type=Path, help="mono input WAV")
    pr.add_argument("output", type=Path, help="output WAV")
    pr.add_argument("--level", type=float, default=70.0, help="level (dB SPL) the input is presented at")
    pr.add_argument("--window", type=int, default=2048)
    pr.add_argument("--subtype", choices=["PCM_16", "FLOAT"], default="FLOAT")

    pf = sub.add_parser("profile", help="list, show or create hearing profiles")
    pf_sub = pf.add_subparsers(dest="action", required=True)
    pf_sub.add_parser("list", help="list named profiles and loss presets")
    show = pf_sub.add_parser("show", help="print a profile as JSON")
    show.add_argument("name")
    show.add_argument("--out", type=Path, help="write to this file instead of stdout")
    mk = pf_sub.add_parser("make-sloping", help="sloping audiogram with optional fiber loss")
    mk.add_argument("--name", required=True)
    mk.add_argument("--hl8k", type=float, required=True, help="hearing loss at 8 kHz in dB")
    mk.add_argument("--counts", type=float, nargs=3, metavar=("H", "M", "L"), default=(13.0, 3.0, 3.0))
    mk.add_argument("--out", type=Path, help="write to this file instead of stdout")
    return p


# endregion


# region: helpers
def _versions() -> dict[str, str]:
    return {
        "hearloop": hearloop.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "soundfile": sf.__version__,
        "python": platform.python_version(),
    }


def _manifest(command: str, seed: int, config: dict[str, Any], started: float) -> dict[str, Any]:
    return {
        "command": command,
        "seed": seed,
        "versions": _versions(),
        "config": config,
        "runtime_s": round(time.monotonic() - started, 3),
    }


def _load_run_config(path: Path | None) -> RunConfig:
    return RunConfig.load(path) if path is not None else RunConfig()


def _overrides(**values: Any) -> dict[str, Any]:
    return {k: v for k, v in values.items() if v is not None}


def _require(value: str | None, flag: str) -> str:
    if not value:
        raise InvalidConfig(f"{flag} is required (flag or config file)", op="cli", target=flag)
    return value


def _emit_json(data: object, out: Path | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        RunDir(out.parent).write_text(out.name, text)
        log.info("wrote %s", out)


# endregion


# region: commands
def cmd_train(args: argparse.Namespace) -> int:
    started = time.monotonic()
    run = _load_run_config(args.config)
    changes: dict[str, Any] = {}
    if args.desk:
        desk = TrainConfig.desk()
        changes.update(epochs=desk.epochs, max_items=desk.max_items, n_channels=desk.n_channels, cf_step=desk.cf_step)
    changes.update(
        _overrides(
            loss=args.loss,
            hi_profile=args.profile,
            nh_profile=args.nh_profile,
            epochs=args.epochs,
            max_items=args.sentences,
            seed=args.seed,
            learning_rate=args.lr,
            cf_step=args.cf_step,
            window=args.window,
            noise_snr_range=tuple(args.noise_snr) if args.noise_snr else None,
        )
    )
    if args.arch:
        changes["arch"] = dataclasses.replace(run.train.arch, encoder_filters=ARCHITECTURE_PRESETS[args.arch])
    run = run.replace(
        corpus=args.corpus or run.corpus, out=args.out or run.out, train=changes if changes else run.train
    )
    config = run.train
    config.validate()
    corpus = _require(run.corpus, "--corpus")
    out = RunDir(_require(run.out, "--out"))

    dataset = build_dataset(config, corpus)
    result = train(config, dataset, workers=args.workers)

    metadata = {"loss": config.loss, "hi_profile": config.hi_profile, "nh_profile": config.nh_profile}
    out.write_bytes(CHECKPOINT_NAME, dumps(result.params, {**metadata, "seed": config.seed}))
    header, rows = result.csv_rows()
    out.write_csv("loss_log.csv", header, rows)
    out.write_csv("epochs.csv", ["epoch", "mean_loss"], list(enumerate(map(repr, result.epoch_losses()), 1)))
    out.write_json("manifest.json", _manifest("train", config.seed, run.to_dict(), started))
    log.info("wrote checkpoint and logs to %s", out.root)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.monotonic()
    run = _load_run_config(args.config)
    changes = _overrides(
        hi_profile=args.profile,
        nh_profile=args.nh_profile,
        levels=tuple(args.levels) if args.levels else None,
        snrs=tuple(args.snr) if args.snr else None,
        efr=False if args.no_efr else None,
        cf_step=args.cf_step,
        max_items=args.sentences,
        seed=args.seed,
        workers=args.workers,
    )
    run = run.replace(
        corpus=args.corpus or run.corpus,
        out=args.out or run.out,
        checkpoint=args.checkpoint or run.checkpoint,
        unprocessed=args.unprocessed or run.unprocessed,
        eval=changes if changes else run.eval,
    )
    config = run.eval
    corpus = _require(run.corpus, "--corpus")
    out = RunDir(_require(run.out, "--out"))

    params = None
    if not run.unprocessed:
        checkpoint = _require(run.checkpoint, "--checkpoint (or --unprocessed)")
        expected = run.train.arch
        if args.arch:
            expected = dataclasses.replace(expected, encoder_filters=ARCHITECTURE_PRESETS[args.arch])
        params, _ = load_checkpoint(checkpoint, expected)
    sentences = [(p.name, load_sentence(p)) for p in load_corpus(corpus, config.max_items)]
    report = evaluate(params, sentences, get_profile(config.nh_profile), get_profile(config.hi_profile), config)
    report.runtime_s = time.monotonic() - started

    out.write_json("report.json", report.to_dict())
    header, rows = report.csv_rows()
    out.write_csv("report.csv", header, rows)
    levels = [[lv, repr(100 * v)] for lv, v in report.by_level().items()]
    out.write_csv("nrmse_vs_level.csv", ["level_db", "nrmse_percent"], levels)
    if report.efr:
        out.write_csv("efr.csv", ["condition", "efr_sum_nv"], [[k, repr(v)] for k, v in report.efr.items()])
    out.write_json("manifest.json", _manifest("eval", config.seed, run.to_dict(), started))
    if report.partial:
        log.warning("report is partial: %d condition(s) failed", len(report.failures))
    for condition, value in report.aggregate().items():
        log.info("%s: mean NRMSE %.2f%%", condition, 100 * value)
    return EXIT_OK


def cmd_process(args: argparse.Namespace) -> int:
    """Resample to 20 kHz, present at ``--level``, run the DNN-HA, and write at the input rate.

    The model output is scaled back by the presentation gain, trimmed to the
    input length and peak-limited to full scale.
    """
    params, _ = load_checkpoint(args.checkpoint)
    if args.window % params.spec.granularity:
        raise InvalidConfig(
            f"window {args.window} must be a multiple of {params.spec.granularity}", op="process", target="window"
        )
    x, rate = read_wav(args.input)
    x20 = resample(x, rate, MODEL_RATE_HZ)
    level = rms(x20)
    gain = target_rms(args.level) / level if level > 0 else 1.0
    padded = pad_to_multiple(x20 * gain, args.window)
    y20 = forward_windowed(params, padded, args.window).values[: x20.size] / gain
    y = resample(y20, MODEL_RATE_HZ, rate)[: x.size]
    if y.size < x.size:
        y = np.concatenate([y, np.zeros(x.size - y.size)])
    y, _ = peak_limit(y, 1.0)
    out = args.output.resolve()
    RunDir(out.parent).write_bytes(out.name, wav_bytes(y, rate, args.subtype))
    log.info("wrote %s (%d samples at %d Hz)", out, y.size, rate)
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    if args.action == "list":
        _emit_json({"profiles": available_profiles(), "loss_presets": available_loss_presets()}, None)
    elif args.action == "show":
        _emit_json(get_profile(args.name).to_dict(), args.out)
    else:
        profile = sloping_profile(args.name, args.hl8k, FiberCounts(*args.counts))
        _emit_json(profile.to_dict(), args.out)
    return EXIT_OK


_COMMANDS = {"train": cmd_train, "eval": cmd_eval, "process": cmd_process, "profile": cmd_profile}


# endregion


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except HearloopError as exc:
        print(f"hearloop {args.command}: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
