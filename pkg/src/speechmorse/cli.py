"""Command line front end.

Subcommands: pipeline, encode, decode, render, eval, perplexity.
Exit codes: 0 success, 2 input error, 3 conversion error (a transcript
character with no Morse code), 4 internal error. Settings resolve as
defaults, then a JSON config file (--config), then explicit flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import lm as lm_mod
from . import morse
from .audio_io import load_wav, save_wav
from .ctc import DEFAULT_ALPHABET, read_grid
from .decoder import DecodeConfig, OracleScorer, OracleScorerConfig, transcribe
from .errors import SpeechMorseError, UnmappableCharacter
from .evaluate import HarnessConfig, format_table, result_to_json, run_corpus
from .features import FrameConfig, export_csv, mfcc

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERSION = 3
EXIT_INTERNAL = 4


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the pipeline needs, overridable from file and flags."""

    beam_width: int = 16
    alpha: float = 0.8
    beta: float = 1.2
    lm_path: str | None = None
    morse_format: str = "paper"
    unit_ms: float = 60.0
    tone_hz: float = 700.0
    sample_rate_hz: int = 16000
    seed: int = 0
    frames_per_symbol: int = 3
    confusion_rate: float = 0.0
    blank_prob: float = 0.0
    features: FrameConfig = field(default_factory=FrameConfig)

    def __post_init__(self):
        if self.morse_format not in morse.FORMATS:
            raise ValueError(f"morse_format must be one of {morse.FORMATS}")

    def decode_config(self) -> DecodeConfig:
        return DecodeConfig(self.beam_width, self.alpha, self.beta)


_CONFIG_FLAGS = (
    "beam_width",
    "alpha",
    "beta",
    "lm_path",
    "morse_format",
    "unit_ms",
    "tone_hz",
    "sample_rate_hz",
    "seed",
    "frames_per_symbol",
    "confusion_rate",
    "blank_prob",
)


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """defaults < config file < explicit flags; unknown file keys rejected."""
    values: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError(f"{config_path}: config must be a JSON object")
        known = {f.name for f in dataclasses.fields(PipelineConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"{config_path}: unknown config keys {sorted(unknown)}")
        if "features" in raw:
            raw["features"] = FrameConfig(**raw["features"])
        values.update(raw)
    for name in _CONFIG_FLAGS:
        if hasattr(args, name):
            values[name] = getattr(args, name)
    return PipelineConfig(**values)


def _load_lm(cfg: PipelineConfig):
    if cfg.lm_path is None:
        return None
    return lm_mod.load(cfg.lm_path)


def _read_text_arg(args: argparse.Namespace) -> str:
    if args.text:
        return " ".join(args.text)
    return sys.stdin.read()


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS keeps unset flags out of the namespace so file values survive
    s = argparse.SUPPRESS
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--beam-width", dest="beam_width", type=int, default=s)
    parser.add_argument("--alpha", type=float, default=s, help="LM fusion weight")
    parser.add_argument("--beta", type=float, default=s, help="length bonus")
    parser.add_argument("--lm", dest="lm_path", default=s, help="serialized LM path")
    parser.add_argument(
        "--morse-format", dest="morse_format", choices=morse.FORMATS, default=s
    )
    parser.add_argument("--unit-ms", dest="unit_ms", type=float, default=s)
    parser.add_argument("--tone-hz", dest="tone_hz", type=float, default=s)
    parser.add_argument("--rate", dest="sample_rate_hz", type=int, default=s)
    parser.add_argument("--seed", type=int, default=s)
    parser.add_argument(
        "--frames-per-symbol", dest="frames_per_symbol", type=int, default=s
    )
    parser.add_argument(
        "--confusion-rate", dest="confusion_rate", type=float, default=s
    )
    parser.add_argument("--blank-prob", dest="blank_prob", type=float, default=s)


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if (args.grid is None) == (args.wav is None):
        print("pipeline needs exactly one of --grid or --wav", file=sys.stderr)
        return EXIT_INPUT
    if args.grid is not None:
        grid = read_grid(args.grid)
    else:
        audio = load_wav(args.wav)
        if args.emit_features:
            export_csv(mfcc(audio, cfg.features), args.emit_features)
        if not args.oracle_text:
            print(
                "audio input needs --oracle-text (the reference the oracle "
                "scorer spells out)",
                file=sys.stderr,
            )
            return EXIT_INPUT
        scorer = OracleScorer(
            OracleScorerConfig(
                reference_text=args.oracle_text,
                frames_per_symbol=cfg.frames_per_symbol,
                confusion_rate=cfg.confusion_rate,
                blank_prob=cfg.blank_prob,
                seed=cfg.seed,
            ),
            DEFAULT_ALPHABET,
        )
        grid = scorer.posteriors(audio)
    transcript = transcribe(grid, decode=cfg.decode_config(), lm=_load_lm(cfg))
    morse_text, sequence = morse.encode(
        transcript.text, cfg.morse_format, skip_unknown=args.skip_unknown
    )
    if args.emit_audio:
        pattern = morse.to_timing(sequence)
        save_wav(
            morse.render_audio(pattern, cfg.unit_ms, cfg.tone_hz, cfg.sample_rate_hz),
            args.emit_audio,
        )
    if args.emit_haptic:
        pattern = morse.to_timing(sequence)
        Path(args.emit_haptic).write_text(
            morse.render_haptic(pattern, cfg.unit_ms), encoding="ascii"
        )
    if args.json:
        print(
            json.dumps(
                {
                    "transcript": transcript.text,
                    "score": transcript.score,
                    "timing_ms": transcript.timing_ms,
                    "morse": morse_text,
                }
            )
        )
    else:
        print(transcript.text)
        print(morse_text)
    return EXIT_OK


def cmd_encode(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    text = _read_text_arg(args)
    morse_text, _ = morse.encode(text, cfg.morse_format, skip_unknown=args.skip_unknown)
    print(morse_text)
    return EXIT_OK


def cmd_decode(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    print(morse.decode(_read_text_arg(args), cfg.morse_format))
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if not args.audio and not args.haptic:
        print("render needs --audio and/or --haptic output paths", file=sys.stderr)
        return EXIT_INPUT
    pattern = morse.to_timing(morse.sequence_from_text(_read_text_arg(args), cfg.morse_format))
    if args.audio:
        save_wav(
            morse.render_audio(pattern, cfg.unit_ms, cfg.tone_hz, cfg.sample_rate_hz),
            args.audio,
        )
    if args.haptic:
        Path(args.haptic).write_text(
            morse.render_haptic(pattern, cfg.unit_ms), encoding="ascii"
        )
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    harness = HarnessConfig(
        decode=cfg.decode_config(),
        frames_per_symbol=cfg.frames_per_symbol,
        confusion_rate=cfg.confusion_rate,
        blank_prob=cfg.blank_prob,
        seed=cfg.seed,
        aggregate_mode=args.aggregate,
    )
    result = run_corpus(args.manifest, harness, lm=_load_lm(cfg))
    if args.json:
        print(json.dumps(result_to_json(result)))
    else:
        print(format_table(result))
    return EXIT_OK if not result.failed else EXIT_INPUT


def cmd_perplexity(args: argparse.Namespace) -> int:
    tokenize = lm_mod.tokenize_chars if args.mode == "char" else lm_mod.tokenize_words
    if args.model:
        model = lm_mod.load(args.model)
    elif args.train:
        corpus = [
            tokenize(line.strip().upper())
            for line in Path(args.train).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        model = lm_mod.train(corpus, order=args.order, smoothing_k=args.k)
    else:
        print("perplexity needs --train or --model", file=sys.stderr)
        return EXIT_INPUT
    if args.save_model:
        model.save(args.save_model)
    text = _read_text_arg(args).strip().upper()
    value = model.perplexity(tokenize(text))
    if args.json:
        print(json.dumps({"perplexity": value, "order": model.order}))
    else:
        print(f"{value:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speechmorse",
        description="Decode posterior grids or audio to text and Morse output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="decode one utterance and print text + Morse")
    p.add_argument("--grid", help="posterior grid file")
    p.add_argument("--wav", help="audio file (scored by the seeded oracle)")
    p.add_argument("--oracle-text", dest="oracle_text", help="oracle reference text")
    p.add_argument("--emit-audio", dest="emit_audio", help="write Morse tone WAV here")
    p.add_argument("--emit-haptic", dest="emit_haptic", help="write vibration schedule here")
    p.add_argument(
        "--emit-features", dest="emit_features", help="write MFCC CSV here (wav input)"
    )
    p.add_argument("--skip-unknown", dest="skip_unknown", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("encode", help="text to Morse")
    p.add_argument("text", nargs="*", help="text (stdin when omitted)")
    p.add_argument("--skip-unknown", dest="skip_unknown", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="Morse to text")
    p.add_argument("text", nargs="*", help="Morse string (stdin when omitted)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("render", help="Morse string to audio/haptic files")
    p.add_argument("text", nargs="*", help="Morse string (stdin when omitted)")
    p.add_argument("--audio", help="output WAV path")
    p.add_argument("--haptic", help="output schedule path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="run a corpus manifest and report WER")
    p.add_argument("manifest", help="JSON-lines manifest")
    p.add_argument(
        "--aggregate", choices=("micro", "macro"), default="micro",
        help="headline pooling mode",
    )
    p.add_argument("--json", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("perplexity", help="train/load an n-gram LM and score text")
    p.add_argument("text", nargs="*", help="text (stdin when omitted)")
    p.add_argument("--train", help="corpus file, one sentence per line")
    p.add_argument("--model", help="serialized model to load")
    p.add_argument("--save-model", dest="save_model", help="write the model here")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--k", type=float, default=0.1, help="add-k smoothing constant")
    p.add_argument("--mode", choices=("char", "word"), default="word")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_perplexity)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnmappableCharacter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERSION
    except (SpeechMorseError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
