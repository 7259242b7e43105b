"""Word error rate, sentence accuracy, and the corpus evaluation harness.

WER counts substitutions, deletions, and insertions from a minimal unit-cost
alignment; the backtrace prefers substitution over deletion over insertion
when costs tie, so the S/D/I split is deterministic. Reports keep raw
ratios; table display truncates percentages (never rounds up), matching the
convention of the accuracy tables this harness reproduces, and prints
accuracy as 100 minus the displayed WER.
"""

from __future__ import annotations

import json
import math
import string
import zlib
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .ctc import DEFAULT_ALPHABET, Alphabet, read_grid
from .decoder import DecodeConfig, OracleScorerConfig, oracle_posteriors, transcribe
from .audio_io import load_wav
from .errors import EmptyReference

INPUT_KINDS = ("wav", "grid")
AGGREGATE_MODES = ("micro", "macro", "macro_of_groups")


@dataclass(frozen=True)
class EvalPair:
    """One utterance: reference and hypothesis token tuples plus metadata."""

    reference: tuple[str, ...]
    hypothesis: tuple[str, ...]
    condition_tag: str = ""
    decode_time_ms: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "reference", tuple(self.reference))
        object.__setattr__(self, "hypothesis", tuple(self.hypothesis))
        if any(not tok for tok in self.reference + self.hypothesis):
            raise ValueError("tokens must be non-empty strings")


class Alignment(NamedTuple):
    distance: int
    substitutions: int
    deletions: int
    insertions: int


def levenshtein_align(ref, hyp) -> Alignment:
    """Minimal unit-cost alignment counts between two token sequences.

    distance == substitutions + deletions + insertions. Ties during the
    backtrace resolve substitution first, then deletion, then insertion.
    """
    ref = list(ref)
    hyp = list(hyp)
    m, n = len(ref), len(hyp)
    if n == 0:
        return Alignment(m, 0, m, 0)
    if m == 0:
        return Alignment(n, 0, 0, n)

    # Row-by-row DP. Within a row, insertions propagate left to right:
    # row[j] = min_k<=j (base[k] + (j - k)), which is a prefix minimum of
    # base[k] - k shifted back by +j, so each row is a few vector ops.
    hyp_arr = np.array(hyp)
    cols = np.arange(n + 1)
    dp = np.empty((m + 1, n + 1), dtype=np.int64)
    dp[0] = cols
    for i in range(1, m + 1):
        prev = dp[i - 1]
        cost = (hyp_arr != ref[i - 1]).astype(np.int64)
        base = np.empty(n + 1, dtype=np.int64)
        base[0] = prev[0] + 1
        base[1:] = np.minimum(prev[1:] + 1, prev[:-1] + cost)
        dp[i] = cols + np.minimum.accumulate(base - cols)

    subs = dels = ins = 0
    i, j = m, n
    while i > 0 and j > 0:
        here = dp[i, j]
        if ref[i - 1] == hyp[j - 1] and here == dp[i - 1, j - 1]:
            i -= 1
            j -= 1
        elif here == dp[i - 1, j - 1] + 1:
            subs += 1
            i -= 1
            j -= 1
        elif here == dp[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    dels += i
    ins += j
    return Alignment(int(dp[m, n]), subs, dels, ins)


@dataclass(frozen=True)
class WerReport:
    """Fault counts over a batch; wer = (S+D+I) / total reference words."""

    total_words: int
    substitutions: int
    deletions: int
    insertions: int
    mean_time_ms: float = 0.0

    @property
    def faults(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        return self.faults / self.total_words

    @property
    def accuracy(self) -> float:
        return 1.0 - self.wer


def wer(pairs) -> WerReport:
    """Aligns every pair and pools the counts.

    Raises:
      EmptyReference: the references hold zero words in total.
    """
    pairs = list(pairs)
    total_words = sum(len(p.reference) for p in pairs)
    if total_words == 0:
        raise EmptyReference("references contain no words")
    subs = dels = ins = 0
    for pair in pairs:
        a = levenshtein_align(pair.reference, pair.hypothesis)
        subs += a.substitutions
        dels += a.deletions
        ins += a.insertions
    mean_time = sum(p.decode_time_ms for p in pairs) / len(pairs)
    return WerReport(total_words, subs, dels, ins, mean_time)


_PUNCT_STRIP = str.maketrans("", "", string.punctuation)


def normalize_tokens(
    tokens, case_fold: bool = True, strip_punctuation: bool = False
) -> tuple[str, ...]:
    """Uppercases and/or strips punctuation; empty results are dropped."""
    out = []
    for tok in tokens:
        if case_fold:
            tok = tok.upper()
        if strip_punctuation:
            tok = tok.translate(_PUNCT_STRIP)
        if tok:
            out.append(tok)
    return tuple(out)


def sentence_accuracy(
    pairs, case_fold: bool = True, strip_punctuation: bool = False
) -> tuple[int, int, float]:
    """(correct, total, fraction): pairs whose normalized tokens match exactly.

    The default normalization matches the WER tokenizer (uppercase,
    whitespace tokens, punctuation kept).
    """
    pairs = list(pairs)
    correct = 0
    for pair in pairs:
        ref = normalize_tokens(pair.reference, case_fold, strip_punctuation)
        hyp = normalize_tokens(pair.hypothesis, case_fold, strip_punctuation)
        if ref == hyp:
            correct += 1
    total = len(pairs)
    return correct, total, (correct / total if total else 0.0)


@dataclass(frozen=True)
class AggregateReport:
    """Per-condition reports plus pooled rates; accuracy = 1 - chosen wer."""

    per_condition: dict
    micro_wer: float
    macro_wer: float
    mode: str
    wer: float
    accuracy: float


def aggregate(reports, mode: str = "micro", groups=None) -> AggregateReport:
    """Pools per-condition WerReports.

    micro pools faults over words; macro means the per-condition rates;
    macro_of_groups means per-group macros (groups maps a group name to its
    condition tags).
    """
    reports = dict(reports)
    if not reports:
        raise ValueError("need at least one report")
    if mode not in AGGREGATE_MODES:
        raise ValueError(f"mode must be one of {AGGREGATE_MODES}")
    total_words = sum(r.total_words for r in reports.values())
    micro = sum(r.faults for r in reports.values()) / total_words
    macro = sum(r.wer for r in reports.values()) / len(reports)
    if mode == "micro":
        chosen = micro
    elif mode == "macro":
        chosen = macro
    else:
        if not groups:
            raise ValueError("macro_of_groups requires a groups mapping")
        group_means = []
        for name, tags in groups.items():
            if not tags:
                raise ValueError(f"group {name!r} has no tags")
            missing = [t for t in tags if t not in reports]
            if missing:
                raise ValueError(f"group {name!r} references unknown tags {missing}")
            group_means.append(sum(reports[t].wer for t in tags) / len(tags))
        chosen = sum(group_means) / len(group_means)
    return AggregateReport(
        per_condition=reports,
        micro_wer=micro,
        macro_wer=macro,
        mode=mode,
        wer=chosen,
        accuracy=1.0 - chosen,
    )


def truncated_percent(fraction: float, decimals: int = 2) -> float:
    """Percentage truncated toward zero, the way the reference tables print.

    truncated_percent(26/462) == 5.62, not the half-up 5.63.
    """
    scale = 10**decimals
    return math.floor(fraction * 100.0 * scale + 1e-9) / scale


def percent_display(fraction: float, decimals: int = 2) -> str:
    value = truncated_percent(fraction, decimals)
    return f"{value:.{decimals}f}%" if decimals else f"{int(value)}%"


def accuracy_display(wer_fraction: float, decimals: int = 2) -> str:
    """Accuracy printed as 100 minus the displayed WER, so the pair always
    sums to 100 on the page."""
    value = 100.0 - truncated_percent(wer_fraction, decimals)
    return f"{value:.{decimals}f}%"


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    input_path: str
    input_kind: str
    reference: str
    tag: str

    def __post_init__(self):
        if self.input_kind not in INPUT_KINDS:
            raise ValueError(f"input_kind must be one of {INPUT_KINDS}")


def read_manifest(path) -> list[ManifestEntry]:
    """JSON-lines manifest; exactly the five known keys per record.

    Relative input paths are resolved against the manifest's directory.
    """
    base = Path(path).resolve().parent
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            expected = {"id", "input_path", "input_kind", "reference", "tag"}
            if set(record) != expected:
                unknown = set(record) - expected
                missing = expected - set(record)
                raise ValueError(
                    f"{path}:{lineno}: unknown keys {sorted(unknown)}, "
                    f"missing keys {sorted(missing)}"
                )
            input_path = Path(record["input_path"])
            if not input_path.is_absolute():
                input_path = base / input_path
            entries.append(
                ManifestEntry(
                    id=str(record["id"]),
                    input_path=str(input_path),
                    input_kind=record["input_kind"],
                    reference=str(record["reference"]),
                    tag=str(record["tag"]),
                )
            )
    return entries


@dataclass(frozen=True)
class HarnessConfig:
    """Decoding plus oracle-corruption settings for a corpus run."""

    decode: DecodeConfig = field(default_factory=DecodeConfig)
    frames_per_symbol: int = 3
    confusion_rate: float = 0.0
    blank_prob: float = 0.0
    seed: int = 0
    aggregate_mode: str = "micro"
    alphabet: Alphabet = field(default_factory=Alphabet)


@dataclass(frozen=True)
class EntryResult:
    entry_id: str
    tag: str
    ok: bool
    reference: str = ""
    hypothesis: str = ""
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_words: int = 0
    decode_time_ms: float = 0.0
    error: str | None = None


@dataclass(frozen=True)
class CorpusResult:
    entries: tuple[EntryResult, ...]
    reports: dict
    aggregate: AggregateReport | None

    @property
    def failed(self) -> tuple[EntryResult, ...]:
        return tuple(e for e in self.entries if not e.ok)


def _entry_seed(base_seed: int, entry_id: str) -> int:
    return (base_seed * 1000003 + zlib.crc32(entry_id.encode("utf-8"))) % 2**32


def _entry_grid(entry: ManifestEntry, cfg: HarnessConfig):
    if entry.input_kind == "grid":
        return read_grid(entry.input_path)
    load_wav(entry.input_path)  # missing or broken audio fails the entry
    oracle_cfg = OracleScorerConfig(
        reference_text=entry.reference,
        frames_per_symbol=cfg.frames_per_symbol,
        confusion_rate=cfg.confusion_rate,
        blank_prob=cfg.blank_prob,
        seed=_entry_seed(cfg.seed, entry.id),
    )
    return oracle_posteriors(oracle_cfg, cfg.alphabet)


def run_corpus(manifest_path, cfg: HarnessConfig | None = None, lm=None) -> CorpusResult:
    """Decodes every manifest entry and pools WER per condition tag.

    A failing entry (missing file, malformed input, bad reference) is
    recorded with its error and excluded from the pooled rates; the rest
    of the corpus still runs.
    """
    cfg = cfg or HarnessConfig()
    entries = read_manifest(manifest_path)
    results: list[EntryResult] = []
    pairs_by_tag: dict[str, list[EvalPair]] = defaultdict(list)
    for entry in entries:
        try:
            grid = _entry_grid(entry, cfg)
            transcript = transcribe(grid, decode=cfg.decode, lm=lm)
            ref_tokens = tuple(entry.reference.upper().split())
            hyp_tokens = tuple(transcript.text.upper().split())
            counts = levenshtein_align(ref_tokens, hyp_tokens)
            results.append(
                EntryResult(
                    entry_id=entry.id,
                    tag=entry.tag,
                    ok=True,
                    reference=entry.reference,
                    hypothesis=transcript.text,
                    substitutions=counts.substitutions,
                    deletions=counts.deletions,
                    insertions=counts.insertions,
                    ref_words=len(ref_tokens),
                    decode_time_ms=transcript.timing_ms,
                )
            )
            pairs_by_tag[entry.tag].append(
                EvalPair(ref_tokens, hyp_tokens, entry.tag, transcript.timing_ms)
            )
        except Exception as exc:  # noqa: BLE001 - per-entry isolation
            results.append(
                EntryResult(
                    entry_id=entry.id,
                    tag=entry.tag,
                    ok=False,
                    reference=entry.reference,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    reports = {tag: wer(pairs) for tag, pairs in sorted(pairs_by_tag.items())}
    agg = aggregate(reports, cfg.aggregate_mode) if reports else None
    return CorpusResult(entries=tuple(results), reports=reports, aggregate=agg)


def format_table(result: CorpusResult) -> str:
    """Human-readable condition table: words, faults, WER, mean decode time."""
    header = f"{'Condition':<20} {'Total Word':>10} {'Total Faults':>12} {'WER':>8} {'Time (ms)':>10}"
    lines = [header, "-" * len(header)]
    for tag, report in result.reports.items():
        lines.append(
            f"{tag:<20} {report.total_words:>10} {report.faults:>12} "
            f"{percent_display(report.wer):>8} {report.mean_time_ms:>10.2f}"
        )
    if result.aggregate is not None:
        agg = result.aggregate
        lines.append("-" * len(header))
        total_words = sum(r.total_words for r in result.reports.values())
        total_faults = sum(r.faults for r in result.reports.values())
        lines.append(
            f"{'overall (' + agg.mode + ')':<20} {total_words:>10} {total_faults:>12} "
            f"{percent_display(agg.wer):>8}"
        )
        lines.append(f"{'accuracy':<20} {'':>10} {'':>12} {accuracy_display(agg.wer):>8}")
    for failed in result.failed:
        lines.append(f"FAILED {failed.entry_id}: {failed.error}")
    return "\n".join(lines)


def result_to_json(result: CorpusResult) -> dict:
    """Machine-readable run summary with raw (untruncated) ratios."""
    payload = {
        "entries": [
            {
                "id": e.entry_id,
                "tag": e.tag,
                "ok": e.ok,
                "reference": e.reference,
                "hypothesis": e.hypothesis,
                "substitutions": e.substitutions,
                "deletions": e.deletions,
                "insertions": e.insertions,
                "ref_words": e.ref_words,
                "decode_time_ms": e.decode_time_ms,
                "error": e.error,
            }
            for e in result.entries
        ],
        "conditions": {
            tag: {
                "total_words": r.total_words,
                "substitutions": r.substitutions,
                "deletions": r.deletions,
                "insertions": r.insertions,
                "faults": r.faults,
                "wer": r.wer,
                "mean_time_ms": r.mean_time_ms,
            }
            for tag, r in result.reports.items()
        },
        "aggregate": None,
    }
    if result.aggregate is not None:
        agg = result.aggregate
        payload["aggregate"] = {
            "mode": agg.mode,
            "wer": agg.wer,
            "accuracy": agg.accuracy,
            "micro_wer": agg.micro_wer,
            "macro_wer": agg.macro_wer,
        }
    return payload
