#!/usr/bin/env python3
"""Prints the golden accuracy tables from their raw fault/word counts.

The numbers here are the published operating points this harness is
calibrated against. Feeding the counts through the WER pipeline must
reproduce every printed percentage exactly, including the truncating
display convention (26/462 prints as 5.62, not 5.63).
"""

from __future__ import annotations

from speechmorse.evaluate import (
    EvalPair,
    accuracy_display,
    aggregate,
    percent_display,
    sentence_accuracy,
    wer,
)

# condition -> (total words, total faults, mean decode ms)
CONDITION_TABLE = {
    "short": (462, 26, 2889.45),
    "long": (1024, 118, 4215.75),
    "short+noise": (462, 42, 2962.44),
    "long+noise": (1024, 130, 4495.19),
}

# speaker -> (total words, total faults, mean decode ms)
SPEAKER_TABLE = {
    "speaker1": (1486, 139, 3549.575),
    "speaker2": (1486, 177, 3731.840),
}

# scenario -> (correct sentences, total sentences)
SENTENCE_TABLE = {
    "quiet room": (487, 600),
    "noisy room": (376, 600),
    "noisy room, distant mic": (186, 600),
}


def planted_pairs(words: int, faults: int, time_ms: float) -> list[EvalPair]:
    """One synthetic pair whose alignment yields exactly the given counts."""
    ref = [f"W{i}" for i in range(words)]
    hyp = [f"X{i}" if i < faults else ref[i] for i in range(words)]
    return [EvalPair(tuple(ref), tuple(hyp), decode_time_ms=time_ms)]


def report_block(title: str, table: dict) -> dict:
    print(title)
    print(f"{'condition':<26} {'words':>6} {'faults':>7} {'WER':>8} {'accuracy':>9} {'time (ms)':>10}")
    reports = {}
    for tag, (words, faults, time_ms) in table.items():
        report = wer(planted_pairs(words, faults, time_ms))
        assert report.faults == faults and report.total_words == words
        reports[tag] = report
        print(
            f"{tag:<26} {words:>6} {faults:>7} {percent_display(report.wer):>8} "
            f"{accuracy_display(report.wer):>9} {report.mean_time_ms:>10.3f}"
        )
    macro = aggregate(reports, "macro")
    micro = aggregate(reports, "micro")
    print(f"{'macro average':<26} {'':>6} {'':>7} {percent_display(macro.wer):>8}")
    print(f"{'micro average':<26} {'':>6} {'':>7} {percent_display(micro.wer):>8}")
    print()
    return reports


def main() -> int:
    condition_reports = report_block("By recording condition", CONDITION_TABLE)
    speaker_reports = report_block("By speaker", SPEAKER_TABLE)

    combined = {**condition_reports, **speaker_reports}
    groups = {
        "conditions": list(condition_reports),
        "speakers": list(speaker_reports),
    }
    overall = aggregate(combined, "macro_of_groups", groups=groups)
    print("Overall (mean of the two table macros)")
    print(f"  WER      {percent_display(overall.wer)}")
    print(f"  accuracy {accuracy_display(overall.wer)}")
    print()

    print("Sentence accuracy by scenario")
    for tag, (correct, total) in SENTENCE_TABLE.items():
        pairs = [EvalPair(("OK",), ("OK",))] * correct
        pairs += [EvalPair(("OK",), ("NO",))] * (total - correct)
        got_correct, got_total, fraction = sentence_accuracy(pairs)
        assert (got_correct, got_total) == (correct, total)
        print(f"  {tag:<26} {correct}/{total} = {percent_display(fraction, 0)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
