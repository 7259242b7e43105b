"""Alignment oracle checks, display truncation, and the corpus harness."""

import functools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechmorse.ctc import write_grid
from speechmorse.decoder import OracleScorerConfig, oracle_posteriors
from speechmorse.errors import EmptyReference
from speechmorse.evaluate import (
    EvalPair,
    HarnessConfig,
    WerReport,
    accuracy_display,
    aggregate,
    format_table,
    levenshtein_align,
    normalize_tokens,
    percent_display,
    read_manifest,
    result_to_json,
    run_corpus,
    sentence_accuracy,
    truncated_percent,
    wer,
)

token_lists = st.lists(st.sampled_from(["a", "b", "c", "dd"]), max_size=6)


@functools.lru_cache(maxsize=None)
def _recursive_distance(ref, hyp):
    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    return min(
        _recursive_distance(ref[1:], hyp[1:]) + (ref[0] != hyp[0]),
        _recursive_distance(ref[1:], hyp) + 1,
        _recursive_distance(ref, hyp[1:]) + 1,
    )


# --- alignment ---


def test_kitten_sitting():
    a = levenshtein_align(list("kitten"), list("sitting"))
    assert a.distance == 3
    assert a.substitutions == 2
    assert a.insertions == 1
    assert a.deletions == 0


def test_identical_and_empty():
    assert levenshtein_align(["a", "b"], ["a", "b"]) == (0, 0, 0, 0)
    assert levenshtein_align([], []) == (0, 0, 0, 0)
    assert levenshtein_align(["a", "b"], []) == (2, 0, 2, 0)
    assert levenshtein_align([], ["a"]) == (1, 0, 0, 1)


@settings(deadline=None, max_examples=200)
@given(token_lists, token_lists)
def test_distance_matches_recursive_oracle(ref, hyp):
    a = levenshtein_align(ref, hyp)
    assert a.distance == _recursive_distance(tuple(ref), tuple(hyp))
    assert a.distance == a.substitutions + a.deletions + a.insertions


@settings(deadline=None, max_examples=100)
@given(token_lists, token_lists)
def test_distance_is_symmetric_with_swapped_ops(ref, hyp):
    fwd = levenshtein_align(ref, hyp)
    rev = levenshtein_align(hyp, ref)
    assert fwd.distance == rev.distance


def test_tie_break_prefers_substitution():
    # one word replaced: could be del+ins, must report one substitution
    a = levenshtein_align(["THE", "CAT"], ["THE", "DOG"])
    assert (a.substitutions, a.deletions, a.insertions) == (1, 0, 0)


def test_pure_deletion_and_insertion():
    a = levenshtein_align(["A", "B", "C"], ["A", "C"])
    assert (a.substitutions, a.deletions, a.insertions) == (0, 1, 0)
    a = levenshtein_align(["A", "C"], ["A", "B", "C"])
    assert (a.substitutions, a.deletions, a.insertions) == (0, 0, 1)


def test_alien_tokens_force_substitutions():
    # same length, disjoint vocab at k positions: distance is exactly k subs
    ref = ["W1", "W2", "W3", "W4"]
    hyp = ["W1", "X2", "X3", "W4"]
    a = levenshtein_align(ref, hyp)
    assert (a.substitutions, a.deletions, a.insertions) == (2, 0, 0)


def test_large_alignment_is_fast():
    rng = np.random.default_rng(1)
    ref = [f"w{v}" for v in rng.integers(0, 50, size=1500)]
    hyp = [f"w{v}" for v in rng.integers(0, 50, size=1500)]
    a = levenshtein_align(ref, hyp)
    assert a.distance <= 1500


# --- WER pooling ---


def test_wer_counts_pool_over_pairs():
    pairs = [
        EvalPair(("A", "B", "C"), ("A", "X", "C")),  # 1 sub
        EvalPair(("D", "E"), ("D",)),  # 1 del
        EvalPair(("F",), ("F", "G")),  # 1 ins
    ]
    report = wer(pairs)
    assert report.total_words == 6
    assert (report.substitutions, report.deletions, report.insertions) == (1, 1, 1)
    assert report.faults == 3
    assert report.wer == pytest.approx(0.5)
    assert report.accuracy == pytest.approx(0.5)


def test_wer_can_exceed_one():
    report = wer([EvalPair(("A",), ("B", "C", "D"))])
    assert report.wer == pytest.approx(3.0)


def test_wer_empty_reference_raises():
    with pytest.raises(EmptyReference):
        wer([EvalPair((), ("A",))])
    with pytest.raises(EmptyReference):
        wer([])


def test_wer_mean_time():
    pairs = [
        EvalPair(("A",), ("A",), decode_time_ms=10.0),
        EvalPair(("B",), ("B",), decode_time_ms=30.0),
    ]
    assert wer(pairs).mean_time_ms == pytest.approx(20.0)


def test_eval_pair_rejects_empty_tokens():
    with pytest.raises(ValueError):
        EvalPair(("A", ""), ("A",))


# --- sentence accuracy ---


def test_sentence_accuracy_counts_exact_matches():
    pairs = [
        EvalPair(("THE", "CAT"), ("the", "cat")),
        EvalPair(("A", "DOG"), ("A", "FROG")),
    ]
    correct, total, frac = sentence_accuracy(pairs)
    assert (correct, total) == (1, 2)
    assert frac == pytest.approx(0.5)


def test_sentence_accuracy_case_sensitivity_toggle():
    pairs = [EvalPair(("The",), ("the",))]
    assert sentence_accuracy(pairs, case_fold=False)[0] == 0
    assert sentence_accuracy(pairs, case_fold=True)[0] == 1


def test_sentence_accuracy_punctuation_toggle():
    pairs = [EvalPair(("CAT.",), ("CAT",))]
    assert sentence_accuracy(pairs)[0] == 0
    assert sentence_accuracy(pairs, strip_punctuation=True)[0] == 1


def test_sentence_accuracy_empty():
    assert sentence_accuracy([]) == (0, 0, 0.0)


def test_normalize_tokens_drops_emptied():
    assert normalize_tokens(("...", "ok"), strip_punctuation=True) == ("OK",)


# --- aggregation ---


def reports_fixture():
    return {
        "one": WerReport(100, 10, 0, 0),
        "two": WerReport(300, 0, 30, 0),
    }


def test_micro_pools_faults_over_words():
    agg = aggregate(reports_fixture(), "micro")
    assert agg.wer == pytest.approx(40 / 400)
    assert agg.micro_wer == agg.wer


def test_macro_means_condition_rates():
    agg = aggregate(reports_fixture(), "macro")
    assert agg.wer == pytest.approx(0.1)
    assert agg.accuracy == pytest.approx(0.9)


def test_macro_of_groups():
    reports = {
        "a1": WerReport(100, 10, 0, 0),
        "a2": WerReport(100, 30, 0, 0),
        "b1": WerReport(100, 50, 0, 0),
    }
    agg = aggregate(
        reports, "macro_of_groups", groups={"A": ("a1", "a2"), "B": ("b1",)}
    )
    # mean over groups of the per-group macro means
    assert agg.wer == pytest.approx((0.2 + 0.5) / 2)


def test_aggregate_validation():
    with pytest.raises(ValueError):
        aggregate({}, "micro")
    with pytest.raises(ValueError):
        aggregate(reports_fixture(), "median")
    with pytest.raises(ValueError):
        aggregate(reports_fixture(), "macro_of_groups")
    with pytest.raises(ValueError):
        aggregate(reports_fixture(), "macro_of_groups", groups={"g": ("missing",)})


# --- display truncation ---


def test_truncation_never_rounds_up():
    assert truncated_percent(26 / 462) == 5.62
    assert truncated_percent(130 / 1024) == 12.69
    assert truncated_percent(0.6267, 0) == 62.0
    assert percent_display(26 / 462) == "5.62%"
    assert percent_display(0.6267, 0) == "62%"


def test_truncation_exact_boundary_is_stable():
    # 9/160 = 0.05625 exactly; the epsilon guard must keep 5.62, and an
    # exactly representable 5.63 must not get knocked down
    assert truncated_percent(9 / 160) == 5.62
    assert truncated_percent(0.0563) == 5.63


def test_accuracy_display_complements_wer():
    assert accuracy_display(26 / 462) == "94.38%"
    assert percent_display(26 / 462) == "5.62%"
    # complement of the displayed value, not the truncated raw accuracy
    assert accuracy_display(0.10183) == "89.82%"


# --- manifest and corpus harness ---


def write_manifest(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def grid_record(entry_id, path, reference, tag="cond"):
    return {
        "id": entry_id,
        "input_path": path,
        "input_kind": "grid",
        "reference": reference,
        "tag": tag,
    }


def make_grid_file(tmp_path, name, text, fps=1):
    grid = oracle_posteriors(OracleScorerConfig(text, frames_per_symbol=fps))
    path = tmp_path / name
    write_grid(grid, path)
    return path


def test_read_manifest_resolves_relative_paths(tmp_path):
    manifest = tmp_path / "m.jsonl"
    write_manifest(manifest, [grid_record("e1", "sub/file.grid", "HI")])
    entries = read_manifest(manifest)
    assert entries[0].input_path == str(tmp_path / "sub" / "file.grid")


def test_read_manifest_strict_keys(tmp_path):
    manifest = tmp_path / "m.jsonl"
    record = grid_record("e1", "f.grid", "HI")
    record["extra"] = 1
    write_manifest(manifest, [record])
    with pytest.raises(ValueError):
        read_manifest(manifest)
    del record["extra"]
    del record["tag"]
    write_manifest(manifest, [record])
    with pytest.raises(ValueError):
        read_manifest(manifest)


def test_read_manifest_skips_blank_lines(tmp_path):
    manifest = tmp_path / "m.jsonl"
    manifest.write_text(
        json.dumps(grid_record("e1", "f.grid", "HI")) + "\n\n"
    )
    assert len(read_manifest(manifest)) == 1


def test_read_manifest_rejects_bad_kind(tmp_path):
    manifest = tmp_path / "m.jsonl"
    record = grid_record("e1", "f.grid", "HI")
    record["input_kind"] = "mp3"
    write_manifest(manifest, [record])
    with pytest.raises(ValueError):
        read_manifest(manifest)


def test_run_corpus_clean_grids_have_zero_wer(tmp_path):
    paths = {
        "e1": make_grid_file(tmp_path, "e1.grid", "THE CAT SAT"),
        "e2": make_grid_file(tmp_path, "e2.grid", "A DOG RAN"),
    }
    manifest = tmp_path / "m.jsonl"
    write_manifest(
        manifest,
        [grid_record(k, p.name, t) for (k, p), t in
         zip(paths.items(), ["THE CAT SAT", "A DOG RAN"])],
    )
    result = run_corpus(manifest)
    assert not result.failed
    assert result.aggregate.wer == 0.0
    assert all(e.hypothesis == e.reference for e in result.entries)


def test_run_corpus_planted_faults_are_counted(tmp_path):
    # grid spells a different word than the reference: exactly one sub
    path = make_grid_file(tmp_path, "e1.grid", "THE CAT SAT")
    manifest = tmp_path / "m.jsonl"
    write_manifest(manifest, [grid_record("e1", path.name, "THE DOG SAT")])
    result = run_corpus(manifest)
    report = result.reports["cond"]
    assert report.total_words == 3
    assert report.substitutions == 1
    assert result.aggregate.wer == pytest.approx(1 / 3)


def test_run_corpus_isolates_failing_entries(tmp_path):
    good = make_grid_file(tmp_path, "good.grid", "HELLO")
    manifest = tmp_path / "m.jsonl"
    write_manifest(
        manifest,
        [
            grid_record("good", good.name, "HELLO"),
            grid_record("gone", "missing.grid", "WORLD"),
        ],
    )
    result = run_corpus(manifest)
    assert len(result.failed) == 1
    assert result.failed[0].entry_id == "gone"
    assert "FileNotFoundError" in result.failed[0].error
    # the good entry still pooled
    assert result.reports["cond"].total_words == 1
    assert result.aggregate.wer == 0.0


def test_run_corpus_groups_by_tag(tmp_path):
    p1 = make_grid_file(tmp_path, "a.grid", "ONE TWO")
    p2 = make_grid_file(tmp_path, "b.grid", "THREE")
    manifest = tmp_path / "m.jsonl"
    write_manifest(
        manifest,
        [
            grid_record("a", p1.name, "ONE TWO", tag="short"),
            grid_record("b", p2.name, "THREE", tag="long"),
        ],
    )
    result = run_corpus(manifest, HarnessConfig(aggregate_mode="macro"))
    assert set(result.reports) == {"short", "long"}
    assert result.aggregate.mode == "macro"


def test_run_corpus_wav_entries_use_seeded_oracle(tmp_path):
    from speechmorse.audio_io import save_wav, synthesize_tone

    wav = tmp_path / "t.wav"
    save_wav(synthesize_tone(700, 0.01, 16000), wav)
    manifest = tmp_path / "m.jsonl"
    records = [
        {
            "id": "w1",
            "input_path": wav.name,
            "input_kind": "wav",
            "reference": "SOS HELP",
            "tag": "cond",
        }
    ]
    write_manifest(manifest, records)
    cfg = HarnessConfig(confusion_rate=0.0)
    result = run_corpus(manifest, cfg)
    assert result.entries[0].hypothesis == "SOS HELP"
    noisy = HarnessConfig(confusion_rate=0.4, blank_prob=0.1, seed=7)
    first = run_corpus(manifest, noisy)
    second = run_corpus(manifest, noisy)
    assert first.entries[0].hypothesis == second.entries[0].hypothesis


def test_format_table_layout(tmp_path):
    path = make_grid_file(tmp_path, "e.grid", "THE CAT SAT")
    manifest = tmp_path / "m.jsonl"
    write_manifest(
        manifest,
        [
            grid_record("e", path.name, "THE DOG SAT"),
            grid_record("gone", "missing.grid", "X"),
        ],
    )
    table = format_table(run_corpus(manifest))
    lines = table.splitlines()
    assert lines[0].split() == ["Condition", "Total", "Word", "Total", "Faults",
                                "WER", "Time", "(ms)"]
    assert any("cond" in ln and "33.33%" in ln for ln in lines)
    assert any(ln.startswith("overall (micro)") for ln in lines)
    assert any(ln.startswith("accuracy") and "66.67%" in ln for ln in lines)
    assert any(ln.startswith("FAILED gone:") for ln in lines)


def test_result_to_json_round_trips_raw_ratios(tmp_path):
    path = make_grid_file(tmp_path, "e.grid", "THE CAT SAT")
    manifest = tmp_path / "m.jsonl"
    write_manifest(manifest, [grid_record("e", path.name, "THE DOG SAT")])
    payload = result_to_json(run_corpus(manifest))
    assert payload["conditions"]["cond"]["wer"] == pytest.approx(1 / 3)
    assert payload["aggregate"]["mode"] == "micro"
    json.dumps(payload)  # must be serializable as-is


def test_decode_time_is_recorded(tmp_path):
    path = make_grid_file(tmp_path, "e.grid", "HI")
    manifest = tmp_path / "m.jsonl"
    write_manifest(manifest, [grid_record("e", path.name, "HI")])
    result = run_corpus(manifest)
    assert result.entries[0].decode_time_ms > 0.0
    assert result.reports["cond"].mean_time_ms > 0.0
