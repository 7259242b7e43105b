"""Codec anchors, injectivity, timing arithmetic, and render contracts."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechmorse.errors import AliasedFrequency, UnknownCode, UnmappableCharacter
from speechmorse.morse import (
    FORMATS,
    MORSE_TABLE,
    REVERSE_TABLE,
    MorseSequence,
    Segment,
    TimingPattern,
    Token,
    decode,
    encode,
    from_timing,
    render_audio,
    render_haptic,
    sequence_from_text,
    to_timing,
)

text_strat = st.text(
    alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,?", min_size=0, max_size=40
)


# --- code table ---


def test_table_anchors():
    assert MORSE_TABLE["E"] == "."
    assert MORSE_TABLE["T"] == "-"
    assert MORSE_TABLE["A"] == ".-"
    assert MORSE_TABLE["N"] == "-."
    assert MORSE_TABLE["H"] == "...."
    assert MORSE_TABLE["O"] == "---"
    assert MORSE_TABLE["1"] == ".----"
    assert MORSE_TABLE["0"] == "-----"
    assert MORSE_TABLE["?"] == "..--.."


def test_table_covers_letters_and_digits():
    for ch in "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789":
        assert ch in MORSE_TABLE


def test_table_is_injective():
    codes = list(MORSE_TABLE.values())
    assert len(codes) == len(set(codes))
    assert len(REVERSE_TABLE) == len(MORSE_TABLE)
    assert all(set(code) <= {".", "-"} for code in codes)


# --- encode / decode ---


def test_encode_hello():
    morse_text, seq = encode("HELLO")
    assert morse_text == ".... . .-.. .-.. ---"
    # 4+1+4+4+3 marks and the gaps between them, plus 4 letter gaps
    assert len(seq) == 16 + 11 + 4


def test_encode_two_words_paper_format():
    morse_text, _ = encode("SOS HELP")
    assert morse_text == "... --- ...  .... . .-.. .--."
    assert "  " in morse_text


def test_encode_slash_format():
    morse_text, _ = encode("SOS HELP", fmt="slash")
    assert morse_text == "... --- ... / .... . .-.. .--."


def test_encode_uppercases_and_collapses_whitespace():
    assert encode("sos\t\n help")[0] == encode("SOS HELP")[0]
    assert encode("  SOS  ")[0] == encode("SOS")[0]


def test_encode_empty():
    morse_text, seq = encode("")
    assert morse_text == ""
    assert len(seq) == 0


def test_encode_unmappable_reports_position():
    with pytest.raises(UnmappableCharacter) as info:
        encode("SO#S")
    assert info.value.character == "#"
    assert info.value.position == 2


def test_encode_skip_unknown_drops_character():
    assert encode("SO#S", skip_unknown=True)[0] == encode("SOS")[0]
    assert encode("###", skip_unknown=True)[0] == ""


def test_encode_rejects_bad_format():
    with pytest.raises(ValueError):
        encode("SOS", fmt="spaces")


def test_decode_hello():
    assert decode(".... . .-.. .-.. ---") == "HELLO"


def test_decode_word_separators():
    assert decode("... --- ...  .... . .-.. .--.") == "SOS HELP"
    assert decode("... --- ... / .... . .-.. .--.", fmt="slash") == "SOS HELP"
    # three-plus spaces still read as one word gap
    assert decode("...   ---") == "S O"


def test_decode_unknown_code():
    with pytest.raises(UnknownCode) as info:
        decode("........")
    assert info.value.code == "........"


def test_decode_empty():
    assert decode("") == ""
    assert decode("   ") == ""


@settings(deadline=None, max_examples=200)
@given(text_strat, st.sampled_from(FORMATS))
def test_decode_inverts_encode(text, fmt):
    morse_text, _ = encode(text, fmt=fmt)
    normalized = " ".join(text.upper().split())
    assert decode(morse_text, fmt=fmt) == normalized


def test_encoding_is_prefix_unambiguous_with_gaps():
    # the letter-gap convention makes "EE" and "I" distinct strings
    assert encode("EE")[0] == ". ."
    assert encode("I")[0] == ".."
    assert decode(". .") == "EE"
    assert decode("..") == "I"


# --- token sequences and timing ---


def test_sequence_validation():
    with pytest.raises(ValueError):
        MorseSequence((Token.SYMBOL_GAP,))
    with pytest.raises(ValueError):
        MorseSequence((Token.DOT, Token.SYMBOL_GAP, Token.LETTER_GAP, Token.DOT))
    with pytest.raises(ValueError):
        MorseSequence((Token.DOT, Token.WORD_GAP))


def test_timing_validation():
    with pytest.raises(ValueError):
        TimingPattern((Segment(True, 7),))
    with pytest.raises(ValueError):
        TimingPattern((Segment(True, 1), Segment(True, 3)))
    with pytest.raises(ValueError):
        TimingPattern((Segment(False, 2),))


def test_timing_of_single_letters():
    # A = dot, gap, dash
    _, seq = encode("A")
    pattern = to_timing(seq)
    assert [(s.on, s.units) for s in pattern.segments] == [
        (True, 1),
        (False, 1),
        (True, 3),
    ]
    _, seq = encode("E")
    assert [(s.on, s.units) for s in to_timing(seq).segments] == [(True, 1)]


def test_timing_unit_totals_for_hello():
    _, seq = encode("HELLO")
    pattern = to_timing(seq)
    on = sum(s.units for s in pattern.segments if s.on)
    assert on == 26  # 11 dots + 5 dashes
    assert pattern.total_units == 49  # plus 11 symbol gaps and 4 letter gaps


def test_word_gap_is_seven_units():
    _, seq = encode("E E")
    pattern = to_timing(seq)
    assert [(s.on, s.units) for s in pattern.segments] == [
        (True, 1),
        (False, 7),
        (True, 1),
    ]


@settings(deadline=None, max_examples=100)
@given(text_strat)
def test_from_timing_inverts_to_timing(text):
    _, seq = encode(text)
    assert from_timing(to_timing(seq)) == seq


def test_sequence_from_text_accepts_non_dictionary_groups():
    seq = sequence_from_text("........")
    assert len(seq) == 15
    with pytest.raises(UnknownCode):
        sequence_from_text("..x.")


def test_sequence_from_text_matches_encode():
    morse_text, seq = encode("HELLO WORLD")
    assert sequence_from_text(morse_text) == seq


# --- rendering ---


def test_render_audio_length_and_rate():
    _, seq = encode("E")  # one dot: 1 unit on
    buf = render_audio(to_timing(seq), unit_ms=60, sample_rate_hz=16000)
    assert buf.sample_rate_hz == 16000
    assert len(buf) == round(0.060 * 16000)


def test_render_audio_total_length_tracks_units():
    _, seq = encode("PARIS")
    pattern = to_timing(seq)
    buf = render_audio(pattern, unit_ms=50, sample_rate_hz=8000)
    assert len(buf) == round(pattern.total_units * 0.050 * 8000)


def test_render_audio_gaps_are_silent_and_tones_are_not():
    _, seq = encode("A")
    buf = render_audio(to_timing(seq), unit_ms=60, tone_hz=700, sample_rate_hz=16000)
    spu = round(0.060 * 16000)
    dot, gap, dash = buf.samples[:spu], buf.samples[spu : 2 * spu], buf.samples[2 * spu :]
    assert np.max(np.abs(gap)) == 0.0
    # steady-state RMS of a sine at amplitude 0.8 is 0.8/sqrt(2); ramps bite a little
    for segment in (dot, dash):
        rms = np.sqrt(np.mean(segment**2))
        assert 0.5 < rms < 0.8 / np.sqrt(2) + 1e-6
    assert np.max(np.abs(buf.samples)) <= 0.8 + 1e-12


def test_render_audio_ramps_start_and_end_at_zero():
    _, seq = encode("T")
    buf = render_audio(to_timing(seq), unit_ms=60, sample_rate_hz=16000)
    assert abs(buf.samples[0]) < 1e-12
    assert abs(buf.samples[-1]) < 0.05  # within the final ramp


def test_render_audio_rejects_bad_args():
    pattern = to_timing(encode("E")[1])
    with pytest.raises(ValueError):
        render_audio(pattern, unit_ms=0)
    with pytest.raises(ValueError):
        render_audio(pattern, amplitude=1.5)
    with pytest.raises(AliasedFrequency):
        render_audio(pattern, tone_hz=9000, sample_rate_hz=16000)


def test_render_audio_empty_pattern():
    buf = render_audio(TimingPattern(()))
    assert len(buf) == 0


def test_render_haptic_schedule():
    _, seq = encode("A")
    schedule = render_haptic(to_timing(seq), unit_ms=100)
    assert schedule == "unit_ms 100\n0 100 1\n200 300 1\n"


def test_render_haptic_word_gap_offsets():
    _, seq = encode("E E")
    schedule = render_haptic(to_timing(seq), unit_ms=60)
    assert schedule.splitlines() == ["unit_ms 60", "0 60 1", "480 60 1"]


def test_render_haptic_rejects_bad_unit():
    with pytest.raises(ValueError):
        render_haptic(TimingPattern(()), unit_ms=-1)
