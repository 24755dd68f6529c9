import pytest

from vocaldyn.score import (
    DynamicCategory,
    EmptyScoreError,
    ScoreDocument,
    ScoreParseError,
    parse_musicxml,
)

from helpers import (
    dynamic,
    lieder_score_xml,
    measure,
    note,
    piano_measure,
    rest,
    score_xml,
    wedge,
)


def test_minimal_single_note_with_dynamic():
    xml = score_xml([("Voice", [measure(1, dynamic("p"), note("C", 4, 4), divisions=4)])])
    doc = parse_musicxml(xml)
    assert list(doc.parts) == ["vocal"]
    (n,) = doc.parts["vocal"]
    assert n.pitch == 60
    assert n.onset == 0.0
    assert n.duration == 1.0
    (m,) = doc.markings
    assert m.category is DynamicCategory.P
    assert m.offset == 0.0


def test_tied_half_notes_merge_into_one_event():
    xml = score_xml(
        [
            (
                "Voice",
                [
                    measure(1, note("E", 4, 8, tie="start"), divisions=4),
                    measure(2, note("E", 4, 8, tie="stop")),
                ],
            )
        ]
    )
    doc = parse_musicxml(xml)
    (n,) = doc.parts["vocal"]
    assert n.pitch == 64
    assert n.duration == 4.0


def test_three_part_wedge_spans_two_measures():
    # 4/4 measures, crescendo opens at the start of measure 1 and closes at
    # the end of measure 2: span must be 8 quarter notes.
    vocal = [
        measure(1, wedge("crescendo"), note("C", 5, 16), divisions=4),
        measure(2, note("D", 5, 16), wedge("stop")),
    ]
    piano = [
        piano_measure(1, [dynamic("p", staff=1), note("C", 4, 16, staff=1)],
                      [note("C", 3, 16, staff=2)], 16, divisions=4),
        piano_measure(2, [note("C", 4, 16, staff=1)], [note("C", 3, 16, staff=2)], 16),
    ]
    doc = parse_musicxml(lieder_score_xml(vocal, piano))
    assert set(doc.parts) == {"vocal", "piano_rh", "piano_lh"}
    wedges = [m for m in doc.markings if m.category is DynamicCategory.CRESCENDO]
    assert len(wedges) == 1
    assert wedges[0].span_end - wedges[0].offset == pytest.approx(8.0)


def test_rests_are_skipped_and_advance_time():
    xml = score_xml([("Voice", [measure(1, rest(4), note("C", 4, 4), divisions=4)])])
    doc = parse_musicxml(xml)
    (n,) = doc.parts["vocal"]
    assert n.onset == 1.0


def test_vocal_chord_keeps_highest_pitch():
    xml = score_xml(
        [("Voice", [measure(1, note("C", 4, 4), note("E", 4, 4, chord=True), divisions=4)])]
    )
    doc = parse_musicxml(xml)
    (n,) = doc.parts["vocal"]
    assert n.pitch == 64
    assert n.onset == 0.0


def test_piano_chord_keeps_all_notes():
    vocal = [measure(1, note("C", 5, 4), divisions=4)]
    piano = [
        piano_measure(
            1,
            [note("C", 4, 4, staff=1), note("E", 4, 4, staff=1, chord=True)],
            [note("C", 3, 4, staff=2)],
            4,
            divisions=4,
        )
    ]
    doc = parse_musicxml(lieder_score_xml(vocal, piano))
    assert len(doc.parts["piano_rh"]) == 2
    assert {n.onset for n in doc.parts["piano_rh"]} == {0.0}


def test_grace_notes_ignored():
    xml = score_xml(
        [("Voice", [measure(1, "<note><grace/><pitch><step>D</step><octave>4</octave></pitch><voice>1</voice></note>", note("C", 4, 4), divisions=4)])]
    )
    doc = parse_musicxml(xml)
    assert len(doc.parts["vocal"]) == 1


def test_accent_variants_consolidate_to_sf():
    xml = score_xml(
        [("Voice", [measure(1, dynamic("sfz"), note("C", 4, 2), dynamic("fz"), note("D", 4, 2), divisions=4)])]
    )
    doc = parse_musicxml(xml)
    assert [m.category for m in doc.markings] == [DynamicCategory.SF, DynamicCategory.SF]


def test_tempo_hint_from_sound_element():
    xml = score_xml([("Voice", [measure(1, note("C", 4, 4), divisions=4)])], tempo=96)
    doc = parse_musicxml(xml)
    assert doc.tempo_hint == 96.0


def test_malformed_xml_reports_position():
    with pytest.raises(ScoreParseError) as exc:
        parse_musicxml(b"<score-partwise><part-list>")
    assert exc.value.position is not None


def test_zero_parts_is_an_error():
    with pytest.raises(EmptyScoreError):
        parse_musicxml(b'<score-partwise version="4.0"><part-list/></score-partwise>')


def test_metadata_extraction():
    xml = score_xml(
        [("Voice", [measure(1, note("C", 4, 4), divisions=4)])],
        title="Abendlied", composer="C. Schumann",
    )
    doc = parse_musicxml(xml)
    assert doc.metadata.title == "Abendlied"
    assert doc.metadata.composer == "C. Schumann"


def test_json_round_trip_identical():
    vocal = [
        measure(1, dynamic("mf"), note("C", 5, 8), wedge("diminuendo"), note("D", 5, 8), divisions=4),
        measure(2, wedge("stop"), note("E", 5, 16)),
    ]
    piano = [
        piano_measure(1, [note("G", 3, 16, staff=1)], [note("C", 3, 16, staff=2)], 16, divisions=4),
        piano_measure(2, [note("G", 3, 16, staff=1)], [note("C", 3, 16, staff=2)], 16),
    ]
    doc = parse_musicxml(lieder_score_xml(vocal, piano, tempo=72))
    again = ScoreDocument.from_json(doc.to_json())
    assert again == doc
    assert ScoreDocument.from_json(again.to_json()) == doc


def test_part_role_override():
    xml = score_xml(
        [("A", [measure(1, note("C", 4, 4), divisions=4)]),
         ("B", [measure(1, note("C", 3, 4), divisions=4)])],
    )
    doc = parse_musicxml(xml, part_roles=["piano_rh", "vocal"])
    assert doc.parts["vocal"][0].pitch == 48
