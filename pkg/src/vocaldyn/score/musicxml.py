"""MusicXML (partwise) parsing into ScoreDocument.

Supported subset: pitched notes, ties, chords, point dynamics, wedge
start/stop, tempo hints. Grace notes, cue notes, ornaments and repeat
structures are ignored.
"""

from __future__ import annotations

import io
import xml.etree.ElementTree as ET
import zipfile
from pathlib import Path
from typing import Sequence

from .types import (
    PIANO_LH,
    PIANO_RH,
    VOCAL,
    DynamicCategory,
    DynamicMarking,
    EmptyScoreError,
    NoteEvent,
    ScoreDocument,
    ScoreMetadata,
    ScoreParseError,
)

STEP_TO_SEMITONE = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

# Accent variants consolidate into SF.
DYNAMIC_TAGS = {
    **{c.value: c for c in DynamicCategory if not c.is_wedge},
    "sfz": DynamicCategory.SF,
    "fz": DynamicCategory.SF,
}

WEDGE_TYPES = {
    "crescendo": DynamicCategory.CRESCENDO,
    "diminuendo": DynamicCategory.DIMINUENDO,
}


def _pitch_to_semitone(pitch_el: ET.Element) -> int:
    step = pitch_el.findtext("step", "C").strip()
    octave = int(pitch_el.findtext("octave", "4"))
    alter = float(pitch_el.findtext("alter", "0") or 0)
    return int(round(12 * (octave + 1) + STEP_TO_SEMITONE[step] + alter))


class _StreamState:
    """Mutable accumulation for one (part, staff) stream during parsing."""

    def __init__(self, role: str):
        self.role = role
        self.notes: list[dict] = []          # pitch/onset/duration/measure
        self.markings: list[DynamicMarking] = []
        self.open_ties: dict[tuple[str, int], int] = {}   # (voice, pitch) -> note idx
        self.open_wedges: dict[str, tuple[DynamicCategory, float]] = {}
        self.last_onset = 0.0

    def close_wedges(self, end: float):
        for category, start in self.open_wedges.values():
            if end > start:
                self.markings.append(
                    DynamicMarking(category, start, self.role, span_end=end)
                )
        self.open_wedges.clear()


def _default_roles(staff_counts: list[int]) -> list[str]:
    """Assign stream roles: first part is the vocal line; the first 2-staff
    part supplies piano_rh/piano_lh; a trailing pair of single-staff parts is
    treated the same way. Everything else keeps a generic id."""
    roles: list[str] = []
    piano_done = False
    single_staff_rest = all(c == 1 for c in staff_counts[1:])
    for pi, staves in enumerate(staff_counts):
        if pi == 0:
            roles.extend([VOCAL] * staves)
        elif staves == 2 and not piano_done:
            roles.extend([PIANO_RH, PIANO_LH])
            piano_done = True
        elif single_staff_rest and len(staff_counts) == 3 and not piano_done:
            roles.append(PIANO_RH if pi == 1 else PIANO_LH)
        else:
            for s in range(staves):
                roles.append(f"part_{pi + 1}" + (f"_staff{s + 1}" if staves > 1 else ""))
    return roles


def parse_musicxml(
    document_bytes: bytes | str,
    part_roles: Sequence[str] | None = None,
) -> ScoreDocument:
    """Parse partwise MusicXML bytes into a ScoreDocument.

    part_roles optionally overrides stream role assignment, one role per
    (part, staff) stream in document order.

    Raises ScoreParseError on malformed XML and EmptyScoreError when the
    document has no parts.
    """
    if isinstance(document_bytes, str):
        document_bytes = document_bytes.encode("utf-8")
    try:
        root = ET.fromstring(document_bytes)
    except ET.ParseError as exc:
        raise ScoreParseError(f"malformed MusicXML: {exc.msg}", exc.position) from exc
    if root.tag != "score-partwise":
        raise ScoreParseError(f"unsupported root element {root.tag!r}; expected score-partwise")

    part_elems = _ordered_parts(root)
    if not part_elems:
        raise EmptyScoreError("document contains no parts")

    staff_counts = [_count_staves(p) for p in part_elems]
    if part_roles is None:
        roles = _default_roles(staff_counts)
    else:
        roles = list(part_roles)
        if len(roles) != sum(staff_counts):
            raise ScoreParseError(
                f"part_roles has {len(roles)} entries but document has "
                f"{sum(staff_counts)} (part, staff) streams"
            )

    tempo_hint: float | None = None
    streams: dict[tuple[int, int], _StreamState] = {}
    role_iter = iter(roles)
    for pi, staves in enumerate(staff_counts):
        for staff in range(1, staves + 1):
            streams[(pi, staff)] = _StreamState(next(role_iter))

    for pi, part in enumerate(part_elems):
        tempo_hint = _parse_part(part, pi, staff_counts[pi], streams, tempo_hint)

    parts: dict[str, list[NoteEvent]] = {}
    markings: list[DynamicMarking] = []
    for state in streams.values():
        notes = parts.setdefault(state.role, [])
        for n in state.notes:
            notes.append(NoteEvent(part_id=state.role, **n))
        markings.extend(state.markings)
    for notes in parts.values():
        notes.sort(key=lambda n: (n.onset, n.pitch))

    metadata = ScoreMetadata(
        composer=(root.findtext("identification/creator[@type='composer']") or "").strip(),
        title=(root.findtext("work/work-title") or root.findtext("movement-title") or "").strip(),
        catalogue_id=(root.findtext("identification/source") or "").strip(),
    )
    return ScoreDocument(parts=parts, markings=markings, metadata=metadata, tempo_hint=tempo_hint)


def parse_musicxml_file(path: str | Path, part_roles: Sequence[str] | None = None) -> ScoreDocument:
    """Parse a .musicxml/.xml file, or a compressed .mxl container."""
    path = Path(path)
    data = path.read_bytes()
    if zipfile.is_zipfile(io.BytesIO(data)):
        data = _extract_mxl(data)
    return parse_musicxml(data, part_roles=part_roles)


def _extract_mxl(data: bytes) -> bytes:
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        names = zf.namelist()
        target = None
        if "META-INF/container.xml" in names:
            container = ET.fromstring(zf.read("META-INF/container.xml"))
            rootfile = container.find("rootfiles/rootfile")
            if rootfile is not None:
                target = rootfile.get("full-path")
        if target is None or target not in names:
            candidates = [n for n in names if n.endswith(".xml") and not n.startswith("META-INF")]
            if not candidates:
                raise ScoreParseError("compressed container holds no MusicXML document")
            target = candidates[0]
        return zf.read(target)


def _ordered_parts(root: ET.Element) -> list[ET.Element]:
    by_id = {p.get("id"): p for p in root.findall("part")}
    ordered = []
    for sp in root.findall("part-list/score-part"):
        part = by_id.pop(sp.get("id"), None)
        if part is not None:
            ordered.append(part)
    ordered.extend(by_id.values())
    return ordered


def _count_staves(part: ET.Element) -> int:
    staves = part.findtext("measure/attributes/staves")
    return int(staves) if staves else 1


def _parse_part(
    part: ET.Element,
    part_index: int,
    staves: int,
    streams: dict[tuple[int, int], _StreamState],
    tempo_hint: float | None,
) -> float | None:
    divisions = 1.0
    cursor = 0.0  # quarter notes from part start
    part_end = 0.0

    for mi, measure in enumerate(part.findall("measure")):
        try:
            measure_number = int(measure.get("number", ""))
        except ValueError:
            measure_number = mi + 1
        if measure_number < 1:
            measure_number = mi + 1
        measure_start = cursor

        for el in measure:
            if el.tag == "attributes":
                div = el.findtext("divisions")
                if div:
                    divisions = float(div)
            elif el.tag == "backup":
                cursor -= float(el.findtext("duration", "0")) / divisions
            elif el.tag == "forward":
                cursor += float(el.findtext("duration", "0")) / divisions
            elif el.tag == "direction":
                tempo_hint = _parse_direction(el, cursor, divisions, part_index, streams, tempo_hint)
            elif el.tag == "note":
                cursor = _parse_note(el, cursor, divisions, part_index, measure_number, streams)
            elif el.tag == "sound" and el.get("tempo") and tempo_hint is None:
                tempo_hint = float(el.get("tempo"))
            part_end = max(part_end, cursor)
        cursor = max(cursor, measure_start)

    for staff in range(1, staves + 1):
        streams[(part_index, staff)].close_wedges(part_end)
    return tempo_hint


def _parse_direction(
    el: ET.Element,
    cursor: float,
    divisions: float,
    part_index: int,
    streams: dict[tuple[int, int], _StreamState],
    tempo_hint: float | None,
) -> float | None:
    staff = int(el.findtext("staff", "1"))
    state = streams.get((part_index, staff)) or streams[(part_index, 1)]
    offset = cursor + float(el.findtext("offset", "0") or 0) / divisions
    offset = max(0.0, offset)

    for dtype in el.findall("direction-type"):
        dyn = dtype.find("dynamics")
        if dyn is not None:
            for child in dyn:
                category = DYNAMIC_TAGS.get(child.tag)
                if category is not None:
                    state.markings.append(DynamicMarking(category, offset, state.role))
        for wedge in dtype.findall("wedge"):
            wtype = wedge.get("type", "")
            number = wedge.get("number", "1")
            if wtype in WEDGE_TYPES:
                state.open_wedges[number] = (WEDGE_TYPES[wtype], offset)
            elif wtype == "stop":
                started = state.open_wedges.pop(number, None)
                if started is not None and offset > started[1]:
                    state.markings.append(
                        DynamicMarking(started[0], started[1], state.role, span_end=offset)
                    )

    sound = el.find("sound")
    if sound is not None and sound.get("tempo") and tempo_hint is None:
        tempo_hint = float(sound.get("tempo"))
    if tempo_hint is None:
        metro = el.find("direction-type/metronome")
        if metro is not None and (metro.findtext("beat-unit") or "").strip() == "quarter":
            per_minute = metro.findtext("per-minute")
            if per_minute:
                try:
                    tempo_hint = float(per_minute)
                except ValueError:
                    pass
    return tempo_hint


def _parse_note(
    el: ET.Element,
    cursor: float,
    divisions: float,
    part_index: int,
    measure_number: int,
    streams: dict[tuple[int, int], _StreamState],
) -> float:
    if el.find("grace") is not None:
        return cursor
    duration = float(el.findtext("duration", "0")) / divisions
    is_chord = el.find("chord") is not None
    onset = cursor if not is_chord else None

    if el.find("rest") is not None or el.find("cue") is not None:
        return cursor + duration

    pitch_el = el.find("pitch")
    if pitch_el is None:
        return cursor + (0.0 if is_chord else duration)

    staff = int(el.findtext("staff", "1"))
    voice = el.findtext("voice", "1")
    state = streams.get((part_index, staff)) or streams[(part_index, 1)]
    pitch = _pitch_to_semitone(pitch_el)

    if is_chord:
        onset = state.last_onset
        if state.role == VOCAL:
            # Vocal chords reduce to the melody line: keep the highest pitch.
            for n in reversed(state.notes):
                if n["onset"] == onset:
                    n["pitch"] = max(n["pitch"], pitch)
                    return cursor
            return cursor
    else:
        state.last_onset = cursor

    tie_types = {t.get("type") for t in el.findall("tie")}
    key = (voice, pitch)
    if "stop" in tie_types and key in state.open_ties:
        idx = state.open_ties[key]
        state.notes[idx]["duration"] += duration
        if "start" not in tie_types:
            del state.open_ties[key]
        return cursor + (0.0 if is_chord else duration)

    if duration > 0:
        state.notes.append(
            {"pitch": pitch, "onset": onset, "duration": duration, "measure": measure_number}
        )
        if "start" in tie_types:
            state.open_ties[key] = len(state.notes) - 1

    return cursor + (0.0 if is_chord else duration)
