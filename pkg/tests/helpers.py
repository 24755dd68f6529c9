"""Shared fixture builders: MusicXML documents assembled from snippets."""

from __future__ import annotations

SEMITONE_TO_STEP = {
    0: ("C", 0), 1: ("C", 1), 2: ("D", 0), 3: ("D", 1), 4: ("E", 0), 5: ("F", 0),
    6: ("F", 1), 7: ("G", 0), 8: ("G", 1), 9: ("A", 0), 10: ("A", 1), 11: ("B", 0),
}


def note(step="C", octave=4, dur=4, alter=0, chord=False, tie=None, staff=None, voice=1):
    bits = ["<note>"]
    if chord:
        bits.append("<chord/>")
    alter_xml = f"<alter>{alter}</alter>" if alter else ""
    bits.append(f"<pitch><step>{step}</step>{alter_xml}<octave>{octave}</octave></pitch>")
    bits.append(f"<duration>{dur}</duration>")
    if tie in ("start", "stop"):
        bits.append(f'<tie type="{tie}"/>')
    elif tie == "both":
        bits.append('<tie type="stop"/><tie type="start"/>')
    bits.append(f"<voice>{voice}</voice>")
    if staff is not None:
        bits.append(f"<staff>{staff}</staff>")
    bits.append("</note>")
    return "".join(bits)


def midi_note(pitch: int, dur: int, **kw):
    step, alter = SEMITONE_TO_STEP[pitch % 12]
    return note(step=step, octave=pitch // 12 - 1, dur=dur, alter=alter, **kw)


def rest(dur=4, staff=None):
    staff_xml = f"<staff>{staff}</staff>" if staff is not None else ""
    return f"<note><rest/><duration>{dur}</duration><voice>1</voice>{staff_xml}</note>"


def dynamic(mark="p", staff=None):
    staff_xml = f"<staff>{staff}</staff>" if staff is not None else ""
    return (
        f"<direction><direction-type><dynamics><{mark}/></dynamics>"
        f"</direction-type>{staff_xml}</direction>"
    )


def wedge(wtype="crescendo", number=1, staff=None):
    staff_xml = f"<staff>{staff}</staff>" if staff is not None else ""
    return (
        f'<direction><direction-type><wedge type="{wtype}" number="{number}"/>'
        f"</direction-type>{staff_xml}</direction>"
    )


def backup(dur):
    return f"<backup><duration>{dur}</duration></backup>"


def measure(number, *content, divisions=None, staves=None):
    attrs = ""
    if divisions is not None or staves is not None:
        inner = ""
        if divisions is not None:
            inner += f"<divisions>{divisions}</divisions>"
        if staves is not None:
            inner += f"<staves>{staves}</staves>"
        attrs = f"<attributes>{inner}</attributes>"
    return f'<measure number="{number}">{attrs}{"".join(content)}</measure>'


def score_xml(parts, title="Fixture Song", composer="A. Tester", tempo=None):
    """parts: list of (part_name, [measure xml, ...])."""
    part_list = "".join(
        f'<score-part id="P{i + 1}"><part-name>{name}</part-name></score-part>'
        for i, (name, _) in enumerate(parts)
    )
    bodies = []
    for i, (_, measures) in enumerate(parts):
        ms = list(measures)
        if tempo is not None and i == 0 and ms:
            ms[0] = ms[0].replace(
                ">", f'><direction><sound tempo="{tempo}"/></direction>', 1
            ).replace("<measure", "<measure", 1)
        bodies.append(f'<part id="P{i + 1}">{"".join(ms)}</part>')
    return (
        '<?xml version="1.0" encoding="UTF-8"?>'
        "<score-partwise version=\"4.0\">"
        f"<work><work-title>{title}</work-title></work>"
        f'<identification><creator type="composer">{composer}</creator></identification>'
        f"<part-list>{part_list}</part-list>"
        f"{''.join(bodies)}"
        "</score-partwise>"
    )


def lieder_score_xml(vocal_measures, piano_measures, **kw):
    """Canonical three-stream layout: single-staff voice, two-staff piano."""
    return score_xml([("Voice", vocal_measures), ("Piano", piano_measures)], **kw)


def piano_measure(number, rh_items, lh_items, rh_divs, divisions=None):
    """Two-staff piano measure: staff 1 content, backup, staff 2 content."""
    staves = 2 if number == 1 else None
    return measure(
        number, *rh_items, backup(rh_divs), *lh_items,
        divisions=divisions, staves=staves,
    )
