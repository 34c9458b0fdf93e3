"""Dose-regimen extraction from free-text treatment descriptions.

The pattern table below is frozen and intentionally small: drug names come
from the taxonomy's labels (longest match wins), doses accept a single value
or a min-max range followed by a unit, intake counts accept Latin shorthands
(bid, tid, qid, qd) and "n[-m] times per day" phrasings.  Unrecognized text
yields empty fields, never a failure; the manual curation pass owns the
final word.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..model import DoseRange, IntakeRange, Release, Route
from ..taxonomy import NodeKind, Taxonomy

_NUM = r"\d+(?:\.\d+)?"
_UNIT = r"(?:µg|mcg|ug|mg|g|ml|iu)(?:\s*/\s*(?:kg|h|hr|day|ml))?"

_DOSE_RE = re.compile(
    rf"(?<![\w.])({_NUM})(?:\s*-\s*({_NUM}))?\s*({_UNIT})(?![\w/])",
    re.IGNORECASE,
)

# Ordered: range phrasing first so "1-2 times per day" is not read as "2 times".
_INTAKES_RES: list[tuple[re.Pattern, tuple[float, float] | None]] = [
    (
        re.compile(
            rf"(?<![\w.])({_NUM})\s*-\s*({_NUM})\s+times?\s+(?:per\s+day|a\s+day|daily)",
            re.IGNORECASE,
        ),
        None,
    ),
    (
        re.compile(
            rf"(?<![\w.])({_NUM})\s+times?\s+(?:per\s+day|a\s+day|daily)",
            re.IGNORECASE,
        ),
        None,
    ),
    (re.compile(r"\bb\.?i\.?d\.?\b", re.IGNORECASE), (2.0, 2.0)),
    (re.compile(r"\bt\.?i\.?d\.?\b", re.IGNORECASE), (3.0, 3.0)),
    (re.compile(r"\bq\.?i\.?d\.?\b", re.IGNORECASE), (4.0, 4.0)),
    (re.compile(r"\bq\.?d\.?\b", re.IGNORECASE), (1.0, 1.0)),
    (
        re.compile(r"\bonce\s+(?:daily|per\s+day|a\s+day)\b", re.IGNORECASE),
        (1.0, 1.0),
    ),
]

_ROUTE_RES: list[tuple[re.Pattern, Route]] = [
    (re.compile(r"\boral(?:ly)?\b|\bper\s+os\b", re.IGNORECASE), Route.ORAL),
    # "phase iv" is a trial phase, not a route.
    (re.compile(r"\bintravenous(?:ly)?\b|(?<!phase )\bi\.?v\.?\b", re.IGNORECASE), Route.INTRAVENOUS),
    (re.compile(r"\bsubcutaneous(?:ly)?\b", re.IGNORECASE), Route.SUBCUTANEOUS),
    (re.compile(r"\btransdermal(?:ly)?\b", re.IGNORECASE), Route.TRANSDERMAL),
    (re.compile(r"\btopical(?:ly)?\b", re.IGNORECASE), Route.TOPICAL),
    (re.compile(r"\bintramuscular(?:ly)?\b", re.IGNORECASE), Route.INTRAMUSCULAR),
    (re.compile(r"\brectal(?:ly)?\b", re.IGNORECASE), Route.RECTAL),
    (re.compile(r"\b(?:intra)?nasal(?:ly)?\b", re.IGNORECASE), Route.NASAL),
]

_RELEASE_RES: list[tuple[re.Pattern, Release]] = [
    (re.compile(r"\bimmediate[\s-]+release\b|\bIR\b", re.IGNORECASE), Release.IMMEDIATE),
    (
        re.compile(
            r"\b(?:modified|extended|controlled|sustained|prolonged)[\s-]+release\b"
            r"|\b(?:ER|XR|CR|SR)\b",
            re.IGNORECASE,
        ),
        Release.MODIFIED,
    ),
]


@dataclass(frozen=True)
class RegimenExtraction:
    """What was recognized in one free-text field; spans index into the
    source text."""

    active_principle_candidates: tuple[tuple[str, tuple[int, int]], ...] = ()
    dose_range: DoseRange | None = None
    intakes_per_day: IntakeRange | None = None
    route: Route | None = None
    release: Release | None = None


def _find_principles(text: str, taxonomy: Taxonomy) -> tuple[tuple[str, tuple[int, int]], ...]:
    lowered = text.lower()
    hits: list[tuple[int, int, str]] = []
    for node_id in sorted(taxonomy.ids_of_kind(NodeKind.ACTIVE_PRINCIPLE)):
        node = taxonomy.node(node_id)
        for label in sorted(set(node.labels.values())):
            needle = label.lower()
            start = 0
            while True:
                pos = lowered.find(needle, start)
                if pos < 0:
                    break
                end = pos + len(needle)
                before_ok = pos == 0 or not lowered[pos - 1].isalnum()
                after_ok = end == len(lowered) or not lowered[end].isalnum()
                if before_ok and after_ok:
                    hits.append((pos, end, node_id))
                start = pos + 1
    # Longest match wins on overlap; earlier start breaks remaining ties.
    hits.sort(key=lambda h: (h[0], -(h[1] - h[0]), h[2]))
    chosen: list[tuple[str, tuple[int, int]]] = []
    occupied_until = -1
    for start, end, node_id in hits:
        if start > occupied_until:
            chosen.append((node_id, (start, end)))
            occupied_until = end - 1
    return tuple(chosen)


def extract_regimen(text: str, taxonomy: Taxonomy) -> RegimenExtraction:
    """Case-insensitive detection of active principles, dose, intakes per
    day, route and release in free text."""
    principles = _find_principles(text, taxonomy)

    dose = None
    m = _DOSE_RE.search(text)
    if m:
        low = float(m.group(1))
        high = float(m.group(2)) if m.group(2) else low
        unit = re.sub(r"\s*", "", m.group(3)).lower()
        if low <= high:
            dose = DoseRange(min=low, max=high, unit=unit)

    intakes = None
    for pattern, fixed in _INTAKES_RES:
        m = pattern.search(text)
        if not m:
            continue
        if fixed is not None:
            intakes = IntakeRange(min=fixed[0], max=fixed[1])
        else:
            low = float(m.group(1))
            high = float(m.group(2)) if m.lastindex and m.lastindex >= 2 and m.group(2) else low
            if low > high:
                continue
            intakes = IntakeRange(min=low, max=high)
        break

    route = next((r for pattern, r in _ROUTE_RES if pattern.search(text)), None)
    release = next((r for pattern, r in _RELEASE_RES if pattern.search(text)), None)

    return RegimenExtraction(
        active_principle_candidates=principles,
        dose_range=dose,
        intakes_per_day=intakes,
        route=route,
        release=release,
    )
