"""Parser for the registry results XML subset.

Element names mirror ClinicalTrials.gov results sections: trial identity
under ``id_info``, reporting groups under ``clinical_results > reported_events
> group_list``, and event rows split between ``serious_events`` and
``other_events``, each carrying the source SOC in its category title.

Treatments and indications are not coded in the source; they surface here
only as free text per group, to be resolved by the curation pass.
"""
from __future__ import annotations

import datetime
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from ..model import ModelError


class XmlSchemaError(ModelError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.element_path = path


@dataclass(frozen=True)
class RawGroup:
    id: str
    title: str
    description: str

    @property
    def free_text(self) -> str:
        return f"{self.title} {self.description}".strip()


@dataclass(frozen=True)
class RawEvent:
    """One event row before term mapping; ``soc`` is the source category
    title and ``count`` prefers the ``events`` attribute over
    ``subjects_affected`` (event counting explains observed rates above
    100%)."""

    group_id: str
    soc: str
    label: str
    serious: bool
    count: int


@dataclass(frozen=True)
class ParsedTrial:
    trial_id: str
    title: str
    completion_date: datetime.date
    groups: tuple[RawGroup, ...]
    events: tuple[RawEvent, ...]
    subjects_at_risk: dict[str, int]

    def free_text(self) -> dict[str, str]:
        return {g.id: g.free_text for g in self.groups}


_MONTH_FORMATS = ("%Y-%m-%d", "%B %d, %Y", "%B %Y")


def _parse_date(text: str, path: str) -> datetime.date:
    for fmt in _MONTH_FORMATS:
        try:
            return datetime.datetime.strptime(text.strip(), fmt).date()
        except ValueError:
            continue
    raise XmlSchemaError(path, f"unparseable date {text!r}")


def _required_text(parent: ET.Element, tag: str, path: str) -> str:
    child = parent.find(tag)
    if child is None or not (child.text or "").strip():
        raise XmlSchemaError(f"{path}/{tag}", "missing required element")
    return child.text.strip()


def _event_count(counts: ET.Element, path: str) -> int:
    raw = counts.get("events")
    if raw is None:
        raw = counts.get("subjects_affected")
    if raw is None:
        raise XmlSchemaError(path, "counts needs @events or @subjects_affected")
    try:
        value = int(raw)
    except ValueError:
        raise XmlSchemaError(path, f"bad count {raw!r}") from None
    if value < 0:
        raise XmlSchemaError(path, f"negative count {value}")
    return value


def parse_registry_xml(document: str | bytes) -> ParsedTrial:
    """Parse one registry results file.

    Schema violations report the offending element path; an event row naming
    an undeclared group id is an error.  Identical bytes always produce
    identical structures.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise XmlSchemaError("clinical_study", f"not well-formed XML: {exc}") from None
    if root.tag != "clinical_study":
        raise XmlSchemaError(root.tag, "root element must be clinical_study")

    id_info = root.find("id_info")
    if id_info is None:
        raise XmlSchemaError("clinical_study/id_info", "missing required element")
    trial_id = _required_text(id_info, "nct_id", "clinical_study/id_info")
    title = _required_text(root, "official_title", "clinical_study")
    completion = _parse_date(
        _required_text(root, "completion_date", "clinical_study"),
        "clinical_study/completion_date",
    )

    groups: list[RawGroup] = []
    events: list[RawEvent] = []
    at_risk: dict[str, int] = {}
    reported = root.find("clinical_results/reported_events")
    if reported is not None:
        group_list = reported.find("group_list")
        if group_list is None:
            raise XmlSchemaError(
                "clinical_study/clinical_results/reported_events/group_list",
                "missing required element",
            )
        for group in group_list.findall("group"):
            gid = group.get("group_id")
            if not gid:
                raise XmlSchemaError(
                    "clinical_study/clinical_results/reported_events/group_list/group",
                    "missing @group_id",
                )
            if any(g.id == gid for g in groups):
                raise XmlSchemaError(
                    f"...group_list/group[@group_id={gid!r}]", "duplicate group id"
                )
            title_el = group.find("title")
            desc_el = group.find("description")
            groups.append(
                RawGroup(
                    id=gid,
                    title=(title_el.text or "").strip() if title_el is not None else "",
                    description=(desc_el.text or "").strip() if desc_el is not None else "",
                )
            )
        declared = {g.id for g in groups}

        for section, serious in (("serious_events", True), ("other_events", False)):
            sec = reported.find(section)
            if sec is None:
                continue
            for category in sec.findall("category_list/category"):
                soc = _required_text(category, "title", f"...{section}/category_list/category")
                for event in category.findall("event_list/event"):
                    label = _required_text(
                        event, "sub_title", f"...{section}/.../event"
                    )
                    for counts in event.findall("counts"):
                        gid = counts.get("group_id")
                        cpath = f"...{section}/.../event[{label!r}]/counts"
                        if not gid:
                            raise XmlSchemaError(cpath, "missing @group_id")
                        if gid not in declared:
                            raise XmlSchemaError(
                                cpath, f"event references undeclared group {gid!r}"
                            )
                        value = _event_count(counts, cpath)
                        risk = counts.get("subjects_at_risk")
                        if risk is not None:
                            try:
                                risk_n = int(risk)
                            except ValueError:
                                raise XmlSchemaError(
                                    cpath, f"bad subjects_at_risk {risk!r}"
                                ) from None
                            if risk_n < 0:
                                raise XmlSchemaError(cpath, "negative subjects_at_risk")
                            at_risk[gid] = max(at_risk.get(gid, 0), risk_n)
                        events.append(
                            RawEvent(
                                group_id=gid,
                                soc=soc,
                                label=label,
                                serious=serious,
                                count=value,
                            )
                        )

    return ParsedTrial(
        trial_id=trial_id,
        title=title,
        completion_date=completion,
        groups=tuple(groups),
        events=tuple(events),
        subjects_at_risk=dict(sorted(at_risk.items())),
    )
