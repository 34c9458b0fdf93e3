"""Curation CSV: the round-trippable file a reviewer edits between automatic
extraction and dataset assembly.

One row per (group, treatment).  Loading keeps every well-formed row so that
export then load is the identity; the maintenance-dose rule (when a
treatment was coded in several phases, only the maintenance phase row
counts) is applied by ``effective_rows`` at assembly time.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from ..model import DoseRange, IntakeRange, ModelError, PeriodKind, Release, Route
from ..storage import format_number
from ..taxonomy import NodeKind, Taxonomy
from .regimen import extract_regimen
from .xml_parser import ParsedTrial

CURATION_COLUMNS = [
    "trial_id", "period_kind", "group_id", "group_label", "n_patients",
    "indication_ids", "ap_id", "release", "route", "dose_min", "dose_max",
    "dose_unit", "intakes_min", "intakes_max", "phase",
]


class CurationError(ModelError):
    def __init__(self, row_no: int, message: str):
        super().__init__(f"row {row_no}: {message}")
        self.row_no = row_no


@dataclass(frozen=True)
class CurationRow:
    trial_id: str
    period_kind: PeriodKind
    group_id: str
    group_label: str
    n_patients: int
    indication_ids: tuple[str, ...]
    ap_id: str
    release: Release = Release.UNSPECIFIED
    route: Route = Route.UNSPECIFIED
    dose_min: float | None = None
    dose_max: float | None = None
    dose_unit: str = ""
    intakes_min: float | None = None
    intakes_max: float | None = None
    phase: str = ""

    def dose_range(self) -> DoseRange | None:
        if self.dose_min is None and self.dose_max is None:
            return None
        return DoseRange(min=self.dose_min, max=self.dose_max, unit=self.dose_unit)

    def intakes_range(self) -> IntakeRange | None:
        if self.intakes_min is None and self.intakes_max is None:
            return None
        return IntakeRange(min=self.intakes_min, max=self.intakes_max)


def _opt_float(value: str, row_no: int, column: str) -> float | None:
    if not value.strip():
        return None
    try:
        return float(value)
    except ValueError:
        raise CurationError(row_no, f"bad number {value!r} in {column}") from None


def load_curation_csv(text: str, taxonomy: Taxonomy | None = None) -> list[CurationRow]:
    """Parse and validate curation rows.

    Range order (min <= max) and, when a taxonomy is supplied, id existence
    are checked here; errors carry the row number.
    """
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CURATION_COLUMNS:
        raise ModelError(
            f"curation file: expected header {','.join(CURATION_COLUMNS)}"
        )
    rows: list[CurationRow] = []
    for row_no, raw in enumerate(reader, start=2):
        if raw["trial_id"] is None:
            raise CurationError(row_no, "short row")
        try:
            period_kind = PeriodKind(raw["period_kind"] or "single")
        except ValueError:
            raise CurationError(
                row_no, f"unknown period_kind {raw['period_kind']!r}"
            ) from None
        try:
            release = Release(raw["release"] or "unspecified")
            route = Route(raw["route"] or "unspecified")
        except ValueError as exc:
            raise CurationError(row_no, str(exc)) from None
        try:
            n_patients = int(raw["n_patients"])
        except (TypeError, ValueError):
            raise CurationError(
                row_no, f"bad n_patients {raw['n_patients']!r}"
            ) from None

        dose_min = _opt_float(raw["dose_min"], row_no, "dose_min")
        dose_max = _opt_float(raw["dose_max"], row_no, "dose_max")
        if (dose_min is None) != (dose_max is None):
            bound = dose_min if dose_min is not None else dose_max
            dose_min = dose_max = bound
        if dose_min is not None and dose_min > dose_max:
            raise CurationError(row_no, f"dose range {dose_min} > {dose_max}")
        if dose_min is not None and not raw["dose_unit"].strip():
            raise CurationError(row_no, "dose given without a unit")

        intakes_min = _opt_float(raw["intakes_min"], row_no, "intakes_min")
        intakes_max = _opt_float(raw["intakes_max"], row_no, "intakes_max")
        if (intakes_min is None) != (intakes_max is None):
            bound = intakes_min if intakes_min is not None else intakes_max
            intakes_min = intakes_max = bound
        if intakes_min is not None and intakes_min > intakes_max:
            raise CurationError(row_no, f"intakes range {intakes_min} > {intakes_max}")

        indication_ids = tuple(
            i.strip() for i in raw["indication_ids"].split(";") if i.strip()
        )
        row = CurationRow(
            trial_id=raw["trial_id"].strip(),
            period_kind=period_kind,
            group_id=raw["group_id"].strip(),
            group_label=raw["group_label"],
            n_patients=n_patients,
            indication_ids=indication_ids,
            ap_id=raw["ap_id"].strip(),
            release=release,
            route=route,
            dose_min=dose_min,
            dose_max=dose_max,
            dose_unit=raw["dose_unit"].strip(),
            intakes_min=intakes_min,
            intakes_max=intakes_max,
            phase=raw["phase"].strip(),
        )
        if taxonomy is not None:
            if row.ap_id and row.ap_id not in taxonomy.ids_of_kind(
                NodeKind.ACTIVE_PRINCIPLE
            ):
                raise CurationError(row_no, f"unknown active principle {row.ap_id!r}")
            for ind in row.indication_ids:
                if ind not in taxonomy.ids_of_kind(NodeKind.INDICATION):
                    raise CurationError(row_no, f"unknown indication {ind!r}")
        rows.append(row)
    return rows


def export_curation_csv(rows: list[CurationRow]) -> str:
    """Inverse of load_curation_csv."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURATION_COLUMNS)
    for row in rows:
        writer.writerow([
            row.trial_id,
            row.period_kind.value,
            row.group_id,
            row.group_label,
            str(row.n_patients),
            ";".join(row.indication_ids),
            row.ap_id,
            row.release.value,
            row.route.value,
            format_number(row.dose_min) if row.dose_min is not None else "",
            format_number(row.dose_max) if row.dose_max is not None else "",
            row.dose_unit,
            format_number(row.intakes_min) if row.intakes_min is not None else "",
            format_number(row.intakes_max) if row.intakes_max is not None else "",
            row.phase,
        ])
    return out.getvalue()


def effective_rows(rows: list[CurationRow]) -> list[CurationRow]:
    """Apply the maintenance-dose rule.

    When the same (trial, group, principle) appears in several phases, keep
    the maintenance row (an empty phase counts as maintenance); a treatment
    coded only in another phase is kept as-is.
    """
    by_treatment: dict[tuple[str, str, str], list[CurationRow]] = {}
    order: list[tuple[str, str, str]] = []
    for row in rows:
        key = (row.trial_id, row.group_id, row.ap_id)
        if key not in by_treatment:
            order.append(key)
        by_treatment.setdefault(key, []).append(row)

    kept: list[CurationRow] = []
    for key in order:
        candidates = by_treatment[key]
        if len(candidates) == 1:
            kept.append(candidates[0])
            continue
        maintenance = [
            r for r in candidates if r.phase in ("", "maintenance")
        ]
        kept.append(maintenance[0] if maintenance else candidates[0])
    return kept


def prefill_rows(parsed: ParsedTrial, taxonomy: Taxonomy) -> list[CurationRow]:
    """Pre-curation rows for one parsed trial, filled by the extractors.

    Active principles, dose, intakes, route and release come from the
    regimen extractor over the group's free text; indications from a label
    scan of the indication hierarchy; patient counts default to the largest
    subjects-at-risk figure seen for the group.
    """
    indication_labels: list[tuple[str, str]] = []
    for node_id in sorted(taxonomy.ids_of_kind(NodeKind.INDICATION)):
        for label in taxonomy.node(node_id).labels.values():
            indication_labels.append((label.lower(), node_id))
    # Longest label first so "peripheral neuropathic pain" beats "pain".
    indication_labels.sort(key=lambda pair: -len(pair[0]))

    rows: list[CurationRow] = []
    for group in parsed.groups:
        text = group.free_text
        lowered = text.lower()
        extraction = extract_regimen(text, taxonomy)

        found: list[str] = []
        consumed: list[tuple[int, int]] = []
        for needle, node_id in indication_labels:
            pos = lowered.find(needle)
            if pos < 0:
                continue
            span = (pos, pos + len(needle))
            if any(s < span[1] and span[0] < e for s, e in consumed):
                continue
            consumed.append(span)
            if node_id not in found:
                found.append(node_id)

        ap_ids = [nid for nid, _ in extraction.active_principle_candidates]
        if not ap_ids:
            ap_ids = [""]
        for ap_id in ap_ids:
            rows.append(
                CurationRow(
                    trial_id=parsed.trial_id,
                    period_kind=PeriodKind.SINGLE,
                    group_id=group.id,
                    group_label=group.title,
                    n_patients=max(parsed.subjects_at_risk.get(group.id, 1), 1),
                    indication_ids=tuple(sorted(found)),
                    ap_id=ap_id,
                    release=extraction.release or Release.UNSPECIFIED,
                    route=extraction.route or Route.UNSPECIFIED,
                    dose_min=extraction.dose_range.min if extraction.dose_range else None,
                    dose_max=extraction.dose_range.max if extraction.dose_range else None,
                    dose_unit=extraction.dose_range.unit if extraction.dose_range else "",
                    intakes_min=(
                        extraction.intakes_per_day.min
                        if extraction.intakes_per_day else None
                    ),
                    intakes_max=(
                        extraction.intakes_per_day.max
                        if extraction.intakes_per_day else None
                    ),
                )
            )
    return rows


#: Fields compared by the extraction scorer.
SCORED_FIELDS = (
    "indication_ids", "ap_id", "release", "route", "dose", "dose_unit", "intakes",
)


def score_extraction(
    auto_rows: list[CurationRow], curated_rows: list[CurationRow]
) -> dict[str, float]:
    """Per-field agreement between pre-curation and post-curation rows.

    Rows are aligned per group in file order; the result maps each scored
    field to the fraction of aligned rows where the automatic value matched
    the curated one.  No threshold is enforced.
    """
    def by_group(rows):
        grouped: dict[tuple[str, str], list[CurationRow]] = {}
        for row in rows:
            grouped.setdefault((row.trial_id, row.group_id), []).append(row)
        return grouped

    auto_groups = by_group(auto_rows)
    curated_groups = by_group(curated_rows)
    hits = {f: 0 for f in SCORED_FIELDS}
    total = 0
    for key, curated in curated_groups.items():
        auto = auto_groups.get(key, [])
        for i, crow in enumerate(curated):
            arow = auto[i] if i < len(auto) else None
            total += 1
            if arow is None:
                continue
            if set(arow.indication_ids) == set(crow.indication_ids):
                hits["indication_ids"] += 1
            if arow.ap_id == crow.ap_id:
                hits["ap_id"] += 1
            if arow.release is crow.release:
                hits["release"] += 1
            if arow.route is crow.route:
                hits["route"] += 1
            if (arow.dose_min, arow.dose_max) == (crow.dose_min, crow.dose_max):
                hits["dose"] += 1
            if arow.dose_unit == crow.dose_unit:
                hits["dose_unit"] += 1
            if (arow.intakes_min, arow.intakes_max) == (crow.intakes_min, crow.intakes_max):
                hits["intakes"] += 1
    if total == 0:
        return {f: 0.0 for f in SCORED_FIELDS}
    return {f: hits[f] / total for f in SCORED_FIELDS}
