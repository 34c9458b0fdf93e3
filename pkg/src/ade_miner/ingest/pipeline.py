"""End-to-end ingestion: parsed registry files plus a curation CSV become a
validated Dataset.

The curation file is the source of truth for group membership, periods,
patient counts, indications and treatments; the XML contributes trial
identity and event rows.  Groups absent from the curation file are dropped
(with their events), mirroring the manual decision to keep only drug-treated
groups.
"""
from __future__ import annotations

import logging
from pathlib import Path

from ..model import (
    AdeObservation,
    AdeTerm,
    ClinicalTrial,
    Dataset,
    DrugTreatment,
    ModelError,
    PatientGroup,
    Period,
    PeriodKind,
    PERIOD_ORDER,
    assemble_dataset,
    normalize_term_label,
)
from ..taxonomy import Taxonomy, load_taxonomy
from .curation import CurationRow, effective_rows, load_curation_csv
from .terms import default_soc_categories, load_term_dictionary, map_ade_term
from .xml_parser import ParsedTrial, parse_registry_xml

log = logging.getLogger("ade_miner")


def build_dataset(
    parsed_trials: list[ParsedTrial],
    curation_rows: list[CurationRow],
    taxonomy: Taxonomy,
    term_dictionary: dict[str, AdeTerm],
    soc_table: dict[str, frozenset[str]] | None = None,
) -> Dataset:
    if soc_table is None:
        soc_table = default_soc_categories()
    rows = effective_rows(curation_rows)

    parsed_by_id = {p.trial_id: p for p in parsed_trials}
    rows_by_trial: dict[str, list[CurationRow]] = {}
    for row in rows:
        rows_by_trial.setdefault(row.trial_id, []).append(row)

    for trial_id in rows_by_trial:
        if trial_id not in parsed_by_id:
            raise ModelError(f"curation references unknown trial {trial_id!r}")

    trials: list[ClinicalTrial] = []
    observations: list[AdeObservation] = []
    dictionary: dict[str, AdeTerm] = {}

    for trial_id in sorted(rows_by_trial):
        parsed = parsed_by_id[trial_id]
        declared = {g.id for g in parsed.groups}
        trial_rows = rows_by_trial[trial_id]

        group_rows: dict[str, list[CurationRow]] = {}
        for row in trial_rows:
            if row.group_id not in declared:
                raise ModelError(
                    f"curation references unknown group {row.group_id!r} "
                    f"in trial {trial_id!r}"
                )
            group_rows.setdefault(row.group_id, []).append(row)

        dropped = declared - set(group_rows)
        if dropped:
            log.warning(
                "trial %s: dropping uncurated groups %s", trial_id, sorted(dropped)
            )

        by_period: dict[str, list[PatientGroup]] = {}
        group_period: dict[str, str] = {}
        for gid in sorted(group_rows):
            rows_for_group = group_rows[gid]
            head = rows_for_group[0]
            for row in rows_for_group[1:]:
                if (row.period_kind, row.n_patients) != (head.period_kind, head.n_patients):
                    raise ModelError(
                        f"group {gid!r} in trial {trial_id!r}: inconsistent "
                        f"period or patient count across treatment rows"
                    )
            treatments = tuple(
                DrugTreatment(
                    active_principle_id=row.ap_id,
                    release=row.release,
                    route=row.route,
                    dose_range=row.dose_range(),
                    intakes_per_day=row.intakes_range(),
                )
                for row in rows_for_group
                if row.ap_id
            )
            if not treatments:
                raise ModelError(
                    f"group {gid!r} in trial {trial_id!r}: no active principle curated"
                )
            indications = frozenset(
                i for row in rows_for_group for i in row.indication_ids
            )
            group = PatientGroup(
                id=gid,
                label=head.group_label,
                n_patients=head.n_patients,
                treatments=treatments,
                indication_ids=indications,
            )
            by_period.setdefault(head.period_kind.value, []).append(group)
            group_period[gid] = head.period_kind.value

        period_kinds = sorted(by_period, key=lambda k: PERIOD_ORDER[PeriodKind(k)])
        periods = tuple(
            Period(kind=PeriodKind(kind), groups=tuple(by_period[kind]))
            for kind in period_kinds
        )
        period_index = {kind: i for i, kind in enumerate(period_kinds)}
        trials.append(
            ClinicalTrial(
                id=trial_id,
                title=parsed.title,
                completion_date=parsed.completion_date,
                trial_type_ids=frozenset(),
                periods=periods,
            )
        )

        for event in parsed.events:
            if event.group_id not in group_period:
                continue
            term = map_ade_term(event.label, event.soc, term_dictionary, soc_table)
            key = normalize_term_label(term.label)
            existing = dictionary.get(key)
            if existing is not None and existing != term:
                raise ModelError(f"conflicting term definitions for {key!r}")
            dictionary[key] = term
            observations.append(
                AdeObservation(
                    trial_id=trial_id,
                    period_index=period_index[group_period[event.group_id]],
                    group_id=event.group_id,
                    term_label=key,
                    serious=event.serious,
                    event_count=event.count,
                )
            )

    return assemble_dataset(taxonomy, trials, observations, dictionary)


def ingest_directory(
    xml_dir: str | Path,
    curation_path: str | Path,
    taxonomy_path: str | Path,
    terms_path: str | Path,
    soc_path: str | Path | None = None,
) -> Dataset:
    """File-level wrapper for the ingest CLI."""
    taxonomy = load_taxonomy(Path(taxonomy_path).read_text(encoding="utf-8"))
    term_dictionary = load_term_dictionary(Path(terms_path).read_text(encoding="utf-8"))
    soc_table = None
    if soc_path is not None:
        from .terms import load_soc_categories

        soc_table = load_soc_categories(Path(soc_path).read_text(encoding="utf-8"))
    parsed = [
        parse_registry_xml(path.read_text(encoding="utf-8"))
        for path in sorted(Path(xml_dir).glob("*.xml"))
    ]
    curation = load_curation_csv(
        Path(curation_path).read_text(encoding="utf-8"), taxonomy
    )
    return build_dataset(parsed, curation, taxonomy, term_dictionary, soc_table)
