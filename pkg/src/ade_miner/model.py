"""In-memory data model for trials, periods, groups, treatments and ADE
observations, plus dataset assembly and validation.

A Dataset is immutable after assembly: readers may share it freely and a new
ingest builds a fresh Dataset that is swapped in atomically.
"""
from __future__ import annotations

import datetime
import logging
from dataclasses import dataclass
from enum import Enum

from .taxonomy import NodeKind, Taxonomy

log = logging.getLogger("ade_miner")


class PeriodKind(str, Enum):
    SINGLE = "single"
    TITRATION = "titration"
    MAINTENANCE = "maintenance"
    CONTINUATION = "continuation"


#: Canonical ordering of periods within a trial (titration precedes the
#: randomized phases it feeds).
PERIOD_ORDER = {
    PeriodKind.TITRATION: 0,
    PeriodKind.SINGLE: 1,
    PeriodKind.MAINTENANCE: 2,
    PeriodKind.CONTINUATION: 3,
}


class Release(str, Enum):
    IMMEDIATE = "immediate"
    MODIFIED = "modified"
    UNSPECIFIED = "unspecified"


class Route(str, Enum):
    ORAL = "oral"
    INTRAVENOUS = "intravenous"
    SUBCUTANEOUS = "subcutaneous"
    TRANSDERMAL = "transdermal"
    TOPICAL = "topical"
    INTRAMUSCULAR = "intramuscular"
    RECTAL = "rectal"
    NASAL = "nasal"
    UNSPECIFIED = "unspecified"


class ModelError(ValueError):
    """Raised when a domain value or dataset violates an invariant."""


@dataclass(frozen=True)
class DoseRange:
    """Dose expressed as a min/max range with a free-text unit.

    Units are never converted; matching elsewhere requires exact unit
    equality, because silent unit algebra risks clinical error.
    """

    min: float
    max: float
    unit: str

    def __post_init__(self):
        if self.min > self.max:
            raise ModelError(f"dose range min {self.min} > max {self.max}")
        if not self.unit:
            raise ModelError("dose range requires a unit")

    def intersects(self, other: "DoseRange") -> bool:
        if self.unit != other.unit:
            return False
        return self.min <= other.max and other.min <= self.max


@dataclass(frozen=True)
class IntakeRange:
    min: float
    max: float

    def __post_init__(self):
        if self.min > self.max:
            raise ModelError(f"intake range min {self.min} > max {self.max}")

    def intersects(self, other: "IntakeRange") -> bool:
        return self.min <= other.max and other.min <= self.max


@dataclass(frozen=True)
class DrugTreatment:
    active_principle_id: str
    release: Release = Release.UNSPECIFIED
    route: Route = Route.UNSPECIFIED
    dose_range: DoseRange | None = None
    intakes_per_day: IntakeRange | None = None


@dataclass(frozen=True)
class PatientGroup:
    """A group of similar patients receiving the same treatment(s) for the
    same indication(s).  ``placebo`` groups are ordinary groups whose
    treatment's active principle is the placebo taxonomy node."""

    id: str
    label: str
    n_patients: int
    treatments: tuple[DrugTreatment, ...]
    indication_ids: frozenset[str]

    def __post_init__(self):
        if self.n_patients < 1:
            raise ModelError(f"group {self.id!r}: n_patients must be >= 1")
        if not self.treatments:
            raise ModelError(f"group {self.id!r}: at least one treatment required")
        if not self.indication_ids:
            raise ModelError(f"group {self.id!r}: at least one indication required")


@dataclass(frozen=True)
class Period:
    kind: PeriodKind
    groups: tuple[PatientGroup, ...]

    def __post_init__(self):
        if not self.groups:
            raise ModelError("period must contain at least one group")


@dataclass(frozen=True)
class ClinicalTrial:
    id: str
    title: str
    completion_date: datetime.date
    trial_type_ids: frozenset[str]
    periods: tuple[Period, ...]

    def __post_init__(self):
        if not self.periods:
            raise ModelError(f"trial {self.id!r}: at least one period required")

    def group(self, period_index: int, group_id: str) -> PatientGroup:
        for g in self.periods[period_index].groups:
            if g.id == group_id:
                return g
        raise KeyError(group_id)


@dataclass(frozen=True)
class AdeTerm:
    """A MedDRA-anchored event term.  ``meddra_code`` is None for terms that
    only resolved to their System Organ Class."""

    label: str
    meddra_code: str | None
    soc: str
    category_ids: frozenset[str]

    def __post_init__(self):
        if not 1 <= len(self.category_ids) <= 2:
            raise ModelError(
                f"term {self.label!r}: needs 1 or 2 categories, got {len(self.category_ids)}"
            )


@dataclass(frozen=True)
class AdeObservation:
    """Event counts for one term at one seriousness level in one group.

    ``term_label`` is the normalized key into the dataset term dictionary.
    """

    trial_id: str
    period_index: int
    group_id: str
    term_label: str
    serious: bool
    event_count: int

    def __post_init__(self):
        if self.event_count < 0:
            raise ModelError(
                f"observation {self.trial_id}/{self.group_id}/{self.term_label}: "
                f"negative event count"
            )


def normalize_term_label(label: str) -> str:
    """Case-insensitive, whitespace-collapsed term key."""
    return " ".join(label.split()).lower()


@dataclass
class Dataset:
    taxonomy: Taxonomy
    trials: dict[str, ClinicalTrial]
    observations: tuple[AdeObservation, ...]
    term_dictionary: dict[str, AdeTerm]

    def term(self, term_label: str) -> AdeTerm:
        return self.term_dictionary[term_label]

    def category_ids(self) -> frozenset[str]:
        return self.taxonomy.ids_of_kind(NodeKind.ADE_CATEGORY)


@dataclass(frozen=True)
class DatasetSummary:
    trials: int
    groups: int
    patients: int
    titration_groups: int
    titration_patients: int
    observations: int
    events: int
    distinct_terms: int
    mapped_terms: int

    @property
    def mapped_fraction(self) -> float:
        if self.distinct_terms == 0:
            return 0.0
        return self.mapped_terms / self.distinct_terms


class AssemblyError(ModelError):
    """Referential-integrity failure while assembling a dataset."""


def assemble_dataset(
    taxonomy: Taxonomy,
    trials: list[ClinicalTrial],
    observations: list[AdeObservation],
    term_dictionary: dict[str, AdeTerm],
) -> Dataset:
    """Validate referential integrity and build an immutable Dataset.

    Duplicate (trial, period, group, term, serious) observations are merged
    by summing their counts, with a warning: registries sometimes split one
    term across sub-rows and summation is the only lossless merge.
    """
    by_id: dict[str, ClinicalTrial] = {}
    for trial in trials:
        if trial.id in by_id:
            raise AssemblyError(f"duplicate trial id {trial.id!r}")
        by_id[trial.id] = trial

    ap_ids = taxonomy.ids_of_kind(NodeKind.ACTIVE_PRINCIPLE)
    ind_ids = taxonomy.ids_of_kind(NodeKind.INDICATION)
    type_ids = taxonomy.ids_of_kind(NodeKind.TRIAL_TYPE)
    cat_ids = taxonomy.ids_of_kind(NodeKind.ADE_CATEGORY)

    for trial in by_id.values():
        for tid in trial.trial_type_ids:
            if tid not in type_ids:
                raise AssemblyError(f"trial {trial.id!r}: unknown trial type {tid!r}")
        seen_groups: set[str] = set()
        for period in trial.periods:
            for group in period.groups:
                if group.id in seen_groups:
                    raise AssemblyError(
                        f"trial {trial.id!r}: duplicate group id {group.id!r}"
                    )
                seen_groups.add(group.id)
                for ind in group.indication_ids:
                    if ind not in ind_ids:
                        raise AssemblyError(
                            f"group {group.id!r}: unknown indication {ind!r}"
                        )
                for treatment in group.treatments:
                    if treatment.active_principle_id not in ap_ids:
                        raise AssemblyError(
                            f"group {group.id!r}: unknown active principle "
                            f"{treatment.active_principle_id!r}"
                        )

    for label, term in term_dictionary.items():
        if label != normalize_term_label(label):
            raise AssemblyError(f"term key {label!r} is not normalized")
        for cid in term.category_ids:
            if cid not in cat_ids:
                raise AssemblyError(f"term {label!r}: unknown category {cid!r}")

    merged: dict[tuple, int] = {}
    for obs in observations:
        trial = by_id.get(obs.trial_id)
        if trial is None:
            raise AssemblyError(f"observation references unknown trial {obs.trial_id!r}")
        if not 0 <= obs.period_index < len(trial.periods):
            raise AssemblyError(
                f"observation references unknown period {obs.period_index} "
                f"of trial {obs.trial_id!r}"
            )
        period = trial.periods[obs.period_index]
        if not any(g.id == obs.group_id for g in period.groups):
            raise AssemblyError(
                f"observation references unknown group {obs.group_id!r} "
                f"in trial {obs.trial_id!r}"
            )
        if obs.term_label not in term_dictionary:
            raise AssemblyError(
                f"observation references unknown term {obs.term_label!r}"
            )
        key = (obs.trial_id, obs.period_index, obs.group_id, obs.term_label, obs.serious)
        if key in merged:
            log.warning(
                "merging duplicate observation %s by summing counts", key
            )
        merged[key] = merged.get(key, 0) + obs.event_count

    canonical = tuple(
        AdeObservation(
            trial_id=k[0], period_index=k[1], group_id=k[2],
            term_label=k[3], serious=k[4], event_count=count,
        )
        for k, count in sorted(merged.items())
    )
    return Dataset(
        taxonomy=taxonomy,
        trials=dict(sorted(by_id.items())),
        observations=canonical,
        term_dictionary=dict(sorted(term_dictionary.items())),
    )


def dataset_summary(ds: Dataset) -> DatasetSummary:
    """Exact counts over the dataset.

    Patients are counted per period; the headline count covers non-titration
    periods and titration groups are reported separately, because events
    observed during titration are never mixed with maintenance events.
    """
    groups = patients = tit_groups = tit_patients = 0
    for trial in ds.trials.values():
        for period in trial.periods:
            for group in period.groups:
                groups += 1
                if period.kind is PeriodKind.TITRATION:
                    tit_groups += 1
                    tit_patients += group.n_patients
                else:
                    patients += group.n_patients
    seen_terms = {obs.term_label for obs in ds.observations}
    mapped = sum(
        1 for label in seen_terms if ds.term_dictionary[label].meddra_code is not None
    )
    return DatasetSummary(
        trials=len(ds.trials),
        groups=groups,
        patients=patients,
        titration_groups=tit_groups,
        titration_patients=tit_patients,
        observations=len(ds.observations),
        events=sum(obs.event_count for obs in ds.observations),
        distinct_terms=len(seen_terms),
        mapped_terms=mapped,
    )
