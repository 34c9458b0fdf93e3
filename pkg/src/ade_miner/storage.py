"""Native on-disk dataset format: one directory holding ``taxonomy.txt`` plus
``trials.csv``, ``groups.csv``, ``treatments.csv``, ``observations.csv`` and
``terms.csv``.  Export followed by load reproduces the Dataset exactly.
"""
from __future__ import annotations

import csv
import datetime
from pathlib import Path

from .model import (
    AdeObservation,
    AdeTerm,
    ClinicalTrial,
    Dataset,
    DoseRange,
    DrugTreatment,
    IntakeRange,
    ModelError,
    PatientGroup,
    Period,
    PeriodKind,
    Release,
    Route,
    assemble_dataset,
)
from .taxonomy import load_taxonomy, serialize_taxonomy

TRIALS_COLUMNS = ["trial_id", "title", "completion_date", "trial_type_ids"]
GROUPS_COLUMNS = [
    "trial_id", "period_index", "period_kind", "group_id", "group_label",
    "n_patients", "indication_ids",
]
TREATMENTS_COLUMNS = [
    "trial_id", "period_index", "group_id", "ap_id", "release", "route",
    "dose_min", "dose_max", "dose_unit", "intakes_min", "intakes_max",
]
OBSERVATIONS_COLUMNS = [
    "trial_id", "period_index", "group_id", "term_label", "serious", "event_count",
]
TERMS_COLUMNS = ["label", "display_label", "meddra_code", "soc", "category_ids"]


def format_number(value: float) -> str:
    """Canonical numeral: integral floats drop the trailing ``.0``."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, columns: list[str], rows: list[list[str]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def export_dataset(ds: Dataset, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "taxonomy.txt").write_text(serialize_taxonomy(ds.taxonomy), encoding="utf-8")

    trial_rows, group_rows, treatment_rows = [], [], []
    for trial in ds.trials.values():
        trial_rows.append([
            trial.id,
            trial.title,
            trial.completion_date.isoformat(),
            ";".join(sorted(trial.trial_type_ids)),
        ])
        for pi, period in enumerate(trial.periods):
            for group in period.groups:
                group_rows.append([
                    trial.id, str(pi), period.kind.value, group.id, group.label,
                    str(group.n_patients), ";".join(sorted(group.indication_ids)),
                ])
                for t in group.treatments:
                    treatment_rows.append([
                        trial.id, str(pi), group.id, t.active_principle_id,
                        t.release.value, t.route.value,
                        format_number(t.dose_range.min) if t.dose_range else "",
                        format_number(t.dose_range.max) if t.dose_range else "",
                        t.dose_range.unit if t.dose_range else "",
                        format_number(t.intakes_per_day.min) if t.intakes_per_day else "",
                        format_number(t.intakes_per_day.max) if t.intakes_per_day else "",
                    ])
    _write_csv(out / "trials.csv", TRIALS_COLUMNS, trial_rows)
    _write_csv(out / "groups.csv", GROUPS_COLUMNS, group_rows)
    _write_csv(out / "treatments.csv", TREATMENTS_COLUMNS, treatment_rows)

    obs_rows = [
        [o.trial_id, str(o.period_index), o.group_id, o.term_label,
         "true" if o.serious else "false", str(o.event_count)]
        for o in ds.observations
    ]
    _write_csv(out / "observations.csv", OBSERVATIONS_COLUMNS, obs_rows)

    term_rows = [
        [key, term.label, term.meddra_code or "", term.soc,
         ";".join(sorted(term.category_ids))]
        for key, term in ds.term_dictionary.items()
    ]
    _write_csv(out / "terms.csv", TERMS_COLUMNS, term_rows)


class DatasetFormatError(ModelError):
    """A dataset directory file is missing or malformed."""


def _read_csv(path: Path, columns: list[str]) -> list[dict[str, str]]:
    if not path.exists():
        raise DatasetFormatError(f"missing dataset file {path.name}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != columns:
            raise DatasetFormatError(
                f"{path.name}: expected columns {columns}, got {reader.fieldnames}"
            )
        return list(reader)


def _parse_float(value: str, where: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise DatasetFormatError(f"{where}: bad number {value!r}") from None


def load_dataset(in_dir: str | Path) -> Dataset:
    """Load a dataset directory and re-run full assembly validation."""
    root = Path(in_dir)
    tax_path = root / "taxonomy.txt"
    if not tax_path.exists():
        raise DatasetFormatError("missing dataset file taxonomy.txt")
    taxonomy = load_taxonomy(tax_path.read_text(encoding="utf-8"))

    treatments: dict[tuple[str, int, str], list[DrugTreatment]] = {}
    for row in _read_csv(root / "treatments.csv", TREATMENTS_COLUMNS):
        where = f"treatments.csv {row['trial_id']}/{row['group_id']}"
        dose = None
        if row["dose_min"] or row["dose_max"] or row["dose_unit"]:
            dose = DoseRange(
                min=_parse_float(row["dose_min"], where),
                max=_parse_float(row["dose_max"], where),
                unit=row["dose_unit"],
            )
        intakes = None
        if row["intakes_min"] or row["intakes_max"]:
            intakes = IntakeRange(
                min=_parse_float(row["intakes_min"], where),
                max=_parse_float(row["intakes_max"], where),
            )
        key = (row["trial_id"], int(row["period_index"]), row["group_id"])
        treatments.setdefault(key, []).append(
            DrugTreatment(
                active_principle_id=row["ap_id"],
                release=Release(row["release"]),
                route=Route(row["route"]),
                dose_range=dose,
                intakes_per_day=intakes,
            )
        )

    groups: dict[str, dict[int, tuple[PeriodKind, list[PatientGroup]]]] = {}
    for row in _read_csv(root / "groups.csv", GROUPS_COLUMNS):
        pi = int(row["period_index"])
        key = (row["trial_id"], pi, row["group_id"])
        group = PatientGroup(
            id=row["group_id"],
            label=row["group_label"],
            n_patients=int(row["n_patients"]),
            treatments=tuple(treatments.get(key, ())),
            indication_ids=frozenset(
                i for i in row["indication_ids"].split(";") if i
            ),
        )
        periods = groups.setdefault(row["trial_id"], {})
        kind = PeriodKind(row["period_kind"])
        if pi in periods and periods[pi][0] is not kind:
            raise DatasetFormatError(
                f"groups.csv: trial {row['trial_id']!r} period {pi} has two kinds"
            )
        periods.setdefault(pi, (kind, []))[1].append(group)

    trials: list[ClinicalTrial] = []
    for row in _read_csv(root / "trials.csv", TRIALS_COLUMNS):
        trial_id = row["trial_id"]
        period_map = groups.get(trial_id, {})
        periods = tuple(
            Period(kind=period_map[pi][0], groups=tuple(period_map[pi][1]))
            for pi in sorted(period_map)
        )
        trials.append(
            ClinicalTrial(
                id=trial_id,
                title=row["title"],
                completion_date=datetime.date.fromisoformat(row["completion_date"]),
                trial_type_ids=frozenset(
                    t for t in row["trial_type_ids"].split(";") if t
                ),
                periods=periods,
            )
        )

    observations = [
        AdeObservation(
            trial_id=row["trial_id"],
            period_index=int(row["period_index"]),
            group_id=row["group_id"],
            term_label=row["term_label"],
            serious=row["serious"] == "true",
            event_count=int(row["event_count"]),
        )
        for row in _read_csv(root / "observations.csv", OBSERVATIONS_COLUMNS)
    ]

    term_dictionary = {
        row["label"]: AdeTerm(
            label=row["display_label"],
            meddra_code=row["meddra_code"] or None,
            soc=row["soc"],
            category_ids=frozenset(c for c in row["category_ids"].split(";") if c),
        )
        for row in _read_csv(root / "terms.csv", TERMS_COLUMNS)
    }

    return assemble_dataset(taxonomy, trials, observations, term_dictionary)
