"""Event-label handling: the user-supplied term dictionary and the System
Organ Class fallback used when a label has no dictionary entry.
"""
from __future__ import annotations

from importlib.resources import files

from ..model import AdeTerm, ModelError, normalize_term_label

#: The 27 MedDRA top-level System Organ Classes.
SOC_NAMES = frozenset(
    {
        "Blood and lymphatic system disorders",
        "Cardiac disorders",
        "Congenital, familial and genetic disorders",
        "Ear and labyrinth disorders",
        "Endocrine disorders",
        "Eye disorders",
        "Gastrointestinal disorders",
        "General disorders and administration site conditions",
        "Hepatobiliary disorders",
        "Immune system disorders",
        "Infections and infestations",
        "Injury, poisoning and procedural complications",
        "Investigations",
        "Metabolism and nutrition disorders",
        "Musculoskeletal and connective tissue disorders",
        "Neoplasms benign, malignant and unspecified (incl cysts and polyps)",
        "Nervous system disorders",
        "Pregnancy, puerperium and perinatal conditions",
        "Product issues",
        "Psychiatric disorders",
        "Renal and urinary disorders",
        "Reproductive system and breast disorders",
        "Respiratory, thoracic and mediastinal disorders",
        "Skin and subcutaneous tissue disorders",
        "Social circumstances",
        "Surgical and medical procedures",
        "Vascular disorders",
    }
)


class TermFileError(ModelError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownSocError(ModelError):
    def __init__(self, label: str, soc: str):
        super().__init__(
            f"term {label!r} is not in the dictionary and its SOC {soc!r} is unknown"
        )


def _parse_pipe_file(text: str, n_fields: int, what: str) -> list[tuple[int, list[str]]]:
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != n_fields:
            raise TermFileError(
                line_no, f"{what}: expected {n_fields} '|'-separated fields"
            )
        rows.append((line_no, fields))
    return rows


def load_term_dictionary(text: str) -> dict[str, AdeTerm]:
    """Parse ``label|meddra_code|soc|category_id[;category_id]`` lines into a
    normalized-label keyed dictionary."""
    dictionary: dict[str, AdeTerm] = {}
    for line_no, (label, code, soc, cats) in (
        (n, f) for n, f in _parse_pipe_file(text, 4, "term dictionary")
    ):
        key = normalize_term_label(label)
        if key in dictionary:
            raise TermFileError(line_no, f"duplicate term {label!r}")
        category_ids = frozenset(c.strip() for c in cats.split(";") if c.strip())
        if not category_ids:
            raise TermFileError(line_no, f"term {label!r} has no category")
        dictionary[key] = AdeTerm(
            label=label, meddra_code=code or None, soc=soc, category_ids=category_ids
        )
    return dictionary


def load_soc_categories(text: str) -> dict[str, frozenset[str]]:
    """Parse ``soc_name|category_id[;category_id]`` lines."""
    table: dict[str, frozenset[str]] = {}
    for line_no, (soc, cats) in (
        (n, f) for n, f in _parse_pipe_file(text, 2, "SOC mapping")
    ):
        category_ids = frozenset(c.strip() for c in cats.split(";") if c.strip())
        if not category_ids:
            raise TermFileError(line_no, f"SOC {soc!r} has no category")
        table[soc] = category_ids
    return table


def default_soc_categories() -> dict[str, frozenset[str]]:
    text = files("ade_miner.data").joinpath("soc_categories.txt").read_text("utf-8")
    return load_soc_categories(text)


def map_ade_term(
    label: str,
    soc: str,
    dictionary: dict[str, AdeTerm],
    soc_table: dict[str, frozenset[str]] | None = None,
) -> AdeTerm:
    """Resolve an event label to a term.

    Exact case-insensitive, whitespace-normalized match against the
    dictionary; otherwise a SOC-level term whose categories come from the
    SOC table.  Total over every (label, valid SOC) input.
    """
    key = normalize_term_label(label)
    term = dictionary.get(key)
    if term is not None:
        return term
    if soc_table is None:
        soc_table = default_soc_categories()
    categories = soc_table.get(soc.strip())
    if categories is None:
        raise UnknownSocError(label, soc)
    return AdeTerm(
        label=" ".join(label.split()),
        meddra_code=None,
        soc=soc.strip(),
        category_ids=categories,
    )
