"""Registry file parsing, regimen extraction, term mapping and curation."""
from .curation import (
    CURATION_COLUMNS,
    CurationError,
    CurationRow,
    effective_rows,
    export_curation_csv,
    load_curation_csv,
    prefill_rows,
    score_extraction,
)
from .pipeline import build_dataset, ingest_directory
from .regimen import RegimenExtraction, extract_regimen
from .terms import (
    SOC_NAMES,
    UnknownSocError,
    default_soc_categories,
    load_soc_categories,
    load_term_dictionary,
    map_ade_term,
)
from .xml_parser import ParsedTrial, RawEvent, RawGroup, XmlSchemaError, parse_registry_xml

__all__ = [
    "CURATION_COLUMNS",
    "CurationError",
    "CurationRow",
    "ParsedTrial",
    "RawEvent",
    "RawGroup",
    "RegimenExtraction",
    "SOC_NAMES",
    "UnknownSocError",
    "XmlSchemaError",
    "build_dataset",
    "default_soc_categories",
    "effective_rows",
    "export_curation_csv",
    "extract_regimen",
    "ingest_directory",
    "load_curation_csv",
    "load_soc_categories",
    "load_term_dictionary",
    "map_ade_term",
    "parse_registry_xml",
    "prefill_rows",
    "score_extraction",
]
