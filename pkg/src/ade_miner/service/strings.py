"""Bilingual UI strings.  Only labels differ between languages; every number
in a response is computed once, before translation."""
from __future__ import annotations

UI_STRINGS: dict[str, dict[str, str]] = {
    "en": {
        "tab_all_events": "All events",
        "tab_serious_events": "Serious events",
        "tab_indication_summary": "Indication summary",
        "tab_treatment_summary": "Treatment summary",
        "tab_comparable_treatments": "Comparable treatments",
        "tab_trial_list": "List of trials",
        "set_direct": "Direct comparisons",
        "set_mixed": "Direct and indirect comparisons",
        "set_absolute": "Absolute values",
        "correction_none": "No correction applied (absolute values).",
        "correction_prefix": "Corrections applied: ",
        "correction_plain": "No correction was needed.",
        "group_size_weighting": "per-trial group-size weighting",
        "placebo_normalization": "placebo normalization",
        "direct_indirect_balancing": "direct/indirect balancing",
        "other": "other",
        "empty_result": "No matching trial.",
        "any_treatment": "any treatment",
    },
    "fr": {
        "tab_all_events": "Tous les événements",
        "tab_serious_events": "Événements graves",
        "tab_indication_summary": "Résumé des indications",
        "tab_treatment_summary": "Résumé des traitements",
        "tab_comparable_treatments": "Traitements comparables",
        "tab_trial_list": "Liste des essais",
        "set_direct": "Comparaisons directes",
        "set_mixed": "Comparaisons directes et indirectes",
        "set_absolute": "Valeurs absolues",
        "correction_none": "Aucune correction appliquée (valeurs absolues).",
        "correction_prefix": "Corrections appliquées : ",
        "correction_plain": "Aucune correction n'était nécessaire.",
        "group_size_weighting": "pondération par taille de groupe",
        "placebo_normalization": "normalisation par placebo",
        "direct_indirect_balancing": "équilibrage direct/indirect",
        "other": "autre",
        "empty_result": "Aucun essai correspondant.",
        "any_treatment": "tout traitement",
    },
}
