"""HTTP facade over an immutable dataset snapshot.

Handlers are stateless and read-only; replacing the dataset means building a
new app (or swapping ``app.state.dataset`` atomically).  All list-like parts
of a response are explicitly sorted so responses are deterministic for a
given snapshot.
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from ..glyph import (
    GlyphSpec,
    default_canvas_px,
    default_styles,
    render_flower_svg,
    render_overlay_svg,
    shared_reference_rate,
    table_color,
)
from ..model import Dataset
from ..normalization import AdeProfile, build_query_profiles, observation_counts
from ..query import GroupQuery, QuerySpec, ResultSets, execute
from ..taxonomy import NodeKind, Taxonomy
from .params import (
    ParsedSearch,
    SearchParamError,
    parse_search_params,
    serialize_query_spec,
)
from .strings import UI_STRINGS

_PETAL_ORDER = {cid: (s.petal_index if s.petal_index is not None else 12)
                for cid, s in default_styles().items()}


def _label(taxonomy: Taxonomy, node_id: str, lang: str) -> str:
    return taxonomy.node(node_id).label(lang)


def group_caption(gq: GroupQuery, taxonomy: Taxonomy, lang: str) -> str:
    """Human caption for one query group; a group with computed exclusions
    reads "other <class>" for brevity."""
    strings = UI_STRINGS[lang]
    if gq.ap_specs:
        if len(gq.ap_specs) == 1 and gq.excluded_ap_ids:
            base = _label(taxonomy, gq.ap_specs[0].ap_id, lang)
            return f"{strings['other']} {base}"
        parts = [_label(taxonomy, s.ap_id, lang) for s in gq.ap_specs]
        caption = " + ".join(parts)
        if gq.open_list:
            caption += ", etc"
        return caption
    if gq.indication_ids:
        inds = sorted(_label(taxonomy, i, lang) for i in gq.indication_ids)
        return f"{strings['any_treatment']} ({', '.join(inds)})"
    types = sorted(_label(taxonomy, t, lang) for t in gq.trial_type_ids)
    return ", ".join(types)


def profile_json(profile: AdeProfile, ds: Dataset, lang: str) -> dict:
    taxonomy = ds.taxonomy
    categories = {
        cid: {
            "label": _label(taxonomy, cid, lang),
            "total": rates.total,
            "serious": rates.serious,
        }
        for cid, rates in sorted(profile.categories.items())
    }
    terms = {}
    for key, rates in sorted(profile.terms.items()):
        entry = ds.term_dictionary.get(key)
        terms[key] = {
            "label": entry.label if entry else key,
            "total": rates.total,
            "serious": rates.serious,
            "category_ids": list(rates.category_ids),
        }
    return {
        "categories": categories,
        "terms": terms,
        "n_trials": profile.n_trials,
        "effective_patients": profile.effective_patients,
        "overall_rate": profile.overall_rate,
        "overall_serious_rate": profile.overall_serious_rate,
    }


def _correction_line(corrections: tuple[str, ...], kind: str, lang: str) -> str:
    strings = UI_STRINGS[lang]
    if kind == "absolute":
        return strings["correction_none"]
    if not corrections:
        return strings["correction_plain"]
    parts = [strings[c] for c in corrections]
    return strings["correction_prefix"] + "; ".join(parts) + "."


def _matched_by_kind(rs: ResultSets, kind: str):
    if kind == "direct":
        return [m for ms in rs.direct.values() for m in ms]
    if kind == "mixed":
        return [m for ms in rs.direct_indirect.values() for m in ms]
    return list(rs.absolute)


def _event_tables(
    ds: Dataset, profiles: list, lang: str, serious_only: bool
) -> list[dict]:
    rows = []
    seen: set[tuple[str, str]] = set()
    for qp in profiles:
        for term_key, rates in qp.profile.terms.items():
            for cid in rates.category_ids:
                seen.add((term_key, cid))
    for term_key, cid in seen:
        term = ds.term_dictionary[term_key]
        totals = []
        serious = []
        for qp in profiles:
            rates = qp.profile.terms.get(term_key)
            totals.append(rates.total if rates else 0.0)
            serious.append(rates.serious if rates else 0.0)
        values = serious if serious_only else totals
        if serious_only and not any(v > 0 for v in values):
            continue
        rows.append(
            {
                "category_id": cid,
                "category_label": _label(ds.taxonomy, cid, lang),
                "term": term_key,
                "label": term.label,
                "meddra_code": term.meddra_code,
                "rates": values,
                "serious_rates": serious,
                "colors": [table_color(max(v, 0.0)) for v in values],
            }
        )
    rows.sort(
        key=lambda r: (_PETAL_ORDER.get(r["category_id"], 99),
                       -max(r["rates"]), r["term"])
    )
    return rows


def _frequency_tab(
    ds: Dataset, ids_by_trial: dict[str, set[str]], lang: str
) -> list[dict]:
    counts: dict[str, set[str]] = {}
    for trial_id, ids in ids_by_trial.items():
        for node_id in ids:
            counts.setdefault(node_id, set()).add(trial_id)
    rows = [
        {
            "id": node_id,
            "label": _label(ds.taxonomy, node_id, lang),
            "n_trials": len(trials),
        }
        for node_id, trials in counts.items()
    ]
    rows.sort(key=lambda r: (-r["n_trials"], r["label"]))
    return rows


def build_search_response(ds: Dataset, parsed: ParsedSearch) -> dict:
    taxonomy = ds.taxonomy
    lang = parsed.lang
    strings = UI_STRINGS[lang]
    qs = parsed.spec

    rs = execute(ds, qs, include_titration=parsed.include_titration)
    profiles = build_query_profiles(ds, qs, rs, parsed.kind)
    matched = _matched_by_kind(rs, parsed.kind)
    empty = not matched

    reference = shared_reference_rate([qp.profile for qp in profiles])
    canvas = default_canvas_px(len(profiles))
    styles = default_styles()
    specs = [
        GlyphSpec(
            profile=qp.profile,
            reference_rate=reference,
            canvas_px=canvas,
            caption=group_caption(qs.groups[qp.query_index], taxonomy, lang),
        )
        for qp in profiles
    ]
    svgs = []
    for i, spec in enumerate(specs):
        if parsed.overlay is not None and 0 <= parsed.overlay < len(specs) and parsed.overlay != i:
            svgs.append(render_overlay_svg(specs[parsed.overlay], spec, styles))
        else:
            svgs.append(render_flower_svg(spec, styles))

    groups_payload = [
        {
            "query_index": qp.query_index,
            "caption": spec.caption,
            "profile": profile_json(qp.profile, ds, lang),
            "svg": svg,
            "corrections": list(qp.corrections),
            "correction_line": _correction_line(qp.corrections, parsed.kind, lang),
        }
        for qp, spec, svg in zip(profiles, specs, svgs)
    ]

    # Tab data is computed over the matched groups of the current result set.
    indications_by_trial: dict[str, set[str]] = {}
    treatments_by_trial: dict[str, set[str]] = {}
    matched_keys: set[tuple[str, int, str]] = set()
    trial_periods: dict[str, set[int]] = {}
    for m in matched:
        group = ds.trials[m.trial_id].group(m.period_index, m.group_id)
        matched_keys.add((m.trial_id, m.period_index, m.group_id))
        trial_periods.setdefault(m.trial_id, set()).add(m.period_index)
        indications_by_trial.setdefault(m.trial_id, set()).update(group.indication_ids)
        treatments_by_trial.setdefault(m.trial_id, set()).update(
            t.active_principle_id for t in group.treatments
        )

    comparators_by_trial: dict[str, set[str]] = {}
    for trial_id, period_indexes in trial_periods.items():
        trial = ds.trials[trial_id]
        for pi in period_indexes:
            for group in trial.periods[pi].groups:
                if (trial_id, pi, group.id) in matched_keys:
                    continue
                comparators_by_trial.setdefault(trial_id, set()).update(
                    t.active_principle_id for t in group.treatments
                )

    ap_queried = any(g.ap_specs for g in qs.groups)
    tabs: dict[str, dict] = {
        "all_events": {
            "title": strings["tab_all_events"],
            "rows": _event_tables(ds, profiles, lang, serious_only=False),
        },
        "serious_events": {
            "title": strings["tab_serious_events"],
            "rows": _event_tables(ds, profiles, lang, serious_only=True),
        },
        "indication_summary": {
            "title": strings["tab_indication_summary"],
            "rows": _frequency_tab(ds, indications_by_trial, lang),
        },
    }
    if ap_queried:
        tabs["comparable_treatments"] = {
            "title": strings["tab_comparable_treatments"],
            "rows": _frequency_tab(ds, comparators_by_trial, lang),
        }
    else:
        tabs["treatment_summary"] = {
            "title": strings["tab_treatment_summary"],
            "rows": _frequency_tab(ds, treatments_by_trial, lang),
        }

    # Trial list: exclusions lifted so excluded trials stay listed, unchecked.
    unfiltered = execute(
        ds,
        QuerySpec(groups=qs.groups, excluded_trial_ids=frozenset()),
        include_titration=parsed.include_titration,
    )
    counts_index = observation_counts(ds)
    trial_rows = []
    all_matched = _matched_by_kind(unfiltered, parsed.kind)
    by_trial: dict[str, list] = {}
    for m in all_matched:
        by_trial.setdefault(m.trial_id, []).append(m)
    for trial_id in sorted(by_trial):
        trial = ds.trials[trial_id]
        rates = []
        for qi in range(len(qs.groups)):
            events = 0.0
            patients = 0
            for m in by_trial[trial_id]:
                if m.query_index != qi:
                    continue
                group = trial.group(m.period_index, m.group_id)
                patients += group.n_patients
                events += sum(
                    counts_index.get((m.trial_id, m.period_index, m.group_id), {}).values()
                )
            rates.append(events / patients if patients else None)
        trial_rows.append(
            {
                "trial_id": trial_id,
                "title": trial.title,
                "rates": rates,
                "included": trial_id not in qs.excluded_trial_ids,
            }
        )
    tabs["trial_list"] = {"title": strings["tab_trial_list"], "rows": trial_rows}

    return {
        "result_set_kind": parsed.kind,
        "result_set_label": strings[f"set_{parsed.kind}"],
        "lang": lang,
        "tab": parsed.tab,
        "empty": empty,
        "empty_label": strings["empty_result"] if empty else "",
        "reference_rate": reference,
        "n_trials": len({m.trial_id for m in matched}),
        "groups": groups_payload,
        "tabs": tabs,
        "url": serialize_query_spec(parsed),
    }


def trial_detail(ds: Dataset, trial_id: str, lang: str) -> dict | None:
    trial = ds.trials.get(trial_id)
    if trial is None:
        return None
    counts_index = observation_counts(ds)
    periods = []
    for pi, period in enumerate(trial.periods):
        groups = []
        for group in period.groups:
            events = []
            for (t, p, g), counts in sorted(counts_index.items()):
                if (t, p, g) != (trial_id, pi, group.id):
                    continue
                for (term_key, serious), count in sorted(counts.items()):
                    term = ds.term_dictionary[term_key]
                    events.append(
                        {
                            "term": term_key,
                            "label": term.label,
                            "soc": term.soc,
                            "category_ids": sorted(term.category_ids),
                            "serious": serious,
                            "count": count,
                            "rate": count / group.n_patients,
                        }
                    )
            groups.append(
                {
                    "id": group.id,
                    "label": group.label,
                    "n_patients": group.n_patients,
                    "indication_ids": sorted(group.indication_ids),
                    "indications": [
                        _label(ds.taxonomy, i, lang)
                        for i in sorted(group.indication_ids)
                    ],
                    "treatments": [
                        {
                            "ap_id": t.active_principle_id,
                            "ap_label": _label(ds.taxonomy, t.active_principle_id, lang),
                            "release": t.release.value,
                            "route": t.route.value,
                            "dose": (
                                {
                                    "min": t.dose_range.min,
                                    "max": t.dose_range.max,
                                    "unit": t.dose_range.unit,
                                }
                                if t.dose_range
                                else None
                            ),
                            "intakes": (
                                {"min": t.intakes_per_day.min, "max": t.intakes_per_day.max}
                                if t.intakes_per_day
                                else None
                            ),
                        }
                        for t in group.treatments
                    ],
                    "events": events,
                }
            )
        periods.append({"kind": period.kind.value, "groups": groups})
    return {
        "trial_id": trial.id,
        "title": trial.title,
        "completion_date": trial.completion_date.isoformat(),
        "trial_type_ids": sorted(trial.trial_type_ids),
        "periods": periods,
    }


_FALLBACK_INDEX = """<!doctype html>
<html><head><meta charset="utf-8"><title>ADE miner</title></head>
<body><h1>ADE miner</h1>
<p>The web UI assets are not installed. The JSON API is live:</p>
<ul>
<li><code>/api/search?group_1_ap=...</code></li>
<li><code>/api/autocomplete?kind=active_principle&amp;q=ib</code></li>
<li><code>/api/taxonomy?kind=indication</code></li>
<li><code>/api/trials/{id}</code></li>
</ul></body></html>
"""


def create_app(dataset: Dataset, assets_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="ade-miner", docs_url=None, redoc_url=None)
    app.state.dataset = dataset

    @app.exception_handler(SearchParamError)
    async def _param_error(request: Request, exc: SearchParamError):
        return JSONResponse(
            status_code=400, content={"error": str(exc), "param": exc.param}
        )

    @app.get("/healthz")
    async def healthz():
        return JSONResponse(content="ok")

    @app.get("/api/search")
    async def search(request: Request):
        ds: Dataset = app.state.dataset
        parsed = parse_search_params(dict(request.query_params), ds.taxonomy)
        return build_search_response(ds, parsed)

    @app.get("/api/autocomplete")
    async def autocomplete(
        kind: str, q: str = "", lang: str = "en", limit: int = 10
    ):
        ds: Dataset = app.state.dataset
        try:
            node_kind = NodeKind(kind)
        except ValueError:
            raise SearchParamError("kind", f"unknown kind {kind!r}") from None
        if lang not in ("en", "fr"):
            raise SearchParamError("lang", f"unsupported language {lang!r}")
        if limit < 1:
            raise SearchParamError("limit", "limit must be >= 1")
        results = ds.taxonomy.autocomplete(q, node_kind, lang, limit)
        return [{"id": nid, "label": label} for nid, label in results]

    @app.get("/api/taxonomy")
    async def taxonomy_tree(kind: str, lang: str = "en"):
        ds: Dataset = app.state.dataset
        try:
            node_kind = NodeKind(kind)
        except ValueError:
            raise SearchParamError("kind", f"unknown kind {kind!r}") from None
        nodes = []
        for nid in sorted(ds.taxonomy.ids_of_kind(node_kind)):
            node = ds.taxonomy.node(nid)
            nodes.append(
                {
                    "id": nid,
                    "label": node.label(lang),
                    "labels": dict(sorted(node.labels.items())),
                    "parents": sorted(node.parents),
                }
            )
        return {"kind": kind, "nodes": nodes}

    @app.get("/api/trials/{trial_id}")
    async def trial(trial_id: str, lang: str = "en"):
        ds: Dataset = app.state.dataset
        if lang not in ("en", "fr"):
            raise SearchParamError("lang", f"unsupported language {lang!r}")
        detail = trial_detail(ds, trial_id, lang)
        if detail is None:
            return JSONResponse(
                status_code=404, content={"error": f"unknown trial {trial_id!r}"}
            )
        return detail

    if assets_dir is not None and Path(assets_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(assets_dir), html=True), name="webapp")
    else:

        @app.get("/", response_class=HTMLResponse)
        async def index():
            return _FALLBACK_INDEX

    return app
