"""The search URL scheme.

Groups are numbered (``group_1_ap``, ``group_2_indication``, ...); principal
lists are comma-separated labels or ids, with the special trailing ``etc``
label marking an open list.  Per-principle fields (release, route, dose,
unit, intakes) align with the principal list by comma position.  Parsing and
serialization are mutual inverses over every representable query.
"""
from __future__ import annotations

import re
import urllib.parse
from dataclasses import dataclass

from ..model import DoseRange, IntakeRange, ModelError, Release, Route
from ..query import APSpec, GroupQuery, QuerySpec, compute_exclusions
from ..taxonomy import NodeKind, Taxonomy

RESULT_SET_KINDS = ("direct", "mixed", "absolute")

_GROUP_PARAM_RE = re.compile(
    r"^group_(\d+)_(ap|indication|trialtype|release|route|dose|unit|intakes)$"
)

_KIND_BY_FIELD = {
    "ap": NodeKind.ACTIVE_PRINCIPLE,
    "indication": NodeKind.INDICATION,
    "trialtype": NodeKind.TRIAL_TYPE,
}


class SearchParamError(ModelError):
    def __init__(self, param: str, message: str):
        super().__init__(f"{param}: {message}")
        self.param = param


@dataclass(frozen=True)
class ParsedSearch:
    spec: QuerySpec
    kind: str = "direct"
    tab: int = 0
    lang: str = "en"
    include_titration: bool = False
    overlay: int | None = None


def resolve_node(taxonomy: Taxonomy, kind: NodeKind, text: str, param: str) -> str:
    """Resolve an id or a display label (any language, case-insensitive)."""
    needle = text.strip()
    if needle in taxonomy.ids_of_kind(kind):
        return needle
    lowered = needle.lower()
    for node_id in sorted(taxonomy.ids_of_kind(kind)):
        node = taxonomy.node(node_id)
        if any(label.lower() == lowered for label in node.labels.values()):
            return node_id
    raise SearchParamError(param, f"cannot resolve {text!r}")


def _split_csv(value: str) -> list[str]:
    return [part.strip() for part in value.split(",")]


def _parse_range(value: str, param: str) -> tuple[float, float]:
    match = re.fullmatch(r"\s*(\d+(?:\.\d+)?)(?:\s*-\s*(\d+(?:\.\d+)?))?\s*", value)
    if not match:
        raise SearchParamError(param, f"malformed range {value!r}")
    low = float(match.group(1))
    high = float(match.group(2)) if match.group(2) else low
    if low > high:
        raise SearchParamError(param, f"range {value!r} has min above max")
    return low, high


def _positional(raw: str | None, n: int) -> list[str]:
    if raw is None:
        return [""] * n
    values = _split_csv(raw)
    values += [""] * (n - len(values))
    return values[:n]


def parse_search_params(
    params: str | dict[str, str], taxonomy: Taxonomy
) -> ParsedSearch:
    """Turn a query string (or pre-split mapping) into a validated query.

    Unresolvable labels and malformed ranges raise SearchParamError naming
    the offending parameter; the implicit more-specific-group exclusions are
    computed on the result.
    """
    if isinstance(params, str):
        pairs = urllib.parse.parse_qsl(params, keep_blank_values=True)
        mapping: dict[str, str] = {}
        for key, value in pairs:
            mapping[key] = value
    else:
        mapping = dict(params)

    grouped: dict[int, dict[str, str]] = {}
    for key, value in mapping.items():
        match = _GROUP_PARAM_RE.match(key)
        if match:
            grouped.setdefault(int(match.group(1)), {})[match.group(2)] = value

    if not grouped:
        raise SearchParamError("group_1_ap", "at least one group is required")

    groups: list[GroupQuery] = []
    for number in sorted(grouped):
        fields = grouped[number]
        prefix = f"group_{number}"

        def resolve_list(field_name: str) -> frozenset[str]:
            raw = fields.get(field_name, "")
            ids = set()
            for part in _split_csv(raw):
                if not part:
                    continue
                ids.add(
                    resolve_node(
                        taxonomy, _KIND_BY_FIELD[field_name], part,
                        f"{prefix}_{field_name}",
                    )
                )
            return frozenset(ids)

        indication_ids = resolve_list("indication")
        trial_type_ids = resolve_list("trialtype")

        ap_parts = [p for p in _split_csv(fields.get("ap", "")) if p]
        open_list = False
        if ap_parts and ap_parts[-1].lower() == "etc":
            open_list = True
            ap_parts = ap_parts[:-1]
        if "ap" in fields and fields["ap"].strip() and not ap_parts:
            raise SearchParamError(f"{prefix}_ap", "no active principle before 'etc'")

        n = len(ap_parts)
        releases = _positional(fields.get("release"), n)
        routes = _positional(fields.get("route"), n)
        doses = _positional(fields.get("dose"), n)
        units = _positional(fields.get("unit"), n)
        intakes = _positional(fields.get("intakes"), n)

        ap_specs = []
        for i, part in enumerate(ap_parts):
            ap_id = resolve_node(
                taxonomy, NodeKind.ACTIVE_PRINCIPLE, part, f"{prefix}_ap"
            )
            release = None
            if releases[i]:
                try:
                    release = Release(releases[i].lower())
                except ValueError:
                    raise SearchParamError(
                        f"{prefix}_release", f"unknown release {releases[i]!r}"
                    ) from None
            route = None
            if routes[i]:
                try:
                    route = Route(routes[i].lower())
                except ValueError:
                    raise SearchParamError(
                        f"{prefix}_route", f"unknown route {routes[i]!r}"
                    ) from None
            dose_range = None
            if doses[i]:
                low, high = _parse_range(doses[i], f"{prefix}_dose")
                if not units[i]:
                    raise SearchParamError(
                        f"{prefix}_unit", "dose requires a unit"
                    )
                dose_range = DoseRange(min=low, max=high, unit=units[i])
            intakes_range = None
            if intakes[i]:
                low, high = _parse_range(intakes[i], f"{prefix}_intakes")
                intakes_range = IntakeRange(min=low, max=high)
            ap_specs.append(
                APSpec(
                    ap_id=ap_id,
                    release=release,
                    route=route,
                    dose_range=dose_range,
                    intakes_range=intakes_range,
                    open_tail=open_list and i == n - 1,
                )
            )

        if not ap_specs and not indication_ids and not trial_type_ids:
            raise SearchParamError(
                f"{prefix}_ap", "group needs an active principle, indication or trial type"
            )
        groups.append(
            GroupQuery(
                trial_type_ids=trial_type_ids,
                indication_ids=indication_ids,
                ap_specs=tuple(ap_specs),
                open_list=open_list,
            )
        )

    excluded_trials = frozenset(
        t for t in _split_csv(mapping.get("exclude_trials", "")) if t
    )

    kind = mapping.get("set", "direct")
    if kind not in RESULT_SET_KINDS:
        raise SearchParamError("set", f"unknown result set {kind!r}")
    lang = mapping.get("lang", "en")
    if lang not in ("en", "fr"):
        raise SearchParamError("lang", f"unsupported language {lang!r}")
    tab_raw = mapping.get("tab", "0")
    try:
        tab = int(tab_raw)
    except ValueError:
        raise SearchParamError("tab", f"bad tab index {tab_raw!r}") from None
    overlay: int | None = None
    if mapping.get("overlay", "") != "":
        try:
            overlay = int(mapping["overlay"])
        except ValueError:
            raise SearchParamError("overlay", "bad overlay index") from None

    spec = QuerySpec(groups=tuple(groups), excluded_trial_ids=excluded_trials)
    spec = compute_exclusions(spec, taxonomy)
    return ParsedSearch(
        spec=spec,
        kind=kind,
        tab=tab,
        lang=lang,
        include_titration=mapping.get("include_titration", "") in ("1", "true"),
        overlay=overlay,
    )


def _format_number(value: float) -> str:
    return f"{value:g}"


def serialize_query_spec(
    parsed_or_spec: ParsedSearch | QuerySpec, defaults: bool = False
) -> str:
    """Canonical query string for a spec; the inverse of parsing.

    Computed exclusions are not serialized (they are recomputed on parse).
    """
    if isinstance(parsed_or_spec, ParsedSearch):
        spec = parsed_or_spec.spec
        extras = parsed_or_spec
    else:
        spec = parsed_or_spec
        extras = None

    pairs: list[tuple[str, str]] = []
    for number, gq in enumerate(spec.groups, start=1):
        prefix = f"group_{number}"
        if gq.ap_specs:
            ap_value = ",".join(s.ap_id for s in gq.ap_specs)
            if gq.open_list:
                ap_value += ",etc"
            pairs.append((f"{prefix}_ap", ap_value))

            def positional(getter) -> str:
                values = [getter(s) or "" for s in gq.ap_specs]
                while values and values[-1] == "":
                    values.pop()
                return ",".join(values)

            release = positional(lambda s: s.release.value if s.release else "")
            if release:
                pairs.append((f"{prefix}_release", release))
            route = positional(lambda s: s.route.value if s.route else "")
            if route:
                pairs.append((f"{prefix}_route", route))
            dose = positional(
                lambda s: (
                    _format_number(s.dose_range.min)
                    if s.dose_range and s.dose_range.min == s.dose_range.max
                    else f"{_format_number(s.dose_range.min)}-{_format_number(s.dose_range.max)}"
                )
                if s.dose_range
                else ""
            )
            if dose:
                pairs.append((f"{prefix}_dose", dose))
            unit = positional(lambda s: s.dose_range.unit if s.dose_range else "")
            if unit:
                pairs.append((f"{prefix}_unit", unit))
            intakes = positional(
                lambda s: (
                    _format_number(s.intakes_range.min)
                    if s.intakes_range and s.intakes_range.min == s.intakes_range.max
                    else f"{_format_number(s.intakes_range.min)}-{_format_number(s.intakes_range.max)}"
                )
                if s.intakes_range
                else ""
            )
            if intakes:
                pairs.append((f"{prefix}_intakes", intakes))
        if gq.indication_ids:
            pairs.append((f"{prefix}_indication", ",".join(sorted(gq.indication_ids))))
        if gq.trial_type_ids:
            pairs.append((f"{prefix}_trialtype", ",".join(sorted(gq.trial_type_ids))))

    if spec.excluded_trial_ids:
        pairs.append(("exclude_trials", ",".join(sorted(spec.excluded_trial_ids))))
    if extras is not None:
        if extras.kind != "direct" or defaults:
            pairs.append(("set", extras.kind))
        if extras.tab or defaults:
            pairs.append(("tab", str(extras.tab)))
        if extras.lang != "en" or defaults:
            pairs.append(("lang", extras.lang))
        if extras.include_titration:
            pairs.append(("include_titration", "1"))
        if extras.overlay is not None:
            pairs.append(("overlay", str(extras.overlay)))
    return urllib.parse.urlencode(pairs)
