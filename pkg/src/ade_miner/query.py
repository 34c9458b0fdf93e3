"""Matches patient groups against taxonomy-level group queries and assembles
the three result sets: direct comparisons, direct + indirect comparisons via
placebo, and absolute values.

Queries are pure reads over an immutable Dataset snapshot.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .model import (
    ClinicalTrial,
    Dataset,
    DoseRange,
    IntakeRange,
    ModelError,
    PatientGroup,
    PeriodKind,
    Release,
    Route,
)
from .taxonomy import PLACEBO_ID, Taxonomy


@dataclass(frozen=True)
class APSpec:
    """One active-principle criterion of a group query.

    ``open_tail`` is set on the last criterion when the entered list ended
    with the special "etc" label.
    """

    ap_id: str
    release: Release | None = None
    route: Route | None = None
    dose_range: DoseRange | None = None
    intakes_range: IntakeRange | None = None
    open_tail: bool = False


@dataclass(frozen=True)
class GroupQuery:
    trial_type_ids: frozenset[str] = frozenset()
    indication_ids: frozenset[str] = frozenset()
    ap_specs: tuple[APSpec, ...] = ()
    open_list: bool = False
    excluded_ap_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class QuerySpec:
    groups: tuple[GroupQuery, ...]
    excluded_trial_ids: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.groups:
            raise ModelError("a query needs at least one group definition")


@dataclass(frozen=True)
class MatchedGroup:
    trial_id: str
    period_index: int
    group_id: str
    query_index: int


@dataclass(frozen=True)
class GroupRef:
    """Bare reference to a group, used for placebo companions."""

    trial_id: str
    period_index: int
    group_id: str


@dataclass(frozen=True)
class ResultSets:
    """The three result sets for one query.

    ``direct`` and ``direct_indirect`` are keyed by trial id; in the mixed
    set, ``indirect_trial_ids`` marks trials bridged through their placebo
    arm (listed per trial in ``placebo_companions``).  ``absolute`` is the
    flat list of every matching group.
    """

    direct: dict[str, tuple[MatchedGroup, ...]]
    direct_indirect: dict[str, tuple[MatchedGroup, ...]]
    placebo_companions: dict[str, tuple[GroupRef, ...]]
    indirect_trial_ids: frozenset[str]
    absolute: tuple[MatchedGroup, ...]


# -- single-group matching ----------------------------------------------------


def _subsumes_any(taxonomy: Taxonomy, queried: frozenset[str], held: frozenset[str]) -> bool:
    # Every queried class must subsume at least one of the held ids.
    for q in queried:
        if not any(taxonomy.is_descendant_or_self(h, q) for h in held):
            return False
    return True


def _treatment_satisfies(treatment, spec: APSpec, taxonomy: Taxonomy) -> bool:
    if not taxonomy.is_descendant_or_self(treatment.active_principle_id, spec.ap_id):
        return False
    if spec.release is not None and treatment.release is not spec.release:
        return False
    if spec.route is not None and treatment.route is not spec.route:
        return False
    if spec.dose_range is not None and treatment.dose_range is not None:
        if not treatment.dose_range.intersects(spec.dose_range):
            return False
    if spec.intakes_range is not None and treatment.intakes_per_day is not None:
        if not treatment.intakes_per_day.intersects(spec.intakes_range):
            return False
    return True


def _injective_match(compat: list[list[int]], n_targets: int, require_all_targets: bool) -> bool:
    # Backtracking assignment of specs to distinct treatments; lists are tiny.
    used = [False] * n_targets

    def place(i: int) -> bool:
        if i == len(compat):
            return not require_all_targets or all(used)
        for j in compat[i]:
            if not used[j]:
                used[j] = True
                if place(i + 1):
                    return True
                used[j] = False
        return False

    return place(0)


def match_group(
    group: PatientGroup,
    gq: GroupQuery,
    taxonomy: Taxonomy,
    trial_type_ids: frozenset[str] = frozenset(),
) -> bool:
    """True iff the group satisfies the query definition.

    Trial-type criteria apply to the enclosing trial, so its type ids are
    passed alongside the group.  Closed lists demand a perfect matching of
    treatments to criteria; open lists an injective matching of every
    criterion into the treatments, extra treatments unconstrained.  A group
    holding any treatment that descends from an excluded principle never
    matches.
    """
    if gq.trial_type_ids and not _subsumes_any(taxonomy, gq.trial_type_ids, trial_type_ids):
        return False
    if gq.indication_ids and not _subsumes_any(
        taxonomy, gq.indication_ids, group.indication_ids
    ):
        return False

    if gq.excluded_ap_ids:
        for treatment in group.treatments:
            if any(
                taxonomy.is_descendant_or_self(treatment.active_principle_id, ex)
                for ex in gq.excluded_ap_ids
            ):
                return False

    if not gq.ap_specs:
        return True
    if not gq.open_list and len(gq.ap_specs) != len(group.treatments):
        return False
    if len(gq.ap_specs) > len(group.treatments):
        return False

    compat = [
        [
            j
            for j, treatment in enumerate(group.treatments)
            if _treatment_satisfies(treatment, spec, taxonomy)
        ]
        for spec in gq.ap_specs
    ]
    return _injective_match(
        compat, len(group.treatments), require_all_targets=not gq.open_list
    )


# -- implicit exclusion between query groups ----------------------------------


def compute_exclusions(qs: QuerySpec, taxonomy: Taxonomy) -> QuerySpec:
    """Fill ``excluded_ap_ids``: when one group's principle is strictly more
    specific than another group's, the more general group implicitly excludes
    it ("opioids" next to "tapentadol" means "opioids other than tapentadol").

    Queries with equal-length multi-principle lists are compared position by
    position; different lengths produce no automatic exclusion.
    """
    excluded: list[set[str]] = [set() for _ in qs.groups]
    for i, gi in enumerate(qs.groups):
        for j, gj in enumerate(qs.groups):
            if i == j or len(gi.ap_specs) != len(gj.ap_specs):
                continue
            for spec_i, spec_j in zip(gi.ap_specs, gj.ap_specs):
                if spec_i.ap_id == spec_j.ap_id:
                    continue
                if taxonomy.is_descendant_or_self(spec_i.ap_id, spec_j.ap_id):
                    excluded[j].add(spec_i.ap_id)
    new_groups = tuple(
        replace(g, excluded_ap_ids=frozenset(ex)) for g, ex in zip(qs.groups, excluded)
    )
    return replace(qs, groups=new_groups)


# -- result-set assembly -------------------------------------------------------


def is_placebo_group(group: PatientGroup, taxonomy: Taxonomy) -> bool:
    """A placebo group is one whose every treatment is the placebo principle."""
    if PLACEBO_ID not in taxonomy:
        return False
    return all(
        taxonomy.is_descendant_or_self(t.active_principle_id, PLACEBO_ID)
        for t in group.treatments
    )


def _period_matches(
    trial: ClinicalTrial, period_index: int, qs: QuerySpec, taxonomy: Taxonomy
) -> dict[int, list[MatchedGroup]]:
    by_index: dict[int, list[MatchedGroup]] = {}
    for group in trial.periods[period_index].groups:
        for qi, gq in enumerate(qs.groups):
            if match_group(group, gq, taxonomy, trial.trial_type_ids):
                by_index.setdefault(qi, []).append(
                    MatchedGroup(trial.id, period_index, group.id, qi)
                )
    return by_index


def execute(ds: Dataset, qs: QuerySpec, include_titration: bool = False) -> ResultSets:
    """Assemble the three result sets.

    direct: trials with at least one matching group for every query index
    within the same non-titration period.  direct+indirect: direct trials
    plus trials matching a nonempty proper subset of indices and holding a
    placebo group in that period.  absolute: every matching group anywhere
    (titration periods only when ``include_titration`` is set).

    A trial contributes through at most one period, the first qualifying one
    in canonical period order, which keeps per-trial weighting local to one
    randomized cohort.
    """
    taxonomy = ds.taxonomy
    all_indices = set(range(len(qs.groups)))
    direct: dict[str, tuple[MatchedGroup, ...]] = {}
    mixed: dict[str, tuple[MatchedGroup, ...]] = {}
    companions: dict[str, tuple[GroupRef, ...]] = {}
    indirect_ids: set[str] = set()
    absolute: list[MatchedGroup] = []

    for trial_id in sorted(ds.trials):
        if trial_id in qs.excluded_trial_ids:
            continue
        trial = ds.trials[trial_id]

        period_matches: dict[int, dict[int, list[MatchedGroup]]] = {}
        for pi, period in enumerate(trial.periods):
            matches = _period_matches(trial, pi, qs, taxonomy)
            period_matches[pi] = matches
            if period.kind is PeriodKind.TITRATION and not include_titration:
                continue
            absolute.extend(m for qi in sorted(matches) for m in matches[qi])

        # The trial's comparison period: prefer a full (direct) match, then a
        # partial match bridged by a placebo arm; titration never qualifies.
        candidates = [
            pi
            for pi, period in enumerate(trial.periods)
            if period.kind is not PeriodKind.TITRATION and period_matches[pi]
        ]
        chosen: tuple[int, bool] | None = None
        for pi in candidates:
            if set(period_matches[pi]) == all_indices:
                chosen = (pi, True)
                break
        if chosen is None:
            for pi in candidates:
                if any(
                    is_placebo_group(g, taxonomy) for g in trial.periods[pi].groups
                ):
                    chosen = (pi, False)
                    break
        if chosen is None:
            continue
        pi, is_direct = chosen
        flat = tuple(
            m for qi in sorted(period_matches[pi]) for m in period_matches[pi][qi]
        )
        placebo_refs = tuple(
            GroupRef(trial_id, pi, g.id)
            for g in trial.periods[pi].groups
            if is_placebo_group(g, taxonomy)
        )
        mixed[trial_id] = flat
        if placebo_refs:
            companions[trial_id] = placebo_refs
        if is_direct:
            direct[trial_id] = flat
        else:
            indirect_ids.add(trial_id)

    return ResultSets(
        direct=direct,
        direct_indirect=mixed,
        placebo_companions=companions,
        indirect_trial_ids=frozenset(indirect_ids),
        absolute=tuple(absolute),
    )
