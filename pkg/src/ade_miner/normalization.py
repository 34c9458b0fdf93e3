"""The three correction/normalization schemes and profile aggregation.

Scheme 1 rebalances unequal arms inside one trial (each group is scaled down
to weigh like the smallest arm of its trial, so no patient counts for more
than one).  Scheme 2 adjusts indirect comparisons by the difference between
each trial's placebo event rate and the placebo rate pooled over all bridged
trials.  Scheme 3 equalizes the direct/indirect patient mix across compared
groups.  Aggregation folds weighted (possibly corrected) term counts into a
26-dimensional profile: 13 categories x {all, serious}.

Everything here is pure arithmetic over the query engine's result sets.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import AdeTerm, Dataset
from .query import QuerySpec, ResultSets

#: Counts are keyed by (normalized term label, serious flag); corrections are
#: applied per key, never on pooled totals.
CountKey = tuple[str, bool]


class WeightSource(str, Enum):
    DIRECT = "direct"
    INDIRECT = "indirect"


@dataclass(frozen=True)
class GroupWeight:
    trial_id: str
    group_id: str
    query_index: int
    w: float
    k_dir: float
    k_ind: float
    source: WeightSource

    def __post_init__(self):
        for name, value in (("w", self.w), ("k_dir", self.k_dir), ("k_ind", self.k_ind)):
            if not 0 < value <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")

    @property
    def effective(self) -> float:
        if self.source is WeightSource.DIRECT:
            return self.w * self.k_dir
        return self.k_ind


@dataclass(frozen=True)
class CorrectedCount:
    trial_id: str
    group_id: str
    term_label: str
    serious: bool
    raw: float
    corrected: float


@dataclass(frozen=True)
class CategoryRates:
    total: float
    serious: float


@dataclass(frozen=True)
class TermRates:
    total: float
    serious: float
    category_ids: tuple[str, ...]


@dataclass(frozen=True)
class AdeProfile:
    """Rates are dimensionless events per patient and may exceed 1; serious
    never exceeds total after the final clamp."""

    categories: dict[str, CategoryRates]
    terms: dict[str, TermRates]
    n_trials: int
    effective_patients: float
    overall_rate: float
    overall_serious_rate: float

    @staticmethod
    def zero(category_ids) -> "AdeProfile":
        cats = {cid: CategoryRates(0.0, 0.0) for cid in sorted(category_ids)}
        return AdeProfile(
            categories=cats, terms={}, n_trials=0,
            effective_patients=0.0, overall_rate=0.0, overall_serious_rate=0.0,
        )


# -- scheme 1: per-trial group-size weighting ---------------------------------


def per_trial_weights(sizes: list[tuple[str, int]]) -> dict[str, float]:
    """w = smallest group of the trial / own size, for groups of one trial.

    The minimum (not the average) is used so that no patient ever counts for
    more than one.
    """
    if not sizes:
        raise ValueError("per_trial_weights needs at least one group")
    smallest = min(n for _, n in sizes)
    return {group_id: smallest / n for group_id, n in sizes}


# -- scheme 2: placebo normalization ------------------------------------------


@dataclass(frozen=True)
class GroupSlice:
    """One drug arm of a bridged trial with its per-key event counts."""

    trial_id: str
    group_id: str
    n_patients: int
    counts: dict[CountKey, float]


@dataclass(frozen=True)
class PlaceboArm:
    """A trial's (pooled) placebo arm."""

    n_patients: int
    counts: dict[CountKey, float]


def placebo_correct(
    groups: list[GroupSlice], placebo: dict[str, PlaceboArm]
) -> tuple[list[CorrectedCount], dict[CountKey, float]]:
    """Adjust each arm's counts by (pooled placebo rate - own trial's placebo
    rate) x arm size, independently per term and per seriousness level.

    Every contributing trial must appear in ``placebo``; returns the
    corrected counts and the pooled placebo rates.
    """
    for g in groups:
        if g.trial_id not in placebo:
            raise ValueError(f"trial {g.trial_id!r} has no placebo arm")

    total_placebo_patients = sum(arm.n_patients for arm in placebo.values())
    if total_placebo_patients <= 0:
        raise ValueError("placebo arms must hold at least one patient")

    keys: set[CountKey] = set()
    for arm in placebo.values():
        keys.update(arm.counts)
    for g in groups:
        keys.update(g.counts)

    global_rates = {
        key: sum(arm.counts.get(key, 0.0) for arm in placebo.values())
        / total_placebo_patients
        for key in keys
    }

    corrected: list[CorrectedCount] = []
    for g in groups:
        arm = placebo[g.trial_id]
        for key in sorted(keys):
            term_label, serious = key
            raw = g.counts.get(key, 0.0)
            trial_rate = arm.counts.get(key, 0.0) / arm.n_patients
            value = raw + (global_rates[key] - trial_rate) * g.n_patients
            corrected.append(
                CorrectedCount(
                    trial_id=g.trial_id,
                    group_id=g.group_id,
                    term_label=term_label,
                    serious=serious,
                    raw=raw,
                    corrected=value,
                )
            )
    return corrected, global_rates


# -- scheme 3: direct/indirect mixing -----------------------------------------


@dataclass(frozen=True)
class MixWeights:
    r: float
    k_dir: dict[int, float]
    k_ind: dict[int, float]


def mix_weights(
    dir_patients: dict[int, float], ind_patients: dict[int, float]
) -> MixWeights:
    """Per compared group, cap whichever side is over-represented so the
    indirect/direct patient ratio equals the overall ratio r, without ever
    weighting a patient above 1.

    With one side empty overall (pure direct or pure indirect), every factor
    is 1.  A group empty on one side keeps factor 1 on its populated side;
    the min() formulas are undefined at zero and this is their limit.
    """
    indices = sorted(set(dir_patients) | set(ind_patients))
    total_dir = sum(dir_patients.get(i, 0.0) for i in indices)
    total_ind = sum(ind_patients.get(i, 0.0) for i in indices)
    if total_dir <= 0 or total_ind <= 0:
        ones = {i: 1.0 for i in indices}
        return MixWeights(r=1.0, k_dir=dict(ones), k_ind=dict(ones))

    r = total_ind / total_dir
    k_dir: dict[int, float] = {}
    k_ind: dict[int, float] = {}
    for i in indices:
        d = dir_patients.get(i, 0.0)
        n = ind_patients.get(i, 0.0)
        if d <= 0 or n <= 0:
            k_dir[i] = 1.0
            k_ind[i] = 1.0
            continue
        k_dir[i] = min(1.0, n / (d * r))
        k_ind[i] = min(1.0, d * r / n)
    return MixWeights(r=r, k_dir=k_dir, k_ind=k_ind)


# -- aggregation ---------------------------------------------------------------


@dataclass(frozen=True)
class WeightedGroup:
    trial_id: str
    group_id: str
    n_patients: int
    weight: float
    counts: dict[CountKey, float]


def aggregate_profile(
    weighted_groups: list[WeightedGroup],
    term_dictionary: dict[str, AdeTerm],
    category_ids,
) -> AdeProfile:
    """Fold weighted counts into per-term and per-category rates.

    A term belonging to two categories contributes half of its rate to each,
    which leaves the overall total unchanged.  Negative corrected counts are
    carried through the sums and only clamped at the final per-term and
    per-category stage; clamping earlier would bias totals upward.
    """
    effective = sum(g.weight * g.n_patients for g in weighted_groups)
    if effective <= 0:
        raise ValueError("aggregation over an empty slice (zero effective patients)")

    num_total: dict[str, float] = {}
    num_serious: dict[str, float] = {}
    for g in weighted_groups:
        for (term_label, serious), count in g.counts.items():
            num_total[term_label] = num_total.get(term_label, 0.0) + g.weight * count
            if serious:
                num_serious[term_label] = (
                    num_serious.get(term_label, 0.0) + g.weight * count
                )

    cat_total = {cid: 0.0 for cid in category_ids}
    cat_serious = {cid: 0.0 for cid in category_ids}
    terms: dict[str, TermRates] = {}
    for term_label in sorted(num_total):
        term = term_dictionary[term_label]
        rate = num_total[term_label] / effective
        serious_rate = num_serious.get(term_label, 0.0) / effective
        share = 1.0 / len(term.category_ids)
        for cid in term.category_ids:
            cat_total[cid] += rate * share
            cat_serious[cid] += serious_rate * share
        display_total = max(0.0, rate)
        terms[term_label] = TermRates(
            total=display_total,
            serious=min(max(0.0, serious_rate), display_total),
            category_ids=tuple(sorted(term.category_ids)),
        )

    categories: dict[str, CategoryRates] = {}
    for cid in sorted(cat_total):
        total = max(0.0, cat_total[cid])
        categories[cid] = CategoryRates(
            total=total, serious=min(max(0.0, cat_serious[cid]), total)
        )

    trials = {g.trial_id for g in weighted_groups}
    return AdeProfile(
        categories=categories,
        terms=terms,
        n_trials=len(trials),
        effective_patients=effective,
        overall_rate=sum(c.total for c in categories.values()),
        overall_serious_rate=sum(c.serious for c in categories.values()),
    )


# -- full pipeline for one query ------------------------------------------------


@dataclass(frozen=True)
class QueryProfile:
    query_index: int
    profile: AdeProfile
    weights: tuple[GroupWeight, ...]
    corrected: tuple[CorrectedCount, ...]
    corrections: tuple[str, ...]


def observation_counts(ds: Dataset) -> dict[tuple[str, int, str], dict[CountKey, float]]:
    """Index observations as (trial, period, group) -> per-key counts."""
    index: dict[tuple[str, int, str], dict[CountKey, float]] = {}
    for obs in ds.observations:
        slot = index.setdefault((obs.trial_id, obs.period_index, obs.group_id), {})
        key = (obs.term_label, obs.serious)
        slot[key] = slot.get(key, 0.0) + obs.event_count
    return index


def _group_size(ds: Dataset, trial_id: str, period_index: int, group_id: str) -> int:
    return ds.trials[trial_id].group(period_index, group_id).n_patients


def build_query_profiles(
    ds: Dataset, qs: QuerySpec, rs: ResultSets, kind: str
) -> list[QueryProfile]:
    """Run the correction pipeline appropriate to one result-set kind and
    aggregate one profile per query group.

    kind "absolute": unit weights, raw counts.  kind "direct": per-trial
    group-size weights, raw counts.  kind "mixed": group-size weights and
    k_dir on the direct side, placebo-corrected counts and k_ind on the
    indirect side.
    """
    if kind not in ("direct", "mixed", "absolute"):
        raise ValueError(f"unknown result-set kind {kind!r}")
    counts_by_group = observation_counts(ds)
    category_ids = sorted(ds.category_ids())
    n_queries = len(qs.groups)

    def counts_of(m) -> dict[CountKey, float]:
        return dict(counts_by_group.get((m.trial_id, m.period_index, m.group_id), {}))

    slices: dict[int, list[WeightedGroup]] = {qi: [] for qi in range(n_queries)}
    weights: dict[int, list[GroupWeight]] = {qi: [] for qi in range(n_queries)}
    corrected_out: dict[int, list[CorrectedCount]] = {qi: [] for qi in range(n_queries)}
    corrections: dict[int, set[str]] = {qi: set() for qi in range(n_queries)}

    if kind == "absolute":
        for m in rs.absolute:
            n = _group_size(ds, m.trial_id, m.period_index, m.group_id)
            slices[m.query_index].append(
                WeightedGroup(m.trial_id, m.group_id, n, 1.0, counts_of(m))
            )
            weights[m.query_index].append(
                GroupWeight(m.trial_id, m.group_id, m.query_index,
                            1.0, 1.0, 1.0, WeightSource.DIRECT)
            )
    else:
        trial_ids = sorted(rs.direct) if kind == "direct" else sorted(rs.direct_indirect)
        direct_trials = [t for t in trial_ids if t in rs.direct]
        indirect_trials = [t for t in trial_ids if t in rs.indirect_trial_ids]

        mix = MixWeights(1.0, {}, {})
        corrected_counts: dict[tuple[str, str], dict[CountKey, float]] = {}
        if kind == "mixed":
            dir_patients = {qi: 0.0 for qi in range(n_queries)}
            ind_patients = {qi: 0.0 for qi in range(n_queries)}
            for t in direct_trials:
                for m in rs.direct[t]:
                    dir_patients[m.query_index] += _group_size(
                        ds, m.trial_id, m.period_index, m.group_id
                    )
            for t in indirect_trials:
                for m in rs.direct_indirect[t]:
                    ind_patients[m.query_index] += _group_size(
                        ds, m.trial_id, m.period_index, m.group_id
                    )
            mix = mix_weights(dir_patients, ind_patients)

            if indirect_trials:
                placebo_arms: dict[str, PlaceboArm] = {}
                for t in indirect_trials:
                    refs = rs.placebo_companions[t]
                    pooled: dict[CountKey, float] = {}
                    size = 0
                    for ref in refs:
                        size += _group_size(ds, ref.trial_id, ref.period_index, ref.group_id)
                        for key, c in counts_by_group.get(
                            (ref.trial_id, ref.period_index, ref.group_id), {}
                        ).items():
                            pooled[key] = pooled.get(key, 0.0) + c
                    placebo_arms[t] = PlaceboArm(n_patients=size, counts=pooled)

                bridged: list[GroupSlice] = []
                bridged_index: dict[tuple[str, str], int] = {}
                for t in indirect_trials:
                    for m in rs.direct_indirect[t]:
                        bridged_index[(m.trial_id, m.group_id)] = m.query_index
                        bridged.append(
                            GroupSlice(
                                trial_id=m.trial_id,
                                group_id=m.group_id,
                                n_patients=_group_size(
                                    ds, m.trial_id, m.period_index, m.group_id
                                ),
                                counts=counts_of(m),
                            )
                        )
                corrected_list, _ = placebo_correct(bridged, placebo_arms)
                for cc in corrected_list:
                    slot = corrected_counts.setdefault((cc.trial_id, cc.group_id), {})
                    slot[(cc.term_label, cc.serious)] = cc.corrected
                    corrected_out[bridged_index[(cc.trial_id, cc.group_id)]].append(cc)

        for t in direct_trials:
            matches = rs.direct[t]
            sizes = []
            seen = set()
            for m in matches:
                if m.group_id not in seen:
                    seen.add(m.group_id)
                    sizes.append(
                        (m.group_id, _group_size(ds, m.trial_id, m.period_index, m.group_id))
                    )
            w = per_trial_weights(sizes)
            for m in matches:
                n = _group_size(ds, m.trial_id, m.period_index, m.group_id)
                k_dir = mix.k_dir.get(m.query_index, 1.0) if kind == "mixed" else 1.0
                gw = GroupWeight(
                    m.trial_id, m.group_id, m.query_index,
                    w[m.group_id], k_dir, 1.0, WeightSource.DIRECT,
                )
                weights[m.query_index].append(gw)
                slices[m.query_index].append(
                    WeightedGroup(m.trial_id, m.group_id, n, gw.effective, counts_of(m))
                )
                if w[m.group_id] != 1.0:
                    corrections[m.query_index].add("group_size_weighting")
                if k_dir != 1.0:
                    corrections[m.query_index].add("direct_indirect_balancing")

        if kind == "mixed":
            for t in indirect_trials:
                for m in rs.direct_indirect[t]:
                    n = _group_size(ds, m.trial_id, m.period_index, m.group_id)
                    k_ind = mix.k_ind.get(m.query_index, 1.0)
                    gw = GroupWeight(
                        m.trial_id, m.group_id, m.query_index,
                        1.0, 1.0, k_ind, WeightSource.INDIRECT,
                    )
                    weights[m.query_index].append(gw)
                    slices[m.query_index].append(
                        WeightedGroup(
                            m.trial_id, m.group_id, n, gw.effective,
                            dict(corrected_counts.get((m.trial_id, m.group_id), {})),
                        )
                    )
                    corrections[m.query_index].add("placebo_normalization")
                    if k_ind != 1.0:
                        corrections[m.query_index].add("direct_indirect_balancing")

    results: list[QueryProfile] = []
    for qi in range(n_queries):
        if slices[qi]:
            profile = aggregate_profile(slices[qi], ds.term_dictionary, category_ids)
        else:
            profile = AdeProfile.zero(category_ids)
        results.append(
            QueryProfile(
                query_index=qi,
                profile=profile,
                weights=tuple(weights[qi]),
                corrected=tuple(corrected_out[qi]),
                corrections=tuple(sorted(corrections[qi])),
            )
        )
    return results
