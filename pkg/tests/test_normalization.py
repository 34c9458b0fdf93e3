import math

import pytest

from ade_miner.model import AdeTerm
from ade_miner.normalization import (
    AdeProfile,
    GroupSlice,
    GroupWeight,
    PlaceboArm,
    WeightSource,
    WeightedGroup,
    aggregate_profile,
    build_query_profiles,
    mix_weights,
    observation_counts,
    per_trial_weights,
    placebo_correct,
)
from ade_miner.query import QuerySpec, GroupQuery, APSpec, compute_exclusions, execute

CATEGORIES = [
    "blood_immune", "cardiovascular", "digestive",
    "endocrine_metabolic_nutritional", "eye_ear", "genital_reproductive",
    "musculoskeletal", "nervous", "psychological", "respiratory",
    "skin_subcutaneous", "unclassified", "urinary",
]


def term(label, *cats):
    return AdeTerm(label=label, meddra_code="1", soc="x", category_ids=frozenset(cats))


class TestPerTrialWeights:
    def test_worked_example(self):
        # Two trials comparing two drugs; the larger arm of the unbalanced
        # trial is scaled down to the smallest arm's weight.
        t1 = per_trial_weights([("D1", 100), ("D2", 100)])
        t2 = per_trial_weights([("D1", 100), ("D2", 200)])
        assert t1 == {"D1": 1.0, "D2": 1.0}
        assert t2 == {"D1": 1.0, "D2": 0.5}

    def test_equal_sizes_all_one(self):
        assert per_trial_weights([("a", 70), ("b", 70), ("c", 70)]) == {
            "a": 1.0, "b": 1.0, "c": 1.0,
        }

    def test_direct_arithmetic(self):
        assert per_trial_weights([("a", 50), ("b", 100), ("c", 200)]) == {
            "a": 1.0, "b": 0.5, "c": 0.25,
        }

    def test_effective_size_equality(self):
        sizes = [("a", 37), ("b", 91), ("c", 113)]
        weights = per_trial_weights(sizes)
        effective = {w * n for (g, n), w in zip(sizes, weights.values())}
        assert effective == {37}

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            per_trial_weights([])


class TestPlaceboCorrect:
    def test_worked_example(self):
        # Vomiting counts: 20 with drug 1 (placebo 10) and 30 with drug 2
        # (placebo 30), all arms 100 patients.  Pooled placebo rate 20%.
        key = ("vomiting", False)
        groups = [
            GroupSlice("T1", "D1", 100, {key: 20.0}),
            GroupSlice("T2", "D2", 100, {key: 30.0}),
        ]
        placebo = {
            "T1": PlaceboArm(100, {key: 10.0}),
            "T2": PlaceboArm(100, {key: 30.0}),
        }
        corrected, global_rates = placebo_correct(groups, placebo)
        assert global_rates[key] == pytest.approx(0.20)
        by_group = {(c.trial_id, c.group_id): c.corrected for c in corrected}
        assert by_group[("T1", "D1")] == pytest.approx(30.0)
        assert by_group[("T2", "D2")] == pytest.approx(20.0)

    def test_equal_placebo_rates_identity(self):
        key = ("nausea", False)
        groups = [
            GroupSlice("T1", "D1", 80, {key: 7.0}),
            GroupSlice("T2", "D2", 120, {key: 11.0}),
        ]
        placebo = {
            "T1": PlaceboArm(50, {key: 10.0}),
            "T2": PlaceboArm(100, {key: 20.0}),
        }
        corrected, _ = placebo_correct(groups, placebo)
        for c in corrected:
            assert c.corrected == pytest.approx(c.raw, abs=1e-12)

    def test_single_trial_identity(self):
        key = ("nausea", True)
        groups = [GroupSlice("T1", "D1", 60, {key: 9.0})]
        placebo = {"T1": PlaceboArm(55, {key: 4.0})}
        corrected, _ = placebo_correct(groups, placebo)
        assert corrected_lookup(corrected)[("T1", "D1", key)] == pytest.approx(9.0)

    def test_missing_placebo_is_caller_bug(self):
        groups = [GroupSlice("T1", "D1", 60, {})]
        with pytest.raises(ValueError, match="T1"):
            placebo_correct(groups, {})

    def test_zero_count_group_still_adjusted(self):
        # A term absent from one arm still picks up the placebo delta.
        key = ("rash", False)
        groups = [GroupSlice("T1", "D1", 100, {})]
        placebo = {
            "T1": PlaceboArm(100, {key: 30.0}),
            "T2": PlaceboArm(100, {key: 10.0}),
        }
        corrected, _ = placebo_correct(groups, placebo)
        # pooled rate 0.2, trial rate 0.3 -> corrected = 0 + (0.2-0.3)*100
        assert corrected_lookup(corrected)[("T1", "D1", key)] == pytest.approx(-10.0)


def corrected_lookup(corrected):
    return {
        (c.trial_id, c.group_id, (c.term_label, c.serious)): c.corrected
        for c in corrected
    }


class TestMixWeights:
    def test_worked_example(self):
        mw = mix_weights({0: 100.0, 1: 100.0}, {0: 100.0, 1: 200.0})
        assert mw.r == pytest.approx(1.5)
        assert mw.k_dir[0] == pytest.approx(2 / 3, abs=1e-9)
        assert mw.k_ind[0] == pytest.approx(1.0)
        assert mw.k_dir[1] == pytest.approx(1.0)
        assert mw.k_ind[1] == pytest.approx(0.75, abs=1e-9)

    def test_balanced_all_ones(self):
        mw = mix_weights({0: 150.0, 1: 70.0}, {0: 150.0, 1: 70.0})
        assert mw.r == pytest.approx(1.0)
        assert all(v == 1.0 for v in mw.k_dir.values())
        assert all(v == 1.0 for v in mw.k_ind.values())

    def test_balance_invariant(self):
        mw = mix_weights({0: 100.0, 1: 230.0}, {0: 317.0, 1: 80.0})
        for i, (d, n) in enumerate([(100.0, 317.0), (230.0, 80.0)]):
            assert (mw.k_ind[i] * n) / (mw.k_dir[i] * d) == pytest.approx(mw.r, abs=1e-9)
            assert max(mw.k_dir[i], mw.k_ind[i]) == 1.0

    def test_group_with_empty_side_keeps_one(self):
        mw = mix_weights({0: 100.0, 1: 100.0}, {0: 0.0, 1: 150.0})
        assert mw.k_dir[0] == 1.0
        assert mw.k_ind[0] == 1.0

    def test_pure_direct_mode(self):
        mw = mix_weights({0: 100.0}, {0: 0.0})
        assert mw.k_dir[0] == 1.0


class TestAggregateProfile:
    def test_single_group_single_category(self):
        terms = {"nausea": term("Nausea", "digestive")}
        groups = [WeightedGroup("T", "G", 100, 1.0, {("nausea", False): 30.0})]
        profile = aggregate_profile(groups, terms, CATEGORIES)
        assert profile.categories["digestive"].total == pytest.approx(0.30)
        assert profile.effective_patients == 100
        for cid in CATEGORIES:
            if cid != "digestive":
                assert profile.categories[cid].total == 0.0

    def test_two_category_term_splits_half(self):
        # 34 events in 100 patients for a term in two categories: 17% each.
        terms = {"hot flush": term("Hot flush", "cardiovascular", "genital_reproductive")}
        groups = [WeightedGroup("T", "G", 100, 1.0, {("hot flush", False): 34.0})]
        profile = aggregate_profile(groups, terms, CATEGORIES)
        assert profile.categories["cardiovascular"].total == pytest.approx(0.17)
        assert profile.categories["genital_reproductive"].total == pytest.approx(0.17)
        assert profile.overall_rate == pytest.approx(0.34)
        assert profile.terms["hot flush"].total == pytest.approx(0.34)

    def test_serious_not_above_total(self):
        terms = {"nausea": term("Nausea", "digestive")}
        groups = [
            WeightedGroup("T", "G", 100, 1.0,
                          {("nausea", False): -5.0, ("nausea", True): 4.0}),
        ]
        profile = aggregate_profile(groups, terms, CATEGORIES)
        cat = profile.categories["digestive"]
        assert cat.serious <= cat.total

    def test_exactly_13_categories(self):
        terms = {"nausea": term("Nausea", "digestive")}
        groups = [WeightedGroup("T", "G", 10, 1.0, {("nausea", False): 1.0})]
        profile = aggregate_profile(groups, terms, CATEGORIES)
        assert len(profile.categories) == 13

    def test_empty_slice_rejected(self):
        with pytest.raises(ValueError):
            aggregate_profile([], {}, CATEGORIES)

    def test_weighted_two_trials_hand_computed(self):
        terms = {"nausea": term("Nausea", "digestive")}
        groups = [
            WeightedGroup("T1", "G1", 100, 1.0, {("nausea", False): 20.0}),
            WeightedGroup("T2", "G1", 200, 0.5, {("nausea", False): 60.0}),
        ]
        profile = aggregate_profile(groups, terms, CATEGORIES)
        # (1*20 + 0.5*60) / (1*100 + 0.5*200) = 50/200
        assert profile.categories["digestive"].total == pytest.approx(0.25)
        assert profile.n_trials == 2


class TestPipelineOnFixture:
    def test_direct_single_trial_equals_raw_rates(self, dataset):
        # Elagolix vs placebo: one trial, equal weighting except arm sizes.
        qs = QuerySpec(groups=(
            GroupQuery(ap_specs=(APSpec(ap_id="elagolix"),)),
            GroupQuery(ap_specs=(APSpec(ap_id="placebo"),)),
        ))
        qs = compute_exclusions(qs, dataset.taxonomy)
        rs = execute(dataset, qs)
        assert sorted(rs.direct) == ["NCT00000005"]
        profiles = build_query_profiles(dataset, qs, rs, "direct")
        elagolix = profiles[0].profile
        # Hot flush 68 non-serious + 3 serious over 200 patients, the term
        # split in half across its two categories.
        assert elagolix.categories["cardiovascular"].total == pytest.approx(
            (71 / 200) / 2
        )
        assert elagolix.categories["genital_reproductive"].total == pytest.approx(
            (71 / 200) / 2 + 11 / 200
        )
        assert elagolix.terms["hot flush"].total == pytest.approx(71 / 200)
        assert elagolix.terms["hot flush"].serious == pytest.approx(3 / 200)

    def test_mixed_pipeline_tramadol_vs_opioid(self, dataset):
        qs = QuerySpec(groups=(
            GroupQuery(ap_specs=(APSpec(ap_id="tramadol"),)),
            GroupQuery(ap_specs=(APSpec(ap_id="opioid"),)),
        ))
        qs = compute_exclusions(qs, dataset.taxonomy)
        rs = execute(dataset, qs)
        assert rs.direct == {}
        assert rs.indirect_trial_ids == frozenset({"NCT00000006", "NCT00000007"})
        profiles = build_query_profiles(dataset, qs, rs, "mixed")
        assert "placebo_normalization" in profiles[0].corrections
        assert profiles[0].profile.n_trials == 1
        assert profiles[1].profile.n_trials == 1
        # Pure indirect mode: k factors are 1, weights are the identity.
        for qp in profiles:
            for w in qp.weights:
                assert w.source is WeightSource.INDIRECT
                assert w.effective == 1.0

    def test_absolute_counts_raw(self, dataset):
        qs = QuerySpec(groups=(GroupQuery(ap_specs=(APSpec(ap_id="gabapentin"),)),))
        rs = execute(dataset, qs)
        profiles = build_query_profiles(dataset, qs, rs, "absolute")
        p = profiles[0].profile
        # Gabapentin arms: NCT00000009 G1 (220) and NCT00000010 G2 (370).
        assert p.effective_patients == pytest.approx(590)
        assert p.n_trials == 2
        nervous = (48 + 40 + 1 + 70 + 60 + 2) / 590
        assert p.categories["nervous"].total == pytest.approx(nervous)
