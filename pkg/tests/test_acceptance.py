"""Acceptance gate: every criterion checked at its stated tolerance, one
printed PASS line per criterion (run with ``pytest -v -s`` to watch them).

The worked numeric examples are golden values; the invariant suite and the
aggregation oracle run as a separate timed pytest process over
``test_properties.py`` so their budget and wall-clock bound are measured
end to end.
"""
import math
import random
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

import test_glyph
from ade_miner.glyph import GlyphSpec, default_styles, render_flower_svg
from ade_miner.model import dataset_summary
from ade_miner.normalization import (
    AdeProfile,
    CategoryRates,
    GroupSlice,
    PlaceboArm,
    mix_weights,
    per_trial_weights,
    placebo_correct,
)
from ade_miner.service import create_app, parse_search_params
from ade_miner.ingest import ingest_directory

TESTS_DIR = Path(__file__).parent


def report(criterion: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS")


class TestC1PerTrialWeights:
    def test_golden_and_fast(self):
        t1 = per_trial_weights([("D1", 100), ("D2", 100)])
        t2 = per_trial_weights([("D1", 100), ("D2", 200)])
        assert (t1["D1"], t1["D2"], t2["D1"], t2["D2"]) == (1.0, 1.0, 1.0, 0.5)

        start = time.perf_counter()
        rounds = 1000
        for _ in range(rounds):
            per_trial_weights([("D1", 100), ("D2", 200)])
        per_call = (time.perf_counter() - start) / rounds
        assert per_call < 1e-3, f"{per_call * 1e3:.3f} ms per call"
        report("C1 per-trial weights golden (1.0, 1.0, 1.0, 0.5), < 1 ms")


class TestC2PlaceboCorrection:
    def test_golden(self):
        key = ("vomiting", False)
        corrected, global_rates = placebo_correct(
            [
                GroupSlice("T1", "D1", 100, {key: 20.0}),
                GroupSlice("T2", "D2", 100, {key: 30.0}),
            ],
            {
                "T1": PlaceboArm(100, {key: 10.0}),
                "T2": PlaceboArm(100, {key: 30.0}),
            },
        )
        values = {(c.trial_id, c.group_id): c.corrected for c in corrected}
        assert values[("T1", "D1")] == 30.0
        assert values[("T2", "D2")] == 20.0
        assert global_rates[key] == 0.20
        report("C2 placebo correction golden (30, 20; average placebo rate 0.20)")


class TestC3Mixing:
    def test_golden_and_balance(self):
        dir_patients = {0: 100.0, 1: 100.0}
        ind_patients = {0: 100.0, 1: 200.0}
        mw = mix_weights(dir_patients, ind_patients)
        assert mw.r == 1.5
        assert abs(mw.k_dir[0] - 2 / 3) <= 1e-9
        assert mw.k_ind[0] == 1.0
        assert mw.k_dir[1] == 1.0
        assert abs(mw.k_ind[1] - 0.75) <= 1e-9
        for i in (0, 1):
            ratio = (mw.k_ind[i] * ind_patients[i]) / (mw.k_dir[i] * dir_patients[i])
            assert abs(ratio - mw.r) <= 1e-9
            assert max(mw.k_dir[i], mw.k_ind[i]) == 1.0
        report("C3 mixing golden (r=1.5, k_dir(D1)=2/3, k_ind(D2)=0.75; balance)")


@pytest.fixture(scope="module")
def property_suite_run():
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", str(TESTS_DIR / "test_properties.py"), "-q"],
        capture_output=True,
        text=True,
        cwd=TESTS_DIR.parent,
    )
    elapsed = time.perf_counter() - start
    return proc, elapsed


class TestC4InvariantSuite:
    def test_runs_green_with_budget_under_60s(self, property_suite_run):
        import test_properties

        proc, elapsed = property_suite_run
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert test_properties.minimum_example_budget() >= 1000
        assert elapsed < 60.0, f"property suite took {elapsed:.1f}s"
        match = re.search(r"(\d+) passed", proc.stdout)
        assert match and int(match.group(1)) >= 12
        report(
            f"C4 invariant suite ({test_properties.minimum_example_budget()} "
            f"random fixtures, {elapsed:.1f}s < 60s)"
        )


class TestC5AggregationOracle:
    def test_bruteforce_equality_included_in_run(self, property_suite_run):
        proc, _ = property_suite_run
        assert proc.returncode == 0
        verbose = subprocess.run(
            [
                sys.executable, "-m", "pytest",
                str(TESTS_DIR / "test_properties.py::TestAggregationOracle"), "-q",
            ],
            capture_output=True,
            text=True,
            cwd=TESTS_DIR.parent,
        )
        assert verbose.returncode == 0, verbose.stdout + verbose.stderr
        report("C5 aggregation oracle equals brute-force recomputation (1e-9 rel)")


class TestC6GlyphGeometry:
    def test_100_random_profiles(self):
        rng = random.Random(20210115)
        categories = sorted(default_styles())
        petal_categories = [c for c in categories if c != "unclassified"]
        styles = default_styles()
        for _ in range(100):
            rates = {}
            for cid in categories:
                total = rng.uniform(0.05, 2.5)
                serious = total * rng.uniform(0.0, 1.0)
                rates[cid] = CategoryRates(total=total, serious=serious)
            profile = AdeProfile(
                categories=rates, terms={}, n_trials=1, effective_patients=100,
                overall_rate=sum(r.total for r in rates.values()),
                overall_serious_rate=sum(r.serious for r in rates.values()),
            )
            reference = max(r.total for r in rates.values())
            spec = GlyphSpec(profile=profile, reference_rate=reference, canvas_px=420)
            svg = render_flower_svg(spec, styles)
            assert svg == render_flower_svg(spec, styles)

            petals = {
                m.group(1): m
                for m in test_glyph.PATH_RE.finditer(svg)
            }
            areas = {
                cid: test_glyph.shoelace(
                    test_glyph.parse_petal_path(petals[cid].group(4))
                )
                for cid in petal_categories
            }
            reference_cid = max(petal_categories, key=lambda c: rates[c].total)
            for cid in petal_categories:
                area_ratio = areas[cid] / areas[reference_cid]
                rate_ratio = rates[cid].total / rates[reference_cid].total
                assert abs(area_ratio - rate_ratio) <= 0.01 * rate_ratio

            cx = cy = 210.0
            for m in test_glyph.INNER_RE.finditer(svg):
                cid = m.group(1)
                nums = [float(x) for x in test_glyph.NUM_RE.findall(m.group(2))]
                inner_apex = math.hypot(nums[4] - cx, nums[5] - cy)
                outer_nums = [
                    float(x)
                    for x in test_glyph.NUM_RE.findall(petals[cid].group(4))
                ]
                outer_apex = math.hypot(outer_nums[4] - cx, outer_nums[5] - cy)
                expected = math.sqrt(rates[cid].serious / rates[cid].total)
                assert abs(inner_apex / outer_apex - expected) <= 1e-3
        report("C6 glyph geometry (100 profiles: area 1%, inner sqrt 1e-3, bytes)")


class TestC7Ingestion:
    def test_fixture_round_trip_and_regimen_table(self, fixtures_dir, manifest):
        ds = ingest_directory(
            xml_dir=fixtures_dir / "xml",
            curation_path=fixtures_dir / "curation.csv",
            taxonomy_path=fixtures_dir / "taxonomy.txt",
            terms_path=fixtures_dir / "terms.txt",
        )
        s = dataset_summary(ds)
        assert s.trials == manifest["trials"]
        assert s.groups == manifest["groups"]
        assert s.patients == manifest["patients"]
        assert s.titration_patients == manifest["titration_patients"]
        assert s.observations == manifest["observations"]
        assert s.events == manifest["events"]
        assert s.distinct_terms == manifest["distinct_terms"]
        assert s.mapped_terms == manifest["mapped_terms"]

        import test_regimen
        from ade_miner.ingest import extract_regimen

        assert len(test_regimen.CASES) >= 30
        texts = [case[0] for case in test_regimen.CASES]
        assert any("5-10 mg" in t for t in texts)
        assert any(t == "bid" or " bid" in t for t in texts)
        assert any("1-2 times per day" in t for t in texts)
        taxonomy = ds.taxonomy
        for text, aps, dose, intakes, route, release in test_regimen.CASES:
            result = extract_regimen(text, taxonomy)
            assert [n for n, _ in result.active_principle_candidates] == aps
            if dose is None:
                assert result.dose_range is None
            else:
                assert (result.dose_range.min, result.dose_range.max,
                        result.dose_range.unit) == dose
            if intakes is None:
                assert result.intakes_per_day is None
            else:
                assert (result.intakes_per_day.min, result.intakes_per_day.max) == intakes
            assert result.route == route
            assert result.release == release
        report("C7 ingestion manifest round-trip + 30-case regimen table")


class TestC8UrlScheme:
    def test_canonical_deep_link_urls(self, taxonomy):
        otc = parse_search_params(
            "group_1_ap=acetaminophen&group_1_route=oral"
            "&group_2_ap=ibuprofen&group_2_route=oral",
            taxonomy,
        )
        assert [g.ap_specs[0].ap_id for g in otc.spec.groups] == [
            "acetaminophen", "ibuprofen",
        ]
        assert all(g.ap_specs[0].route.value == "oral" for g in otc.spec.groups)

        elagolix = parse_search_params(
            "group_1_ap=elagolix&group_2_ap=placebo", taxonomy
        )
        assert [g.ap_specs[0].ap_id for g in elagolix.spec.groups] == [
            "elagolix", "placebo",
        ]

        tapentadol = parse_search_params(
            "group_1_indication=acute%20pain&group_1_ap=tapentadol&group_1_route=oral"
            "&group_2_indication=acute%20pain&group_2_ap=opioid&group_2_route=oral",
            taxonomy,
        )
        assert tapentadol.spec.groups[0].indication_ids == frozenset({"acute_pain"})
        assert tapentadol.spec.groups[1].excluded_ap_ids == frozenset({"tapentadol"})

        tramadol = parse_search_params(
            "group_1_ap=tramadol&group_1_route=oral"
            "&group_2_ap=opioid&group_2_route=oral",
            taxonomy,
        )
        assert tramadol.spec.groups[1].excluded_ap_ids == frozenset({"tramadol"})

        four_way = parse_search_params(
            "group_1_indication=peripheral%20neuropathic%20pain,&group_1_ap=pregabalin"
            "&group_2_indication=peripheral%20neuropathic%20pain,&group_2_ap=duloxetine"
            "&group_3_indication=peripheral%20neuropathic%20pain,&group_3_ap=tapentadol"
            "&group_4_indication=peripheral%20neuropathic%20pain,&group_4_ap=gabapentin",
            taxonomy,
        )
        assert len(four_way.spec.groups) == 4
        assert all(
            g.indication_ids == frozenset({"peripheral_neuropathic_pain"})
            for g in four_way.spec.groups
        )
        assert [g.ap_specs[0].ap_id for g in four_way.spec.groups] == [
            "pregabalin", "duloxetine", "tapentadol", "gabapentin",
        ]

        deep_link = parse_search_params(
            "group_1_indication=peripheral%20neuropathic%20pain&group_1_ap=pregabalin"
            "&group_2_indication=peripheral%20neuropathic%20pain&group_2_ap=gabapentin"
            "&tab=1",
            taxonomy,
        )
        assert deep_link.tab == 1
        report("C8 URL scheme (canonical deep-link forms incl. automatic exclusion)")


class TestC9ServiceContract:
    def test_contract_against_fixture_dataset(self, dataset):
        client = TestClient(create_app(dataset))

        search = client.get(
            "/api/search",
            params={
                "group_1_ap": "tapentadol", "group_1_indication": "acute pain",
                "group_2_ap": "opioid", "group_2_indication": "acute pain",
                "set": "direct",
            },
        )
        assert search.status_code == 200
        body = search.json()
        assert body["groups"][1]["caption"] == "other opioid"
        assert body["groups"][0]["svg"].startswith("<svg")
        assert "comparable_treatments" in body["tabs"]
        assert "treatment_summary" not in body["tabs"]

        summary = client.get(
            "/api/search", params={"group_1_indication": "peripheral neuropathic pain"}
        )
        assert "treatment_summary" in summary.json()["tabs"]
        assert "comparable_treatments" not in summary.json()["tabs"]

        auto = client.get(
            "/api/autocomplete", params={"kind": "active_principle", "q": "ibu"}
        )
        assert auto.status_code == 200
        assert auto.json()[0]["id"] == "ibuprofen"

        detail = client.get("/api/trials/NCT00000001")
        assert detail.status_code == 200
        assert sum(
            len(g["events"]) for g in detail.json()["periods"][0]["groups"]
        ) == 8

        assert client.get("/api/search").status_code == 400
        assert client.get(
            "/api/search", params={"group_1_ap": "notadrug"}
        ).status_code == 400
        assert client.get("/api/trials/NCT40400000").status_code == 404
        assert client.get("/healthz").status_code == 200
        report("C9 service contract (search, autocomplete, detail, tabs, 400/404)")
