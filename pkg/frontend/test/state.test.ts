import { describe, expect, it } from "vitest";

import {
  addComparableTreatments,
  compareSelectedTreatments,
  emptyGroup,
  emptyPrincipal,
  fromQueryString,
  hasCriteria,
  initialState,
  restrictToIndication,
  setLang,
  setResultSet,
  setTrialIncluded,
  toQueryString,
} from "../src/state.js";

const DEEP_LINK_URLS = [
  "group_1_ap=acetaminophen&group_1_route=oral&group_2_ap=ibuprofen&group_2_route=oral",
  "group_1_ap=elagolix&group_2_ap=placebo",
  "group_1_indication=acute%20pain&group_1_ap=tapentadol&group_1_route=oral" +
    "&group_2_indication=acute%20pain&group_2_ap=opioid&group_2_route=oral",
  "group_1_ap=tramadol&group_1_route=oral&group_2_ap=opioid&group_2_route=oral",
  "group_1_indication=peripheral%20neuropathic%20pain,&group_1_ap=pregabalin" +
    "&group_2_indication=peripheral%20neuropathic%20pain,&group_2_ap=duloxetine" +
    "&group_3_indication=peripheral%20neuropathic%20pain,&group_3_ap=tapentadol" +
    "&group_4_indication=peripheral%20neuropathic%20pain,&group_4_ap=gabapentin",
  "group_1_indication=peripheral%20neuropathic%20pain&group_1_ap=pregabalin" +
    "&group_2_indication=peripheral%20neuropathic%20pain&group_2_ap=gabapentin&tab=1",
];

describe("URL codec", () => {
  it("round-trips every canonical deep-link URL to a fixed point", () => {
    for (const url of DEEP_LINK_URLS) {
      const once = toQueryString(fromQueryString(url));
      const twice = toQueryString(fromQueryString(once));
      expect(twice).toBe(once);
    }
  });

  it("parses the tapentadol comparison into two groups", () => {
    const state = fromQueryString(DEEP_LINK_URLS[2]);
    expect(state.groups).toHaveLength(2);
    expect(state.groups[0].principals[0].ap).toBe("tapentadol");
    expect(state.groups[0].principals[0].route).toBe("oral");
    expect(state.groups[0].indications).toEqual(["acute pain"]);
    expect(state.groups[1].principals[0].ap).toBe("opioid");
  });

  it("tolerates trailing commas in shared deep links", () => {
    const state = fromQueryString(DEEP_LINK_URLS[4]);
    expect(state.groups).toHaveLength(4);
    for (const group of state.groups) {
      expect(group.indications).toEqual(["peripheral neuropathic pain"]);
    }
  });

  it("keeps the deep-linked tab index", () => {
    expect(fromQueryString(DEEP_LINK_URLS[5]).tab).toBe(1);
  });

  it("treats ', etc' as the open-list marker", () => {
    const state = fromQueryString("group_1_ap=morphine,%20etc");
    expect(state.groups[0].openList).toBe(true);
    expect(state.groups[0].principals.map((p) => p.ap)).toEqual(["morphine"]);
    expect(toQueryString(state)).toBe("group_1_ap=morphine%2Cetc");
  });

  it("aligns per-principle fields by comma position", () => {
    const state = fromQueryString(
      "group_1_ap=morphine,acetaminophen&group_1_dose=10,500-1000&group_1_unit=mg,mg",
    );
    expect(state.groups[0].principals[0].dose).toBe("10");
    expect(state.groups[0].principals[1].dose).toBe("500-1000");
    const again = fromQueryString(toQueryString(state));
    expect(again).toEqual(state);
  });

  it("serializes non-default options and restores them", () => {
    const state = fromQueryString(
      "group_1_ap=tramadol&set=mixed&lang=fr&tab=3&exclude_trials=NCT2,NCT1",
    );
    expect(state.set).toBe("mixed");
    expect(state.lang).toBe("fr");
    expect(state.excludeTrials).toEqual(["NCT2", "NCT1"]);
    const url = toQueryString(state);
    expect(url).toContain("set=mixed");
    expect(url).toContain("lang=fr");
    expect(url).toContain("tab=3");
    expect(url).toContain("exclude_trials=NCT1%2CNCT2");
  });

  it("flags empty forms as lacking criteria", () => {
    expect(hasCriteria(initialState())).toBe(false);
    expect(hasCriteria(fromQueryString("group_1_ap=tramadol"))).toBe(true);
    expect(
      hasCriteria(fromQueryString("group_1_indication=acute%20pain")),
    ).toBe(true);
  });
});

describe("deep-link equivalence", () => {
  it("an interaction sequence and the pasted URL produce one request", () => {
    // Interactions: type tapentadol+oral+acute pain, add a second group,
    // type opioid+oral+acute pain.
    let built = initialState();
    built = {
      ...built,
      groups: [
        {
          ...emptyGroup(),
          indications: ["acute pain"],
          principals: [{ ...emptyPrincipal(), ap: "tapentadol", route: "oral" }],
        },
        {
          ...emptyGroup(),
          indications: ["acute pain"],
          principals: [{ ...emptyPrincipal(), ap: "opioid", route: "oral" }],
        },
      ],
    };
    const pasted = fromQueryString(DEEP_LINK_URLS[2]);
    expect(toQueryString(built)).toBe(toQueryString(pasted));
    expect(pasted.groups).toEqual(built.groups);
  });

  it("tab actions reach the same state as their deep links", () => {
    // Indication-summary radio on a drug search.
    const start = fromQueryString("group_1_ap=acetaminophen&group_2_ap=ibuprofen");
    const restricted = restrictToIndication(start, "dental pain");
    expect(toQueryString(restricted)).toBe(
      toQueryString(
        fromQueryString(
          "group_1_ap=acetaminophen&group_1_indication=dental%20pain" +
            "&group_2_ap=ibuprofen&group_2_indication=dental%20pain",
        ),
      ),
    );

    // Treatment-summary checkboxes on an indication-only search.
    const summary = fromQueryString(
      "group_1_indication=peripheral%20neuropathic%20pain",
    );
    const compared = compareSelectedTreatments(summary, [
      "pregabalin", "duloxetine", "tapentadol", "gabapentin",
    ]);
    expect(compared.groups).toHaveLength(4);
    expect(toQueryString(compared)).toBe(
      toQueryString(fromQueryString(DEEP_LINK_URLS[4])),
    );

    // Comparable-treatments checkbox: elagolix gains a placebo arm.
    const elagolix = fromQueryString("group_1_ap=elagolix");
    const withPlacebo = addComparableTreatments(elagolix, ["placebo"]);
    expect(toQueryString(withPlacebo)).toBe(
      toQueryString(fromQueryString(DEEP_LINK_URLS[1])),
    );

    // Trial-list checkbox round-trip.
    const excluded = setTrialIncluded(elagolix, "NCT00000005", false);
    expect(toQueryString(excluded)).toContain("exclude_trials=NCT00000005");
    const restored = setTrialIncluded(excluded, "NCT00000005", true);
    expect(toQueryString(restored)).toBe(toQueryString(elagolix));
  });

  it("language and result-set switches keep the rest of the state", () => {
    const base = fromQueryString(DEEP_LINK_URLS[3]);
    const fr = setLang(base, "fr");
    const mixed = setResultSet(fr, "mixed");
    const reparsed = fromQueryString(toQueryString(mixed));
    expect(reparsed.lang).toBe("fr");
    expect(reparsed.set).toBe("mixed");
    expect(reparsed.groups).toEqual(base.groups);
  });
});
