"""Command line entry points.

    ade-miner ingest   --xml-dir DIR --curation FILE --taxonomy FILE \\
                       --terms FILE --out DATASET_DIR [--soc FILE]
    ade-miner prefill  --xml-dir DIR --taxonomy FILE --out FILE.csv
    ade-miner score    --auto FILE.csv --curated FILE.csv
    ade-miner query    --dataset DIR --params QUERYSTRING [--set KIND] [--explain]
    ade-miner render   --profile FILE.json --out FILE.svg [--reference R]
    ade-miner serve    --dataset DIR [--bind HOST:PORT] [--assets DIR]
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .model import dataset_summary
from .normalization import AdeProfile, CategoryRates, TermRates, build_query_profiles
from .query import execute
from .storage import export_dataset, load_dataset


def _cmd_ingest(args) -> int:
    from .ingest import ingest_directory

    ds = ingest_directory(
        xml_dir=args.xml_dir,
        curation_path=args.curation,
        taxonomy_path=args.taxonomy,
        terms_path=args.terms,
        soc_path=args.soc,
    )
    export_dataset(ds, args.out)
    s = dataset_summary(ds)
    print(
        f"ingested {s.trials} trials, {s.groups} groups, {s.patients} patients "
        f"({s.titration_patients} in titration periods), {s.observations} observations; "
        f"{s.mapped_terms}/{s.distinct_terms} terms mapped "
        f"({100 * s.mapped_fraction:.1f}%)"
    )
    print(f"dataset written to {args.out}")
    return 0


def _cmd_prefill(args) -> int:
    from .ingest import export_curation_csv, parse_registry_xml, prefill_rows
    from .taxonomy import load_taxonomy

    taxonomy = load_taxonomy(Path(args.taxonomy).read_text(encoding="utf-8"))
    rows = []
    for path in sorted(Path(args.xml_dir).glob("*.xml")):
        parsed = parse_registry_xml(path.read_text(encoding="utf-8"))
        rows.extend(prefill_rows(parsed, taxonomy))
    Path(args.out).write_text(export_curation_csv(rows), encoding="utf-8")
    print(f"wrote {len(rows)} pre-filled rows to {args.out}")
    return 0


def _cmd_score(args) -> int:
    from .ingest import load_curation_csv, score_extraction

    auto = load_curation_csv(Path(args.auto).read_text(encoding="utf-8"))
    curated = load_curation_csv(Path(args.curated).read_text(encoding="utf-8"))
    scores = score_extraction(auto, curated)
    for field, value in scores.items():
        print(f"{field}: {100 * value:.1f}%")
    return 0


def _cmd_query(args) -> int:
    from .service.params import parse_search_params

    ds = load_dataset(args.dataset)
    parsed = parse_search_params(args.params, ds.taxonomy)
    kind = args.set or parsed.kind
    rs = execute(ds, parsed.spec, include_titration=parsed.include_titration)
    profiles = build_query_profiles(ds, parsed.spec, rs, kind)

    if args.explain:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(
            ["query_index", "trial_id", "group_id", "source", "w", "k_dir", "k_ind",
             "effective_weight"]
        )
        for qp in profiles:
            for w in qp.weights:
                writer.writerow(
                    [qp.query_index, w.trial_id, w.group_id, w.source.value,
                     f"{w.w:.6f}", f"{w.k_dir:.6f}", f"{w.k_ind:.6f}",
                     f"{w.effective:.6f}"]
                )
        writer.writerow([])
        writer.writerow(
            ["query_index", "trial_id", "group_id", "term", "serious", "raw",
             "corrected"]
        )
        for qp in profiles:
            for c in qp.corrected:
                writer.writerow(
                    [qp.query_index, c.trial_id, c.group_id, c.term_label,
                     str(c.serious).lower(), f"{c.raw:.6f}", f"{c.corrected:.6f}"]
                )
        return 0

    payload = [
        {
            "query_index": qp.query_index,
            "n_trials": qp.profile.n_trials,
            "effective_patients": qp.profile.effective_patients,
            "overall_rate": qp.profile.overall_rate,
            "overall_serious_rate": qp.profile.overall_serious_rate,
            "categories": {
                cid: {"total": r.total, "serious": r.serious}
                for cid, r in qp.profile.categories.items()
            },
            "corrections": list(qp.corrections),
        }
        for qp in profiles
    ]
    json.dump(payload, sys.stdout, indent=2)
    print()
    return 0


def _profile_from_json(data: dict) -> AdeProfile:
    categories = {
        cid: CategoryRates(total=v["total"], serious=v["serious"])
        for cid, v in data["categories"].items()
    }
    terms = {
        key: TermRates(
            total=v["total"], serious=v["serious"],
            category_ids=tuple(v.get("category_ids", ())),
        )
        for key, v in data.get("terms", {}).items()
    }
    return AdeProfile(
        categories=categories,
        terms=terms,
        n_trials=data.get("n_trials", 0),
        effective_patients=data.get("effective_patients", 0.0),
        overall_rate=data.get("overall_rate", sum(c.total for c in categories.values())),
        overall_serious_rate=data.get(
            "overall_serious_rate", sum(c.serious for c in categories.values())
        ),
    )


def _cmd_render(args) -> int:
    from .glyph import GlyphSpec, render_flower_svg, shared_reference_rate

    data = json.loads(Path(args.profile).read_text(encoding="utf-8"))
    profile = _profile_from_json(data)
    reference = args.reference or shared_reference_rate([profile])
    svg = render_flower_svg(
        GlyphSpec(
            profile=profile,
            reference_rate=reference,
            canvas_px=args.canvas,
            caption=args.caption,
        )
    )
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    dataset_dir = args.dataset or os.environ.get("ADE_DATASET")
    if not dataset_dir:
        print("no dataset: pass --dataset or set ADE_DATASET", file=sys.stderr)
        return 2
    bind = args.bind or os.environ.get("ADE_BIND", "127.0.0.1:8000")
    host, _, port = bind.rpartition(":")
    ds = load_dataset(dataset_dir)
    app = create_app(ds, assets_dir=args.assets)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ade-miner", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse registry XML + curation into a dataset")
    p.add_argument("--xml-dir", required=True)
    p.add_argument("--curation", required=True)
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--terms", required=True)
    p.add_argument("--soc", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("prefill", help="write a pre-curation CSV from registry XML")
    p.add_argument("--xml-dir", required=True)
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_prefill)

    p = sub.add_parser("score", help="compare pre- and post-curation CSVs per field")
    p.add_argument("--auto", required=True)
    p.add_argument("--curated", required=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("query", help="run a search against a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--params", required=True, help="URL-style query string")
    p.add_argument("--set", choices=("direct", "mixed", "absolute"), default=None)
    p.add_argument("--explain", action="store_true",
                   help="print every weight and corrected count as CSV")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("render", help="render a profile JSON as a flower glyph SVG")
    p.add_argument("--profile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--reference", type=float, default=None)
    p.add_argument("--canvas", type=int, default=520)
    p.add_argument("--caption", default="")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("serve", help="serve the JSON API and web UI")
    p.add_argument("--dataset", default=None)
    p.add_argument("--bind", default=None)
    p.add_argument("--assets", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as a clean one-line error
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
