"""Command-line interface.

Subcommands: infer, embed, analyze, run, longitudinal, render.
Exit codes: 0 success, 2 input schema violation, 3 degenerate data
(no overlapping portfolios / no common banks), 4 figure I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import embedding as emb
from . import figures, network, pipeline
from .errors import DegenerateDataError, SchemaError
from .geometry import PoincarePolar

PORTFOLIO_SCHEMA_HELP = (
    "Portfolio CSV schema: UTF-8, comma-separated, '.' decimal point, no "
    "thousands separators. Header row 'bank_id,<asset_id_1>,...,<asset_id_m>'; "
    "one row per bank with nonnegative EUR amounts. Annotation CSV schema: "
    "header 'bank_id,gsib,region'; gsib is true/false; region is one of the "
    "configured regional groups, 'unassigned', or empty (derive from the "
    "bank-id country prefix)."
)


def _add_embed_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=2, help="embedding dimension (default 2)")
    p.add_argument("--seed", type=int, default=0, help="seed for stochastic restarts")
    p.add_argument("--max-iter", type=int, default=2000, help="descent iteration cap")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="relative stress-decrease convergence threshold")
    p.add_argument("--restarts", type=int, default=1, help="number of descent starts")
    p.add_argument("--refine-euclidean", action=argparse.BooleanOptionalAction, default=True,
                   help="refine the classical-MDS baseline by stress descent")


def _add_annotation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--annotations", type=Path, default=None,
                   help="per-bank annotation CSV (bank_id,gsib,region)")
    p.add_argument("--regions", type=Path, default=None,
                   help="JSON file mapping bank-id prefixes to regional groups")


def _opts(args) -> emb.OptimizerOptions:
    return emb.OptimizerOptions(max_iter=args.max_iter, tol=args.tol,
                                seed=args.seed, restarts=args.restarts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firegeo",
        description="Infer fire-sale overlap networks from bank portfolios, embed them "
                    "into hyperbolic space, and analyse the latent coordinates.",
        epilog=PORTFOLIO_SCHEMA_HELP,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="portfolio CSV -> network.json",
                       epilog=PORTFOLIO_SCHEMA_HELP)
    p.add_argument("portfolio", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--year", default="", help="free-form year label")
    p.add_argument("--norm", choices=("offdiag", "all"), default="offdiag",
                   help="weight-normalization maximum: off-diagonal only, or all entries")
    p.add_argument("--aggregate", action="store_true",
                   help="collapse raw COUNTRY:BUCKET columns onto the canonical layout")

    p = sub.add_parser("embed", help="network.json -> embedding.json")
    p.add_argument("network", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_embed_flags(p)

    p = sub.add_parser("analyze", help="embedding.json + network.json -> analysis.json")
    p.add_argument("embedding", type=Path)
    p.add_argument("network", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    _add_annotation_flags(p)

    p = sub.add_parser("run", help="full yearly pipeline into an output directory",
                       epilog=PORTFOLIO_SCHEMA_HELP)
    p.add_argument("portfolio", type=Path)
    p.add_argument("--year", required=True, help="free-form year label")
    p.add_argument("--outdir", type=Path, required=True)
    p.add_argument("--norm", choices=("offdiag", "all"), default="offdiag")
    p.add_argument("--decile", type=float, default=0.1,
                   help="backbone fraction of heaviest edges for the figure")
    p.add_argument("--chords", action="store_true",
                   help="draw straight chords instead of geodesic arcs")
    p.add_argument("--aggregate", action="store_true")
    _add_annotation_flags(p)
    _add_embed_flags(p)

    p = sub.add_parser("longitudinal", help="compare two completed yearly runs")
    p.add_argument("dir_a", type=Path, help="output directory of the earlier run")
    p.add_argument("dir_b", type=Path, help="output directory of the later run")
    p.add_argument("-o", "--outdir", type=Path, required=True)
    p.add_argument("--annotations", type=Path, default=None,
                   help="annotation CSV of the later year (marks G-SIBs in the chart)")
    p.add_argument("--regions", type=Path, default=None)

    p = sub.add_parser("render", help="embedding.json + network.json -> figure.svg")
    p.add_argument("embedding", type=Path)
    p.add_argument("network", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--decile", type=float, default=0.1)
    p.add_argument("--chords", action="store_true")
    _add_annotation_flags(p)

    return parser


def _cmd_infer(args) -> None:
    portfolio = pipeline.read_portfolio_csv(args.portfolio)
    if args.aggregate:
        portfolio = network.aggregate_maturity_buckets(portfolio)
    net = network.build_network(portfolio, norm_mode=args.norm)
    pipeline.write_json(pipeline.network_to_dict(net, args.year), args.output)
    print(f"wrote {args.output} (n={len(net.banks)} banks, m={len(net.assets)} assets)")


def _cmd_embed(args) -> None:
    net, doc = pipeline.load_network_json(args.network)
    config = pipeline.RunConfig(dim=args.dim, opts=_opts(args),
                                refine_euclidean=args.refine_euclidean,
                                norm_mode=net.norm_mode)
    dissim, hyp, euc, center, polar = pipeline.embed_and_center(net, config)
    pipeline.write_json({
        "schema_version": pipeline.SCHEMA_VERSION,
        "kind": "embedding",
        "year": doc.get("year", ""),
        "labels": net.banks,
        "dim": args.dim,
        "seed": args.seed,
        "options": {
            "max_iter": args.max_iter,
            "tol": args.tol,
            "restarts": args.restarts,
            "curvature": -1.0,
            "norm_mode": net.norm_mode,
            "refine_euclidean": args.refine_euclidean,
        },
        "hyperbolic": {
            "points": hyp.points.tolist(),
            "stress": hyp.stress,
            "iterations": hyp.iterations,
            "converged": hyp.converged,
        },
        "euclidean": {"points": euc.points.tolist(), "stress": euc.stress},
        "center": {"point": center.mean.tolist(),
                   "resultant_length": center.resultant_length},
        "polar": [{"bank_id": b, "r": p.r, "theta": p.theta}
                  for b, p in zip(net.banks, polar)],
    }, args.output)
    print(f"wrote {args.output} (hyperbolic stress {hyp.stress:.6f}, "
          f"euclidean stress {euc.stress:.6f})")


def _annotation_state(args, net):
    region_map = pipeline.load_region_map(args.regions)
    annotations = {}
    if args.annotations is not None:
        annotations = pipeline.read_annotations_csv(args.annotations, set(region_map.values()))
    gsib = []
    regions = []
    for bank in net.banks:
        ann = annotations.get(bank)
        gsib.append(ann.gsib if ann is not None else None)
        if ann is not None and ann.region:
            regions.append(ann.region)
        else:
            regions.append(pipeline.region_for(bank, region_map))
    return gsib, regions


def _cmd_analyze(args) -> None:
    net, _ = pipeline.load_network_json(args.network)
    doc = pipeline.load_embedding_json(args.embedding)
    coords = pipeline.coordinates_from_embedding(doc)
    gsib, regions = _annotation_state(args, net)
    analysis = pipeline.analyze_year(
        net, coords, gsib, regions,
        hyp_stress=doc["hyperbolic"]["stress"],
        euc_stress=doc["euclidean"]["stress"],
        year=str(doc.get("year", "")),
    )
    pipeline.write_json(analysis, args.output)
    print(f"wrote {args.output}")


def _cmd_run(args) -> None:
    year = str(args.year)
    config = pipeline.RunConfig(
        inputs={year: args.portfolio},
        annotations={} if args.annotations is None else {year: args.annotations},
        outdir=args.outdir,
        dim=args.dim,
        opts=_opts(args),
        norm_mode=args.norm,
        decile=args.decile,
        refine_euclidean=args.refine_euclidean,
        regions_path=args.regions,
        chords=args.chords,
        aggregate=args.aggregate,
    )
    paths = pipeline.run_year(config, year)
    doc = json.loads(paths["analysis.json"].read_text("utf-8"))
    print(f"year {year}: n={doc['n_banks']} banks; "
          f"hyperbolic stress {doc['stress']['hyperbolic']:.6f}, "
          f"euclidean stress {doc['stress']['euclidean']:.6f}")
    for p in paths.values():
        print(f"wrote {p}")


def _cmd_longitudinal(args) -> None:
    annotations_b = None
    if args.annotations is not None:
        region_map = pipeline.load_region_map(args.regions)
        annotations_b = pipeline.read_annotations_csv(args.annotations,
                                                      set(region_map.values()))
    paths = pipeline.longitudinal_from_artifacts(
        Path(args.dir_a) / "embedding.json",
        Path(args.dir_b) / "embedding.json",
        args.outdir,
        annotations_b=annotations_b,
    )
    doc = json.loads(paths["analysis-delta.json"].read_text("utf-8"))
    print(f"matched {doc['matched']['count']} banks; "
          f"radial Pearson r={doc['radial_pearson']['statistic']:.4f} "
          f"(p={doc['radial_pearson']['p_value']:.4g}); "
          f"angular circular rho={doc['angular_circular']['statistic']:.4f} "
          f"(p={doc['angular_circular']['p_value']:.4g})")
    print(f"wrote {paths['analysis-delta.json']}")


def _cmd_render(args) -> None:
    net, _ = pipeline.load_network_json(args.network)
    doc = pipeline.load_embedding_json(args.embedding)
    gsib, regions = _annotation_state(args, net)
    polar = [PoincarePolar(rec["r"], rec["theta"]) for rec in doc["polar"]]
    spec = figures.FigureSpec(
        labels=list(doc["labels"]),
        polar=polar,
        regions=regions,
        gsib=[bool(g) for g in gsib],
        edges=network.backbone_edges(net.weights, fraction=args.decile),
        center=PoincarePolar(0.0, 0.0),
        chords=args.chords,
        title=str(doc.get("year", "")),
    )
    figures.render_svg(spec, args.output)
    print(f"wrote {args.output}")


_COMMANDS = {
    "infer": _cmd_infer,
    "embed": _cmd_embed,
    "analyze": _cmd_analyze,
    "run": _cmd_run,
    "longitudinal": _cmd_longitudinal,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
