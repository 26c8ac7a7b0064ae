"""End-to-end orchestration: portfolio CSV in, network/embedding/analysis JSON,
report tables and figures out.

Yearly runs are independent; a longitudinal run joins two completed yearly
runs on bank identifier and correlates the centered coordinates.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import embedding as emb
from . import figures, network, stats
from .errors import DegenerateDataError, SchemaError
from .geometry import PoincarePolar, center_points, hyperbolic_mean, to_poincare

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """Inputs and knobs for yearly and longitudinal runs."""

    inputs: dict[str, Path] = field(default_factory=dict)        # year -> portfolio CSV
    annotations: dict[str, Path] = field(default_factory=dict)   # year -> annotation CSV
    outdir: Path = Path("out")
    dim: int = 2
    opts: emb.OptimizerOptions = field(default_factory=emb.OptimizerOptions)
    norm_mode: str = "offdiag"
    decile: float = 0.1
    refine_euclidean: bool = True
    regions_path: Path | None = None
    chords: bool = False
    aggregate: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("embedding dimension must be >= 1")
        if not 0.0 < self.decile < 1.0:
            raise ValueError("backbone decile must lie in (0, 1)")
        self.outdir = Path(self.outdir)


# ---------------------------------------------------------------------------
# input files

def read_portfolio_csv(path) -> network.PortfolioMatrix:
    """Parse a portfolio CSV: header `bank_id,<asset_1>,...`, one row per bank,
    nonnegative decimal EUR amounts. Violations raise SchemaError with the
    offending line and column."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read portfolio CSV: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file", line=1) from None
        if not header or header[0].strip() != "bank_id":
            raise SchemaError(f"{path}: first header column must be 'bank_id'", line=1, column=1)
        assets = [h.strip() for h in header[1:]]
        if any(not a for a in assets):
            col = 2 + assets.index("")
            raise SchemaError(f"{path}: empty asset identifier", line=1, column=col)
        banks: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}: expected {len(header)} fields, got {len(row)}",
                                  line=lineno)
            bank = row[0].strip()
            if not bank:
                raise SchemaError(f"{path}: empty bank identifier", line=lineno, column=1)
            values = []
            for col, cell in enumerate(row[1:], start=2):
                try:
                    v = float(cell)
                except ValueError:
                    raise SchemaError(f"{path}: not a decimal number: {cell!r}",
                                      line=lineno, column=col) from None
                if not np.isfinite(v) or v < 0.0:
                    raise SchemaError(f"{path}: holdings must be finite and >= 0, got {cell!r}",
                                      line=lineno, column=col)
                values.append(v)
            banks.append(bank)
            rows.append(values)
    if len(set(banks)) != len(banks):
        dup = next(b for b in banks if banks.count(b) > 1)
        raise SchemaError(f"{path}: duplicate bank identifier {dup!r}",
                          line=2 + banks.index(dup))
    if len(set(assets)) != len(assets):
        dup = next(a for a in assets if assets.count(a) > 1)
        raise SchemaError(f"{path}: duplicate asset identifier {dup!r}",
                          line=1, column=2 + assets.index(dup))
    try:
        return network.PortfolioMatrix(banks=banks, assets=assets, values=np.array(rows))
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


def read_annotations_csv(path, valid_regions: set[str]) -> dict[str, stats.BankAnnotation]:
    """Parse `bank_id,gsib,region` rows. An empty region cell means 'derive from
    the bank-id prefix'; it is stored as ''."""
    path = Path(path)
    out: dict[str, stats.BankAnnotation] = {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read annotation CSV: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["bank_id", "gsib", "region"]:
            raise SchemaError(f"{path}: header must be 'bank_id,gsib,region'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise SchemaError(f"{path}: expected 3 fields, got {len(row)}", line=lineno)
            bank = row[0].strip()
            flag = row[1].strip().lower()
            region = row[2].strip()
            if flag in _TRUE:
                gsib = True
            elif flag in _FALSE:
                gsib = False
            else:
                raise SchemaError(f"{path}: gsib must be true/false, got {row[1]!r}",
                                  line=lineno, column=2)
            if region and region != "unassigned" and region not in valid_regions:
                raise SchemaError(f"{path}: unknown region {region!r}", line=lineno, column=3)
            if bank in out:
                raise SchemaError(f"{path}: duplicate bank identifier {bank!r}", line=lineno,
                                  column=1)
            out[bank] = stats.BankAnnotation(bank_id=bank, gsib=gsib, region=region)
    return out


def load_region_map(path=None) -> dict[str, str]:
    """Country-prefix -> regional-group mapping; the shipped default implements
    nine European groups and may be overridden by a user JSON file."""
    if path is None:
        text = resources.files("firegeo").joinpath("data/regions.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    mapping = json.loads(text)
    if not isinstance(mapping, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in mapping.items()):
        raise SchemaError("region map must be a JSON object of strings")
    return mapping


def region_for(bank_id: str, region_map: dict[str, str]) -> str:
    """Region from the leading alphabetic prefix of the bank id ('FR02' -> 'FR')."""
    prefix = ""
    for ch in bank_id:
        if not ch.isalpha():
            break
        prefix += ch
    return region_map.get(prefix, "unassigned")


# ---------------------------------------------------------------------------
# artifact serialization

def write_json(obj: dict, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _test_result_dict(result: stats.TestResult) -> dict:
    return {
        "statistic": result.statistic,
        "p_value": result.p_value,
        "method": result.method,
        "n_effective": list(result.n_effective),
    }


def network_to_dict(net: network.OverlapNetwork, year: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "network",
        "year": year,
        "norm_mode": net.norm_mode,
        "banks": net.banks,
        "assets": net.assets,
        "depths": net.depths.tolist(),
        "capital": net.capital.tolist(),
        "lwpo": net.lwpo.tolist(),
        "weights": net.weights.tolist(),
        "dissimilarities": net.dissimilarities.tolist(),
        "dropped_assets": net.dropped_assets,
        "isolated_banks": net.isolated_banks,
    }


def network_from_dict(doc: dict) -> network.OverlapNetwork:
    return network.OverlapNetwork(
        banks=list(doc["banks"]),
        lwpo=np.array(doc["lwpo"]),
        weights=np.array(doc["weights"]),
        dissimilarities=np.array(doc["dissimilarities"]),
        depths=np.array(doc["depths"]),
        capital=np.array(doc["capital"]),
        assets=list(doc.get("assets", [])),
        norm_mode=doc.get("norm_mode", "offdiag"),
        dropped_assets=list(doc.get("dropped_assets", [])),
        isolated_banks=list(doc.get("isolated_banks", [])),
    )


def _load_artifact(path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise SchemaError(f"cannot read {kind} artifact: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    if doc.get("kind") != kind:
        raise SchemaError(f"{path}: not a {kind} artifact")
    return doc


def load_network_json(path) -> tuple[network.OverlapNetwork, dict]:
    doc = _load_artifact(path, "network")
    return network_from_dict(doc), doc


def load_embedding_json(path) -> dict:
    return _load_artifact(path, "embedding")


def coordinates_from_embedding(doc: dict) -> list[stats.BankCoordinate]:
    return [stats.BankCoordinate(rec["bank_id"], rec["r"], rec["theta"])
            for rec in doc["polar"]]


# ---------------------------------------------------------------------------
# yearly run

def embed_and_center(net: network.OverlapNetwork, config: RunConfig):
    """Embed the dissimilarities in both geometries and center the hyperbolic
    embedding at the capital-weighted hyperbolic mean."""
    dissim = emb.DissimilarityMatrix(labels=net.banks, values=net.dissimilarities)
    hyp = emb.embed_hyperbolic(dissim, dim=config.dim, opts=config.opts)
    euc = emb.embed_euclidean(dissim, dim=config.dim, opts=config.opts,
                              refine=config.refine_euclidean)
    total = net.capital.sum()
    if total <= 0.0:
        raise DegenerateDataError("degenerate network: no capital in the sample")
    weights = net.capital / total
    center = hyperbolic_mean(hyp.points, weights)
    centered = center_points(hyp.points, center.mean)
    polar = [to_poincare(x) for x in centered]
    return dissim, hyp, euc, center, polar


def _resolve_annotations(net: network.OverlapNetwork, config: RunConfig,
                         year: str) -> tuple[list[bool | None], list[str]]:
    """Per-bank systemic-importance flags (None when unlabelled) and regions.
    Annotation-file regions win; empty or missing ones fall back to the
    bank-id prefix mapping."""
    region_map = load_region_map(config.regions_path)
    annotation_path = config.annotations.get(year)
    annotations = {}
    if annotation_path is not None:
        annotations = read_annotations_csv(annotation_path, set(region_map.values()))
    gsib: list[bool | None] = []
    regions: list[str] = []
    for bank in net.banks:
        ann = annotations.get(bank)
        gsib.append(ann.gsib if ann is not None else None)
        if ann is not None and ann.region:
            regions.append(ann.region)
        else:
            regions.append(region_for(bank, region_map))
    return gsib, regions


def analyze_year(net: network.OverlapNetwork, coords: list[stats.BankCoordinate],
                 gsib: list[bool | None], regions: list[str],
                 hyp_stress: float, euc_stress: float, year: str) -> dict:
    """Assemble the per-year analysis document: deciles, ranking, label tests."""
    deciles = network.weight_deciles(net.weights)
    ranking = stats.radial_ranking(coords)
    tests: dict[str, dict | None] = {}

    r_by_flag = {True: [], False: []}
    for c, flag in zip(coords, gsib):
        if flag is not None:
            r_by_flag[flag].append(c.r_prime)
    if r_by_flag[True] and r_by_flag[False]:
        res = stats.wilcoxon_mann_whitney(r_by_flag[True], r_by_flag[False])
        tests["gsib_radial"] = _test_result_dict(res) | {
            "median_r_gsib": float(np.median(r_by_flag[True])),
            "median_r_other": float(np.median(r_by_flag[False])),
        }
    else:
        tests["gsib_radial"] = None

    by_region: dict[str, list[float]] = {}
    for c, region in zip(coords, regions):
        if region != "unassigned":
            by_region.setdefault(region, []).append(c.theta_prime)
    usable = {g: v for g, v in by_region.items() if len(v) >= 2}
    if len(usable) >= 2:
        angles = [t for g in sorted(usable) for t in usable[g]]
        labels = [g for g in sorted(usable) for _ in usable[g]]
        res = stats.circular_anova(angles, labels)
        tests["region_angular"] = _test_result_dict(res) | {
            "groups": sorted(usable),
        }
    else:
        tests["region_angular"] = None

    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "analysis",
        "year": year,
        "n_banks": len(net.banks),
        "stress": {"hyperbolic": hyp_stress, "euclidean": euc_stress},
        "weight_deciles": {
            "quantiles": deciles.quantiles.tolist(),
            "interdecile_range": deciles.interdecile_range,
            "top_decile_threshold": deciles.top_threshold,
        },
        "ranking": [{"bank_id": c.bank_id, "r_prime": c.r_prime, "theta_prime": c.theta_prime}
                    for c in ranking],
        "tests": tests,
        "isolated_banks": net.isolated_banks,
    }


def _write_report_tables(outdir: Path, net: network.OverlapNetwork,
                         coords: list[stats.BankCoordinate], gsib: list[bool | None],
                         regions: list[str], analysis: dict, edges: list[tuple[int, int]]) -> None:
    with open(outdir / "coordinates.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bank_id", "r_prime", "theta_prime", "region", "gsib"])
        for c, g, region in zip(coords, gsib, regions):
            writer.writerow([c.bank_id, repr(c.r_prime), repr(c.theta_prime), region,
                             "" if g is None else str(g).lower()])
    with open(outdir / "ranking.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "bank_id", "r_prime"])
        for k, rec in enumerate(analysis["ranking"], start=1):
            writer.writerow([k, rec["bank_id"], repr(rec["r_prime"])])
    with open(outdir / "deciles.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quantile", "weight"])
        for k, v in enumerate(analysis["weight_deciles"]["quantiles"], start=1):
            writer.writerow([f"{k * 10}%", repr(v)])
    with open(outdir / "backbone.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bank_a", "bank_b", "weight"])
        for i, j in edges:
            writer.writerow([net.banks[i], net.banks[j], repr(float(net.weights[i, j]))])


def run_year(config: RunConfig, year: str) -> dict[str, Path]:
    """Full yearly pipeline. Writes network.json, embedding.json, analysis.json,
    figure.svg and the report tables/charts into `outdir/<year>/`."""
    portfolio = read_portfolio_csv(config.inputs[year])
    if config.aggregate:
        portfolio = network.aggregate_maturity_buckets(portfolio)
    net = network.build_network(portfolio, norm_mode=config.norm_mode)
    dissim, hyp, euc, center, polar = embed_and_center(net, config)
    coords = [stats.BankCoordinate(b, p.r, p.theta) for b, p in zip(net.banks, polar)]
    gsib, regions = _resolve_annotations(net, config, year)

    outdir = config.outdir / str(year)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {name: outdir / name for name in
             ("network.json", "embedding.json", "analysis.json", "figure.svg")}

    write_json(network_to_dict(net, year), paths["network.json"])
    write_json({
        "schema_version": SCHEMA_VERSION,
        "kind": "embedding",
        "year": year,
        "labels": net.banks,
        "dim": config.dim,
        "seed": config.opts.seed,
        "options": {
            "max_iter": config.opts.max_iter,
            "tol": config.opts.tol,
            "restarts": config.opts.restarts,
            "curvature": config.opts.curvature,
            "norm_mode": config.norm_mode,
            "refine_euclidean": config.refine_euclidean,
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
    }, paths["embedding.json"])

    analysis = analyze_year(net, coords, gsib, regions, hyp.stress, euc.stress, year)
    write_json(analysis, paths["analysis.json"])

    edges = network.backbone_edges(net.weights, fraction=config.decile)
    spec = figures.FigureSpec(
        labels=net.banks,
        polar=polar,
        regions=regions,
        gsib=[bool(g) for g in gsib],
        edges=edges,
        center=PoincarePolar(0.0, 0.0),
        chords=config.chords,
        title=f"Overlap network {year}" if year else "Overlap network",
    )
    figures.render_svg(spec, paths["figure.svg"])

    _write_report_tables(outdir, net, coords, gsib, regions, analysis, edges)
    figures.plot_weight_distribution(net.weights, outdir / "weight_distribution.png",
                                     title=str(year))
    figures.plot_stress_comparison({str(year): (hyp.stress, euc.stress)},
                                   outdir / "stress_comparison.png")
    return paths


# ---------------------------------------------------------------------------
# longitudinal run

def longitudinal_analysis(coords_a: list[stats.BankCoordinate],
                          coords_b: list[stats.BankCoordinate],
                          year_a: str = "A", year_b: str = "B",
                          top_outliers: int = 5) -> tuple[dict, stats.MatchedSamples]:
    """Match the two samples and correlate radial (Pearson) and angular
    (circular) coordinates; list the largest radial movers."""
    matched = stats.match_samples(coords_a, coords_b)
    r_a = [c.r_prime for c in matched.coords_a]
    r_b = [c.r_prime for c in matched.coords_b]
    t_a = [c.theta_prime for c in matched.coords_a]
    t_b = [c.theta_prime for c in matched.coords_b]
    radial = stats.pearson_correlation(r_a, r_b)
    angular = stats.circular_correlation(t_a, t_b)
    deltas = sorted(
        ({"bank_id": bank, "r_prime_a": ra, "r_prime_b": rb, "delta": rb - ra}
         for bank, ra, rb in zip(matched.banks, r_a, r_b)),
        key=lambda rec: (-abs(rec["delta"]), rec["bank_id"]),
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "analysis-delta",
        "year_a": year_a,
        "year_b": year_b,
        "matched": {
            "count": matched.count,
            "banks": matched.banks,
            "dropped_a": matched.dropped_a,
            "dropped_b": matched.dropped_b,
        },
        "radial_pearson": _test_result_dict(radial),
        "angular_circular": _test_result_dict(angular),
        "outliers": deltas[:top_outliers],
    }
    return doc, matched


def longitudinal_from_artifacts(embedding_a_path, embedding_b_path, out_dir,
                                annotations_b: dict[str, stats.BankAnnotation] | None = None
                                ) -> dict[str, Path]:
    """Longitudinal comparison of two completed yearly runs."""
    doc_a = load_embedding_json(embedding_a_path)
    doc_b = load_embedding_json(embedding_b_path)
    year_a = str(doc_a.get("year", "A"))
    year_b = str(doc_b.get("year", "B"))
    coords_a = coordinates_from_embedding(doc_a)
    coords_b = coordinates_from_embedding(doc_b)
    delta, matched = longitudinal_analysis(coords_a, coords_b, year_a, year_b)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    delta_path = out_dir / "analysis-delta.json"
    write_json(delta, delta_path)

    with open(out_dir / "matched.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bank_id", "r_prime_a", "r_prime_b", "theta_prime_a", "theta_prime_b"])
        for bank, ca, cb in zip(matched.banks, matched.coords_a, matched.coords_b):
            writer.writerow([bank, repr(ca.r_prime), repr(cb.r_prime),
                             repr(ca.theta_prime), repr(cb.theta_prime)])

    highlight = np.array([annotations_b[b].gsib if annotations_b and b in annotations_b else False
                          for b in matched.banks])
    figures.plot_radial_change(
        np.array([c.r_prime for c in matched.coords_a]),
        np.array([c.r_prime for c in matched.coords_b]),
        highlight,
        out_dir / "radial_change.png",
        label_a=year_a, label_b=year_b,
    )
    return {"analysis-delta.json": delta_path}


def run_longitudinal(config: RunConfig, year_a: str, year_b: str) -> dict[str, Path]:
    """Compare two completed yearly runs living under config.outdir."""
    annotations_b = None
    ann_path = config.annotations.get(year_b)
    if ann_path is not None:
        region_map = load_region_map(config.regions_path)
        annotations_b = read_annotations_csv(ann_path, set(region_map.values()))
    return longitudinal_from_artifacts(
        config.outdir / str(year_a) / "embedding.json",
        config.outdir / str(year_b) / "embedding.json",
        config.outdir / f"longitudinal-{year_a}-{year_b}",
        annotations_b=annotations_b,
    )
