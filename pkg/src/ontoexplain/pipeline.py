"""End-to-end explanation run: config in, report (and plot data) out."""

from __future__ import annotations

import json
import platform
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .classifiers import LRModel, knn_train, lr_predict, lr_train
from .completion import CompletionParams, ScoredConceptSet, complete
from .contraction import PROXIMITY, contract, dense_rank, importance, rank_groups
from .data_model import (
    Dataset,
    FeatureSchema,
    TestQuery,
    encode_vector,
    load_dataset,
    max_variance_feature,
    one_hot_encode,
    standardize,
)
from .errors import ConfigError, ExplainError, PipelineError, SemanticCoverageError
from .hull import class_hulls, convex_hull
from .ontology import load_ontology
from .representative import (
    GLOBAL,
    LOCAL,
    NEGATIVE,
    POSITIVE,
    EvidenceSet,
    SelectionParams,
    build_evidence_sets,
)
from .uplift import build_input_concepts, load_mapping, load_rules

CONFIG_STAGES = {"config", "load_dataset", "load_ontology", "load_blc_rules", "load_mapping"}


@dataclass
class RunConfig:
    dataset: str
    schema: FeatureSchema
    ontology: str
    blc_rules: str
    mapping: str
    seed: int
    model: str = "knn"
    k: int = 5
    iterations: int = 5000
    learning_rate: float = 0.1
    ridge: float = 0.0
    test_index: int | None = None
    test_values: dict | None = None
    selection: dict = field(default_factory=dict)
    completion: dict = field(default_factory=dict)
    delta: float = 0.3
    sigma: int = 3
    importance_mode: str = PROXIMITY
    accumulation: str = "proportion"
    report: str | None = None
    plot: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.model not in ("lr", "knn"):
            raise ConfigError(f"model must be 'lr' or 'knn', got {self.model!r}")
        if (self.test_index is None) == (self.test_values is None):
            raise ConfigError("exactly one of test index or inline test point is required")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("an integer seed is required")
        if self.format not in ("json", "table"):
            raise ConfigError(f"format must be 'json' or 'table', got {self.format!r}")
        if self.sigma < 1 or self.delta < 0:
            raise ConfigError("sigma must be >= 1 and delta >= 0")
        sel = {f.name for f in fields(SelectionParams)}
        bad = set(self.selection) - sel
        if bad:
            raise ConfigError(f"unknown selection keys: {sorted(bad)}")
        comp = {f.name for f in fields(CompletionParams)}
        bad = set(self.completion) - comp
        if bad:
            raise ConfigError(f"unknown completion keys: {sorted(bad)}")

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "RunConfig":
        base = Path(base) if base else Path.cwd()

        def resolve(p):
            if p is None:
                return None
            p = Path(p)
            return str(p if p.is_absolute() else base / p)

        try:
            data = doc["dataset"]
            model = doc.get("model", {})
            test = doc.get("test", {})
            con = doc.get("contraction", {})
            out = doc.get("output", {})
            if "seed" not in doc:
                raise ConfigError("seed is mandatory")
            return cls(
                dataset=resolve(data["path"]),
                schema=FeatureSchema.from_dict(data),
                ontology=resolve(doc["ontology"]),
                blc_rules=resolve(doc["blc_rules"]),
                mapping=resolve(doc["mapping"]),
                seed=doc["seed"],
                model=model.get("kind", "knn"),
                k=int(model.get("k", 5)),
                iterations=int(model.get("iterations", 5000)),
                learning_rate=float(model.get("learning_rate", 0.1)),
                ridge=float(model.get("ridge", 0.0)),
                test_index=test.get("index"),
                test_values=test.get("values"),
                selection=dict(doc.get("selection", {})),
                completion=dict(doc.get("completion", {})),
                delta=float(con.get("delta", 0.3)),
                sigma=int(con.get("sigma", 3)),
                importance_mode=con.get("importance", PROXIMITY),
                accumulation=doc.get("uplift", {}).get("accumulation", "proportion"),
                report=resolve(out.get("report")),
                plot=resolve(out.get("plot")),
                format=out.get("format", "json"),
            )
        except KeyError as exc:
            raise ConfigError(f"missing configuration key {exc}") from None

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(doc, path.parent)

    def echo(self) -> dict:
        d = asdict(self)
        d["schema"] = {
            "features": [{"name": f.name, "kind": f.kind, "categories": list(f.categories)}
                         for f in self.schema.features],
            "label_column": self.schema.label_column,
            "labels": list(self.schema.label_values),
            "positive_label": self.schema.positive_label,
        }
        for key in ("dataset", "ontology", "blc_rules", "mapping", "report", "plot"):
            if d[key] is not None:
                d[key] = Path(d[key]).name
        return d


@dataclass
class PlotData:
    axes: tuple[str, str]
    points: np.ndarray  # raw-scale 2-D projection of the training rows
    labels: np.ndarray
    test_point: np.ndarray
    hull_rows: tuple[int, ...]
    evidence: EvidenceSet | None


@dataclass
class ExplanationRun:
    report: dict
    plot: PlotData


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except (OSError, ExplainError, ValueError, KeyError) as exc:
        code = 2 if name in CONFIG_STAGES else 1
        raise PipelineError(name, exc, code) from exc


def _num(x, digits=10):
    return round(float(x), digits)


def _scored_dict(s: ScoredConceptSet) -> dict:
    return {
        "concepts": [{"concept": wc.concept, "weight": _num(wc.weight)} for wc in s.concepts],
        "scores": {"s_v": _num(s.s_v), "s_l": _num(s.s_l), "s_d": _num(s.s_d), "total": _num(s.total)},
        "matching": {c: sorted(src) for c, src in sorted(s.contributions.items())},
        "depth": s.depth,
        "restart": s.restart,
    }


def _evidence_dict(ev: EvidenceSet, raw_rows) -> dict:
    out = {}
    for pol in (POSITIVE, NEGATIVE):
        for kind in (GLOBAL, LOCAL):
            out[f"{pol}_{kind}"] = [
                {"row": p.row_index, "weight": _num(p.weight), "values": raw_rows[p.row_index]}
                for p in ev.group(pol, kind)
            ]
    return out


def _resolve_test(cfg: RunConfig, ds: Dataset):
    if cfg.test_index is not None:
        i = int(cfg.test_index)
        if not 0 <= i < ds.m:
            raise ConfigError(f"test index {i} outside [0, {ds.m})")
        raw = dict(ds.raw_rows[i])
        return raw, ds.without_row(i), i
    raw = {}
    for f in ds.schema.features:
        if f.name not in cfg.test_values:
            raise ConfigError(f"test point lacks feature {f.name!r}")
        v = cfg.test_values[f.name]
        if f.is_nominal:
            if str(v) not in f.categories:
                raise ConfigError(f"test point: unknown category {v!r} for {f.name!r}")
            raw[f.name] = str(v)
        else:
            raw[f.name] = float(v)
    return raw, ds, None


def _trace_rows(s: ScoredConceptSet, prov: dict) -> dict:
    out = {}
    for c, src in sorted(s.contributions.items()):
        rows = sorted({r for x in src for r in prov.get(x, [])})
        out[c] = rows
    return out


def run_pipeline(cfg: RunConfig) -> ExplanationRun:
    warnings: list[str] = []
    full = _stage("load_dataset", load_dataset, cfg.dataset, cfg.schema)
    onto = _stage("load_ontology", load_ontology, cfg.ontology)
    rules = _stage("load_blc_rules", load_rules, cfg.blc_rules)
    table = _stage("load_mapping", load_mapping, cfg.mapping)
    _stage("load_mapping", table.validate, onto)

    raw0, train, held_out = _stage("config", _resolve_test, cfg, full)
    enc = _stage("encode", one_hot_encode, train)
    std, scaler = _stage("standardize", standardize, enc)
    x0 = TestQuery(scaler.transform(encode_vector(cfg.schema, raw0)), raw0)

    def _train():
        if cfg.model == "lr":
            return lr_train(std, cfg.iterations, cfg.learning_rate, cfg.ridge, scaler=scaler)
        return knn_train(std, cfg.k)

    model = _stage("train", _train)
    if isinstance(model, LRModel):
        p, y0 = lr_predict(model, x0.point)
        x0.probability = p
    else:
        y0 = int(model.predict_labels(x0.point)[0])
    x0.predicted_label = y0

    sel_kw = {"seed": cfg.seed, **cfg.selection}
    if sel_kw.get("spread_feature") is None:
        sel_kw["spread_feature"] = max_variance_feature(enc)
    sel = _stage("config", SelectionParams, **sel_kw)
    evidence = _stage("select_evidence", build_evidence_sets, model, std, x0, sel)
    warnings.extend(evidence.flags)

    comp = _stage("config", CompletionParams, **{"seed": cfg.seed, **cfg.completion})
    groups = {}
    for pol, pts in ((POSITIVE, evidence.positive), (NEGATIVE, evidence.negative)):
        if not pts:
            warnings.append(f"no {pol} evidence points; {pol} group omitted")
            continue
        try:
            sig_in = build_input_concepts(rules, table, onto, list(pts), train, cfg.accumulation)
        except SemanticCoverageError as exc:
            warnings.append(f"{pol} group omitted: {exc}")
            continue
        except ExplainError as exc:
            raise PipelineError("uplift", exc) from exc
        sig_out = _stage("complete", complete, onto, sig_in, comp)
        groups[pol] = (sig_in, sig_out)
    if not groups:
        raise PipelineError("uplift", SemanticCoverageError("semantic coverage is zero for both groups"))

    contraction = None
    if POSITIVE in groups and NEGATIVE in groups:
        contraction = _stage("contract", contract, onto, groups[POSITIVE][1], groups[NEGATIVE][1],
                             cfg.delta, cfg.importance_mode)
        warnings.extend(contraction.warnings)
        ranked = _stage("rank", rank_groups, onto, contraction, groups[NEGATIVE][1], cfg.sigma).to_list()
    elif POSITIVE in groups:
        pos = groups[POSITIVE][1]
        imp = {c: importance(onto, c, pos, cfg.importance_mode) for c in pos.ids()}
        ranks = dense_rank(imp)
        ranked = [{"rank": r, "uniform": sorted((c for c in ranks if ranks[c] == r), key=lambda c: (-imp[c], c)),
                   "contrastive": []} for r in sorted(set(ranks.values()))]
        warnings.append("no contrastive group; explanation is uniform only")
    else:
        neg = groups[NEGATIVE][1]
        ranked = [{"rank": 1, "uniform": [], "contrastive": neg.ids()}]
        warnings.append("no uniform group; explanation is contrastive only")

    # kNN boundary: one hull per training class
    hulls = class_hulls(std.points, std.labels, sel.num_directions, sel.seed)
    hull_rows = tuple(sorted(v for h in hulls.values() for v in h.vertex_indices))
    whole = convex_hull(std.points, sel.num_directions, sel.seed)

    report: dict[str, Any] = {
        "meta": {
            "package": "ontoexplain",
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "seed": cfg.seed,
            "config": cfg.echo(),
            "importance_mode": cfg.importance_mode,
        },
        "prediction": {
            "label": cfg.schema.label_text(y0),
            "internal_label": y0,
            "probability": None if x0.probability is None else _num(x0.probability),
            "test_point": raw0,
            "held_out_row": held_out,
            "training_rows": train.m,
        },
        "model": {"kind": model.kind},
        "boundary": {
            "per_class_vertices": {cfg.schema.label_text(k): list(h.vertex_indices) for k, h in hulls.items()},
            "vertex_count": len(hull_rows),
            "all_points_vertex_count": len(whole),
            "exact": all(h.is_exact for h in hulls.values()),
        },
        "evidence": _evidence_dict(evidence, train.raw_rows),
        "sigma_in": {}, "sigma_out": {}, "provenance": {},
        "sigma_diff": None,
        "explanations": ranked,
        "warnings": warnings,
    }
    if isinstance(model, LRModel):
        report["model"].update(weights=[_num(w) for w in model.weights], iterations=model.iterations_run,
                               converged=model.converged)
    else:
        report["model"]["k"] = model.k
    for pol, (sig_in, sig_out) in groups.items():
        report["sigma_in"][pol] = {
            "concepts": [{"concept": wc.concept, "weight": _num(wc.weight)} for wc in sig_in.concepts],
            "unmapped": {str(r): [[f, v] for f, v in pairs] for r, pairs in sorted(sig_in.residual.items()) if pairs},
        }
        report["sigma_out"][pol] = _scored_dict(sig_out)
        report["provenance"][pol] = _trace_rows(sig_out, sig_in.provenance)
    if contraction is not None:
        report["sigma_diff"] = {
            "concepts": [{"concept": wc.concept, "importance": _num(wc.weight)} for wc in contraction.diff],
            "fallback": contraction.fallback,
            "delta": cfg.delta,
        }

    v0 = max_variance_feature(enc)
    rest = [j for j in np.argsort(-enc.points.var(axis=0, ddof=1), kind="stable") if j != v0]
    axes_idx = (v0, int(rest[0])) if rest else (v0, v0)
    plot = PlotData(
        axes=(enc.columns[axes_idx[0]], enc.columns[axes_idx[1]]),
        points=enc.points[:, axes_idx],
        labels=enc.labels,
        test_point=encode_vector(cfg.schema, raw0)[list(axes_idx)],
        hull_rows=hull_rows,
        evidence=evidence,
    )
    return ExplanationRun(report, plot)
