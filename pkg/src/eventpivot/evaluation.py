"""Span scoring and the comparative analysis harnesses.

A prediction is correct only when start, end, and type all match a gold
trigger; scores are micro-averaged over pooled counts. The two harnesses
retrain the model under ablated configurations and on nested training
subsets, which is where the label-conditioning effect is measured.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from statistics import median
from typing import Iterable, Mapping, Sequence

from .corpus import (AnnotatedSentence, CorpusError, CorpusSplit, EventSchema,
                     TriggerSpan, subsample_training)


@dataclass
class EvalReport:
    gold: int
    predicted: int
    correct: int
    precision: float
    recall: float
    f1: float
    slices: dict[str, "EvalReport | None"] = field(default_factory=dict)

    @classmethod
    def from_counts(cls, gold: int, predicted: int, correct: int) -> "EvalReport":
        if correct > min(gold, predicted):
            raise ValueError(
                f"correct={correct} exceeds min(gold={gold}, predicted={predicted})")
        p = correct / predicted if predicted else 0.0
        r = correct / gold if gold else 0.0
        f1 = 2.0 * p * r / (p + r) if p + r else 0.0
        return cls(gold, predicted, correct, p, r, f1)

    def to_json_obj(self) -> dict:
        obj = {"gold": self.gold, "predicted": self.predicted,
               "correct": self.correct, "precision": self.precision,
               "recall": self.recall, "f1": self.f1}
        if self.slices:
            obj["slices"] = {k: (v.to_json_obj() if v is not None else None)
                             for k, v in self.slices.items()}
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")


def _counts(gold_spans: Sequence[TriggerSpan],
            pred_spans: Sequence[TriggerSpan]) -> tuple[int, int, int]:
    gold_set = {s.as_tuple() for s in gold_spans}
    pred_set = {s.as_tuple() for s in pred_spans}   # dedup identical predictions
    return len(gold_set), len(pred_set), len(gold_set & pred_set)


def score(gold: Iterable[AnnotatedSentence],
          pred: Mapping[tuple[str, str], Sequence[TriggerSpan]]) -> EvalReport:
    """Micro-averaged exact-match P/R/F1 over every sentence.

    ``pred`` keys must all exist in ``gold``; a gold sentence absent from
    ``pred`` counts as predicting nothing.
    """
    gold = list(gold)
    keys = {s.key for s in gold}
    unknown = sorted(set(pred) - keys)
    if unknown:
        raise CorpusError(f"predictions for unknown sentence ids: {unknown[:5]}")
    tg = tp = tc = 0
    for s in gold:
        g, p, c = _counts(s.triggers, pred.get(s.key, ()))
        tg += g
        tp += p
        tc += c
    return EvalReport.from_counts(tg, tp, tc)


def breakdown_by_event_count(gold: Iterable[AnnotatedSentence],
                             pred: Mapping[tuple[str, str], Sequence[TriggerSpan]]
                             ) -> EvalReport:
    """The overall report plus slices for single-trigger (1/1) and
    multi-trigger (1/N) sentences. Eventless sentences contribute their
    false positives only to the overall numbers; an empty slice is None."""
    gold = list(gold)
    report = score(gold, pred)
    for label, want_multi in (("1/1", False), ("1/N", True)):
        members = [s for s in gold
                   if s.triggers and (len(s.triggers) >= 2) == want_multi]
        if not members:
            report.slices[label] = None
            continue
        tg = tp = tc = 0
        for s in members:
            g, p, c = _counts(s.triggers, pred.get(s.key, ()))
            tg += g
            tp += p
            tc += c
        report.slices[label] = EvalReport.from_counts(tg, tp, tc)
    report.slices["all"] = EvalReport.from_counts(report.gold, report.predicted,
                                                  report.correct)
    return report


# ---------------------------------------------------------------------------
# ablation matrix


ABLATION_ROWS: tuple[tuple[str, dict], ...] = (
    ("full", {}),
    ("bypass_lsl", {"bypass_lsl": True}),
    ("no_labels", {"no_labels": True}),
    ("small_tc", {"small_tc": True}),
    ("small_tc_no_labels", {"small_tc": True, "no_labels": True}),
)


@dataclass
class AblationRow:
    name: str
    seeds: list[int]
    f1_by_seed: list[float]
    f1: float           # median over seeds
    delta_f1: float     # vs. the full row


def run_ablation_matrix(corpus: CorpusSplit, schema: EventSchema, base_config,
                        model_config=None, seeds: Sequence[int] | None = None,
                        ) -> list[AblationRow]:
    """Train and test the five standard configurations with fixed seeds.

    Each row reports the median test F1 over ``seeds`` (default: just the
    base config's seed) and its delta against the full configuration.
    """
    from dataclasses import replace
    from .training import evaluate_model, train

    if seeds is None:
        seeds = [base_config.seed]
    rows: list[AblationRow] = []
    full_f1 = None
    for name, flags in ABLATION_ROWS:
        f1s = []
        for seed in seeds:
            cfg = replace(base_config, seed=seed, **flags)
            model, _ = train(cfg, corpus, schema, model_config)
            f1s.append(evaluate_model(model, corpus.test).f1)
        med = float(median(f1s))
        if name == "full":
            full_f1 = med
        rows.append(AblationRow(name, list(seeds), f1s, med, med - full_f1))
    return rows


def ablation_rows_json(rows: list[AblationRow]) -> str:
    return json.dumps([{"name": r.name, "seeds": r.seeds,
                        "f1_by_seed": r.f1_by_seed, "f1": r.f1,
                        "delta_f1": r.delta_f1} for r in rows],
                      sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# scarce-data curve


@dataclass
class CurvePoint:
    fraction: float
    seed: int
    precision: float
    recall: float
    f1: float


@dataclass
class CurveData:
    points: list[CurvePoint]
    medians: dict[float, float]

    def to_json(self) -> str:
        return json.dumps({
            "points": [{"fraction": p.fraction, "seed": p.seed,
                        "precision": p.precision, "recall": p.recall,
                        "f1": p.f1} for p in self.points],
            "medians": {str(k): v for k, v in sorted(self.medians.items())},
        }, sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fraction", "seed", "P", "R", "F1"])
        for p in self.points:
            w.writerow([p.fraction, p.seed, p.precision, p.recall, p.f1])
        return buf.getvalue()


def run_scarce_data_curve(corpus: CorpusSplit, schema: EventSchema, config,
                          fractions: Sequence[float] = (0.2, 0.4, 0.6, 0.8, 1.0),
                          seeds: Sequence[int] = (0, 1, 2),
                          model_config=None) -> CurveData:
    """Retrain per (fraction, seed) on nested document subsamples and test
    on the untouched test split."""
    from dataclasses import replace
    from .training import evaluate_model, train

    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"fraction {f} outside (0, 1]")
    points: list[CurvePoint] = []
    by_fraction: dict[float, list[float]] = {}
    for frac in fractions:
        for seed in seeds:
            sub = corpus.train if frac == 1.0 else \
                subsample_training(corpus.train, frac, seed)
            cfg = replace(config, seed=seed)
            model, _ = train(cfg, CorpusSplit(sub, corpus.dev, corpus.test),
                             schema, model_config)
            rep = evaluate_model(model, corpus.test)
            points.append(CurvePoint(frac, seed, rep.precision, rep.recall,
                                     rep.f1))
            by_fraction.setdefault(frac, []).append(rep.f1)
    medians = {f: float(median(v)) for f, v in by_fraction.items()}
    return CurveData(points, medians)
