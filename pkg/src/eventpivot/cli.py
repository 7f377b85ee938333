"""Command-line entry points.

Subcommands map one-to-one onto the library operations: gen-data, train,
predict, eval, ablate, scarce-curve, grad-check, attn-report. Every file
producing subcommand writes into a fresh run directory holding a manifest
with the resolved configuration and input hashes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .classifier import attention_interactions
from .config import Config, ConfigError, load_config
from .corpus import (CorpusError, EventSchema, generate_synthetic, read_corpus,
                     read_predictions, write_corpus, write_predictions)
from .evaluation import (ablation_rows_json, breakdown_by_event_count,
                         run_ablation_matrix, run_scarce_data_curve)
from .gradcheck import standard_battery
from .model import EventModel
from .runs import (ExperimentManifest, claim_out_dir, file_sha256, hash_tree,
                   new_run_dir)
from .tensor import no_grad
from .text import Vocabulary
from .training import (apply_checkpoint, evaluate_model, load_checkpoint,
                       predict_sentences, save_checkpoint, train)


class CliError(Exception):
    """A user-facing failure: bad arguments, missing files, failed checks."""


def _parse_overrides(pairs: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise CliError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        out[key.strip()] = value.strip()
    return out


def _config(args) -> Config:
    try:
        return load_config(args.config, _parse_overrides(args.set))
    except (ConfigError, OSError) as exc:
        raise CliError(f"configuration invalid:\n{exc}") from exc


def _run_dir(args, prefix: str) -> str:
    if args.out:
        try:
            return claim_out_dir(args.out)
        except FileExistsError as exc:
            raise CliError(str(exc)) from exc
    return new_run_dir(args.runs_root, prefix)


def _load_corpus(args, schema: EventSchema | None = None):
    try:
        if schema is None:
            schema = EventSchema.load(os.path.join(args.corpus, "schema.json"))
        return schema, read_corpus(args.corpus, schema)
    except (OSError, CorpusError) as exc:
        raise CliError(f"cannot read corpus {args.corpus}: {exc}") from exc


def _load_trained(model_dir: str) -> tuple[EventModel, Config]:
    try:
        manifest = ExperimentManifest.load(model_dir)
        cfg = load_config(None, {k: str(v) for k, v in manifest.config.items()})
        vocab = Vocabulary.load(os.path.join(model_dir, "vocab.json"))
        schema = EventSchema.load(os.path.join(model_dir, "schema.json"))
        model = EventModel(vocab, schema, cfg.train_config()
                           .resolve_model_config(cfg.model_config()),
                           np.random.default_rng(0))
        apply_checkpoint(model, load_checkpoint(
            os.path.join(model_dir, "checkpoint.json")))
        return model, cfg
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot load trained model from {model_dir}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_data(args) -> int:
    cfg = _config(args)
    out = _run_dir(args, "gen-data")
    gen = cfg.gen_config()
    schema, split = generate_synthetic(gen)
    write_corpus(split, out)
    schema.save(os.path.join(out, "schema.json"))
    manifest = ExperimentManifest("gen-data", cfg.as_dict(), gen.seed,
                                  outputs=sorted(os.listdir(out)))
    manifest.save(out)
    counts = {name: len(s) for name, s in split.splits().items()}
    print(f"wrote corpus to {out}: {counts}")
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    schema, corpus = _load_corpus(args)
    out = _run_dir(args, "train")
    model, log = train(cfg.train_config(), corpus, schema, cfg.model_config())
    save_checkpoint(model.parameters(), os.path.join(out, "checkpoint.json"))
    log.save(os.path.join(out, "trainlog.json"))
    model.vocab.save(os.path.join(out, "vocab.json"))
    schema.save(os.path.join(out, "schema.json"))
    manifest = ExperimentManifest("train", cfg.as_dict(), cfg["train.seed"],
                                  inputs=hash_tree(args.corpus),
                                  outputs=sorted(os.listdir(out)))
    manifest.save(out)
    print(f"best dev F1 {log.best_dev_f1:.4f} at epoch {log.best_epoch} "
          f"({log.stop_reason} after {len(log.epochs)} epochs)")
    print(f"run directory: {out}")
    return 0


def cmd_predict(args) -> int:
    model, cfg = _load_trained(args.model_dir)
    schema, corpus = _load_corpus(args, model.schema)
    sentences = corpus.splits()[args.split]
    out = _run_dir(args, "predict")
    pred = predict_sentences(model, sentences)
    path = os.path.join(out, "predictions.jsonl")
    write_predictions(pred, path)
    manifest = ExperimentManifest("predict", cfg.as_dict(), cfg["train.seed"],
                                  inputs=hash_tree(args.corpus),
                                  outputs=["predictions.jsonl"])
    manifest.save(out)
    n = sum(len(v) for v in pred.values())
    print(f"wrote {n} predicted triggers for {len(sentences)} sentences to {path}")
    return 0


def cmd_eval(args) -> int:
    schema, corpus = _load_corpus(args)
    sentences = corpus.splits()[args.split]
    try:
        pred = read_predictions(args.pred)
        report = breakdown_by_event_count(sentences, pred)
    except (OSError, CorpusError, ValueError) as exc:
        raise CliError(f"evaluation failed: {exc}") from exc
    out = _run_dir(args, "eval")
    report.save(os.path.join(out, "report.json"))
    inputs = hash_tree(args.corpus)
    inputs["predictions.jsonl"] = file_sha256(args.pred)
    manifest = ExperimentManifest("eval", {"split": args.split}, 0,
                                  inputs=inputs, outputs=["report.json"])
    manifest.save(out)
    print(f"P {report.precision:.4f} R {report.recall:.4f} F1 {report.f1:.4f} "
          f"(gold {report.gold}, predicted {report.predicted}, "
          f"correct {report.correct})")
    for label in ("1/1", "1/N"):
        sl = report.slices.get(label)
        print(f"  {label}: " + (f"F1 {sl.f1:.4f}" if sl else "N/A"))
    return 0


def cmd_ablate(args) -> int:
    cfg = _config(args)
    schema, corpus = _load_corpus(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else None
    if args.fraction < 1.0:
        from .corpus import CorpusSplit, subsample_training
        seed0 = seeds[0] if seeds else cfg["train.seed"]
        corpus = CorpusSplit(
            subsample_training(corpus.train, args.fraction, seed0),
            corpus.dev, corpus.test)
    rows = run_ablation_matrix(corpus, schema, cfg.train_config(),
                               cfg.model_config(), seeds)
    out = _run_dir(args, "ablate")
    with open(os.path.join(out, "ablation.json"), "w", encoding="utf-8") as f:
        f.write(ablation_rows_json(rows))
        f.write("\n")
    with open(os.path.join(out, "ablation.csv"), "w", encoding="utf-8") as f:
        f.write("name,f1,delta_f1\n")
        for r in rows:
            f.write(f"{r.name},{r.f1},{r.delta_f1}\n")
    manifest = ExperimentManifest("ablate", cfg.as_dict(), cfg["train.seed"],
                                  inputs=hash_tree(args.corpus),
                                  outputs=["ablation.json", "ablation.csv"])
    manifest.save(out)
    for r in rows:
        print(f"{r.name:20s} F1 {r.f1:.4f}  delta {r.delta_f1:+.4f}")
    return 0


def cmd_scarce_curve(args) -> int:
    cfg = _config(args)
    schema, corpus = _load_corpus(args)
    fractions = [float(f) for f in args.fractions.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    curve = run_scarce_data_curve(corpus, schema, cfg.train_config(),
                                  fractions, seeds, cfg.model_config())
    out = _run_dir(args, "scarce-curve")
    with open(os.path.join(out, "curve.json"), "w", encoding="utf-8") as f:
        f.write(curve.to_json())
        f.write("\n")
    with open(os.path.join(out, "curve.csv"), "w", encoding="utf-8") as f:
        f.write(curve.to_csv())
    manifest = ExperimentManifest("scarce-curve", cfg.as_dict(),
                                  cfg["train.seed"],
                                  inputs=hash_tree(args.corpus),
                                  outputs=["curve.json", "curve.csv"])
    manifest.save(out)
    for frac in sorted(curve.medians):
        print(f"fraction {frac:.1f}: median F1 {curve.medians[frac]:.4f}")
    return 0


def cmd_grad_check(args) -> int:
    reports = standard_battery(instances=args.instances, seed=args.seed)
    tol = 1e-4
    worst = 0.0
    failed = []
    lines = []
    for name in sorted(reports):
        rep = reports[name]
        err = rep.max_rel_err
        worst = max(worst, err)
        status = "ok" if rep.passed(tol) else "FAIL"
        if status == "FAIL":
            failed.append(name)
        lines.append(f"{status:4s} {name:28s} max rel err {err:.3e}")
    for line in lines:
        print(line)
    print(f"worst case {worst:.3e} against tolerance {tol:.0e}")
    if args.out:
        out = claim_out_dir(args.out)
        payload = {name: {"max_rel_err": reports[name].max_rel_err,
                          "passed": reports[name].passed(tol)}
                   for name in sorted(reports)}
        with open(os.path.join(out, "gradcheck.json"), "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True, indent=2)
            f.write("\n")
        ExperimentManifest("grad-check", {"instances": args.instances}, args.seed,
                           outputs=["gradcheck.json"]).save(out)
    if failed:
        print(f"FAILED cases: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_attn_report(args) -> int:
    model, cfg = _load_trained(args.model_dir)
    schema, corpus = _load_corpus(args, model.schema)
    sentences = corpus.splits()[args.split][:args.limit]
    if not sentences:
        raise CliError(f"split {args.split} is empty")
    with no_grad():
        pivots = model.lsl_pivots(train=False)
        per_sentence = []
        for s in sentences:
            capture: list = []
            ids = model.encode_sentence(s.tokens)
            from .classifier import assemble_input
            encoded = assemble_input(ids, pivots, model.config.max_len)
            model.tc(encoded, model.embed, capture=capture)
            per_sentence.append(attention_interactions(capture, encoded))
    keys = sorted({k for rep in per_sentence for h in rep.heads for k in h.mass})
    means = {k: float(np.mean([h.mass[k] for rep in per_sentence
                               for h in rep.heads if k in h.mass]))
             for k in keys}
    out = _run_dir(args, "attn-report")
    payload = {
        "sentences": len(per_sentence),
        "split": args.split,
        "means": means,
        "first_sentence": per_sentence[0].to_json_obj(),
    }
    with open(os.path.join(out, "attention.json"), "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")
    ExperimentManifest("attn-report", cfg.as_dict(), cfg["train.seed"],
                       inputs=hash_tree(args.corpus),
                       outputs=["attention.json"]).save(out)
    for k in keys:
        print(f"{k:18s} mean mass {means[k]:.4f}")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventpivot",
        description="Two-stage event trigger detection: label-to-pivot "
                    "transformation plus joint sentence tagging.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, corpus: bool = False,
               model_dir: bool = False) -> None:
        p.add_argument("--config", default=None,
                       help="flat key=value config file (default: $EVENTPIVOT_CONFIG)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--out", default=None,
                       help="explicit run directory (must be new or empty)")
        p.add_argument("--runs-root", default="runs",
                       help="where auto-numbered run directories go")
        if corpus:
            p.add_argument("--corpus", required=True,
                           help="corpus directory from gen-data")
        if model_dir:
            p.add_argument("--model-dir", required=True,
                           help="train run directory with checkpoint.json")

    p = sub.add_parser("gen-data", help="generate the synthetic corpus")
    common(p)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train on a generated corpus")
    common(p, corpus=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="tag a split with a trained model")
    common(p, corpus=True, model_dir=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against gold")
    common(p, corpus=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.add_argument("--pred", required=True, help="predictions JSONL file")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="train and score the ablation matrix")
    common(p, corpus=True)
    p.add_argument("--seeds", default=None, help="comma-separated seeds")
    p.add_argument("--fraction", type=float, default=1.0,
                   help="train on this document-level fraction of the data")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("scarce-curve", help="F1 as training data shrinks")
    common(p, corpus=True)
    p.add_argument("--fractions", default="0.2,0.4,0.6,0.8,1.0")
    p.add_argument("--seeds", default="0,1,2")
    p.set_defaults(fn=cmd_scarce_curve)

    p = sub.add_parser("grad-check", help="finite-difference gradient battery")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional report directory")
    p.set_defaults(fn=cmd_grad_check)

    p = sub.add_parser("attn-report",
                       help="attention mass between pivots and sentence")
    common(p, corpus=True, model_dir=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="dev")
    p.add_argument("--limit", type=int, default=50,
                   help="number of sentences to aggregate over")
    p.set_defaults(fn=cmd_attn_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CorpusError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
