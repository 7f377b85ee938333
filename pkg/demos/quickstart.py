"""Generate a small corpus, train for a few epochs, tag a sentence.

Scaled down from the defaults so it finishes in about a minute; expect
rough edges in the predictions at this size. The classic demonstration
sentence at the end shows the span format: inclusive token bounds plus the
event type name.
"""

from eventpivot.corpus import GenConfig, generate_synthetic
from eventpivot.text import tokenize
from eventpivot.training import TrainConfig, evaluate_model, train

gen = GenConfig(train_sents=500, dev_sents=80, test_sents=80)
schema, split = generate_synthetic(gen)
print("types:", ", ".join(schema.names))
print(f"splits: {len(split.train)}/{len(split.dev)}/{len(split.test)}")

model, log = train(TrainConfig(max_epochs=14, patience=4), split, schema)
print(f"best dev F1 {log.best_dev_f1:.3f} at epoch {log.best_epoch} "
      f"({log.stop_reason})")

report = evaluate_model(model, split.test)
print(f"test: P {report.precision:.3f} R {report.recall:.3f} "
      f"F1 {report.f1:.3f}")

text = "A bomb went off near the city hall on Friday, injuring 6."
tokens = tokenize(text)
pivots = model.eval_pivots()
tags = model.predict_tags(model.encode_sentence(tokens), pivots)
print(f"\n{text}")
for tok, tag in zip(tokens, tags):
    name = model.tags.names[tag]
    if name != "O":
        print(f"  {tok:12s} {name}")
spans = model.tags.decode_tags(tags)
print("spans:", [(s.start, s.end, s.type_name) for s in spans])
