"""Synthetic event-trigger corpus: schema, generator, JSONL I/O, subsampling.

The generator builds sentences from type-specific templates with a single
trigger slot, so every lexicon word occurrence is a real trigger and all
remaining words are type-flavored context. Difficulty comes from three
levers: ambiguous triggers shared between type pairs (context must
disambiguate), a skewed type frequency so the tail types are data-starved,
and multi-event sentences where a second clause hangs off the first.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class CorpusError(ValueError):
    """Malformed corpus data or invalid generator settings."""


# ---------------------------------------------------------------------------
# schema


@dataclass(frozen=True)
class EventType:
    name: str
    label_words: tuple[str, ...]

    def __post_init__(self):
        if not self.name:
            raise CorpusError("event type needs a non-empty name")
        if not self.label_words:
            raise CorpusError(f"event type {self.name!r} needs at least one label word")
        object.__setattr__(self, "label_words", tuple(self.label_words))


@dataclass(frozen=True)
class EventSchema:
    types: tuple[EventType, ...]

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        names = [t.name for t in self.types]
        if len(set(names)) != len(names):
            raise CorpusError(f"duplicate event type names: {names}")
        if not self.types:
            raise CorpusError("schema needs at least one event type")

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.types]

    @property
    def n_label_words(self) -> int:
        return sum(len(t.label_words) for t in self.types)

    def index_of(self, name: str) -> int:
        for i, t in enumerate(self.types):
            if t.name == name:
                return i
        raise KeyError(name)

    def label_sequence(self) -> list[tuple[str, int]]:
        """Concatenated label words in canonical order, each tagged with
        the index of its owning type."""
        out = []
        for i, t in enumerate(self.types):
            out.extend((w, i) for w in t.label_words)
        return out

    def to_json(self) -> str:
        return json.dumps(
            {"types": [{"name": t.name, "label_words": list(t.label_words)}
                       for t in self.types]},
            ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EventSchema":
        obj = json.loads(text)
        return cls(tuple(EventType(d["name"], tuple(d["label_words"]))
                         for d in obj["types"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")

    @classmethod
    def load(cls, path) -> "EventSchema":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())


# ---------------------------------------------------------------------------
# annotated sentences


@dataclass(frozen=True, order=True)
class TriggerSpan:
    """Token span [start, end] inclusive with its event type name."""
    start: int
    end: int
    type_name: str

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise CorpusError(f"bad span bounds ({self.start}, {self.end})")

    def as_tuple(self) -> tuple[int, int, str]:
        return (self.start, self.end, self.type_name)


@dataclass
class AnnotatedSentence:
    doc_id: str
    sent_id: str
    tokens: list[str]
    triggers: list[TriggerSpan] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, str]:
        return (self.doc_id, self.sent_id)


def validate_sentence(sent: AnnotatedSentence, schema: EventSchema | None = None,
                      where: str = "") -> None:
    n = len(sent.tokens)
    if n == 0:
        raise CorpusError(f"{where}empty token list")
    taken = [False] * n
    known = set(schema.names) if schema is not None else None
    for sp in sent.triggers:
        if sp.end >= n:
            raise CorpusError(
                f"{where}span ({sp.start}, {sp.end}) out of bounds for "
                f"{n}-token sentence")
        if known is not None and sp.type_name not in known:
            raise CorpusError(f"{where}unknown event type {sp.type_name!r}")
        for i in range(sp.start, sp.end + 1):
            if taken[i]:
                raise CorpusError(f"{where}overlapping trigger spans at token {i}")
            taken[i] = True


@dataclass
class CorpusSplit:
    train: list[AnnotatedSentence]
    dev: list[AnnotatedSentence]
    test: list[AnnotatedSentence]

    def splits(self) -> dict[str, list[AnnotatedSentence]]:
        return {"train": self.train, "dev": self.dev, "test": self.test}


def filter_eventful(sentences: Iterable[AnnotatedSentence]) -> list[AnnotatedSentence]:
    return [s for s in sentences if s.triggers]


def filter_split_eventful(split: CorpusSplit) -> CorpusSplit:
    return CorpusSplit(filter_eventful(split.train),
                       filter_eventful(split.dev),
                       filter_eventful(split.test))


# ---------------------------------------------------------------------------
# JSONL I/O

_SPLIT_FILES = ("train.jsonl", "dev.jsonl", "test.jsonl")


def _sentence_to_record(s: AnnotatedSentence) -> dict:
    return {
        "doc_id": s.doc_id,
        "sent_id": s.sent_id,
        "tokens": list(s.tokens),
        "triggers": [{"start": t.start, "end": t.end, "type": t.type_name}
                     for t in s.triggers],
    }


def _sentence_from_record(obj: dict, where: str) -> AnnotatedSentence:
    try:
        sent_id = str(obj["sent_id"])
        triggers = [TriggerSpan(int(t["start"]), int(t["end"]), str(t["type"]))
                    for t in obj.get("triggers", [])]
        sent = AnnotatedSentence(str(obj["doc_id"]), sent_id,
                                 [str(t) for t in obj["tokens"]], triggers)
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"{where}missing or malformed field: {exc}") from exc
    except ValueError as exc:
        sent_id = obj.get("sent_id", "?")
        raise CorpusError(f"{where}sentence {sent_id}: {exc}") from exc
    return sent


def write_sentences(sentences: Iterable[AnnotatedSentence], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in sentences:
            f.write(json.dumps(_sentence_to_record(s), ensure_ascii=False,
                               sort_keys=True))
            f.write("\n")


def read_sentences(path, schema: EventSchema | None = None) -> list[AnnotatedSentence]:
    out: list[AnnotatedSentence] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}: "
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}not valid JSON: {exc}") from exc
            sent = _sentence_from_record(obj, where)
            validate_sentence(sent, schema, where)
            if sent.key in seen:
                raise CorpusError(f"{where}duplicate sentence id {sent.key}")
            seen.add(sent.key)
            out.append(sent)
    return out


def write_corpus(split: CorpusSplit, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for name, sentences in split.splits().items():
        write_sentences(sentences, os.path.join(out_dir, f"{name}.jsonl"))


def read_corpus(corpus_dir, schema: EventSchema | None = None) -> CorpusSplit:
    parts = {}
    for fname in _SPLIT_FILES:
        path = os.path.join(corpus_dir, fname)
        if not os.path.exists(path):
            raise CorpusError(f"missing split file {path}")
        parts[fname.split(".")[0]] = read_sentences(path, schema)
    return CorpusSplit(parts["train"], parts["dev"], parts["test"])


# predictions: same JSONL shape minus tokens

def write_predictions(pred: Mapping[tuple[str, str], Sequence[TriggerSpan]],
                      path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for (doc_id, sent_id), spans in pred.items():
            rec = {"doc_id": doc_id, "sent_id": sent_id,
                   "triggers": [{"start": t.start, "end": t.end,
                                 "type": t.type_name} for t in spans]}
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            f.write("\n")


def read_predictions(path) -> dict[tuple[str, str], list[TriggerSpan]]:
    out: dict[tuple[str, str], list[TriggerSpan]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}: "
            try:
                obj = json.loads(line)
                key = (str(obj["doc_id"]), str(obj["sent_id"]))
                spans = [TriggerSpan(int(t["start"]), int(t["end"]), str(t["type"]))
                         for t in obj.get("triggers", [])]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{where}malformed prediction record: {exc}") from exc
            if key in out:
                raise CorpusError(f"{where}duplicate prediction for {key}")
            out[key] = spans
    return out


# ---------------------------------------------------------------------------
# generator content

_DAYS = ("monday", "tuesday", "wednesday", "thursday", "friday",
         "saturday", "sunday")
_CITIES = ("geneva", "vienna", "oslo", "cairo", "lima", "prague")
_NUMS = ("6", "six", "two", "three", "five", "dozens")

_FILLERS = {"DAY": _DAYS, "CITY": _CITIES, "NUM": _NUMS}


@dataclass(frozen=True)
class _TypeDef:
    name: str
    label_words: tuple[str, ...]
    triggers: tuple[tuple[str, ...], ...]   # phrases; label word(s) first
    templates: tuple[str, ...]              # full-clause, one {T} slot each
    short_templates: tuple[str, ...]        # second-clause variants


_CATALOG: tuple[_TypeDef, ...] = (
    _TypeDef(
        name="Attack",
        label_words=("attack",),
        triggers=(("attack",), ("attacked",), ("bombed",), ("raided",),
                  ("ambushed",), ("shelled",), ("stormed",), ("torched",),
                  ("besieged",), ("overran",), ("strafed",), ("mortared",),
                  ("assaulted",), ("firebombed",), ("went", "off"),
                  ("opened", "fire"), ("blew", "up"), ("hit",), ("struck",),
                  ("engaged",), ("charged",)),
        templates=(
            "a bomb {T} near the city hall on {DAY}",
            "militants {T} the outpost at dawn",
            "the gang {T} a convoy on the highway",
            "rebels {T} the northern village overnight",
            "gunmen {T} the embassy compound in {CITY}",
            "troops {T} enemy positions along the ridge",
            "insurgents {T} the checkpoint before sunrise",
            "the militia {T} a patrol outside {CITY}",
        ),
        short_templates=(
            "gunmen {T} the depot",
            "rebels {T} the barracks",
            "militants {T} the garrison",
        ),
    ),
    _TypeDef(
        name="Injure",
        label_words=("injure",),
        triggers=(("injure",), ("injured",), ("injuring",), ("wounded",),
                  ("maimed",), ("bruised",), ("crippled",), ("hospitalized",),
                  ("gashed",), ("concussed",), ("scalded",), ("lacerated",),
                  ("sprained",), ("paralyzed",), ("blinded",), ("disfigured",),
                  ("hurt",), ("hit",), ("struck",)),
        templates=(
            "the blast {T} {NUM} workers at the plant",
            "falling debris {T} two bystanders near the market",
            "the collision {T} {NUM} passengers on the bridge",
            "shrapnel {T} a guard outside the depot",
            "the stampede {T} dozens at the stadium",
            "the derailment {T} {NUM} commuters on {DAY}",
            "broken glass {T} a vendor at the bazaar",
        ),
        short_templates=(
            "{T} {NUM}",
            "{T} several bystanders",
            "{T} a night watchman",
        ),
    ),
    _TypeDef(
        name="Transport",
        label_words=("transport",),
        triggers=(("transport",), ("transported",), ("shipped",), ("hauled",),
                  ("ferried",), ("trucked",), ("airlifted",), ("conveyed",),
                  ("carted",), ("towed",), ("barged",), ("couriered",),
                  ("smuggled",), ("relocated",), ("freighted",), ("lugged",),
                  ("moved",), ("delivered",), ("forwarded",)),
        templates=(
            "the company {T} the cargo to the port",
            "trucks {T} supplies across the border",
            "the ferry {T} tourists to the island",
            "workers {T} the crates into the warehouse",
            "the airline {T} medical kits to {CITY}",
            "the convoy {T} grain through the mountain pass",
            "a freighter {T} containers along the coast",
        ),
        short_templates=(
            "crews {T} the wreckage away",
            "barges {T} the timber",
        ),
    ),
    _TypeDef(
        name="Meet",
        label_words=("meet",),
        triggers=(("meet",), ("met",), ("gathered",), ("convened",),
                  ("assembled",), ("huddled",), ("conferred",), ("caucused",),
                  ("congregated",), ("reunited",), ("rendezvoused",),
                  ("deliberated",), ("consulted",), ("negotiated",),
                  ("parleyed",), ("reconvened",), ("mingled",), ("engaged",)),
        templates=(
            "the ministers {T} in {CITY} on {DAY}",
            "party leaders {T} at the palace to discuss the treaty",
            "delegates {T} for talks in {CITY}",
            "the board {T} behind closed doors",
            "union officials {T} with management over wages",
            "the envoys {T} at the summit in {CITY}",
            "city councillors {T} to debate the budget",
        ),
        short_templates=(
            "aides {T} nearby",
            "the delegations {T} afterward",
        ),
    ),
    _TypeDef(
        name="TransferMoney",
        label_words=("transfer", "money"),
        triggers=(("transfer", "money"), ("wired", "money"), ("sent", "money"),
                  ("handed", "money"), ("routed", "money"), ("funneled", "money"),
                  ("slipped", "money"), ("channeled", "money"), ("pushed", "money"),
                  ("advanced", "money"), ("relayed", "money"), ("fronted", "money"),
                  ("shifted", "money"), ("steered", "money"), ("passed", "money"),
                  ("returned", "money"), ("tossed", "money"),
                  ("transferred",), ("bankrolled",), ("reimbursed",),
                  ("bribed",), ("subsidized",), ("delivered",), ("charged",),
                  ("forwarded",)),
        templates=(
            "the charity {T} the funds to the hospital",
            "the bank {T} {NUM} million to the contractor",
            "donors {T} a large sum to the campaign",
            "the firm {T} the ransom through a broker",
            "investors {T} fresh capital into the venture",
            "the ministry {T} grants to rural clinics",
            "the estate {T} its fortune to a foundation",
        ),
        short_templates=(
            "the sponsor {T} the balance",
            "the fund {T} the fees",
        ),
    ),
)

# words offered by more than one type; context has to break the tie
AMBIGUOUS_TRIGGERS: dict[str, tuple[str, ...]] = {
    "hit": ("Attack", "Injure"),
    "struck": ("Attack", "Injure"),
    "engaged": ("Attack", "Meet"),
    "delivered": ("Transport", "TransferMoney"),
    "charged": ("Attack", "TransferMoney"),
    "forwarded": ("Transport", "TransferMoney"),
}

# frames shared by every event type; the static words carry no type signal,
# so sentences built from them are typed by the trigger phrase alone
_GENERIC_TEMPLATES = (
    "the group {T} on {DAY}",
    "witnesses said the men {T} again",
    "officials reported the pair {T} near the station",
    "by all accounts the crew {T} that night",
    "the men {T} at the checkpoint on {DAY}",
)

_GENERIC_SHORTS = (
    "the pair {T} again",
    "the crew {T}",
    "{T} on {DAY}",
)

_DISTRACTORS = (
    "the committee reviewed the annual report on {DAY}",
    "local schools remained closed for the holiday",
    "the museum unveiled a new collection of paintings",
    "analysts expected the forecast to improve by {DAY}",
    "the council published its agenda for the coming week",
    "residents planted trees along the river walk",
    "the library extended its opening hours this month",
    "engineers inspected the dam after the heavy rains",
    "the bakery on elm street won a regional prize",
    "students rehearsed the play in the old theater",
    "the observatory recorded clear skies over {CITY}",
    "farmers harvested the early crop before {DAY}",
)

# sampling skew over types: head types common, tail types data-starved
_TYPE_WEIGHTS = (36.0, 24.0, 16.0, 13.0, 11.0)
# the label word itself fires more often than other lexicon entries
_LABEL_TRIGGER_BOOST = 3.0


def default_schema(n_types: int = 5) -> EventSchema:
    if not 2 <= n_types <= len(_CATALOG):
        raise CorpusError(f"n_types must be in [2, {len(_CATALOG)}], got {n_types}")
    return EventSchema(tuple(EventType(t.name, t.label_words)
                             for t in _CATALOG[:n_types]))


def trigger_lexicons(n_types: int = 5,
                     lexicon_size: int | None = None) -> dict[str, list[tuple[str, ...]]]:
    """Per-type trigger phrase lists, optionally truncated round-robin to a
    total of ``lexicon_size`` distinct surface forms."""
    defs = _CATALOG[:n_types]
    if lexicon_size is None:
        return {d.name: list(d.triggers) for d in defs}
    if lexicon_size < n_types:
        raise CorpusError(
            f"trigger_lexicon_size {lexicon_size} cannot cover {n_types} types")
    out: dict[str, list[tuple[str, ...]]] = {d.name: [] for d in defs}
    surfaces: set[tuple[str, ...]] = set()
    rank = 0
    while len(surfaces) < lexicon_size:
        progressed = False
        for d in defs:
            if rank < len(d.triggers):
                phrase = d.triggers[rank]
                out[d.name].append(phrase)
                surfaces.add(phrase)
                progressed = True
                if len(surfaces) >= lexicon_size:
                    break
        if not progressed:
            break
        rank += 1
    return out


@dataclass(frozen=True)
class GenConfig:
    n_types: int = 5
    train_sents: int = 2000
    dev_sents: int = 300
    test_sents: int = 300
    trigger_lexicon_size: int | None = None
    multi_event_fraction: float = 0.30
    distractor_fraction: float = 0.25
    seed: int = 7

    def __post_init__(self):
        problems = []
        if not 2 <= self.n_types <= len(_CATALOG):
            problems.append(f"n_types {self.n_types} outside [2, {len(_CATALOG)}]")
        for fname in ("multi_event_fraction", "distractor_fraction"):
            v = getattr(self, fname)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{fname} {v} outside [0, 1]")
        if self.multi_event_fraction + self.distractor_fraction > 1.0:
            problems.append("multi_event_fraction + distractor_fraction exceeds 1")
        for fname in ("train_sents", "dev_sents", "test_sents"):
            if getattr(self, fname) < 1:
                problems.append(f"{fname} must be positive")
        if self.trigger_lexicon_size is not None and self.trigger_lexicon_size < self.n_types:
            problems.append("trigger_lexicon_size smaller than n_types")
        if problems:
            raise CorpusError("; ".join(problems))


class _SentenceSampler:
    def __init__(self, cfg: GenConfig):
        self.defs = _CATALOG[:cfg.n_types]
        self.lexicons = trigger_lexicons(cfg.n_types, cfg.trigger_lexicon_size)
        w = np.asarray(_TYPE_WEIGHTS[:cfg.n_types], dtype=np.float64)
        self.type_p = w / w.sum()
        self.cfg = cfg
        type_w = {d.name: _TYPE_WEIGHTS[i] for i, d in enumerate(_CATALOG)}
        self.trigger_p: dict[str, np.ndarray] = {}
        for d in self.defs:
            phrases = self.lexicons[d.name]
            wts = np.ones(len(phrases))
            for i, ph in enumerate(phrases):
                if ph == d.label_words or (len(ph) == 1 and ph[0] in d.label_words):
                    wts[i] = _LABEL_TRIGGER_BOOST
                elif len(ph) == 1 and ph[0] in AMBIGUOUS_TRIGGERS \
                        and AMBIGUOUS_TRIGGERS[ph[0]][0] != d.name:
                    # shared words must come from both owners at about the same
                    # absolute rate, or majority-vote lookup would resolve them
                    first = AMBIGUOUS_TRIGGERS[ph[0]][0]
                    wts[i] = type_w[first] / type_w[d.name]
            self.trigger_p[d.name] = wts / wts.sum()

    def _fill(self, template: str, rng: np.random.Generator,
              trigger: tuple[str, ...] | None) -> tuple[list[str], int, int]:
        """Expand a template into tokens; return (tokens, t_start, t_end).
        t_start is -1 for distractors (no {T} slot)."""
        tokens: list[str] = []
        t_start = t_end = -1
        for piece in template.split():
            if piece == "{T}":
                t_start = len(tokens)
                tokens.extend(trigger)
                t_end = len(tokens) - 1
            elif piece.startswith("{") and piece.endswith("}"):
                pool = _FILLERS[piece[1:-1]]
                tokens.append(pool[rng.integers(len(pool))])
            else:
                tokens.append(piece)
        return tokens, t_start, t_end

    def _clause(self, rng: np.random.Generator, short: bool) -> tuple[list[str], TriggerSpan]:
        ti = int(rng.choice(len(self.defs), p=self.type_p))
        d = self.defs[ti]
        phrases = self.lexicons[d.name]
        trig = phrases[int(rng.choice(len(phrases), p=self.trigger_p[d.name]))]
        own = d.short_templates if short else d.templates
        shared = _GENERIC_SHORTS if short else _GENERIC_TEMPLATES
        if len(trig) == 1 and trig[0] in AMBIGUOUS_TRIGGERS:
            # shared words get typed by their surroundings, so they must
            # always sit in a frame that belongs to one type
            pool = own
        elif len(trig) > 1 and any(w in d.label_words for w in trig):
            # label-stem compounds get no help from the frame at all
            pool = shared
        else:
            pool = shared if rng.random() < 0.35 else own
        template = pool[rng.integers(len(pool))]
        tokens, s, e = self._fill(template, rng, trig)
        return tokens, TriggerSpan(s, e, d.name)

    def sample(self, rng: np.random.Generator) -> tuple[list[str], list[TriggerSpan]]:
        u = rng.random()
        cfg = self.cfg
        if u < cfg.distractor_fraction:
            template = _DISTRACTORS[rng.integers(len(_DISTRACTORS))]
            tokens, _, _ = self._fill(template, rng, None)
            spans: list[TriggerSpan] = []
        elif u < cfg.distractor_fraction + cfg.multi_event_fraction:
            first, sp1 = self._clause(rng, short=False)
            second, sp2 = self._clause(rng, short=True)
            connector = [","] if rng.random() < 0.6 else \
                [("and", "while", ";")[rng.integers(3)]]
            offset = len(first) + len(connector)
            tokens = first + connector + second
            sp2 = TriggerSpan(sp2.start + offset, sp2.end + offset, sp2.type_name)
            spans = [sp1, sp2]
        else:
            tokens, sp = self._clause(rng, short=False)
            spans = [sp]
        tokens.append(".")
        return tokens, spans


def _gen_split(sampler: _SentenceSampler, n_sents: int, prefix: str,
               rng: np.random.Generator) -> list[AnnotatedSentence]:
    out: list[AnnotatedSentence] = []
    doc_idx = 0
    remaining = n_sents
    while remaining > 0:
        doc_size = min(int(rng.integers(4, 9)), remaining)
        doc_id = f"{prefix}-d{doc_idx:04d}"
        for j in range(doc_size):
            tokens, spans = sampler.sample(rng)
            out.append(AnnotatedSentence(doc_id, f"s{j}", tokens, spans))
        doc_idx += 1
        remaining -= doc_size
    return out


def generate_synthetic(cfg: GenConfig) -> tuple[EventSchema, CorpusSplit]:
    """Build schema plus train/dev/test with disjoint documents. Same config
    always yields the same corpus."""
    schema = default_schema(cfg.n_types)
    sampler = _SentenceSampler(cfg)
    ss = np.random.SeedSequence(cfg.seed)
    rngs = [np.random.default_rng(s) for s in ss.spawn(3)]
    split = CorpusSplit(
        train=_gen_split(sampler, cfg.train_sents, "train", rngs[0]),
        dev=_gen_split(sampler, cfg.dev_sents, "dev", rngs[1]),
        test=_gen_split(sampler, cfg.test_sents, "test", rngs[2]),
    )
    for name, sentences in split.splits().items():
        for s in sentences:
            validate_sentence(s, schema, where=f"{name}/{s.doc_id}/{s.sent_id}: ")
    return schema, split


# ---------------------------------------------------------------------------
# document-level subsampling


def subsample_training(train: Sequence[AnnotatedSentence], fraction: float,
                       seed: int) -> list[AnnotatedSentence]:
    """Keep whole documents covering about ``fraction`` of the sentences.

    Documents are shuffled once by ``seed`` and a prefix of that order is
    taken, so a smaller fraction is always a subset of a larger one under
    the same seed.
    """
    if not 0.0 < fraction <= 1.0:
        raise CorpusError(f"fraction {fraction} outside (0, 1]")
    docs: dict[str, list[AnnotatedSentence]] = {}
    for s in train:
        docs.setdefault(s.doc_id, []).append(s)
    doc_ids = list(docs)
    rng = np.random.default_rng(seed)
    rng.shuffle(doc_ids)
    target = fraction * len(train)
    kept: list[AnnotatedSentence] = []
    for d in doc_ids:
        if len(kept) >= target:
            break
        kept.extend(docs[d])
    order = {s.key: i for i, s in enumerate(train)}
    kept.sort(key=lambda s: order[s.key])
    return kept


# ---------------------------------------------------------------------------
# lexicon-lookup baseline (an intentionally context-blind reference point)


def lexicon_predictions(sentences: Iterable[AnnotatedSentence],
                        lexicons: Mapping[str, Sequence[tuple[str, ...]]] | None = None,
                        n_types: int = 5,
                        ) -> dict[tuple[str, str], list[TriggerSpan]]:
    """Longest-match lexicon scan; ambiguous words always resolve to the
    first owning type in catalog order."""
    if lexicons is None:
        lexicons = trigger_lexicons(n_types)
    phrase_type: dict[tuple[str, ...], str] = {}
    for tname, phrases in lexicons.items():
        for ph in phrases:
            phrase_type.setdefault(tuple(ph), tname)
    max_len = max((len(p) for p in phrase_type), default=1)
    out: dict[tuple[str, str], list[TriggerSpan]] = {}
    for s in sentences:
        spans: list[TriggerSpan] = []
        i = 0
        n = len(s.tokens)
        while i < n:
            matched = False
            for width in range(min(max_len, n - i), 0, -1):
                phrase = tuple(s.tokens[i:i + width])
                if phrase in phrase_type:
                    spans.append(TriggerSpan(i, i + width - 1, phrase_type[phrase]))
                    i += width
                    matched = True
                    break
            if not matched:
                i += 1
        out[s.key] = spans
    return out


def partition_by_ambiguity(sentences: Iterable[AnnotatedSentence],
                           ) -> tuple[list[AnnotatedSentence], list[AnnotatedSentence]]:
    """Split sentences into (no ambiguous-trigger words, at least one)."""
    clean, ambiguous = [], []
    for s in sentences:
        hit = any(t in AMBIGUOUS_TRIGGERS for t in s.tokens)
        (ambiguous if hit else clean).append(s)
    return clean, ambiguous


__all__ = [
    "CorpusError", "EventType", "EventSchema", "TriggerSpan",
    "AnnotatedSentence", "CorpusSplit", "GenConfig", "generate_synthetic",
    "default_schema", "trigger_lexicons", "AMBIGUOUS_TRIGGERS",
    "read_corpus", "write_corpus", "read_sentences", "write_sentences",
    "read_predictions", "write_predictions", "validate_sentence",
    "filter_eventful", "filter_split_eventful", "subsample_training",
    "lexicon_predictions", "partition_by_ambiguity",
]
