"""eventpivot: two-stage event trigger detection on a from-scratch autodiff core.

Stage one rewrites event-type label words into "pivot" tokens through a
small encoder/decoder with a differentiable discrete selection; stage two
tags sentence tokens by jointly encoding the pivots and the sentence.
"""

from .tensor import GradTape, NumericError, ShapeError, Tensor, matmul, no_grad
from .ops import (BoundsError, MaskError, apply_mask, concat, cross_entropy,
                  dropout, embedding_lookup, layer_norm, relu, softmax,
                  straight_through, take_rows)
from .text import CLS, MASK, PAD, SEP, SPECIALS, UNK, Vocabulary, build_vocab, tokenize
from .corpus import (AMBIGUOUS_TRIGGERS, AnnotatedSentence, CorpusError,
                     CorpusSplit, EventSchema, EventType, GenConfig,
                     TriggerSpan, default_schema, filter_eventful,
                     filter_split_eventful, generate_synthetic,
                     lexicon_predictions, partition_by_ambiguity, read_corpus,
                     read_predictions, read_sentences, subsample_training,
                     trigger_lexicons, write_corpus, write_predictions,
                     write_sentences)
from .blocks import (AttentionLayer, DecoderLayer, EmbeddingStack,
                     EncoderLayer, FeedForward, FFNNHead, LayerNorm,
                     LengthError, Module, full_mask, xavier_uniform)
from .pivots import (PIVOT_MODES, LabelSemanticLearner, PivotSequence,
                     gumbel_noise, gumbel_softmax_select, ordered_label_ids,
                     shuffle_label_blocks)
from .classifier import (EncodedInput, InteractionReport, TagSet,
                         TriggerClassifier, assemble_input,
                         attention_interactions)
from .model import EventModel, ModelConfig, build_model
from .training import (Adam, TrainConfig, TrainLog, apply_checkpoint,
                       evaluate_model, load_checkpoint, predict_sentences,
                       save_checkpoint, train)
from .evaluation import (ABLATION_ROWS, AblationRow, CurveData, CurvePoint,
                         EvalReport, ablation_rows_json,
                         breakdown_by_event_count, run_ablation_matrix,
                         run_scarce_data_curve, score)
from .gradcheck import GradCheckReport, check_gradients, standard_battery

__version__ = "0.1.0"
