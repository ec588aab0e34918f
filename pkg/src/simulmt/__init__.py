"""Wait-k simultaneous machine translation with speculative beam search.

Building blocks: a word-level wait-k scheduler, prompt structures with
exact fine-tune/inference parity, greedy / beam / speculative decoders over a
pluggable next-token provider, BLEU and lagging metrics, and an evaluation
harness with a command line front end.
"""
from .corpus import SentencePair, clean_pairs, clean_transcript, load_parallel
from .decoding import DecodeConfig, Decoder, Strategy, beam_search, decode_greedy_word
from .errors import (ConfigurationError, ContractViolation, CorpusError, IdMismatchError,
                     PromptError, ProtocolTimeout, ProviderError, ResponseValidationError,
                     SimulMTError, StructuralError)
from .harness import InstanceLog, SummaryMetrics, run_corpus, run_instance, summarize
from .metrics import BleuReport, DelayRecord, average_lagging, corpus_bleu, laal
from .model import (Distribution, LexiconModel, LexiconModelSpec, Permutation, PromptContext,
                    RemoteProvider, build_provider)
from .prompting import (PromptStructure, StructureKind, build_loss_mask, expand_corpus,
                        expand_pair, render_prompt)
from .scheduler import Action, drive_schedule, next_action, source_context_bound
from .tokenization import EOS, Token, TokenizerScheme, detokenize, tokenize

__version__ = "0.1.0"

__all__ = [
    "SentencePair", "clean_pairs", "clean_transcript", "load_parallel",
    "DecodeConfig", "Decoder", "Strategy", "beam_search", "decode_greedy_word",
    "ConfigurationError", "ContractViolation", "CorpusError", "IdMismatchError", "PromptError",
    "ProtocolTimeout", "ProviderError", "ResponseValidationError", "SimulMTError",
    "StructuralError",
    "InstanceLog", "SummaryMetrics", "run_corpus", "run_instance", "summarize",
    "BleuReport", "DelayRecord", "average_lagging", "corpus_bleu", "laal",
    "Distribution", "LexiconModel", "LexiconModelSpec", "Permutation", "PromptContext",
    "RemoteProvider", "build_provider",
    "PromptStructure", "StructureKind", "build_loss_mask", "expand_corpus", "expand_pair",
    "render_prompt",
    "Action", "drive_schedule", "next_action", "source_context_bound",
    "EOS", "Token", "TokenizerScheme", "detokenize", "tokenize",
]
