"""tierroute-extractor: real traces for the tierroute toolchain.

Fine-tunes a small multi-exit transformer encoder (classifiers after the
first m, n, and l layers), records per-epoch true-label probabilities on the
validation split, per-tier confidence/correctness from the best checkpoint,
and mean-pooled embedding vectors, then writes everything in the tierroute
JSON-Lines trace format.
"""
from .config import ExtractorConfig, ExtractorError, load_config
from .data import DATASETS, load_dataset, split_indices
from .extract import ExtractSummary, extract, pool_floor_search
from .model import MultiExitEncoder, joint_loss, load_checkpoint, save_checkpoint
from .traceio import check_trace_file, make_header, make_record, write_trace_file

__version__ = "0.1.0"

__all__ = [
    "DATASETS", "ExtractSummary", "ExtractorConfig", "ExtractorError",
    "MultiExitEncoder", "check_trace_file", "extract", "joint_loss",
    "load_checkpoint", "load_config", "load_dataset", "make_header",
    "make_record", "pool_floor_search", "save_checkpoint", "split_indices",
    "write_trace_file",
]
