from .bridge import extract_activations, run_patched, run_trials
from .formats import (
    FormatError,
    OffsetMismatch,
    PatchPlan,
    decode_wbract,
    encode_wbract,
    load_probe_prompts,
    read_jsonl,
    read_wbract,
    token_position,
    write_jsonl,
    write_wbract,
)

__all__ = [
    "FormatError",
    "OffsetMismatch",
    "PatchPlan",
    "decode_wbract",
    "encode_wbract",
    "extract_activations",
    "load_probe_prompts",
    "read_jsonl",
    "read_wbract",
    "run_patched",
    "run_trials",
    "token_position",
    "write_jsonl",
    "write_wbract",
]
