"""Python access to the weber analysis engine.

Analysis results come back as plain dicts decoded from the engine's JSON.
"""

import json as _json

from . import _core
from ._core import WeberError, encode_wbract, pairs_jsonl, probes_jsonl, read_patch_plan, read_wbract

__all__ = [
    "WeberError",
    "analyze_behaviour",
    "analyze_geometry",
    "analyze_patch",
    "corpus_fit",
    "encode_wbract",
    "pairs_jsonl",
    "probes_jsonl",
    "read_patch_plan",
    "read_wbract",
    "run_all",
    "validate_activations",
    "validate_patch_results",
    "validate_trials",
]


def _text(path_or_text):
    if hasattr(path_or_text, "read_text"):
        return path_or_text.read_text()
    return path_or_text


def validate_activations(path):
    return _json.loads(_core.validate_activations(str(path)))


def validate_trials(jsonl):
    """Accepts JSONL text or a pathlib.Path."""
    return _json.loads(_core.validate_trials(_text(jsonl)))


def validate_patch_results(jsonl):
    return _core.validate_patch_results(_text(jsonl))


def analyze_geometry(path, metrics=("cosine", "euclidean"), permutations=2000, seed=42):
    return _json.loads(_core.analyze_geometry(str(path), list(metrics), permutations, seed))


def analyze_behaviour(jsonl, bootstrap=1000, seed=42):
    return _json.loads(_core.analyze_behaviour(_text(jsonl), bootstrap, seed))


def analyze_patch(jsonl, sign=1):
    return _json.loads(_core.analyze_patch(_text(jsonl), sign))


def corpus_fit(text):
    return _json.loads(_core.corpus_fit(text))


def run_all(config, out):
    return _json.loads(_core.run_all(str(config), str(out)))
