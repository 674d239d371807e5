"""Model-facing operations, written against a small backend interface.

A backend provides:

  hidden_states(text) -> (array [layers, tokens, dim], [(start, end), ...])
  answer(prompt) -> (generated_text, logit_a, logit_b, flags)
  option_probability(prompt, option, layer=None, position=None, offset=None) -> float
  token_offsets(text) -> [(start, end), ...]
  width -> int
  name -> str

HFBackend in weber.model_bridge.hf is the transformers implementation.
"""

import numpy as np

from .formats import FormatError, activation_manifest, patch_record, token_position, trial_record


def extract_activations(backend, probes):
    """Hidden states at the magnitude token for every probe, all layers."""
    rows, stimuli = [], []
    straddled = 0
    for p in probes:
        states, offsets = backend.hidden_states(p["prompt_text"])
        pos, straddles = token_position(offsets, p["magnitude_char_span"])
        straddled += straddles
        rows.append(np.asarray(states[:, pos, :], dtype=np.float32))
        stimuli.append(
            {
                "stimulus_id": p["stimulus_id"],
                "magnitude": p["value"]["canonical_magnitude"],
                "carrier_index": p["carrier_index"],
                "token_position": int(pos),
                "surface_form": p["value"]["surface_form"],
            }
        )
    if not rows:
        raise FormatError("no probes")
    tensor = np.stack(rows, axis=1)
    meta = {
        "model": backend.name,
        "token_rule": "final token of the magnitude span",
        "straddling_spans": straddled,
        "chat_template": getattr(backend, "chat_template", None),
    }
    return tensor, activation_manifest(stimuli, meta)


def run_trials(backend, pairs):
    out = []
    for pair in pairs:
        generated, logit_a, logit_b, flags = backend.answer(pair["prompt"])
        out.append(trial_record(pair, generated, logit_a, logit_b, backend.name, flags))
    return out


def run_patched(backend, plan, prompts, symbolic=()):
    """One record per (prompt, direction, dose) in the plan.

    `prompts` maps prompt id to {"prompt": text, "magnitude_char_span": [s, e]}.
    The tracked option is the one preferred without patching.
    """
    if plan.dim != backend.width:
        raise FormatError(f"plan vectors have dim {plan.dim}, model width is {backend.width}")
    missing = [pid for pid in plan.prompt_ids if pid not in prompts]
    if missing:
        raise FormatError(f"plan prompts not supplied: {missing[:5]}")
    out = []
    for pid in plan.prompt_ids:
        item = prompts[pid]
        text = item["prompt"]
        position, _ = token_position(backend.token_offsets(text), item["magnitude_char_span"])
        p_a = backend.option_probability(text, "A")
        option, p_base = ("A", p_a) if p_a >= 0.5 else ("B", 1.0 - p_a)
        for d, did in enumerate(plan.direction_ids):
            for dose in plan.doses:
                if dose == 0.0:
                    p_patched = p_base
                else:
                    p_patched = backend.option_probability(
                        text, option, layer=plan.layer, position=position, offset=plan.offset(d, dose)
                    )
                out.append(patch_record(pid, did, dose, p_base, p_patched, pid in symbolic))
    return out
