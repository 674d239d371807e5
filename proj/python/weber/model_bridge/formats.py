"""Readers and writers for the files exchanged with the analysis engine.

Pure Python plus numpy; nothing here needs a model.
"""

import json
import math
import struct
from pathlib import Path

import numpy as np

MAGIC = b"WBRACT1\0"
SCHEMA = "weber.wbract/1"


class FormatError(ValueError):
    pass


class OffsetMismatch(FormatError):
    pass


def encode_wbract(tensor, manifest):
    t = np.ascontiguousarray(tensor, dtype="<f4")
    if t.ndim != 3:
        raise FormatError(f"tensor must be [layers, rows, dim], got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise FormatError("tensor contains non-finite values")
    head = MAGIC + struct.pack("<III", *t.shape)
    return head + t.tobytes() + json.dumps(manifest, sort_keys=True).encode()


def decode_wbract(data):
    if len(data) < 20 or data[:8] != MAGIC:
        raise FormatError("not a .wbract file")
    layers, rows, dim = struct.unpack("<III", data[8:20])
    end = 20 + 4 * layers * rows * dim
    if len(data) < end:
        raise FormatError("truncated tensor")
    tensor = np.frombuffer(data, dtype="<f4", count=layers * rows * dim, offset=20).reshape(layers, rows, dim)
    return tensor, json.loads(data[end:].decode())


def write_wbract(path, tensor, manifest):
    Path(path).write_bytes(encode_wbract(tensor, manifest))


def read_wbract(path):
    return decode_wbract(Path(path).read_bytes())


def activation_manifest(stimuli, meta):
    return {"schema": SCHEMA, "kind": "activations", "meta": meta, "stimuli": stimuli}


def read_jsonl(path, kind=None):
    """Records from a JSONL file, skipping a leading schema header."""
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}:{n}: {e}") from None
        if "schema" in rec and "kind" in rec:
            if kind is not None and rec["kind"] != kind:
                raise FormatError(f"{path}: expected {kind}, found {rec['kind']}")
            continue
        out.append(rec)
    return out


def write_jsonl(path, records, header=None):
    with open(path, "w") as f:
        if header is not None:
            f.write(json.dumps(header, sort_keys=True) + "\n")
        for r in records:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def load_probe_prompts(path):
    probes = read_jsonl(path, kind="probe_set")
    for p in probes:
        for key in ("stimulus_id", "prompt_text", "magnitude_char_span", "value"):
            if key not in p:
                raise FormatError(f"probe record missing {key}")
        start, end = p["magnitude_char_span"]
        text = p["prompt_text"]
        if not (0 <= start < end <= len(text)) or text[start:end] != p["value"]["surface_form"]:
            raise FormatError(f"{p['stimulus_id']}: span {start}:{end} does not hold the surface form")
    return probes


def token_position(offsets, span):
    """Token index holding the magnitude.

    `offsets` are (start, end) character offsets per token. Returns
    (index, straddles): the single covering token, or the last of several
    when the span crosses token boundaries.
    """
    start, end = span
    hit = [i for i, (s, e) in enumerate(offsets) if e > s and s < end and e > start]
    if not hit:
        raise OffsetMismatch(f"no token overlaps characters {start}:{end}")
    covered_from = offsets[hit[0]][0]
    covered_to = offsets[hit[-1]][1]
    if covered_from > start or covered_to < end:
        raise OffsetMismatch(f"tokens cover {covered_from}:{covered_to}, span is {start}:{end}")
    return hit[-1], len(hit) > 1


def softmax_pair(logit_a, logit_b):
    hi = max(logit_a, logit_b)
    ea, eb = math.exp(logit_a - hi), math.exp(logit_b - hi)
    return ea / (ea + eb), eb / (ea + eb)


def entropy_nats(p_a, p_b):
    return -sum(p * math.log(p) for p in (p_a, p_b) if p > 0.0)


def trial_record(pair, generated, logit_a, logit_b, model, flags=()):
    """One trial line from a greedy answer and the two option-token logits."""
    p_a, p_b = softmax_pair(logit_a, logit_b)
    answer = generated.strip()[:1].upper()
    chosen = answer if answer in ("A", "B") else "invalid"
    large = pair["large_position"]
    rec = {
        "pair_id": pair["pair_id"],
        "baseline": pair["baseline_nominal"],
        "ratio": pair["ratio_nominal"],
        "large_position": large,
        "chosen": chosen,
        "p_a": p_a,
        "p_b": p_b,
        "entropy_nats": entropy_nats(p_a, p_b),
        "task": pair["task"],
        "model": model,
    }
    if chosen != "invalid":
        rec["correct"] = chosen == large
    if flags:
        rec["flags"] = list(flags)
    return rec


def patch_record(prompt_id, direction_id, dose, p_base, p_patched, symbolic=False):
    rec = {
        "prompt_id": prompt_id,
        "direction_id": direction_id,
        "dose": dose,
        "p_chosen_base": p_base,
        "p_chosen_patched": p_patched,
    }
    if symbolic:
        rec["symbolic"] = True
    return rec


class PatchPlan:
    """Offsets to add: dose * projection_span * direction, per direction and dose."""

    def __init__(self, directions, manifest):
        if manifest.get("kind") != "patch_plan":
            raise FormatError("not a patch plan")
        self.layer = int(manifest["layer"])
        self.position = manifest["position"]
        self.doses = [float(d) for d in manifest["doses"]]
        self.prompt_ids = list(manifest["prompt_ids"])
        self.direction_ids = list(manifest["directions"])
        self.span = float(manifest["projection_span"])
        self.directions = np.asarray(directions, dtype=np.float64)
        if len(self.direction_ids) != self.directions.shape[0]:
            raise FormatError("direction ids do not match plan rows")

    @classmethod
    def read(cls, path):
        tensor, manifest = read_wbract(path)
        return cls(tensor[0], manifest)

    @property
    def dim(self):
        return self.directions.shape[1]

    @property
    def planned_runs(self):
        return len(self.prompt_ids) * len(self.direction_ids) * len(self.doses)

    def offset(self, direction_index, dose):
        return dose * self.span * self.directions[direction_index]
