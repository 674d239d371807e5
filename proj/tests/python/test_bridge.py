import json
import math
import re
import zlib

import numpy as np
import pytest

import weber
from weber.model_bridge import (
    FormatError,
    OffsetMismatch,
    PatchPlan,
    extract_activations,
    load_probe_prompts,
    read_jsonl,
    read_wbract,
    run_patched,
    run_trials,
    token_position,
    write_jsonl,
    write_wbract,
)

WORDS = re.compile(r"\w+|[^\w\s]")


def tokens(text):
    return [(m.start(), m.end()) for m in WORDS.finditer(text)]


class FakeModel:
    """Token states carry ln of the latest number along a fixed axis; options score from a text hash."""

    name = "fake"

    def __init__(self, width=16, layers=4):
        self.width = width
        self.layers = layers
        rng = np.random.default_rng(3)
        self.axis = rng.normal(size=(layers, width))
        self.axis /= np.linalg.norm(self.axis, axis=1, keepdims=True)
        self.calls = 0

    def token_offsets(self, text):
        return tokens(text)

    def hidden_states(self, text):
        offs = tokens(text)
        states = np.zeros((self.layers, len(offs), self.width))
        value = 0.0
        for t, (s, e) in enumerate(offs):
            if text[s:e].isdigit():
                value = math.log(int(text[s:e]))
            states[:, t, :] = value * self.axis
        return states, offs

    def _base_logit(self, text):
        return (zlib.crc32(text.encode()) % 1000) / 250.0 - 2.0

    def answer(self, prompt):
        self.calls += 1
        la = self._base_logit(prompt)
        if "invalid" in prompt:
            return "I cannot say", la, 0.0, []
        return ("A" if la > 0 else "B"), la, 0.0, []

    def option_probability(self, prompt, option, layer=None, position=None, offset=None):
        self.calls += 1
        la = self._base_logit(prompt)
        if offset is not None:
            la += float(np.dot(offset, self.axis[layer]))
        p_a = 1.0 / (1.0 + math.exp(-la))
        return p_a if option == "A" else 1.0 - p_a


def test_token_position_rules():
    assert token_position([(0, 3), (4, 5), (6, 8)], (4, 5)) == (1, False)
    assert token_position([(0, 3), (4, 5), (5, 6), (7, 9)], (4, 6)) == (2, True)
    with pytest.raises(OffsetMismatch):
        token_position([(0, 3), (5, 6)], (3, 5))
    with pytest.raises(OffsetMismatch):
        token_position([(0, 3), (5, 9)], (4, 9))


def test_extracted_file_passes_engine_validation(synthetic_files, tmp_path):
    probes = load_probe_prompts(synthetic_files / "stim" / "numerical_probes.jsonl")
    assert len(probes) == 130
    tensor, manifest = extract_activations(FakeModel(), probes)
    assert tensor.shape == (4, 130, 16)
    write_wbract(tmp_path / "fake.wbract", tensor, manifest)
    v = weber.validate_activations(tmp_path / "fake.wbract")
    assert v["n_stimuli"] == 130
    assert v["n_layers"] == 4
    geo = weber.analyze_geometry(tmp_path / "fake.wbract", metrics=["euclidean"], permutations=200)
    assert all(layer["winner"] == "weber" for layer in geo["geometry"])


def test_multi_token_spans_use_the_final_token(synthetic_files):
    probes = load_probe_prompts(synthetic_files / "stim" / "temporal_probes.jsonl")
    _, manifest = extract_activations(FakeModel(), probes)
    assert manifest["meta"]["straddling_spans"] == len(probes)
    first = probes[0]
    offs = tokens(first["prompt_text"])
    end = first["magnitude_char_span"][1]
    assert offs[manifest["stimuli"][0]["token_position"]][1] == end


def test_corrupted_prompt_file(synthetic_files, tmp_path):
    lines = (synthetic_files / "stim" / "numerical_probes.jsonl").read_text().splitlines()
    rec = json.loads(lines[1])
    rec["magnitude_char_span"] = [0, 3]
    (tmp_path / "bad.jsonl").write_text("\n".join([lines[0], json.dumps(rec)]) + "\n")
    with pytest.raises(FormatError):
        load_probe_prompts(tmp_path / "bad.jsonl")
    (tmp_path / "junk.jsonl").write_text("{not json\n")
    with pytest.raises(FormatError):
        load_probe_prompts(tmp_path / "junk.jsonl")


def test_trials_validate_and_rerun_identically(synthetic_files, tmp_path):
    pairs = read_jsonl(synthetic_files / "stim" / "numerical_B1_crossformat_pairs.jsonl", kind="comparison_pairs")
    assert len(pairs) == 1500
    model = FakeModel()
    records = run_trials(model, pairs)
    assert records == run_trials(model, pairs)
    write_jsonl(tmp_path / "trials.jsonl", records)
    v = weber.validate_trials(tmp_path / "trials.jsonl")
    assert v["n_records"] == 1500
    assert v["n_invalid"] == 0
    for r in records[:20]:
        assert r["p_a"] + r["p_b"] == pytest.approx(1.0)


def test_invalid_generation_is_logged(synthetic_files, tmp_path):
    pairs = read_jsonl(synthetic_files / "stim" / "numerical_B1_crossformat_pairs.jsonl")[:10]
    pairs[0] = dict(pairs[0], prompt=pairs[0]["prompt"] + " invalid")
    records = run_trials(FakeModel(), pairs)
    assert records[0]["chosen"] == "invalid"
    write_jsonl(tmp_path / "t.jsonl", records)
    assert weber.validate_trials(tmp_path / "t.jsonl")["n_invalid"] == 1


def plan_prompts(plan):
    text = "The value 40 was logged. Answer with A or B."
    return {pid: {"prompt": f"{text} ({pid})", "magnitude_char_span": [10, 12]} for pid in plan.prompt_ids}


def test_patch_plan_reader_matches_engine(synthetic_files):
    plan = PatchPlan.read(synthetic_files / "plan.wbract")
    engine = weber.read_patch_plan(str(synthetic_files / "plan.wbract"))
    assert plan.direction_ids == engine["direction_ids"]
    for d in range(len(plan.direction_ids)):
        for k, dose in enumerate(plan.doses):
            assert np.allclose(plan.offset(d, dose), engine["offsets"][d, k], rtol=0, atol=1e-12)


def test_patched_runs_follow_the_plan(synthetic_files, tmp_path):
    plan = PatchPlan.read(synthetic_files / "plan.wbract")
    model = FakeModel(width=plan.dim)
    results = run_patched(model, plan, plan_prompts(plan))
    assert len(results) == plan.planned_runs
    write_jsonl(tmp_path / "patch.jsonl", results)
    assert weber.validate_patch_results(tmp_path / "patch.jsonl") == plan.planned_runs
    for r in results:
        pid = r["prompt_id"]
        p_a = model.option_probability(plan_prompts(plan)[pid]["prompt"], "A")
        assert r["p_chosen_base"] == pytest.approx(max(p_a, 1 - p_a), abs=1e-5)


def test_dose_zero_is_untouched(synthetic_files, tmp_path):
    tensor, manifest = read_wbract(synthetic_files / "plan.wbract")
    write_wbract(tmp_path / "zero.wbract", tensor, dict(manifest, doses=[0.0, 1.0]))
    plan = PatchPlan.read(tmp_path / "zero.wbract")
    results = run_patched(FakeModel(width=plan.dim), plan, plan_prompts(plan))
    zero = [r for r in results if r["dose"] == 0.0]
    assert zero and all(r["p_chosen_patched"] - r["p_chosen_base"] == 0.0 for r in zero)


def test_width_mismatch_fails_before_any_forward_pass(synthetic_files):
    plan = PatchPlan.read(synthetic_files / "plan.wbract")
    model = FakeModel(width=plan.dim + 1)
    with pytest.raises(FormatError, match="width"):
        run_patched(model, plan, plan_prompts(plan))
    assert model.calls == 0
