import numpy as np
import pytest

import weber


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def test_pairs_are_frozen():
    text = weber.pairs_jsonl("numerical", "B1", 42, True)
    assert len(text.splitlines()) == 1501
    assert f"{fnv1a64(text.encode()):016x}" == "417d58cf0da9d796"


def test_probe_counts():
    assert len(weber.probes_jsonl("temporal").splitlines()) == 96


def test_wbract_roundtrip(tmp_path):
    tensor = np.arange(2 * 3 * 4, dtype=np.float32).reshape(2, 3, 4)
    data = weber.encode_wbract(tensor, '{"kind": "x"}')
    (tmp_path / "t.wbract").write_bytes(data)
    back, manifest = weber.read_wbract(str(tmp_path / "t.wbract"))
    assert np.array_equal(back, tensor)
    assert manifest == '{"kind":"x"}'


def test_errors_surface_as_weber_error(tmp_path):
    (tmp_path / "bad.wbract").write_bytes(b"nope")
    with pytest.raises(weber.WeberError, match="bad_magic"):
        weber.validate_activations(tmp_path / "bad.wbract")
    with pytest.raises(weber.WeberError):
        weber.validate_trials("")


def test_geometry_on_log_embeddings(synthetic_files):
    r = weber.analyze_geometry(synthetic_files / "log.wbract", metrics=["cosine"], permutations=200)
    assert len(r["geometry"]) == 3
    assert all(v["winner"] == "weber" for v in r["geometry"])


def test_behaviour_summary(synthetic_files):
    b = weber.analyze_behaviour(synthetic_files / "observer.jsonl")
    assert b["n_records"] == 1500
    assert b["deviance"]["winner"] == "log_ratio"
    assert 0.1 < b["psychometric"]["wf"] < 0.3


def test_corpus_fit():
    text = " ".join(str(n) for n in range(1, 101) for _ in range(max(1, 300 // n)))
    r = weber.corpus_fit(text)
    assert r["histogram"]["total_mentions"] > 100
    assert r["fit"]["alpha"] > 0.5


def test_patch_plan_offsets(synthetic_files):
    plan = weber.read_patch_plan(str(synthetic_files / "plan.wbract"))
    assert plan["direction_ids"] == ["mag", "rand_1", "rand_2", "rand_3"]
    assert plan["planned_runs"] == 4 * 4 * 4
    offsets = plan["offsets"]
    assert offsets.shape == (4, 4, 16)
    norms = np.linalg.norm(offsets[:, -1, :], axis=1)
    assert np.allclose(norms, norms[0])
