import os
import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def weber_cli():
    exe = os.environ.get("WEBER_CLI") or shutil.which("weber")
    if not exe:
        pytest.skip("weber executable not available")

    def run(*args, cwd=None):
        subprocess.run([exe, *map(str, args)], check=True, cwd=cwd, capture_output=True)

    return run


@pytest.fixture(scope="session")
def synthetic_files(tmp_path_factory, weber_cli):
    d = tmp_path_factory.mktemp("synthetic")
    weber_cli("synth", "embeddings", "--dim", 32, "--layers", 3, "--out", d / "log.wbract")
    weber_cli("synth", "embeddings", "--geometry", "planted_direction", "--dim", 16, "--layers", 3,
              "--out", d / "planted.wbract")
    weber_cli("plan-patch", d / "planted.wbract", "--layer", 1, "--n-prompts", 4, "--random", 3,
              "--out", d / "plan.wbract")
    weber_cli("synth", "observer", "--seed", 5, "--out", d / "observer.jsonl")
    weber_cli("gen-stimuli", "--domain", "all", "--seed", 42, "--out", d / "stim")
    return d
