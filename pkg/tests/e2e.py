"""Frozen synthetic corpora shared by the end-to-end checks and the freeze
script that records their oracle accuracies."""

import hashlib
import json
from pathlib import Path

from forgerybench.synth import CorpusConfig

FIXTURE = Path(__file__).parent / "fixtures" / "e2e_synth.json"

EASY = CorpusConfig(n_pristine=200, n_tampered=200, sizes=((128, 128),), seed=42,
                    dataset_id="synth_easy")
MATCHED = CorpusConfig(n_pristine=200, n_tampered=200, sizes=((128, 128),), seed=43,
                       matched_quality=True, dataset_id="synth_matched")
SPLIT = 0.8
RUN_SEED = 42
THRESHOLD_MARGIN = 5.0


def tree_digest(root) -> str:
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode())
            h.update(b"\0")
            h.update(p.read_bytes())
    return h.hexdigest()


def load_frozen() -> dict:
    return json.loads(FIXTURE.read_text())
