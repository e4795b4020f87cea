"""Record oracle accuracies for the frozen easy-forgery corpus.

Run once when the corpus definition changes::

    python3 -m tests.fixtures.freeze_e2e

The oracle route shares nothing with the package beyond the protocol inputs
(corpus, train/test split and cross-validation fold indices): features come
from the straight-line reference extractors in ``tests/oracles.py`` and the
classifier is scikit-learn's scaler + SVC tuned by GridSearchCV over the same
default grid. Thresholds sit ``THRESHOLD_MARGIN`` points below each oracle
accuracy.
"""

import json
import sys
import tempfile
import time

import numpy as np
from sklearn.model_selection import GridSearchCV
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC

from forgerybench.classifier import stratified_folds
from forgerybench.datasets import stratified_split
from forgerybench.imgio import load_image
from forgerybench.synth import build_corpus

from .. import oracles
from ..e2e import EASY, FIXTURE, RUN_SEED, SPLIT, THRESHOLD_MARGIN, tree_digest

REFS = {
    "ALAHMADI": (oracles.ref_alahmadi, "rbf"),
    "DUA": (oracles.ref_dua, "rbf"),
    "ARMAN": (oracles.ref_arman, "rbf"),
    "MANDEEP": (oracles.ref_mandeep, "rbf"),
    "MOHAMMED": (oracles.ref_mohammed, "poly"),
}
C_GRID = [0.1, 1, 10, 100, 1000]
GAMMAS = [1e-4, 1e-3, 1e-2, 1e-1, 1]


def oracle_accuracy(kernel, Xtr, ytr, Xte, yte):
    gammas = sorted(GAMMAS + [1.0 / Xtr.shape[1]])  # GridSearchCV keeps the first of tied cells
    grid = {"svc__C": C_GRID, "svc__gamma": gammas}
    if kernel == "poly":
        grid.update({"svc__degree": [2, 3], "svc__coef0": [1.0]})
    pipe = make_pipeline(StandardScaler(), SVC(kernel=kernel, tol=1e-3, max_iter=-1))
    # same fold indices as the package, so both routes tune on identical data
    everything = np.arange(ytr.shape[0])
    cv = [(np.setdiff1d(everything, val), val) for val in stratified_folds(ytr, 10, RUN_SEED)]
    search = GridSearchCV(pipe, grid, cv=cv).fit(Xtr, ytr)
    pred = search.predict(Xte)
    return 100.0 * float(np.mean(pred == yte)), search.best_params_


def main():
    with tempfile.TemporaryDirectory() as tmp:
        m = build_corpus(EASY, tmp)
        digest = tree_digest(tmp)
        plan = stratified_split(m, SPLIT, RUN_SEED)
        imgs = {e.path: load_image(e.path) for e in m.entries}
        result = {"corpus": EASY.dataset_id, "digest": digest, "split": SPLIT,
                  "seed": RUN_SEED, "margin": THRESHOLD_MARGIN, "methods": {}}
        for name, (ref, kernel) in REFS.items():
            t = time.time()
            feats = {p: ref(img) for p, img in imgs.items()}
            Xtr = np.array([feats[e.path] for e in plan.train])
            ytr = np.array([1 if e.label == "tampered" else -1 for e in plan.train])
            Xte = np.array([feats[e.path] for e in plan.test])
            yte = np.array([1 if e.label == "tampered" else -1 for e in plan.test])
            acc, params = oracle_accuracy(kernel, Xtr, ytr, Xte, yte)
            result["methods"][name] = {
                "oracle_accuracy": round(acc, 4),
                "threshold": round(acc - THRESHOLD_MARGIN, 4),
                "oracle_params": {k.split("__")[1]: v for k, v in params.items()},
            }
            print(f"{name}: {acc:.2f}% {params} ({time.time() - t:.0f}s)", file=sys.stderr)
    FIXTURE.write_text(json.dumps(result, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
