from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from forgerybench.imgio import load_image

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def noise_image():
    return load_image(FIXTURES / "noise64.png")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_png(path, pixels):
    from PIL import Image

    arr = np.asarray(pixels, dtype=np.uint8)
    Image.fromarray(arr).save(path)
    return path


@pytest.fixture(scope="session")
def mini_corpora(tmp_path_factory):
    """Two small registered corpora: quality-mismatched and matched forgeries."""
    from forgerybench.datasets import Registry
    from forgerybench.synth import CorpusConfig, build_corpus

    root = tmp_path_factory.mktemp("mini")
    easy = build_corpus(CorpusConfig(24, 24, sizes=((64, 64),), seed=1, dataset_id="mini_easy"),
                        root / "mini_easy")
    matched = build_corpus(CorpusConfig(24, 24, sizes=((64, 64),), seed=2, matched_quality=True,
                                        dataset_id="mini_matched"), root / "mini_matched")
    return root, Registry([easy, matched])


@pytest.fixture
def tiny_grid():
    from forgerybench.classifier import GridSearchConfig

    return GridSearchConfig(c_grid=(1.0, 10.0), gamma_grid=(1e-2, "1/d"), degree_grid=(2,),
                            folds=3)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[n])
