import logging

import pytest
from meelab import corpus
from meelab.densities import CsumFamily
from meelab.densities import CsumShape

# This swallows all logging to stdout.
# To show select logs, set --log-cli-level=<level>
for handler in logging.root.handlers[:]:
    logging.root.removeHandler(handler)
    handler.close()

log = logging.getLogger(__name__)


@pytest.fixture(scope="session")
def families():
    """
    The built-in sweep corpus, shared by every test that only reads it.
    """
    return corpus.corpus_families()


@pytest.fixture(scope="session")
def gaussian_pair(families):
    return families["gaussian-pair"]


@pytest.fixture(scope="session")
def two_uniforms(families):
    return families["two-uniforms"]


@pytest.fixture(scope="session")
def mixed_triple(families):
    return families["mixed-triple"]


@pytest.fixture(scope="session")
def gaussian_quadruple():
    """
    Four Gaussians, enough to switch the optimizer to coordinate descent.
    """
    return CsumFamily(
        [
            (0.25, CsumShape("gaussian", location, scale))
            for location, scale in ((-1.5, 0.5), (-0.5, 0.6), (0.5, 0.7), (1.5, 0.8))
        ],
        corpus.CORPUS_GRID,
        s_max=corpus.CORPUS_S_MAX,
    )


@pytest.fixture
def unit_uniform():
    return corpus.unit_uniform()
