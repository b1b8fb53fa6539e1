import numpy as np
import pytest

from wembed.corpus import Vocabulary
from wembed.trainer import EmbeddingModel

# one PASS/FAIL line per acceptance criterion, keyed off the marker
_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion with printed verdict")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        name = marker.args[0] if marker.args else item.name
        _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, verdict in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"ACCEPTANCE {name}: {verdict}")


def make_model(tokens, vectors, counts=None) -> EmbeddingModel:
    """Assemble an in-memory model for query/service tests."""
    if counts is None:
        vocab = Vocabulary.from_tokens(tokens)
    else:
        vocab = Vocabulary(list(zip(tokens, counts)))
    return EmbeddingModel(vocab=vocab, vectors=np.asarray(vectors, dtype=np.float32))


@pytest.fixture
def tiny_model() -> EmbeddingModel:
    """5 entities in 4 dimensions with hand-readable geometry."""
    tokens = ["Q1", "Q2", "Q3", "P1", "Q4"]
    vectors = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.9, 0.1, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
        ],
        dtype=np.float32,
    )
    return make_model(tokens, vectors)
