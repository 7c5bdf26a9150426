from __future__ import annotations

import numpy as np
import pytest

from dctjpeg.bitstream import decode_to_dct
from dctjpeg.corpus import encode, make_corpus, source_images


@pytest.fixture(scope="session")
def corpus():
    return make_corpus(120, seed=0)


@pytest.fixture(scope="session")
def small_corpus(corpus):
    return corpus[:24]


@pytest.fixture(scope="session")
def decoded(corpus):
    return [decode_to_dct(e.data)[0] for e in corpus]


@pytest.fixture(scope="session")
def astronaut_jpeg() -> bytes:
    return encode(np.ascontiguousarray(source_images()["astronaut"][:256, 96:352]), 90, "4:2:0")


@pytest.fixture(scope="session")
def astronaut(astronaut_jpeg):
    return decode_to_dct(astronaut_jpeg)[0]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria report one line each; collected here and repeated in the terminal summary
ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def criterion(request):
    lines = request.config.stash[ACCEPTANCE]

    def record(n: int, ok: bool, detail: str = "") -> bool:
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        lines[(n, request.node.name)] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[ACCEPTANCE]
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
