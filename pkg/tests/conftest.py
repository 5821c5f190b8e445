import random

import numpy as np
import pytest
from hypothesis import settings

from weakstat.dsl import reference_source, tokenize
from weakstat.selfcheck import random_density, random_pvm, random_unitary

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# filled by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_ket(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def _mutate(tokens, rnd):
    toks = list(tokens)
    for _ in range(rnd.randint(1, 3)):
        if not toks:
            break
        k = rnd.randrange(len(toks))
        action = rnd.random()
        if action < 0.6:
            del toks[k]
        elif action < 0.8:
            toks.insert(k, toks[rnd.randrange(len(toks))])
        else:
            j = rnd.randrange(len(toks))
            toks[k], toks[j] = toks[j], toks[k]
    return "".join(t if t == "\n" else t + " " for t in toks)


def fuzz_sources(n, seed=0):
    """``n`` token-level mutations (deletions, duplications, swaps) of the shipped ``.ws`` files."""
    rnd = random.Random(seed)
    token_lists = []
    for name in ("bell", "double_slit", "entangled"):
        toks, _ = tokenize(reference_source(name))
        token_lists.append([t.text for t in toks if t.kind != "EOF"])
    return [_mutate(token_lists[i % len(token_lists)], rnd) for i in range(n)]


def check_positions(text, diags):
    lines = text.split("\n")
    for d in diags:
        assert 1 <= d.line <= len(lines), d
        assert 1 <= d.column <= len(lines[d.line - 1]) + 1, d


__all__ = [
    "random_density",
    "random_pvm",
    "random_unitary",
    "random_ket",
    "random_hermitian",
    "fuzz_sources",
    "check_positions",
]
