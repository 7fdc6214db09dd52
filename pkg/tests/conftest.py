import random

import pytest

BASES = "ACGT"


def random_dna(rng: random.Random, n: int) -> str:
    return "".join(rng.choice(BASES) for _ in range(n))


def mutate(rng: random.Random, seq: str, snp: float, ins: float, dele: float) -> str:
    """Plain-Python point mutator, kept separate from rdc.synthetic."""
    out = []
    for base in seq:
        if rng.random() < ins:
            out.append(rng.choice(BASES))
        if rng.random() < dele:
            continue
        if rng.random() < snp:
            out.append(rng.choice([b for b in BASES if b != base]))
        else:
            out.append(base)
    if not out:
        out.append(rng.choice(BASES))
    return "".join(out)


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
