import math

import pytest

from rdc.errors import InvalidRateError
from rdc.synthetic import generate_synthetic_set


def test_zero_rates_give_copies():
    s = generate_synthetic_set(500, 4, seed=1)
    assert len(s) == 5
    assert {q.bases for q in s} == {s.reference.bases}
    assert [q.id for q in s] == ["ref", "t1", "t2", "t3", "t4"]


def test_deterministic():
    a = generate_synthetic_set(1000, 3, 0.02, 0.01, 0.01, seed=9)
    b = generate_synthetic_set(1000, 3, 0.02, 0.01, 0.01, seed=9)
    c = generate_synthetic_set(1000, 3, 0.02, 0.01, 0.01, seed=10)
    assert [q.bases for q in a] == [q.bases for q in b]
    assert [q.bases for q in a] != [q.bases for q in c]


def test_snp_count_is_binomial():
    n, p = 10_000, 0.01
    mean, sigma = n * p, math.sqrt(n * p * (1 - p))
    s = generate_synthetic_set(n, 20, snp_rate=p, seed=4)
    ref = s.reference.bases
    for target in s.sequences[1:]:
        assert len(target) == n
        mismatches = sum(a != b for a, b in zip(ref, target.bases))
        assert abs(mismatches - mean) <= 3 * sigma


def test_indel_rates_shift_length():
    s = generate_synthetic_set(20_000, 5, ins_rate=0.02, seed=5)
    assert all(len(t) > 20_000 for t in s.sequences[1:])
    s = generate_synthetic_set(20_000, 5, del_rate=0.02, seed=5)
    assert all(len(t) < 20_000 for t in s.sequences[1:])


def test_tiny_reference_never_yields_empty_target():
    s = generate_synthetic_set(1, 200, del_rate=0.49, seed=0)
    assert all(len(t) >= 1 for t in s)


@pytest.mark.parametrize("kwargs", [dict(snp_rate=0.5), dict(ins_rate=-0.1), dict(del_rate=0.9)])
def test_invalid_rates(kwargs):
    with pytest.raises(InvalidRateError):
        generate_synthetic_set(10, 1, **kwargs)
