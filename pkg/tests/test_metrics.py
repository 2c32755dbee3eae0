import random
from fractions import Fraction

from cohesearch.engine import ResultEntry
from cohesearch.metrics import evaluate_effectiveness, top_size_filter


def entries(*pairs):
    return [ResultEntry(size=s, node=n) for n, s in pairs]


def test_top_size_filter():
    assert top_size_filter(entries(((0,), 2), ((1,), 2), ((2,), 4))) == entries(
        ((0,), 2), ((1,), 2)
    )
    assert top_size_filter([]) == []
    assert top_size_filter(entries(((0,), 0))) == entries(((0,), 0))


def test_top_size_is_maximal_prefix():
    rng = random.Random(67)
    for _ in range(50):
        sizes = sorted(rng.randint(0, 4) for _ in range(rng.randint(1, 8)))
        results = entries(*(((i,), s) for i, s in enumerate(sizes)))
        kept = top_size_filter(results)
        assert kept == results[: len(kept)]
        assert all(r.size == results[0].size for r in kept)
        if len(kept) < len(results):
            assert results[len(kept)].size > results[0].size


def test_effectiveness_examples():
    rep = evaluate_effectiveness({1, 2}, {1, 2})
    assert (rep.precision, rep.recall, rep.fmeasure) == (1, 1, 1)
    rep = evaluate_effectiveness({1, 2}, {3, 4})
    assert (rep.precision, rep.recall, rep.fmeasure) == (0, 0, 0)
    rep = evaluate_effectiveness({1, 2, 3, 4}, {1, 2})
    assert rep.precision == Fraction(1, 2)
    assert rep.recall == 1
    assert rep.fmeasure == Fraction(2, 3)


def test_effectiveness_empty_conventions():
    assert evaluate_effectiveness(set(), set()).precision == 1
    assert evaluate_effectiveness(set(), set()).recall == 1
    assert evaluate_effectiveness(set(), {1}).precision == 0
    assert evaluate_effectiveness(set(), {1}).recall == 0
    assert evaluate_effectiveness({1}, set()).recall == 0


def test_effectiveness_bounds():
    rng = random.Random(71)
    universe = list(range(12))
    for _ in range(200):
        retrieved = set(rng.sample(universe, rng.randint(0, 8)))
        relevant = set(rng.sample(universe, rng.randint(0, 8)))
        rep = evaluate_effectiveness(retrieved, relevant)
        p, r, f = rep.precision, rep.recall, rep.fmeasure
        assert 0 <= p <= 1 and 0 <= r <= 1 and 0 <= f <= 1
        assert f <= max(p, r)
        assert (f == 0) == (p * r == 0)
