import random

from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzysat import expr as E
from fuzzysat.corpus import load_query
from fuzzysat.synth import QueryGenerator, large_pi, write_corpus


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1))
def test_concolic_contract(seed):
    q = QueryGenerator(random.Random(seed), 4, 4).query()
    assert all(E.evaluate(p, q.seed) for p in q.pi)
    assert not E.evaluate(q.branch, q.seed)
    assert max(E.inputs_of(q.branch).union(*[E.inputs_of(p) for p in q.pi])) < len(q.seed)


def test_large_pi():
    pi, tc = large_pi(1000)
    assert len({n.id for n in E.topo_order(pi)}) >= 1000
    assert all(E.evaluate(p, tc) for p in pi)


def test_written_corpus_round_trips(tmp_path):
    paths = write_corpus(tmp_path, 10, seed=2)
    for p in paths:
        lq = load_query(p)
        q = lq.query()
        assert lq.seed_source.startswith("option:")
        assert all(E.evaluate(x, lq.seed) for x in q.pi) and not E.evaluate(q.branch, lq.seed)
