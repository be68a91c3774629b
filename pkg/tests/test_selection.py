"""Selection engines: miner oracle, fitness scores, pipelines."""

import itertools
import random

import pytest

from bji_advisor import costmodel, data_path, selection
from bji_advisor.schema import (AttributeStats, Join, StarSchema, TableStats,
                                load_catalog_file)
from bji_advisor.workload import (ContextMatrix, ParsedQuery,
                                  build_context_matrix, parse_workload)


def load(cat, wl):
    schema = load_catalog_file(data_path(cat))
    qs = parse_workload(data_path(wl).read_text(), schema)
    return schema, build_context_matrix(schema, qs)


def example():
    return load("example_star.json", "example_star.sql")


# ---------------------------------------------------------------------------
# closed-itemset miner vs brute-force closure oracle
# ---------------------------------------------------------------------------

def brute_closed_sets(rows, n_cols):
    """All nonempty itemsets equal to the intersection of their covering rows."""
    out = set()
    cols = list(range(1, n_cols + 1))
    for r in range(1, n_cols + 1):
        for combo in itertools.combinations(cols, r):
            s = set(combo)
            covering = [row for row in rows if s <= row]
            if not covering:
                continue
            closure = set.intersection(*map(set, covering))
            if closure == s:
                out.add(frozenset(s))
    return out


def matrix_from_rows(rows, n_cols):
    tables = {
        "F": TableStats("F", "fact", 100, 10),
        "D": TableStats("D", "dimension", 10, 10),
    }
    attrs = tuple(AttributeStats("D", f"a{i}", 2) for i in range(1, n_cols + 1))
    schema = StarSchema(tables=tables, attributes=attrs, joins=(),
                        page_size=4096)
    queries = tuple(
        ParsedQuery(id=i + 1, raw_text="", predicates=(),
                    referenced=frozenset(f"D.a{c}" for c in row))
        for i, row in enumerate(rows))
    return ContextMatrix(schema=schema, queries=queries,
                         columns=tuple(a.qualified for a in attrs),
                         rows=tuple(frozenset(r) for r in rows))


def test_miner_oracle_random_matrices():
    rng = random.Random(12021)
    checked = 0
    while checked < 220:
        n_cols = rng.randint(1, 16)
        n_rows = rng.randint(1, 10)
        rows = []
        for _ in range(n_rows):
            row = {c for c in range(1, n_cols + 1) if rng.random() < 0.4}
            if row:
                rows.append(row)
        if not rows:
            continue
        checked += 1
        m = matrix_from_rows(rows, n_cols)
        got = {ids for ids, _ in
               selection.mine_closed_frequent_itemsets(m, 1e-9)}
        assert got == brute_closed_sets(rows, n_cols)


def test_miner_minsup_filters():
    m = matrix_from_rows([{1, 2}, {1, 2}, {3}], 3)
    got = dict(selection.mine_closed_frequent_itemsets(m, 0.5))
    assert got == {frozenset({1, 2}): pytest.approx(2 / 3)}
    with pytest.raises(ValueError):
        selection.mine_closed_frequent_itemsets(m, 0.0)


def test_miner_worked_example():
    _, m = example()
    got = dict(selection.mine_closed_frequent_itemsets(m, 0.1))
    assert got == {frozenset({1, 2, 3}): pytest.approx(0.4),
                   frozenset({4, 5, 6}): pytest.approx(0.6)}


# ---------------------------------------------------------------------------
# fitness and scoring
# ---------------------------------------------------------------------------

def test_alpha_ratios():
    schema, _ = example()
    assert selection.alpha(schema, "CUSTOMERS.cust_gender") == \
        pytest.approx(19 / 894)
    assert selection.alpha(schema, "CHANNELS.channel_desc") == \
        pytest.approx(1 / 894)
    assert selection.alpha(schema, "SALES.cust_id") == 1.0


def test_fitness_tm_values():
    schema, m = example()
    assert selection.fitness_tm(schema, m, (3, 4)) == \
        pytest.approx(0.0085, abs=5e-4)
    # keys add nothing
    assert selection.fitness_tm(schema, m, (3,)) == \
        selection.fitness_tm(schema, m, (2, 3, 4))
    # no indexable member -> 0
    assert selection.fitness_tm(schema, m, (1, 2, 4, 5)) == 0.0


def test_afc_sums():
    schema, m = example()
    assert selection.afc_sum(schema, m, (3, 4)) == 50_005
    assert selection.afc_sum(schema, m, (3, 5)) == 16_310_336
    assert selection.afc_sum(schema, m, ()) == 0


def test_fitness_dynaclose_single_indexable():
    schema, m = example()
    one = selection.fitness_dynaclose(schema, m, (3,))
    assert one == pytest.approx(m.support([3]) *
                                selection.alpha(schema, "CUSTOMERS.cust_gender"))
    # averaging over indexable members only
    assert selection.fitness_dynaclose(schema, m, (2, 3)) == pytest.approx(one)
    assert selection.fitness_dynaclose(schema, m, (1, 2)) == 0.0


# ---------------------------------------------------------------------------
# engine pipelines on the worked example
# ---------------------------------------------------------------------------

def test_tm_ijb_worked_example():
    schema, m = example()
    cfg = selection.tm_ijb(schema, m)
    assert cfg.attrs == ("CHANNELS.channel_desc", "CUSTOMERS.cust_gender")
    assert len(cfg.trace) == 9
    winner = [t for t in cfg.trace if t.selected]
    assert len(winner) == 1 and winner[0].ids == (3, 6)
    by_ids = {t.ids: t for t in cfg.trace}
    assert by_ids[(3, 4)].afc == 50_005
    assert by_ids[(3, 5)].afc == 16_310_336
    assert by_ids[(3, 4)].fitness == pytest.approx(0.0085, abs=5e-4)
    # the winner strictly maximizes fitness
    assert all(t.fitness <= winner[0].fitness for t in cfg.trace)


def test_tm_ijb_deterministic():
    schema, m = example()
    a = selection.tm_ijb(schema, m)
    b = selection.tm_ijb(schema, m)
    assert a == b


def test_dynaclose_worked_example():
    schema, m = example()
    cfg = selection.dynaclose_select(schema, m, 0.1)
    # the customer motif wins: 0.4 * 19/894 > 0.6 * 1/894
    assert cfg.attrs == ("CUSTOMERS.cust_gender",)
    sel = [t for t in cfg.trace if t.selected]
    assert sel[0].ids == (1, 2, 3)


def test_close_greedy_improves_cost():
    schema, m = example()
    cfg = selection.close_select(schema, m, 0.1)
    base = costmodel.workload_cost(schema, m.queries, ())
    cost = costmodel.workload_cost(schema, m.queries, cfg.attrs)
    assert cost < base
    # every chosen attribute is indexable
    for a in cfg.attrs:
        assert schema.is_indexable(schema.attribute(a))


def test_close_storage_budget_skips():
    schema, m = example()
    free = selection.close_select(schema, m, 0.1)
    capped = selection.close_select(schema, m, 0.1, storage_budget=1)
    assert capped.attrs == ()
    assert len(capped.notes) >= len(free.attrs)


def test_ssb_pipeline_goldens():
    schema, m = load("ssb.json", "ssb.sql")
    cfg = selection.tm_ijb(schema, m)
    assert cfg.attrs == ("dates.d_year", "part.p_brand")
    assert all(len(t.ids) == 3 for t in cfg.trace)
    winner = [t for t in cfg.trace if t.selected][0]
    assert winner.ids == (5, 22, 54)
    assert (4, 5, 22) in {t.ids for t in cfg.trace}
    dyn = selection.dynaclose_select(schema, m, 0.1)
    assert dyn.attrs == ("part.p_brand",)


def test_tm_ijb_output_is_subset_of_one_smallest_tm():
    schema, m = load("tpch.json", "tpch.sql")
    cfg = selection.tm_ijb(schema, m)
    winner = [t for t in cfg.trace if t.selected][0]
    ids = {m.id_of(a) for a in cfg.attrs}
    assert ids <= set(winner.ids)
    for a in cfg.attrs:
        assert schema.is_indexable(schema.attribute(a))
