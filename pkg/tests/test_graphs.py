import math

import numpy as np
import pytest

from qgenbench.circuits import (Circuit, CZLayer, GenerativeSpec, LayerGraph,
                                build_generative, sample_er_graph)
from qgenbench.graphs import (degeneracy, interaction_graph, min_fill_width,
                              treewidth_trend, union_graph)


def path(n):
    return LayerGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle(n):
    return LayerGraph(n, tuple((i, (i + 1) % n) if i + 1 < n else (0, n - 1)
                               for i in range(n)))


def clique(n):
    return LayerGraph(n, tuple((a, b) for a in range(n) for b in range(a + 1, n)))


def grid(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return LayerGraph(rows * cols, tuple(edges))


def test_known_widths():
    for g, tw in [(LayerGraph(4, ()), 0), (path(6), 1), (cycle(7), 2),
                  (clique(5), 4)]:
        ub, order = min_fill_width(g)
        lb = degeneracy(g)
        assert lb == ub == tw
        assert sorted(order.order) == list(range(g.n))


def test_grid_bracket():
    g = grid(4, 4)
    lb, (ub, _) = degeneracy(g), min_fill_width(g)
    assert lb <= 4 <= ub  # treewidth of the 4x4 grid is 4
    assert ub <= 5


def test_bracket_ordering_random():
    for seed in range(40):
        g = sample_er_graph(30, 0.15, seed)
        assert degeneracy(g) <= min_fill_width(g)[0]


def test_monotone_under_edge_addition():
    rng = np.random.default_rng(3)
    for seed in range(20):
        g = sample_er_graph(20, 0.1, seed)
        extra = sample_er_graph(20, 0.1, seed + 1000)
        big = union_graph([g, extra])
        assert degeneracy(big) >= degeneracy(g)
        assert min_fill_width(big)[0] >= min_fill_width(g)[0]


def test_deterministic_tie_breaking():
    g = cycle(8)
    _, order1 = min_fill_width(g)
    _, order2 = min_fill_width(g)
    assert order1 == order2
    assert order1.order[0] == 0  # all fill counts tie; lowest index wins


def test_interaction_graph_star():
    star = CZLayer(tuple((0, b) for b in range(1, 5)))
    circ = Circuit(6, (star,))
    g = interaction_graph(circ, {0})
    assert g.n == 5  # qubit 5 is outside the cone
    assert len(g.edges) == 4


def test_interaction_graph_disconnected_support():
    circ = Circuit(4, (CZLayer(((0, 1),)),))
    g = interaction_graph(circ, {3})
    assert g.n == 1 and g.edges == ()


def test_interaction_graph_relabelling():
    circ = Circuit(5, (CZLayer(((2, 4),)),))
    g = interaction_graph(circ, {2})
    assert g.n == 2 and g.edges == ((0, 1),)


def test_union_of_layers_widens():
    n, seed = 60, 5
    p = math.log(n) / n
    layers = [sample_er_graph(n, p, seed + l) for l in range(5)]
    single = min_fill_width(layers[0])[0]
    union = min_fill_width(union_graph(layers))[0]
    assert union >= single


def test_treewidth_trend_rows():
    rows = treewidth_trend([20, 30], trials=2, seed=1)
    assert len(rows) == 8
    for row in rows:
        assert row["degeneracy_lb"] <= row["minfill_ub"]
        assert row["layers"] in (1, math.ceil(math.log(row["n"])))
    rows20 = [r for r in rows if r["n"] == 20 and r["trial"] == 0]
    assert rows20[0]["layers"] == 1


def test_trend_deterministic():
    a = treewidth_trend([25], trials=3, seed=9)
    b = treewidth_trend([25], trials=3, seed=9)
    assert a == b


def test_trend_increases_with_n():
    rows = treewidth_trend([40, 120], trials=5, seed=2)
    mean_ub = {}
    for n in (40, 120):
        vals = [r["minfill_ub"] for r in rows if r["n"] == n and r["layers"] > 1]
        mean_ub[n] = np.mean(vals)
    assert mean_ub[120] > mean_ub[40]
