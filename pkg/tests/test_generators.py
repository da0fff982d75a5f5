import numpy as np
import pytest

from dyndowker.generators import (DIFFUSION_LABEL, TRIPLE_EDGES, RANDOM_LABEL, GeneratorError,
                                  GeneratorSpec, cycle, diffusion_tree, fig1b_triple, generate,
                                  random_graphs, random_temporal, star, two_class_dataset)
from dyndowker.graph import format_edge_list, normalize_weights
from dyndowker.persistence import pd1


class TestFamilies:
    def test_star_fixture(self):
        g = star(3)
        assert list(g.edges()) == [(1, 4, 0.1), (2, 4, 0.2), (3, 4, 0.3)]

    def test_cycle_has_one_essential_loop(self):
        g = cycle(4)
        d = pd1(normalize_weights(g)).positive()
        assert len(d) == 1 and d.points[0].death is None

    def test_random_temporal_shape(self):
        g = random_temporal(40, 120, np.random.default_rng(0))
        assert g.node_count == 40 and g.edge_count == 120
        assert g.label == RANDOM_LABEL
        assert len(set(zip(g.sources.tolist(), g.targets.tolist()))) == 120

    def test_random_temporal_capacity(self):
        with pytest.raises(GeneratorError):
            random_temporal(3, 7, np.random.default_rng(0))

    def test_diffusion_tree_is_causal_tree(self):
        g = diffusion_tree(30, np.random.default_rng(1))
        assert g.edge_count == 29 and g.label == DIFFUSION_LABEL
        indeg = np.bincount(g.targets, minlength=30)
        assert indeg.max() == 1 and (indeg == 0).sum() == 1
        reached = dict(zip(g.targets.tolist(), g.times.tolist()))
        for s, t, x in g.edges():
            assert s not in reached or reached[s] < x

    def test_two_class_matched_sizes(self):
        ds = two_class_dataset(20, 10, 15, seed=3)
        assert [g.label for g in ds] == [DIFFUSION_LABEL, RANDOM_LABEL] * 10
        assert all(g.edge_count == g.node_count - 1 for g in ds)


class TestDirectionTriple:
    def test_swap_and_reverse(self):
        ga, gb, gc = fig1b_triple()
        ea, eb, ec = list(ga.edges()), list(gb.edges()), list(gc.edges())
        assert ea == [(s, t, float(x)) for s, t, x in TRIPLE_EDGES]
        # exactly two timestamps trade places
        diff = [i for i in range(len(ea)) if ea[i] != eb[i]]
        assert len(diff) == 2
        i, j = diff
        assert ea[i][:2] == eb[i][:2] and ea[i][2] == eb[j][2] and ea[j][2] == eb[i][2]
        # exactly one edge is flipped
        diff = [k for k in range(len(ea)) if ea[k] != ec[k]]
        assert len(diff) == 1
        k = diff[0]
        assert (ec[k][1], ec[k][0], ec[k][2]) == ea[k]

    def test_five_nodes(self):
        assert all(g.node_count == 5 for g in fig1b_triple())


class TestDeterminism:
    def test_same_seed_same_dataset(self):
        spec = GeneratorSpec("random_temporal", count=3, nodes=40, edges=120, seed=8)
        a = [format_edge_list(g) for g in generate(spec)]
        b = [format_edge_list(g) for g in generate(spec)]
        assert a == b

    def test_different_seed_differs(self):
        a = generate(GeneratorSpec("diffusion_tree", count=2, nodes=12, seed=1))
        b = generate(GeneratorSpec("diffusion_tree", count=2, nodes=12, seed=2))
        assert format_edge_list(a[0]) != format_edge_list(b[0])

    def test_random_graphs_sizes(self):
        for g in random_graphs(20, (10, 40), (20, 120), seed=0):
            assert 10 <= g.node_count <= 40 and 20 <= g.edge_count <= 120


class TestSpec:
    @pytest.mark.parametrize("kw", [dict(family="lattice"), dict(family="star", count=0),
                                    dict(family="cycle", nodes=0),
                                    dict(family="random_temporal", edges=0)])
    def test_invalid(self, kw):
        with pytest.raises(GeneratorError):
            GeneratorSpec(**kw)
