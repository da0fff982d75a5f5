import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyndowker.dowker import (SkeletonTooLarge, build_skeleton, candidate_count, skeleton_at)
from dyndowker import dowker
from dyndowker.graph import WeightedDigraph
from dyndowker.linegraph import SINK, SOURCE, build_line_graphs

from conftest import random_weighted


def as_dict(sk):
    return {s.vertices: s.value for s in sk.simplices}


def brute_value(g, kind, sigma):
    rel = {}
    for s, t, x in g.edges():
        key = (s, t) if kind == SINK else (t, s)
        rel[key] = x
    best = np.inf
    for w in range(g.node_count):
        best = min(best, max(rel.get((b, w), np.inf) for b in sigma))
    return best


class TestStar:
    def test_sink_skeleton(self, star):
        assert as_dict(build_skeleton(star, SINK)) == {
            (1,): 0.1, (2,): 0.2, (3,): 0.3,
            (1, 2): 0.2, (1, 3): 0.3, (2, 3): 0.3, (1, 2, 3): 0.3,
        }

    def test_source_skeleton(self, star):
        assert as_dict(build_skeleton(star, SOURCE)) == {(4,): 0.1}

    def test_filtration_order(self, star):
        order = [(s.vertices, s.dim) for s in build_skeleton(star).simplices]
        assert order == [((1,), 0), ((2,), 0), ((1, 2), 1), ((3,), 0), ((1, 3), 1), ((2, 3), 1),
                         ((1, 2, 3), 2)]

    def test_disjoint_targets(self):
        g = WeightedDigraph.from_edges([(0, 1, 0.3), (2, 3, 0.6)])
        assert as_dict(build_skeleton(g)) == {(0,): 0.3, (2,): 0.6}

    @pytest.mark.parametrize("delta,want", [
        (0.15, {(1,): 0.1}),
        (0.2, {(1,): 0.1, (2,): 0.2, (1, 2): 0.2}),
    ])
    def test_threshold_cut(self, star, delta, want):
        assert as_dict(skeleton_at(build_skeleton(star), delta)) == want

    def test_full_threshold_is_identity(self, star):
        sk = build_skeleton(star)
        assert as_dict(skeleton_at(sk, 1.0)) == as_dict(sk)

    def test_json(self, star):
        obj = build_skeleton(star).to_json()
        assert obj["kind"] == SINK
        assert obj["simplices"][2] == {"v": [1, 2], "value": 0.2, "dim": 1}


class TestCap:
    def test_candidate_count(self, star):
        # one witness with in-degree 3: 3 + 3 + 1
        assert candidate_count(star, SINK) == 7
        assert candidate_count(star, SOURCE) == 3

    def test_cap_raises(self, star):
        with pytest.raises(SkeletonTooLarge):
            build_skeleton(star, max_candidates=6)
        build_skeleton(star, max_candidates=7)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6), st.sampled_from([SINK, SOURCE]), st.sampled_from([None, 3]))
    def test_values_match_brute_force(self, seed, kind, levels):
        g = random_weighted(np.random.default_rng(seed), 7, 20, levels)
        got = as_dict(build_skeleton(g, kind))
        from itertools import combinations
        want = {}
        for k in (1, 2, 3):
            for sigma in combinations(range(g.node_count), k):
                v = brute_value(g, kind, sigma)
                if np.isfinite(v):
                    want[sigma] = v
        assert got == want

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_faces_precede_cofaces(self, seed):
        sk = build_skeleton(random_weighted(np.random.default_rng(seed), 8, 30, 4))
        pos = {s.vertices: i for i, s in enumerate(sk.simplices)}
        vals = sk.value_map()
        from itertools import combinations
        for s in sk.simplices:
            for face in combinations(s.vertices, len(s.vertices) - 1) if s.dim else ():
                assert vals[face] <= s.value
                assert pos[face] < pos[s.vertices]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0, 1), st.floats(0, 1))
    def test_nested(self, seed, a, b):
        lo, hi = sorted((a, b))
        sk = build_skeleton(random_weighted(np.random.default_rng(seed), 7, 20))
        small, big = as_dict(skeleton_at(sk, lo)), as_dict(skeleton_at(sk, hi))
        assert set(small) <= set(big)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_pairs_match_sink_line_graph(self, seed):
        g = random_weighted(np.random.default_rng(seed), 8, 22)
        sk = build_skeleton(g, SINK)
        _, si = build_line_graphs(g)
        via_lg = {tuple(sorted((int(g.sources[a]), int(g.sources[b])))) for a, b in si.pairs}
        assert {s.vertices for s in sk.of_dim(1)} == via_lg

    def test_small_and_vectorised_paths_agree(self, rng, monkeypatch):
        graphs = [random_weighted(rng, 12, 60, lv) for lv in (None, 5, None, 3)]
        small = [build_skeleton(g, k) for g in graphs for k in (SINK, SOURCE)]
        monkeypatch.setattr(dowker, "SMALL_CANDIDATES", -1)
        big = [build_skeleton(g, k) for g in graphs for k in (SINK, SOURCE)]
        for a, b in zip(small, big):
            for d in range(3):
                np.testing.assert_array_equal(a.cells[d], b.cells[d])
                np.testing.assert_array_equal(a.values[d], b.values[d])
