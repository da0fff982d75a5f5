import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyndowker.graph import (GraphFormatError, TemporalDigraph, WeightedDigraph, format_edge_list,
                             load_dataset, load_edge_list, normalize_weights, parse_edge_list,
                             write_dataset, write_edge_list)


class TestParsing:
    def test_self_loop_dropped_and_duplicates_collapsed(self):
        g = parse_edge_list("0 1 5\n0 1 3\n2 2 1\n")
        assert g.node_count == 3
        assert list(g.edges()) == [(0, 1, 3.0)]

    def test_single_line(self):
        g = parse_edge_list("0 1 7\n")
        assert g.node_count == 2
        assert g.edge_count == 1

    def test_two_stated_edges_of_shared_source_fixture(self):
        # only 4->1 and 4->2 are pinned down; ids get re-indexed densely
        g = parse_edge_list("4 1 1.0\n4 2 2.0\n")
        assert g.node_count == 3
        assert g.edge_count == 2
        assert list(g.sources) == [2, 2]

    def test_comments_and_blank_lines(self):
        g = parse_edge_list("# header\n\n0 1 1.5  # trailing\n1 2 2\n")
        assert g.edge_count == 2

    def test_dense_reindex_sorts_numeric_ids(self):
        g = parse_edge_list("10 2 1\n2 7 2\n")
        # ids 2, 7, 10 -> 0, 1, 2
        assert list(g.edges()) == [(2, 0, 1.0), (0, 1, 2.0)]

    def test_nodes_header_keeps_ids(self):
        g = parse_edge_list("# nodes 6\n5 1 1\n")
        assert g.node_count == 6
        assert list(g.edges()) == [(5, 1, 1.0)]

    @pytest.mark.parametrize("text,line", [("0 1\n", 1), ("0 1 2\n0 1 x\n", 2), ("0 1 nan\n", 1)])
    def test_parse_errors_report_line(self, text, line):
        with pytest.raises(GraphFormatError, match=f":{line}:"):
            parse_edge_list(text)

    def test_empty_edge_set_rejected(self):
        with pytest.raises(GraphFormatError):
            parse_edge_list("# nothing\n3 3 1\n")


class TestTemporalDigraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            TemporalDigraph(2, np.array([0]), np.array([0]), np.array([1.0]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            TemporalDigraph(2, np.array([0]), np.array([2]), np.array([1.0]))

    def test_rejects_duplicate_pair(self):
        with pytest.raises(ValueError):
            TemporalDigraph(2, np.array([0, 0]), np.array([1, 1]), np.array([1.0, 2.0]))

    def test_arrays_are_read_only(self):
        g = TemporalDigraph.from_edges([(0, 1, 1.0)])
        with pytest.raises(ValueError):
            g.times[0] = 3.0

    def test_reversed_swaps_endpoints(self):
        g = TemporalDigraph.from_edges([(0, 1, 1.0), (1, 2, 2.0)])
        r = g.reversed()
        assert list(r.edges()) == [(1, 0, 1.0), (2, 1, 2.0)]


class TestNormalize:
    def test_endpoints_and_midpoint(self):
        g = TemporalDigraph.from_edges([(0, 1, 2), (1, 2, 4), (2, 0, 6)])
        np.testing.assert_array_equal(normalize_weights(g).weights, [0.0, 0.5, 1.0])

    def test_constant_times_map_to_zero(self):
        g = TemporalDigraph.from_edges([(0, 1, 9), (1, 2, 9)])
        np.testing.assert_array_equal(normalize_weights(g).weights, [0.0, 0.0])

    def test_uneven_times(self):
        g = TemporalDigraph.from_edges([(0, 1, 0.0), (1, 2, 0.1), (2, 0, 0.3)])
        np.testing.assert_allclose(normalize_weights(g).weights, [0.0, 1 / 3, 1.0], rtol=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=30))
    def test_order_preserving_and_bounded(self, times):
        n = len(times) + 1
        g = TemporalDigraph.from_edges([(i, i + 1, t) for i, t in enumerate(times)], node_count=n)
        w = normalize_weights(g).weights
        assert np.all((w >= 0) & (w <= 1))
        t = np.asarray(times)
        if t.max() > t.min():
            assert w.min() == 0.0 and w.max() == 1.0
            i, j = np.argmin(t), np.argmax(t)
            assert w[i] < w[j]
            for a in range(len(t)):
                for b in range(len(t)):
                    if t[a] < t[b]:
                        assert w[a] <= w[b]


class TestRoundTrip:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 8).flatmap(lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1),
                           st.floats(-1e3, 1e3, allow_nan=False)), min_size=1, max_size=20))))
    def test_export_then_parse_is_identity(self, case):
        n, edges = case
        edges = [e for e in edges if e[0] != e[1]]
        if not edges:
            return
        g = TemporalDigraph.from_edges(edges, node_count=n)
        back = parse_edge_list(format_edge_list(g))
        assert back.node_count == g.node_count
        assert list(back.edges()) == list(g.edges())

    def test_dataset_with_labels(self, tmp_path):
        graphs = [TemporalDigraph.from_edges([(0, 1, 1.0)], label=1),
                  TemporalDigraph.from_edges([(1, 0, 2.0), (1, 2, 3.0)], label=0)]
        write_dataset(graphs, tmp_path)
        back = load_dataset(tmp_path)
        assert [g.label for g in back] == [1, 0]
        assert [list(g.edges()) for g in back] == [list(g.edges()) for g in graphs]

    def test_missing_label_is_an_error(self, tmp_path):
        write_edge_list(TemporalDigraph.from_edges([(0, 1, 1.0)]), tmp_path / "g.tsv")
        (tmp_path / "labels.txt").write_text("other 1\n")
        with pytest.raises(GraphFormatError):
            load_edge_list(tmp_path / "g.tsv", has_labels=True)


class TestWeightedDigraph:
    def test_from_edges_keeps_weights(self):
        g = WeightedDigraph.from_edges([(0, 1, 0.25), (1, 0, 0.75)])
        np.testing.assert_array_equal(g.weights, [0.25, 0.75])
        assert g.edge_count == 2

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            WeightedDigraph(2, np.array([0]), np.array([1]), np.array([np.inf]))
