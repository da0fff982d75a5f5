import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from dyndowker.metrics import (DIAGONAL, ImageConfig, PersistenceImage, diagonal_cost,
                               optimal_matching, persistence_image, pie, wasserstein2, wd)
from dyndowker.persistence import PersistenceDiagram


def random_diagram(rng, max_points=6):
    n = int(rng.integers(0, max_points + 1))
    b = rng.random(n)
    d = b + rng.random(n) * (1 - b)
    return np.column_stack([b, d])


def brute_force_cost(a, b):
    """Minimum over all partial injections between two tiny point sets."""
    n, m = len(a), len(b)
    best = math.inf
    for k in range(min(n, m) + 1):
        for ia in itertools.combinations(range(n), k):
            for ib in itertools.permutations(range(m), k):
                cost = sum(((a[i] - b[j]) ** 2).sum() for i, j in zip(ia, ib))
                cost += sum(diagonal_cost(a[[i]])[0] for i in range(n) if i not in ia)
                cost += sum(diagonal_cost(b[[j]])[0] for j in range(m) if j not in ib)
                best = min(best, cost)
    return best


class TestWasserstein:
    def test_identical_is_zero(self):
        a = np.array([[0.1, 0.4], [0.2, 0.9]])
        dist, m = wasserstein2(a, a)
        assert dist == 0.0
        assert m.pairs == ((0, 0), (1, 1))

    def test_single_point_to_empty(self):
        dist, m = wasserstein2([[0.2, 0.5]], [])
        assert dist == pytest.approx(0.3 / math.sqrt(2), abs=1e-12)
        assert m.pairs == ((0, DIAGONAL),)

    def test_direct_match_beats_diagonal(self):
        dist, m = wasserstein2([[0.1, 0.4]], [[0.1, 0.5]])
        assert dist == pytest.approx(0.1, abs=1e-12)
        assert m.pairs == ((0, 0),)

    def test_infinite_death_capped(self):
        a = PersistenceDiagram(0, ((0.2, None),))
        assert wd(a, [[0.2, 1.0]]) == 0.0
        assert wd(a, [[0.2, 0.8]], cap=0.8) == 0.0

    def test_zero_persistence_dropped_by_default(self):
        a = [[0.3, 0.3], [0.1, 0.6]]
        b = [[0.1, 0.6]]
        assert wd(a, b) == 0.0
        dist, m = wasserstein2(a, b)
        assert m.pairs == ((1, 0),)
        # retained points on the diagonal still cost nothing
        assert wd(a, b, keep_zero=True) == 0.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_optimal_against_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_diagram(rng, 3), random_diagram(rng, 3)
        cost, _ = optimal_matching(a, b)
        assert cost == pytest.approx(brute_force_cost(a, b), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_no_random_matching_is_cheaper(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_diagram(rng), random_diagram(rng)
        best, _ = optimal_matching(a, b)
        for _ in range(20):
            k = int(rng.integers(0, min(len(a), len(b)) + 1))
            ia = rng.permutation(len(a))[:k]
            ib = rng.permutation(len(b))[:k]
            cost = sum(((a[i] - b[j]) ** 2).sum() for i, j in zip(ia, ib))
            cost += diagonal_cost(np.delete(a, ia, axis=0)).sum()
            cost += diagonal_cost(np.delete(b, ib, axis=0)).sum()
            assert best <= cost + 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_matching_covers_every_point_once(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_diagram(rng), random_diagram(rng)
        _, m = wasserstein2(a, b)
        assert sorted(i for i, _ in m if i != DIAGONAL) == list(range(len(a)))
        assert sorted(j for _, j in m if j != DIAGONAL) == list(range(len(b)))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0, 1))
    def test_diagonal_point_is_invisible(self, seed, x):
        rng = np.random.default_rng(seed)
        a, b = random_diagram(rng), random_diagram(rng)
        a2 = np.vstack([a, [[x, x]]])
        assert wd(a2, b) == wd(a, b)
        assert wd(a2, b, keep_zero=True) == pytest.approx(wd(a, b), abs=1e-12)


class TestImage:
    def test_empty_is_zero(self):
        img = persistence_image([])
        assert img.grid.shape == (20, 20)
        assert not img.grid.any()

    def test_mass_of_single_point(self):
        cfg = ImageConfig(sigma=0.05)
        b, d = 0.4, 0.7
        img = persistence_image([[b, d]], cfg)
        p = d - b
        inside = (norm.cdf(1, b, 0.05) - norm.cdf(0, b, 0.05)) * (norm.cdf(1, p, 0.05) - norm.cdf(0, p, 0.05))
        assert img.grid.sum() == pytest.approx(p * inside, rel=1e-12)

    def test_peak_at_pixel_centre(self):
        cfg = ImageConfig(height=10, width=10, sigma=0.05)
        # pixel centres sit at 0.05 + 0.1 k
        img = persistence_image([[0.35, 0.35 + 0.55]], cfg)
        assert np.unravel_index(np.argmax(img.grid), img.grid.shape) == (5, 3)

    def test_linearity(self):
        one = persistence_image([[0.2, 0.6]])
        two = persistence_image([[0.2, 0.6], [0.2, 0.6]])
        np.testing.assert_allclose(two.grid, 2 * one.grid, rtol=1e-15)

    def test_additive_over_union(self, rng):
        a, b = random_diagram(rng), random_diagram(rng)
        union = persistence_image(np.vstack([a, b])).grid
        np.testing.assert_allclose(union, persistence_image(a).grid + persistence_image(b).grid,
                                   atol=1e-15)

    def test_non_negative(self, rng):
        assert (persistence_image(random_diagram(rng, 20)).grid >= 0).all()

    @pytest.mark.parametrize("kw", [dict(height=0), dict(sigma=0.0), dict(birth_range=(1, 0))])
    def test_invalid_config(self, kw):
        with pytest.raises(ValueError):
            ImageConfig(**kw)

    def test_csv(self):
        text = persistence_image([[0.1, 0.3]], ImageConfig(height=2, width=3)).to_csv()
        rows = text.strip().split("\n")
        assert len(rows) == 2 and all(len(r.split(",")) == 3 for r in rows)


class TestPIE:
    def test_identical(self):
        img = persistence_image([[0.1, 0.5]])
        assert pie(img, img) == 0.0

    def test_single_pixel(self):
        a = PersistenceImage(np.zeros((2, 2)), (0, 1), (0, 1), 0.1)
        g = np.zeros((2, 2))
        g[1, 0] = 3.0
        b = PersistenceImage(g, (0, 1), (0, 1), 0.1)
        assert pie(a, b) == 9.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            pie(persistence_image([], ImageConfig(height=3)), persistence_image([]))

    def test_star_diagram_against_positive_part(self, star):
        from dyndowker.persistence import pd0
        d = pd0(star)
        # zero-persistence points carry zero weight, so dropping them changes nothing
        assert pie(persistence_image(d), persistence_image(d.positive())) == 0.0
