from __future__ import annotations

import numpy as np
import pytest

from fppslab.errors import BudgetExceeded, DomainError
from fppslab.lattice import EdgeId, hyperplane_index
from fppslab.slab import (
    greedy_concatenation,
    point_to_hyperplane_stabilized,
    point_to_hyperplane_time,
    point_to_point_time,
    slab_crossing_time,
)
from fppslab.weights import CoupledWeights, CouplingMap, WeightModel

from oracles import slab_value_bruteforce


class MapWeights:
    """Duck-typed weight model with explicit per-edge overrides."""

    def __init__(self, default: float, overrides: dict | None = None):
        self.default = default
        self.overrides = overrides or {}
        self.seed = None

    def edge_weight(self, e: EdgeId) -> float:
        return self.overrides.get(e, self.default)


def test_single_cheap_exit_dominates():
    m = MapWeights(10.0, {EdgeId((0, 0, 0), 0): 0.5})
    s = slab_crossing_time(m, (0, 0, 0), 0)
    assert s.value == 0.5
    assert s.exit_vertex == (1, 0, 0)
    assert s.settled_count == 1


def test_value_never_exceeds_direct_exit_edge():
    for seed in range(50):
        m = WeightModel(family="exp", a=1.0, seed=seed)
        s = slab_crossing_time(m, (0, 0, 0), 0)
        assert s.value <= m.edge_weight(EdgeId((0, 0, 0), 0)) + 1e-15


def test_matches_bruteforce_relaxation_oracle():
    for seed in range(20):
        m = WeightModel(family="exp", a=1.0, seed=3000 + seed)
        lazy = slab_crossing_time(m, (0, 0, 0), 0)
        brute = slab_value_bruteforce(m, 3, 6)
        assert lazy.value == pytest.approx(brute, abs=1e-12)


def test_early_stop_loses_nothing():
    for seed in range(30):
        m = WeightModel(family="exp", a=1.0, seed=seed)
        first = slab_crossing_time(m, (0, 0, 0), 0)
        longer = slab_crossing_time(m, (0, 0, 0), 0,
                                    extra_settles=first.settled_count)
        assert longer.value == first.value


def test_exit_vertex_in_next_hyperplane_and_shifted_start():
    m = WeightModel(family="exp", a=1.0, seed=11)
    s = slab_crossing_time(m, (3, 1, -2), 3)
    assert hyperplane_index(s.exit_vertex) == 4
    with pytest.raises(DomainError):
        slab_crossing_time(m, (3, 1, -2), 0)


def test_budget_cap_raises():
    # cheap in-plane edges, expensive exits: the frontier must grow past the cap
    class SlowExit:
        seed = None

        def edge_weight(self, e: EdgeId) -> float:
            return 50.0 if e.axis == 0 else 1.0

    with pytest.raises(BudgetExceeded):
        slab_crossing_time(SlowExit(), (0, 0, 0), 0, settled_cap=100)


def test_point_to_hyperplane_direct_edge():
    m = MapWeights(10.0, {EdgeId((0, 0, 0), 0): 0.5})
    assert point_to_hyperplane_time(m, 3, 1, 4) == 0.5


def test_point_to_hyperplane_monotone_in_radius():
    m = WeightModel(family="exp", a=1.0, seed=451)
    values = [point_to_hyperplane_time(m, 3, 3, r) for r in (1, 2, 4, 8)]
    for a, b in zip(values, values[1:]):
        assert b <= a
    assert point_to_hyperplane_stabilized(m, 3, 3, r0=2) == pytest.approx(
        point_to_hyperplane_time(m, 3, 3, 16), abs=1e-15
    )


def test_point_to_point_basics():
    m = MapWeights(10.0, {EdgeId((0, 0), 1): 0.25})
    assert point_to_point_time(m, (0, 0), (0, 1), 3) == 0.25
    with pytest.raises(DomainError):
        point_to_point_time(m, (0, 0), (0, 0), 3)


def test_point_to_point_symmetry_and_triangle():
    x, y, z = (0, 0, 0), (1, 1, 0), (2, 0, 1)
    for seed in range(10):
        m = WeightModel(family="exp", a=1.0, seed=700 + seed)
        txy = point_to_point_time(m, x, y, 8)
        tyx = point_to_point_time(m, y, x, 8)
        assert txy == pytest.approx(tyx, rel=1e-12)
        txz = point_to_point_time(m, x, z, 8)
        tyz = point_to_point_time(m, y, z, 8)
        assert txz <= txy + tyz + 1e-12


def test_greedy_concatenation_structure():
    m = WeightModel(family="exp", a=1.0, seed=37)
    chain = greedy_concatenation(m, 4, 5)
    assert len(chain) == 5
    assert chain[0].value == slab_crossing_time(m, (0, 0, 0, 0), 0).value
    exits = [hyperplane_index(s.exit_vertex) for s in chain]
    assert exits == [1, 2, 3, 4, 5]


def test_greedy_sum_dominates_direct_passage():
    for seed in range(20):
        m = WeightModel(family="exp", a=1.0, seed=8000 + seed)
        total = sum(s.value for s in greedy_concatenation(m, 4, 5))
        direct = point_to_hyperplane_stabilized(m, 4, 5, r0=4)
        assert direct <= total + 1e-9


def test_coupled_transform_never_slower_pathwise():
    # uniform-target transform shrinks every edge, so the crossing shrinks too
    cm = CouplingMap(target=WeightModel(family="uniform", a=1.0), rate=1.0)
    for seed in range(30):
        src = WeightModel(family="exp", a=1.0, seed=seed)
        plain = slab_crossing_time(src, (0, 0, 0, 0), 0).value
        coupled = slab_crossing_time(CoupledWeights(src, cm), (0, 0, 0, 0), 0).value
        assert coupled <= plain + 1e-12


def test_single_edge_increase_never_speeds_up():
    base = WeightModel(family="exp", a=1.0, seed=99)
    before = slab_crossing_time(base, (0, 0, 0), 0)
    bumped_edges = [
        EdgeId((0, 0, 0), 0),
        EdgeId((0, 0, 0), 1),
        EdgeId((0, -1, 0), 1),
        EdgeId((0, 1, 0), 2),
    ]
    for e in bumped_edges:
        class Bumped:
            seed = None

            def edge_weight(self, edge, _e=e):
                w = base.edge_weight(edge)
                return w + 5.0 if edge == _e else w

        after = slab_crossing_time(Bumped(), (0, 0, 0), 0)
        assert after.value >= before.value - 1e-15


def test_sampler_distributions_agree_smoke():
    # full-scale two-sample comparison runs in the acceptance suite
    from fppslab.eden import sample_slab_crossing
    from fppslab.experiments import ks_statistic
    from fppslab.weights import derive_seed

    n = 2000
    eden_vals = np.array(
        [sample_slab_crossing(5, 1.0, derive_seed(21, i)).value for i in range(n)]
    )
    slab_vals = np.array(
        [
            slab_crossing_time(
                WeightModel(family="exp", a=1.0, seed=derive_seed(22, i)), (0,) * 5, 0
            ).value
            for i in range(n)
        ]
    )
    assert ks_statistic(eden_vals, slab_vals) < 0.06
