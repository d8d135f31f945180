"""Successive-halving pruning decisions."""

import math

import pytest

from autoansatz.automl.pruner import RUNG_EPOCHS, hyperband_should_prune, rung_schedule
from autoansatz.models import TrialStatus
from tests.conftest import make_trial


class TestRungSchedule:
    def test_default_rungs(self):
        assert RUNG_EPOCHS == (1, 3, 9, 27, 81)
        assert rung_schedule(100) == (1, 3, 9, 27, 81)

    def test_rungs_strictly_below_max(self):
        assert rung_schedule(27) == (1, 3, 9)
        assert rung_schedule(1) == ()
        assert rung_schedule(20, eta=2, min_resource=5) == (5, 10)

    def test_invalid_schedule(self):
        with pytest.raises(ValueError):
            rung_schedule(10, eta=1)


class TestShouldPrune:
    def test_first_trial_survives(self):
        assert not hyperband_should_prune(make_trial(0, [1.0]), [])

    def test_keeps_top_third(self):
        peers = [make_trial(i, [loss]) for i, loss in enumerate([0.1, 0.2, 0.3, 0.4, 0.5])]
        # k = 6, keep ceil(6 / 3) = 2
        assert not hyperband_should_prune(make_trial(9, [0.15]), peers)
        assert hyperband_should_prune(make_trial(9, [0.25]), peers)

    def test_ties_go_to_lower_id(self):
        peers = [make_trial(0, [0.5]), make_trial(1, [0.1]), make_trial(2, [0.9])]
        # k = 4, keep 2: ids 1 and 0 beat id 5 on the 0.5 tie
        assert hyperband_should_prune(make_trial(5, [0.5]), peers)
        assert not hyperband_should_prune(make_trial(0, [0.5]), [make_trial(3, [0.5]), make_trial(4, [0.9])])

    def test_only_rungs_prune(self):
        peers = [make_trial(i, [0.1, 0.1]) for i in range(5)]
        assert not hyperband_should_prune(make_trial(9, [5.0, 5.0]), peers)

    def test_peers_short_of_rung_are_ignored(self):
        peers = [make_trial(i, [0.1, 0.1]) for i in range(5)]
        assert not hyperband_should_prune(make_trial(9, [5.0, 5.0, 5.0]), peers)

    def test_non_finite_always_pruned(self):
        assert hyperband_should_prune(make_trial(0, [0.5, math.nan]), [])
        assert hyperband_should_prune(make_trial(1, [0.5, math.inf]), [])
        assert hyperband_should_prune(make_trial(2, [0.5], status=TrialStatus.DIVERGED), [])

    def test_empty_trial_rejected(self):
        with pytest.raises(ValueError):
            hyperband_should_prune(make_trial(0, []), [])
