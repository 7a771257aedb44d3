"""Optimal planning against the brute-force enumeration oracle."""

import pytest

from blockseq import planner
from blockseq.dataset import enumerate_configs
from blockseq.logic import run
from blockseq.model import Color, parse_config, stacks_key

from . import oracle


def cfg(text):
    return parse_config(text)


def as_oracle_state(c):
    return oracle.state_of("".join(b.name for b in stack) for stack in c.stacks)


def as_oracle_plan(moves):
    return tuple(
        (m.subject.name, m.dest if isinstance(m.dest, str) else m.dest.name) for m in moves
    )


class TestBasics:
    def test_identity_pair(self):
        result = planner.plan(cfg("R.G"), cfg("R.G"))
        assert result.found and result.min_length == 0
        assert result.plans == ((),)

    def test_swap_two_stacked_blocks(self):
        result = planner.plan(cfg("R.G"), cfg("G.R"))
        assert result.min_length == 2
        assert len(result.plans) == 1
        [plan] = result.plans
        assert run(cfg("R.G"), plan) == cfg("G.R")

    def test_unreachable(self):
        result = planner.plan(cfg("R"), cfg("R|G"))
        assert result.status == "no-sequence"
        assert result.min_length is None and result.plans == ()

    def test_goal_ignores_out_sets(self):
        # target structure is all that matters; extra source blocks go out
        result = planner.plan(cfg("R|G"), cfg("G"))
        assert result.min_length == 1
        assert planner.reachable(cfg("R|G"), cfg("G"))

    def test_reachable_examples(self):
        assert planner.reachable(cfg("R.G"), cfg("G.R"))
        assert not planner.reachable(cfg("R"), cfg("R|G"))
        assert planner.reachable(cfg("R.G|B"), cfg("-"))

    def test_empty_target_plan_length_equals_block_count(self):
        result = planner.plan(cfg("R.G|B"), cfg("-"))
        assert result.min_length == 3


class TestMinLength:
    def test_matches_plan(self):
        pairs = [("R.G", "G.R"), ("R|G|B", "R.G.B"), ("R.G|B", "-"), ("R", "R")]
        for s, t in pairs:
            assert planner.min_plan_length(cfg(s), cfg(t)) == planner.plan(cfg(s), cfg(t)).min_length

    def test_unreachable_is_none(self):
        assert planner.min_plan_length(cfg("R"), cfg("G")) is None

    def test_horizon_cuts_off(self):
        assert planner.min_plan_length(cfg("R.G"), cfg("G.R"), horizon=1) is None
        assert planner.min_plan_length(cfg("R.G"), cfg("G.R"), horizon=2) == 2


class TestPlanEnumeration:
    def test_plans_are_distinct_and_sound(self):
        result = planner.plan(cfg("R|G|B"), cfg("-"), horizon=None)
        assert result.min_length == 3
        assert len(result.plans) == len(set(result.plans)) == 6  # 3! orders
        for plan in result.plans:
            assert stacks_key(run(cfg("R|G|B"), plan)) == "-"

    def test_max_plans_truncation(self):
        full = planner.plan(cfg("R|G|B"), cfg("-"), horizon=None)
        capped = planner.plan(cfg("R|G|B"), cfg("-"), horizon=None, max_plans=4)
        assert capped.truncated and len(capped.plans) == 4
        assert capped.plans == full.plans[:4]
        assert not full.truncated

    def test_layer_sizes_reproducible(self):
        a = planner.plan(cfg("R.G|B"), cfg("B.G.R"), horizon=None)
        b = planner.plan(cfg("R.G|B"), cfg("B.G.R"), horizon=None)
        assert a.layer_sizes == b.layer_sizes
        assert a.plans == b.plans


class TestAgainstOracle:
    def test_all_two_block_pairs(self):
        configs = list(enumerate_configs(2, "relational"))
        for src in configs:
            src_state = as_oracle_state(src)
            expected = oracle.all_minimal_plans(src_state)
            reachable = oracle.reachable_states(src_state)
            for tgt in configs:
                tgt_state = as_oracle_state(tgt)
                result = planner.plan(src, tgt, horizon=None)
                if tgt_state not in reachable:
                    assert result.status == "no-sequence"
                    continue
                depth, plans = expected[tgt_state]
                assert result.min_length == depth
                assert {as_oracle_plan(p) for p in result.plans} == plans

    def test_spot_check_three_blocks(self):
        src = cfg("R.G|B")
        expected = oracle.all_minimal_plans(as_oracle_state(src))
        for tgt_text in ("B.G.R", "R|G|B", "G", "-", "B.R"):
            tgt = cfg(tgt_text)
            result = planner.plan(src, tgt, horizon=None)
            depth, plans = expected[as_oracle_state(tgt)]
            assert result.min_length == depth
            assert {as_oracle_plan(p) for p in result.plans} == plans


class TestDistanceMap:
    def test_agrees_with_min_plan_length(self):
        src = cfg("R.G|B")
        dm = planner.distance_map(src, horizon=None)
        for tgt_text in ("R.G|B", "B.G.R", "G", "-"):
            tgt = cfg(tgt_text)
            assert dm[stacks_key(tgt)] == planner.min_plan_length(src, tgt, horizon=None)

    def test_contains_only_reachable(self):
        dm = planner.distance_map(cfg("R"), horizon=None)
        assert set(dm) == {"R", "-"}
