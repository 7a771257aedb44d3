"""Enumeration, sampling, splits, corruption, and record files."""

import random
from collections import Counter
from math import comb, factorial

import pytest

from blockseq.dataset import (
    PairRecord,
    QuotaError,
    RecordError,
    enumerate_configs,
    make_pairs,
    perturb_config,
    read_records,
    split_by_length,
    write_records,
)
from blockseq.logic import run
from blockseq.model import EMPTY, canonical, parse_config, stacks_key

from . import oracle


class TestEnumerate:
    def test_grid_counts_match_closed_form(self):
        counts = Counter(
            sum(len(s) for s in c.stacks) for c in enumerate_configs(4, "grid")
        )
        assert counts[0] == 1
        for k in range(1, 5):
            assert counts[k] == comb(6, k) * factorial(k) * 2 ** (k - 1)

    def test_one_block_grid_count_is_six(self):
        assert sum(1 for c in enumerate_configs(1, "grid")) - 1 == 6

    def test_relational_matches_independent_enumeration(self):
        ours = {canonical(c) for c in enumerate_configs(3, "relational")}
        assert len(ours) == len(oracle.enumerate_states(3))

    def test_no_duplicates_and_empty_out(self):
        for mode in ("relational", "grid"):
            keys = [canonical(c, mode) for c in enumerate_configs(3, mode)]
            assert len(keys) == len(set(keys))
        assert all(not c.out for c in enumerate_configs(2, "grid"))

    def test_deterministic_order(self):
        a = [canonical(c, "grid") for c in enumerate_configs(3, "grid")]
        b = [canonical(c, "grid") for c in enumerate_configs(3, "grid")]
        assert a == b


class TestMakePairs:
    def test_quota_histogram_exact(self):
        configs = list(enumerate_configs(3, "relational"))
        quotas = {None: 10, 0: 10, 1: 15, 2: 15, 3: 15, 4: 10}
        records = make_pairs(configs, quotas, seed=1)
        hist = Counter(r.label for r in records)
        assert dict(hist) == quotas

    def test_labels_mean_what_they_say(self):
        configs = list(enumerate_configs(3, "relational"))
        records = make_pairs(configs, {None: 5, 0: 5, 2: 5}, seed=2)
        for r in records:
            if r.label is None:
                assert not r.plans
                assert not r.tgt.stack_colors <= r.src.stack_colors
            elif r.label == 0:
                assert r.plans == ((),)
                assert stacks_key(r.src) == stacks_key(r.tgt)
            else:
                assert all(len(p) == r.label for p in r.plans)

    def test_every_plan_replays(self):
        configs = list(enumerate_configs(3, "relational"))
        records = make_pairs(configs, {1: 10, 2: 10, 3: 10}, seed=3)
        for r in records:
            for plan in r.plans:
                assert stacks_key(run(r.src, plan)) == stacks_key(r.tgt)

    def test_deterministic_given_seed(self):
        configs = list(enumerate_configs(3, "relational"))
        quotas = {0: 5, 1: 5, 2: 5}
        assert make_pairs(configs, quotas, seed=9) == make_pairs(configs, quotas, seed=9)
        assert make_pairs(configs, quotas, seed=9) != make_pairs(configs, quotas, seed=10)

    def test_infeasible_quota_reports_achieved(self):
        configs = list(enumerate_configs(2, "relational"))
        with pytest.raises(QuotaError) as err:
            make_pairs(configs, {8: 3, 1: 2}, seed=0, attempts_per_label=500)
        assert err.value.label == 8
        assert err.value.achieved.get(1, 0) >= 0

    def test_plan_cap_sets_flag(self):
        configs = [parse_config("R|G|B|Y")]
        records = make_pairs(configs, {4: 1}, seed=4, max_plans=3)
        [r] = records
        assert r.truncated and len(r.plans) == 3


class TestSplit:
    def make(self, labels):
        src = parse_config("R")
        return [PairRecord(src, src, ((),) if l == 0 else (), l) for l in labels]

    def test_boundaries(self):
        records = self.make([None, 0, 1, 2, 3, 7, 8])
        spec = split_by_length(records, 1)
        assert {r.label for r in spec.train} == {None, 0, 1}
        assert {r.label for r in spec.test} == {2, 3, 7, 8}
        spec = split_by_length(records, 7)
        assert {r.label for r in spec.test} == {8}

    def test_partition(self):
        records = self.make([None, 0, 1, 4, 5, 8])
        spec = split_by_length(records, 4)
        assert len(spec.train) + len(spec.test) == len(records)
        assert all(r.label is None or r.label <= 4 for r in spec.train)

    def test_bad_ell(self):
        with pytest.raises(ValueError):
            split_by_length([], 0)
        with pytest.raises(ValueError):
            split_by_length([], 8)


class TestPerturb:
    def test_zero_probability_is_identity(self):
        rng = random.Random(0)
        c = parse_config("R.G|B")
        assert all(perturb_config(c, 0.0, rng) == c for _ in range(20))

    def test_certain_corruption_changes_single_block(self):
        c = parse_config("R")
        for seed in range(20):
            out = perturb_config(c, 1.0, random.Random(seed))
            assert out != c

    def test_empty_scene_unchanged(self):
        assert perturb_config(EMPTY, 1.0, random.Random(0)) == EMPTY

    def test_output_always_valid(self):
        rng = random.Random(5)
        for text in ("R.G.B|Y.O", "R|G|B|Y|O", "P.B", "R;out=G"):
            c = parse_config(text)
            for _ in range(50):
                out = perturb_config(c, 1.0, rng)  # validity enforced by constructor
                assert len(out.stack_colors | out.out) == len(list(out.blocks())) + len(out.out)


class TestRecordFiles:
    def test_round_trip(self, tmp_path, mixed_records):
        path = tmp_path / "records.tsv"
        write_records(path, mixed_records)
        assert read_records(path) == mixed_records

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        assert read_records(path) == []

    def test_comments_and_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "records.tsv"
        path.write_text("# comment\n\nR\tR\t0\t\n")
        [r] = read_records(path)
        assert r.label == 0

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("R\tR\t0\t\nR\tG\n")
        with pytest.raises(RecordError) as err:
            read_records(path)
        assert err.value.line == 2

    def test_bad_plan_reports_number(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("R|G\tR.G\t1\tmove(G,R,0\n")
        with pytest.raises(RecordError) as err:
            read_records(path)
        assert err.value.line == 1
