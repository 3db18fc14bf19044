import math

import pytest

from polarsim.credal import TrustKind
from polarsim.engine import Outcome, trial_from_params
from polarsim.sweep import (
    ConfigError,
    SweepSpec,
    aggregate,
    compare_policies,
    expand_grid,
    run_cell,
    run_sweep,
)

IGNORE = TrustKind.IGNORE_LINEAR


def small_spec(**kw):
    base = dict(k_values=(4, 6), p_b_values=(0.6, 0.7, 0.8), n_values=(10,), m_values=(2.0,),
                policies=(IGNORE,), trials_per_cell=20, base_seed=17)
    base.update(kw)
    return SweepSpec(**base)


class TestExpandGrid:
    def test_lexicographic_order(self):
        cells = [c for c, _ in expand_grid(small_spec())]
        assert [c.index for c in cells] == list(range(6))
        assert [(c.k, c.p_b) for c in cells] == [(4, 0.6), (4, 0.7), (4, 0.8), (6, 0.6), (6, 0.7), (6, 0.8)]

    def test_single_cell(self):
        cells = expand_grid(SweepSpec())
        assert len(cells) == 1 and cells[0][0].index == 0

    @pytest.mark.parametrize(
        "field,value,key",
        [("p_b_values", (0.4,), "p_b"), ("k_values", (1,), "k"), ("n_values", (), "n"),
         ("m_values", (-1.0,), "m"), ("trials_per_cell", 0, "trials")],
    )
    def test_rejects_out_of_domain(self, field, value, key):
        with pytest.raises(ConfigError) as e:
            expand_grid(small_spec(**{field: value}))
        assert e.value.key == key


class TestRunCell:
    def test_full_trust_never_polarizes(self):
        s = run_cell(trial_from_params(6, 0.6, 10, 0.0), 200)
        assert s.freq_polarized == 0 and s.freq_undecided == 0
        assert s.freq_true + s.freq_false == 1.0

    def test_m1_never_polarizes(self):
        s = run_cell(trial_from_params(6, 0.7, 10, 1.0), 200)
        assert s.freq_polarized == 0

    def test_single_trial_frequencies_are_binary(self):
        s = run_cell(trial_from_params(6, 0.7, 10, 2.0), 1)
        for f in (s.freq_true, s.freq_false, s.freq_polarized, s.freq_undecided):
            assert f in (0.0, 1.0)

    def test_seed_count_must_match(self):
        with pytest.raises(ConfigError):
            run_cell(trial_from_params(6, 0.7, 10, 2.0), 3, seeds=[1, 2])

    def test_explicit_seeds(self):
        a = run_cell(trial_from_params(6, 0.7, 10, 2.0), 3, seeds=[1, 2, 3])
        b = run_cell(trial_from_params(6, 0.7, 10, 2.0), 3, seeds=[1, 2, 3])
        assert a == b


def test_aggregate_sums_and_absent_consensus_mean():
    spec = small_spec(k_values=(10,), p_b_values=(0.7,), m_values=(3.0,), trials_per_cell=50)
    res = run_sweep(spec)
    for s in res.stats:
        total = s.freq_true + s.freq_false + s.freq_polarized + s.freq_undecided
        assert abs(total - 1.0) <= 1e-12
        assert s.n_true + s.n_false + s.n_polarized + s.n_undecided == s.trials
    polarized_only = [r for r in res.records if r.outcome == Outcome.POLARIZED][:3]
    st = aggregate(res.cells[0], polarized_only)
    assert st.mean_rounds_to_consensus is None


def test_work_conservation_and_order():
    spec = small_spec()
    res = run_sweep(spec)
    assert res.trials_executed == len(res.cells) * spec.trials_per_cell
    keys = [(r.cell_index, r.trial_index) for r in res.records]
    assert keys == sorted(keys)


def test_parallelism_does_not_change_results():
    spec = small_spec(trials_per_cell=15)
    assert run_sweep(spec, jobs=1).records == run_sweep(spec, jobs=3).records


def test_adding_cells_keeps_existing_trials():
    one = run_sweep(small_spec(k_values=(4,)))
    two = run_sweep(small_spec(k_values=(4, 6)))
    assert two.records[: len(one.records)] == one.records


def test_mean_false_fraction_over_all_trials():
    res = run_sweep(small_spec(k_values=(6,), p_b_values=(0.6,), trials_per_cell=40))
    s = res.stats[0]
    assert s.mean_false_fraction == pytest.approx(sum(r.false_fraction for r in res.records) / 40)
    assert s.se_true == pytest.approx(math.sqrt(s.freq_true * (1 - s.freq_true) / 40))


class TestComparePolicies:
    def test_same_policy_zero_difference(self):
        pairs = compare_policies(small_spec(), IGNORE, IGNORE)
        assert all(p.diff == 0.0 and p.se_diff == 0.0 for p in pairs)

    def test_policies_coincide_at_m0(self):
        pairs = compare_policies(small_spec(m_values=(0.0,)), TrustKind.ANTI_LINEAR, IGNORE)
        assert all(p.diff == 0.0 for p in pairs)

    def test_grid_mismatch(self):
        with pytest.raises(ConfigError):
            compare_policies(small_spec(), IGNORE, TrustKind.ANTI_LINEAR, spec_b=small_spec(n_values=(20,)))
