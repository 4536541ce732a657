"""Experiment loop: logging shape, determinism, CSV schema, suite aggregation."""

import csv
import io

import numpy as np
import pytest

import cred.harness as harness
from cred.config import ExperimentConfig, SuiteConfig
from cred.envs import grid_environment
from cred.harness import (
    CSV_COLUMNS,
    logs_to_rows,
    run_experiment,
    run_suite,
    summarize_rows,
    write_csv,
)


@pytest.fixture(scope="module")
def envs():
    rng = np.random.default_rng(11)
    train = grid_environment(rng.integers(0, 4, size=(4, 4)))
    test = grid_environment(rng.integers(0, 4, size=(4, 4)))
    return train, test


@pytest.fixture(scope="module")
def w4():
    w = np.array([-0.3, -0.6, -0.2, -0.7])
    return w / np.linalg.norm(w)


def tiny_config(envs, w, **overrides):
    """Small enough to keep each run well under a second."""
    train, test = envs
    base = dict(
        condition="RR",
        train_env=train,
        test_envs=(test,),
        w_true=w,
        seed=0,
        t_pref=2,
        mcmc_samples=60,
        mcmc_burn_in=200,
        mcmc_thin=2,
        n_bootstrap=15,
        m_diverse=4,
        k_rollouts=15,
        design_iters=3,
        design_init=2,
        design_candidates=80,
        n_eval=5,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_log_shape_and_prior_row(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4))
        logs = result.logs
        assert len(logs) == 3  # iteration 0 plus t_pref=2
        assert logs[0].iteration == 0
        assert logs[0].query is None and logs[0].label is None
        assert set(logs[0].metrics) == {"train", "test0"}
        assert logs[0].entropy is not None
        for i, log in enumerate(logs[1:], start=1):
            assert log.iteration == i
            assert log.query is not None
            assert log.label in (-1, 1)

    @pytest.mark.parametrize(
        "condition,expected",
        [("RR", "RR"), ("MBP", "MBP"), ("CR", "CR"), ("CRED", "CRED"), ("MBP+ED", "MBP")],
    )
    def test_condition_sets_generator(self, envs, w4, condition, expected):
        result = run_experiment(tiny_config(envs, w4, condition=condition))
        for log in result.logs[1:]:
            if not log.fallback:
                assert log.query.generator == expected

    def test_records_store_scaled_features(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4, condition="CR"))
        scale = envs[0].feature_scale
        assert len(result.records) == 2
        for record, log in zip(result.records, result.logs[1:]):
            np.testing.assert_allclose(record.phi_a, log.query.traj_a.features * scale)
            np.testing.assert_allclose(record.phi_b, log.query.traj_b.features * scale)
            assert record.label == log.label
            assert record.iteration == log.iteration

    def test_exact_oracle_labels_match_sign_rule(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4, oracle_mode="exact", t_pref=3))
        for log in result.logs[1:]:
            psi = (log.query.traj_a.features - log.query.traj_b.features)
            margin = float(w4 @ (psi * envs[0].feature_scale))
            assert log.label == (1 if margin >= 0 else -1)

    def test_deterministic_per_seed(self, envs, w4):
        cfg = tiny_config(envs, w4, condition="CR", seed=5)
        a = write_csv(logs_to_rows(run_experiment(cfg)))
        b = write_csv(logs_to_rows(run_experiment(cfg)))
        assert a == b
        c = write_csv(logs_to_rows(run_experiment(cfg.with_overrides(seed=6))))
        assert a != c

    def test_metrics_period_zero_keeps_endpoints(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4, t_pref=3, metrics_period=0))
        evaluated = [log.iteration for log in result.logs if log.metrics]
        assert evaluated == [0, 3]
        skipped = [log for log in result.logs if not log.metrics]
        assert all(log.entropy is None for log in skipped)
        assert all(log.query is not None for log in skipped)

    def test_wall_time_recorded(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4))
        assert all(log.wall_time > 0 for log in result.logs)


class TestCsv:
    def test_header_and_row_count(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4))
        text = write_csv(logs_to_rows(result))
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        # 3 evaluated iterations x 2 environments
        assert len(lines) == 1 + 3 * 2

    def test_floats_round_trip(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4))
        rows = logs_to_rows(result)
        text = write_csv(rows)
        parsed = list(csv.DictReader(io.StringIO(text)))
        for raw, row in zip(parsed, rows):
            for col in ("entropy", "reward_diff", "policy_acc", "jaccard", "info_gain"):
                if row[col] is None:
                    assert raw[col] == ""
                else:
                    assert float(raw[col]) == row[col]

    def test_skipped_iteration_still_logs_gain(self, envs, w4):
        result = run_experiment(tiny_config(envs, w4, t_pref=3, metrics_period=0))
        rows = logs_to_rows(result)
        middle = [r for r in rows if r["iteration"] in (1, 2)]
        assert len(middle) == 2  # one row each, train only
        for row in middle:
            assert row["environment"] == "train"
            assert row["info_gain"] is not None
            assert row["reward_diff"] is None

    def test_write_to_disk(self, tmp_path, envs, w4):
        result = run_experiment(tiny_config(envs, w4))
        rows = logs_to_rows(result)
        path = tmp_path / "metrics.csv"
        text = write_csv(rows, path)
        assert path.read_text() == text


class TestSuite:
    def test_summary_matches_column_means(self, envs, w4):
        suite = SuiteConfig(
            base=tiny_config(envs, w4),
            conditions=("RR",),
            users=(("u0", w4),),
            seeds=(0, 1),
        )
        out = run_suite(suite)
        final_train = [
            r
            for r in out["rows"]
            if r["iteration"] == 2 and r["environment"] == "train"
        ]
        expected = float(np.mean([r["policy_acc"] for r in final_train]))
        got = out["summary"]["RR"]["environments"]["train"]["policy_acc"]["mean"]
        assert got == pytest.approx(expected, abs=1e-12)
        gains = [
            r["info_gain"]
            for r in out["rows"]
            if r["environment"] == "train" and 1 <= r["iteration"] <= 10
        ]
        assert out["summary"]["RR"]["info_gain_first_10"]["mean"] == pytest.approx(
            float(np.mean(gains)), abs=1e-12
        )

    def test_rows_sorted_and_rerun_identical(self, tmp_path, envs, w4):
        suite = SuiteConfig(
            base=tiny_config(envs, w4),
            conditions=("CR", "RR"),
            users=(("u0", w4),),
            seeds=(1, 0),
        )
        out_dir = tmp_path / "suite"
        run_suite(suite, out_dir=out_dir)
        first = (out_dir / "metrics.csv").read_bytes()
        run_suite(suite, out_dir=out_dir)
        assert (out_dir / "metrics.csv").read_bytes() == first
        rows = list(csv.DictReader(io.StringIO(first.decode())))
        keys = [
            (r["condition"], r["user"], int(r["seed"]), int(r["iteration"]))
            for r in rows
        ]
        assert keys == sorted(keys)

    def test_failed_cell_recorded_not_fatal(self, envs, w4, monkeypatch):
        real = harness.run_experiment

        def flaky(config):
            if config.condition == "MBP":
                raise RuntimeError("boom")
            return real(config)

        monkeypatch.setattr(harness, "run_experiment", flaky)
        suite = SuiteConfig(
            base=tiny_config(envs, w4),
            conditions=("RR", "MBP"),
            users=(("u0", w4),),
            seeds=(0,),
        )
        out = run_suite(suite)
        assert len(out["failures"]) == 1
        assert out["failures"][0]["condition"] == "MBP"
        assert "boom" in out["failures"][0]["error"]
        assert {r["condition"] for r in out["rows"]} == {"RR"}

    def test_parallel_matches_serial(self, envs, w4):
        base = tiny_config(envs, w4, t_pref=1)
        kwargs = dict(conditions=("RR",), users=(("u0", w4),), seeds=(0, 1))
        serial = run_suite(SuiteConfig(base=base, workers=1, **kwargs))
        parallel = run_suite(SuiteConfig(base=base, workers=2, **kwargs))
        assert write_csv(serial["rows"]) == write_csv(parallel["rows"])


class TestSummarize:
    def test_empty_rows(self):
        assert summarize_rows([], t_pref=5) == {}
