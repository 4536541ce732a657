"""Config loading, validation, and grid expansion."""

import json

import numpy as np
import pytest

from cred.config import ExperimentConfig, SuiteConfig, load_config
from cred.envs import environment_to_json, grid_environment, save_environment


@pytest.fixture()
def envs():
    rng = np.random.default_rng(11)
    train = grid_environment(rng.integers(0, 4, size=(4, 4)))
    test = grid_environment(rng.integers(0, 4, size=(4, 4)))
    return train, test


@pytest.fixture()
def w4():
    w = np.array([-0.3, -0.6, -0.2, -0.7])
    return w / np.linalg.norm(w)


def make_config(train, test, w, **overrides):
    base = dict(condition="RR", train_env=train, test_envs=(test,), w_true=w)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestExperimentConfig:
    def test_defaults(self, envs, w4):
        cfg = make_config(*envs, w4)
        assert cfg.t_pref == 30
        assert cfg.oracle_mode == "boltzmann"
        assert cfg.mcmc_samples == 200
        assert cfg.design_iters == 15
        assert cfg.metrics_period == 1

    def test_unknown_condition_rejected(self, envs, w4):
        with pytest.raises(ValueError, match="condition"):
            make_config(*envs, w4, condition="GREEDY")

    def test_unknown_oracle_mode_rejected(self, envs, w4):
        with pytest.raises(ValueError, match="oracle"):
            make_config(*envs, w4, oracle_mode="noisy")

    def test_t_pref_must_be_positive(self, envs, w4):
        with pytest.raises(ValueError, match="t_pref"):
            make_config(*envs, w4, t_pref=0)

    def test_requires_test_environment(self, envs, w4):
        train, _ = envs
        with pytest.raises(ValueError, match="test environment"):
            ExperimentConfig(
                condition="RR", train_env=train, test_envs=(), w_true=w4
            )

    def test_w_true_length_checked(self, envs):
        with pytest.raises(ValueError, match="w_true"):
            make_config(*envs, np.array([1.0, 0.0]))

    def test_json_round_trip(self, envs, w4):
        cfg = make_config(*envs, w4, seed=9, t_pref=5, design_kappa=1.5)
        clone = ExperimentConfig.from_json(cfg.to_json())
        assert clone.condition == cfg.condition
        assert clone.seed == 9 and clone.t_pref == 5
        assert clone.design_kappa == 1.5
        assert clone.train_env == cfg.train_env
        assert clone.test_envs == cfg.test_envs
        np.testing.assert_allclose(clone.w_true, cfg.w_true)

    def test_unknown_keys_rejected(self, envs, w4):
        data = make_config(*envs, w4).to_json()
        data["temperature"] = 3
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_json(data)

    def test_with_overrides_revalidates(self, envs, w4):
        cfg = make_config(*envs, w4)
        assert cfg.with_overrides(seed=4).seed == 4
        with pytest.raises(ValueError):
            cfg.with_overrides(condition="bogus")


class TestLoading:
    def test_env_by_path_resolved_relative_to_config(self, tmp_path, envs, w4):
        train, test = envs
        save_environment(train, tmp_path / "train.json")
        save_environment(test, tmp_path / "test.json")
        data = make_config(train, test, w4).to_json()
        data["train_env"] = "train.json"
        data["test_envs"] = ["test.json"]
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(data))

        cfg = load_config(cfg_path)
        assert isinstance(cfg, ExperimentConfig)
        assert cfg.train_env == train
        assert cfg.test_envs == (test,)

    def test_inline_environment_accepted(self, envs, w4):
        train, test = envs
        data = make_config(train, test, w4).to_json()
        assert data["train_env"] == environment_to_json(train)
        cfg = ExperimentConfig.from_json(data)
        assert cfg.train_env == train

    def test_suite_recognized_by_base_key(self, tmp_path, envs, w4):
        suite = SuiteConfig(
            base=make_config(*envs, w4),
            conditions=("RR", "CR"),
            users=(("u0", w4),),
            seeds=(0, 1),
        )
        path = tmp_path / "suite.json"
        path.write_text(json.dumps(suite.to_json()))
        loaded = load_config(path)
        assert isinstance(loaded, SuiteConfig)
        assert loaded.conditions == ("RR", "CR")
        assert loaded.seeds == (0, 1)


class TestSuiteConfig:
    def test_cells_condition_major_order(self, envs, w4):
        w2 = np.roll(w4, 1)
        suite = SuiteConfig(
            base=make_config(*envs, w4),
            conditions=("RR", "MBP"),
            users=(("alice", w4), ("bob", w2)),
            seeds=(3, 5),
        )
        cells = suite.cells()
        assert len(cells) == 2 * 2 * 2
        keys = [(c.condition, c.user_name, c.seed) for c in cells]
        assert keys[:4] == [
            ("RR", "alice", 3),
            ("RR", "alice", 5),
            ("RR", "bob", 3),
            ("RR", "bob", 5),
        ]
        assert all(c.condition == "MBP" for c in cells[4:])

    def test_empty_axes_rejected(self, envs, w4):
        with pytest.raises(ValueError, match="non-empty"):
            SuiteConfig(
                base=make_config(*envs, w4), conditions=(), users=(("u", w4),), seeds=(0,)
            )

    def test_unknown_condition_rejected(self, envs, w4):
        with pytest.raises(ValueError, match="condition"):
            SuiteConfig(
                base=make_config(*envs, w4),
                conditions=("XX",),
                users=(("u", w4),),
                seeds=(0,),
            )
