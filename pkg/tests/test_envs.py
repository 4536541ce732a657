import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cred.envs import (
    EnvironmentSpec,
    EnvParamVector,
    StreetGraph,
    TerrainGrid,
    decode_env,
    default_bounds,
    environment_from_json,
    environment_to_json,
    grid_environment,
    graph_environment,
    load_environment,
    sample_training_graph,
    save_environment,
    step_features,
    trajectory_features,
)
from cred.errors import (
    BoundsViolationError,
    EnvironmentValidationError,
    InvalidActionError,
    InvalidTrajectoryError,
    ShapeError,
)


def small_grid(size=4):
    rng = np.random.default_rng(0)
    return grid_environment(rng.integers(0, 4, size=(size, size)))


def tiny_graph():
    edges = [
        (0, 1, 2.0, 3.0, 0.5),
        (1, 2, 1.0, 2.0, -0.25),
        (0, 2, 4.0, 4.0, 0.0),
    ]
    return graph_environment([0, 1, 2], edges, start=0, goal=2)


class TestTerrainGrid:
    def test_rejects_bad_terrain_ids(self):
        with pytest.raises(EnvironmentValidationError, match="terrain ids"):
            TerrainGrid(np.full((3, 3), 7), (0, 0), (2, 2))

    def test_rejects_non_square(self):
        with pytest.raises(EnvironmentValidationError, match="square"):
            TerrainGrid(np.zeros((2, 3), dtype=int), (0, 0), (1, 2))

    def test_rejects_out_of_bounds_goal(self):
        with pytest.raises(EnvironmentValidationError, match="goal"):
            TerrainGrid(np.zeros((3, 3), dtype=int), (0, 0), (3, 3))

    def test_rejects_coincident_start_goal(self):
        with pytest.raises(EnvironmentValidationError, match="distinct"):
            TerrainGrid(np.zeros((3, 3), dtype=int), (1, 1), (1, 1))


class TestStreetGraph:
    def test_rejects_missing_node(self):
        with pytest.raises(EnvironmentValidationError, match="missing node"):
            StreetGraph([0, 1], [(0, 2, 1.0, 1.0, 0.0)], 0, 1)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(EnvironmentValidationError, match="distance"):
            StreetGraph([0, 1], [(0, 1, 0.0, 1.0, 0.0)], 0, 1)

    def test_rejects_unreachable_goal(self):
        with pytest.raises(EnvironmentValidationError, match="reachable"):
            graph_environment([0, 1, 2], [(0, 1, 1.0, 1.0, 0.0)], start=0, goal=2)


class TestDynamics:
    def test_grid_action_order_and_legality(self):
        env = small_grid(3)
        dyn = env.dynamics()
        s = dyn.state_index[(1, 1)]
        # up, right, down, left from the center of a 3x3 grid
        assert [dyn.states[j] for j in dyn.next_state[s]] == [(0, 1), (1, 2), (2, 1), (1, 0)]
        corner = dyn.state_index[(0, 0)]
        assert list(dyn.next_state[corner] >= 0) == [False, True, True, False]

    def test_grid_step_feature_is_entered_terrain(self):
        env = small_grid(3)
        phi = step_features(env, (0, 0), 1)  # move right into (0, 1)
        expected = np.zeros(4)
        expected[env.domain.terrain[0, 1]] = 1.0
        np.testing.assert_array_equal(phi, expected)

    def test_graph_reverse_traversal_negates_elevation(self):
        env = tiny_graph()
        forward = step_features(env, 0, 0)  # edge (0, 1)
        np.testing.assert_allclose(forward, [2.0, 3.0, 0.5])
        dyn = env.dynamics()
        s1 = dyn.state_index[1]
        back = [a for a in dyn.legal_actions(s1) if dyn.next_state[s1, a] == dyn.state_index[0]]
        np.testing.assert_allclose(dyn.step_phi[s1, back[0]], [2.0, 3.0, -0.5])

    def test_illegal_action_raises(self):
        env = small_grid(3)
        with pytest.raises(InvalidActionError):
            step_features(env, (0, 0), 0)  # up from top row


class TestTrajectoryFeatures:
    def test_disconnected_sequence_rejected(self):
        env = small_grid(4)
        steps = [((0, 0), 1), ((2, 2), 1)]
        with pytest.raises(InvalidTrajectoryError, match="does not follow"):
            trajectory_features(env, steps)

    def test_empty_is_zero(self):
        env = small_grid(4)
        np.testing.assert_array_equal(trajectory_features(env, []), np.zeros(4))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 12))
    def test_additivity_under_concatenation(self, seed, split):
        """Features of a walk equal the sum over any split of it."""
        env = small_grid(5)
        dyn = env.dynamics()
        rng = np.random.default_rng(seed)
        s = dyn.start
        steps = []
        for _ in range(15):
            legal = dyn.legal_actions(s)
            a = int(rng.choice(legal))
            steps.append((dyn.states[s], a))
            s = int(dyn.next_state[s, a])
        split = min(split, len(steps))
        whole = trajectory_features(env, steps)
        parts = trajectory_features(env, steps[:split]) + trajectory_features(env, steps[split:])
        np.testing.assert_allclose(whole, parts)

    def test_counts_match_manual_walk(self):
        terrain = np.array([[0, 1], [2, 3]])
        env = grid_environment(terrain, start=(0, 0), goal=(1, 1))
        steps = [((0, 0), 1), ((0, 1), 2)]  # right into terrain 1, down into terrain 3
        np.testing.assert_array_equal(trajectory_features(env, steps), [0, 1, 0, 1])


class TestEnvParamVector:
    def test_bounds_enforced(self):
        with pytest.raises(BoundsViolationError, match="index 2"):
            EnvParamVector([0.5, 0.5, 1.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5], "gridworld-patch")

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            EnvParamVector(np.zeros(9), "gridworld-patch", bounds=np.tile([0, 1], (4, 1)))

    def test_graph_bounds_follow_training_ranges(self):
        b = default_bounds("graph-edges", 36)
        np.testing.assert_array_equal(b[0], [1.0, 5.0])
        np.testing.assert_array_equal(b[1], [2.0, 5.0])
        np.testing.assert_array_equal(b[2], [-1.0, 1.0])
        assert b.shape == (36, 2)


class TestDecodeEnv:
    def test_patch_quantization_example(self):
        """Nine increasing values map to terrain ids 0,1,2,3,0,1,2,3,2."""
        template = grid_environment(np.zeros((15, 15), dtype=int))
        theta = EnvParamVector(
            [0.1, 0.3, 0.6, 0.9, 0.1, 0.3, 0.6, 0.9, 0.5], "gridworld-patch"
        )
        env = decode_env(theta, template)
        expected_ids = [0, 1, 2, 3, 0, 1, 2, 3, 2]
        t = env.domain.terrain
        k = 0
        for rows in np.array_split(np.arange(15), 3):
            for cols in np.array_split(np.arange(15), 3):
                block = t[np.ix_(rows, cols)]
                assert block.shape == (5, 5)
                assert np.all(block == expected_ids[k]), f"patch {k}"
                k += 1

    def test_boundary_value_quantization(self):
        # v = 0.25 lands exactly on a bin edge and belongs to terrain 1
        template = grid_environment(np.zeros((6, 6), dtype=int))
        theta = EnvParamVector([0.25] * 9, "gridworld-patch")
        env = decode_env(theta, template)
        assert np.all(env.domain.terrain == 1)

    def test_near_one_clamps_to_last_terrain(self):
        template = grid_environment(np.zeros((6, 6), dtype=int))
        theta = EnvParamVector([1.0 - 1e-12] * 9, "gridworld-patch")
        env = decode_env(theta, template)
        assert np.all(env.domain.terrain == 3)

    def test_start_goal_preserved(self):
        template = grid_environment(np.zeros((9, 9), dtype=int), start=(4, 4), goal=(0, 8))
        env = decode_env(EnvParamVector([0.5] * 9, "gridworld-patch"), template)
        assert env.domain.start == (4, 4)
        assert env.domain.goal == (0, 8)

    def test_graph_edges_overwritten_topology_kept(self):
        template = sample_training_graph(3)
        values = np.concatenate([[1.5, 2.5, -0.5]] * 12)
        env = decode_env(EnvParamVector(values, "graph-edges"), template)
        for old, new in zip(template.domain.edges, env.domain.edges):
            assert (old.src, old.dst) == (new.src, new.dst)
            assert (new.distance, new.travel_time, new.elevation) == (1.5, 2.5, -0.5)

    def test_kind_mismatch_raises(self):
        template = grid_environment(np.zeros((6, 6), dtype=int))
        theta = EnvParamVector(np.concatenate([[2.0, 3.0, 0.0]] * 12), "graph-edges")
        with pytest.raises(ShapeError, match="gridworld-patch"):
            decode_env(theta, template)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_total_on_box(self, seed):
        """Every in-bounds vector decodes to a valid environment."""
        rng = np.random.default_rng(seed)
        template = grid_environment(np.zeros((15, 15), dtype=int))
        theta = EnvParamVector(rng.uniform(0, 1 - 1e-9, size=9), "gridworld-patch")
        env = decode_env(theta, template)
        assert env.domain.terrain.min() >= 0 and env.domain.terrain.max() <= 3


class TestTrainingGraph:
    def test_shape_and_ranges(self):
        env = sample_training_graph(7)
        g = env.domain
        assert len(g.nodes) == 9 and len(g.edges) == 12
        assert g.start == 0 and g.goal == 8 and not g.directed
        for e in g.edges:
            assert 1.0 <= e.distance <= 5.0
            assert 2.0 <= e.travel_time <= 5.0
            assert -1.0 <= e.elevation <= 1.0

    def test_seed_determinism(self):
        a, b = sample_training_graph(11), sample_training_graph(11)
        assert environment_to_json(a) == environment_to_json(b)
        c = sample_training_graph(12)
        assert environment_to_json(a) != environment_to_json(c)


class TestSerialization:
    def test_grid_round_trip(self, tmp_path):
        env = small_grid(5)
        path = tmp_path / "grid.json"
        save_environment(env, path)
        loaded = load_environment(path)
        assert loaded == env
        assert loaded.env_id == env.env_id

    def test_graph_round_trip(self, tmp_path):
        env = sample_training_graph(3)
        path = tmp_path / "graph.json"
        save_environment(env, path)
        loaded = load_environment(path)
        assert loaded == env

    def test_grid_schema_fields(self):
        env = small_grid(4)
        data = environment_to_json(env)
        assert data["type"] == "grid"
        assert data["size"] == 4
        assert np.asarray(data["terrain"]).shape == (4, 4)
        assert data["start"] == [0, 0] and data["goal"] == [3, 3]

    def test_graph_schema_fields(self):
        data = environment_to_json(tiny_graph())
        assert data["type"] == "graph"
        assert set(data["edges"][0]) == {"src", "dst", "distance", "time", "elev"}
        assert data["directed"] is False

    def test_load_rejects_size_mismatch(self, tmp_path):
        data = environment_to_json(small_grid(4))
        data["size"] = 5
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(EnvironmentValidationError, match="size"):
            load_environment(path)

    def test_load_rejects_unknown_type(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"type": "maze"}))
        with pytest.raises(EnvironmentValidationError, match="maze"):
            load_environment(path)

    def test_env_id_differs_across_contents(self):
        a, b = sample_training_graph(1), sample_training_graph(2)
        assert a.env_id != b.env_id


class TestEnvironmentSpec:
    def test_default_horizon(self):
        assert small_grid(15).horizon == 60
        assert sample_training_graph(0).horizon == 27

    def test_feature_dims(self):
        assert small_grid(4).feature_dim == 4
        assert tiny_graph().feature_dim == 3

    def test_feature_scale_is_inverse_horizon(self):
        env = small_grid(10)
        assert env.feature_scale == pytest.approx(1.0 / env.horizon)

    def test_rejects_bad_gamma(self):
        with pytest.raises(EnvironmentValidationError, match="discount"):
            EnvironmentSpec(TerrainGrid(np.zeros((3, 3), dtype=int), (0, 0), (2, 2)), gamma=1.0)
