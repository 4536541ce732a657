"""Navigation domains: terrain grids, street graphs, and their design encodings.

Both domains are finite MDPs with deterministic transitions and an additive
feature function: a grid step contributes a one-hot count of the terrain of
the cell entered, a graph step contributes the traversed edge's
(distance, travel_time, elevation_delta) triple.  The designer-facing
encoding is a flat box-bounded vector: 9 patch values painting terrain onto
a grid, or one value per edge feature of a graph.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundsViolationError,
    EnvironmentValidationError,
    InvalidActionError,
    InvalidTrajectoryError,
    ShapeError,
)

TERRAIN_NAMES = ("brick", "gravel", "sand", "grass")
N_TERRAINS = len(TERRAIN_NAMES)

GRID_PATCHES_PER_SIDE = 3
GRID_FEATURE_DIM = N_TERRAINS
GRAPH_FEATURE_DIM = 3

# Per-edge-feature sampling ranges of the training street network.
EDGE_DISTANCE_RANGE = (1.0, 5.0)
EDGE_TIME_RANGE = (2.0, 5.0)
EDGE_ELEVATION_RANGE = (-1.0, 1.0)

# Grid actions, indexed 0..3.  Tie-breaking everywhere uses this order.
GRID_MOVES = ((-1, 0), (0, 1), (1, 0), (0, -1))  # up, right, down, left


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TerrainGrid:
    """Square grid of terrain ids with a start and goal cell."""

    terrain: np.ndarray  # (size, size) ints in [0, N_TERRAINS)
    start: tuple[int, int]
    goal: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "terrain", _readonly(np.asarray(self.terrain, dtype=np.int64)))
        object.__setattr__(self, "start", tuple(int(x) for x in self.start))
        object.__setattr__(self, "goal", tuple(int(x) for x in self.goal))
        self.validate()

    @property
    def size(self) -> int:
        return self.terrain.shape[0]

    def validate(self):
        t = self.terrain
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 2:
            raise EnvironmentValidationError(
                f"terrain must be a square grid of side >= 2, got shape {t.shape}"
            )
        if t.min() < 0 or t.max() >= N_TERRAINS:
            raise EnvironmentValidationError(
                f"terrain ids must lie in [0, {N_TERRAINS}), got range "
                f"[{t.min()}, {t.max()}]"
            )
        for name, cell in (("start", self.start), ("goal", self.goal)):
            r, c = cell
            if not (0 <= r < t.shape[0] and 0 <= c < t.shape[1]):
                raise EnvironmentValidationError(f"{name} cell {cell} is outside the grid")
        if self.start == self.goal:
            raise EnvironmentValidationError("start and goal must be distinct cells")


@dataclass(frozen=True)
class Edge:
    src: object
    dst: object
    distance: float
    travel_time: float
    elevation: float


@dataclass(frozen=True)
class StreetGraph:
    """Street network: nodes joined by edges carrying routing features."""

    nodes: tuple
    edges: tuple  # of Edge
    start: object
    goal: object
    directed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self,
            "edges",
            tuple(
                e if isinstance(e, Edge) else Edge(e[0], e[1], float(e[2]), float(e[3]), float(e[4]))
                for e in self.edges
            ),
        )
        self.validate()

    def validate(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise EnvironmentValidationError("duplicate node ids")
        for e in self.edges:
            if e.src not in node_set or e.dst not in node_set:
                raise EnvironmentValidationError(
                    f"edge ({e.src}, {e.dst}) references a missing node"
                )
            if not e.distance > 0:
                raise EnvironmentValidationError(
                    f"edge ({e.src}, {e.dst}) has non-positive distance {e.distance}"
                )
            if not e.travel_time > 0:
                raise EnvironmentValidationError(
                    f"edge ({e.src}, {e.dst}) has non-positive travel_time {e.travel_time}"
                )
        for name, node in (("start", self.start), ("goal", self.goal)):
            if node not in node_set:
                raise EnvironmentValidationError(f"{name} node {node!r} is not in the graph")


@dataclass(frozen=True)
class Dynamics:
    """Tabular transition structure shared by the planner and rollouts.

    ``next_state[s, a]`` is -1 where action ``a`` is illegal at state ``s``;
    ``step_phi[s, a]`` is the per-step feature contribution of taking ``a``.
    State and action indices are dense and deterministic, so tie-breaking by
    smallest action index is well defined.
    """

    states: tuple
    state_index: dict
    next_state: np.ndarray  # (S, A) int64
    step_phi: np.ndarray  # (S, A, d) float64
    start: int
    goal: int

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return self.next_state.shape[1]

    def legal_actions(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.next_state[s] >= 0)


class EnvironmentSpec:
    """A concrete navigation environment plus its MDP bookkeeping.

    Wraps either a :class:`TerrainGrid` or a :class:`StreetGraph` together
    with the discount factor and rollout horizon.  Instances are immutable;
    the tabular dynamics are built once and cached.
    """

    def __init__(self, domain, gamma: float = 0.95, horizon: int | None = None):
        if not isinstance(domain, (TerrainGrid, StreetGraph)):
            raise TypeError(f"unsupported domain type: {type(domain).__name__}")
        if not 0.0 <= gamma < 1.0:
            raise EnvironmentValidationError(f"discount must lie in [0, 1), got {gamma}")
        self.domain = domain
        self.gamma = float(gamma)
        if horizon is None:
            horizon = default_horizon(domain)
        if horizon < 1:
            raise EnvironmentValidationError(f"horizon must be >= 1, got {horizon}")
        self.horizon = int(horizon)
        self._dynamics = None
        self._env_id = None
        self._check_reachability()

    @property
    def is_grid(self) -> bool:
        return isinstance(self.domain, TerrainGrid)

    @property
    def feature_dim(self) -> int:
        return GRID_FEATURE_DIM if self.is_grid else GRAPH_FEATURE_DIM

    @property
    def feature_scale(self) -> float:
        """Scale applied to trajectory features inside preference likelihoods."""
        return 1.0 / self.horizon

    @property
    def env_id(self) -> str:
        if self._env_id is None:
            payload = json.dumps(environment_to_json(self), sort_keys=True)
            digest = hashlib.sha1(payload.encode()).hexdigest()[:12]
            kind = "grid" if self.is_grid else "graph"
            self._env_id = f"{kind}-{digest}"
        return self._env_id

    def dynamics(self) -> Dynamics:
        if self._dynamics is None:
            builder = _grid_dynamics if self.is_grid else _graph_dynamics
            self._dynamics = builder(self.domain)
        return self._dynamics

    def _check_reachability(self):
        dyn = self.dynamics()
        seen = {dyn.start}
        frontier = deque([dyn.start])
        while frontier:
            s = frontier.popleft()
            for nxt in dyn.next_state[s]:
                if nxt >= 0 and nxt not in seen:
                    seen.add(int(nxt))
                    frontier.append(int(nxt))
        if dyn.goal not in seen:
            raise EnvironmentValidationError("goal is not reachable from start")

    def __eq__(self, other):
        return isinstance(other, EnvironmentSpec) and environment_to_json(self) == environment_to_json(other)

    def __repr__(self):
        kind = "grid" if self.is_grid else "graph"
        return f"EnvironmentSpec({kind}, id={self.env_id}, gamma={self.gamma}, horizon={self.horizon})"


def goal_reachable_mask(env: "EnvironmentSpec") -> np.ndarray:
    """Boolean mask over states from which the goal can be reached."""
    dyn = env.dynamics()
    incoming: list[list[int]] = [[] for _ in range(dyn.n_states)]
    for s in range(dyn.n_states):
        for nxt in dyn.next_state[s]:
            if nxt >= 0:
                incoming[int(nxt)].append(s)
    mask = np.zeros(dyn.n_states, dtype=bool)
    mask[dyn.goal] = True
    frontier = deque([dyn.goal])
    while frontier:
        s = frontier.popleft()
        for prev in incoming[s]:
            if not mask[prev]:
                mask[prev] = True
                frontier.append(prev)
    return mask


def default_horizon(domain) -> int:
    """Rollout cap: 4 steps per grid side, 3 per graph node."""
    if isinstance(domain, TerrainGrid):
        return 4 * domain.size
    return 3 * len(domain.nodes)


def _grid_dynamics(grid: TerrainGrid) -> Dynamics:
    size = grid.size
    states = tuple((r, c) for r in range(size) for c in range(size))
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    next_state = np.full((n, len(GRID_MOVES)), -1, dtype=np.int64)
    step_phi = np.zeros((n, len(GRID_MOVES), GRID_FEATURE_DIM))
    for i, (r, c) in enumerate(states):
        for a, (dr, dc) in enumerate(GRID_MOVES):
            rr, cc = r + dr, c + dc
            if 0 <= rr < size and 0 <= cc < size:
                next_state[i, a] = index[(rr, cc)]
                step_phi[i, a, grid.terrain[rr, cc]] = 1.0
    return Dynamics(
        states=states,
        state_index=index,
        next_state=next_state,
        step_phi=_readonly(step_phi),
        start=index[grid.start],
        goal=index[grid.goal],
    )


def _graph_dynamics(graph: StreetGraph) -> Dynamics:
    states = tuple(graph.nodes)
    index = {s: i for i, s in enumerate(states)}
    # Actions at a node are its outgoing traversals ordered by edge index,
    # forward direction first.  Reverse traversal negates the elevation delta.
    traversals: list[list[tuple[int, float, float, float]]] = [[] for _ in states]
    for ei, e in enumerate(graph.edges):
        traversals[index[e.src]].append((index[e.dst], e.distance, e.travel_time, e.elevation))
        if not graph.directed:
            traversals[index[e.dst]].append((index[e.src], e.distance, e.travel_time, -e.elevation))
    n_actions = max(1, max(len(t) for t in traversals))
    next_state = np.full((len(states), n_actions), -1, dtype=np.int64)
    step_phi = np.zeros((len(states), n_actions, GRAPH_FEATURE_DIM))
    for i, opts in enumerate(traversals):
        for a, (j, dist, time, elev) in enumerate(opts):
            next_state[i, a] = j
            step_phi[i, a] = (dist, time, elev)
    return Dynamics(
        states=states,
        state_index=index,
        next_state=next_state,
        step_phi=_readonly(step_phi),
        start=index[graph.start],
        goal=index[graph.goal],
    )


def grid_environment(terrain, start=(0, 0), goal=None, gamma=0.95, horizon=None) -> EnvironmentSpec:
    """Build a grid environment; the goal defaults to the bottom-right cell."""
    terrain = np.asarray(terrain, dtype=np.int64)
    if goal is None:
        goal = (terrain.shape[0] - 1, terrain.shape[1] - 1)
    return EnvironmentSpec(TerrainGrid(terrain, start, goal), gamma=gamma, horizon=horizon)


def graph_environment(nodes, edges, start, goal, directed=False, gamma=0.95, horizon=None) -> EnvironmentSpec:
    return EnvironmentSpec(
        StreetGraph(nodes, edges, start, goal, directed), gamma=gamma, horizon=horizon
    )


# ---------------------------------------------------------------------------
# Designer-facing parameter vectors


@dataclass(frozen=True)
class EnvParamVector:
    """Flat design vector with box bounds.

    ``gridworld-patch`` vectors hold 9 values in [0, 1) that paint terrain
    onto a 3x3 block partition of the grid; ``graph-edges`` vectors hold one
    value per edge feature, ordered (distance, travel_time, elevation) per
    edge, bounded by the training ranges.
    """

    values: np.ndarray
    kind: str  # "gridworld-patch" | "graph-edges"
    bounds: np.ndarray = field(default=None)  # (D, 2)

    def __post_init__(self):
        values = _readonly(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", values)
        bounds = self.bounds
        if bounds is None:
            bounds = default_bounds(self.kind, len(values))
        object.__setattr__(self, "bounds", _readonly(np.asarray(bounds, dtype=float)))
        if self.kind not in ("gridworld-patch", "graph-edges"):
            raise ValueError(f"unknown design-vector kind: {self.kind!r}")
        if self.values.ndim != 1 or self.bounds.shape != (len(self.values), 2):
            raise ShapeError(
                f"values shape {self.values.shape} does not match bounds shape {self.bounds.shape}"
            )
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        if np.any(self.values < lo) or np.any(self.values > hi):
            bad = int(np.argmax((self.values < lo) | (self.values > hi)))
            raise BoundsViolationError(
                f"value {self.values[bad]} at index {bad} outside "
                f"[{lo[bad]}, {hi[bad]}]"
            )


def default_bounds(kind: str, length: int) -> np.ndarray:
    if kind == "gridworld-patch":
        return np.tile([0.0, 1.0], (length, 1))
    if kind == "graph-edges":
        per_edge = np.array([EDGE_DISTANCE_RANGE, EDGE_TIME_RANGE, EDGE_ELEVATION_RANGE])
        if length % 3 != 0:
            raise ShapeError(f"graph-edges vector length must be a multiple of 3, got {length}")
        return np.tile(per_edge, (length // 3, 1))
    raise ValueError(f"unknown design-vector kind: {kind!r}")


def design_space(template: EnvironmentSpec) -> EnvParamVector:
    """The template's current encoding as a design vector (useful as a BO seed)."""
    if template.is_grid:
        # Represent each block by the midpoint of its dominant terrain's bin.
        grid = template.domain
        values = []
        for rows in np.array_split(np.arange(grid.size), GRID_PATCHES_PER_SIDE):
            for cols in np.array_split(np.arange(grid.size), GRID_PATCHES_PER_SIDE):
                block = grid.terrain[np.ix_(rows, cols)]
                dominant = np.bincount(block.ravel(), minlength=N_TERRAINS).argmax()
                values.append((dominant + 0.5) / N_TERRAINS)
        return EnvParamVector(np.array(values), "gridworld-patch")
    values = []
    for e in template.domain.edges:
        values.extend((e.distance, e.travel_time, e.elevation))
    return EnvParamVector(np.array(values), "graph-edges")


def decode_env(theta: EnvParamVector, template: EnvironmentSpec) -> EnvironmentSpec:
    """Materialize the environment a design vector describes.

    Grid: each of the 9 values is quantized to a terrain id (floor of
    value * 4, clamped to 3) and painted onto its block; start/goal and the
    grid size come from the template.  Graph: the values overwrite the
    template's edge feature triples, topology unchanged.  Total and
    deterministic on the box domain.
    """
    if template.is_grid:
        if theta.kind != "gridworld-patch":
            raise ShapeError(f"grid template requires a gridworld-patch vector, got {theta.kind}")
        n_patches = GRID_PATCHES_PER_SIDE**2
        if len(theta.values) != n_patches:
            raise ShapeError(f"expected {n_patches} patch values, got {len(theta.values)}")
        grid = template.domain
        ids = np.minimum((theta.values * N_TERRAINS).astype(np.int64), N_TERRAINS - 1)
        terrain = np.empty_like(grid.terrain)
        row_blocks = np.array_split(np.arange(grid.size), GRID_PATCHES_PER_SIDE)
        col_blocks = np.array_split(np.arange(grid.size), GRID_PATCHES_PER_SIDE)
        k = 0
        for rows in row_blocks:
            for cols in col_blocks:
                terrain[np.ix_(rows, cols)] = ids[k]
                k += 1
        domain = TerrainGrid(terrain, grid.start, grid.goal)
    else:
        if theta.kind != "graph-edges":
            raise ShapeError(f"graph template requires a graph-edges vector, got {theta.kind}")
        graph = template.domain
        if len(theta.values) != 3 * len(graph.edges):
            raise ShapeError(
                f"expected {3 * len(graph.edges)} edge-feature values, got {len(theta.values)}"
            )
        triples = theta.values.reshape(-1, 3)
        edges = [
            Edge(e.src, e.dst, t[0], t[1], t[2]) for e, t in zip(graph.edges, triples)
        ]
        domain = StreetGraph(graph.nodes, edges, graph.start, graph.goal, graph.directed)
    return EnvironmentSpec(domain, gamma=template.gamma, horizon=template.horizon)


# ---------------------------------------------------------------------------
# Features


def step_features(env: EnvironmentSpec, state, action: int) -> np.ndarray:
    """Per-step feature contribution of taking ``action`` at ``state``."""
    dyn = env.dynamics()
    if state not in dyn.state_index:
        raise InvalidActionError(f"unknown state {state!r}")
    s = dyn.state_index[state]
    if not 0 <= action < dyn.n_actions or dyn.next_state[s, action] < 0:
        raise InvalidActionError(f"action {action} is illegal at state {state!r}")
    return dyn.step_phi[s, action].copy()


def trajectory_features(env: EnvironmentSpec, steps) -> np.ndarray:
    """Sum of per-step features along a connected state/action sequence.

    ``steps`` is an iterable of (state, action) pairs (a TrajectoryRecord
    works too).  The empty sequence has the zero feature vector.
    """
    steps = getattr(steps, "steps", steps)
    dyn = env.dynamics()
    phi = np.zeros(env.feature_dim)
    expected = None
    for state, action in steps:
        if state not in dyn.state_index:
            raise InvalidTrajectoryError(f"unknown state {state!r}")
        s = dyn.state_index[state]
        if expected is not None and s != expected:
            raise InvalidTrajectoryError(
                f"state {state!r} does not follow from the previous transition"
            )
        if not 0 <= action < dyn.n_actions or dyn.next_state[s, action] < 0:
            raise InvalidTrajectoryError(f"action {action} is illegal at state {state!r}")
        phi += dyn.step_phi[s, action]
        expected = int(dyn.next_state[s, action])
    return phi


# ---------------------------------------------------------------------------
# Training graph


def sample_training_graph(seed: int) -> EnvironmentSpec:
    """Random 9-node, 12-edge street network on a fixed 3x3 lattice.

    Edge features are drawn uniformly from the training ranges: distance
    [1, 5], travel time [2, 5], elevation [-1, 1].
    """
    rng = np.random.default_rng(seed)
    topology = []
    for r in range(3):
        for c in range(3):
            node = 3 * r + c
            if c < 2:
                topology.append((node, node + 1))
            if r < 2:
                topology.append((node, node + 3))
    edges = []
    for src, dst in topology:
        dist = rng.uniform(*EDGE_DISTANCE_RANGE)
        time = rng.uniform(*EDGE_TIME_RANGE)
        elev = rng.uniform(*EDGE_ELEVATION_RANGE)
        edges.append(Edge(src, dst, dist, time, elev))
    return graph_environment(list(range(9)), edges, start=0, goal=8, directed=False)


# ---------------------------------------------------------------------------
# Serialization


def environment_to_json(env: EnvironmentSpec) -> dict:
    if env.is_grid:
        grid = env.domain
        return {
            "type": "grid",
            "size": grid.size,
            "terrain": grid.terrain.tolist(),
            "start": list(grid.start),
            "goal": list(grid.goal),
            "gamma": env.gamma,
            "horizon": env.horizon,
        }
    graph = env.domain
    return {
        "type": "graph",
        "nodes": list(graph.nodes),
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "distance": e.distance,
                "time": e.travel_time,
                "elev": e.elevation,
            }
            for e in graph.edges
        ],
        "start": graph.start,
        "goal": graph.goal,
        "directed": graph.directed,
        "gamma": env.gamma,
        "horizon": env.horizon,
    }


def environment_from_json(data: dict) -> EnvironmentSpec:
    kind = data.get("type")
    gamma = data.get("gamma", 0.95)
    horizon = data.get("horizon")
    if kind == "grid":
        terrain = np.asarray(data["terrain"], dtype=np.int64)
        if "size" in data and terrain.shape != (data["size"], data["size"]):
            raise EnvironmentValidationError(
                f"terrain shape {terrain.shape} does not match declared size {data['size']}"
            )
        domain = TerrainGrid(terrain, tuple(data["start"]), tuple(data["goal"]))
    elif kind == "graph":
        edges = [
            Edge(e["src"], e["dst"], e["distance"], e["time"], e["elev"])
            for e in data["edges"]
        ]
        domain = StreetGraph(
            data["nodes"], edges, data["start"], data["goal"], data.get("directed", False)
        )
    else:
        raise EnvironmentValidationError(f"unknown environment type: {kind!r}")
    return EnvironmentSpec(domain, gamma=gamma, horizon=horizon)


def load_environment(path) -> EnvironmentSpec:
    """Load and validate an environment JSON file."""
    with open(path) as f:
        data = json.load(f)
    return environment_from_json(data)


def save_environment(env: EnvironmentSpec, path) -> None:
    with open(path, "w") as f:
        json.dump(environment_to_json(env), f, indent=2)
        f.write("\n")
