"""OpenStreetMap XML → street-graph environment JSON.

Keeps the walkable ways within a radius of a center point, extracts the
largest connected component, and emits the graph environment schema with
per-edge distance, walking time, and elevation change.  Feature columns
are rescaled to the same magnitude as the synthetic training networks
(distance and time to at most 5, elevation to at most 1) so converted
maps interoperate with learned weights.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from collections import deque
from pathlib import Path

from .envs import EnvironmentSpec, StreetGraph, environment_to_json
from .errors import EnvironmentValidationError

EARTH_RADIUS_M = 6_371_000.0
WALK_SPEED_M_PER_MIN = 5000.0 / 60.0  # 5 km/h

# Way types a pedestrian can use.
WALKABLE_HIGHWAYS = {
    "footway", "path", "pedestrian", "steps", "living_street",
    "residential", "service", "track", "unclassified", "tertiary",
    "secondary", "primary", "cycleway",
}

__all__ = ["convert_osm", "haversine_m", "parse_osm"]


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


def parse_osm(path) -> tuple[dict, list]:
    """Extract nodes and walkable ways from an OSM XML file.

    Returns ({node_id: (lat, lon, elevation)}, [[node_id, ...], ...]).
    Elevation comes from the optional `ele` node tag, defaulting to 0.
    """
    nodes: dict[int, tuple[float, float, float]] = {}
    ways: list[list[int]] = []
    tree = ET.parse(path)
    for element in tree.getroot():
        if element.tag == "node":
            node_id = int(element.attrib["id"])
            ele = 0.0
            for tag in element.findall("tag"):
                if tag.attrib.get("k") == "ele":
                    try:
                        ele = float(tag.attrib["v"])
                    except ValueError:
                        pass
            nodes[node_id] = (
                float(element.attrib["lat"]),
                float(element.attrib["lon"]),
                ele,
            )
        elif element.tag == "way":
            tags = {t.attrib.get("k"): t.attrib.get("v") for t in element.findall("tag")}
            if tags.get("highway") not in WALKABLE_HIGHWAYS:
                continue
            refs = [int(nd.attrib["ref"]) for nd in element.findall("nd")]
            if len(refs) >= 2:
                ways.append(refs)
    return nodes, ways


def _largest_component(nodes: set, adjacency: dict) -> set:
    remaining = set(nodes)
    best: set = set()
    while remaining:
        seed = next(iter(remaining))
        seen = {seed}
        frontier = deque([seed])
        while frontier:
            u = frontier.popleft()
            for v in adjacency.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
        remaining -= seen
        if len(seen) > len(best):
            best = seen
    return best


def convert_osm(
    path,
    center: tuple[float, float],
    radius_m: float,
    gamma: float = 0.95,
    horizon: int | None = None,
) -> EnvironmentSpec:
    """Build a street-graph environment from an OSM export.

    Nodes outside `radius_m` of `center` are dropped, along with any way
    segment touching them; the largest connected component survives.
    Start is the node nearest the center; goal is the component's node
    farthest from the start (great-circle).
    """
    all_nodes, ways = parse_osm(path)
    lat0, lon0 = center
    kept = {
        nid
        for nid, (lat, lon, _) in all_nodes.items()
        if haversine_m(lat0, lon0, lat, lon) <= radius_m
    }

    segments: dict[tuple[int, int], None] = {}
    adjacency: dict[int, set] = {}
    used: set = set()
    for refs in ways:
        for u, v in zip(refs, refs[1:]):
            if u == v or u not in kept or v not in kept:
                continue
            key = (u, v) if u <= v else (v, u)
            if key in segments:
                continue
            segments[key] = None
            adjacency.setdefault(u, set()).add(v)
            adjacency.setdefault(v, set()).add(u)
            used.update((u, v))

    component = _largest_component(used, adjacency)
    if len(component) < 2:
        raise EnvironmentValidationError(
            "fewer than two connected walkable nodes inside the radius"
        )

    def dist_to_center(nid):
        lat, lon, _ = all_nodes[nid]
        return haversine_m(lat0, lon0, lat, lon)

    ordered = sorted(component)
    start = min(ordered, key=lambda n: (dist_to_center(n), n))
    lat_s, lon_s, _ = all_nodes[start]
    goal = max(
        ordered,
        key=lambda n: (haversine_m(lat_s, lon_s, *all_nodes[n][:2]), -n),
    )

    raw = []
    for u, v in sorted(segments):
        if u not in component or v not in component:
            continue
        lat_u, lon_u, ele_u = all_nodes[u]
        lat_v, lon_v, ele_v = all_nodes[v]
        d = haversine_m(lat_u, lon_u, lat_v, lon_v)
        if d <= 0:  # duplicate coordinates: zero-length edges are useless
            continue
        raw.append((u, v, d, d / WALK_SPEED_M_PER_MIN, ele_v - ele_u))
    if not raw:
        raise EnvironmentValidationError("no usable edges inside the radius")

    max_d = max(r[2] for r in raw)
    max_t = max(r[3] for r in raw)
    max_e = max(abs(r[4]) for r in raw)
    edges = [
        (
            u,
            v,
            5.0 * d / max_d,
            5.0 * t / max_t,
            0.0 if max_e == 0 else e / max_e,
        )
        for u, v, d, t, e in raw
    ]

    graph = StreetGraph(
        nodes=tuple(ordered), edges=tuple(edges), start=start, goal=goal, directed=False
    )
    return EnvironmentSpec(graph, gamma=gamma, horizon=horizon)


def convert_osm_to_file(path, center, radius_m, out_path, **kwargs) -> EnvironmentSpec:
    env = convert_osm(path, center, radius_m, **kwargs)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    import json

    with open(out_path, "w") as fh:
        json.dump(environment_to_json(env), fh, indent=2)
        fh.write("\n")
    return env
