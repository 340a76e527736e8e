#!/usr/bin/env python3
"""Generates the bundled environments and scenario files under data/.

Environments 1-3 share a main area of three 6x4 grid blocks chained by
shared corner nodes (70 main nodes, 3 bi-connected components). Env 1/3
place their 10 task endpoints at the ends of pendant trees; env 2 puts them
on main-area nodes. Both carry 40 single-leaf parking trees. Env 4 is the
small three-component graph (10 nodes, every node a task endpoint, no
parking) used for the tight open-node-margin scenario.
"""
import json
import os

SCALE = 10.0

OUT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


class Builder:
    def __init__(self):
        self.nodes = []
        self.ids = {}
        self.edges = []
        self.edge_set = set()

    def node(self, x, y, kind="plain"):
        key = (round(x, 3), round(y, 3))
        if key in self.ids:
            return self.ids[key]
        nid = len(self.nodes)
        self.ids[key] = nid
        self.nodes.append({"id": nid, "x": x * SCALE, "y": y * SCALE, "kind": kind})
        return nid

    def edge(self, a, b):
        key = (min(a, b), max(a, b))
        if key in self.edge_set:
            return
        self.edge_set.add(key)
        self.edges.append({"a": a, "b": b})

    def grid_block(self, x0, y0, w, h):
        for x in range(x0, x0 + w):
            for y in range(y0, y0 + h):
                self.node(x, y)
        for x in range(x0, x0 + w):
            for y in range(y0, y0 + h):
                if x + 1 < x0 + w:
                    self.edge(self.node(x, y), self.node(x + 1, y))
                if y + 1 < y0 + h:
                    self.edge(self.node(x, y), self.node(x, y + 1))

    def dump(self, path):
        with open(path, "w") as f:
            json.dump({"nodes": self.nodes, "edges": self.edges}, f, indent=1)
            f.write("\n")
        print(f"wrote {path}: {len(self.nodes)} nodes, {len(self.edges)} edges")


# Endpoint pendants for env1/env3: (root, [intermediate...], leaf).
ENDPOINT_TREES = [
    ((1, 0), [], (1, -1)),
    ((3, 0), [], (3, -1)),
    ((0, 1), [(-1, 1)], (-2, 1)),
    ((0, 3), [], (-1, 3)),
    ((7, 6), [], (7, 7)),
    ((9, 6), [(9, 7)], (9, 8)),
    ((6, 3), [], (6, 2)),
    ((11, 9), [], (11, 10)),
    ((13, 9), [(13, 10)], (13, 11)),
    ((15, 7), [(16, 7)], (17, 7)),
]

# Main-area task endpoints for env2, spread over the interior.
MAIN_ENDPOINTS = [
    (2, 2), (5, 1), (8, 2),
    (1, 5), (4, 4), (7, 5), (9, 6),
    (2, 7), (5, 7), (8, 8),
]

# (x0, y0, w, h) per block; consecutive blocks share one corner node.
ENV1_BLOCKS = [(0, 0, 6, 4), (5, 3, 6, 4), (10, 6, 6, 4)]
ENV2_BLOCKS = [(0, 0, 11, 10)]


def main_blocks(b, blocks):
    for x0, y0, w, h in blocks:
        b.grid_block(x0, y0, w, h)


def main_coords(blocks):
    coords = set()
    for x0, y0, w, h in blocks:
        for x in range(x0, x0 + w):
            for y in range(y0, y0 + h):
                coords.add((x, y))
    return coords


def shared_corners(blocks):
    out = []
    for (x0, y0, w, h), (x1, y1, _, _) in zip(blocks, blocks[1:]):
        out.append((x1, y1))
        assert x1 == x0 + w - 1 and y1 == y0 + h - 1
    return out


def add_parking(b, blocks, banned_roots):
    """Hangs 40 single-leaf parking trees off distinct free main nodes."""
    count = 0
    banned = set(banned_roots) | set(shared_corners(blocks))
    for (x, y) in sorted(main_coords(blocks)):
        if count == 40:
            break
        if (x, y) in banned:
            continue
        root = b.node(x, y)
        leaf = b.node(x + 0.35, y + 0.35, "parking")
        b.edge(root, leaf)
        count += 1
    assert count == 40, count


def build_env1():
    b = Builder()
    main_blocks(b, ENV1_BLOCKS)
    used = set()
    for root_xy, mids, leaf_xy in ENDPOINT_TREES:
        prev = b.node(*root_xy)
        used.add(root_xy)
        for m in mids:
            cur = b.node(*m)
            b.edge(prev, cur)
            prev = cur
        leaf = b.node(*leaf_xy, kind="task_endpoint")
        b.edge(prev, leaf)
    add_parking(b, ENV1_BLOCKS, used)
    return b


def build_env2():
    b = Builder()
    main_blocks(b, ENV2_BLOCKS)
    used = set()
    for (x, y) in MAIN_ENDPOINTS:
        nid = b.node(x, y)
        b.nodes[nid]["kind"] = "task_endpoint"
        used.add((x, y))
    add_parking(b, ENV2_BLOCKS, used)
    return b


def build_env4():
    b = Builder()
    ring = [(0, 2), (-1.5, 1), (-1, -0.5), (1, -0.5), (1.5, 1)]  # pentagon
    pent = [b.node(x, y, "task_endpoint") for x, y in ring]
    for i in range(5):
        b.edge(pent[i], pent[(i + 1) % 5])
    quad_extra = [(3, 2.2), (4.5, 1.2), (3.2, 0.2)]
    quad = [pent[4]] + [b.node(x, y, "task_endpoint") for x, y in quad_extra]
    for i in range(4):
        b.edge(quad[i], quad[(i + 1) % 4])
    tri_extra = [(4.8, -1), (3.4, -1.4)]
    tri = [quad[3]] + [b.node(x, y, "task_endpoint") for x, y in tri_extra]
    for i in range(3):
        b.edge(tri[i], tri[(i + 1) % 3])
    return b


def write_scenario(name, obj):
    path = os.path.join(OUT_DIR, name)
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")
    print(f"wrote {path}")


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    env1 = build_env1()
    env1.dump(os.path.join(OUT_DIR, "env1.json"))
    build_env2().dump(os.path.join(OUT_DIR, "env2.json"))
    env1.dump(os.path.join(OUT_DIR, "env3.json"))  # env3: env1 layout, roles set by exp3
    build_env4().dump(os.path.join(OUT_DIR, "env4.json"))

    red = env1.ids[(1, -1)]  # the single loading endpoint for exp3
    blues = [env1.ids[leaf] for _, _, leaf in ENDPOINT_TREES if env1.ids[leaf] != red]

    full_agents = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 35, 40]
    write_scenario("exp1.json", {
        "name": "exp1", "environment": "env1.json",
        "agents": [2, 8, 22, 40], "agents_full": full_agents,
        "nu": [0.0], "t_lu": [3], "t_mv": 3,
        "trials": 10, "trials_full": 50,
        "tasks": 100, "limit": 10000, "seed": 1, "orientation_seed": 1,
        "start": "parking",
    })
    write_scenario("exp2.json", {
        "name": "exp2", "environment": "env2.json",
        "agents": [8, 22, 40], "agents_full": full_agents,
        "nu": [0.0, 0.1, 0.2], "t_lu": [6], "t_mv": 3, "t_nse": [1, 2],
        "trials": 10, "trials_full": 50,
        "tasks": 100, "limit": 10000, "seed": 1, "orientation_seed": 1,
        "start": "parking",
    })
    write_scenario("exp3.json", {
        "name": "exp3", "environment": "env3.json",
        "agents": [12, 40], "agents_full": full_agents,
        "nu": [0.0], "t_lu": [3], "t_mv": 3,
        "trials": 10, "trials_full": 50,
        "tasks": 100, "limit": 10000, "seed": 1, "orientation_seed": 1,
        "start": "parking",
        "pickup_endpoints": [red], "delivery_endpoints": blues,
    })
    write_scenario("exp4.json", {
        "name": "exp4", "environment": "env4.json",
        "agents": [8],
        "nu": [0.0], "t_lu": [3], "t_mv": 3,
        "trials": 10,
        "tasks": 20, "limit": 50000, "seed": 1, "orientation_seed": 1,
        "start": "random_main",
    })


if __name__ == "__main__":
    main()
