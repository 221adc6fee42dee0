#!/usr/bin/env python3
"""Generate the minicity fixture: a 3 km grid town with roads, zones, POIs
and a year of crashes. Deterministic; rerun to regenerate.

    python3 tools/make_minicity.py tests/fixtures/minicity
"""

import argparse
import datetime as dt
import json
import random
from pathlib import Path

BLOCK = 500.0
N = 6  # zones per side
CATEGORIES = ["WORK", "ATTRACTION", "EDUCATION", "SHOP", "RESTAURANT",
              "STATION", "ENTERTAINMENT", "ACCOMMODATION", "PARKING"]
AGES = ["0-18", "19-25", "26-35", "36-45", "46-55", "56-65", "over-65"]
HOUR_WEIGHTS = [1, 1, 1, 1, 1, 2, 4, 9, 12, 7, 4, 4, 5, 5, 5, 6, 8, 11, 10, 6, 4, 3, 2, 1]

MANIFEST = """\
[run]
seed = 20190101
output = out

[inputs]
crashes = crashes.csv
pois = pois.csv
zones = zones.json
nodes = nodes.csv
edges = edges.csv

[kde]
bandwidth = 200
lixel_unit = 100
snap_tolerance = 10
top_k = 15

[moran]
permutations = 499

[geodetector]
jenks_k = 4
permutations = 199

[tensor]
core_size = 4,3,3
max_iter = 200
restarts = 2
top_q = 5

[report]
bin_width = 2
"""


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(v) for v in r) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)

    nodes = [(f"n{i}_{j}", i * BLOCK, j * BLOCK) for j in range(N + 1) for i in range(N + 1)]
    edges = []
    for j in range(N + 1):
        for i in range(N + 1):
            if i < N:
                edges.append((f"h{i}_{j}", f"n{i}_{j}", f"n{i + 1}_{j}"))
            if j < N:
                edges.append((f"v{i}_{j}", f"n{i}_{j}", f"n{i}_{j + 1}"))
    write_csv(args.out / "nodes.csv", ["node_id", "x", "y"], nodes)
    write_csv(args.out / "edges.csv", ["edge_id", "from", "to"], edges)

    zones = []
    for j in range(N):
        for i in range(N):
            x, y = i * BLOCK, j * BLOCK
            zones.append({"zone_id": f"z{j}{i}",
                          "rings": [[[x, y], [x + BLOCK, y], [x + BLOCK, y + BLOCK], [x, y + BLOCK], [x, y]]]})
    (args.out / "zones.json").write_text(json.dumps(zones, indent=1) + "\n")

    # downtown around (1500, 1500), a second hub at (2500, 500)
    def attraction(x, y):
        d1 = ((x - 1500) ** 2 + (y - 1500) ** 2) ** 0.5
        d2 = ((x - 2500) ** 2 + (y - 500) ** 2) ** 0.5
        return 4.0 / (1 + (d1 / 600) ** 2) + 2.0 / (1 + (d2 / 400) ** 2) + 0.2

    pois = []
    pid = 0
    for z in zones:
        x0, y0 = z["rings"][0][0]
        w = attraction(x0 + BLOCK / 2, y0 + BLOCK / 2)
        for c, cat in enumerate(CATEGORIES):
            count = rng.randint(0, int(2 + w * (1 + c % 4)))
            for _ in range(count):
                pois.append((f"p{pid}", cat, round(x0 + rng.uniform(20, BLOCK - 20), 1),
                             round(y0 + rng.uniform(20, BLOCK - 20), 1)))
                pid += 1
    write_csv(args.out / "pois.csv", ["id", "category", "x", "y"], pois)

    crashes = []
    start = dt.datetime(2019, 1, 1)
    node_xy = {n: (x, y) for n, x, y in nodes}
    weights = []
    for _, a, b in edges:
        (ax, ay), (bx, by) = node_xy[a], node_xy[b]
        weights.append(attraction((ax + bx) / 2, (ay + by) / 2) ** 2)
    for cid in range(900):
        _, a, b = rng.choices(edges, weights)[0]
        (ax, ay), (bx, by) = node_xy[a], node_xy[b]
        t = rng.uniform(0.02, 0.98)
        off = rng.uniform(-4, 4) if rng.random() < 0.95 else rng.choice([-1, 1]) * rng.uniform(15, 40)
        if ay == by:
            x, y = ax + t * (bx - ax), ay + off
        else:
            x, y = ax + off, ay + t * (by - ay)
        day = start + dt.timedelta(days=rng.randrange(365))
        hour = rng.choices(range(24), HOUR_WEIGHTS)[0]
        when = day.replace(hour=hour, minute=rng.randrange(60))
        sev = rng.choices(["fatal", "serious", "slight"], [1, 12, 87])[0]
        young_night = hour >= 21 or hour < 3
        age = rng.choices(AGES, [3, 9, 6, 3, 2, 1, 1] if young_night else [2, 3, 4, 4, 3, 3, 3])[0]
        crashes.append((f"c{cid:04d}", round(x, 1), round(y, 1), when.strftime("%Y-%m-%dT%H:%M"), sev, age))
    write_csv(args.out / "crashes.csv", ["id", "x", "y", "datetime", "severity", "age_group"], crashes)

    (args.out / "manifest.ini").write_text(MANIFEST)


if __name__ == "__main__":
    main()
