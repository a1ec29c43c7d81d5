#!/usr/bin/env python3
"""Generates the bundled toy point clouds under data/toy.

Four shape classes (sphere, cube, pyramid, torus), two samples each, points
in the unit cube with RGB colors and a per-point class label. Deterministic:
rerunning produces identical files.
"""

import json
import math
import random
from pathlib import Path

CLASSES = ["sphere", "cube", "pyramid", "torus"]
POINTS = 1500
OUT = Path(__file__).resolve().parent.parent / "data" / "toy"


def sphere(rng):
    while True:
        v = [rng.gauss(0, 1) for _ in range(3)]
        n = math.sqrt(sum(c * c for c in v))
        if n > 1e-9:
            return [c / n for c in v]


def cube(rng):
    p = [rng.uniform(-1, 1) for _ in range(3)]
    axis = rng.randrange(3)
    p[axis] = rng.choice((-1.0, 1.0))
    return p


def pyramid(rng):
    # square base at z=-1, apex at z=1
    if rng.random() < 0.2:
        return [rng.uniform(-1, 1), rng.uniform(-1, 1), -1.0]
    t = rng.random() ** 0.5
    half = t
    z = 1 - 2 * t
    side = rng.randrange(4)
    s = rng.uniform(-half, half)
    x, y = [(half, s), (-half, s), (s, half), (s, -half)][side]
    return [x, y, z]


def torus(rng):
    big, small = 0.7, 0.3
    u, v = rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)
    r = big + small * math.cos(v)
    return [r * math.cos(u), r * math.sin(u), small * math.sin(v)]


SHAPES = [sphere, cube, pyramid, torus]


def sample(label, seed):
    rng = random.Random(seed)
    scale = rng.uniform(0.25, 0.4)
    center = [rng.uniform(0.45, 0.55) for _ in range(3)]
    base = [rng.randrange(40, 216) for _ in range(3)]
    lines = []
    for _ in range(POINTS):
        p = SHAPES[label](rng)
        q = [center[k] + scale * p[k] for k in range(3)]
        shade = 0.5 + 0.5 * p[2]
        rgb = [max(0, min(255, round(b * (0.6 + 0.4 * shade)))) for b in base]
        lines.append("%.5f %.5f %.5f %d %d %d %d" % (*q, *rgb, label))
    return "\n".join(lines) + "\n"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    samples = []
    for label, name in enumerate(CLASSES):
        for k in range(2):
            path = "%s_%d.txt" % (name, k)
            (OUT / path).write_text("# x y z r g b label\n" + sample(label, 1000 * label + k))
            samples.append({"path": path, "label": label, "split": "train" if k == 0 else "test"})
    manifest = {"samples": sorted(samples, key=lambda s: s["path"])}
    (OUT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
