#!/usr/bin/env python3
"""Generate the scattering fixture: (-1,1)^2 minus a polygonal disk.

Elements left of the line through (-0.5,-1) and (0,1) get region 1, the rest
region 2 (assigned by centroid). Outer boundary edges are tagged 1, the
polygonal disk boundary 2.
"""
import argparse

import numpy as np
from scipy.spatial import Delaunay


def build(h, center, radius):
    n_circle = max(16, int(np.ceil(2 * np.pi * radius / h)))
    n_side = int(round(2.0 / h))
    pts = []
    xs = np.linspace(-1.0, 1.0, n_side + 1)
    for j, y in enumerate(xs):
        # staggered rows give better-shaped triangles than a square lattice
        shift = 0.5 * h if j % 2 else 0.0
        for x in xs:
            xx = x + shift if 0 < j < n_side else x
            if xx > 1.0:
                continue
            pts.append((xx, y))
    for x in xs:
        if (x, -1.0) not in pts:
            pts.append((x, -1.0))
    pts = np.array(sorted(set(pts)))
    keep = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]) > radius + 0.6 * h
    pts = pts[keep]
    ang = 2 * np.pi * np.arange(n_circle) / n_circle
    circle = np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])
    pts = np.vstack([pts, circle])
    first_circle = len(pts) - n_circle

    tri = Delaunay(pts).simplices
    cent = pts[tri].mean(axis=1)
    inside = np.hypot(cent[:, 0] - center[0], cent[:, 1] - center[1]) < radius * np.cos(np.pi / n_circle)
    tri = tri[~inside]

    # orient counter-clockwise
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tri[det < 0] = tri[det < 0][:, [0, 2, 1]]
    det = np.abs(det)
    if det.min() < 1e-10:
        raise SystemExit("degenerate triangle in generated mesh")

    cent = pts[tri].mean(axis=1)
    # line through (-0.5,-1) and (0,1): x = -0.5 + (y + 1) / 4
    region = np.where(cent[:, 0] < -0.5 + (cent[:, 1] + 1.0) / 4.0, 1, 2)

    count = {}
    for t in tri:
        for k in range(3):
            e = tuple(sorted((int(t[(k + 1) % 3]), int(t[(k + 2) % 3]))))
            count[e] = count.get(e, 0) + 1
    tags = []
    for (i, j), n in count.items():
        if n != 1:
            continue
        on_circle = i >= first_circle and j >= first_circle
        on_outer = any(
            abs(pts[i, d] - s) < 1e-12 and abs(pts[j, d] - s) < 1e-12 for d in (0, 1) for s in (-1.0, 1.0)
        )
        if on_circle == on_outer:
            raise SystemExit(f"unexpected boundary edge ({i}, {j})")
        tags.append((i, j, 2 if on_circle else 1))
    return pts, tri, region, sorted(tags)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("output")
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--radius", type=float, default=0.25)
    p.add_argument("--center", type=float, nargs=2, default=(0.6, 0.0))
    args = p.parse_args()
    pts, tri, region, tags = build(args.h, args.center, args.radius)
    with open(args.output, "w") as f:
        f.write("maxlump-mesh 1\n")
        f.write(f"{len(pts)} {len(tri)}\n")
        for x, y in pts:
            f.write(f"v {float(x)!r} {float(y)!r}\n")
        for t, r in zip(tri, region):
            f.write(f"t {t[0]} {t[1]} {t[2]} {r}\n")
        for i, j, tag in tags:
            f.write(f"b {i} {j} {tag}\n")


if __name__ == "__main__":
    main()
