#!/usr/bin/env python3
"""Channel [0, 2.2] x [0, 0.41] with a cylinder of radius 0.05 at (0.2, 0.2).

Writes an mhdmesh 1 file with tags wall=1, inflow=2, outflow=3, cylinder=4.
"""
import argparse
import math

import numpy as np
from scipy.spatial import Delaunay

L, H = 2.2, 0.41
CX, CY, R = 0.2, 0.2, 0.05
WALL, INFLOW, OUTFLOW, CYLINDER = 1, 2, 3, 4


def boundary_points(h, hc):
    nx = max(2, round(L / h))
    ny = max(2, round(H / h))
    pts = []
    pts += [(L * i / nx, 0.0) for i in range(nx)]
    pts += [(L, H * j / ny) for j in range(ny)]
    pts += [(L * (nx - i) / nx, H) for i in range(nx)]
    pts += [(0.0, H * (ny - j) / ny) for j in range(ny)]
    nc = max(8, round(2 * math.pi * R / hc))
    circle = [(CX + R * math.cos(2 * math.pi * k / nc), CY + R * math.sin(2 * math.pi * k / nc))
              for k in range(nc)]
    return pts, circle


def interior_points(h, hc, rng):
    pts = []
    # graded ring layers around the cylinder
    r, size = R, hc
    while r + size < R + 4 * h:
        r += size * math.sqrt(3) / 2
        n = max(8, round(2 * math.pi * r / size))
        shift = 0.5 * (len(pts) % 2)
        pts += [(CX + r * math.cos(2 * math.pi * (k + shift) / n),
                 CY + r * math.sin(2 * math.pi * (k + shift) / n)) for k in range(n)]
        size = min(h, size * 1.25)
    ring = r + 0.6 * h
    dy = h * math.sqrt(3) / 2
    ny = int(H / dy)
    for j in range(1, ny + 1):
        y = j * H / (ny + 1)
        off = 0.5 * h * (j % 2)
        x = off + h
        while x < L - 0.6 * h:
            if math.hypot(x - CX, y - CY) > ring:
                jx, jy = rng.uniform(-0.05, 0.05, 2) * h
                pts.append((x + jx, y + jy))
            x += h
    return [p for p in pts if 0.5 * h < p[0] < L - 0.5 * h and 0.5 * h < p[1] < H - 0.5 * h]


def on_circle(p):
    return abs(math.hypot(p[0] - CX, p[1] - CY) - R) < 1e-9


def side_tag(a, b):
    if on_circle(a) and on_circle(b):
        return CYLINDER
    if a[0] == 0.0 and b[0] == 0.0:
        return INFLOW
    if a[0] == L and b[0] == L:
        return OUTFLOW
    return WALL


def build(h, hc, seed):
    rng = np.random.default_rng(seed)
    outer, circle = boundary_points(h, hc)
    pts = np.array(outer + circle + interior_points(h, hc, rng))
    tri = Delaunay(pts).simplices
    keep = []
    for t in tri:
        c = pts[t].mean(axis=0)
        if math.hypot(c[0] - CX, c[1] - CY) < R:
            continue
        a, b, d = pts[t]
        if (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]) < 0:
            t = [t[0], t[2], t[1]]
        keep.append(list(t))
    used = sorted({v for t in keep for v in t})
    remap = {old: new for new, old in enumerate(used)}
    verts = pts[used]
    cells = [[remap[v] for v in t] for t in keep]

    count = {}
    for t in cells:
        for k in range(3):
            e = (t[k], t[(k + 1) % 3])
            key = tuple(sorted(e))
            count.setdefault(key, []).append(e)
    facets = []
    for key, edges in count.items():
        if len(edges) == 1:
            a, b = edges[0]
            facets.append((a, b, side_tag(tuple(verts[a]), tuple(verts[b]))))
    facets.sort()
    return verts, cells, facets


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=0.03, help="target edge length away from the cylinder")
    ap.add_argument("--hc", type=float, default=None, help="edge length on the cylinder")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("out")
    args = ap.parse_args()
    hc = args.hc if args.hc else args.h / 3
    verts, cells, facets = build(args.h, hc, args.seed)
    with open(args.out, "w") as f:
        f.write(f"# channel with cylinder, h={args.h}, hc={hc:.6g}\n")
        f.write("mhdmesh 1\n")
        f.write(f"vertices {len(verts)}\n")
        for x, y in verts:
            f.write(f"{x:.17g} {y:.17g}\n")
        f.write(f"cells {len(cells)}\n")
        for c in cells:
            f.write(f"{c[0]} {c[1]} {c[2]}\n")
        f.write(f"facets {len(facets)}\n")
        for a, b, tag in facets:
            f.write(f"{a} {b} {tag}\n")
    tags = {}
    for *_, t in facets:
        tags[t] = tags.get(t, 0) + 1
    print(f"{len(verts)} vertices, {len(cells)} cells, facets per tag {dict(sorted(tags.items()))}")


if __name__ == "__main__":
    main()
