"""Zero-level curves of sampled fields, with SVG and CSV output."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

SNAP = 1e-12  # relative magnitude below which samples count as exact zeros


@dataclass
class NodalSet:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(x), len(y))
    polylines: list[np.ndarray]

    @property
    def n_curves(self) -> int:
        return len(self.polylines)


def cell_centered_axis(length: float, n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) * (length / n)


def _edge_point(p, q, vp, vq):
    if vp == vq:
        return 0.5 * (p + q)
    t = vp / (vp - vq)
    return p + t * (q - p)


def marching_squares(x: np.ndarray, y: np.ndarray, f: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Segments of ``f = 0`` with linear interpolation along cell edges.

    Samples are classified as ``f >= 0`` / ``f < 0``. Saddle cells are
    resolved by the sign of the cell-centre average.
    """
    inside = f >= 0
    segs = []
    nx, ny = f.shape
    for i in range(nx - 1):
        for j in range(ny - 1):
            c = (inside[i, j], inside[i + 1, j], inside[i + 1, j + 1], inside[i, j + 1])
            if all(c) or not any(c):
                continue
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            pts = []
            for e in range(4):
                a, b = corners[e], corners[(e + 1) % 4]
                if inside[a] != inside[b]:
                    P = np.array([x[a[0]], y[a[1]]])
                    Q = np.array([x[b[0]], y[b[1]]])
                    pts.append((e, _edge_point(P, Q, f[a], f[b])))
            if len(pts) == 2:
                segs.append((pts[0][1], pts[1][1]))
            else:
                centre = 0.25 * (f[i, j] + f[i + 1, j] + f[i + 1, j + 1] + f[i, j + 1])
                # edges 0..3 each cross once; pair around the corner that shares the centre's side
                if (centre >= 0) == c[0]:
                    pairs = ((0, 1), (2, 3))
                else:
                    pairs = ((3, 0), (1, 2))
                d = dict(pts)
                segs.extend((d[a], d[b]) for a, b in pairs)
    return segs


def stitch(segments, digits: int = 10) -> list[np.ndarray]:
    """Join segments sharing endpoints into polylines; closed curves repeat their first point."""
    key = lambda p: (round(float(p[0]), digits), round(float(p[1]), digits))
    segs = [(a, b) for a, b in segments if key(a) != key(b)]
    ends: dict = {}
    for n, (a, b) in enumerate(segs):
        ends.setdefault(key(a), []).append(n)
        ends.setdefault(key(b), []).append(n)
    used = np.zeros(len(segs), dtype=bool)

    def walk(start_point, seg):
        line = [start_point]
        p = start_point
        while seg is not None:
            used[seg] = True
            a, b = segs[seg]
            q = b if key(a) == key(p) else a
            line.append(q)
            p = q
            seg = next((s for s in ends[key(p)] if not used[s]), None)
        return line

    lines = []
    # open curves first, starting at endpoints of odd degree
    for k in sorted(ends, key=lambda k: k):
        if len(ends[k]) % 2 == 1:
            for s in ends[k]:
                if not used[s]:
                    a, b = segs[s]
                    start = a if key(a) == k else b
                    lines.append(walk(start, s))
    for s in range(len(segs)):
        if not used[s]:
            lines.append(walk(segs[s][0], s))
    return [np.array(l) for l in lines]


def nodal_set(func, lengths: tuple[float, float], resolution: int) -> NodalSet:
    """Sample ``func(X, Y)`` on a cell-centred grid and extract its zero set."""
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    x = cell_centered_axis(lengths[0], resolution)
    y = cell_centered_axis(lengths[1], resolution)
    X, Y = np.meshgrid(x, y, indexing="ij")
    f = np.real(func(X, Y)).astype(float)
    scale = np.abs(f).max()
    f = np.where(np.abs(f) <= SNAP * scale, 0.0, f) if scale > 0 else f
    if scale == 0:
        return NodalSet(x, y, f, [])
    return NodalSet(x, y, f, stitch(marching_squares(x, y, f)))


def _g(v: float) -> str:
    s = f"{v:.9g}"
    return "0" if s == "-0" else s


def to_svg(ns: NodalSet, lengths: tuple[float, float], width: int = 400) -> str:
    """Polylines in a box of the given lengths; the y axis points up."""
    Lx, Ly = lengths
    scale = width / Lx
    height = Ly * scale
    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_g(width)}" height="{_g(height)}" '
              f'viewBox="0 0 {_g(width)} {_g(height)}">\n')
    out.write(f'<rect x="0" y="0" width="{_g(width)}" height="{_g(height)}" fill="none" stroke="black"/>\n')
    for line in ns.polylines:
        pts = " ".join(f"{_g(px * scale)},{_g(height - py * scale)}" for px, py in line)
        out.write(f'<polyline points="{pts}" fill="none" stroke="blue" stroke-width="1.5"/>\n')
    out.write("</svg>\n")
    return out.getvalue()


def grid_csv(ns: NodalSet) -> str:
    out = io.StringIO()
    out.write("x,y,value\n")
    for i, xv in enumerate(ns.x):
        for j, yv in enumerate(ns.y):
            out.write(f"{xv:.17g},{yv:.17g},{ns.values[i, j]:.17g}\n")
    return out.getvalue()
