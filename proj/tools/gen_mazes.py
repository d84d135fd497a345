#!/usr/bin/env python3
"""Regenerates data/mazes/*.json from cell-connectivity descriptions.

Mazes made of unit cells list the open passages between neighbouring cells;
every other shared cell edge becomes a wall segment. Collinear unit segments
are merged. The outer boundary is implicit (the simulator adds it).
"""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "mazes"


def merge(segments):
    """Merges touching collinear axis-aligned segments."""
    vertical = {}
    horizontal = {}
    for x1, y1, x2, y2 in segments:
        if x1 == x2:
            vertical.setdefault(x1, []).append((min(y1, y2), max(y1, y2)))
        else:
            horizontal.setdefault(y1, []).append((min(x1, x2), max(x1, x2)))
    out = []
    for x, spans in sorted(vertical.items()):
        for a, b in _merge_spans(spans):
            out.append([x, a, x, b])
    for y, spans in sorted(horizontal.items()):
        for a, b in _merge_spans(spans):
            out.append([a, y, b, y])
    return out


def _merge_spans(spans):
    spans = sorted(spans)
    merged = [list(spans[0])]
    for a, b in spans[1:]:
        if a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return merged


def cell_maze_walls(cols, rows, passages):
    open_edges = {frozenset(p) for p in passages}
    segs = []
    for c in range(cols):
        for r in range(rows):
            if c + 1 < cols and frozenset([(c, r), (c + 1, r)]) not in open_edges:
                segs.append((c + 1, r, c + 1, r + 1))
            if r + 1 < rows and frozenset([(c, r), (c, r + 1)]) not in open_edges:
                segs.append((c, r + 1, c + 1, r + 1))
    return merge(segs)


def tree_passages():
    right = [((4, 0), (5, 0)), ((5, 0), (6, 0))]
    right += [((5, r), (5, r + 1)) for r in range(6)]
    right += [((5, 2), (4, 2)), ((5, 2), (6, 2)), ((5, 5), (4, 5)), ((5, 5), (6, 5))]
    right += [((4, 2), (4, 1)), ((4, 2), (4, 3)), ((6, 2), (6, 1)), ((6, 2), (6, 3))]
    right += [((4, 5), (4, 4)), ((4, 5), (4, 6)), ((6, 5), (6, 4)), ((6, 5), (6, 6))]
    mirror = lambda cell: (6 - cell[0], cell[1])
    left = [(mirror(a), mirror(b)) for a, b in right]
    root = [((3, 0), (2, 0)), ((3, 0), (4, 0))]
    # The column above the root hangs off the top of the left subtree.
    spine = [((3, r), (3, r + 1)) for r in range(1, 6)] + [((3, 6), (2, 6))]
    return root + right + left + spine


MAZES = {
    "square": {
        "name": "square",
        "width": 5,
        "height": 5,
        "walls": [[2.5, 1.0, 2.5, 4.0]],
        "start_tile": [0.0, 2.0],
        "horizon": 50,
    },
    "bottleneck": {
        "name": "bottleneck",
        "width": 10,
        "height": 10,
        "walls": [
            [5.0, 0.0, 5.0, 2.0], [5.0, 3.0, 5.0, 7.0], [5.0, 8.0, 5.0, 10.0],
            [0.0, 5.0, 2.0, 5.0], [3.0, 5.0, 7.0, 5.0], [8.0, 5.0, 10.0, 5.0],
        ],
        "start_tile": [2.0, 2.0],
        "horizon": 50,
    },
    "corridor": {
        "name": "corridor",
        "width": 12,
        "height": 1,
        "walls": [],
        "start_tile": [5.5, 0.0],
        "horizon": 50,
    },
    "corridor_left": {
        "name": "corridor_left",
        "width": 12,
        "height": 1,
        "walls": [],
        "start_tile": [0.0, 0.0],
        "horizon": 50,
    },
    "tree": {
        "name": "tree",
        "width": 7,
        "height": 7,
        "walls": cell_maze_walls(7, 7, tree_passages()),
        "start_tile": [3.0, 0.0],
        "horizon": 50,
    },
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, spec in MAZES.items():
        (OUT / f"{name}.json").write_text(json.dumps(spec, indent=2) + "\n")


if __name__ == "__main__":
    main()
