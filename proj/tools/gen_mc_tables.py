#!/usr/bin/env python3
"""Generate the 256-case marching cubes tables used by include/voxsurf/mc_tables.hpp.

Corner/edge numbering follows the usual Lorensen/Bourke layout. A case bit is
set when the corner value is negative. Each cube face contributes segments
between its sign-change edges; on faces with four crossings the negative
corners are cut off, so two cells sharing a face always agree. Segments are
chained into loops and fan-triangulated.
"""
import sys

CORNERS = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
           (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
EDGES = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
         (0, 4), (1, 5), (2, 6), (3, 7)]
# Faces as corner loops, counter-clockwise seen from outside the cube.
FACES = [(0, 3, 2, 1),  # z = 0
         (4, 5, 6, 7),  # z = 1
         (0, 1, 5, 4),  # y = 0
         (3, 7, 6, 2),  # y = 1
         (0, 4, 7, 3),  # x = 0
         (1, 2, 6, 5)]  # x = 1


def edge_id(a, b):
    for i, (p, q) in enumerate(EDGES):
        if (p, q) == (a, b) or (p, q) == (b, a):
            return i
    raise ValueError((a, b))


def case_loops(case):
    neg = [(case >> c) & 1 == 1 for c in range(8)]
    succ = {}
    for face in FACES:
        crossings = []  # (edge, entering_negative)
        for i in range(4):
            a, b = face[i], face[(i + 1) % 4]
            if neg[a] != neg[b]:
                crossings.append((edge_id(a, b), neg[b]))
        # pair each +->- crossing with the next -->+ crossing (negative corner cut off)
        n = len(crossings)
        for i, (e, entering) in enumerate(crossings):
            if entering:
                for j in range(1, n):
                    e2, entering2 = crossings[(i + j) % n]
                    if not entering2:
                        succ[e] = e2
                        break
    loops = []
    seen = set()
    for start in sorted(succ):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        cur = succ[start]
        while cur != start:
            loop.append(cur)
            seen.add(cur)
            cur = succ[cur]
        loops.append(loop)
    return loops


def orient_sign():
    # Case 1: corner 0 negative. Triangle normal must point away from corner 0
    # (towards increasing field values).
    import itertools
    loop = case_loops(1)[0]
    mid = {e: tuple((CORNERS[a][k] + CORNERS[b][k]) / 2 for k in range(3))
           for e, (a, b) in enumerate(EDGES)}
    p0, p1, p2 = (mid[e] for e in loop[:3])
    u = [p1[k] - p0[k] for k in range(3)]
    v = [p2[k] - p0[k] for k in range(3)]
    n = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
    return 1 if sum(n) > 0 else -1


def main():
    flip = orient_sign() < 0
    edge_table = []
    tri_table = []
    for case in range(256):
        loops = case_loops(case)
        mask = 0
        tris = []
        for loop in loops:
            for e in loop:
                mask |= 1 << e
            for i in range(1, len(loop) - 1):
                t = [loop[0], loop[i], loop[i + 1]]
                if flip:
                    t = [t[0], t[2], t[1]]
                tris.extend(t)
        assert len(tris) <= 15, (case, len(tris))
        edge_table.append(mask)
        tri_table.append(tris + [-1] * (16 - len(tris)))
    out = sys.stdout
    out.write("// Generated by tools/gen_mc_tables.py. Do not edit.\n")
    out.write("#pragma once\n\n#include <array>\n#include <cstdint>\n\n")
    out.write("namespace voxsurf::mc {\n\n")
    out.write("inline constexpr std::array<std::uint16_t, 256> kEdgeTable = {\n")
    for i in range(0, 256, 8):
        out.write("    " + ", ".join("0x%03x" % m for m in edge_table[i:i + 8]) + ",\n")
    out.write("};\n\n")
    out.write("inline constexpr std::array<std::array<std::int8_t, 16>, 256> kTriTable = {{\n")
    for row in tri_table:
        out.write("    {" + ", ".join("%d" % x for x in row) + "},\n")
    out.write("}};\n\n}  // namespace voxsurf::mc\n")


if __name__ == "__main__":
    main()
