#!/usr/bin/env python3
"""Regenerates the shipped fixture maps under crates/core/fixtures/."""
import os
import random

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "fixtures")


class Grid:
    def __init__(self, cols, rows, cell):
        self.cols, self.rows, self.cell = cols, rows, cell
        self.b = [[False] * cols for _ in range(rows)]

    def block(self, x0, y0, x1, y1, value=True):
        """Blocks the world-space box [x0,x1) x [y0,y1) (meters, y up)."""
        c0, c1 = int(x0 / self.cell), int(x1 / self.cell)
        H = self.rows * self.cell
        r0, r1 = int((H - y1) / self.cell), int((H - y0) / self.cell)
        for r in range(max(r0, 0), min(r1, self.rows)):
            for c in range(max(c0, 0), min(c1, self.cols)):
                self.b[r][c] = value

    def clear(self, x0, y0, x1, y1):
        self.block(x0, y0, x1, y1, False)

    def write(self, name):
        w, h = self.cols * self.cell, self.rows * self.cell
        with open(os.path.join(OUT, name + ".map"), "w") as f:
            f.write(f"map {w:g} {h:g} {self.cell:g}\n")
            for row in self.b:
                f.write("".join("#" if v else "." for v in row) + "\n")


def corridor10():
    g = Grid(10, 10, 1)
    for r in range(10):
        if r != 5:
            g.b[r][5] = True
    g.write("corridor10")


def bugtrap():
    g = Grid(50, 50, 1)
    # box around (25,25), open on the far (right) side
    g.block(15, 15, 36, 16)
    g.block(15, 34, 36, 35)
    g.block(15, 15, 16, 35)
    g.block(35, 15, 36, 23)
    g.block(35, 27, 36, 35)
    # inward lips around the mouth
    g.block(30, 22, 36, 23)
    g.block(30, 27, 36, 28)
    g.write("bugtrap")


def empty():
    Grid(100, 100, 1).write("empty")


def corridor():
    g = Grid(100, 100, 1)
    # three bands of rooms separated by thick walls with narrow doors
    for y in (33, 66):
        g.block(0, y, 100, y + 2)
    for x in (33, 66):
        g.block(x, 0, x + 2, 100)
    doors = [
        # horizontal walls (x range, wall y)
        (8, 33), (52, 33), (86, 66), (20, 66), (50, 66),
    ]
    for x, y in doors:
        g.clear(x, y, x + 4, y + 2)
    vdoors = [
        (33, 12), (66, 48), (33, 80), (66, 6), (33, 50), (66, 84),
    ]
    for x, y in vdoors:
        g.clear(x, y, x + 2, y + 4)
    # a long internal baffle in the centre room
    g.block(42, 40, 58, 42)
    g.write("corridor")


def maze():
    rnd = random.Random(20)
    n, cell, wall = 7, 14, 2
    g = Grid(100, 100, 1)
    # start fully walled: every cell boundary present
    for k in range(n + 1):
        p = k * cell
        g.block(p, 0, p + wall, 100)
        g.block(0, p, 100, p + wall)
    seen = {(0, 0)}
    stack = [(0, 0)]
    openings = []
    while stack:
        cx, cy = stack[-1]
        nbrs = [(cx + dx, cy + dy) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if 0 <= cx + dx < n and 0 <= cy + dy < n and (cx + dx, cy + dy) not in seen]
        if not nbrs:
            stack.pop()
            continue
        nx, ny = rnd.choice(nbrs)
        openings.append(((cx, cy), (nx, ny)))
        seen.add((nx, ny))
        stack.append((nx, ny))
    # a few extra openings make loops
    extra = 0
    while extra < 6:
        cx, cy = rnd.randrange(n - 1), rnd.randrange(n)
        e = ((cx, cy), (cx + 1, cy))
        if e not in openings and (e[1], e[0]) not in openings:
            openings.append(e)
            extra += 1
    for (ax, ay), (bx, by) in openings:
        if ax != bx:
            x = max(ax, bx) * cell
            y = ay * cell + wall
            g.clear(x, y, x + wall, y + cell - wall)
        else:
            y = max(ay, by) * cell
            x = ax * cell + wall
            g.clear(x, y, x + cell - wall, y + wall)
    g.write("maze")


def office():
    g = Grid(100, 100, 2)  # 200 m x 200 m
    W = 200
    g.block(0, 0, W, W)
    # hallway network: three horizontal, three vertical, 8 m wide
    hh = [(20, 28), (96, 104), (172, 180)]
    vv = [(20, 28), (96, 104), (172, 180)]
    for y0, y1 in hh:
        g.clear(8, y0, 192, y1)
    for x0, x1 in vv:
        g.clear(x0, 8, x1, 192)
    # rooms in each block between hallways
    xs = [(30, 94), (106, 170)]
    ys = [(30, 94), (106, 170)]
    rnd = random.Random(3)
    for bx0, bx1 in xs:
        for by0, by1 in ys:
            # 2 x 2 rooms per block, separated by 2 m walls
            mx = (bx0 + bx1) // 2
            my = (by0 + by1) // 2
            rooms = [(bx0, mx - 1, by0, my - 1), (mx + 1, bx1, by0, my - 1),
                     (bx0, mx - 1, my + 1, by1), (mx + 1, bx1, my + 1, by1)]
            for (x0, x1, y0, y1) in rooms:
                g.clear(x0, y0, x1, y1)
            # doors: each room opens onto its nearest hallway, plus one
            # internal door between neighbouring rooms
            for i, (x0, x1, y0, y1) in enumerate(rooms):
                d = rnd.randrange(6, 20)
                if i in (0, 1):
                    g.clear(x0 + d, y0 - 2, x0 + d + 4, y0)  # down
                else:
                    g.clear(x0 + d, y1, x0 + d + 4, y1 + 2)  # up
            g.clear(mx - 1, by0 + 10, mx + 1, by0 + 14)
    # outer ring rooms along the west and east edges behind the vertical halls
    for y0, y1 in ((30, 94), (106, 170)):
        g.clear(8, y0, 18, y1)
        g.clear(18, y0 + 20, 20, y0 + 24)
        g.clear(182, y0, 192, y1)
        g.clear(180, y1 - 24, 182, y1 - 20)
    g.write("office")


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    corridor10()
    bugtrap()
    empty()
    corridor()
    maze()
    office()
