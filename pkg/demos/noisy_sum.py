# A noisy addition w ~ x + y on a grid, evaluated in both argument orders.
#
# Each sum arrow puts weight exp(-(w - x - y)^2 / 2) on (x, y, w). The third
# arrow links the two results by equality, so the diagram asks whether
# x + y and y + x land on the same grid point.

import numpy as np

from omegarel import commutativity_degree, data_path, parse_spec

spec, D = parse_spec(data_path("gaussian.spec"))
grid = np.array(spec.domains["R"])
print("grid:", grid[0], "...", grid[-1], f"({len(grid)} points)")

report = commutativity_degree(D)
dist = report.distribution
print("degree over every (x, y):", report.degree)

# Pairs whose sum falls off the grid have no exact image, which is what drags
# the overall degree down. On pairs whose sum stays on the grid the two
# orders agree completely.
on_grid = [(x, y) for x in grid for y in grid if -2 <= x + y <= 2]
worst = min(float(dist[(x, y)]) for x, y in on_grid)
print("worst degree on on-grid sums:", worst)

off = [(x, y) for x in grid for y in grid if abs(x + y) > 2.0 + 1e-9]
print("off-grid pairs:", len(off), "example degree:", float(dist[off[0]]))
