"""
Nearest-neighbour retrieval
===========================

Index 100 random shapes, then query each with a randomly rotated copy.
"""

import numpy as np

from starsketch import SketchIndex, knn, rotate_outline, sketch, star_discretize, synthesize_star_shape

m = 128
rng = np.random.default_rng(7)
shapes = {f"shape{i:03d}": synthesize_star_shape(seed=int(s)) for i, s in enumerate(rng.integers(0, 2**32, 100))}
index = SketchIndex.from_sketches((name, sketch(star_discretize(s, m))) for name, s in shapes.items())

hits = 0
for name, shape in shapes.items():
    query = sketch(star_discretize(rotate_outline(shape, rng.uniform(0, 2 * np.pi)), m))
    top = knn(index, query, 5)
    hits += top[0][0] == name
print(f"original ranked first for {hits}/100 rotated queries")

name, shape = next(iter(shapes.items()))
query = sketch(star_discretize(rotate_outline(shape, 1.0), m))
print(f"5 nearest to {name} rotated by 1 rad:")
for rank, (key, d) in enumerate(knn(index, query, 5), 1):
    print(f"  {rank}. {key}  {d:.4f}")
