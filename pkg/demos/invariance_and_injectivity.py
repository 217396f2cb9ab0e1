"""
What the sketch forgets, and what it keeps
==========================================

The sketch ignores rotation, additive shifts and the reverse-of-complement
map. Apart from those it separates functions, which can be checked by
brute force at small sizes.
"""

import numpy as np

from starsketch import equivalent, lag_homometric, roc, rotate, shift, sketch, verify_injectivity

rng = np.random.default_rng(0)
f = rng.random(9)
base = sketch(f).values

for name, g in [("rotate by 4", rotate(f, 4)), ("shift by 2.5", shift(f, 2.5)), ("RoC with c=1", roc(f, 1.0))]:
    print(f"{name:14s} max change {np.max(np.abs(sketch(g.values).values - base)):.1e}")

# two permutations with different difference multisets at lag 2
f5, g5 = (1, 3, 5, 4, 2), (3, 1, 4, 2, 5)
print("lag-homometric:", lag_homometric(f5, g5), " equivalent:", equivalent(f5, g5))
print("sketch distance:", np.linalg.norm(sketch(f5).values - sketch(g5).values))

# every ordered pair of permutations of 1..6
rep = verify_injectivity(6)
print(f"m=6: {rep.pairs} pairs, {rep.equivalent_pairs} equivalent, counterexample: {rep.counterexample}")

# random real functions in general position
rep = verify_injectivity(8, "random_general_position", trials=2000, seed=1)
print(f"m=8 random: {rep.pairs} pairs, {rep.homometric_pairs} homometric, ok={rep.ok}")
