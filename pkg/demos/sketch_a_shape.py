"""
Sketching a star-shaped outline
===============================

From raw boundary points to a rotation-invariant sketch vector.
"""

import numpy as np

from starsketch import rotate_outline, sketch, sketch_distance, standardize, star_discretize

# a wobbly five-lobed blob, off-centre and at an arbitrary scale
theta = np.linspace(0, 2 * np.pi, 400, endpoint=False)
r = 3.0 + 0.8 * np.cos(5 * theta) + 0.3 * np.sin(2 * theta)
points = np.column_stack([r * np.cos(theta) + 10, r * np.sin(theta) - 4])

# centre on the area centroid and scale the farthest vertex to radius 1
shape = standardize(points)
print("recorded centroid", np.round(shape.centroid, 4), "scale", round(shape.scale, 4))

# radial extent in each of m wedges, then the sketch
m = 64
f = star_discretize(shape, m)
v = sketch(f)
print("radial function head:", np.round(f.values[:6], 4))
print("sketch head:         ", np.round(v.values[:6], 4))

# rotating the shape by whole wedges leaves the sketch untouched;
# other angles change it only through discretization
for turns in (3, 3.37):
    rotated = rotate_outline(shape, 2 * np.pi * turns / m)
    d = sketch_distance(v, sketch(star_discretize(rotated, m)))
    print(f"rotation by {turns} wedges -> sketch distance {d:.2e}")
