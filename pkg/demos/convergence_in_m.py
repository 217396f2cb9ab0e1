"""
Convergence as the wedge count grows
====================================

Sketches of a smooth profile sampled at m points, compared with a much finer
reference at matching lags.
"""

from starsketch.experiments import convergence_study
from starsketch.synthesis import FourierProfile, random_spline_profile

ms = [32, 64, 128, 256, 512, 1024, 2048]

# a periodic cubic spline is C^2 but not smoother
res = convergence_study(random_spline_profile(seed=3), ms)
for m, d in res.rows():
    print(f"m={m:5d}  deviation {d:.3e}")
print(f"fitted order {res.order:.2f}")

# a trigonometric polynomial is sampled exactly once m exceeds its bandwidth
res = convergence_study(FourierProfile(0.7, (0.0, 0.1, 0.0), (0.05,)), [16, 32, 64])
print("trig profile deviations:", [f"{d:.1e}" for d in res.deviations], "order", res.order)
