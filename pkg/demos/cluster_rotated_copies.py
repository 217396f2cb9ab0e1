"""
Clustering rotated copies
=========================

Ten random shapes, nine rotated copies each, k-means with k=10. Accuracy is
the fraction of copies that land with their original.
"""

from starsketch.experiments import ExperimentConfig, run_cluster_experiment

ms = [16, 64, 256, 1024]

# rotations by whole wedges: the sketch is exactly invariant
snap = run_cluster_experiment(ExperimentConfig(m_values=ms, trials=3, snap_rotations=True))
# arbitrary angles, applied before discretization
cont = run_cluster_experiment(ExperimentConfig(m_values=ms, trials=6))

print("   m   snapped   continuous (mean +- std)")
for (m, s_mean, _), (_, c_mean, c_std) in zip(snap.table(), cont.table()):
    print(f"{m:4d}   {s_mean:7.3f}   {c_mean:.3f} +- {c_std:.3f}")
