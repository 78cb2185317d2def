"""
Seeding the watershed from center-point-vector votes
====================================================

The auxiliary vector field can do more than regularize training: displacing
each foreground voxel by its predicted vector and counting how many voxels
land on each target turns the vector field into a height map whose peaks
mark instance centers. Thresholding that counter gives seed regions.

Vote counts aggregate evidence from every foreground voxel of an instance,
so a weakly predicted instance keeps its seed even when its interior
probabilities dip below the usual seed threshold. On a crowded phantom this
shows up directly as fewer false merges.
"""

import numpy as np

from nuclei3d import (
    PhantomConfig,
    PostprocConfig,
    Volume,
    accumulate_votes,
    build_topography,
    encode_bundle,
    generate_phantom,
    perturb_target,
    segment,
    segmentation_ap,
)

labels, _ = generate_phantom(
    PhantomConfig(shape=(24, 48, 48), n_instances=30, radius_range=(2.5, 4.5),
                  allow_touching=True, min_gap=0.0, rng_seed=77)
)
sizes = np.bincount(labels.labels.ravel())[1:]
median_volume = float(np.median(sizes))
bundle = encode_bundle(labels, "3label", with_cpv=True)

# --- exact vectors: every voxel of an instance votes for one voxel ---------
fg = labels.foreground()
votes = accumulate_votes(Volume(bundle.volume.data[3:]), fg)
print(f"exact vectors: {int(fg.sum())} voters, peak count {votes.max()} "
      f"(= largest instance), {int((votes > 0).sum())} voxels receive votes")

# --- perturbed vectors: votes spread but still pile up near centers --------
pred = perturb_target(bundle, noise_sigma=0.1, smoothing_sigma=1.0, rng_seed=0)
fg_pred = build_topography(pred, PostprocConfig("3label", foreground_threshold=0.5)).foreground
votes = accumulate_votes(Volume(pred.volume.data[3:]), fg_pred)
print(f"perturbed:     peak count {votes.max()}, median instance volume {median_volume:.0f}")

# --- main-channel vs vote seeding on the same perturbed prediction ---------
main_cfg = PostprocConfig("3label", seed_threshold=0.7, foreground_threshold=0.5)
cpv_cfg = PostprocConfig("3label", seed_source="cpv",
                         cpv_seed_threshold=0.05 * median_volume,
                         foreground_threshold=0.5)
print()
print("seeding comparison over 5 perturbation draws (AP@0.5 / instance count):")
for seed in range(5):
    pred = perturb_target(bundle, 0.1, 1.0, rng_seed=seed)
    seg_main = segment(pred, main_cfg)
    seg_cpv = segment(pred, cpv_cfg)
    ap_main = segmentation_ap(labels, seg_main, 0.5)[0]
    ap_cpv = segmentation_ap(labels, seg_cpv, 0.5)[0]
    print(f"  draw {seed}: main {ap_main:.3f} ({len(seg_main.ids()):2d} inst)   "
          f"votes {ap_cpv:.3f} ({len(seg_cpv.ids()):2d} inst of {len(labels.ids())})")
print()
print("Main seeding loses the weakest instances (their interior probability")
print("never reaches the seed threshold) and they merge into touching")
print("neighbors; vote accumulation keeps one seed per instance.")
