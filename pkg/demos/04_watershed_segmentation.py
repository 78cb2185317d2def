"""
From predicted maps to instances: the watershed recipes
=======================================================

Every variant follows the same pipeline: build a topographic map and a
foreground mask, extract seed regions, priority-flood the map from the
seeds within the foreground, and optionally dilate the result once. The
per-variant recipes (thresholds, seed rules, dilation) below are the
validated settings used throughout this repo.

Here exact encoded targets stand in for network predictions; perturbed
targets simulate an imperfect network.
"""

import numpy as np

from nuclei3d import (
    PhantomConfig,
    PostprocConfig,
    build_topography,
    encode_bundle,
    evaluate,
    extract_seeds_main,
    generate_phantom,
    perturb_target,
    segment,
)

labels, _ = generate_phantom(
    PhantomConfig(shape=(32, 72, 72), n_instances=14, radius_range=(3.5, 5.5), rng_seed=99)
)

RECIPES = {
    "sdt": PostprocConfig("sdt", seed_threshold=-0.14, foreground_threshold=0.0, dilate_result=True),
    "3label": PostprocConfig("3label", seed_threshold=0.7, foreground_threshold=0.95),
    "affinities": PostprocConfig("affinities", seed_threshold=0.99, foreground_threshold=0.99, dilate_result=True),
}

print("=== noise-free round trip ===")
for variant, cfg in RECIPES.items():
    bundle = encode_bundle(labels, variant)
    topo = build_topography(bundle, cfg)
    seeds = extract_seeds_main(bundle, cfg)
    seg = segment(bundle, cfg)
    rep = evaluate(labels, seg=seg)
    print(f"{variant:11s} fg={int(topo.foreground.sum()):6d} voxels, "
          f"seeds={len(seeds.ids()):3d}, instances={len(seg.ids()):3d}, avAP={rep.av_ap:.3f}")

print()
print("=== simulated imperfect predictions (noise 0.05, smoothing 0.5) ===")
for variant, cfg in RECIPES.items():
    bundle = encode_bundle(labels, variant)
    pred = perturb_target(bundle, noise_sigma=0.05, smoothing_sigma=0.5, rng_seed=1)
    rep = evaluate(labels, seg=segment(pred, cfg))
    aps = " ".join(f"{rep.ap_per_iou[t]:.2f}" for t in (0.3, 0.5, 0.7))
    print(f"{variant:11s} avAP={rep.av_ap:.3f}  AP@0.3/0.5/0.7 = {aps}")

print()
print("The sdt and affinity recipes dilate once because their encodings run")
print("slightly small (zero-threshold foreground, pre-encoding erosion).")
print("The affinity recipe is the most threshold-sensitive: its 0.99 seed and")
print("foreground cuts sit right where smoothing pulls the binary targets.")
