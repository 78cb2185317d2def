"""
Losses and their analytic gradients
===================================

Each model variant pairs with a loss: sum of squared differences for the
regression targets (sdt, gauss, cpv), softmax cross entropy for 3label,
sigmoid binary cross entropy for affinities. The auxiliary vector loss is
an SSD masked to the ground-truth foreground and is added unweighted; only
the sdt main loss is scaled, by 100, to bring the two terms to a similar
magnitude.
"""

import numpy as np

from nuclei3d import (
    PhantomConfig,
    Volume,
    combined_loss,
    encode_bundle,
    encode_cpv,
    encode_three_label,
    generate_phantom,
    main_loss_weight,
    sigmoid_bce_loss,
    softmax_ce_loss,
    ssd_loss,
)

rng = np.random.default_rng(0)
labels, _ = generate_phantom(
    PhantomConfig(shape=(12, 20, 20), n_instances=3, radius_range=(2.5, 3.5), rng_seed=3)
)

# --- a perfect prediction has zero loss ------------------------------------
sdt_target = encode_bundle(labels, "sdt").volume
print("ssd at the optimum:", ssd_loss(sdt_target, sdt_target).value)

# --- classification losses take logits -------------------------------------
cls = encode_three_label(labels)
logits = Volume(rng.normal(size=(3,) + labels.shape))
res = softmax_ce_loss(logits, cls)
print(f"softmax CE on random logits: {res.value:.1f} over {cls.data.size} voxels")
print("  gradient sums to ~0 per voxel (softmax minus one-hot):",
      np.abs(res.gradient.data.sum(axis=0)).max() < 1e-12)

aff_target = encode_bundle(labels, "affinities").volume
res = sigmoid_bce_loss(Volume(rng.normal(size=aff_target.data.shape)), aff_target)
print(f"sigmoid BCE on random logits: {res.value:.1f}")

# --- gradients agree with finite differences -------------------------------
pred = rng.random((1, 4, 4, 4))
target = Volume(rng.random((1, 4, 4, 4)))
analytic = ssd_loss(Volume(pred), target).gradient.data
h = 1e-4
i = (0, 2, 1, 3)
bump = pred.copy()
bump[i] += h
hi = ssd_loss(Volume(bump), target).value
bump[i] -= 2 * h
lo = ssd_loss(Volume(bump), target).value
print(f"d(loss)/d(pred{list(i)}): analytic {analytic[i]:+.6f}, central FD {(hi - lo) / (2 * h):+.6f}")

# --- the combined main + auxiliary objective --------------------------------
cpv_target = encode_cpv(labels)
fg = Volume(labels.foreground().astype(np.float64)[np.newaxis])
cpv_pred = Volume(cpv_target.data + rng.normal(0, 0.1, size=cpv_target.data.shape))
main = ssd_loss(sdt_target, sdt_target)  # pretend the main head is perfect

for variant in ("sdt", "3label"):
    w = main_loss_weight(variant)
    total = combined_loss(main, cpv_pred, cpv_target, fg, main_weight=w)
    print(f"{variant}: main weight {w:g}, combined value {total.value:.2f} "
          f"(gradient spans {total.gradient.channels} channels)")
