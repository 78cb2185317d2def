"""
Joint checkpoint and threshold selection
========================================

Training checkpoints and post-processing thresholds interact, so they are
validated jointly: every (checkpoint x grid point) combination is scored on
held-out pairs and the argmax wins. With training out of scope, checkpoints
are modeled as alternative prediction volumes; here, perturbations of
increasing strength play that role.

The same sweep is available from the shell as ``nuclei3d sweep spec.yaml
out.yaml``.
"""

import tempfile
from pathlib import Path

import numpy as np

from nuclei3d import (
    PhantomConfig,
    encode_bundle,
    generate_phantom,
    load_sweep_spec,
    perturb_target,
    run_sweep,
    write_report,
    write_volume,
)

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    # two validation volumes, three surrogate checkpoints each
    checkpoints = {name: [] for name in ("early", "middle", "late")}
    noise_for = {"early": 0.6, "middle": 0.25, "late": 0.05}
    for idx, seed in enumerate((31, 32)):
        labels, _ = generate_phantom(PhantomConfig(
            shape=(24, 44, 44), n_instances=7, radius_range=(3.0, 4.5), rng_seed=seed,
        ))
        write_volume(tmp / f"gt_{idx}.v3dr", labels)
        bundle = encode_bundle(labels, "3label")
        for name, noise in noise_for.items():
            pred = perturb_target(bundle, noise, 0.8, rng_seed=idx)
            write_volume(tmp / f"{name}_{idx}.v3dr", pred.volume.astype(np.float32))
            checkpoints[name].append({"gt": f"gt_{idx}.v3dr", "pred": f"{name}_{idx}.v3dr"})

    spec = {
        "variant": "3label",
        "objective": "seg_avap",
        "checkpoints": [{"name": n, "pairs": p} for n, p in checkpoints.items()],
        "grid": {
            "seed_source": ["main"],
            "seed_threshold": [0.5, 0.7, 0.8],
            "foreground_threshold": [0.5, 0.95],
            "cpv_seed_threshold": [0],
            "dilate": [False],
        },
    }
    write_report(tmp / "spec.yaml", spec)

    result = run_sweep(load_sweep_spec(tmp / "spec.yaml"))

    print(f"{len(result.table)} candidates evaluated "
          f"(3 checkpoints x {len(result.table) // 3} grid points)")
    print()
    print("checkpoint  seed_t  fg_t   score")
    for row in result.table:
        marker = "  <- selected" if row == dict(
            (k, result.selected[k]) for k in row) else ""
        print(f"{row['checkpoint']:10s}  {row['seed_threshold']:.2f}   "
              f"{row['foreground_threshold']:.2f}   {row['score']:.3f}{marker}")
    print()
    print("selected:", {k: result.selected[k] for k in
                        ("checkpoint", "seed_threshold", "foreground_threshold", "score")})
