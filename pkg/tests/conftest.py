import numpy as np
import pytest

from nuclei3d import LabelVolume


def random_blob_labels(rng, shape, n_blobs, rmax=3):
    """Random non-overlapping blobby instances; later blobs skip claimed voxels."""
    lab = np.zeros(shape, dtype=np.int32)
    next_id = 1
    for _ in range(n_blobs):
        c = [rng.integers(0, s) for s in shape]
        r = rng.integers(1, rmax + 1, size=3)
        z = np.arange(shape[0])[:, None, None]
        y = np.arange(shape[1])[None, :, None]
        x = np.arange(shape[2])[None, None, :]
        inside = (
            ((z - c[0]) / r[0]) ** 2 + ((y - c[1]) / r[1]) ** 2 + ((x - c[2]) / r[2]) ** 2
        ) <= 1.0
        inside &= lab == 0
        if inside.any():
            lab[inside] = next_id
            next_id += 1
    return lab


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def blobs(rng):
    lab = random_blob_labels(rng, (10, 12, 11), 5)
    assert lab.max() >= 2
    return LabelVolume(lab)
