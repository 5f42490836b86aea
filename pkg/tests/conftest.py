import numpy as np
import pytest


def make_blobs(rng, centers, per_cluster, spread):
    """Well-separated Gaussian blobs with labels, rows in cluster order."""
    centers = np.asarray(centers, dtype=float)
    points = []
    labels = []
    for i, c in enumerate(centers):
        points.append(c[None, :] + spread * rng.standard_normal((per_cluster, len(c))))
        labels.extend([i] * per_cluster)
    return np.vstack(points), np.array(labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
