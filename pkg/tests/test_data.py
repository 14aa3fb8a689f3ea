import numpy as np
import pytest

from muller.core import MullerParams, muller_forward
from muller.data import make_texture_dataset
from muller.resize import resize_bilinear


def nearest_mean_accuracy(train_x, train_y, test_x, test_y, n_classes):
    means = np.stack([train_x[train_y == c].mean(axis=0) for c in range(n_classes)])
    pred = np.argmin(((test_x[:, None, :] - means[None]) ** 2).sum(-1), axis=1)
    return float(np.mean(pred == test_y))


class TestDataset:
    def test_deterministic(self):
        a, b = make_texture_dataset(3, 40), make_texture_dataset(3, 40)
        np.testing.assert_array_equal(a.images, b.images)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_seed_changes_content(self):
        assert not np.array_equal(make_texture_dataset(0, 8).images, make_texture_dataset(1, 8).images)

    @pytest.mark.parametrize("n,k", [(40, 4), (41, 4), (10, 3), (7, 2)])
    def test_balanced_labels(self, n, k):
        ds = make_texture_dataset(0, n, n_classes=k)
        counts = np.bincount(ds.labels, minlength=k)
        assert counts.max() - counts.min() <= 1
        assert set(ds.labels.tolist()) <= set(range(k))

    def test_shapes(self):
        ds = make_texture_dataset(0, 5, src_h=32, src_w=48)
        assert ds.images.shape == (5, 32, 48, 1)
        assert len(ds) == 5

    def test_invalid(self):
        with pytest.raises(ValueError):
            make_texture_dataset(0, 10, n_classes=1)
        with pytest.raises(ValueError):
            make_texture_dataset(0, 0)

    def test_split(self):
        train, val = make_texture_dataset(0, 50).split(0.2)
        assert (len(train), len(val)) == (40, 10)

    def test_bilinear_attenuates_but_keeps_signal(self):
        ds = make_texture_dataset(0, 64)
        smooth = make_texture_dataset(0, 64, amplitude=0.0)
        texture = ds.images - smooth.images
        down = resize_bilinear(texture, 16, 16)
        ratio = down.std() / texture.std()
        assert 0.02 < ratio < 0.9


class TestBaselines:
    def test_variance_feature_near_chance(self):
        ds = make_texture_dataset(0, 2000)
        train, val = ds.split(0.2)
        feat = lambda imgs: imgs.reshape(len(imgs), -1).var(axis=1, keepdims=True)
        acc = nearest_mean_accuracy(feat(train.images), train.labels, feat(val.images), val.labels, 4)
        assert acc < 0.35

    def test_pipeline_beats_chance(self):
        # the detail-boosted 16x16 image carries the orientation signal
        ds = make_texture_dataset(0, 2000)
        train, val = ds.split(0.2)
        p = MullerParams(alpha=(0.0, -8.0), beta=(0.0, 0.0))

        def feat(imgs):
            z = muller_forward(imgs, p, 16, 16)
            mag = np.abs(np.fft.fft2(z[..., 0] - z[..., 0].mean(axis=(1, 2), keepdims=True)))
            return mag.reshape(len(imgs), -1)

        acc = nearest_mean_accuracy(feat(train.images), train.labels, feat(val.images), val.labels, 4)
        assert acc > 0.5
