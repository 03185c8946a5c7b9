# -*- coding: utf-8 -*-
# FaciesGen trains neural parametrizations of channelized subsurface images.
# Copyright (C) 2019 - 2026 The FaciesGen Development Team; all rights
# reserved unless otherwise stated.
#
# This file is part of FaciesGen.
#
# FaciesGen is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 3
# of the License, or (at your option) any later version.
#
# FaciesGen is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program; if not, see <http://www.gnu.org/licenses/>
#
# --


import os

import numpy as np
import pytest
from scipy.stats import chisquare, multivariate_normal, norm

from faciesgen.test.common import BaseTestCase, tmpdir
from faciesgen.io import FileFormatError
from faciesgen import *


def direct_log_density(x, gm):
    total = np.zeros(len(x))
    for weight, mean, cov in zip(gm.weights, gm.means, gm.covariances):
        total += weight*multivariate_normal(mean, cov).pdf(x).reshape(-1)
    return np.log(total)


class ChannelTestCase(BaseTestCase):
    def test_binary_values(self):
        dataset = synth_channels(10, 64, 64, 1)
        assert dataset.images.dtype == np.float32
        assert dataset.shape == (64, 64)
        assert len(dataset) == 10
        assert np.isin(dataset.images, (-1.0, 1.0)).all()

    def test_channel_fraction(self):
        fraction = synth_channels(100, 64, 64, 2).channel_fraction
        assert 0.1 <= fraction <= 0.5

    def test_deterministic(self):
        self.assertArraysEqual(synth_channels(3, 32, 48, 5).images, synth_channels(3, 32, 48, 5).images)
        assert not (synth_channels(3, 32, 48, 5).images == synth_channels(3, 32, 48, 6).images).all()
        # a prefix of the dataset does not depend on the count
        self.assertArraysEqual(synth_channels(2, 32, 48, 5).images, synth_channels(3, 32, 48, 5).images[:2])

    def test_params(self):
        thin = synth_channels(20, 32, 32, 3, ChannelParams(1, 1, 1, 1)).channel_fraction
        thick = synth_channels(20, 32, 32, 3, ChannelParams(4, 4, 5, 5)).channel_fraction
        assert thin < thick
        for args in (0, 1), (3, 2), (1, 2, 0, 1), (1, 2, 3, 2), (1, 2, 3, 5, 1.5):
            with pytest.raises(ValueError):
                ChannelParams(*args)

    def test_too_small(self):
        with pytest.raises(ShapeError):
            synth_channels(1, 8, 64, 1)

    def test_reference_image(self):
        reference = reference_image()
        assert reference.shape == (256, 256)
        self.assertArraysEqual(reference, reference_image())
        fraction = (reference > 0).mean()
        assert 0.1 <= fraction <= 0.6


class DatasetTestCase(BaseTestCase):
    def test_validation(self):
        with pytest.raises(ShapeError):
            Dataset(np.zeros((4, 4)))
        with pytest.raises(UsageError):
            Dataset(np.zeros((0, 4, 4)))
        with pytest.raises(DomainError):
            Dataset(np.full((1, 4, 4), 1.5))
        assert Dataset(np.zeros((2, 1, 4, 4))).shape == (4, 4)

    def test_batch(self):
        dataset = synth_channels(5, 16, 16, 7)
        batch = dataset.batch([4, 0])
        assert batch.shape == (2, 1, 16, 16)
        assert not batch.requires_grad
        self.assertArraysEqual(batch.data[0, 0], dataset.images[4])

    def test_save_load(self):
        dataset = synth_channels(4, 16, 32, 8)
        with tmpdir(__name__, 'test_save_load') as dn:
            fn = os.path.join(dn, 'train.geod')
            save_dataset(dataset, fn)
            assert os.path.getsize(fn) == 20 + 4*4*16*32
            loaded = load_dataset(fn)
            self.assertArraysEqual(loaded.images, dataset.images)
            self.assertArraysEqual(load_dataset(fn, slice(1, 3)).images, dataset.images[1:3])
            with pytest.raises(FileFormatError):
                load_dataset(fn, slice(4, 6))


class PatchTestCase(BaseTestCase):
    def test_full_size(self):
        reference = reference_image(64)
        patches = sample_patches(reference, 3, 64, 64, 1)
        for image in patches.images:
            self.assertArraysEqual(image, reference)

    def test_inside_and_uniform(self):
        reference = np.random.default_rng(2).uniform(-1, 1, (40, 50)).astype(np.float32)
        patches = sample_patches(reference, 1000, 20, 25, 3)
        assert patches.images.shape == (1000, 20, 25)
        rng = RandomStreams(3).generator('patches')
        rows = rng.integers(0, 21, 1000)
        cols = rng.integers(0, 26, 1000)
        for image, r, c in list(zip(patches.images, rows, cols))[:50]:
            self.assertArraysEqual(image, reference[r:r+20, c:c+25])
        quadrants = np.bincount(2*(rows > 10) + (cols > 12), minlength=4)
        expected = 1000*np.array([11*13, 11*13, 10*13, 10*13])/(21.0*26)
        assert chisquare(quadrants, expected).pvalue > 0.01

    def test_too_large(self):
        with pytest.raises(ShapeError):
            sample_patches(np.zeros((32, 32)), 2, 64, 64, 0)


class MixtureTestCase(BaseTestCase):
    def test_standard_normal(self):
        gm = GaussianMixture([1.0], [0.0], [1.0])
        value = mixture_log_density(np.zeros((1, 1)), gm).item()
        assert abs(value + 0.5*np.log(2*np.pi)) < 1e-12
        assert abs(value + 0.9189385332) < 1e-10

    def test_direct_sum_1d(self):
        gm = GaussianMixture.three_component_1d()
        x = np.linspace(-5, 9, 57)[:, None]
        self.assertArraysAlmostEqual(mixture_log_density(x, gm).data, direct_log_density(x, gm), 1e-10, doabs=True)

    def test_direct_sum_2d(self):
        gm = GaussianMixture.three_component_2d()
        x = np.random.default_rng(4).normal(0, 2, (40, 2))
        self.assertArraysAlmostEqual(mixture_log_density(x, gm).data, direct_log_density(x, gm), 1e-10, doabs=True)

    def test_dominant_component(self):
        gm = GaussianMixture.three_component_1d()
        third = np.log(gm.weights[2]) + norm.logpdf(6.0, 6.0, 0.5)
        total = mixture_log_density(np.array([[6.0]]), gm).item()
        assert np.exp(third - total) > 0.95

    def test_gradient(self):
        for gm in GaussianMixture.three_component_1d(), GaussianMixture.three_component_2d():
            x = Tensor(np.random.default_rng(5).normal(1, 2, (6, gm.dim)), requires_grad=True, dtype=np.float64)
            check_gradient(lambda: reduce(mixture_log_density(x, gm), 'sum'), [x], epsilon=1e-6)

    def test_zero_weights(self):
        gm = GaussianMixture([1.0, 0.0, 0.0], [-1.0, 2.0, 6.0], [1.0, 4.0, 0.25])
        x = np.linspace(-3, 8, 12)[:, None]
        single = GaussianMixture([1.0], [-1.0], [1.0])
        self.assertArraysAlmostEqual(mixture_log_density(x, gm).data, mixture_log_density(x, single).data, 1e-12)
        points = mixture_sample(gm, 1000, 6)
        # only the first component is ever drawn
        assert abs(points.mean() + 1.0) < 0.15
        assert abs(points.std() - 1.0) < 0.1

    def test_validation(self):
        with pytest.raises(ValueError):
            GaussianMixture([0.5, 0.6], [0.0, 1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            GaussianMixture([-0.5, 1.5], [0.0, 1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            GaussianMixture([1.0], [[0.0, 0.0]], [[[1.0, 0.0], [0.5, 1.0]]])
        with pytest.raises(ValueError):
            GaussianMixture([1.0], [[0.0, 0.0]], [[[1.0, 2.0], [2.0, 1.0]]])
        with pytest.raises(ShapeError):
            GaussianMixture([0.5, 0.5], [0.0, 1.0, 2.0], [1.0, 1.0])
        with pytest.raises(ShapeError):
            mixture_log_density(np.zeros((3, 2)), GaussianMixture.three_component_1d())

    def test_moments(self):
        gm = GaussianMixture.three_component_1d()
        assert abs(gm.mean[0] - 7/3.0) < 1e-12
        expected_var = (1 + 4 + 0.25)/3.0 + ((-1)**2 + 2**2 + 6**2)/3.0 - (7/3.0)**2
        assert abs(gm.covariance[0, 0] - expected_var) < 1e-12

    def test_sample_mean(self):
        for gm in GaussianMixture.three_component_1d(), GaussianMixture.three_component_2d():
            count = 100000
            points = mixture_sample(gm, count, 7)
            assert points.shape == (count, gm.dim)
            sigma = np.sqrt(np.diag(gm.covariance))
            assert (abs(points.mean(axis=0) - gm.mean) < 4*sigma/np.sqrt(count)).all()
            self.assertArraysEqual(points[:10], mixture_sample(gm, count, 7)[:10])

    def test_scores(self):
        gm = GaussianMixture.three_component_1d()
        good = mixture_sample(gm, 100000, 8)
        bad = np.random.default_rng(9).normal(2, 1, (100000, 1))
        assert histogram_js(good, gm) < 1e-3
        assert histogram_js(bad, gm) > 0.05
        with pytest.raises(UsageError):
            histogram_js(np.full((10, 1), 100.0), gm)
        gm2 = GaussianMixture.three_component_2d()
        self.assertArraysEqual(assignment_fractions(gm2.means, gm2), np.ones(3)/3)
        assert histogram_js(gm2.means, gm2) == 0.0
