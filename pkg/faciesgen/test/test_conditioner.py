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


import numpy as np
import pytest
from scipy.special import digamma

from faciesgen.test.common import BaseTestCase, small_generator, small_discriminator, \
    small_inference, slow
from faciesgen import *
from faciesgen.io import load_observations


def quadratic_target(center):
    # L(x) = 0.5*|x - center|^2, a standard normal shifted to center
    return lambda x: scale(reduce(elementwise(add_bias(x, -np.asarray(center, dtype=float)), 'square'),
                                  'sum', axis=1), 0.5)


def tiny_sampler_config(**kwargs):
    settings = dict(batch_size=32, lr=1e-3, max_iters=5, seed=2, nw=2, hidden=8, depth=1, window=0)
    settings.update(kwargs)
    return SamplerConfig(**settings)


class ObservationsTestCase(BaseTestCase):
    def test_from_facies(self):
        obs = Observations.from_facies([12, 12, 12], [12, 25, 38], [0, 0, 1])
        assert len(obs) == 3
        self.assertArraysEqual(obs.values, np.array([-1.0, -1.0, 1.0]))
        assert obs.shape == (64, 64)

    def test_invalid(self):
        with pytest.raises(UsageError):
            Observations([64], [0], [1.0])
        with pytest.raises(UsageError):
            Observations([0], [-1], [1.0])
        with pytest.raises(UsageError):
            Observations([0], [0], [0.5])
        with pytest.raises(UsageError):
            Observations([3, 3], [4, 4], [1.0, -1.0])
        with pytest.raises(UsageError):
            Observations.from_facies([0], [0], [2])
        with pytest.raises(ShapeError):
            Observations([0, 1], [0], [1.0])

    def test_small_grid(self):
        obs = Observations([15], [15], [1.0], (16, 16))
        assert obs.shape == (16, 16)
        with pytest.raises(UsageError):
            Observations([16], [0], [1.0], (16, 16))


class PosteriorTestCase(BaseTestCase):
    def test_prior_only(self):
        generator = small_generator()
        spec = PosteriorSpec(generator, Observations([], [], [], (16, 16)), lam=0.1)
        z = Tensor([[1.0, 2.0, 0.0, -1.0], [0.0, 0.0, 0.0, 0.0]], dtype=np.float64)
        self.assertArraysAlmostEqual(neg_log_posterior(z, spec).data, np.array([0.6, 0.0]), 1e-12)
        assert spec.nz == 4

    def test_with_observations(self):
        generator = small_generator(seed=3)
        obs = Observations([1, 5, 9], [2, 5, 14], [1.0, -1.0, 1.0], (16, 16))
        spec = PosteriorSpec(generator, obs, lam=0.5)
        zs = np.random.default_rng(1).normal(0, 1, (4, 4))
        images = generator.predict(zs)[:, 0]
        expected = ((images[:, obs.rows, obs.cols] - obs.values)**2).sum(axis=1) + 0.5*(zs**2).sum(axis=1)
        values = spec(Tensor(zs)).data
        self.assertArraysAlmostEqual(values, expected, 1e-5)
        assert generator.mode == 'train'

    def test_observation_order(self):
        generator = small_generator(seed=3).cast(np.float64)
        rows = np.array([1, 5, 9, 12])
        cols = np.array([2, 5, 14, 0])
        values = np.array([1.0, -1.0, 1.0, -1.0])
        order = [2, 0, 3, 1]
        spec = PosteriorSpec(generator, Observations(rows, cols, values, (16, 16)), lam=0.3)
        shuffled = PosteriorSpec(generator, Observations(rows[order], cols[order], values[order], (16, 16)), lam=0.3)
        z = Tensor(np.random.default_rng(4).normal(0, 1, (5, 4)), dtype=np.float64)
        self.assertArraysAlmostEqual(spec(z).data, shuffled(z).data, 1e-12)

    def test_gradient(self):
        generator = small_generator(seed=4).cast(np.float64)
        obs = Observations([0, 7, 15], [3, 8, 1], [1.0, 1.0, -1.0], (16, 16))
        spec = PosteriorSpec(generator, obs, lam=0.1)
        z = Tensor(np.random.default_rng(2).normal(0, 1, (3, 4)), requires_grad=True, dtype=np.float64)
        check_gradient(lambda: reduce(spec(z), 'sum'), [z], epsilon=1e-6)

    def test_invalid(self):
        generator = small_generator()
        with pytest.raises(ShapeError):
            PosteriorSpec(generator, Observations([1], [1], [1.0]))
        with pytest.raises(ValueError):
            PosteriorSpec(generator, Observations([1], [1], [1.0], (16, 16)), lam=-1.0)
        spec = PosteriorSpec(generator, Observations([1], [1], [1.0], (16, 16)))
        with pytest.raises(ShapeError):
            spec(Tensor(np.zeros((2, 5))))


class NeighborTestCase(BaseTestCase):
    def test_brute_force(self):
        rng = np.random.default_rng(5)
        for counter in range(100):
            npoint = rng.integers(2, 501)
            dim = rng.integers(1, 6)
            k = rng.integers(1, min(31, npoint - 1) + 1)
            points = rng.normal(0, 1, (npoint, dim))
            distances, indices = kth_nn_distances(points, k, return_indices=True)
            d2 = ((points[:, None, :] - points[None, :, :])**2).sum(axis=2)
            np.fill_diagonal(d2, np.inf)
            order = np.argsort(d2, axis=1, kind='stable')
            expected = np.sqrt(d2[np.arange(npoint), order[:, k - 1]])
            self.assertArraysEqual(indices, order[:, k - 1])
            self.assertArraysAlmostEqual(distances, expected, 1e-12)

    def test_one_dimensional(self):
        distances = kth_nn_distances(np.array([0.0, 1.0, 3.0, 7.0]), 1)
        self.assertArraysEqual(distances, np.array([1.0, 1.0, 2.0, 4.0]))
        distances = kth_nn_distances(np.array([0.0, 1.0, 3.0, 7.0]), 2)
        self.assertArraysEqual(distances, np.array([3.0, 2.0, 3.0, 6.0]))

    def test_ties_by_index(self):
        distances, indices = kth_nn_distances(np.array([[0.0], [1.0], [-1.0]]), 1, return_indices=True)
        assert indices[0] == 1

    def test_invalid(self):
        with pytest.raises(UsageError):
            kth_nn_distances(np.zeros((1, 2)), 1)
        with pytest.raises(UsageError):
            kth_nn_distances(np.zeros((4, 2)), 4)
        with pytest.raises(UsageError):
            kth_nn_distances(np.zeros((4, 2)), 0)


class EntropyTestCase(BaseTestCase):
    def test_constant(self):
        self.assertArraysAlmostEqual(
            np.array([entropy_constant(100, 10, 1)]),
            np.array([np.log(2.0) + digamma(100) - digamma(10)]), 1e-12)
        # the unit disk has area pi
        self.assertArraysAlmostEqual(
            np.array([entropy_constant(50, 7, 2)]),
            np.array([np.log(np.pi) + digamma(50) - digamma(7)]), 1e-12)

    def test_gaussian_accuracy(self):
        for dim, k, analytic in (1, 31, 1.4189), (2, 31, 2.8379), (5, 31, 7.0947):
            good = 0
            for seed in range(10):
                points = np.random.default_rng(seed).normal(0, 1, (1000, dim))
                estimate = entropy_estimate(points, k)
                if abs(estimate - analytic) < 0.05*analytic:
                    good += 1
            assert good >= 9, (dim, good)

    def test_scaling(self):
        # H(a X) = H(X) + d log a
        points = np.random.default_rng(6).normal(0, 1, (200, 3))
        diff = entropy_estimate(2.5*points, 10) - entropy_estimate(points, 10)
        assert abs(diff - 3*np.log(2.5)) < 1e-9

    def test_tensor_matches_array(self):
        points = np.random.default_rng(7).normal(0, 1, (50, 2))
        value = entropy_estimate(Tensor(points, dtype=np.float64))
        assert isinstance(value, Tensor)
        assert abs(value.item() - entropy_estimate(points)) < 1e-12

    def test_gradient(self):
        points = Tensor(np.random.default_rng(8).normal(0, 1, (20, 2)), requires_grad=True, dtype=np.float64)
        check_gradient(lambda: entropy_estimate(points, 3), [points], epsilon=1e-6)

    def test_floor(self):
        before = warning_counts['entropy_floor']
        points = np.zeros((10, 2))
        points[5:] = 1.0
        value = entropy_estimate(points, 1)
        assert np.isfinite(value)
        assert warning_counts['entropy_floor'] == before + 10


class ObjectiveTestCase(BaseTestCase):
    def test_terms(self):
        inference = small_inference(nw=2)
        target = quadratic_target([0.0, 0.0])
        w = Tensor(np.random.default_rng(9).normal(0, 1, (16, 2)))
        objective, mean_loss, entropy = kl_objective(w, inference, target, 4, return_terms=True)
        assert abs(objective.item() - (mean_loss.item() - entropy.item())) < 1e-5
        z = inference(w).data
        assert abs(entropy.item() - entropy_estimate(z.astype(float), 4)) < 1e-4
        ablated, mean_loss2, entropy2 = kl_objective(w, inference, target, 4, False, True)
        assert abs(ablated.item() - mean_loss.item()) < 1e-6
        with pytest.raises(UsageError):
            kl_objective(Tensor(np.zeros((1, 2))), inference, target)

    def test_gradient_composition(self):
        inference = small_inference(nw=2).cast(np.float64)
        target = quadratic_target([0.5, -0.5])
        w = Tensor(np.random.default_rng(10).normal(0, 1, (16, 2)), dtype=np.float64)

        def gradients(fun):
            inference.zero_grad()
            with Tape() as tape:
                loss = fun()
            tape.backward(loss)
            return [p.grad.copy() for p in inference.parameters()]

        update = gradients(lambda: kl_objective(w, inference, target, 4))
        loss_grads = gradients(lambda: reduce(target(inference(w)), 'mean'))
        entropy_grads = gradients(lambda: entropy_estimate(inference(w), 4))
        for u, a, b in zip(update, loss_grads, entropy_grads):
            self.assertArraysAlmostEqual(u, a - b, 1e-6, doabs=True)

    def test_config(self):
        config = SamplerConfig()
        assert config.k == 8
        assert config.nz == 30
        assert config.lr == 1e-4
        assert SamplerConfig(batch_size=1000).k == 31
        with pytest.raises(ValueError):
            SamplerConfig(batch_size=1)
        with pytest.raises(ValueError):
            SamplerConfig(batch_size=8, k=8)


class TrainSamplerTestCase(BaseTestCase):
    def test_learns_shifted_gaussian(self):
        config = tiny_sampler_config(max_iters=500, hidden=16, lr=1e-2)
        inference, trace = train_sampler(quadratic_target([3.0, -2.0]), config)
        assert len(trace) == 500
        z = inference.predict(np.random.default_rng(1).normal(0, 1, (500, 2)))
        assert abs(z.mean(axis=0) - np.array([3.0, -2.0])).max() < 0.5
        objectives = np.array([row[1] for row in trace])
        assert objectives[-50:].mean() < objectives[:50].mean()

    def test_deterministic(self):
        trace0 = train_sampler(quadratic_target([1.0, 0.0]), tiny_sampler_config())[1]
        trace1 = train_sampler(quadratic_target([1.0, 0.0]), tiny_sampler_config())[1]
        assert trace0 == trace1

    def test_zero_iterations(self):
        config = tiny_sampler_config(max_iters=0)
        inference, trace = train_sampler(quadratic_target([0.0, 0.0]), config)
        assert trace == []
        reference = InferenceNet(2, 8, 1)
        init_parameters(reference, RandomStreams(config.seed).generator('init'), 'lecun')
        for key, value in reference.state_dict().items():
            self.assertArraysEqual(inference.state_dict()[key], value)

    def test_early_stopping(self):
        config = tiny_sampler_config(max_iters=100, window=5, rel_tol=10.0)
        inference, trace = train_sampler(quadratic_target([0.0, 0.0]), config)
        assert len(trace) == 10

    def test_divergence(self):
        def infinite(x):
            return shift(reduce(elementwise(x, 'square'), 'sum', axis=1), np.inf)
        with pytest.raises(TrainingError):
            train_sampler(infinite, tiny_sampler_config())

    def test_entropy_only(self):
        generator = small_generator()
        spec = PosteriorSpec(generator, Observations([], [], [], (16, 16)), lam=0.0)
        inference = small_inference(nw=4, hidden=8, depth=1)
        w = np.random.default_rng(11).normal(0, 1, (200, 4))
        before = np.trace(np.cov(inference.predict(w).T))
        config = tiny_sampler_config(max_iters=50, lr=1e-2, nw=4)
        inference, trace = train_sampler(spec, config, inference)
        for iteration, objective, mean_loss, entropy in trace:
            assert mean_loss == 0.0
            assert abs(objective + entropy) < 1e-6*max(1.0, abs(entropy))
        assert np.trace(np.cov(inference.predict(w).T)) > before

    def test_generator_untouched(self):
        generator = small_generator(seed=2)
        obs = Observations([3, 8], [3, 8], [1.0, -1.0], (16, 16))
        before = generator.state_dict()
        train_sampler(PosteriorSpec(generator, obs), tiny_sampler_config(nw=4), small_inference(nw=4))
        for key, value in generator.state_dict().items():
            self.assertArraysEqual(value, before[key])
        for p in generator.parameters():
            assert p.requires_grad
            self.assertArrayConstant(p.grad, 0.0)

    def test_continue_training(self):
        inference = small_inference(nw=2)
        before = inference.state_dict()
        result, trace = train_sampler(quadratic_target([0.0, 0.0]), tiny_sampler_config(), inference)
        assert result is inference
        assert not (inference.state_dict()['out.weight'] == before['out.weight']).all()


class ConditionalTestCase(BaseTestCase):
    def test_sample_conditional(self):
        generator = small_generator()
        inference = small_inference(nw=3, nz=4)
        images = sample_conditional(generator, inference, 6, 4)
        assert images.shape == (6, 1, 16, 16)
        self.assertArraysEqual(images, sample_conditional(generator, inference, 6, 4))
        assert sample_conditional(generator, inference, 0, 4).shape == (0, 1, 16, 16)

    def test_optimize(self):
        generator = small_generator(seed=2)
        obs = Observations([3, 8, 12], [3, 8, 12], [1.0, -1.0, 1.0], (16, 16))
        spec = PosteriorSpec(generator, obs)
        results = optimize_conditional(spec, n_restarts=3, inner_iters=30, seed=1)
        assert len(results) == 3
        starts = RandomStreams(1).generator('restarts').standard_normal((3, 4))
        initial = spec(Tensor(starts)).data
        for (z, loss), start_loss in zip(results, initial):
            assert z.shape == (4,)
            assert loss <= start_loss + 1e-6
            assert abs(spec(Tensor(z[None])).item() - loss) < 1e-4

    def test_optimize_perceptual(self):
        generator = small_generator(seed=2)
        obs = Observations([3], [3], [1.0], (16, 16))
        spec = PosteriorSpec(generator, obs)
        results = optimize_conditional(spec, 2, 5, 0, 'perceptual', small_discriminator(mode='standard'))
        assert len(results) == 2
        with pytest.raises(UsageError):
            optimize_conditional(spec, 2, 5, 0, 'perceptual', small_discriminator())
        with pytest.raises(UsageError):
            optimize_conditional(spec, 2, 5, 0, 'perceptual')
        with pytest.raises(ValueError):
            optimize_conditional(spec, 2, 5, 0, 'l1')

    def test_optimize_prior_only(self):
        spec = PosteriorSpec(small_generator(), Observations([], [], [], (16, 16)), lam=1.0)
        results = optimize_conditional(spec, n_restarts=4, inner_iters=500, seed=0)
        for z, loss in results:
            assert np.linalg.norm(z) < 0.1
            assert loss < 0.01

    def test_distinct_restarts(self):
        generator = small_generator(seed=5)
        obs = Observations([2, 7, 13], [4, 9, 11], [1.0, -1.0, 1.0], (16, 16))
        results = optimize_conditional(PosteriorSpec(generator, obs), n_restarts=8, inner_iters=50, seed=6)
        zs = np.array([z for z, loss in results])
        assert len(np.unique(zs, axis=0)) >= 2

    def test_optimize_leaves_networks(self):
        generator = small_generator(seed=2)
        discriminator = small_discriminator(mode='standard')
        spec = PosteriorSpec(generator, Observations([3], [3], [1.0], (16, 16)))
        optimize_conditional(spec, 2, 5, 0, 'perceptual', discriminator)
        for p in generator.parameters() + discriminator.parameters():
            assert p.requires_grad
            self.assertArrayConstant(p.grad, 0.0)

    def test_observation_match(self):
        image = -np.ones((16, 16))
        image[4:10, :] = 1.0
        obs = Observations([5, 6, 0, 15], [2, 8, 0, 15], [1.0, 1.0, -1.0, -1.0], (16, 16))
        match = observation_match(np.array([image, -image]), obs)
        self.assertArraysEqual(match, np.array([1.0, 0.0]))
        self.assertArraysEqual(observation_match(np.array([image]), Observations([], [], [], (16, 16))),
                               np.array([1.0]))


@slow
def test_example_a_conditioning():
    dataset = synth_channels(500, 64, 64, 11)
    generator = train_gan(dataset, GanConfig(max_iters=2000, seed=3, ngf=32, ndf=32))[0]
    observations = load_observations('A')
    assert len(observations) == 16
    spec = PosteriorSpec(generator, observations, lam=0.1)
    config = SamplerConfig(batch_size=64, lr=1e-3, max_iters=2000, seed=1, hidden=128, depth=3, window=0)
    inference, trace = train_sampler(spec, config)
    images = sample_conditional(generator, inference, 100, 2)
    match = observation_match(images, observations)
    assert (match >= 0.9).mean() >= 0.9


@slow
def test_map_collapse():
    target = quadratic_target([0.0, 0.0])
    variances = {}
    for use_entropy in True, False:
        config = SamplerConfig(batch_size=64, lr=1e-3, max_iters=3000, seed=3, nw=2, hidden=32, depth=2,
                               use_entropy=use_entropy, window=0)
        inference = InferenceNet(2, 32, 2)
        init_parameters(inference, 3, 'lecun')
        w = np.random.default_rng(4).normal(0, 1, (500, 2))
        initial = inference.predict(w).var(axis=0).sum()
        train_sampler(target, config, inference)
        variances[use_entropy] = inference.predict(w).var(axis=0).sum()/initial
    assert variances[False] < 0.1
    assert variances[True] > 0.5


@slow
def test_toy_mixture_1d():
    gm = GaussianMixture.three_component_1d()
    config = SamplerConfig(batch_size=128, lr=1e-3, max_iters=1000, seed=0, nw=1, hidden=128, depth=3,
                           window=0)
    inference, trace = train_sampler(lambda x: -mixture_log_density(x, gm), config)
    points = inference.predict(np.random.default_rng(1).normal(0, 1, (1000, 1)))
    assert histogram_js(points, gm) < 0.05


@slow
def test_toy_mixture_2d():
    gm = GaussianMixture.three_component_2d()
    config = SamplerConfig(batch_size=128, lr=1e-3, max_iters=1000, seed=0, nw=2, hidden=128, depth=3,
                           window=0)
    inference, trace = train_sampler(lambda x: -mixture_log_density(x, gm), config)
    points = inference.predict(np.random.default_rng(1).normal(0, 1, (4000, 2)))
    fractions = assignment_fractions(points, gm)
    assert (abs(fractions - 1/3.0) < 0.1).all()
