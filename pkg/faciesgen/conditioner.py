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
"""Conditioning a trained generator on point observations

   The posterior over latent vectors z is proportional to exp(-L(z)) with

       L(z) = sum_obs (G(z)[r, c] - v)^2 + lambda*|z|^2,

   see :func:`neg_log_posterior`. Two ways to explore it are provided:

   * :func:`train_sampler` fits an inference network I, mapping standard
     normal source vectors w to latent vectors z = I(w), by minimizing the
     Kullback-Leibler divergence from the posterior: the mean of L over a
     batch minus a k-nearest-neighbor estimate of the entropy of the batch
     (:func:`kl_objective`). Samples are then G(I(w)), see
     :func:`sample_conditional`. The trainer is generic in the target, so
     toy Gaussian mixtures can be used as well.
   * :func:`optimize_conditional` looks for local minimizers of L (or of a
     perceptual variant using the discriminator) from several random starts.
"""


from __future__ import division

from collections import OrderedDict
from contextlib import ExitStack

import numpy as np
from scipy.special import digamma, gammaln

from faciesgen.assess import binarize_clean
from faciesgen.autodiff import Tensor, Tape, ShapeError, UsageError, \
    add_bias, clamp_min, elementwise, index_rows, reduce, scale, shift, \
    take_pixels
from faciesgen.layers import InferenceNet, init_parameters
from faciesgen.log import log, timer
from faciesgen.optim import Optimizer
from faciesgen.utils import RandomStreams


__all__ = [
    'TrainingError', 'warning_counts', 'Observations', 'PosteriorSpec',
    'SamplerConfig', 'neg_log_posterior', 'kth_nn_distances',
    'entropy_constant', 'entropy_estimate', 'kl_objective', 'train_sampler',
    'sample_conditional', 'optimize_conditional', 'observation_match',
]


class TrainingError(Exception):
    """Is raised when a training loop produces a non-finite objective"""
    pass


# Squared distances are floored at (1e-12)**2 before taking the logarithm.
DISTANCE_FLOOR = 1e-12

warning_counts = OrderedDict([('entropy_floor', 0)])


class Observations(object):
    """Facies values observed at grid cells

       Values are +1 (channel) or -1 (background).
    """

    def __init__(self, rows, cols, values, shape=(64, 64)):
        """
           Arguments:
            | ``rows``, ``cols``  --  zero-based cell indices
            | ``values``  --  +1 or -1 for every cell

           Optional argument:
            | ``shape``  --  the grid dimensions (H, W) [default=(64, 64)]
        """
        self.rows = np.array(rows, dtype=int).ravel()
        self.cols = np.array(cols, dtype=int).ravel()
        self.values = np.array(values, dtype=float).ravel()
        self.shape = tuple(shape)
        if not len(self.rows) == len(self.cols) == len(self.values):
            raise ShapeError('rows, cols and values must have the same length.')
        outside = (self.rows < 0) | (self.rows >= self.shape[0]) | (self.cols < 0) | (self.cols >= self.shape[1])
        if outside.any():
            i = int(np.flatnonzero(outside)[0])
            raise UsageError('Observation (%i, %i) lies outside the %i×%i grid.' % (
                self.rows[i], self.cols[i], self.shape[0], self.shape[1]))
        if not np.isin(self.values, (-1.0, 1.0)).all():
            raise UsageError('Observed values must be +1 or -1.')
        cells = self.rows*self.shape[1] + self.cols
        if len(np.unique(cells)) != len(cells):
            raise UsageError('Every cell can be observed only once.')

    @classmethod
    def from_facies(cls, rows, cols, codes, shape=(64, 64)):
        """Construct from facies codes: 1 (channel) or 0 (background)"""
        codes = np.asarray(codes)
        if not np.isin(codes, (0, 1)).all():
            raise UsageError('Facies codes must be 0 or 1.')
        return cls(rows, cols, 2.0*codes - 1, shape)

    def __len__(self):
        return len(self.values)


class PosteriorSpec(object):
    """Generator, observations and prior weight that define L(z)

       Instances are callable: ``spec(z)`` equals ``neg_log_posterior(z,
       spec)``.
    """

    def __init__(self, generator, observations, lam=0.1):
        if lam < 0:
            raise ValueError('lambda must be nonnegative, got %s.' % lam)
        if len(observations) > 0 and observations.shape != (generator.size, generator.size):
            raise ShapeError('Observations on a %i×%i grid do not fit %i×%i images.' % (
                observations.shape + (generator.size, generator.size)))
        self.generator = generator
        self.observations = observations
        self.lam = lam

    nz = property(lambda self: self.generator.nz)

    def __call__(self, z):
        return neg_log_posterior(z, self)


def neg_log_posterior(z, spec):
    """Per-sample negative log posterior L(z), differentiable w.r.t. z

       The generator is evaluated in eval mode.
    """
    generator = spec.generator
    if z.ndim != 2 or z.shape[1] != generator.nz:
        raise ShapeError('Expecting B×%i latent vectors, got shape %s.' % (generator.nz, z.shape))
    prior = reduce(elementwise(z, 'square'), 'sum', axis=1)
    obs = spec.observations
    if len(obs) == 0:
        return scale(prior, spec.lam)
    old_mode = generator.mode
    generator.eval()
    try:
        images = generator(z)
    finally:
        generator.mode = old_mode
    diff = add_bias(take_pixels(images, obs.rows, obs.cols), -obs.values, axis=1)
    misfit = reduce(elementwise(diff, 'square'), 'sum', axis=1)
    if spec.lam == 0:
        return misfit
    return misfit + scale(prior, spec.lam)


def kth_nn_distances(points, k, return_indices=False):
    """Distance of every point to its k-th nearest other point

       Arguments:
        | ``points``  --  an M×d array or Tensor
        | ``k``  --  the neighbor order, 1 <= k <= M-1

       Optional argument:
        | ``return_indices``  --  also return the index of the neighbor

       Ties are broken by index. Squared distances are accumulated in 64-bit
       floats, one dimension at a time.
    """
    x = np.asarray(points.data if isinstance(points, Tensor) else points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    npoint = len(x)
    if npoint < 2:
        raise UsageError('Nearest neighbors need at least two points, got %i.' % npoint)
    if not 1 <= k <= npoint - 1:
        raise UsageError('The neighbor order k=%i must be in [1, %i].' % (k, npoint - 1))
    d2 = np.zeros((npoint, npoint))
    for column in x.T:
        diff = column[:, None] - column[None, :]
        d2 += diff*diff
    np.fill_diagonal(d2, np.inf)
    indices = np.argsort(d2, axis=1, kind='stable')[:, k - 1]
    distances = np.sqrt(d2[np.arange(npoint), indices])
    if return_indices:
        return distances, indices
    return distances


def entropy_constant(npoint, k, dim):
    """log V_d + psi(M) - psi(k), V_d being the volume of the unit d-ball"""
    log_volume = 0.5*dim*np.log(np.pi) - gammaln(0.5*dim + 1)
    return float(log_volume + digamma(npoint) - digamma(k))


def _count_floor(count):
    if count > 0:
        warning_counts['entropy_floor'] += count
        if log.do_warning:
            log.warn('%i nearest-neighbor distances floored at %.0e in the entropy estimate.' % (count, DISTANCE_FLOOR))


def entropy_estimate(points, k=None):
    """Kozachenko-Leonenko estimate of the differential entropy of a sample

       Arguments:
        | ``points``  --  an M×d array or Tensor

       Optional argument:
        | ``k``  --  the neighbor order [default=floor(sqrt(M))]

       Returns (d/M) sum_i log rho_i + entropy_constant(M, k, d), where rho_i
       is the distance to the k-th nearest neighbor. For an array, a float is
       returned. For a Tensor, a scalar Tensor is returned whose gradient
       flows through the distances to the (fixed) neighbors.
    """
    if isinstance(points, Tensor):
        if points.ndim != 2:
            raise ShapeError('Expecting M×d points, got shape %s.' % (points.shape,))
    else:
        points = np.asarray(points, dtype=float)
    npoint = points.shape[0]
    dim = points.shape[1] if len(points.shape) > 1 else 1
    if k is None:
        k = max(1, int(np.sqrt(npoint)))
    distances, indices = kth_nn_distances(points, k, return_indices=True)
    const = entropy_constant(npoint, k, dim)
    floor2 = DISTANCE_FLOOR**2
    if not isinstance(points, Tensor):
        d2 = distances**2
        _count_floor(int((d2 <= floor2).sum()))
        return float(dim*0.5*np.log(np.maximum(d2, floor2)).mean() + const)
    diff = points - index_rows(points, indices)
    d2 = reduce(elementwise(diff, 'square'), 'sum', axis=1)
    _count_floor(int((d2.data <= floor2).sum()))
    log_rho = scale(elementwise(clamp_min(d2, floor2), 'log'), 0.5)
    return shift(scale(reduce(log_rho, 'sum'), dim/npoint), const)


def kl_objective(w_batch, inference, neg_log_density, k=None, use_entropy=True, return_terms=False):
    """Batch estimate of KL(q || posterior) up to a constant

       Arguments:
        | ``w_batch``  --  an M×n_w Tensor of source vectors
        | ``inference``  --  the network I
        | ``neg_log_density``  --  a callable mapping a B×n_z Tensor to B
                                   values of L, e.g. a PosteriorSpec

       Optional arguments:
        | ``k``  --  the neighbor order [default=floor(sqrt(M))]
        | ``use_entropy``  --  when False, the entropy term is left out of
                               the objective (it is still reported)
        | ``return_terms``  --  also return the mean loss and the entropy

       Returns mean_i L(I(w_i)) - H, a scalar Tensor.
    """
    if w_batch.shape[0] < 2:
        raise UsageError('The KL objective needs a batch of at least two source vectors.')
    z = inference(w_batch)
    mean_loss = reduce(neg_log_density(z), 'mean')
    if use_entropy:
        entropy = entropy_estimate(z, k)
        objective = mean_loss - entropy
    else:
        entropy = Tensor(entropy_estimate(z.data, k), dtype=z.dtype)
        objective = mean_loss
    if return_terms:
        return objective, mean_loss, entropy
    return objective


class SamplerConfig(object):
    """Settings of :func:`train_sampler`"""

    def __init__(self, batch_size=64, k=None, lr=1e-4, max_iters=10000,
                 seed=0, nw=30, nz=None, hidden=512, depth=5,
                 activation='selu', init_scheme='lecun', optimizer='adam',
                 beta1=0.9, use_entropy=True, window=500, rel_tol=1e-3,
                 log_every=100):
        """
           Optional arguments:
            | ``batch_size``  --  M [default=64]
            | ``k``  --  the neighbor order [default=floor(sqrt(M))]
            | ``lr``  --  the Adam learning rate [default=1e-4]
            | ``max_iters``  --  the maximum number of updates [default=10000]
            | ``seed``  --  seeds initialization and source draws
            | ``nw``  --  the source dimension [default=30]
            | ``nz``  --  the target dimension [default=nw]
            | ``hidden``, ``depth``, ``activation``  --  see InferenceNet
            | ``init_scheme``  --  see init_parameters [default='lecun']
            | ``optimizer``  --  'adam', 'rmsprop' or 'sgd' [default='adam']
            | ``beta1``  --  Adam's first-moment decay [default=0.9]
            | ``use_entropy``  --  include the entropy term [default=True]
            | ``window``  --  early stopping compares the mean objective of
                              the last window iterations with that of the
                              window before; 0 disables it [default=500]
            | ``rel_tol``  --  the relative change below which training stops
                               [default=1e-3]
            | ``log_every``  --  iterations between progress lines
        """
        if batch_size < 2:
            raise ValueError('The batch size must be at least 2, got %i.' % batch_size)
        if k is None:
            k = int(np.sqrt(batch_size))
        if not 1 <= k < batch_size:
            raise ValueError('k must be in [1, %i), got %i.' % (batch_size, k))
        if not lr > 0:
            raise ValueError('The learning rate must be strictly positive, got %s.' % lr)
        if max_iters < 0 or window < 0:
            raise ValueError('max_iters and window can not be negative.')
        if nz is None:
            nz = nw
        self.batch_size = batch_size
        self.k = k
        self.lr = lr
        self.max_iters = max_iters
        self.seed = seed
        self.nw = nw
        self.nz = nz
        self.hidden = hidden
        self.depth = depth
        self.activation = activation
        self.init_scheme = init_scheme
        self.optimizer = optimizer
        self.beta1 = beta1
        self.use_entropy = use_entropy
        self.window = window
        self.rel_tol = rel_tol
        self.log_every = log_every

    def optimizer_kwargs(self):
        if self.optimizer == 'adam':
            return dict(lr=self.lr, beta1=self.beta1)
        return dict(lr=self.lr)


def _converged(objectives, window, rel_tol):
    if window == 0 or len(objectives) < 2*window:
        return False
    new = np.mean(objectives[-window:])
    old = np.mean(objectives[-2*window:-window])
    return abs(new - old) < rel_tol*abs(old)


def train_sampler(neg_log_density, config, inference=None):
    """Train an inference network to sample from exp(-L)

       Arguments:
        | ``neg_log_density``  --  a callable mapping a B×n_z Tensor to B
                                   values of L (a PosteriorSpec, or e.g.
                                   ``lambda x: -mixture_log_density(x, gm)``)
        | ``config``  --  a SamplerConfig

       Optional argument:
        | ``inference``  --  a network to continue training. When not given,
                             a new InferenceNet is initialized from the seed.

       Returns (inference, trace) where the trace has rows (iteration,
       objective, mean_loss, entropy).
    """
    streams = RandomStreams(config.seed)
    if inference is None:
        inference = InferenceNet(config.nw, config.hidden, config.depth, config.nz, config.activation)
        init_parameters(inference, streams.generator('init'), config.init_scheme)
    optimizer = Optimizer(inference.parameters(), config.optimizer, **config.optimizer_kwargs())
    rng = streams.generator('source')
    trace = []
    objectives = []
    if log.do_medium:
        with log.section('SAMPLER'):
            log('Training an inference network, at most %i iterations, M=%i, k=%i.' % (
                config.max_iters, config.batch_size, config.k))
    with timer.section('Sampler'), ExitStack() as stack:
        if isinstance(neg_log_density, PosteriorSpec):
            # only the inference network is trained
            stack.enter_context(neg_log_density.generator.frozen())
        for iteration in range(1, config.max_iters + 1):
            w = Tensor(rng.standard_normal((config.batch_size, inference.nw)))
            optimizer.zero_grad()
            with Tape() as tape:
                objective, mean_loss, entropy = kl_objective(
                    w, inference, neg_log_density, config.k, config.use_entropy, True)
            row = (iteration, objective.item(), mean_loss.item(), entropy.item())
            if not np.isfinite(row[1]):
                raise TrainingError('The sampler objective is not finite at iteration %i.' % iteration)
            tape.backward(objective)
            optimizer.step()
            trace.append(row)
            objectives.append(row[1])
            if log.do_high or (log.do_medium and iteration % config.log_every == 0):
                with log.section('SAMPLER'):
                    log('Iteration %6i   objective %12.5e   loss %12.5e   entropy %12.5e' % row)
            if _converged(objectives, config.window, config.rel_tol):
                if log.do_medium:
                    with log.section('SAMPLER'):
                        log('Converged after %i iterations.' % iteration)
                break
    return inference, trace


def sample_conditional(generator, inference, count, seed):
    """Draw count images G(I(w)) with w standard normal

       Returns a count×1×H×W numpy array.
    """
    if count == 0:
        return np.zeros((0, 1, generator.size, generator.size), np.float32)
    rng = RandomStreams(seed).generator('source')
    z = inference.predict(rng.standard_normal((count, inference.nw)))
    return generator.predict(z)


def _perceptual_losses(z, spec, discriminator):
    generator = spec.generator
    old_modes = generator.mode, discriminator.mode
    generator.eval()
    discriminator.eval()
    try:
        images = generator(z)
        scores = discriminator(images)
    finally:
        generator.mode, discriminator.mode = old_modes
    # log(1 - D) with 1 - D kept away from zero
    penalty = elementwise(clamp_min(1 - scores, 1e-6), 'log')
    obs = spec.observations
    if len(obs) == 0:
        return scale(penalty, spec.lam)
    diff = add_bias(take_pixels(images, obs.rows, obs.cols), -obs.values, axis=1)
    return reduce(elementwise(diff, 'square'), 'sum', axis=1) + scale(penalty, spec.lam)


def optimize_conditional(spec, n_restarts=8, inner_iters=500, seed=0,
                         loss_kind='gaussian_prior', discriminator=None, lr=1e-2):
    """Local minimizers of the conditioning loss from random starts

       Arguments:
        | ``spec``  --  a PosteriorSpec

       Optional arguments:
        | ``n_restarts``  --  the number of standard-normal starting points,
                              optimized together as one batch [default=8]
        | ``inner_iters``  --  the number of Adam steps [default=500]
        | ``seed``  --  seeds the starting points
        | ``loss_kind``  --  'gaussian_prior' (L(z)) or 'perceptual' (the
                             misfit plus lambda*log(1 - D(G(z))))
        | ``discriminator``  --  a standard-mode DiscriminatorNet, required
                                 for the perceptual loss
        | ``lr``  --  the Adam learning rate [default=1e-2]

       Returns a list of (z, loss) pairs, one per restart. Each z is the best
       point visited by that restart, so its loss never exceeds the loss of
       the starting point.
    """
    if loss_kind == 'perceptual':
        if discriminator is None:
            raise UsageError('The perceptual loss needs a discriminator.')
        if discriminator.score_mode != 'standard':
            raise UsageError('The perceptual loss needs sigmoid scores; a wgan critic is unbounded.')
        loss_fn = lambda z: _perceptual_losses(z, spec, discriminator)
    elif loss_kind == 'gaussian_prior':
        loss_fn = spec
    else:
        raise ValueError('Unknown loss kind: %s' % loss_kind)
    if n_restarts < 1:
        raise ValueError('At least one restart is needed.')
    rng = RandomStreams(seed).generator('restarts')
    z = Tensor(rng.standard_normal((n_restarts, spec.nz)), requires_grad=True)
    optimizer = Optimizer([z], 'adam', lr=lr, beta1=0.9)
    best_z = z.data.copy()
    best_loss = np.full(n_restarts, np.inf)
    with timer.section('Optimize z'), ExitStack() as stack:
        # only z is optimized
        stack.enter_context(spec.generator.frozen())
        if discriminator is not None:
            stack.enter_context(discriminator.frozen())
        for iteration in range(inner_iters + 1):
            optimizer.zero_grad()
            with Tape() as tape:
                losses = loss_fn(z)
                total = reduce(losses, 'sum')
            improved = losses.data < best_loss
            best_loss[improved] = losses.data[improved]
            best_z[improved] = z.data[improved]
            if iteration == inner_iters:
                break
            tape.backward(total)
            optimizer.step()
    if log.do_medium:
        with log.section('OPTZ'):
            log('Best losses of %i restarts:&%s' % (n_restarts, ' '.join('%.4f' % value for value in best_loss)))
    return [(best_z[i].copy(), float(best_loss[i])) for i in range(n_restarts)]


def observation_match(images, observations, min_size=8):
    """Fraction of observations honored by each image after binarization

       Arguments:
        | ``images``  --  N×H×W or N×1×H×W images
        | ``observations``  --  an Observations instance
    """
    images = np.asarray(images)
    if images.ndim == 4:
        images = images[:, 0]
    if len(observations) == 0:
        return np.ones(len(images))
    expected = observations.values > 0
    result = np.zeros(len(images))
    for i, image in enumerate(images):
        binary = binarize_clean(image, min_size)
        result[i] = (binary[observations.rows, observations.cols] == expected).mean()
    return result
