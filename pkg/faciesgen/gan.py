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
"""Unconditional generator training with adversarial objectives

   Two objectives are supported:

   * ``'standard'``: the discriminator outputs probabilities and minimizes
     the binary cross-entropy; the generator minimizes mean log(1 - D(G(z))).
   * ``'wgan'``: the critic outputs unbounded scores and maximizes the gap
     between the mean scores of real and generated images. The critic
     weights are clipped to [-c, c] after every update.

   For every generator update, ``n_critic`` discriminator updates are done on
   fresh batches of real images (drawn uniformly with replacement) and latent
   vectors (standard normal).
"""


from __future__ import division

import numpy as np

from faciesgen.autodiff import Tensor, Tape, DomainError, UsageError, \
    clamp_min
from faciesgen.conditioner import TrainingError
from faciesgen.layers import GeneratorNet, DiscriminatorNet, init_parameters
from faciesgen.log import log, timer
from faciesgen.optim import Optimizer, clip_weights
from faciesgen.utils import RandomStreams


__all__ = [
    'GanConfig', 'LossTrace', 'gan_losses', 'train_gan',
    'sample_unconditional',
]


# Bound on how close standard-mode scores get to 0 or 1 during training.
SCORE_GUARD = 1e-6


class GanConfig(object):
    """Settings of :func:`train_gan`"""

    def __init__(self, mode='wgan', batch_size=32, n_critic=5, clip=0.01,
                 lr=1e-4, max_iters=20000, seed=0, nz=30, ngf=64, ndf=64,
                 size=64, optimizer='adam', beta1=0.5, log_every=100,
                 checkpoint_every=1000):
        """
           Optional arguments:
            | ``mode``  --  'wgan' or 'standard' [default='wgan']
            | ``batch_size``  --  M, at least 2 [default=32]
            | ``n_critic``  --  discriminator updates per generator update
                                [default=5]
            | ``clip``  --  the weight clipping bound in wgan mode
                            [default=0.01]
            | ``lr``  --  the learning rate of both optimizers [default=1e-4]
            | ``max_iters``  --  the number of generator updates
                                 [default=20000]
            | ``seed``  --  seeds initialization, data order and latent draws
            | ``nz``, ``ngf``, ``ndf``, ``size``  --  see GeneratorNet and
                                                      DiscriminatorNet
            | ``optimizer``  --  'adam' or 'rmsprop' [default='adam']
            | ``beta1``  --  Adam's first-moment decay [default=0.5]
            | ``log_every``  --  iterations between progress lines
            | ``checkpoint_every``  --  iterations between callback calls
        """
        if mode not in ('wgan', 'standard'):
            raise ValueError('mode must be wgan or standard, got %s.' % mode)
        if batch_size < 2:
            raise ValueError('The batch size must be at least 2, got %i.' % batch_size)
        if n_critic < 1:
            raise ValueError('n_critic must be at least 1, got %i.' % n_critic)
        if mode == 'wgan' and not clip > 0:
            raise ValueError('The clipping bound must be strictly positive, got %s.' % clip)
        if not lr > 0:
            raise ValueError('The learning rate must be strictly positive, got %s.' % lr)
        if max_iters < 0:
            raise ValueError('max_iters can not be negative.')
        if optimizer not in ('adam', 'rmsprop'):
            raise ValueError('optimizer must be adam or rmsprop, got %s.' % optimizer)
        self.mode = mode
        self.batch_size = batch_size
        self.n_critic = n_critic
        self.clip = clip
        self.lr = lr
        self.max_iters = max_iters
        self.seed = seed
        self.nz = nz
        self.ngf = ngf
        self.ndf = ndf
        self.size = size
        self.optimizer = optimizer
        self.beta1 = beta1
        self.log_every = log_every
        self.checkpoint_every = checkpoint_every

    def optimizer_kwargs(self):
        if self.optimizer == 'adam':
            return dict(lr=self.lr, beta1=self.beta1, beta2=0.999, eps=1e-8)
        return dict(lr=self.lr, decay=0.9, eps=1e-8)


class LossTrace(object):
    """Per-iteration losses and update counters of a GAN run"""

    def __init__(self):
        self.rows = []
        self.d_updates = 0
        self.g_updates = 0

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def gan_losses(real_scores, fake_scores, mode):
    """Discriminator and generator losses from per-sample scores

       Arguments:
        | ``real_scores``, ``fake_scores``  --  Tensors with one score per
                                                image
        | ``mode``  --  'standard' or 'wgan'

       Returns (d_loss, g_loss), both scalar Tensors.
    """
    if mode == 'standard':
        for scores in real_scores, fake_scores:
            if not ((scores.data > 0) & (scores.data < 1)).all():
                raise DomainError('Standard-GAN scores must lie in (0, 1).')
        log_fake = (1 - fake_scores).log().mean()
        d_loss = -(real_scores.log().mean() + log_fake)
        return d_loss, log_fake
    elif mode == 'wgan':
        fake_mean = fake_scores.mean()
        return -(real_scores.mean() - fake_mean), -fake_mean
    raise ValueError('mode must be standard or wgan, got %s.' % mode)


def _guarded_scores(net, images, mode):
    scores = net(images)
    if mode == 'standard':
        scores = 1 - clamp_min(1 - clamp_min(scores, SCORE_GUARD), SCORE_GUARD)
    return scores


def train_gan(dataset, config, callback=None):
    """Train a generator and a discriminator

       Arguments:
        | ``dataset``  --  a Dataset of size×size images in [-1, 1]
        | ``config``  --  a GanConfig

       Optional argument:
        | ``callback``  --  called as callback(iteration, G, D) every
                            ``config.checkpoint_every`` iterations

       Returns (generator, discriminator, trace), where trace is a LossTrace
       with rows (iteration, d_loss, g_loss).
    """
    images = getattr(dataset, 'images', None)
    if images is None or len(images) == 0:
        raise UsageError('GAN training needs a nonempty dataset.')
    if images.shape[1:] != (config.size, config.size):
        raise UsageError('Dataset images are %i×%i, the networks expect %i×%i.' % (
            images.shape[1], images.shape[2], config.size, config.size))

    streams = RandomStreams(config.seed)
    generator = GeneratorNet(config.nz, config.ngf, config.size)
    init_parameters(generator, streams.generator('init-generator'))
    discriminator = DiscriminatorNet(config.ndf, config.size, config.mode)
    init_parameters(discriminator, streams.generator('init-discriminator'))
    opt_g = Optimizer(generator.parameters(), config.optimizer, **config.optimizer_kwargs())
    opt_d = Optimizer(discriminator.parameters(), config.optimizer, **config.optimizer_kwargs())
    rng_data = streams.generator('data')
    rng_latent = streams.generator('latent')
    generator.train()
    discriminator.train()

    m = config.batch_size
    trace = LossTrace()
    if log.do_medium:
        with log.section('GAN'):
            log('Training a %s GAN on %i images, %i iterations.' % (config.mode, len(images), config.max_iters))
            log('Generator parameters:    &%i' % generator.count_parameters())
            log('Discriminator parameters:&%i' % discriminator.count_parameters())
    with timer.section('GAN'):
        for iteration in range(1, config.max_iters + 1):
            for counter in range(config.n_critic):
                real = dataset.batch(rng_data.integers(0, len(images), m))
                # no tape is active, so the fake images are constants here
                fake = generator(Tensor(rng_latent.standard_normal((m, config.nz))))
                opt_d.zero_grad()
                with Tape() as tape:
                    d_loss, _ = gan_losses(
                        _guarded_scores(discriminator, real, config.mode),
                        _guarded_scores(discriminator, fake, config.mode),
                        config.mode)
                tape.backward(d_loss)
                opt_d.step()
                if config.mode == 'wgan':
                    clip_weights(discriminator.parameters(), config.clip)
                trace.d_updates += 1

            z = Tensor(rng_latent.standard_normal((m, config.nz)))
            opt_g.zero_grad()
            with Tape() as tape:
                fake_scores = _guarded_scores(discriminator, generator(z), config.mode)
                if config.mode == 'standard':
                    g_loss = (1 - fake_scores).log().mean()
                else:
                    g_loss = -fake_scores.mean()
            tape.backward(g_loss)
            opt_g.step()
            trace.g_updates += 1

            row = (iteration, d_loss.item(), g_loss.item())
            if not (np.isfinite(row[1]) and np.isfinite(row[2])):
                raise TrainingError('GAN training diverged at iteration %i: d_loss=%s, g_loss=%s.' % row)
            trace.rows.append(row)
            if log.do_high or (log.do_medium and iteration % config.log_every == 0):
                with log.section('GAN'):
                    log('Iteration %6i   d_loss %12.5e   g_loss %12.5e' % row)
            if callback is not None and iteration % config.checkpoint_every == 0:
                callback(iteration, generator, discriminator)
    return generator, discriminator, trace


def sample_unconditional(generator, count, seed):
    """Evaluate the generator on count standard-normal latent vectors

       Returns a count×1×H×W numpy array.
    """
    if count == 0:
        return np.zeros((0, 1, generator.size, generator.size), np.float32)
    rng = RandomStreams(seed).generator('latent')
    return generator.predict(rng.standard_normal((count, generator.nz)))
