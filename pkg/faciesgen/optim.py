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
"""Parameter update rules used by the GAN trainer and the sampler trainer

   The functions :func:`sgd_step`, :func:`adam_step` and :func:`rmsprop_step`
   update a list of parameter tensors in place, given a list of gradient
   arrays. The :class:`Optimizer` class bundles the parameters with an
   :class:`OptimizerState` and takes the gradients from the ``grad``
   attributes::

       opt = Optimizer(net.parameters(), 'adam', lr=1e-4, beta1=0.5)
       ...
       tape.backward(loss)
       opt.step()
       opt.zero_grad()
"""


from __future__ import division

import numpy as np

from faciesgen.autodiff import UsageError, ShapeError


__all__ = [
    'OptimizerState', 'Optimizer', 'sgd_step', 'adam_step', 'rmsprop_step',
    'clip_weights',
]


class OptimizerState(object):
    """Moment buffers, step counter and hyperparameters of one optimizer

       The buffers are kept in 64-bit floats, also for 32-bit parameters.
    """
    kinds = ('sgd', 'adam', 'rmsprop')

    def __init__(self, params, kind='adam', lr=1e-4, beta1=0.9, beta2=0.999,
                 eps=1e-8, decay=0.9):
        """
           Arguments:
            | ``params``  --  the list of parameter tensors

           Optional arguments:
            | ``kind``  --  'sgd', 'adam' or 'rmsprop' [default='adam']
            | ``lr``  --  the learning rate [default=1e-4]
            | ``beta1``, ``beta2``  --  Adam decay rates of the first and
                                        second moment [default=0.9, 0.999]
            | ``eps``  --  added to the root of the second moment
                           [default=1e-8]
            | ``decay``  --  RMSProp decay rate of the mean square
                             [default=0.9]
        """
        if kind not in self.kinds:
            raise ValueError('Unknown optimizer: %s' % kind)
        if lr <= 0:
            raise ValueError('The learning rate must be strictly positive.')
        for name, value in ('beta1', beta1), ('beta2', beta2), ('decay', decay):
            if not 0 <= value < 1:
                raise ValueError('%s must be in [0, 1), got %s.' % (name, value))
        if eps <= 0:
            raise ValueError('eps must be strictly positive.')
        self.kind = kind
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.decay = decay
        self.shapes = [p.shape for p in params]
        self.counter = 0
        if kind == 'adam':
            self.m = [np.zeros(shape) for shape in self.shapes]
            self.v = [np.zeros(shape) for shape in self.shapes]
        elif kind == 'rmsprop':
            self.ms = [np.zeros(shape) for shape in self.shapes]


def _check_grads(params, grads, state=None):
    if len(params) != len(grads):
        raise UsageError('Got %i parameters but %i gradients.' % (len(params), len(grads)))
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            raise UsageError('Parameter %i has no gradient. Was it part of the backward pass?' % i)
        if g.shape != p.shape:
            raise ShapeError('Gradient %i has shape %s, parameter has shape %s.' % (i, g.shape, p.shape))
        if state is not None and state.shapes[i] != p.shape:
            raise ShapeError('Optimizer state %i does not match parameter shape %s.' % (i, p.shape))


def sgd_step(params, grads, lr):
    """In-place gradient descent update p <- p - lr*g"""
    _check_grads(params, grads)
    for p, g in zip(params, grads):
        p.data -= (lr*g).astype(p.dtype, copy=False)


def adam_step(params, grads, state):
    """In-place Adam update with bias-corrected moments"""
    _check_grads(params, grads, state)
    state.counter += 1
    b1 = state.beta1
    b2 = state.beta2
    correction1 = 1 - b1**state.counter
    correction2 = 1 - b2**state.counter
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1 - b1)*g
        v *= b2
        v += (1 - b2)*np.square(g, dtype=np.float64)
        update = state.lr*(m/correction1)/(np.sqrt(v/correction2) + state.eps)
        p.data -= update.astype(p.dtype)


def rmsprop_step(params, grads, state):
    """In-place RMSProp update p <- p - lr*g/(sqrt(ms) + eps)"""
    _check_grads(params, grads, state)
    state.counter += 1
    for p, g, ms in zip(params, grads, state.ms):
        ms *= state.decay
        ms += (1 - state.decay)*np.square(g, dtype=np.float64)
        update = state.lr*g/(np.sqrt(ms) + state.eps)
        p.data -= update.astype(p.dtype)


def clip_weights(params, c):
    """Clamp every parameter entry to [-c, c], in place"""
    if c <= 0:
        raise ValueError('The clipping bound must be strictly positive, got %s.' % c)
    for p in params:
        np.clip(p.data, -c, c, out=p.data)


class Optimizer(object):
    """Parameters plus the state of one update rule"""

    def __init__(self, params, kind='adam', **kwargs):
        self.params = list(params)
        self.state = OptimizerState(self.params, kind, **kwargs)

    kind = property(lambda self: self.state.kind)

    def step(self):
        grads = [p.grad for p in self.params]
        if self.state.kind == 'sgd':
            sgd_step(self.params, grads, self.state.lr)
            self.state.counter += 1
        elif self.state.kind == 'adam':
            adam_step(self.params, grads, self.state)
        else:
            rmsprop_step(self.params, grads, self.state)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()
