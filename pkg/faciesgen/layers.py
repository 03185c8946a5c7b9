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
"""Network building blocks and the three architectures

   * :class:`GeneratorNet` maps a latent vector (default length 30) through a
     stack of transposed convolutions to a single-channel image with values in
     [-1, 1]. With the defaults: 30×1×1 -> 512×4×4 -> 256×8×8 -> 128×16×16 ->
     64×32×32 -> 1×64×64.
   * :class:`DiscriminatorNet` mirrors the generator with strided
     convolutions and LeakyReLU(0.2) activations. In 'wgan' mode the output is
     an unbounded critic score and batch normalization is left out. In
     'standard' mode a sigmoid squashes the score into (0, 1).
   * :class:`InferenceNet` is a fully connected SeLU network 30 -> 512 ->
     (5×) 512 -> 30 without output nonlinearity.

   Parameters are registered under unique dotted names, e.g. ``bn1.gamma``.
"""


from __future__ import division

from collections import OrderedDict
from contextlib import contextmanager

import numpy as np

from faciesgen.autodiff import Tensor, ShapeError, UsageError, matmul, \
    transpose, add_bias, elementwise, conv2d, conv_transpose2d, batch_norm, \
    reshape


__all__ = [
    'Layer', 'LinearLayer', 'ConvLayer', 'ConvTLayer', 'BatchNormLayer',
    'ActivationLayer', 'Network', 'GeneratorNet', 'DiscriminatorNet',
    'InferenceNet', 'init_parameters', 'generator_forward',
    'inference_forward', 'batchnorm_forward', 'network_from_state',
]


class Layer(object):
    """Base class for all layers

       Subclasses register their trainable tensors in ``self.params`` and
       their non-trainable state in ``self.buffers``.
    """
    def __init__(self):
        self.params = OrderedDict()
        self.buffers = OrderedDict()

    def forward(self, x, training):
        raise NotImplementedError


class AffineLayer(Layer):
    """Common base of layers with a weight tensor and a bias"""
    kernel = None
    fan_in = None

    def _register(self, kernel_name, kernel_shape, nbias):
        kernel = Tensor(np.zeros(kernel_shape), requires_grad=True)
        bias = Tensor(np.zeros(nbias), requires_grad=True)
        setattr(self, kernel_name, kernel)
        self.bias = bias
        self.kernel = kernel
        self.params[kernel_name] = kernel
        self.params['bias'] = bias


class LinearLayer(AffineLayer):
    def __init__(self, nin, nout):
        Layer.__init__(self)
        if nin < 1 or nout < 1:
            raise ValueError('Layer sizes must be positive.')
        self.nin = nin
        self.nout = nout
        self.fan_in = nin
        self._register('weight', (nout, nin), nout)

    def forward(self, x, training):
        if x.ndim != 2 or x.shape[1] != self.nin:
            raise ShapeError('LinearLayer expects B×%i input, got shape %s.' % (self.nin, x.shape))
        return add_bias(matmul(x, transpose(self.weight)), self.bias, axis=1)


class ConvLayer(AffineLayer):
    """Strided convolution, filters of shape C_out×C_in×f×f"""
    def __init__(self, cin, cout, f, stride=1, padding=0):
        Layer.__init__(self)
        if f < 1 or stride < 1 or padding < 0:
            raise ValueError('Invalid convolution geometry: f=%i stride=%i padding=%i.' % (f, stride, padding))
        self.cin = cin
        self.cout = cout
        self.f = f
        self.stride = stride
        self.padding = padding
        self.fan_in = cin*f*f
        self._register('filters', (cout, cin, f, f), cout)

    def forward(self, x, training):
        return conv2d(x, self.filters, self.bias, self.stride, self.padding)


class ConvTLayer(AffineLayer):
    """Transposed convolution, filters of shape C_in×C_out×f×f

       The filters have the layout of the convolution this layer is the
       adjoint of, i.e. the first axis runs over the input channels here.
    """
    def __init__(self, cin, cout, f, stride=1, padding=0):
        Layer.__init__(self)
        if f < 1 or stride < 1 or padding < 0:
            raise ValueError('Invalid convolution geometry: f=%i stride=%i padding=%i.' % (f, stride, padding))
        self.cin = cin
        self.cout = cout
        self.f = f
        self.stride = stride
        self.padding = padding
        self.fan_in = cin*f*f//(stride*stride)
        self._register('filters', (cin, cout, f, f), cout)

    def forward(self, x, training):
        return conv_transpose2d(x, self.filters, self.bias, self.stride, self.padding)


class BatchNormLayer(Layer):
    def __init__(self, nchannel, eps=1e-5, momentum=0.1):
        Layer.__init__(self)
        if eps <= 0:
            raise ValueError('eps must be strictly positive.')
        self.nchannel = nchannel
        self.eps = eps
        self.momentum = momentum
        self.gamma = Tensor(np.ones(nchannel), requires_grad=True)
        self.beta = Tensor(np.zeros(nchannel), requires_grad=True)
        self.running_mean = Tensor(np.zeros(nchannel))
        self.running_var = Tensor(np.ones(nchannel))
        self.params['gamma'] = self.gamma
        self.params['beta'] = self.beta
        self.buffers['running_mean'] = self.running_mean
        self.buffers['running_var'] = self.running_var

    def forward(self, x, training):
        return batch_norm(
            x, self.gamma, self.beta, self.running_mean.data,
            self.running_var.data, training, self.momentum, self.eps)


class ActivationLayer(Layer):
    def __init__(self, kind):
        Layer.__init__(self)
        self.kind = kind

    def forward(self, x, training):
        if self.kind == 'identity':
            return x
        return elementwise(x, self.kind)


def batchnorm_forward(layer, x, mode):
    """Apply a BatchNormLayer in 'train' or 'eval' mode"""
    if mode not in ('train', 'eval'):
        raise ValueError('mode must be train or eval, got %s.' % mode)
    return layer.forward(x, mode == 'train')


class Network(object):
    """An ordered stack of named layers"""

    def __init__(self):
        self.layers = OrderedDict()
        self.mode = 'train'

    def add_layer(self, name, layer):
        if name in self.layers:
            raise ValueError('Layer name %s is used twice.' % name)
        self.layers[name] = layer

    def forward(self, x):
        training = self.mode == 'train'
        for layer in self.layers.values():
            x = layer.forward(x, training)
        return x

    def __call__(self, x):
        return self.forward(x)

    def predict(self, x, batch_size=64):
        """Evaluate the network in eval mode on an array, batch by batch

           The parameters are frozen during the evaluation, so no tape, not
           even an enclosing one, records anything. The mode is restored
           afterwards. Returns a numpy array, with zero rows for an empty
           input.
        """
        x = np.asarray(x)
        dtype = self.parameters()[0].dtype
        old_mode = self.mode
        self.mode = 'eval'
        try:
            with self.frozen():
                if len(x) == 0:
                    # one dummy row fixes the output shape
                    out = self.forward(Tensor(np.zeros((1,) + x.shape[1:]), dtype=dtype))
                    return np.zeros((0,) + out.shape[1:], dtype)
                results = []
                for start in range(0, len(x), batch_size):
                    out = self.forward(Tensor(x[start:start+batch_size], dtype=dtype))
                    results.append(out.data)
        finally:
            self.mode = old_mode
        return np.concatenate(results)

    def train(self):
        self.mode = 'train'
        return self

    def eval(self):
        self.mode = 'eval'
        return self

    def named_parameters(self):
        result = OrderedDict()
        for lname, layer in self.layers.items():
            for pname, tensor in layer.params.items():
                result['%s.%s' % (lname, pname)] = tensor
        return result

    def parameters(self):
        return list(self.named_parameters().values())

    def named_buffers(self):
        result = OrderedDict()
        for lname, layer in self.layers.items():
            for bname, tensor in layer.buffers.items():
                result['%s.%s' % (lname, bname)] = tensor
        return result

    def count_parameters(self):
        return sum(p.size for p in self.parameters())

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    @contextmanager
    def frozen(self):
        """Leave the parameters out of all tapes and backward passes in the
           with block
        """
        params = self.parameters()
        old = [p.requires_grad for p in params]
        for p in params:
            p.requires_grad = False
        try:
            yield self
        finally:
            for p, requires_grad in zip(params, old):
                p.requires_grad = requires_grad

    def cast(self, dtype):
        """Convert all parameters and buffers to another floating point type"""
        for tensor in list(self.parameters()) + list(self.named_buffers().values()):
            tensor.data = tensor.data.astype(dtype)
            if tensor.grad is not None:
                tensor.grad = np.zeros_like(tensor.data)
        return self

    def state_dict(self):
        """Return copies of all parameters and buffers, keyed by dotted name"""
        result = OrderedDict()
        for name, tensor in self.named_parameters().items():
            result[name] = tensor.data.copy()
        for name, tensor in self.named_buffers().items():
            result[name] = tensor.data.copy()
        return result

    def load_state_dict(self, state):
        """Copy arrays into the parameters and buffers

           The keys must match the network exactly and the shapes must agree.
        """
        tensors = OrderedDict(self.named_parameters())
        tensors.update(self.named_buffers())
        missing = set(tensors) - set(state)
        unexpected = set(state) - set(tensors)
        if missing or unexpected:
            raise UsageError('State does not match the network: missing %s, unexpected %s.' % (
                sorted(missing), sorted(unexpected)))
        for name, tensor in tensors.items():
            value = np.asarray(state[name])
            if value.shape != tensor.shape:
                raise ShapeError('State entry %s has shape %s, expected %s.' % (name, value.shape, tensor.shape))
            tensor.data[...] = value


def _check_size(size):
    nlevel = int(round(np.log2(size))) if size > 0 else 0
    if size < 16 or 2**nlevel != size:
        raise ShapeError('The image size must be a power of two, at least 16, got %i.' % size)
    return nlevel - 2


class GeneratorNet(Network):
    """Latent vector -> single-channel image in [-1, 1]"""

    def __init__(self, nz=30, ngf=64, size=64):
        """
           Optional arguments:
            | ``nz``  --  the latent dimension [default=30]
            | ``ngf``  --  the number of channels before the output layer
                           [default=64]
            | ``size``  --  the image height and width, a power of two
                            [default=64]
        """
        Network.__init__(self)
        nup = _check_size(size)
        self.nz = nz
        self.ngf = ngf
        self.size = size
        channels = [ngf*2**(nup - 1 - i) for i in range(nup)]
        self.add_layer('convt0', ConvTLayer(nz, channels[0], 4, 1, 0))
        self.add_layer('bn0', BatchNormLayer(channels[0]))
        self.add_layer('relu0', ActivationLayer('relu'))
        for i in range(1, nup):
            self.add_layer('convt%i' % i, ConvTLayer(channels[i-1], channels[i], 4, 2, 1))
            self.add_layer('bn%i' % i, BatchNormLayer(channels[i]))
            self.add_layer('relu%i' % i, ActivationLayer('relu'))
        self.add_layer('convt%i' % nup, ConvTLayer(channels[-1], 1, 4, 2, 1))
        self.add_layer('tanh', ActivationLayer('tanh'))

    def forward(self, z):
        if z.ndim != 2 or z.shape[1] != self.nz:
            raise ShapeError('The generator expects B×%i latent vectors, got shape %s.' % (self.nz, z.shape))
        return Network.forward(self, reshape(z, (z.shape[0], self.nz, 1, 1)))


class DiscriminatorNet(Network):
    """Single-channel image -> one score per image"""

    def __init__(self, ndf=64, size=64, mode='wgan'):
        """
           Optional arguments:
            | ``ndf``  --  the number of channels after the first layer
                           [default=64]
            | ``size``  --  the image height and width [default=64]
            | ``mode``  --  'wgan' (critic without batch normalization and
                            without output squashing) or 'standard' (sigmoid
                            output) [default='wgan']
        """
        Network.__init__(self)
        if mode not in ('wgan', 'standard'):
            raise ValueError('mode must be wgan or standard, got %s.' % mode)
        ndown = _check_size(size)
        self.ndf = ndf
        self.size = size
        self.score_mode = mode
        self.add_layer('conv0', ConvLayer(1, ndf, 4, 2, 1))
        self.add_layer('lrelu0', ActivationLayer('leaky_relu'))
        for i in range(1, ndown):
            self.add_layer('conv%i' % i, ConvLayer(ndf*2**(i - 1), ndf*2**i, 4, 2, 1))
            if mode == 'standard':
                self.add_layer('bn%i' % i, BatchNormLayer(ndf*2**i))
            self.add_layer('lrelu%i' % i, ActivationLayer('leaky_relu'))
        self.add_layer('conv%i' % ndown, ConvLayer(ndf*2**(ndown - 1), 1, 4, 1, 0))
        if mode == 'standard':
            self.add_layer('sigmoid', ActivationLayer('sigmoid'))

    def forward(self, y):
        if y.ndim != 4 or y.shape[1:] != (1, self.size, self.size):
            raise ShapeError('The discriminator expects B×1×%i×%i images, got shape %s.' % (self.size, self.size, y.shape))
        scores = Network.forward(self, y)
        return reshape(scores, (y.shape[0],))


class InferenceNet(Network):
    """Source vector w -> latent vector z, fully connected"""

    def __init__(self, nw=30, hidden=512, depth=5, nz=None, activation='selu'):
        """
           Optional arguments:
            | ``nw``  --  the source dimension [default=30]
            | ``hidden``  --  the width of the intermediate layers [default=512]
            | ``depth``  --  the number of hidden-to-hidden layers [default=5]
            | ``nz``  --  the output dimension [default=nw]
            | ``activation``  --  the nonlinearity after every layer except
                                  the last one [default='selu']
        """
        Network.__init__(self)
        if nz is None:
            nz = nw
        self.nw = nw
        self.nz = nz
        self.hidden = hidden
        self.depth = depth
        self.add_layer('fc0', LinearLayer(nw, hidden))
        self.add_layer('act0', ActivationLayer(activation))
        for i in range(1, depth + 1):
            self.add_layer('fc%i' % i, LinearLayer(hidden, hidden))
            self.add_layer('act%i' % i, ActivationLayer(activation))
        self.add_layer('out', LinearLayer(hidden, nz))


def generator_forward(generator, z):
    return generator(z)


def inference_forward(inference, w):
    return inference(w)


def init_parameters(net, seed, scheme='normal', std=0.02):
    """Initialize all parameters of a network in place

       Arguments:
        | ``net``  --  a Network
        | ``seed``  --  an integer seed or a numpy Generator

       Optional arguments:
        | ``scheme``  --  'normal': weights ~ N(0, std²); 'lecun': weights ~
                          N(0, 1/fan_in) [default='normal']
        | ``std``  --  [default=0.02]

       Biases and batch-norm shifts are set to zero, batch-norm scales to one
       and the running statistics to (0, 1).
    """
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.default_rng(seed)
    if scheme not in ('normal', 'lecun'):
        raise ValueError('Unknown initialization scheme: %s' % scheme)
    for layer in net.layers.values():
        if isinstance(layer, AffineLayer):
            if scheme == 'normal':
                sigma = std
            else:
                sigma = 1.0/np.sqrt(layer.fan_in)
            kernel = layer.kernel
            kernel.data[...] = rng.standard_normal(kernel.shape)*sigma
            layer.bias.data[...] = 0
        elif isinstance(layer, BatchNormLayer):
            layer.gamma.data[...] = 1
            layer.beta.data[...] = 0
            layer.running_mean.data[...] = 0
            layer.running_var.data[...] = 1
    net.zero_grad()


def _count_prefix(state, prefix, suffix):
    counter = 0
    while '%s%i.%s' % (prefix, counter, suffix) in state:
        counter += 1
    return counter


def network_from_state(state):
    """Rebuild a network from the tensors of a checkpoint

       The architecture is inferred from the names and shapes of the tensors.
    """
    if 'convt0.filters' in state:
        nconvt = _count_prefix(state, 'convt', 'filters')
        nup = nconvt - 1
        nz, c0 = state['convt0.filters'].shape[:2]
        net = GeneratorNet(nz=nz, ngf=c0//2**(nup - 1), size=4*2**nup)
    elif 'conv0.filters' in state:
        nconv = _count_prefix(state, 'conv', 'filters')
        ndown = nconv - 1
        mode = 'standard' if 'bn1.gamma' in state else 'wgan'
        net = DiscriminatorNet(ndf=state['conv0.filters'].shape[0], size=4*2**ndown, mode=mode)
    elif 'fc0.weight' in state:
        depth = _count_prefix(state, 'fc', 'weight') - 1
        hidden, nw = state['fc0.weight'].shape
        nz = state['out.weight'].shape[0]
        net = InferenceNet(nw=nw, hidden=hidden, depth=depth, nz=nz)
    else:
        raise UsageError('Could not recognize the network in the checkpoint.')
    net.load_state_dict(state)
    return net
