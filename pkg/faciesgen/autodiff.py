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
"""Reverse-mode automatic differentiation on dense numpy arrays

   A :class:`Tensor` wraps a numpy array (32-bit floats unless requested
   otherwise). Primitives applied while a :class:`Tape` is active are recorded
   on that tape, together with their backward rule, as soon as one of the
   inputs requires a gradient. The tape is rebuilt for every forward pass::

       x = Tensor([1.0, 2.0], requires_grad=True)
       with Tape() as tape:
           loss = (x*x).sum()
       tape.backward(loss)
       # x.grad is now [2.0, 4.0]

   Outside of a tape, primitives just compute values. Gradients of leaves
   (tensors created by the user with ``requires_grad=True``) are accumulated
   with ``+=``. Call :meth:`Tensor.zero_grad` to reset them.

   Broadcasting is restricted to scalar operands and to :func:`add_bias`. All
   other binary primitives require identical shapes.
"""


from __future__ import division

import threading

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit, logsumexp as _logsumexp


__all__ = [
    'ShapeError', 'DomainError', 'UsageError', 'SELU_LAMBDA', 'SELU_ALPHA',
    'LEAKY_SLOPE', 'Tensor', 'Tape', 'as_tensor', 'backward', 'matmul',
    'transpose', 'add', 'sub', 'mul', 'scale', 'shift', 'add_bias',
    'elementwise', 'clamp_min', 'reduce', 'reshape', 'stack', 'index_rows',
    'take_pixels', 'logsumexp', 'conv1d_valid', 'conv2d', 'conv_transpose2d',
    'conv_output_size', 'conv_transpose_output_size', 'batch_norm',
    'check_gradient',
]


SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772
LEAKY_SLOPE = 0.2

# Sums over more elements than this use a 64-bit accumulator.
LARGE_REDUCTION = 1024


class ShapeError(ValueError):
    """Raised when the dimensions of operands are incompatible"""
    pass


class DomainError(ValueError):
    """Raised when an operand lies outside the domain of a primitive"""
    pass


class UsageError(Exception):
    """Raised when a routine is called in a way that violates its contract"""
    pass


_state = threading.local()


def _active_tape():
    stack = getattr(_state, 'stack', None)
    if stack:
        return stack[-1]
    return None


class Tensor(object):
    """A dense array with an optional gradient"""

    def __init__(self, data, requires_grad=False, dtype=np.float32):
        """
           Argument:
            | ``data``  --  anything numpy can turn into an array

           Optional arguments:
            | ``requires_grad``  --  when True, backward passes accumulate the
                                     gradient in the ``grad`` attribute
            | ``dtype``  --  the floating point type [default=np.float32]. Use
                             np.float64 for finite-difference checks.
        """
        data = np.array(data, dtype=dtype)
        if data.ndim == 0:
            data = data.reshape(1)
        if data.size == 0:
            raise ShapeError('A tensor must have at least one element, got shape %s.' % (data.shape,))
        self.data = data
        self.requires_grad = bool(requires_grad)
        if self.requires_grad:
            self.grad = np.zeros_like(data)
        else:
            self.grad = None
        self._tape = None
        self._index = None

    shape = property(lambda self: self.data.shape)
    ndim = property(lambda self: self.data.ndim)
    size = property(lambda self: self.data.size)
    dtype = property(lambda self: self.data.dtype)

    def __repr__(self):
        return 'Tensor(shape=%s, dtype=%s, requires_grad=%s)' % (self.shape, self.dtype, self.requires_grad)

    def numpy(self):
        """Return the underlying array (not a copy)"""
        return self.data

    def item(self):
        if self.size != 1:
            raise UsageError('Only tensors with one element can be converted to a scalar.')
        return float(self.data.ravel()[0])

    def zero_grad(self):
        if self.grad is not None:
            self.grad[...] = 0

    def is_leaf(self):
        return self._tape is None

    def __add__(self, other):
        if isinstance(other, Tensor):
            return add(self, other)
        return shift(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return sub(self, other)
        return shift(self, -float(other))

    def __rsub__(self, other):
        return shift(scale(self, -1.0), other)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise UsageError('Division by a tensor is not supported.')
        return scale(self, 1.0/float(other))

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None):
        return reduce(self, 'sum', axis)

    def mean(self, axis=None):
        return reduce(self, 'mean', axis)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return reshape(self, shape)

    def transpose(self):
        return transpose(self)

    def relu(self):
        return elementwise(self, 'relu')

    def tanh(self):
        return elementwise(self, 'tanh')

    def sigmoid(self):
        return elementwise(self, 'sigmoid')

    def square(self):
        return elementwise(self, 'square')

    def log(self):
        return elementwise(self, 'log')


def as_tensor(x, dtype=None):
    """Return x when it is a Tensor, a constant Tensor otherwise"""
    if isinstance(x, Tensor):
        return x
    if dtype is None:
        dtype = np.float32
    return Tensor(x, dtype=dtype)


def _constant_like(value, like):
    return Tensor(value, dtype=like.dtype)


class Tape(object):
    """The ordered record of primitive applications of one forward pass

       A tape is a context manager. It is confined to the thread that entered
       it. Nested tapes are allowed; primitives are recorded on the innermost
       one.
    """
    def __init__(self):
        self.nodes = []

    def __enter__(self):
        stack = getattr(_state, 'stack', None)
        if stack is None:
            stack = []
            _state.stack = stack
        stack.append(self)
        return self

    def __exit__(self, *exc_info):
        stack = _state.stack
        if len(stack) == 0 or stack[-1] is not self:
            raise UsageError('Tapes must be exited in the reverse order of entering.')
        stack.pop()
        return False

    def record(self, inputs, output, rule):
        output._tape = self
        output._index = len(self.nodes)
        self.nodes.append((inputs, output, rule))

    def backward(self, loss):
        """Accumulate d loss / d leaf into the grad attribute of all leaves

           Argument:
            | ``loss``  --  a Tensor with a single element, recorded on this
                            tape
        """
        if not isinstance(loss, Tensor) or loss.size != 1:
            raise UsageError('The loss must be a scalar tensor, got %r.' % (loss,))
        if loss._tape is not self:
            raise UsageError('The loss was not recorded on this tape.')
        grads = {id(loss): np.ones(loss.shape, loss.dtype)}
        for inputs, output, rule in reversed(self.nodes[:loss._index+1]):
            g = grads.pop(id(output), None)
            if g is None:
                continue
            for tensor, tg in zip(inputs, rule(g)):
                if tg is None or not tensor.requires_grad:
                    continue
                if tensor._tape is None:
                    tensor.grad += tg
                elif tensor._tape is self:
                    key = id(tensor)
                    if key in grads:
                        grads[key] = grads[key] + tg
                    else:
                        grads[key] = tg


def backward(loss):
    """Back-propagate from a scalar loss through the tape it was recorded on"""
    if not isinstance(loss, Tensor) or loss.size != 1:
        raise UsageError('The loss must be a scalar tensor, got %r.' % (loss,))
    if loss._tape is None:
        raise UsageError('The loss was not recorded on a tape.')
    loss._tape.backward(loss)


def _result(value, inputs, rule):
    if value.ndim == 0:
        value = value.reshape(1)
    out = Tensor.__new__(Tensor)
    out.data = value
    out.grad = None
    out.requires_grad = False
    out._tape = None
    out._index = None
    tape = _active_tape()
    if tape is not None:
        for tensor in inputs:
            if tensor.requires_grad and (tensor._tape is None or tensor._tape is tape):
                out.requires_grad = True
                tape.record(tuple(inputs), out, rule)
                break
    return out


def _check_same_shape(name, a, b):
    if a.shape != b.shape:
        raise ShapeError('%s: shapes %s and %s do not match.' % (name, a.shape, b.shape))


def matmul(a, b):
    """Matrix product of two 2D tensors"""
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError('matmul: cannot multiply shape %s with shape %s.' % (a.shape, b.shape))
    def rule(g):
        return (
            np.dot(g, b.data.T) if a.requires_grad else None,
            np.dot(a.data.T, g) if b.requires_grad else None,
        )
    return _result(np.dot(a.data, b.data), (a, b), rule)


def transpose(a):
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError('transpose: expecting a 2D tensor, got shape %s.' % (a.shape,))
    return _result(np.ascontiguousarray(a.data.T), (a,), lambda g: (g.T,))


def add(a, b):
    _check_same_shape('add', a, b)
    return _result(a.data + b.data, (a, b), lambda g: (g, g))


def sub(a, b):
    _check_same_shape('sub', a, b)
    return _result(a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a, b):
    _check_same_shape('mul', a, b)
    return _result(a.data*b.data, (a, b), lambda g: (g*b.data, g*a.data))


def scale(x, c):
    """Multiply all entries by the scalar c"""
    c = float(c)
    return _result(x.data*c, (x,), lambda g: (g*c,))


def shift(x, c):
    """Add the scalar c to all entries"""
    c = float(c)
    return _result(x.data + c, (x,), lambda g: (g,))


def add_bias(x, b, axis=1):
    """Add a 1D tensor b along the given axis of x

       This is the only form of broadcasting supported between tensors.
    """
    b = as_tensor(b, x.dtype)
    if axis < 0 or axis >= x.ndim or b.ndim != 1 or b.shape[0] != x.shape[axis]:
        raise ShapeError('add_bias: bias of shape %s does not fit axis %i of shape %s.' % (b.shape, axis, x.shape))
    bshape = [1]*x.ndim
    bshape[axis] = b.shape[0]
    other = tuple(i for i in range(x.ndim) if i != axis)
    def rule(g):
        return g, (g.sum(axis=other) if b.requires_grad else None)
    return _result(x.data + b.data.reshape(bshape), (x, b), rule)


def elementwise(x, kind):
    """Apply a scalar function to every entry

       Arguments:
        | ``x``  --  a Tensor
        | ``kind``  --  one of 'relu', 'leaky_relu', 'tanh', 'selu',
                        'sigmoid', 'square', 'log', 'exp', 'sqrt'
    """
    d = x.data
    if kind == 'relu':
        value = np.maximum(d, 0)
        rule = lambda g: (g*(d > 0),)
    elif kind == 'leaky_relu':
        slope = np.where(d > 0, 1.0, LEAKY_SLOPE).astype(d.dtype)
        value = d*slope
        rule = lambda g: (g*slope,)
    elif kind == 'tanh':
        value = np.tanh(d)
        rule = lambda g: (g*(1 - value*value),)
    elif kind == 'selu':
        negexp = np.exp(np.minimum(d, 0))
        value = SELU_LAMBDA*np.where(d > 0, d, SELU_ALPHA*(negexp - 1))
        rule = lambda g: (g*(SELU_LAMBDA*np.where(d > 0, 1.0, SELU_ALPHA*negexp)).astype(d.dtype),)
    elif kind == 'sigmoid':
        value = expit(d)
        rule = lambda g: (g*value*(1 - value),)
    elif kind == 'square':
        value = d*d
        rule = lambda g: (2*g*d,)
    elif kind == 'log':
        if not (d > 0).all():
            raise DomainError('log: all entries must be strictly positive, minimum is %s.' % d.min())
        value = np.log(d)
        rule = lambda g: (g/d,)
    elif kind == 'exp':
        value = np.exp(d)
        rule = lambda g: (g*value,)
    elif kind == 'sqrt':
        if (d < 0).any():
            raise DomainError('sqrt: all entries must be nonnegative, minimum is %s.' % d.min())
        value = np.sqrt(d)
        rule = lambda g: (np.divide(0.5*g, value, out=np.zeros_like(value), where=value > 0),)
    else:
        raise ValueError('Unknown elementwise function: %s' % kind)
    return _result(value.astype(d.dtype, copy=False), (x,), rule)


def clamp_min(x, floor):
    """Replace entries below floor by floor; no gradient flows through those"""
    floor = float(floor)
    mask = x.data > floor
    return _result(np.maximum(x.data, floor), (x,), lambda g: (g*mask,))


def reduce(x, kind, axis=None):
    """Sum or average over one axis or over all entries

       Arguments:
        | ``x``  --  a Tensor
        | ``kind``  --  'sum' or 'mean'

       Optional argument:
        | ``axis``  --  the axis to reduce, or None for all entries
    """
    if kind not in ('sum', 'mean'):
        raise ValueError('Unknown reduction: %s' % kind)
    if axis is not None:
        if axis < -x.ndim or axis >= x.ndim:
            raise ShapeError('reduce: invalid axis %i for shape %s.' % (axis, x.shape))
        axis = axis % x.ndim
        count = x.shape[axis]
    else:
        count = x.size
    if x.size > LARGE_REDUCTION:
        value = np.sum(x.data, axis=axis, dtype=np.float64)
    else:
        value = np.sum(x.data, axis=axis)
    if kind == 'mean':
        value = value/count
    value = np.asarray(value).astype(x.dtype)
    reduced_shape = value.shape
    factor = 1.0/count if kind == 'mean' else 1.0
    def rule(g):
        g = g.reshape(reduced_shape)
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g*factor, x.shape).copy(),)
    return _result(value, (x,), rule)


def reshape(x, shape):
    shape = tuple(shape)
    try:
        value = x.data.reshape(shape)
    except ValueError:
        raise ShapeError('reshape: cannot reshape %s into %s.' % (x.shape, shape))
    return _result(value, (x,), lambda g: (g.reshape(x.shape),))


def stack(tensors, axis=0):
    """Stack tensors of identical shape along a new axis"""
    tensors = list(tensors)
    for t in tensors[1:]:
        _check_same_shape('stack', tensors[0], t)
    value = np.stack([t.data for t in tensors], axis=axis)
    def rule(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))
    return _result(value, tensors, rule)


def index_rows(x, indices):
    """Select rows of a 2D tensor, rows may be repeated"""
    indices = np.asarray(indices, dtype=np.intp)
    if x.ndim != 2:
        raise ShapeError('index_rows: expecting a 2D tensor, got shape %s.' % (x.shape,))
    def rule(g):
        result = np.zeros_like(x.data)
        np.add.at(result, indices, g)
        return (result,)
    return _result(x.data[indices], (x,), rule)


def take_pixels(x, rows, cols):
    """Gather pixel values from a batch of single-channel images

       Arguments:
        | ``x``  --  a Tensor of shape B×1×H×W or B×H×W
        | ``rows``, ``cols``  --  integer index arrays of equal length n

       Returns a B×n tensor.
    """
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    if x.ndim == 4:
        if x.shape[1] != 1:
            raise ShapeError('take_pixels: expecting one channel, got shape %s.' % (x.shape,))
        index = (slice(None), 0, rows, cols)
    elif x.ndim == 3:
        index = (slice(None), rows, cols)
    else:
        raise ShapeError('take_pixels: expecting images, got shape %s.' % (x.shape,))
    def rule(g):
        result = np.zeros_like(x.data)
        np.add.at(result, index, g)
        return (result,)
    return _result(x.data[index], (x,), rule)


def logsumexp(x, axis=1):
    """Numerically stable log(sum(exp(x))) over one axis"""
    if axis < 0 or axis >= x.ndim:
        raise ShapeError('logsumexp: invalid axis %i for shape %s.' % (axis, x.shape))
    value = np.asarray(_logsumexp(x.data, axis=axis)).astype(x.dtype)
    def rule(g):
        weights = np.exp(x.data - np.expand_dims(value, axis))
        return (np.expand_dims(g.reshape(value.shape), axis)*weights,)
    return _result(value, (x,), rule)


def conv1d_valid(u, a):
    """One-dimensional valid cross-correlation, v_i = sum_j u_{i+j} a_j"""
    if u.ndim != 1 or a.ndim != 1 or a.shape[0] > u.shape[0]:
        raise ShapeError('conv1d_valid: filter %s does not fit input %s.' % (a.shape, u.shape))
    f = a.shape[0]
    windows = sliding_window_view(u.data, f)
    m = windows.shape[0]
    def rule(g):
        gu = np.zeros_like(u.data)
        for j in range(f):
            gu[j:j+m] += g*a.data[j]
        return gu, np.dot(windows.T, g)
    return _result(np.dot(windows, a.data), (u, a), rule)


def conv_output_size(size, f, stride, padding):
    """Spatial output size of a cross-correlation"""
    if f < 1 or stride < 1 or padding < 0:
        raise ShapeError('Invalid convolution geometry: f=%i stride=%i padding=%i.' % (f, stride, padding))
    result = (size + 2*padding - f)//stride + 1
    if result < 1:
        raise ShapeError('Convolution output size is not positive: size=%i f=%i stride=%i padding=%i.' % (size, f, stride, padding))
    return result


def conv_transpose_output_size(size, f, stride, padding):
    """Spatial output size of a transposed cross-correlation"""
    if f < 1 or stride < 1 or padding < 0:
        raise ShapeError('Invalid convolution geometry: f=%i stride=%i padding=%i.' % (f, stride, padding))
    result = (size - 1)*stride - 2*padding + f
    if result < 1:
        raise ShapeError('Transposed convolution output size is not positive: size=%i f=%i stride=%i padding=%i.' % (size, f, stride, padding))
    return result


def _columns(xp, fh, fw, stride, ho, wo):
    # B×C×Hp×Wp -> (B*ho*wo)×(C*fh*fw), rows ordered (b, h, w), columns (c, i, j)
    windows = sliding_window_view(xp, (fh, fw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride][:, :, :ho, :wo]
    nb, nc = xp.shape[:2]
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(nb*ho*wo, nc*fh*fw)


def _scatter(cols, shape, stride):
    # cols: B×H×W×C×fh×fw, accumulated into an array of the given B×C×Hp×Wp shape
    nb, nh, nw, nc, fh, fw = cols.shape
    result = np.zeros(shape, cols.dtype)
    for i in range(fh):
        for j in range(fw):
            result[:, :, i:i+stride*(nh-1)+1:stride, j:j+stride*(nw-1)+1:stride] += \
                cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    return result


def _batched(x, name):
    if x.ndim == 3:
        return reshape(x, (1,) + x.shape), True
    if x.ndim == 4:
        return x, False
    raise ShapeError('%s: expecting a C×H×W or B×C×H×W tensor, got shape %s.' % (name, x.shape))


def conv2d(x, filters, bias=None, stride=1, padding=0):
    """Two-dimensional cross-correlation (no kernel flip)

       Arguments:
        | ``x``  --  a C_in×H×W or B×C_in×H×W tensor
        | ``filters``  --  a C_out×C_in×fh×fw tensor

       Optional arguments:
        | ``bias``  --  a tensor with C_out entries
        | ``stride``  --  the step between windows [default=1]
        | ``padding``  --  zero padding on all four edges [default=0]
    """
    x, unbatched = _batched(x, 'conv2d')
    if filters.ndim != 4 or filters.shape[1] != x.shape[1]:
        raise ShapeError('conv2d: filters of shape %s do not match input of shape %s.' % (filters.shape, x.shape))
    nb, cin, h, w = x.shape
    cout, _, fh, fw = filters.shape
    ho = conv_output_size(h, fh, stride, padding)
    wo = conv_output_size(w, fw, stride, padding)
    p = padding
    xp = np.pad(x.data, ((0, 0), (0, 0), (p, p), (p, p)))
    cols = _columns(xp, fh, fw, stride, ho, wo)
    wmat = filters.data.reshape(cout, -1)
    value = np.dot(cols, wmat.T).reshape(nb, ho, wo, cout).transpose(0, 3, 1, 2)
    value = np.ascontiguousarray(value)

    def rule(g):
        g2 = g.transpose(0, 2, 3, 1).reshape(-1, cout)
        gx = None
        if x.requires_grad:
            gcols = np.dot(g2, wmat).reshape(nb, ho, wo, cin, fh, fw)
            gx = _scatter(gcols, xp.shape, stride)[:, :, p:p+h, p:p+w]
        gw = np.dot(g2.T, cols).reshape(filters.shape) if filters.requires_grad else None
        return gx, gw

    out = _result(value, (x, filters), rule)
    if bias is not None:
        out = add_bias(out, bias, axis=1)
    if unbatched:
        out = reshape(out, out.shape[1:])
    return out


def conv_transpose2d(x, filters, bias=None, stride=1, padding=0):
    """Transposed two-dimensional cross-correlation

       This is the adjoint of :func:`conv2d` with the same filters, stride and
       padding: its forward pass equals the input gradient of conv2d.

       Arguments:
        | ``x``  --  a C_in×H×W or B×C_in×H×W tensor
        | ``filters``  --  a C_in×C_out×fh×fw tensor

       Optional arguments:
        | ``bias``  --  a tensor with C_out entries
        | ``stride``  --  [default=1]
        | ``padding``  --  [default=0]

       The output size is (H-1)*stride - 2*padding + fh.
    """
    x, unbatched = _batched(x, 'conv_transpose2d')
    if filters.ndim != 4 or filters.shape[0] != x.shape[1]:
        raise ShapeError('conv_transpose2d: filters of shape %s do not match input of shape %s.' % (filters.shape, x.shape))
    nb, cin, h, w = x.shape
    _, cout, fh, fw = filters.shape
    ho = conv_transpose_output_size(h, fh, stride, padding)
    wo = conv_transpose_output_size(w, fw, stride, padding)
    p = padding
    full_shape = (nb, cout, (h - 1)*stride + fh, (w - 1)*stride + fw)
    x2 = x.data.transpose(0, 2, 3, 1).reshape(-1, cin)
    wmat = filters.data.reshape(cin, -1)
    cols = np.dot(x2, wmat).reshape(nb, h, w, cout, fh, fw)
    value = np.ascontiguousarray(_scatter(cols, full_shape, stride)[:, :, p:p+ho, p:p+wo])

    def rule(g):
        gp = np.zeros(full_shape, g.dtype)
        gp[:, :, p:p+ho, p:p+wo] = g
        gcols = _columns(gp, fh, fw, stride, h, w)
        gx = None
        if x.requires_grad:
            gx = np.dot(gcols, wmat.T).reshape(nb, h, w, cin).transpose(0, 3, 1, 2)
        gw = np.dot(x2.T, gcols).reshape(filters.shape) if filters.requires_grad else None
        return gx, gw

    out = _result(value, (x, filters), rule)
    if bias is not None:
        out = add_bias(out, bias, axis=1)
    if unbatched:
        out = reshape(out, out.shape[1:])
    return out


def batch_norm(x, gamma, beta, running_mean, running_var, training, momentum=0.1, eps=1e-5):
    """Per-channel batch normalization of a B×C or B×C×H×W tensor

       Arguments:
        | ``x``  --  the input tensor
        | ``gamma``, ``beta``  --  tensors with C entries (scale and shift)
        | ``running_mean``, ``running_var``  --  numpy arrays with C entries,
              updated in place in training mode
        | ``training``  --  when True, normalize with batch statistics,
              otherwise with the running statistics

       Optional arguments:
        | ``momentum``  --  weight of the batch statistics in the running
              averages [default=0.1]
        | ``eps``  --  added to the variance [default=1e-5]
    """
    if x.ndim not in (2, 4) or x.shape[1] != gamma.shape[0] or gamma.shape != beta.shape:
        raise ShapeError('batch_norm: input %s, gamma %s and beta %s are incompatible.' % (x.shape, gamma.shape, beta.shape))
    axes = (0,) if x.ndim == 2 else (0, 2, 3)
    cshape = (1, -1) if x.ndim == 2 else (1, -1, 1, 1)
    d = x.data
    if training:
        if d.shape[0] < 2:
            raise UsageError('batch_norm: a batch of at least two samples is needed in training mode.')
        count = d.size//d.shape[1]
        mean = d.mean(axis=axes, dtype=np.float64)
        var = d.var(axis=axes, dtype=np.float64)
        running_mean *= 1 - momentum
        running_mean += momentum*mean
        running_var *= 1 - momentum
        running_var += momentum*var*count/(count - 1)
    else:
        mean = running_mean.astype(np.float64)
        var = running_var.astype(np.float64)
    inv_std = (1.0/np.sqrt(var + eps)).astype(d.dtype).reshape(cshape)
    xhat = (d - mean.astype(d.dtype).reshape(cshape))*inv_std
    g4 = gamma.data.reshape(cshape)
    value = g4*xhat + beta.data.reshape(cshape)

    def rule(g):
        gg = (g*xhat).sum(axis=axes) if gamma.requires_grad else None
        gb = g.sum(axis=axes) if beta.requires_grad else None
        gxhat = g*g4
        if training:
            n = d.size//d.shape[1]
            gx = inv_std/n*(
                n*gxhat - gxhat.sum(axis=axes, keepdims=True)
                - xhat*(gxhat*xhat).sum(axis=axes, keepdims=True)
            )
        else:
            gx = gxhat*inv_std
        return gx, gg, gb

    return _result(value, (x, gamma, beta), rule)


def check_gradient(fun, inputs, epsilon=1e-3, threshold=1e-4, max_checks=None, seed=0):
    """Compare the back-propagated gradient with central finite differences

       Arguments:
        | ``fun``  --  a callable without arguments that returns a scalar
                       Tensor computed from the inputs
        | ``inputs``  --  a list of leaf Tensors with requires_grad=True,
                          preferably 64-bit

       Optional arguments:
        | ``epsilon``  --  the finite-difference step h, differences are
                           computed as (f(x+h) - f(x-h))/(2h) [default=1e-3]
        | ``threshold``  --  the maximum acceptable relative error
                             max|ana - num|/(max|num| + 1e-8) [default=1e-4]
        | ``max_checks``  --  when given, only this many randomly selected
                              components of each input are tested
        | ``seed``  --  selects the tested components

       An AssertionError is raised when the relative error of any input
       exceeds the threshold.
    """
    rng = np.random.default_rng(seed)
    for tensor in inputs:
        tensor.zero_grad()
    with Tape() as tape:
        loss = fun()
    tape.backward(loss)
    for counter, tensor in enumerate(inputs):
        ana = tensor.grad.ravel().copy()
        flat = tensor.data.reshape(-1)
        if max_checks is None or max_checks >= flat.size:
            indices = np.arange(flat.size)
        else:
            indices = np.sort(rng.choice(flat.size, max_checks, replace=False))
        num = np.zeros(len(indices))
        for n, i in enumerate(indices):
            orig = flat[i]
            flat[i] = orig + epsilon
            fp = float(fun().data.sum())
            flat[i] = orig - epsilon
            fm = float(fun().data.sum())
            flat[i] = orig
            num[n] = (fp - fm)/(2*epsilon)
        error = abs(ana[indices] - num).max()/(abs(num).max() + 1e-8)
        if error > threshold:
            raise AssertionError(
                'Error in the gradient of input %i, relative error %.3e exceeds %.3e' % (
                counter, error, threshold))
