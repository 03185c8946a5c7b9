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
"""Training images, reference images and Gaussian-mixture targets

   Facies are coded as +1 (channel) and -1 (background). The synthetic
   channel generator stands in for an external multiple-point simulator:
   every image has a handful of horizontally meandering channels drawn as
   persistent random walks.

   The Gaussian mixtures serve as toy targets for the sampler trainer, see
   :func:`faciesgen.conditioner.train_sampler`.
"""


from __future__ import division

import numpy as np
from scipy.linalg import cholesky, solve_triangular, LinAlgError
from scipy.stats import norm

from faciesgen.autodiff import Tensor, ShapeError, DomainError, UsageError, \
    add_bias, matmul, elementwise, reduce, scale, shift, stack, logsumexp
from faciesgen.assess import js_probabilities
from faciesgen.io.common import FileFormatError
from faciesgen.io.geod import load_geod, dump_geod
from faciesgen.utils import cached, RandomStreams


__all__ = [
    'Dataset', 'ChannelParams', 'synth_channels', 'REFERENCE_SEED',
    'reference_image', 'save_dataset', 'load_dataset', 'sample_patches',
    'GaussianMixture', 'mixture_log_density', 'mixture_sample',
    'assignment_fractions', 'histogram_js',
]


REFERENCE_SEED = 20190611


class Dataset(object):
    """A stack of N single-channel images with values in [-1, 1]"""

    def __init__(self, images):
        """
           Argument:
            | ``images``  --  an N×H×W or N×1×H×W array
        """
        images = np.array(images, dtype=np.float32)
        if images.ndim == 4 and images.shape[1] == 1:
            images = images[:, 0]
        if images.ndim != 3:
            raise ShapeError('A dataset holds N×H×W images, got shape %s.' % (images.shape,))
        if images.shape[0] == 0:
            raise UsageError('A dataset must hold at least one image.')
        if not ((images >= -1) & (images <= 1)).all():
            raise DomainError('All dataset values must lie in [-1, 1].')
        self.images = images

    count = property(lambda self: self.images.shape[0])
    shape = property(lambda self: self.images.shape[1:])

    def __len__(self):
        return self.images.shape[0]

    def batch(self, indices):
        """Return the selected images as a B×1×H×W constant Tensor"""
        return Tensor(self.images[np.asarray(indices)][:, None])

    @cached
    def channel_fraction(self):
        """the fraction of channel pixels"""
        return float((self.images > 0).mean())


class ChannelParams(object):
    """Settings of the synthetic channel generator"""

    def __init__(self, min_channels=2, max_channels=4, min_thickness=3,
                 max_thickness=5, persistence=0.7):
        """
           Optional arguments:
            | ``min_channels``, ``max_channels``  --  the range of the number
                  of channels per image (inclusive) [default=2, 4]
            | ``min_thickness``, ``max_thickness``  --  the range of the
                  channel thickness in pixels (inclusive) [default=3, 5]
            | ``persistence``  --  the probability that the vertical step of
                  a channel is kept from one column to the next [default=0.7]
        """
        if not 1 <= min_channels <= max_channels:
            raise ValueError('Invalid channel count range: %i-%i.' % (min_channels, max_channels))
        if not 1 <= min_thickness <= max_thickness:
            raise ValueError('Invalid channel thickness range: %i-%i.' % (min_thickness, max_thickness))
        if not 0 <= persistence <= 1:
            raise ValueError('The persistence must be in [0, 1].')
        self.min_channels = min_channels
        self.max_channels = max_channels
        self.min_thickness = min_thickness
        self.max_thickness = max_thickness
        self.persistence = persistence


def _draw_channel(image, rng, params):
    height, width = image.shape
    thickness = rng.integers(params.min_thickness, params.max_thickness + 1)
    row = rng.integers(0, height)
    step = rng.integers(-1, 2)
    keep = rng.random(width) < params.persistence
    new_steps = rng.integers(-1, 2, width)
    centers = np.empty(width, int)
    for col in range(width):
        centers[col] = row
        if not keep[col]:
            step = new_steps[col]
        row = min(max(row + step, 0), height - 1)
    rows = centers[:, None] - thickness//2 + np.arange(thickness)
    inside = (rows >= 0) & (rows < height)
    cols = np.repeat(np.arange(width)[:, None], thickness, axis=1)
    image[rows[inside], cols[inside]] = 1


def synth_channels(count, height, width, seed, params=None):
    """Generate a dataset of binary channel images

       Arguments:
        | ``count``  --  the number of images
        | ``height``, ``width``  --  the image dimensions, at least 16
        | ``seed``  --  an integer seed

       Optional argument:
        | ``params``  --  a ChannelParams instance
    """
    if height < 16 or width < 16:
        raise ShapeError('Images must be at least 16×16, got %i×%i.' % (height, width))
    if params is None:
        params = ChannelParams()
    rng = RandomStreams(seed).generator('channels')
    images = np.full((count, height, width), -1, np.float32)
    for image in images:
        nchannel = rng.integers(params.min_channels, params.max_channels + 1)
        for counter in range(nchannel):
            _draw_channel(image, rng, params)
    return Dataset(images)


def reference_image(size=256, seed=REFERENCE_SEED):
    """A large channel image for patch sampling and pattern statistics

       The number of channels is scaled with the height, so that the channel
       density matches that of 64×64 training images.
    """
    factor = max(1, size//64)
    params = ChannelParams(min_channels=2*factor, max_channels=4*factor)
    return synth_channels(1, size, size, seed, params).images[0]


def save_dataset(dataset, filename):
    """Write a Dataset to a GEOD file"""
    dump_geod(filename, dataset.images)


def load_dataset(filename, sub=slice(None)):
    """Load (a slice of) a GEOD file as a Dataset"""
    images = load_geod(filename, sub)
    if len(images) == 0:
        raise FileFormatError('No images selected from the dataset.', str(filename))
    return Dataset(images)


def sample_patches(reference, count, height, width, seed):
    """Cut patches with uniformly random corners out of a reference image

       Arguments:
        | ``reference``  --  an H×W array
        | ``count``  --  the number of patches
        | ``height``, ``width``  --  the patch dimensions
        | ``seed``  --  an integer seed
    """
    reference = np.asarray(reference, dtype=np.float32)
    rh, rw = reference.shape
    if height > rh or width > rw:
        raise ShapeError('Patch %i×%i does not fit in a %i×%i reference image.' % (height, width, rh, rw))
    rng = RandomStreams(seed).generator('patches')
    rows = rng.integers(0, rh - height + 1, count)
    cols = rng.integers(0, rw - width + 1, count)
    return Dataset([reference[r:r+height, c:c+width] for r, c in zip(rows, cols)])


class GaussianMixture(object):
    """A weighted sum of multivariate normal densities"""

    def __init__(self, weights, means, covariances):
        """
           Arguments:
            | ``weights``  --  K nonnegative weights that sum to one
            | ``means``  --  a K×d array
            | ``covariances``  --  a K×d×d array of symmetric positive
                                   definite matrices

           Components with zero weight are allowed; they never contribute.
        """
        weights = np.array(weights, dtype=float)
        means = np.array(means, dtype=float)
        covariances = np.array(covariances, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        if covariances.ndim == 1:
            covariances = covariances[:, None, None]
        nc, dim = means.shape
        if weights.shape != (nc,) or covariances.shape != (nc, dim, dim):
            raise ShapeError('Inconsistent mixture shapes: weights %s, means %s, covariances %s.' % (
                weights.shape, means.shape, covariances.shape))
        if (weights < 0).any() or abs(weights.sum() - 1) > 1e-10:
            raise ValueError('The mixture weights must be nonnegative and sum to one.')
        chols = []
        for i, cov in enumerate(covariances):
            if abs(cov - cov.T).max() > 1e-12*abs(cov).max():
                raise ValueError('Covariance %i is not symmetric.' % i)
            try:
                chols.append(cholesky(cov, lower=True))
            except LinAlgError:
                raise ValueError('Covariance %i is not positive definite.' % i)
        self.weights = weights
        self.means = means
        self.covariances = covariances
        self.chols = np.array(chols)

    size = property(lambda self: len(self.weights))
    dim = property(lambda self: self.means.shape[1])

    @classmethod
    def three_component_1d(cls):
        """Means -1, 2, 6; standard deviations 1, 2, 0.5; equal weights"""
        return cls(np.ones(3)/3, [-1.0, 2.0, 6.0], np.array([1.0, 2.0, 0.5])**2)

    @classmethod
    def three_component_2d(cls):
        """Three overlapping 2D normals with equal weights"""
        return cls(
            np.ones(3)/3,
            [[-1.0, -1.0], [1.0, 2.0], [2.0, -1.0]],
            [[[1.0, -0.5], [-0.5, 1.0]], [[1.5, 0.6], [0.6, 0.8]], np.identity(2)],
        )

    @cached
    def inv_chols(self):
        """the inverses of the Cholesky factors"""
        eye = np.identity(self.dim)
        return np.array([solve_triangular(chol, eye, lower=True) for chol in self.chols])

    @cached
    def log_norms(self):
        """log(w_i) - d/2 log(2 pi) - log det(L_i), -inf for zero weights"""
        result = np.full(self.size, -np.inf)
        active = self.weights > 0
        logdets = np.log(np.diagonal(self.chols, axis1=1, axis2=2)).sum(axis=1)
        result[active] = np.log(self.weights[active]) - 0.5*self.dim*np.log(2*np.pi) - logdets[active]
        return result

    @cached
    def mean(self):
        """the mean of the mixture"""
        return np.dot(self.weights, self.means)

    @cached
    def covariance(self):
        """the covariance of the mixture"""
        diff = self.means - self.mean
        return np.einsum('i,ijk->jk', self.weights, self.covariances) + \
            np.einsum('i,ij,ik->jk', self.weights, diff, diff)


def mixture_log_density(x, gm):
    """Log density of a Gaussian mixture, differentiable w.r.t. x

       Arguments:
        | ``x``  --  a B×d Tensor (or array, converted to 64-bit)
        | ``gm``  --  a GaussianMixture

       Returns a Tensor with B entries.
    """
    if not isinstance(x, Tensor):
        x = Tensor(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != gm.dim:
        raise ShapeError('Expecting B×%i points, got shape %s.' % (gm.dim, x.shape))
    terms = []
    for i in np.flatnonzero(gm.weights > 0):
        diff = add_bias(x, Tensor(-gm.means[i], dtype=x.dtype), axis=1)
        y = matmul(diff, Tensor(gm.inv_chols[i].T, dtype=x.dtype))
        quad = reduce(elementwise(y, 'square'), 'sum', axis=1)
        terms.append(shift(scale(quad, -0.5), gm.log_norms[i]))
    if len(terms) == 1:
        return terms[0]
    return logsumexp(stack(terms, axis=1), axis=1)


def mixture_sample(gm, count, seed):
    """Draw count points from a Gaussian mixture

       Returns a count×d array of 64-bit floats.
    """
    rng = RandomStreams(seed).generator('mixture')
    components = rng.choice(gm.size, size=count, p=gm.weights)
    noise = rng.standard_normal((count, gm.dim))
    return gm.means[components] + np.einsum('nij,nj->ni', gm.chols[components], noise)


def assignment_fractions(points, gm):
    """Fractions of points whose nearest component mean is each component"""
    points = np.asarray(points, dtype=float).reshape(-1, gm.dim)
    dists = ((points[:, None, :] - gm.means[None, :, :])**2).sum(axis=2)
    counts = np.bincount(dists.argmin(axis=1), minlength=gm.size)
    return counts/counts.sum()


def histogram_js(points, gm, bins=50, bounds=None):
    """Jensen-Shannon divergence between samples and a mixture

       Arguments:
        | ``points``  --  a count×d array of samples
        | ``gm``  --  a GaussianMixture

       Optional arguments:
        | ``bins``  --  the number of histogram bins (1D only) [default=50]
        | ``bounds``  --  the histogram range (1D only) [default: all means
                          plus or minus four standard deviations]

       In one dimension, the sample histogram is compared to the analytic
       bin masses, both renormalized over the range. In more dimensions, the
       nearest-mean assignment fractions are compared to the weights.
    """
    points = np.asarray(points, dtype=float)
    if gm.dim != 1:
        return js_probabilities(assignment_fractions(points, gm), gm.weights)
    sigmas = np.sqrt(gm.covariances[:, 0, 0])
    if bounds is None:
        bounds = ((gm.means[:, 0] - 4*sigmas).min(), (gm.means[:, 0] + 4*sigmas).max())
    edges = np.linspace(bounds[0], bounds[1], bins + 1)
    counts = np.histogram(points.ravel(), edges)[0].astype(float)
    if counts.sum() == 0:
        raise UsageError('No samples fall inside the histogram range.')
    cdf = np.dot(gm.weights, norm.cdf((edges[None, :] - gm.means[:, :1])/sigmas[:, None]))
    masses = np.diff(cdf)
    return js_probabilities(counts/counts.sum(), masses/masses.sum())
