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
"""Quality assessment of generated facies images

   The main tool is the analysis of distances (ANODI) based on multiple-point
   pattern histograms: every image is binarized with Otsu's method, cleaned
   from small objects and summarized by the histogram of its w×w binary
   patterns. Histograms are compared with the Jensen-Shannon divergence
   (natural logarithm, so all divergences lie in [0, log 2]). The
   inconsistency of a set of realizations is its mean divergence from the
   reference image, the diversity is the mean divergence between all pairs
   of realizations. Both are evaluated at several resolutions.

   Other helpers compare discriminator scores, look for memorized training
   images and interpolate in latent space.
"""


from __future__ import division

from collections import OrderedDict

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from faciesgen.autodiff import ShapeError, UsageError, DomainError
from faciesgen.log import log, timer


__all__ = [
    'otsu_threshold', 'binarize_clean', 'downsample', 'PatternHistogram',
    'pattern_histogram', 'js_probabilities', 'js_divergence',
    'js_distance_matrix', 'AnodiReport', 'anodi_scores',
    'DiscriminatorHistogram', 'discriminator_histogram', 'augment_variants',
    'MemorizationReport', 'memorization_check', 'latent_interpolation',
]


def otsu_threshold(values, bins=256):
    """Otsu's threshold of a set of real values

       Arguments:
        | ``values``  --  an array of any shape

       Optional argument:
        | ``bins``  --  the number of histogram bins over [min, max]
                        [default=256]

       The returned threshold is the histogram edge that maximizes the
       between-class variance, where class one consists of all values >= the
       threshold. On ties, the lowest threshold wins.
    """
    values = np.asarray(values, dtype=float).ravel()
    if len(values) == 0:
        raise UsageError('Otsu thresholding needs at least two distinct values, got none.')
    lo = values.min()
    hi = values.max()
    if not lo < hi:
        raise UsageError('Otsu thresholding needs at least two distinct values, all are %s.' % lo)
    counts = np.histogram(values, bins, (lo, hi))[0].astype(float)
    width = (hi - lo)/bins
    centers = lo + (np.arange(bins) + 0.5)*width
    # candidate k splits the bins into [:k] and [k:]
    w0 = np.cumsum(counts)[:-1]
    w1 = counts.sum() - w0
    s0 = np.cumsum(counts*centers)[:-1]
    s1 = (counts*centers).sum() - s0
    valid = (w0 > 0) & (w1 > 0)
    m0 = np.divide(s0, w0, out=np.zeros_like(s0), where=valid)
    m1 = np.divide(s1, w1, out=np.zeros_like(s1), where=valid)
    between = np.where(valid, w0*w1*(m0 - m1)**2, -1.0)
    k = int(between.argmax()) + 1
    return lo + k*width


def binarize_clean(image, min_size=8):
    """Otsu-binarize an image and remove small connected components

       Arguments:
        | ``image``  --  an H×W (or 1×H×W) array of continuous values

       Optional argument:
        | ``min_size``  --  components (4-connected) with fewer pixels are
                            flipped to the other phase. Channel components are
                            cleaned first, then background components.
                            [default=8]

       Returns a boolean array, True for channel pixels.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim == 3 and image.shape[0] == 1:
        image = image[0]
    if image.ndim != 2:
        raise ShapeError('binarize_clean expects an H×W image, got shape %s.' % (image.shape,))
    if image.size > 0 and image.min() == image.max():
        # a uniform image has no threshold, the sign decides the phase
        return np.full(image.shape, image.flat[0] >= 0)
    binary = image >= otsu_threshold(image)
    for phase in True, False:
        labels, count = ndimage.label(binary == phase)
        if count == 0:
            continue
        small = np.bincount(labels.ravel()) < min_size
        small[0] = False
        binary[small[labels]] = not phase
    return binary


def downsample(image, factor):
    """Block-average pooling over the last two axes"""
    image = np.asarray(image, dtype=float)
    if factor < 1:
        raise ShapeError('The pooling factor must be positive, got %i.' % factor)
    h, w = image.shape[-2:]
    if h % factor != 0 or w % factor != 0:
        raise ShapeError('Image of %i×%i can not be pooled by a factor %i.' % (h, w, factor))
    if factor == 1:
        return image.copy()
    shape = image.shape[:-2] + (h//factor, factor, w//factor, factor)
    return image.reshape(shape).mean(axis=(-3, -1))


class PatternHistogram(object):
    """Counts of w×w binary patterns, keyed by an integer code

       The code of a window reads its w² bits row by row, the first pixel
       being the most significant bit.
    """

    def __init__(self, window, codes, counts):
        """
           Arguments:
            | ``window``  --  the window size w
            | ``codes``  --  sorted unique pattern codes
            | ``counts``  --  the corresponding (positive) counts
        """
        self.window = window
        self.codes = np.asarray(codes, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.total = int(self.counts.sum())

    def as_dict(self):
        return dict(zip(self.codes.tolist(), self.counts.tolist()))


def pattern_histogram(binary, window=4):
    """Histogram of all overlapping window×window patterns, stride 1"""
    binary = np.asarray(binary)
    if binary.ndim != 2:
        raise ShapeError('pattern_histogram expects an H×W image, got shape %s.' % (binary.shape,))
    if window < 1 or window > min(binary.shape):
        raise ShapeError('Window %i does not fit in an image of shape %s.' % (window, binary.shape))
    if window*window > 62:
        raise ShapeError('Pattern codes of a %i×%i window do not fit in 64 bits.' % (window, window))
    bits = (binary > 0).astype(np.int64)
    weights = (2**np.arange(window*window - 1, -1, -1, dtype=np.int64)).reshape(window, window)
    windows = sliding_window_view(bits, (window, window))
    codes = np.tensordot(windows, weights, axes=([2, 3], [0, 1]))
    unique, counts = np.unique(codes, return_counts=True)
    return PatternHistogram(window, unique, counts)


def js_probabilities(p, q):
    """Jensen-Shannon divergence between two discrete distributions

       Both arguments are nonnegative arrays of equal length, normalized here.
       The natural logarithm is used and 0 log 0 = 0.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeError('Distributions of shape %s and %s can not be compared.' % (p.shape, q.shape))
    if p.sum() <= 0 or q.sum() <= 0:
        raise UsageError('Empty distribution in Jensen-Shannon divergence.')
    p = p/p.sum()
    q = q/q.sum()
    m = 0.5*(p + q)
    result = 0.0
    for a in p, q:
        mask = a > 0
        result += 0.5*(a[mask]*np.log(a[mask]/m[mask])).sum()
    return float(min(max(result, 0.0), np.log(2)))


def js_divergence(p, q):
    """Jensen-Shannon divergence between two PatternHistograms"""
    if p.total == 0 or q.total == 0:
        raise UsageError('Empty pattern histogram in Jensen-Shannon divergence.')
    codes = np.union1d(p.codes, q.codes)
    pa = np.zeros(len(codes))
    pa[np.searchsorted(codes, p.codes)] = p.counts
    qa = np.zeros(len(codes))
    qa[np.searchsorted(codes, q.codes)] = q.counts
    return js_probabilities(pa, qa)


def js_distance_matrix(histograms):
    """Symmetric matrix of pairwise Jensen-Shannon divergences"""
    n = len(histograms)
    result = np.zeros((n, n))
    for i in range(n):
        for j in range(i):
            result[i, j] = js_divergence(histograms[i], histograms[j])
            result[j, i] = result[i, j]
    return result


def _as_image_stack(images):
    images = np.asarray(images, dtype=float)
    if images.ndim == 4 and images.shape[1] == 1:
        images = images[:, 0]
    if images.ndim != 3:
        raise ShapeError('Expecting N×H×W images, got shape %s.' % (images.shape,))
    return images


def _resolution_label(factor):
    return '1' if factor == 1 else '1/%i' % factor


class AnodiReport(object):
    """Inconsistency and diversity per method and resolution

       ``rows`` is a list of (method, factor, inconsistency, diversity).
    """

    def __init__(self, rows):
        self.rows = rows

    def get(self, method, factor):
        """Return (inconsistency, diversity) for one method and resolution"""
        for row in self.rows:
            if row[0] == method and row[1] == factor:
                return row[2], row[3]
        raise KeyError((method, factor))

    def csv_rows(self):
        return [(method, _resolution_label(factor), inc, div)
                for method, factor, inc, div in self.rows]


def anodi_scores(realizations, reference, resolutions=(1, 2, 4, 8), window=4, min_size=8):
    """Inconsistency and diversity scores of sets of realizations

       Arguments:
        | ``realizations``  --  a dictionary {method: N×H×W array} or a single
                                array (reported as method 'default')
        | ``reference``  --  an image with the target statistics. When its
                             dimensions are not divisible by a pooling factor,
                             it is cropped at the bottom and right.

       Optional arguments:
        | ``resolutions``  --  pooling factors [default=(1, 2, 4, 8)]
        | ``window``  --  the pattern window size [default=4]
        | ``min_size``  --  see :func:`binarize_clean` [default=8]

       At each resolution, the continuous images are pooled first and
       binarized afterwards.
    """
    if isinstance(realizations, np.ndarray):
        realizations = OrderedDict([('default', realizations)])
    reference = np.asarray(reference, dtype=float)
    rows = []
    with timer.section('ANODI'):
        for factor in resolutions:
            h = reference.shape[0] - reference.shape[0] % factor
            w = reference.shape[1] - reference.shape[1] % factor
            ref_hist = pattern_histogram(binarize_clean(downsample(reference[:h, :w], factor), min_size), window)
            for method, images in realizations.items():
                images = _as_image_stack(images)
                if len(images) < 2:
                    raise UsageError('ANODI needs at least two realizations per method.')
                hists = [
                    pattern_histogram(binarize_clean(image, min_size), window)
                    for image in downsample(images, factor)
                ]
                inconsistency = np.mean([js_divergence(hist, ref_hist) for hist in hists])
                distances = js_distance_matrix(hists)
                diversity = distances[np.triu_indices(len(hists), 1)].mean()
                rows.append((method, factor, float(inconsistency), float(diversity)))
                if log.do_medium:
                    with log.section('ANODI'):
                        log('%-12s x%-4s inconsistency %.5f  diversity %.5f' % (
                            method, _resolution_label(factor), inconsistency, diversity))
    return AnodiReport(rows)


class DiscriminatorHistogram(object):
    """Histogram and moments of discriminator scores of one image set"""

    def __init__(self, scores, bins):
        self.scores = scores
        self.edges = np.linspace(0.0, 1.0, bins + 1)
        self.counts = np.histogram(scores, self.edges)[0]
        self.mean = float(scores.mean())
        self.var = float(scores.var())
        self.js = None

    def csv_rows(self):
        return [(lo, hi, count) for lo, hi, count in zip(self.edges[:-1], self.edges[1:], self.counts)]


def discriminator_histogram(discriminator, realizations, bins=20, reference=None):
    """Histogram the scores of a standard-GAN discriminator

       Arguments:
        | ``discriminator``  --  a DiscriminatorNet in 'standard' mode
        | ``realizations``  --  N×H×W or N×1×H×W images

       Optional arguments:
        | ``bins``  --  the number of bins over [0, 1] [default=20]
        | ``reference``  --  a DiscriminatorHistogram (e.g. of the training
                             set). When given, the Jensen-Shannon divergence
                             between both histograms is stored in ``js``.
    """
    if getattr(discriminator, 'score_mode', None) != 'standard':
        raise UsageError('Score histograms need a discriminator with sigmoid output (standard mode).')
    images = _as_image_stack(realizations)
    scores = discriminator.predict(images[:, None]).astype(float)
    if ((scores < 0) | (scores > 1)).any():
        raise DomainError('Discriminator scores outside [0, 1].')
    result = DiscriminatorHistogram(scores, bins)
    if reference is not None:
        result.js = js_probabilities(result.counts, reference.counts)
    return result


def _affine(image, angle, shear):
    # rotation by angle after a horizontal shear, both in degrees, about the center
    a = np.radians(angle)
    s = np.radians(shear)
    rotation = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    forward = np.dot(rotation, np.array([[1.0, np.tan(s)], [0.0, 1.0]]))
    matrix = np.linalg.inv(forward)
    center = 0.5*(np.array(image.shape) - 1)
    offset = center - np.dot(matrix, center)
    return ndimage.affine_transform(image, matrix, offset, order=1, mode='reflect')


def augment_variants(image, angles=(-10, 0, 10), shears=(-10, 0, 10)):
    """All flip, rotation and shear variants of an image

       Returns a list of (label, image) pairs. The first one is the unchanged
       image. With the defaults, there are 4*3*3 = 36 variants.
    """
    image = np.asarray(image, dtype=float)
    flips = [
        ('none', image),
        ('horizontal', image[:, ::-1]),
        ('vertical', image[::-1, :]),
        ('both', image[::-1, ::-1]),
    ]
    result = []
    for flip_label, flipped in flips:
        for angle in angles:
            for shear in shears:
                label = '%s/rot%+d/shear%+d' % (flip_label, angle, shear)
                if angle == 0 and shear == 0:
                    result.append((label, np.ascontiguousarray(flipped)))
                else:
                    result.append((label, _affine(flipped, angle, shear)))
    return result


class MemorizationReport(object):
    """Nearest augmented training image for every realization

       ``rows`` is a list of (realization index, dataset index, variant label,
       distance).
    """

    def __init__(self, rows):
        self.rows = rows

    distances = property(lambda self: np.array([row[3] for row in self.rows]))


def _blur(image, sigma):
    if sigma <= 0:
        return image
    # A 5×5 kernel: the radius is truncate*sigma, rounded.
    return ndimage.gaussian_filter(image, sigma, truncate=2.0/sigma)


def memorization_check(realizations, dataset, blur_sigma=1.0):
    """Find the nearest augmented dataset image of every realization

       Arguments:
        | ``realizations``  --  N×H×W (or N×1×H×W) images
        | ``dataset``  --  a Dataset or an array of images

       Optional argument:
        | ``blur_sigma``  --  Gaussian blur applied to all images before the
                              Euclidean distance is computed [default=1.0]
    """
    images = getattr(dataset, 'images', dataset)
    images = _as_image_stack(images)
    if len(images) == 0:
        raise UsageError('The memorization check needs a nonempty dataset.')
    reals = _as_image_stack(realizations)
    blurred = np.array([_blur(real, blur_sigma) for real in reals]).reshape(len(reals), -1)
    best = np.full(len(reals), np.inf)
    best_index = np.zeros(len(reals), int)
    best_label = [None]*len(reals)
    with timer.section('Memorization'):
        for index, image in enumerate(images):
            variants = augment_variants(image)
            flat = np.array([_blur(v, blur_sigma).ravel() for label, v in variants])
            for start in range(0, len(reals), 16):
                chunk = blurred[start:start+16]
                dists = np.sqrt(((chunk[:, None, :] - flat[None, :, :])**2).sum(axis=2))
                for i, j in enumerate(dists.argmin(axis=1), start):
                    if dists[i - start, j] < best[i]:
                        best[i] = dists[i - start, j]
                        best_index[i] = index
                        best_label[i] = variants[j][0]
    rows = [(i, int(best_index[i]), best_label[i], float(best[i])) for i in range(len(reals))]
    if log.do_medium and len(rows) > 0:
        with log.section('MEMO'):
            log('Smallest distance:&%.5f (blurred, augmented training images)' % best.min())
    return MemorizationReport(rows)


def latent_interpolation(generator, z_a, z_b, steps):
    """Images along the straight line from z_a to z_b in latent space

       Returns a steps×1×H×W array, the first and last images being G(z_a)
       and G(z_b).
    """
    if steps < 2:
        raise UsageError('An interpolation needs at least two steps.')
    z_a = np.asarray(z_a, dtype=float).ravel()
    z_b = np.asarray(z_b, dtype=float).ravel()
    t = np.linspace(0.0, 1.0, steps)[:, None]
    return generator.predict((1 - t)*z_a + t*z_b)
