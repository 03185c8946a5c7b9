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
"""Metric multidimensional scaling

   :func:`smacof_mds` minimizes the raw stress

   .. math::

       \\sigma(X) = \\sum_{i<j} (d_{ij} - \\|x_i - x_j\\|)^2

   by repeated Guttman transforms (stress majorization), which never increase
   the stress. :func:`classical_mds` gives the Torgerson solution, useful as a
   starting point.
"""


from __future__ import division

import numpy as np
from scipy.spatial.distance import cdist

from faciesgen.autodiff import UsageError
from faciesgen.log import log, timer


__all__ = ['Embedding2D', 'raw_stress', 'classical_mds', 'smacof_mds']


class Embedding2D(object):
    """Low-dimensional coordinates of n objects"""

    def __init__(self, points, stress, iterations, stress_history):
        """
           Arguments:
            | ``points``  --  an n×dim array
            | ``stress``  --  the final raw stress
            | ``iterations``  --  the number of Guttman transforms applied
            | ``stress_history``  --  the stress before the first and after
                                      every iteration
        """
        self.points = points
        self.stress = stress
        self.iterations = iterations
        self.stress_history = stress_history

    size = property(lambda self: len(self.points))


def _check_dissimilarities(dissimilarities):
    d = np.asarray(dissimilarities, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise UsageError('The dissimilarity matrix must be square, got shape %s.' % (d.shape,))
    if not np.isfinite(d).all() or (d < 0).any():
        raise UsageError('Dissimilarities must be finite and nonnegative.')
    if abs(d - d.T).max() > 1e-12*max(d.max(), 1.0):
        raise UsageError('The dissimilarity matrix is not symmetric.')
    if (d.diagonal() != 0).any():
        raise UsageError('The dissimilarity matrix must have a zero diagonal.')
    return d


def raw_stress(dissimilarities, points):
    dists = cdist(points, points)
    return np.triu((dissimilarities - dists)**2, 1).sum()


def classical_mds(dissimilarities, dim=2):
    """Torgerson scaling: top eigenvectors of the double-centered squares"""
    d = _check_dissimilarities(dissimilarities)
    n = len(d)
    centering = np.identity(n) - 1.0/n
    b = -0.5*np.dot(centering, np.dot(d**2, centering))
    evals, evecs = np.linalg.eigh(b)
    order = evals.argsort()[::-1][:dim]
    points = evecs[:, order]*np.sqrt(np.clip(evals[order], 0, None))
    if points.shape[1] < dim:
        points = np.hstack([points, np.zeros((n, dim - points.shape[1]))])
    return points


def _guttman_transform(d, points):
    n = len(d)
    dists = cdist(points, points)
    b = -np.divide(d, dists, out=np.zeros_like(d), where=dists > 0)
    np.fill_diagonal(b, 0.0)
    b[np.diag_indices(n)] = -b.sum(axis=1)
    return np.dot(b, points)/n


def _smacof_single(d, points, max_iters, tol):
    stress = raw_stress(d, points)
    history = [stress]
    iterations = 0
    while iterations < max_iters and stress > 0:
        points = _guttman_transform(d, points)
        iterations += 1
        new_stress = raw_stress(d, points)
        history.append(new_stress)
        converged = (stress - new_stress) < tol*stress
        stress = new_stress
        if converged:
            break
    return points, stress, iterations, history


def smacof_mds(dissimilarities, dim=2, max_iters=300, tol=1e-3, seed=0, init='random', n_init=1):
    """Embed objects in dim dimensions such that distances match

       Arguments:
        | ``dissimilarities``  --  a symmetric n×n matrix with nonnegative
                                   entries and a zero diagonal

       Optional arguments:
        | ``dim``  --  the embedding dimension [default=2]
        | ``max_iters``  --  the maximum number of Guttman transforms per run
                             [default=300]
        | ``tol``  --  stop when the relative stress decrease of one iteration
                       drops below this value [default=1e-3]
        | ``seed``  --  seed for random initial configurations [default=0]
        | ``init``  --  'random', 'classical' or an n×dim array
                        [default='random']
        | ``n_init``  --  the number of random starts, the result with the
                          lowest final stress is returned [default=1]

       Returns an Embedding2D instance.
    """
    d = _check_dissimilarities(dissimilarities)
    n = len(d)
    rng = np.random.default_rng(seed)
    if isinstance(init, str):
        if init == 'classical':
            starts = [classical_mds(d, dim)]
        elif init == 'random':
            starts = [rng.standard_normal((n, dim)) for i in range(n_init)]
        else:
            raise ValueError('Unknown initialization: %s' % init)
    else:
        start = np.array(init, dtype=float)
        if start.shape != (n, dim):
            raise UsageError('The initial configuration must have shape %s, got %s.' % ((n, dim), start.shape))
        starts = [start]

    best = None
    with timer.section('MDS'):
        for counter, start in enumerate(starts):
            result = _smacof_single(d, start, max_iters, tol)
            if log.do_high:
                with log.section('MDS'):
                    log('Run %i: stress %.5e after %i iterations' % (counter, result[1], result[2]))
            if best is None or result[1] < best[1]:
                best = result
    return Embedding2D(*best)
