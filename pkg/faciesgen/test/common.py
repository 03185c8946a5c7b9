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
import shutil
import tempfile
import unittest
from contextlib import contextmanager

import numpy as np
import pytest

from faciesgen.layers import GeneratorNet, DiscriminatorNet, InferenceNet, init_parameters


__all__ = ["BaseTestCase", "tmpdir", "slow", "small_generator", "small_discriminator",
           "small_inference"]


slow = pytest.mark.skipif(
    os.environ.get('FACIESGEN_SLOW') != '1',
    reason='acceptance-scale run, set FACIESGEN_SLOW=1 to enable')


class BaseTestCase(unittest.TestCase):
    """Array assertions shared by all test cases"""

    def assertArraysEqual(self, a, b):
        self.assertEqual(a.shape, b.shape, "Shapes differ: %s != %s" % (a.shape, b.shape))
        mismatch = (a != b).sum()
        assert mismatch == 0, "%i of %i values differ." % (mismatch, a.size)

    def assertArrayConstant(self, arr, const):
        assert (arr == const).all(), "Not all values equal %s, range is [%s, %s]." % (const, arr.min(), arr.max())

    def assertArraysAlmostEqual(self, a, b, threshold=1e-6, doabs=False):
        """Compare the maximum absolute error, relative to the magnitude unless doabs"""
        self.assertEqual(a.shape, b.shape, "Shapes differ: %s != %s" % (a.shape, b.shape))
        if a.size == 0:
            return
        error = abs(a - b).max()
        if error > 0 and not doabs:
            error /= 0.5*(abs(a).max() + abs(b).max())
        kind = "absolute" if doabs else "relative"
        assert error <= threshold, "The %s error %5.3e exceeds %5.3e." % (kind, error, threshold)

    def assertArrayAlmostZero(self, arr, threshold):
        error = abs(arr).max()
        assert error <= threshold, "The largest value %5.3e exceeds %5.3e." % (error, threshold)


@contextmanager
def tmpdir(suffix, prefix):
    dn = tempfile.mkdtemp(suffix, prefix)
    try:
        yield dn
    finally:
        shutil.rmtree(dn)


def small_generator(seed=0, nz=4, ngf=4, size=16):
    generator = GeneratorNet(nz, ngf, size)
    init_parameters(generator, seed)
    return generator


def small_discriminator(seed=0, ndf=4, size=16, mode='wgan'):
    discriminator = DiscriminatorNet(ndf, size, mode)
    init_parameters(discriminator, seed)
    return discriminator


def small_inference(seed=0, nw=3, hidden=8, depth=2, nz=None):
    inference = InferenceNet(nw, hidden, depth, nz)
    init_parameters(inference, seed, 'lecun')
    return inference
