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

import numpy as np
import pytest

from faciesgen.test.common import *
from faciesgen.io import *


__all__ = ["GeodTestCase"]


def random_images(count=5, height=6, width=7, seed=1):
    return np.random.default_rng(seed).uniform(-1, 1, (count, height, width)).astype(np.float32)


class GeodTestCase(BaseTestCase):
    def test_roundtrip(self):
        images = random_images()
        images[0, 0, 0] = -1.0
        images[0, 0, 1] = 1.0
        with tmpdir(__name__, 'test_roundtrip') as dn:
            fn = os.path.join(dn, 'test.geod')
            dump_geod(fn, images)
            with open(fn, 'rb') as f:
                data = f.read()
            assert len(data) == 20 + 4*5*6*7
            assert data[:20] == b'GEOD' + pack_u32(1, 5, 6, 7)
            loaded = load_geod(fn)
            assert loaded.dtype == np.float32
            self.assertArraysEqual(loaded, images)
            assert loaded.tobytes() == images.tobytes()

    def test_slices(self):
        images = random_images(10)
        with tmpdir(__name__, 'test_slices') as dn:
            fn = os.path.join(dn, 'test.geod')
            dump_geod(fn, images)
            self.assertArraysEqual(load_geod(fn, slice(2, 8, 3)), images[2:8:3])
            self.assertArraysEqual(load_geod(fn, slice(None, 3)), images[:3])
            assert load_geod(fn, slice(10, 12)).shape == (0, 6, 7)
            with GeodReader(fn, slice(5, None)) as reader:
                assert reader.nframe == 10
                assert reader.shape == (6, 7)
                assert len(list(reader)) == 5

    def test_corrupt(self):
        images = random_images(2, 3, 3)
        with tmpdir(__name__, 'test_corrupt') as dn:
            fn = os.path.join(dn, 'test.geod')
            dump_geod(fn, images)
            with open(fn, 'rb') as f:
                data = f.read()

            def check(payload, offset):
                with open(fn, 'wb') as f:
                    f.write(payload)
                with pytest.raises(FileFormatError) as info:
                    load_geod(fn)
                assert info.value.offset == offset
                assert info.value.filename == fn

            check(b'DOEG' + data[4:], 0)
            check(data[:4] + pack_u32(2) + data[8:], 4)
            check(data[:12] + pack_u32(0) + data[16:], 12)
            check(data[:-2], 20 + 36)
            check(data + b'\x00', 20 + 72)
            bad = images.copy()
            bad[1, 2, 0] = 1.5
            check(data[:20] + bad.astype('<f4').tobytes(), 20 + 4*(9 + 6))
            bad[1, 2, 0] = np.nan
            check(data[:20] + bad.astype('<f4').tobytes(), 20 + 4*(9 + 6))

    def test_dump_shape(self):
        with tmpdir(__name__, 'test_dump_shape') as dn:
            with pytest.raises(ValueError):
                dump_geod(os.path.join(dn, 'test.geod'), np.zeros((3, 3)))
