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


import io

import numpy as np
import pytest

from faciesgen.test.common import *
from faciesgen.io import *


__all__ = ["CommonTestCase"]


class CommonTestCase(BaseTestCase):
    def test_slice_match(self):
        assert [i for i in range(10) if slice_match(slice(2, None, 3), i)] == [2, 5, 8]
        assert [i for i in range(10) if slice_match(slice(None, None, 4), i)] == [0, 4, 8]
        assert slice_match(slice(None), 7)
        with pytest.raises(StopIteration):
            slice_match(slice(0, 5), 5)

    def test_pack_u32(self):
        assert pack_u32(1, 256) == b'\x01\x00\x00\x00\x00\x01\x00\x00'
        with pytest.raises(ValueError):
            pack_u32(-1)
        with pytest.raises(ValueError):
            pack_u32(2**32)

    def test_reader(self):
        f = io.BytesIO(b'ABCD' + pack_u32(7, 9) + b'\x00\x00\x80\x3f')
        with BinaryReader(f) as reader:
            reader.expect_magic(b'ABCD')
            assert reader.read_u32('first') == 7
            reader.skip(4, 'second')
            values = reader.read_f32(1, 'float')
            assert values.dtype == np.float32
            assert values[0] == 1.0
            assert reader.offset == 16
            reader.expect_end()

    def test_reader_errors(self):
        with BinaryReader(io.BytesIO(b'ABCE')) as reader:
            with pytest.raises(FileFormatError) as info:
                reader.expect_magic(b'ABCD')
            assert info.value.offset == 0
        with BinaryReader(io.BytesIO(b'ABCD' + b'\x01\x00')) as reader:
            reader.expect_magic(b'ABCD')
            with pytest.raises(FileFormatError) as info:
                reader.read_u32('count')
            assert info.value.offset == 4
            assert 'count' in str(info.value)
        with BinaryReader(io.BytesIO(b'ABCDE')) as reader:
            reader.read(4, 'magic')
            with pytest.raises(FileFormatError):
                reader.expect_end()

    def test_error_message(self):
        error = FileFormatError('Bad value.', 'train.geod', 24)
        assert str(error) == 'Bad value. [file train.geod, byte offset 24]'
        assert str(FileFormatError('Bad value.')) == 'Bad value.'
        assert issubclass(ConfigError, ValueError)
