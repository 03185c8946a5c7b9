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


import numpy as np
import pytest

from faciesgen.test.common import BaseTestCase
from faciesgen import *


__all__ = ["UtilsTestCase"]


class Counter(object):
    def __init__(self):
        self.calls = 0

    @cached
    def value(self):
        """the number of calls so far"""
        self.calls += 1
        return self.calls


class UtilsTestCase(BaseTestCase):
    def test_cached(self):
        counter = Counter()
        assert counter.value == 1
        assert counter.value == 1
        assert counter.calls == 1
        assert Counter.value.__doc__.startswith('*Cached attribute:* the number of calls')

    def test_streams_reproducible(self):
        a = RandomStreams(5).generator('init').standard_normal(10)
        b = RandomStreams(5).generator('init').standard_normal(10)
        self.assertArraysEqual(a, b)

    def test_streams_independent(self):
        streams = RandomStreams(5)
        a = streams.generator('init').standard_normal(10)
        b = streams.generator('data').standard_normal(10)
        c = RandomStreams(6).generator('init').standard_normal(10)
        assert not (a == b).any()
        assert not (a == c).any()

    def test_large_seeds(self):
        a = RandomStreams(2**64 - 1).generator('x').integers(0, 2**32, 4)
        b = RandomStreams(2**32 - 1).generator('x').integers(0, 2**32, 4)
        assert not (a == b).all()
        for seed in -1, 2**64:
            with pytest.raises(ValueError):
                RandomStreams(seed)

    def test_child_seed(self):
        streams = RandomStreams(9)
        seed = streams.child_seed('check')
        assert 0 <= seed < 2**64
        assert seed == RandomStreams(9).child_seed('check')
        assert seed != streams.child_seed('other')
        RandomStreams(seed)
