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
"""Conditioning data files

   One observation per line: ``row col val`` with zero-based grid indices and
   val 1 (channel) or 0 (background). Blank lines and ``#`` comments are
   ignored. The configurations A to I used to validate the samplers ship with
   the package and can be loaded by name::

       obs = load_observations('A')
"""


import os
from importlib import resources

import numpy as np

from faciesgen.conditioner import Observations
from faciesgen.io.common import ConfigError


__all__ = ['PRESETS', 'load_observations', 'parse_observations', 'dump_observations']


PRESETS = tuple('ABCDEFGHI')


def parse_observations(lines, shape=(64, 64), name='<string>'):
    """Parse observation lines into an Observations instance

       Arguments:
        | ``lines``  --  an iterable of strings

       Optional arguments:
        | ``shape``  --  the grid dimensions [default=(64, 64)]
        | ``name``  --  used in error messages
    """
    rows = []
    cols = []
    codes = []
    seen = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split('#', 1)[0].strip()
        if len(line) == 0:
            continue
        words = line.split()
        if len(words) != 3:
            raise ConfigError('%s, line %i: expecting "row col val", got "%s".' % (name, lineno, line))
        try:
            row, col, code = [int(word) for word in words]
        except ValueError:
            raise ConfigError('%s, line %i: expecting three integers, got "%s".' % (name, lineno, line))
        if code not in (0, 1):
            raise ConfigError('%s, line %i: the value must be 0 or 1, got %i.' % (name, lineno, code))
        if not (0 <= row < shape[0] and 0 <= col < shape[1]):
            raise ConfigError('%s, line %i: cell (%i, %i) lies outside the %i×%i grid.' % (
                name, lineno, row, col, shape[0], shape[1]))
        if (row, col) in seen:
            raise ConfigError('%s, line %i: cell (%i, %i) was already observed on line %i.' % (
                name, lineno, row, col, seen[(row, col)]))
        seen[(row, col)] = lineno
        rows.append(row)
        cols.append(col)
        codes.append(code)
    return Observations.from_facies(rows, cols, codes, shape)


def load_observations(source, shape=(64, 64)):
    """Load observations from a preset name ('A' to 'I') or a file name"""
    if isinstance(source, str) and source.upper() in PRESETS and not os.path.exists(source):
        resource = resources.files('faciesgen').joinpath('data', 'conditioning', '%s.txt' % source.lower())
        text = resource.read_text(encoding='utf-8')
        return parse_observations(text.splitlines(), shape, 'preset %s' % source.upper())
    with open(source) as f:
        return parse_observations(f, shape, os.fspath(source))


def dump_observations(filename, observations):
    """Write observations in the format read by :func:`load_observations`"""
    codes = (np.asarray(observations.values) > 0).astype(int)
    with open(filename, 'w') as f:
        print('# row col val (1 channel, 0 background)', file=f)
        for row, col, code in zip(observations.rows, observations.cols, codes):
            print('%i %i %i' % (row, col, code), file=f)
