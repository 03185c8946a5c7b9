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
"""Binary greyscale images (PGM, P5 flavor)

   Facies values in [-1, 1] are mapped to bytes as floor((v + 1)*127.5 + 0.5),
   i.e. -1 becomes 0 (black background) and +1 becomes 255 (white channel).
"""


import os

import numpy as np

from faciesgen.autodiff import DomainError, ShapeError
from faciesgen.io.common import FileFormatError


__all__ = ['write_pgm', 'read_pgm', 'values_to_bytes']


def values_to_bytes(image):
    """Convert values in [-1, 1] to uint8 grey levels"""
    image = np.asarray(image, dtype=np.float64)
    bad = ~((image >= -1) & (image <= 1))
    if bad.any():
        raise DomainError('Image values must lie in [-1, 1], found %s.' % image[bad].ravel()[0])
    return np.minimum(np.floor((image + 1)*127.5 + 0.5), 255).astype(np.uint8)


def write_pgm(image, filename):
    """Write an H×W image with values in [-1, 1] as a binary PGM file

       Arguments:
        | ``image``  --  a 2D array (a 1×H×W array is accepted too)
        | ``filename``  --  the output file
    """
    image = np.asarray(image)
    if image.ndim == 3 and image.shape[0] == 1:
        image = image[0]
    if image.ndim != 2:
        raise ShapeError('write_pgm expects an H×W image, got shape %s.' % (image.shape,))
    pixels = values_to_bytes(image)
    with open(filename, 'wb') as f:
        f.write(('P5\n%i %i\n255\n' % (image.shape[1], image.shape[0])).encode('ascii'))
        f.write(pixels.tobytes())


def _tokens(data, count):
    # Returns the first count header tokens and the offset just after the
    # whitespace byte that follows the last one.
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and (data[pos:pos+1].isspace() or data[pos:pos+1] == b'#'):
            if data[pos:pos+1] == b'#':
                end = data.find(b'\n', pos)
                pos = len(data) if end == -1 else end
            pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos+1].isspace():
            pos += 1
        if start == pos:
            raise FileFormatError('Truncated PGM header.', None, pos)
        tokens.append(data[start:pos])
    return tokens, pos + 1


def read_pgm(filename):
    """Read a binary PGM file with maxval 255

       Returns an H×W uint8 array.
    """
    with open(filename, 'rb') as f:
        data = f.read()
    name = os.fspath(filename)
    if data[:2] != b'P5':
        raise FileFormatError('Not a binary PGM file.', name, 0)
    try:
        tokens, offset = _tokens(data, 4)
    except FileFormatError as e:
        raise FileFormatError('Truncated PGM header.', name, e.offset)
    try:
        width, height, maxval = [int(t) for t in tokens[1:]]
    except ValueError:
        raise FileFormatError('Malformed PGM header.', name, 2)
    if maxval != 255:
        raise FileFormatError('Only maxval 255 is supported, found %i.' % maxval, name, 2)
    size = width*height
    if len(data) - offset != size:
        raise FileFormatError('Expected %i pixel bytes, found %i.' % (size, len(data) - offset), name, offset)
    return np.frombuffer(data, np.uint8, size, offset).reshape(height, width).copy()
