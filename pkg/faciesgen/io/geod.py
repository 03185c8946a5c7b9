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
"""GEOD image datasets

   Layout, all integers little-endian unsigned 32-bit::

       "GEOD"  version=1  N  H  W
       N*H*W little-endian 32-bit floats, image-major, row-major

   The header is 20 bytes, so a file holds 20 + 4*N*H*W bytes. Loading
   rejects values outside [-1, 1] (NaN included) with the byte offset of the
   offending value.
"""


import numpy as np

from faciesgen.io.common import SlicedReader, pack_u32


__all__ = ['GeodReader', 'load_geod', 'dump_geod']


MAGIC = b'GEOD'
VERSION = 1
HEADER_SIZE = 20


class GeodReader(SlicedReader):
    """Iterate over (a slice of) the images in a GEOD file

       Usage::

           with GeodReader('train.geod', slice(0, 100, 10)) as reader:
               for image in reader:
                   ...
    """

    def __init__(self, f, sub=slice(None)):
        SlicedReader.__init__(self, f, sub)
        self.expect_magic(MAGIC)
        version = self.read_u32('version')
        if version != VERSION:
            raise self.error('Unsupported GEOD version %i.' % version, 4)
        self.nframe = self.read_u32('image count')
        self.shape = (self.read_u32('height'), self.read_u32('width'))
        if self.shape[0] == 0 or self.shape[1] == 0:
            raise self.error('Images must have nonzero height and width.', 12)
        self._frame_size = self.shape[0]*self.shape[1]

    def _read_frame(self):
        start = self.offset
        image = self.read_f32(self._frame_size, 'image %i' % self._counter).reshape(self.shape)
        bad = ~((image >= -1) & (image <= 1))
        if bad.any():
            first = int(np.flatnonzero(bad.ravel())[0])
            raise self.error('Value %s outside [-1, 1].' % image.ravel()[first], start + 4*first)
        return image

    def _skip_frame(self):
        self.skip(4*self._frame_size, 'image %i' % self._counter)


def load_geod(filename, sub=slice(None)):
    """Load images from a GEOD file

       Argument:
        | ``filename``  --  the file to read

       Optional argument:
        | ``sub``  --  a slice selecting images [default: all]

       Returns an N×H×W float32 array. When all images are read, trailing
       bytes after the last one are an error.
    """
    with GeodReader(filename, sub) as reader:
        images = list(reader)
        if sub == slice(None):
            reader.expect_end()
        if len(images) == 0:
            return np.zeros((0,) + reader.shape, np.float32)
        return np.array(images, dtype=np.float32)


def dump_geod(filename, images):
    """Write an N×H×W array of values in [-1, 1] to a GEOD file"""
    images = np.asarray(images)
    if images.ndim != 3:
        raise ValueError('Expecting an N×H×W array, got shape %s.' % (images.shape,))
    with open(filename, 'wb') as f:
        f.write(MAGIC)
        f.write(pack_u32(VERSION, *images.shape))
        f.write(np.ascontiguousarray(images, dtype='<f4').tobytes())
