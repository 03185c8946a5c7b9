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
"""Common functionality used by the faciesgen.io package."""


import os

import numpy as np


__all__ = ["slice_match", "FileFormatError", "BinaryReader", "SlicedReader",
           "pack_u32", "ConfigError"]


def slice_match(sub, counter):
    """Efficiently test if counter is in ``range(*sub)``

       Arguments:
        | ``sub``  --  a slice object
        | ``counter``  -- an integer

       The function returns True if the counter is in
       ``range(sub.start, sub.stop, sub.step)``. StopIteration is raised as
       soon as the counter reaches ``sub.stop``.
    """

    if sub.start is not None and counter < sub.start:
        return False
    if sub.stop is not None and counter >= sub.stop:
        raise StopIteration
    if sub.step is not None:
        if sub.start is None:
            if counter % sub.step != 0:
                return False
        else:
            if (counter - sub.start) % sub.step != 0:
                return False
    return True


class FileFormatError(Exception):
    """Is raised when unexpected data is encountered while reading a file

       The attributes ``filename`` and ``offset`` (a byte offset) locate the
       problem when known.
    """
    def __init__(self, message, filename=None, offset=None):
        self.filename = filename
        self.offset = offset
        location = []
        if filename is not None:
            location.append('file %s' % filename)
        if offset is not None:
            location.append('byte offset %i' % offset)
        if len(location) > 0:
            message = '%s [%s]' % (message, ', '.join(location))
        Exception.__init__(self, message)


def pack_u32(*values):
    """Encode unsigned 32-bit integers, little-endian"""
    for value in values:
        if value < 0 or value >= 2**32:
            raise ValueError('Value does not fit in an unsigned 32-bit integer: %i' % value)
    return np.array(values, dtype='<u4').tobytes()


class BinaryReader(object):
    """Little-endian reader that keeps track of the byte offset

       Usage::

           with BinaryReader('train.geod') as reader:
               reader.expect_magic(b'GEOD')
               version = reader.read_u32('version')
    """

    def __init__(self, f):
        """
           Argument:
            | ``f``  --  a filename or a file-like object opened in binary mode
        """
        if isinstance(f, (str, os.PathLike)):
            self._auto_close = True
            self._f = open(f, 'rb')
            self.filename = os.fspath(f)
        else:
            self._auto_close = False
            self._f = f
            self.filename = getattr(f, 'name', None)
        self.offset = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()
        return False

    def close(self):
        if self._auto_close and not self._f.closed:
            self._f.close()

    def error(self, message, offset=None):
        """Return a FileFormatError located at the current offset"""
        if offset is None:
            offset = self.offset
        return FileFormatError(message, self.filename, offset)

    def read(self, size, what):
        data = self._f.read(size)
        if len(data) != size:
            raise self.error('Truncated file while reading %s: expected %i bytes, found %i.' % (what, size, len(data)))
        self.offset += size
        return data

    def read_u32(self, what):
        return int(np.frombuffer(self.read(4, what), dtype='<u4')[0])

    def read_f32(self, count, what):
        """Read count 32-bit floats into a new native float32 array"""
        return np.frombuffer(self.read(4*count, what), dtype='<f4').astype(np.float32)

    def skip(self, size, what):
        # Reading instead of seeking also works for pipes.
        self.read(size, what)

    def expect_magic(self, magic):
        found = self.read(len(magic), 'magic')
        if found != magic:
            raise self.error('Wrong magic: expected %r, found %r.' % (magic, found), 0)

    def expect_end(self):
        if len(self._f.read(1)) > 0:
            raise self.error('Trailing data after the last record.')


class SlicedReader(BinaryReader):
    """Base class for readers that can read a slice of all the frames

       Subclasses read their header in ``__init__``, set ``self.nframe`` and
       implement ``_read_frame`` and ``_skip_frame``.
    """

    def __init__(self, f, sub=slice(None)):
        """
           Argument:
            | ``f``  --  a filename or a file-like object

           Optional argument:
            | ``sub``  --  a slice indicating which frames to read/skip
        """
        BinaryReader.__init__(self, f)
        self._sub = sub
        self._counter = 0
        self.nframe = None

    def _read_frame(self):
        """Read a single frame from the file"""
        raise NotImplementedError

    def _skip_frame(self):
        """Skip a single frame from the file"""
        raise NotImplementedError

    def __iter__(self):
        return self

    def __next__(self):
        """Get the next frame from the file, taking into account the slice

           This method is part of the iterator protocol.
        """
        while True:
            if self._counter >= self.nframe:
                raise StopIteration
            if slice_match(self._sub, self._counter):
                break
            self._skip_frame()
            self._counter += 1

        result = self._read_frame()
        self._counter += 1
        return result


class ConfigError(ValueError):
    """Is raised for invalid user configuration: keys, values or input files"""
    pass
