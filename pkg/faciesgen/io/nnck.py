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
"""NNCK network checkpoints

   All integers are little-endian unsigned 32-bit, all floats little-endian
   32-bit::

       "NNCK"  version=1  tensor count
       per tensor: name length, UTF-8 name, rank, dims[rank], data (row-major)

   Tensors are written in the order of the mapping passed to
   :func:`dump_checkpoint`. For networks this is the order of
   :meth:`faciesgen.layers.Network.state_dict`, so that dumping the same
   network twice gives identical bytes.
"""


from collections import OrderedDict

import numpy as np

from faciesgen.io.common import BinaryReader, FileFormatError, pack_u32
from faciesgen.layers import network_from_state


__all__ = ['load_checkpoint', 'dump_checkpoint', 'load_network', 'dump_network']


MAGIC = b'NNCK'
VERSION = 1


def load_checkpoint(filename):
    """Load the tensors from a checkpoint file

       Argument:
        | ``filename``  --  the file to load from (or a binary file object)

       Returns an OrderedDict with float32 arrays.
    """
    result = OrderedDict()
    with BinaryReader(filename) as reader:
        reader.expect_magic(MAGIC)
        version = reader.read_u32('version')
        if version != VERSION:
            raise reader.error('Unsupported checkpoint version %i.' % version, 4)
        count = reader.read_u32('tensor count')
        for counter in range(count):
            start = reader.offset
            length = reader.read_u32('name length')
            try:
                name = reader.read(length, 'tensor name').decode('utf-8')
            except UnicodeDecodeError:
                raise reader.error('Tensor name is not valid UTF-8.', start + 4)
            if name in result:
                raise reader.error('Duplicate tensor name %s.' % name, start)
            rank = reader.read_u32('rank')
            shape = tuple(reader.read_u32('dimension') for i in range(rank))
            size = int(np.prod(shape, dtype=np.int64))
            result[name] = reader.read_f32(size, 'tensor %s' % name).reshape(shape)
        reader.expect_end()
    return result


def dump_checkpoint(filename, tensors):
    """Write tensors to a checkpoint file

       Arguments:
        | ``filename``  --  the file to write to
        | ``tensors``  --  a mapping from names to arrays (converted to 32-bit
                           floats)
    """
    chunks = [MAGIC, pack_u32(VERSION, len(tensors))]
    for name, value in tensors.items():
        if len(name) == 0:
            raise ValueError('Tensor names can not be empty.')
        value = np.asarray(value)
        encoded = name.encode('utf-8')
        chunks.append(pack_u32(len(encoded)))
        chunks.append(encoded)
        chunks.append(pack_u32(value.ndim, *value.shape))
        chunks.append(np.ascontiguousarray(value, dtype='<f4').tobytes())
    with open(filename, 'wb') as f:
        for chunk in chunks:
            f.write(chunk)


def dump_network(filename, net):
    """Write all parameters and running statistics of a network"""
    dump_checkpoint(filename, net.state_dict())


def load_network(filename):
    """Rebuild a GeneratorNet, DiscriminatorNet or InferenceNet from a file"""
    state = load_checkpoint(filename)
    try:
        return network_from_state(state)
    except Exception as e:
        raise FileFormatError('Checkpoint does not hold a known network: %s' % e, str(filename))
