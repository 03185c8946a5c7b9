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
"""Utilities that are used in all parts of the FaciesGen library"""


import numpy as np


__all__ = ["cached", "RandomStreams"]


class cached(object):
    """A decorator that will turn a method into a caching descriptor

       When an attribute is requested for the first time, the original method
       will be called and its return value is cached. Subsequent access to the
       attribute will just return the cached value.

       Usage::

             class Foo(object):
                 @cached
                 def some_property(self):
                     return self.x*self.y

       Once the result is computed and cached, it can not be erased. The
       values on which the result depends must therefore not change after the
       first access. See :class:`faciesgen.dataset.GaussianMixture` for an
       example.
    """
    def __init__(self, fn):
        self.fn = fn
        self.attribute_name = "_cache_%s" % fn.__name__
        fn_doc_lines = (fn.__doc__ or fn.__name__).split("\n")
        self.__doc__ = "*Cached attribute:* %s.\n" % fn_doc_lines[0] + \
            "\n".join(fn_doc_lines[1:])

    def __get__(self, instance, cls=None):
        if instance is None:
            return self
        value = getattr(instance, self.attribute_name, self)
        if value is self:
            value = self.fn(instance)
            setattr(instance, self.attribute_name, value)
        return value


class RandomStreams(object):
    """Named, mutually independent random streams derived from one seed

       Every consumer of randomness (parameter initialization, data order,
       latent draws, ...) asks for its own stream by name. Adding a new
       consumer therefore never shifts the numbers drawn by the others.

       Usage::

             streams = RandomStreams(7)
             rng_init = streams.generator('init')
             rng_data = streams.generator('data')
    """
    def __init__(self, seed):
        """
           Argument:
            | ``seed``  --  a nonnegative integer (unsigned 64 bit)
        """
        seed = int(seed)
        if seed < 0 or seed >= 2**64:
            raise ValueError('The seed must be an unsigned 64-bit integer, got %i.' % seed)
        self.seed = seed

    def seed_sequence(self, name):
        """Return the SeedSequence of the stream with the given name"""
        # The name is mixed in byte by byte, independent of PYTHONHASHSEED.
        key = [self.seed & 0xffffffff, self.seed >> 32] + list(name.encode('utf-8'))
        return np.random.SeedSequence(key)

    def generator(self, name):
        """Return a fresh numpy Generator for the stream with the given name"""
        return np.random.Generator(np.random.PCG64(self.seed_sequence(name)))

    def child_seed(self, name):
        """Derive an integer seed for a sub-computation that takes a seed"""
        low, high = self.seed_sequence(name).generate_state(2, np.uint32)
        return int(low) | (int(high) << 32)
