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
"""Neural parametrizations of channelized subsurface images

   FaciesGen trains a generator network that maps short latent vectors to
   binary-like facies images (channel versus background), and conditions it on
   point observations by training a second network that samples latent
   vectors from the posterior. Everything, including the automatic
   differentiation, is implemented on top of NumPy and SciPy.

   Most of the submodules are loaded directly into the faciesgen namespace.
   The faciesgen.io subpackage and the command-line interface faciesgen.cli
   must be imported explicitly. Example::

       from faciesgen.io import load_network, write_pgm
"""


from faciesgen.version import __version__


import numpy as np
np.seterr(divide='raise', invalid='raise')

from faciesgen.autodiff import *
from faciesgen.assess import *
from faciesgen.conditioner import *
from faciesgen.dataset import *
from faciesgen.gan import *
from faciesgen.layers import *
from faciesgen.log import *
from faciesgen.mds import *
from faciesgen.optim import *
from faciesgen.utils import *
