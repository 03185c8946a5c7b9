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
"""Readers and writers for the file formats used by FaciesGen

   * GEOD: binary image datasets (:mod:`faciesgen.io.geod`)
   * NNCK: binary network checkpoints (:mod:`faciesgen.io.nnck`)
   * PGM: greyscale images for inspection (:mod:`faciesgen.io.pgm`)
   * conditioning data as text (:mod:`faciesgen.io.observations`)
   * CSV result tables (:mod:`faciesgen.io.tables`)
"""

from faciesgen.io.common import *
from faciesgen.io.geod import *
from faciesgen.io.nnck import *
from faciesgen.io.observations import *
from faciesgen.io.pgm import *
from faciesgen.io.tables import *
