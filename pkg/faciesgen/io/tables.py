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
"""Comma-separated result tables

   All tables start with a header line. Floats are written with ``%.10g``,
   other values with ``str``.
"""


__all__ = [
    'dump_csv', 'load_csv', 'dump_loss_trace', 'dump_sampler_trace',
    'dump_anodi', 'dump_embedding', 'dump_histogram', 'dump_memorization',
    'dump_points',
]


def _format(value):
    if isinstance(value, float) or type(value).__name__.startswith('float'):
        return '%.10g' % value
    return str(value)


def dump_csv(filename, header, rows):
    """Write a header and rows of values to a CSV file

       Arguments:
        | ``filename``  --  the output file
        | ``header``  --  a list of column names
        | ``rows``  --  an iterable of sequences with one value per column
    """
    with open(filename, 'w', newline='\n') as f:
        print(','.join(header), file=f)
        for row in rows:
            if len(row) != len(header):
                raise ValueError('Row %r does not match header %r.' % (row, header))
            print(','.join(_format(value) for value in row), file=f)


def load_csv(filename):
    """Read a CSV file written by :func:`dump_csv`

       Returns (header, rows), all values as strings.
    """
    with open(filename) as f:
        lines = [line.rstrip('\n') for line in f if len(line.strip()) > 0]
    if len(lines) == 0:
        raise ValueError('Empty CSV file: %s' % filename)
    return lines[0].split(','), [line.split(',') for line in lines[1:]]


def dump_loss_trace(filename, trace):
    dump_csv(filename, ['iter', 'd_loss', 'g_loss'], trace)


def dump_sampler_trace(filename, trace):
    dump_csv(filename, ['iter', 'objective', 'mean_loss', 'entropy'], trace)


def dump_anodi(filename, report):
    dump_csv(filename, ['method', 'resolution', 'inconsistency', 'diversity'], report.csv_rows())


def dump_embedding(filename, labels, embedding):
    """Write MDS coordinates; labels is a list of (method, index) pairs"""
    rows = [(method, index, x, y) for (method, index), (x, y) in zip(labels, embedding.points[:, :2])]
    dump_csv(filename, ['method', 'index', 'x', 'y'], rows)


def dump_histogram(filename, histogram):
    dump_csv(filename, ['bin_lo', 'bin_hi', 'count'], histogram.csv_rows())


def dump_memorization(filename, report):
    dump_csv(filename, ['realization', 'dataset_index', 'variant', 'distance'], report.rows)


def dump_points(filename, points):
    """Write an n×d array of sample points with columns x0, x1, ..."""
    header = ['x%i' % i for i in range(points.shape[1])]
    dump_csv(filename, header, [tuple(float(v) for v in row) for row in points])
