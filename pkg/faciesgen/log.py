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
"""Screen logging and CPU timers

   All library code writes through the module-level ``log`` object and times
   expensive parts with the module-level ``timer`` object::

       from faciesgen.log import log, timer

       with timer.section('GAN'):
           if log.do_medium:
               with log.section('GAN'):
                   log('Iteration&%i' % counter)

   Every call to ``log`` must be guarded by one of the ``do_*`` properties.
   Logging at a level below ``warning`` raises an error.

   An ``&`` in a message splits it in a lead and a body. When the body wraps
   over several lines, the continuation lines are indented by the width of the
   lead, which keeps columns of ``key: value`` lines aligned.
"""


from __future__ import print_function, division

import datetime
import getpass
import os
import platform
import sys
from contextlib import contextmanager
from time import process_time

import numpy as np
import scipy

from faciesgen.version import __version__


__all__ = ['ScreenLog', 'TimerGroup', 'CpuTimer', 'log', 'timer']


def _wrap(text, width):
    """Split text in chunks of at most ``width`` characters at spaces"""
    chunks = []
    while len(text) > width:
        cut = text.rfind(' ', 0, width)
        if cut == -1:
            chunks.append(text[:width])
            text = text[width:]
        else:
            chunks.append(text[:cut])
            text = text[cut:].lstrip()
    if len(text) > 0:
        chunks.append(text)
    return chunks


class ScreenLog(object):
    """Leveled, sectioned screen output with a fixed line width

       Each line starts with the prefix of the innermost section, right
       aligned in the margin. Switching to another section inserts a blank
       line.
    """
    silent = 0
    warning = 1
    low = 2
    medium = 3
    high = 4
    debug = 5

    margin = 8
    width = 72

    def __init__(self, name, version, head_banner, foot_banner, timer, f=None):
        """
           Arguments:
            | ``name``  --  program name, shown in the environment summary
            | ``version``  --  program version
            | ``head_banner``  --  printed before the first line of output
            | ``foot_banner``  --  printed by :meth:`print_footer`
            | ``timer``  --  a TimerGroup, reported in the footer

           Optional argument:
            | ``f``  --  a file-like object [default=sys.stdout]
        """
        self.name = name
        self.version = version
        self.head_banner = head_banner
        self.foot_banner = foot_banner
        self.timer = timer
        self._level = self.medium
        # True once the header is printed
        self._active = False
        self._prefixes = []
        self.prefix = ' '*(self.margin - 1)
        self._last_prefix = None
        self._pending_blank = False
        self.set_file(sys.stdout if f is None else f)

    do_warning = property(lambda self: self._level >= self.warning)
    do_low = property(lambda self: self._level >= self.low)
    do_medium = property(lambda self: self._level >= self.medium)
    do_high = property(lambda self: self._level >= self.high)
    do_debug = property(lambda self: self._level >= self.debug)

    def set_file(self, f):
        self._file = f
        self._pending_blank = False

    def set_level(self, level):
        if not self.silent <= level <= self.debug:
            raise ValueError('The log level must lie between %i (silent) and %i (debug), got %s.' % (
                self.silent, self.debug, level))
        self._level = level

    def __call__(self, *words):
        if not self.do_warning:
            raise RuntimeError('Logging while silent, guard the call with log.do_warning or similar.')
        if not self._active:
            self.print_header()
        text = ' '.join(str(word) for word in words)
        lead, amp, body = text.partition('&')
        if amp == '':
            lead, body = '', text
        else:
            lead += ' '
        if len(lead) > self.width - self.width//2:
            raise ValueError('The lead "%s" is wider than half a line.' % lead)
        if self._pending_blank and self.prefix != self._last_prefix:
            self._file.write('\n')
        self._pending_blank = False
        indent = ' '*len(lead)
        for counter, chunk in enumerate(_wrap(body, self.width - len(lead))):
            self._file.write('%s %s%s\n' % (self.prefix, lead if counter == 0 else indent, chunk))
        self._last_prefix = self.prefix

    def warn(self, *words):
        self('WARNING!!&' + ' '.join(str(word) for word in words))

    def hline(self, char='~'):
        self(char*self.width)

    def center(self, *words, **kwargs):
        """Center a line, optionally between two ``edge`` strings"""
        edge = kwargs.pop('edge', '')
        if len(kwargs) > 0:
            raise TypeError('Unexpected keyword arguments: %s' % ', '.join(kwargs))
        text = ' '.join(str(word) for word in words)
        inner = self.width - 2*len(edge)
        if len(text) > inner:
            raise ValueError('Centered lines are not wrapped, "%s" is too long.' % text)
        self(edge + text.center(inner) + edge)

    def blank(self):
        self._file.write('\n')

    def table(self, header, rows, formats):
        """Print a small fixed-width table framed by horizontal lines

           Arguments:
            | ``header``  --  the header line
            | ``rows``  --  a list of tuples
            | ``formats``  --  a list of %-format strings, one per column
        """
        self.hline()
        self(header)
        self.hline()
        for row in rows:
            self(' '.join(fmt % value for fmt, value in zip(formats, row)))
        self.hline()

    @contextmanager
    def section(self, prefix):
        """Prefix all lines logged in the with block"""
        if len(prefix) > self.margin - 1:
            raise ValueError('Section prefixes have at most %i characters, got "%s".' % (
                self.margin - 1, prefix))
        self._prefixes.append(self.prefix)
        self.prefix = prefix.upper().rjust(self.margin - 1)
        self._pending_blank = True
        try:
            yield
        finally:
            self.prefix = self._prefixes.pop()
            if self._active:
                self._pending_blank = True

    def print_header(self):
        if not self.do_warning or self._active:
            return
        # An uncaught exception silences the log, so no footer hides the traceback.
        def silence_and_report(*exc_info):
            self.set_level(self.silent)
            sys.__excepthook__(*exc_info)
        sys.excepthook = silence_and_report
        self._active = True
        print(self.head_banner, file=self._file)
        self._print_environment()

    def print_footer(self):
        if not (self.do_warning and self._active):
            return
        self._print_environment()
        if self.timer.is_running('Total'):
            self.timer._stop('Total')
        self.timer.report(self)
        print(self.foot_banner, file=self._file)

    def _print_environment(self):
        if not self.do_low:
            return
        rows = [
            ('User', getpass.getuser()),
            ('Platform', platform.platform()),
            ('Time', datetime.datetime.now().isoformat()),
            ('Python', sys.version.replace('\n', '')),
            ('NumPy', np.__version__),
            ('SciPy', scipy.__version__),
            (self.name, self.version),
            ('Current Dir', os.getcwd()),
            ('Command line', ' '.join(sys.argv)),
        ]
        with self.section('ENV'):
            for label, value in rows:
                self('%s&%s' % ((label + ':').ljust(14), value))


class CpuTimer(object):
    """Process time spent in one labeled section

       ``total`` includes nested sections, ``own`` excludes them. Both are in
       seconds. ``calls`` counts how often the section was entered.
    """
    def __init__(self, label):
        self.label = label
        self.total = 0.0
        self.own = 0.0
        self.calls = 0
        self._entered = None
        self._resumed = None

    def start(self, now):
        self.calls += 1
        self._entered = now
        self._resumed = now

    def pause(self, now):
        self.own += now - self._resumed
        self._resumed = None

    def resume(self, now):
        self._resumed = now

    def stop(self, now):
        self.own += now - self._resumed
        self.total += now - self._entered
        self._entered = None
        self._resumed = None


class TimerGroup(object):
    """Nested CPU timers, one per label

       The group starts timing the label ``Total`` at construction. Time
       spent in a nested section is subtracted from the ``own`` time of the
       enclosing section.
    """
    def __init__(self):
        self.parts = {}
        self._running = []
        self._start('Total')

    def reset(self):
        for part in self.parts.values():
            part.total = 0.0
            part.own = 0.0
            part.calls = 0

    @contextmanager
    def section(self, label):
        self._start(label)
        try:
            yield
        finally:
            self._stop(label)

    def _start(self, label):
        now = process_time()
        part = self.parts.setdefault(label, CpuTimer(label))
        if len(self._running) > 0:
            self._running[-1].pause(now)
        part.start(now)
        self._running.append(part)

    def is_running(self, label):
        return any(part.label == label for part in self._running)

    def _stop(self, label):
        now = process_time()
        if len(self._running) == 0:
            raise RuntimeError('Timer section %s is not running.' % label)
        part = self._running.pop()
        if part.label != label:
            raise RuntimeError('Timer sections are not nested, stopping %s inside %s.' % (label, part.label))
        part.stop(now)
        if len(self._running) > 0:
            self._running[-1].resume(now)

    def report(self, log):
        """Print a table of all labels, the largest own time first"""
        parts = sorted(self.parts.values(), key=(lambda part: (-part.own, part.label)))
        top = max([part.own for part in parts] + [0.0])
        bar_width = log.width - 43
        with log.section('TIMER'):
            log('CPU time per section, in seconds.')
            log.hline()
            log('Label              Calls    Total      Own')
            log.hline()
            for part in parts:
                bar = '' if top <= 0 else '#'*int(round(part.own/top*bar_width))
                log('%-16s %7i %8.1f %8.1f %s' % (part.label[:16], part.calls, part.total, part.own, bar))
            log.hline()


head_banner = """\
 ______________________________________________________________________________
/                                                                              \\
\\            FaciesGen %-10s  channelized facies, GANs and samplers          /
/                                                                              \\
\\______________________________________________________________________________/
""" % __version__


foot_banner = """\
 ______________________________________________________________________________
/                                                                              \\
\\                           End of FaciesGen output                            /
\\______________________________________________________________________________/
"""


timer = TimerGroup()
log = ScreenLog('FaciesGen', __version__, head_banner, foot_banner, timer)
