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
"""Command-line interface: the ``faciesgen`` console script

   Every subcommand builds a :class:`RunConfig` from its defaults, an optional
   ``--config`` file with ``key = value`` lines and the explicit flags, in that
   order of precedence. All randomness of a command derives from ``--seed``.

   Exit codes: 0 on success, 2 for invalid configuration or usage and 1 for
   all other handled failures. Failures print a single line on standard error.
"""


import argparse
import os
import sys
from collections import OrderedDict

import numpy as np

from faciesgen.assess import anodi_scores, binarize_clean, discriminator_histogram, \
    js_distance_matrix, memorization_check, pattern_histogram
from faciesgen.autodiff import DomainError, ShapeError, UsageError
from faciesgen.conditioner import PosteriorSpec, SamplerConfig, TrainingError, \
    observation_match, sample_conditional, train_sampler
from faciesgen.dataset import REFERENCE_SEED, ChannelParams, GaussianMixture, \
    assignment_fractions, histogram_js, load_dataset, mixture_log_density, \
    reference_image, sample_patches, save_dataset, synth_channels
from faciesgen.gan import GanConfig, sample_unconditional, train_gan
from faciesgen.io import ConfigError, FileFormatError, dump_anodi, dump_csv, \
    dump_embedding, dump_geod, dump_histogram, dump_loss_trace, \
    dump_memorization, dump_network, dump_points, dump_sampler_trace, \
    load_geod, load_network, load_observations, write_pgm
from faciesgen.layers import DiscriminatorNet, GeneratorNet, InferenceNet
from faciesgen.log import log, timer
from faciesgen.mds import smacof_mds
from faciesgen.utils import RandomStreams


__all__ = [
    'ConfigError', 'RunConfig', 'build_parser', 'main', 'cmd_gen_data',
    'cmd_train_gan', 'cmd_train_inference', 'cmd_sample', 'cmd_assess',
    'cmd_toy_mixture',
]


def _int(text):
    return int(text)


def _seed(text):
    value = int(text)
    if value < 0 or value >= 2**64:
        raise ValueError('a seed must be an unsigned 64-bit integer')
    return value


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('expecting true or false')


def _int_tuple(text):
    return tuple(int(word) for word in text.split(','))


def _named_paths(text):
    """Parse ``name=path,name=path`` into an OrderedDict"""
    result = OrderedDict()
    for item in text.split(','):
        name, sep, path = item.partition('=')
        name = name.strip()
        if sep == '' or len(name) == 0 or len(path.strip()) == 0:
            raise ValueError('expecting name=path items separated by commas')
        if name in result:
            raise ValueError('the name %s is used twice' % name)
        result[name] = path.strip()
    return result


def _choice(*choices):
    def convert(text):
        if text not in choices:
            raise ValueError('expecting one of %s' % ', '.join(choices))
        return text
    return convert


# (key, converter, default, help) per subcommand. A None default is only
# replaced by the config file or a flag.
COMMON_OPTIONS = [
    ('seed', _seed, 0, 'seed of all random streams of the command'),
]


GEN_DATA_OPTIONS = [
    ('out', str, 'train.geod', 'the output GEOD file'),
    ('n', _int, 1000, 'the number of training images'),
    ('size', _int, 64, 'the image height and width, at least 16'),
    ('reference', str, None, 'GEOD file for the reference image [default: OUT with suffix .ref.geod]'),
    ('reference_size', _int, 256, 'the reference image height and width'),
    ('reference_seed', _seed, REFERENCE_SEED, 'the seed of the reference image'),
    ('min_channels', _int, 2, 'minimum number of channels per image'),
    ('max_channels', _int, 4, 'maximum number of channels per image'),
    ('min_thickness', _int, 3, 'minimum channel thickness in pixels'),
    ('max_thickness', _int, 5, 'maximum channel thickness in pixels'),
    ('persistence', float, 0.7, 'probability to keep the vertical step of a channel'),
]


TRAIN_GAN_OPTIONS = [
    ('out', str, 'run', 'output directory for checkpoints and the loss trace'),
    ('data', str, None, 'the training set (GEOD)'),
    ('mode', _choice('wgan', 'standard'), 'wgan', 'the adversarial loss'),
    ('batch_size', _int, 32, 'images per batch'),
    ('n_critic', _int, 5, 'discriminator updates per generator update'),
    ('clip', float, 0.01, 'weight clipping bound (wgan)'),
    ('lr', float, 1e-4, 'learning rate'),
    ('iters', _int, 20000, 'number of generator updates'),
    ('nz', _int, 30, 'latent dimension'),
    ('ngf', _int, 64, 'generator width'),
    ('ndf', _int, 64, 'discriminator width'),
    ('optimizer', _choice('adam', 'rmsprop'), 'adam', 'the optimizer of both networks'),
    ('beta1', float, 0.5, 'Adam first-moment decay'),
    ('log_every', _int, 100, 'iterations between progress lines'),
    ('checkpoint_every', _int, 1000, 'iterations between intermediate checkpoints'),
]


TRAIN_INFERENCE_OPTIONS = [
    ('out', str, 'run', 'output directory for the checkpoint and the trace'),
    ('g', str, None, 'the generator checkpoint'),
    ('obs', str, None, 'an observation file or a preset name A-I'),
    ('lam', float, 0.1, 'weight of the latent prior term'),
    ('batch_size', _int, 64, 'source vectors per batch'),
    ('k', _int, None, 'neighbor order of the entropy estimate [default: floor(sqrt(batch))]'),
    ('lr', float, 1e-4, 'learning rate'),
    ('iters', _int, 10000, 'maximum number of updates'),
    ('nw', _int, 30, 'source dimension'),
    ('hidden', _int, 512, 'width of the hidden layers'),
    ('depth', _int, 5, 'number of hidden layers'),
    ('use_entropy', _bool, True, 'include the entropy term'),
    ('window', _int, 500, 'early-stopping window, 0 disables'),
    ('rel_tol', float, 1e-3, 'early-stopping relative tolerance'),
    ('log_every', _int, 100, 'iterations between progress lines'),
    ('check', _int, 100, 'realizations drawn to report the observation match, 0 disables'),
]


SAMPLE_OPTIONS = [
    ('out', str, 'samples', 'output directory for the PGM images'),
    ('g', str, None, 'the generator checkpoint'),
    ('i', str, None, 'an inference checkpoint for conditional samples'),
    ('count', _int, 30, 'the number of images'),
    ('geod', str, None, 'also write all images to this GEOD file'),
]


ASSESS_OPTIONS = [
    ('out', str, 'assessment', 'output directory for the reports'),
    ('sets', _named_paths, None, 'realization sets as name=file.geod,name=file.geod'),
    ('reference', str, None, 'GEOD file whose first image is the reference [default: built-in]'),
    ('data', str, None, 'the training set (GEOD), used for memorization and score histograms'),
    ('d', str, None, 'a standard-mode discriminator checkpoint for score histograms'),
    ('patches', _int, 0, 'add a set of this many patches cut from the reference'),
    ('resolutions', _int_tuple, (1, 2, 4, 8), 'pooling factors'),
    ('window', _int, 4, 'pattern window size'),
    ('min_size', _int, 8, 'smallest connected component kept after binarization'),
    ('mds_iters', _int, 300, 'maximum SMACOF iterations'),
    ('mds_tol', float, 1e-3, 'SMACOF relative stress tolerance'),
    ('bins', _int, 20, 'bins of the score histograms'),
    ('blur_sigma', float, 1.0, 'blur before memorization distances'),
    ('memorization', _bool, True, 'run the memorization check when DATA is given'),
]


TOY_MIXTURE_OPTIONS = [
    ('out', str, 'toy', 'output directory for the sample and histogram files'),
    ('case', _choice('1d', '2d'), '1d', 'the built-in mixture'),
    ('points', _int, None, 'samples drawn after training [default: 1000 (1d), 4000 (2d)]'),
    ('iters', _int, 1000, 'number of updates'),
    ('batch_size', _int, 128, 'source vectors per batch'),
    ('k', _int, None, 'neighbor order [default: floor(sqrt(batch))]'),
    ('lr', float, 1e-3, 'learning rate'),
    ('hidden', _int, 128, 'width of the hidden layers'),
    ('depth', _int, 3, 'number of hidden layers'),
    ('use_entropy', _bool, True, 'include the entropy term'),
    ('bins', _int, 50, 'histogram bins (1d)'),
    ('log_every', _int, 100, 'iterations between progress lines'),
]


class RunConfig(object):
    """Settings of one command: defaults, then a config file, then flags"""

    def __init__(self, command, options):
        """
           Arguments:
            | ``command``  --  the subcommand name
            | ``options``  --  a list of (key, converter, default, help)
        """
        self.command = command
        self._converters = OrderedDict((key, convert) for key, convert, default, help in options)
        self.values = OrderedDict((key, default) for key, convert, default, help in options)

    def __getattr__(self, key):
        values = self.__dict__.get('values')
        if values is None or key not in values:
            raise AttributeError(key)
        return values[key]

    def set(self, key, text, where):
        """Convert and store one setting

           Arguments:
            | ``key``  --  the key, with dashes or underscores
            | ``text``  --  the unconverted value
            | ``where``  --  a description of the origin, used in errors
        """
        key = key.strip().replace('-', '_')
        if key not in self._converters:
            raise ConfigError('%s: unknown key %s for command %s.' % (where, key, self.command))
        try:
            self.values[key] = self._converters[key](text.strip())
        except ValueError as e:
            raise ConfigError('%s: invalid value %r for %s: %s.' % (where, text.strip(), key, e))

    def load(self, filename):
        """Read ``key = value`` lines; ``#`` starts a comment"""
        with open(filename) as f:
            for lineno, line in enumerate(f, 1):
                line = line.split('#', 1)[0].strip()
                if len(line) == 0:
                    continue
                key, sep, text = line.partition('=')
                if sep == '':
                    raise ConfigError('%s:%i: expecting key = value.' % (filename, lineno))
                self.set(key, text, '%s:%i' % (filename, lineno))

    def require(self, key):
        value = self.values[key]
        if value is None:
            raise ConfigError('The setting %s is required for command %s.' % (key, self.command))
        return value

    @classmethod
    def from_args(cls, args):
        """Build the configuration of the parsed command line ``args``"""
        config = cls(args.command, COMMON_OPTIONS + COMMANDS[args.command][1])
        if args.config is not None:
            config.load(args.config)
        for key in config.values:
            text = getattr(args, key, None)
            if text is not None:
                config.set(key, text, '--%s' % key.replace('_', '-'))
        return config


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _out_dir(config):
    out = config.require('out')
    os.makedirs(out, exist_ok=True)
    return out


def _sibling(filename, suffix):
    root, ext = os.path.splitext(filename)
    return root + suffix


def _load_net(filename, cls, what):
    net = load_network(filename)
    if not isinstance(net, cls):
        raise ConfigError('%s does not contain a %s network.' % (filename, what))
    return net


def _library_config(cls, **kwargs):
    try:
        return cls(**kwargs)
    except (ShapeError, DomainError):
        raise
    except ValueError as e:
        raise ConfigError(str(e))


def cmd_gen_data(config):
    """Write a synthetic channel training set and a reference image"""
    params = _library_config(
        ChannelParams, min_channels=config.min_channels, max_channels=config.max_channels,
        min_thickness=config.min_thickness, max_thickness=config.max_thickness,
        persistence=config.persistence)
    if config.n < 1:
        raise ConfigError('The number of images must be positive, got %i.' % config.n)
    out = config.require('out')
    dataset = synth_channels(config.n, config.size, config.size, config.seed, params)
    save_dataset(dataset, out)
    reference = reference_image(config.reference_size, config.reference_seed)
    reference_fn = config.reference or _sibling(out, '.ref.geod')
    dump_geod(reference_fn, reference[None])
    write_pgm(reference, _sibling(reference_fn, '.pgm'))
    if log.do_low:
        with log.section('DATA'):
            log('Images:           &%i' % dataset.count)
            log('Dimensions:       &%i×%i' % dataset.shape)
            log('Channel fraction: &%.5f' % dataset.channel_fraction)
            log('Reference:        &%s (%i×%i)' % ((reference_fn,) + reference.shape))


def cmd_train_gan(config):
    """Train a generator and discriminator on a GEOD training set"""
    dataset = load_dataset(config.require('data'))
    height, width = dataset.shape
    if height != width:
        raise ShapeError('Training images must be square, got %i×%i.' % (height, width))
    gan_config = _library_config(
        GanConfig, mode=config.mode, batch_size=config.batch_size,
        n_critic=config.n_critic, clip=config.clip, lr=config.lr,
        max_iters=config.iters, seed=config.seed, nz=config.nz, ngf=config.ngf,
        ndf=config.ndf, size=height, optimizer=config.optimizer,
        beta1=config.beta1, log_every=config.log_every,
        checkpoint_every=config.checkpoint_every)
    out = _out_dir(config)

    def save(iteration, generator, discriminator):
        dump_network(os.path.join(out, 'generator.nnck'), generator)
        dump_network(os.path.join(out, 'discriminator.nnck'), discriminator)
        if log.do_medium:
            with log.section('GAN'):
                log('Checkpoint written after iteration %i.' % iteration)

    generator, discriminator, trace = train_gan(dataset, gan_config, save)
    save(len(trace), generator, discriminator)
    dump_loss_trace(os.path.join(out, 'loss.csv'), trace)


def cmd_train_inference(config):
    """Train an inference network for one set of observations"""
    generator = _load_net(config.require('g'), GeneratorNet, 'generator')
    observations = load_observations(config.require('obs'), (generator.size, generator.size))
    spec = _library_config(PosteriorSpec, generator=generator, observations=observations, lam=config.lam)
    sampler_config = _library_config(
        SamplerConfig, batch_size=config.batch_size, k=config.k, lr=config.lr,
        max_iters=config.iters, seed=config.seed, nw=config.nw, nz=generator.nz,
        hidden=config.hidden, depth=config.depth, use_entropy=config.use_entropy,
        window=config.window, rel_tol=config.rel_tol, log_every=config.log_every)
    out = _out_dir(config)
    inference, trace = train_sampler(spec, sampler_config)
    dump_network(os.path.join(out, 'inference.nnck'), inference)
    dump_sampler_trace(os.path.join(out, 'trace.csv'), trace)
    if config.check > 0:
        check_seed = RandomStreams(config.seed).child_seed('check')
        images = sample_conditional(generator, inference, config.check, check_seed)
        match = observation_match(images, observations)
        if log.do_low:
            with log.section('OBS'):
                log('Observations:              &%i' % len(observations))
                log('Mean fraction honored:     &%.4f' % match.mean())
                log('Realizations >= 90%% match: &%.4f' % (match >= 0.9).mean())


def cmd_sample(config):
    """Write generated images, through an inference network when given"""
    generator = _load_net(config.require('g'), GeneratorNet, 'generator')
    if config.count < 0:
        raise ConfigError('The count can not be negative, got %i.' % config.count)
    if config.i is None:
        images = sample_unconditional(generator, config.count, config.seed)
    else:
        inference = _load_net(config.i, InferenceNet, 'inference')
        if inference.nz != generator.nz:
            raise ConfigError('The inference network produces %i latent values, the generator takes %i.' % (
                inference.nz, generator.nz))
        images = sample_conditional(generator, inference, config.count, config.seed)
    out = _out_dir(config)
    for index, image in enumerate(images):
        write_pgm(image, os.path.join(out, 'sample_%04i.pgm' % index))
    if config.geod is not None:
        dump_geod(config.geod, images[:, 0])
    if log.do_low:
        with log.section('SAMPLE'):
            log('Wrote %i images to %s.' % (len(images), out))


def _embedding_histograms(sets, window, min_size):
    labels = []
    histograms = []
    for name, images in sets.items():
        for index, image in enumerate(images):
            labels.append((name, index))
            histograms.append(pattern_histogram(binarize_clean(image, min_size), window))
    return labels, histograms


def cmd_assess(config):
    """Compare realization sets with a reference image and a training set"""
    sets = OrderedDict((name, load_geod(fn)) for name, fn in config.require('sets').items())
    if config.reference is None:
        reference = reference_image()
    else:
        reference = load_geod(config.reference, slice(1))[0]
    shape = next(iter(sets.values())).shape[1:]
    if config.patches > 0:
        if 'patches' in sets:
            raise ConfigError('The set name patches is reserved for --patches.')
        sets['patches'] = sample_patches(reference, config.patches, shape[0], shape[1], config.seed).images
    out = _out_dir(config)

    report = anodi_scores(sets, reference, config.resolutions, config.window, config.min_size)
    dump_anodi(os.path.join(out, 'anodi.csv'), report)

    labels, histograms = _embedding_histograms(sets, config.window, config.min_size)
    embedding = smacof_mds(js_distance_matrix(histograms), 2, config.mds_iters, config.mds_tol, config.seed)
    dump_embedding(os.path.join(out, 'embedding.csv'), labels, embedding)

    dataset = None if config.data is None else load_dataset(config.data)
    if config.d is not None:
        discriminator = _load_net(config.d, DiscriminatorNet, 'discriminator')
        base = None
        if dataset is not None:
            base = discriminator_histogram(discriminator, dataset.images, config.bins)
            dump_histogram(os.path.join(out, 'dhist_training.csv'), base)
        summary = []
        for name, images in sets.items():
            histogram = discriminator_histogram(discriminator, images, config.bins, base)
            dump_histogram(os.path.join(out, 'dhist_%s.csv' % name), histogram)
            summary.append((name, histogram.mean, histogram.var, '' if base is None else histogram.js))
        dump_csv(os.path.join(out, 'dhist_summary.csv'), ['set', 'mean', 'var', 'js'], summary)

    if dataset is not None and config.memorization:
        for name, images in sets.items():
            if name == 'patches':
                continue
            memo = memorization_check(images, dataset, config.blur_sigma)
            dump_memorization(os.path.join(out, 'memorization_%s.csv' % name), memo)

    if log.do_low:
        with log.section('ASSESS'):
            log.table('Set            Res  Inconsistency  Diversity', [
                (method, '1' if factor == 1 else '1/%i' % factor, inc, div)
                for method, factor, inc, div in report.rows
            ], ['%-14s', '%4s', '%13.5f', '%10.5f'])
            log('MDS stress:&%.5e after %i iterations' % (embedding.stress, embedding.iterations))


def cmd_toy_mixture(config):
    """Train a small sampler on a built-in Gaussian mixture"""
    if config.case == '1d':
        gm = GaussianMixture.three_component_1d()
    else:
        gm = GaussianMixture.three_component_2d()
    points = config.points
    if points is None:
        points = 1000 if gm.dim == 1 else 4000
    if points < 1:
        raise ConfigError('At least one point must be drawn, got %i.' % points)
    sampler_config = _library_config(
        SamplerConfig, batch_size=config.batch_size, k=config.k, lr=config.lr,
        max_iters=config.iters, seed=config.seed, nw=gm.dim, nz=gm.dim,
        hidden=config.hidden, depth=config.depth, use_entropy=config.use_entropy,
        window=0, log_every=config.log_every)
    inference, trace = train_sampler(lambda x: -mixture_log_density(x, gm), sampler_config)
    rng = RandomStreams(config.seed).generator('points')
    samples = inference.predict(rng.standard_normal((points, gm.dim))).astype(float)
    out = _out_dir(config)
    dump_points(os.path.join(out, 'samples.csv'), samples)
    dump_sampler_trace(os.path.join(out, 'trace.csv'), trace)
    if gm.dim == 1:
        sigmas = np.sqrt(gm.covariances[:, 0, 0])
        lo = (gm.means[:, 0] - 4*sigmas).min()
        hi = (gm.means[:, 0] + 4*sigmas).max()
        edges = np.linspace(lo, hi, config.bins + 1)
        counts = np.histogram(samples.ravel(), edges)[0]
        js = histogram_js(samples, gm, config.bins, (lo, hi))
        dump_csv(os.path.join(out, 'histogram.csv'), ['bin_lo', 'bin_hi', 'count'],
                 list(zip(edges[:-1], edges[1:], counts)))
    else:
        fractions = assignment_fractions(samples, gm)
        js = histogram_js(samples, gm)
        dump_csv(os.path.join(out, 'histogram.csv'), ['component', 'fraction', 'weight'],
                 list(zip(range(gm.size), fractions, gm.weights)))
    dump_csv(os.path.join(out, 'score.csv'), ['case', 'points', 'js'], [(config.case, points, js)])
    if log.do_low:
        with log.section('TOY'):
            log('JS divergence with the mixture:&%.5f' % js)


COMMANDS = OrderedDict([
    ('gen-data', (cmd_gen_data, GEN_DATA_OPTIONS)),
    ('train-gan', (cmd_train_gan, TRAIN_GAN_OPTIONS)),
    ('train-inference', (cmd_train_inference, TRAIN_INFERENCE_OPTIONS)),
    ('sample', (cmd_sample, SAMPLE_OPTIONS)),
    ('assess', (cmd_assess, ASSESS_OPTIONS)),
    ('toy-mixture', (cmd_toy_mixture, TOY_MIXTURE_OPTIONS)),
])


LOG_LEVELS = ['silent', 'warning', 'low', 'medium', 'high', 'debug']


def build_parser():
    parser = _Parser(prog='faciesgen', description=__doc__.split('\n')[0], allow_abbrev=False)
    parser.add_argument('--log-level', choices=LOG_LEVELS, default=None,
                        help='screen output verbosity [default=medium]')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    for name, (function, options) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=function.__doc__, allow_abbrev=False)
        sub.add_argument('--config', default=None, help='a file with key = value lines')
        for key, convert, default, help in COMMON_OPTIONS + options:
            if default is not None:
                help = '%s [default=%s]' % (help, default)
            sub.add_argument('--%s' % key.replace('_', '-'), dest=key, default=None, help=help)
    return parser


def _fail(error, code):
    message = ' '.join(str(error).split())
    print('faciesgen: error: %s' % message, file=sys.stderr)
    return code


def main(argv=None):
    """Run one subcommand and return the exit code"""
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError('No command given. Choose from: %s.' % ', '.join(COMMANDS))
        if args.log_level is not None:
            log.set_level(LOG_LEVELS.index(args.log_level))
        config = RunConfig.from_args(args)
        with timer.section(args.command):
            COMMANDS[args.command][0](config)
    except (ConfigError, UsageError, ShapeError) as e:
        return _fail(e, 2)
    except (FileFormatError, TrainingError, DomainError, OSError) as e:
        return _fail(e, 1)
    log.print_footer()
    return 0
