# edgebench/cli.py

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from edgebench.canny import DEFAULT_SIGMA, DEFAULT_THRESHOLDS, ThresholdPair, canny
from edgebench import cmreform, metrics
from edgebench.dataset import SWED_EXCLUDED, load_dataset, load_exclusions, load_oracle, write_corpus
from edgebench.exceptions import EdgeBenchError, ThresholdSpecError
from edgebench.harness import SELECTIONS, SweepConfig, SweepReport, run_sweep, verify_record_identities, write_reports
from edgebench.raster import GrayImage, load_mask, load_pgm, normalize_to_255, save_pgm
from edgebench.synth import SceneSpec, gen_corpus
from edgebench.threshold_parser import format_thresholds, parse_thresholds
from edgebench.utils import DEFAULT_CONFIG_PATH, load_config, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2

CONFIG_SECTION = 'edgebench'
DEFAULT_CORPUS_SIZE = 40


class UsageError(Exception):
    pass


def _setting(args, name, cast, default, key=None):
    """CLI flag, then the [edgebench] config entry, then the default."""
    value = getattr(args, name, None)
    if value is None:
        raw = load_config(CONFIG_SECTION, key or name, fallback='', config_path=args.config)
        if raw == '':
            return default
        value = raw
    try:
        return cast(value)
    except (TypeError, ValueError) as e:
        raise UsageError(f"Invalid {key or name}: {value!r} ({e})")


def _thresholds(args):
    text = getattr(args, 'thresholds', None)
    if text is None:
        text = load_config(CONFIG_SECTION, 'thresholds', fallback='', config_path=args.config)
    if text == '':
        return DEFAULT_THRESHOLDS
    try:
        return tuple(parse_thresholds(text))
    except ThresholdSpecError as e:
        raise UsageError(f"Invalid --thresholds {text!r}: {e}")


def _bands(text):
    if text is None or text.strip().lower() == 'all':
        return None
    if text.strip().lower() == 'single':
        return 'single'
    return [name for name in text.split(',') if name.strip()]


def _format(value, perfect=False):
    if perfect and metrics.is_perfect(value):
        return 'Perfect'
    if isinstance(value, float) and math.isnan(value):
        return 'nan'
    return f"{value:.6g}"


def _prepare_synth(args):
    count = args.count if args.count is not None else DEFAULT_CORPUS_SIZE
    if count < 1:
        raise UsageError(f"--count must be at least 1, got {count}")
    seed = _setting(args, 'seed', int, 0)
    try:
        spec = SceneSpec(width=args.size, height=args.size, seed=seed)
    except ValueError as e:
        raise UsageError(str(e))
    return {'count': count, 'spec': spec}


def _run_synth(args, options):
    scenes = gen_corpus(options['count'], options['spec'])
    index = write_corpus(scenes, args.out_dir)
    print(f"Wrote {len(scenes)} scenes to {args.out_dir} (index {index})")


def _prepare_canny(args):
    try:
        pair = ThresholdPair(args.low, args.high)
    except ValueError as e:
        raise UsageError(str(e))
    sigma = _setting(args, 'sigma', float, DEFAULT_SIGMA)
    if not sigma > 0:
        raise UsageError(f"--sigma must be positive, got {sigma}")
    return {'pair': pair, 'sigma': sigma}


def _run_canny(args, options):
    image = load_pgm(args.image)
    if not args.no_normalize:
        image = normalize_to_255(image)
    edges = canny(image, options['pair'], options['sigma'])
    save_pgm(GrayImage.from_array(edges.bits.astype(np.int64) * 255), args.out, maxval=255)
    print(f"{args.out}: {edges.count} edge pixels at {options['pair']}")


def _prepare_eval(args):
    alpha = _setting(args, 'fom_alpha', float, 1.0 / 9.0)
    try:
        return {'fom': metrics.FomParams(alpha)}
    except ValueError as e:
        raise UsageError(str(e))


def _run_eval(args, options):
    e = load_mask(args.detected)
    g = load_mask(args.truth)
    cc = metrics.confusion(e, g)
    try:
        ssim = metrics.ssim(e, g)
    except EdgeBenchError:
        ssim = math.nan
    values = [
        ('rmse', metrics.rmse(e, g)),
        ('psnr', metrics.psnr(e, g)),
        ('ssim', ssim),
        ('fom', metrics.fom(e, g, options['fom'])),
        ('tp', cc.tp), ('tn', cc.tn), ('fp', cc.fp), ('fn', cc.fn),
    ] + list(metrics.confusion_measures(cc).items())
    for name, value in values:
        print(f"{name}\t{_format(value, perfect=name == 'psnr')}")

    report = cmreform.verify_reformulations(e, g)
    for c in report.comparisons:
        perfect = c.metric == 'psnr'
        print(f"reformulation\t{c.metric}\t{_format(c.direct, perfect)}\t"
              f"{_format(c.from_counts, perfect)}\t{c.status}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        report.to_csv(os.path.join(args.out_dir, 'reformulation.csv'))
    if not report.passed:
        raise EdgeBenchError("Count-based reformulations disagree with the direct metrics")


def _prepare_sweep(args):
    sigma = _setting(args, 'sigma', float, DEFAULT_SIGMA)
    alpha = _setting(args, 'fom_alpha', float, 1.0 / 9.0)
    threads = _setting(args, 'threads', int, None)
    try:
        config = SweepConfig(threshold_pairs=_thresholds(args), sigma=sigma, bands=_bands(args.bands),
                             fom_alpha=alpha, threads=threads)
    except ValueError as e:
        raise UsageError(str(e))
    return {'config': config}


def _run_sweep(args, options):
    config = options['config']
    exclude = () if args.no_exclude else SWED_EXCLUDED
    dataset = load_dataset(args.dataset_dir, exclude=exclude)
    report = run_sweep(dataset, config)

    os.makedirs(args.out_dir, exist_ok=True)
    report.to_csv(os.path.join(args.out_dir, 'sweep.csv'))
    echo = config.to_dict()
    echo['thresholds'] = format_thresholds(config.threshold_pairs)
    echo['dataset'] = os.path.abspath(args.dataset_dir)
    echo['excluded'] = list(exclude)
    echo['manifest'] = report.manifest
    with open(os.path.join(args.out_dir, 'config.json'), 'w') as f:
        json.dump(echo, f, indent=2, sort_keys=True)
    print(f"Swept {len(report.manifest)} images into {len(report)} records in {args.out_dir}")


def _prepare_report(args):
    selection = _setting(args, 'selection', str, 'all')
    if selection not in SELECTIONS:
        raise UsageError(f"--selection must be one of {', '.join(SELECTIONS)}, got {selection!r}")
    return {'selection': selection}


def _run_report(args, options):
    report = SweepReport.from_csv(args.sweep_csv)
    violations = verify_record_identities(report)
    if not violations.empty:
        logger.warning("%d sweep records break the rmse/psnr count identities", len(violations))
    oracle = load_oracle(args.oracle) if args.oracle else None
    exclude = load_exclusions(args.exclude) if args.exclude else ()
    paths = write_reports(report, args.out_dir, oracle=oracle, selection=options['selection'], exclude=exclude)
    for path in paths:
        print(path)


def build_parser():
    parser = argparse.ArgumentParser(prog='edgebench',
                                     description='Canny threshold sweeps scored with edge-map metrics.')
    parser.add_argument('--config', default=DEFAULT_CONFIG_PATH, help='INI file with an [edgebench] section')
    parser.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
    commands = parser.add_subparsers(dest='command', required=True)

    synth = commands.add_parser('synth', help='generate a synthetic coastline corpus')
    synth.add_argument('--count', type=int, default=None)
    synth.add_argument('--seed', type=int, default=None)
    synth.add_argument('--size', type=int, default=128, help='scene width and height')
    synth.add_argument('--out-dir', required=True)
    synth.set_defaults(prepare=_prepare_synth, run=_run_synth)

    detect = commands.add_parser('canny', help='detect edges in one PGM image')
    detect.add_argument('image')
    detect.add_argument('out')
    detect.add_argument('--low', type=float, required=True)
    detect.add_argument('--high', type=float, required=True)
    detect.add_argument('--sigma', type=float, default=None)
    detect.add_argument('--no-normalize', action='store_true', help='skip the 0..255 rescale')
    detect.set_defaults(prepare=_prepare_canny, run=_run_canny)

    evaluate = commands.add_parser('eval', help='score a detected edge map against a ground truth map')
    evaluate.add_argument('detected')
    evaluate.add_argument('truth')
    evaluate.add_argument('--fom-alpha', type=float, default=None)
    evaluate.add_argument('--out-dir', default=None)
    evaluate.set_defaults(prepare=_prepare_eval, run=_run_eval)

    sweep = commands.add_parser('sweep', help='run every threshold pair over a dataset')
    sweep.add_argument('dataset_dir')
    sweep.add_argument('--out-dir', required=True)
    sweep.add_argument('--thresholds', default=None, help="e.g. '50:100,50:150'")
    sweep.add_argument('--sigma', type=float, default=None)
    sweep.add_argument('--fom-alpha', type=float, default=None)
    sweep.add_argument('--bands', default=None, help="'all', 'single' or a list such as 'B08,B04'")
    sweep.add_argument('--threads', type=int, default=None)
    sweep.add_argument('--no-exclude', action='store_true', help='keep the default excluded scenes')
    sweep.set_defaults(prepare=_prepare_sweep, run=_run_sweep)

    report = commands.add_parser('report', help='summarize a sweep.csv')
    report.add_argument('sweep_csv')
    report.add_argument('--out-dir', required=True)
    report.add_argument('--oracle', default=None, help='corpus.csv with the designed thresholds')
    report.add_argument('--selection', default=None, choices=list(SELECTIONS))
    report.add_argument('--exclude', default=None, help='file listing image ids to leave out of agreement')
    report.set_defaults(prepare=_prepare_report, run=_run_report)

    return parser


def cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    setup_logging(args.log_level)

    try:
        options = args.prepare(args)
    except (UsageError, ValueError) as e:
        parser.print_usage(sys.stderr)
        logger.error(str(e))
        return EXIT_USAGE

    try:
        args.run(args, options)
    except (EdgeBenchError, OSError, ValueError) as e:
        logger.error(str(e))
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(cli())


if __name__ == '__main__':
    main()
