"""
Command-line front end::

    ael synthdata generate --out data/synthetic --count 400 --seed 0
    ael train --set data.root=data/synthetic --out runs/ael
    ael train --config baseline.cfg --out runs/baseline --set ael.dr=false
    ael evaluate --checkpoint runs/ael/checkpoints/latest.ckpt.pth --split val
    ael ablate --config base.cfg --grid table4 --seeds 0,1,2 --out runs/ablation
    ael report runs/ablation

Any error raised by ael is logged and the process exits with status 1.
"""

import sys
import logging
import argparse

from . import __version__
from . import experiment
from .config import RunConfig, ConfigException
from .core.grids import GridException
from .datasets import DataSetException
from .datasets.partition import PartitionException
from .datasets.synthetic import SceneConfig, generate_dataset
from .datasets.transforms import TransformException
from .evaluation import EvaluationException, report_table, report_card
from .ml.confidence import ConfidenceBankException
from .ml.train.loss import LossException
from .ml.train.state import TrainException

ERRORS = (
    ConfigException, GridException, DataSetException, PartitionException,
    TransformException, EvaluationException, ConfidenceBankException,
    LossException, TrainException, OSError,
)

LOG_FORMAT = '%(asctime)s,%(msecs)d %(levelname)-8s [%(filename)s:%(lineno)d] %(message)s'
DATE_FORMAT = '%Y-%m-%d:%H:%M:%S'


def _load_config(args):
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    config.apply_overrides(args.set)
    if getattr(args, 'out', None):
        config['out'] = args.out
    return config


def _add_config_arguments(parser):
    parser.add_argument(
        '--config', type=str, default=None,
        help='Run configuration file (key = value lines).')
    parser.add_argument(
        '--set', action='append', default=[], metavar='KEY=VALUE',
        help='Override one configuration key. Repeatable.')
    parser.add_argument(
        '--out', type=str, default=None, help='Output folder.')


def cmd_train(args):
    config = _load_config(args)
    experiment.train(config, resume=args.resume)
    print(report_card(config['out']))


def cmd_evaluate(args):
    report = experiment.evaluate(
        args.checkpoint, split=args.split, data_root=args.data_root,
        out=args.out)
    print(report_table(report))


def cmd_ablate(args):
    config = _load_config(args)
    seeds = [int(s) for s in args.seeds.split(',') if s.strip()]
    experiment.ablate(config, grid=args.grid, seeds=seeds,
                      num_workers=args.workers)
    print(report_card(config['out']))


def cmd_report(args):
    print(report_card(args.path))


def cmd_synthdata_generate(args):
    height, width = args.image_size
    cfg = SceneConfig(
        num_classes=args.num_classes,
        image_size=(height, width),
        tail_exponent=args.tail_exponent,
    )
    generate_dataset(args.out, args.count, args.seed, cfg=cfg,
                     val_fraction=args.val_fraction, num_workers=args.workers)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='ael',
        description='Adaptive equalization learning for semi-supervised '
                    'segmentation on a synthetic long-tailed benchmark.')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument(
        '-v', '--verbose', action='store_true',
        help='Log at DEBUG level, including per-step component traces.')
    commands = parser.add_subparsers(dest='command', required=True)

    train = commands.add_parser('train', help='Train one run.')
    _add_config_arguments(train)
    train.add_argument(
        '--resume', action='store_true',
        help='Continue from OUT/checkpoints/latest.ckpt.pth.')
    train.set_defaults(func=cmd_train)

    evaluate = commands.add_parser('evaluate', help='Evaluate a checkpoint.')
    evaluate.add_argument('--checkpoint', type=str, required=True)
    evaluate.add_argument('--split', choices=['train', 'val'], default='val')
    evaluate.add_argument(
        '--data-root', type=str, default=None,
        help='Dataset folder; defaults to the one the run was trained on.')
    evaluate.add_argument(
        '--out', type=str, default=None,
        help='Folder to write evaluation.json to.')
    evaluate.set_defaults(func=cmd_evaluate)

    ablate = commands.add_parser('ablate', help='Run the component ablation.')
    _add_config_arguments(ablate)
    ablate.add_argument(
        '--grid', type=str, default='table4',
        help="'table4' (alias 'components'), 'baseline', 'all' or "
             "comma-separated rows of dr/aes/acm/acp flags such as '0000,1111'.")
    ablate.add_argument('--seeds', type=str, default='0,1,2')
    ablate.add_argument('--workers', type=int, default=1)
    ablate.set_defaults(func=cmd_ablate)

    report = commands.add_parser(
        'report', help='Print a run or ablation report card.')
    report.add_argument('path', type=str)
    report.set_defaults(func=cmd_report)

    synthdata = commands.add_parser('synthdata', help='Synthetic benchmark.')
    synthdata_commands = synthdata.add_subparsers(dest='action', required=True)
    generate = synthdata_commands.add_parser(
        'generate', help='Write a synthetic dataset with partitions.')
    generate.add_argument('--out', type=str, required=True)
    generate.add_argument('--count', type=int, required=True)
    generate.add_argument('--seed', type=int, default=0)
    generate.add_argument('--num-classes', type=int, default=6)
    generate.add_argument(
        '--image-size', type=int, nargs=2, default=[64, 64],
        metavar=('HEIGHT', 'WIDTH'))
    generate.add_argument('--tail-exponent', type=float, default=1.5)
    generate.add_argument('--val-fraction', type=float, default=0.2)
    generate.add_argument('--workers', type=int, default=1)
    generate.set_defaults(func=cmd_synthdata_generate)
    return parser


def main(argv=None):
    """
    Entry point of the ``ael`` console script.

    Returns:
        int: the exit status.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        format=LOG_FORMAT, datefmt=DATE_FORMAT,
        level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        args.func(args)
    except ERRORS as e:
        logging.error(str(e))
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
