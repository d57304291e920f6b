import os
import json

import pytest

import ael
from ael.cli import main, build_parser


def test_version(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(['--version'])
    assert exit_info.value.code == 0
    assert ael.__version__ in capsys.readouterr().out


def test_synthdata_generate(tmp_path):
    out = str(tmp_path / 'data')
    code = main(['synthdata', 'generate', '--out', out, '--count', '10',
                 '--seed', '1', '--num-classes', '3', '--image-size', '16', '16'])
    assert code == 0
    with open(os.path.join(out, 'dataset.json')) as f:
        info = json.load(f)
    assert info['scene_config']['num_classes'] == 3
    assert info['scene_config']['image_size'] == [16, 16]


def test_train_evaluate_report(scene_dataset, tmp_path, capsys):
    out = str(tmp_path / 'run')
    code = main([
        'train', '--out', out, '--set', f'data.root={scene_dataset}',
        '--set', 'data.protocol=4', '--set', 'max_iter=2',
        '--set', 'batch.labeled=1', '--set', 'batch.unlabeled=1',
    ])
    assert code == 0
    assert 'PER-CLASS IOU' in capsys.readouterr().out

    checkpoint = os.path.join(out, 'checkpoints', 'latest.ckpt.pth')
    assert main(['evaluate', '--checkpoint', checkpoint, '--split', 'train',
                 '--out', out]) == 0
    with open(os.path.join(out, 'evaluation.json')) as f:
        assert json.load(f)['split'] == 'train'

    assert main(['report', out]) == 0
    assert 'mIoU' in capsys.readouterr().out


def test_errors_exit_with_one(tmp_path, caplog):
    assert main(['train', '--out', str(tmp_path / 'run')]) == 1
    assert 'data.root is not set' in caplog.text

    assert main(['train', '--set', 'nope=1', '--out', str(tmp_path)]) == 1
    assert main(['evaluate', '--checkpoint', str(tmp_path / 'x.pth')]) == 1
    assert main(['report', str(tmp_path / 'missing')]) == 1
    assert main(['train', '--config', str(tmp_path / 'missing.cfg')]) == 1
    assert main(['ablate', '--grid', '12', '--out', str(tmp_path / 'a'),
                 '--set', 'data.root=x']) == 1


def test_parser():
    parser = build_parser()
    args = parser.parse_args(['ablate', '--seeds', '0,1', '--workers', '2'])
    assert args.grid == 'table4'
    assert parser.parse_args(['ablate', '--grid', 'components']).grid == 'components'
    assert args.workers == 2
    with pytest.raises(SystemExit):
        parser.parse_args(['evaluate', '--checkpoint', 'x', '--split', 'test'])
