import logging

import numpy as np
import pytest
import torch

from ael.core import constants
from ael.experiment import build_run
from ael.ml.train.closures import AELTrainClosure, ValidationClosure
from ael.ml.train import TrainException


def _flags(dr, aes, acm, acp):
    return {'ael.dr': dr, 'ael.aes': aes, 'ael.acm': acm, 'ael.acp': acp}


def test_step_output(small_config):
    run = build_run(small_config)
    output = run.closure.step()
    assert list(output)[:4] == ['loss', 'supervised_loss', 'unsupervised_loss', 'lr']
    assert np.isclose(output['loss'],
                      output['supervised_loss'] + output['unsupervised_loss'])
    assert output['lr'] == small_config['model.base_lr']
    assert run.state.step == 1
    for c in constants.AEL_COMPONENTS:
        assert output[f'fired/{c}'] == 1
    assert run.bank.observed.any()
    assert len(run.presence) > 0
    assert run.ledger.totals.sum() > 0


def test_flag_isolation(small_config, caplog):
    for index, component in enumerate(constants.AEL_COMPONENTS):
        flags = [False] * 4
        flags[index] = True
        run = build_run(small_config.copy().update(_flags(*flags)))
        with caplog.at_level(logging.DEBUG):
            caplog.clear()
            output = run.closure.step()
        fired = [c for c in constants.AEL_COMPONENTS if output[f'fired/{c}']]
        assert fired == [component]
        assert f'components fired: {component}' in caplog.text

    run = build_run(small_config.copy().update(_flags(False, False, False, False)))
    output = run.closure.step()
    assert not any(output[f'fired/{c}'] for c in constants.AEL_COMPONENTS)


def test_basic_framework_weights(small_config):
    run = build_run(small_config.copy().update(_flags(False, False, False, False)))
    snapshot = run.bank.snapshot()
    batch = run.closure.unlabeled_batch()
    views = run.closure.strong_views(batch, snapshot)
    preds = [run.state.student.predict(v.image) for v in views]
    weights = run.closure.pixel_weights(views, preds, snapshot)
    for view, w in zip(views, weights):
        assert np.array_equal(w.data, view.mask.valid.astype(float))
        assert view.category is None


def test_adaptive_views_keep_alignment(small_config):
    run = build_run(small_config)
    snapshot = run.bank.snapshot()
    batch = run.closure.unlabeled_batch()
    for view in run.closure.strong_views(batch, snapshot):
        assert view.category is not None
        assert view.probs is not None
        assert np.array_equal(
            np.argmax(view.probs.data, axis=-1)[view.mask.valid],
            view.mask.data[view.mask.valid])


def test_step_determinism(small_config):
    a = build_run(small_config)
    b = build_run(small_config)
    for _ in range(3):
        out_a = a.closure.step()
        out_b = b.closure.step()
        assert out_a == out_b
    assert torch.equal(a.state.student.weight, b.state.student.weight)
    assert torch.equal(a.state.teacher.weight, b.state.teacher.weight)
    assert np.array_equal(a.bank.values, b.bank.values)


def test_supervised_only(small_config):
    config = small_config.copy(loss__alpha=0.0, batch__unlabeled=0)
    run = build_run(config)
    output = run.closure.step()
    assert output['unsupervised_loss'] == 0.0
    assert output['loss'] == output['supervised_loss']
    assert run.ledger.totals.sum() == 0
    assert output['fired/acp'] == 1
    assert output['fired/dr'] == 0


def test_closure_state_dict(small_config):
    run = build_run(small_config)
    run.closure.step()
    state = run.closure.state_dict()
    expected = run.closure.rng.random()

    other = build_run(small_config)
    other.closure.load_state_dict(state)
    assert other.closure.rng.random() == expected
    assert other.closure.fire_counts == run.closure.fire_counts


def test_closure_needs_labeled_data(small_config):
    run = build_run(small_config)
    with pytest.raises(TrainException):
        AELTrainClosure(run.state, run.bank, run.presence, run.ledger, [], [],
                        None, None, {}, 1, 1, None)


def test_validation_closure(small_config):
    run = build_run(small_config)
    closure = ValidationClosure(run.state.student)
    for item in run.val_data:
        closure(None, item)
    expected = sum(int(item['mask'].valid.sum()) for item in run.val_data)
    assert closure.confusion.total == expected
    # the zero-weight model predicts class 0 everywhere
    assert closure.confusion.counts[:, 1:].sum() == 0
