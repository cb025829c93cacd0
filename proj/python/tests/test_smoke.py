import math
import pathlib

import pytest

import qconv

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def test_ansatz_sizes():
    fq = qconv.build_ansatz("fqconv", 2, 2, 3, 4)
    assert fq.num_qubits == 12
    assert fq.num_data_angles == 12
    hq = qconv.build_ansatz("hqconv", 2, 2, 3, 1)
    assert hq.num_qubits == 12


def test_zero_data_zero_params_is_plus_one():
    c = qconv.build_ansatz("fqconv", 2, 2, 1, 1)
    value = qconv.expectation(c, [0.0] * c.num_params, [0.0] * c.num_data_angles)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_zero_params_give_mean_data_cosine():
    # With every trainable exponent at zero the controlled gates are identities.
    c = qconv.build_ansatz("fqconv", 2, 1, 1, 1)
    for x, y in ((0.0, 0.5), (0.25, 0.75), (1.0, 0.1)):
        angles = qconv.encode_window([x, y], 2, 1, 1)
        value = qconv.expectation(c, [0.0] * c.num_params, angles)
        expected = 0.5 * (math.cos(math.pi * x) + math.cos(math.pi * y))
        assert value == pytest.approx(expected, abs=1e-12)


def test_shift_rule_matches_finite_differences():
    c = qconv.build_ansatz("hqconv", 2, 2, 2, 1)
    params = [0.1 * (i % 7) - 0.3 for i in range(c.num_params)]
    data = [0.05 * i for i in range(c.num_data_angles)]
    exact = qconv.shift_rule_gradient(c, params, data)
    approx = qconv.finite_difference_gradient(c, params, data, 1e-5)
    for a, b in zip(exact, approx):
        assert a == pytest.approx(b, abs=1e-7)


def test_noise_level_zero_is_noiseless():
    c = qconv.build_ansatz("fqconv", 2, 2, 1, 1)
    params = [0.2] * c.num_params
    data = [0.3, 0.1, 0.7, 0.9]
    assert qconv.noisy_expectation(c, params, data, 0.0) == qconv.expectation(c, params, data)


def test_bad_stride_raises():
    with pytest.raises(qconv.QconvError):
        qconv.build_ansatz("hqconv", 2, 2, 3, 12)


def test_smoothness_of_cubic_is_zero():
    curve = [1.0 - 0.1 * t + 0.002 * t * t for t in range(30)]
    avg, std = qconv.smoothness_stats(curve)
    assert avg < 1e-9 and std < 1e-9


def test_confusion_rows():
    cm = qconv.confusion_matrix([1, 1, 0], [1, 0, 0], 3)
    assert cm == [[1, 1, 0], [0, 1, 0], [0, 0, 0]]


def test_train_from_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        "{"
        f'"dataset": "cifar10_small", "cifar_batches": ["{FIXTURES / "synthetic_cifar.bin"}"],'
        '"samples": 12, "eval_samples": 8, "resolution": 4, "epochs": 1, "batch_size": 4,'
        '"filters": 2, "hidden": 4, "classes": 4, "eval_trajectories": 1,'
        f'"output_dir": "{tmp_path / "run"}"'
        "}"
    )
    epochs = qconv.train_from_config(cfg)
    assert len(epochs) == 1
    assert 0.0 <= epochs[0]["train_accuracy"] <= 1.0
    assert (tmp_path / "run" / "checkpoint.bin").exists()
