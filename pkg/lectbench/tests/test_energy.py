import math

import pytest
import numpy as np

from .fixtures import *
from ..detection import IND, OOD, Detector, calibrate_tau, detect, energies, energy, energy_grad


def test_energy_uniform():
    assert energy([0.0, 0.0, 0.0, 0.0]) == pytest.approx(-math.log(4), abs=1e-12)
    assert energy([0.0, 0.0, 0.0, 0.0]) == pytest.approx(-1.386294, abs=1e-6)


def test_energy_single_class():
    for x in (-3.5, 0.0, 42.0):
        assert energy([x]) == pytest.approx(-x, abs=1e-12)


def test_energy_summation_oracle():
    expected = -(10.0 + math.log1p(2.0 * math.exp(-10.0)))
    assert energy([10.0, 0.0, 0.0]) == pytest.approx(expected, abs=1e-9)
    assert energy([10.0, 0.0, 0.0]) == pytest.approx(-10.0000908, abs=1e-7)


def test_energy_stable_for_large_logits():
    assert energy([1000.0, 1000.0]) == pytest.approx(-1000.0 - math.log(2))
    assert np.isfinite(energy([-1000.0, -1000.0]))


def test_energy_errors():
    with pytest.raises(ValueError):
        energy([])
    with pytest.raises(ValueError):
        energies(np.zeros((3, 0)))


def test_energies_rows():
    logits = np.array([[0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 3.0, 4.0]])
    values = energies(logits)
    assert values.shape == (2,)
    assert values[1] == pytest.approx(energy(logits[1]))


def test_energy_grad():
    logits = np.array([[0.5, -1.0, 2.0], [0.0, 0.0, 0.0]])
    grad = energy_grad(logits)
    assert np.allclose(grad.sum(axis=1), -1.0)
    step = 1e-6
    for c in range(3):
        shifted = logits.copy()
        shifted[:, c] += step
        numeric = (energies(shifted) - energies(logits)) / step
        assert np.allclose(numeric, grad[:, c], atol=1e-5)


def test_calibrate_tau():
    assert calibrate_tau([1, 2, 3, 4, 5], 0.95) == 5
    assert calibrate_tau([10, 9, 8, 7, 6, 5, 4, 3, 2, 1], 0.9) == 9
    assert calibrate_tau([2.5] * 7) == 2.5
    assert calibrate_tau([3.0, 1.0], 0.5) == 1.0
    assert calibrate_tau([3.0, 1.0], 1.0) == 3.0


def test_calibrate_tau_errors():
    with pytest.raises(ValueError):
        calibrate_tau([])
    with pytest.raises(ValueError):
        calibrate_tau([1.0], 0.0)
    with pytest.raises(ValueError):
        calibrate_tau([1.0], 1.5)


def test_detect_boundary():
    detector = Detector(-2.0)
    assert detect([-2.0], detector).tolist() == [IND]
    assert detect([-3.0, -2.0, -1.999], detector).tolist() == [IND, IND, OOD]
    assert detector.detect([0.0]).tolist() == [OOD]


def test_detect_limits():
    values = np.array([-1e300, -5.0, 0.0, 7.0, 1e300])
    assert np.all(detect(values, Detector(np.inf)) == IND)
    assert np.all(detect(values, Detector(-np.inf)) == OOD)


def test_calibrated_detector_accepts_target_fraction():
    values = np.arange(100, dtype=np.float64)
    detector = Detector.calibrated(values, 0.95)
    assert np.mean(detector.detect(values) == IND) >= 0.95
    assert detector.tau == 94.0
