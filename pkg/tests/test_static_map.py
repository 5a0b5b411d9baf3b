import numpy as np
import pytest

from wave_esc import MapParams, ValidationError, eval_map

REF = MapParams.create(hessian=-2.0, optimizer=2.0, optimum=5.0)


def test_reference_values():
    assert eval_map(REF, 2.0) == 5.0
    assert eval_map(REF, 3.0) == 4.0   # direct substitution
    assert eval_map(REF, 1.0) == 4.0   # symmetry about the optimizer


def test_symmetry_about_optimizer():
    rng = np.random.default_rng(1)
    for d in rng.uniform(-10, 10, 50):
        left, right = eval_map(REF, 2.0 - d), eval_map(REF, 2.0 + d)
        assert abs(left - right) <= 1e-12 * max(1.0, abs(left))


def test_strict_maximum():
    rng = np.random.default_rng(2)
    for x in rng.uniform(-5, 9, 50):
        if x != 2.0:
            assert eval_map(REF, x) < 5.0


def test_finite_difference_curvature():
    h = 1e-3
    for x in (-1.0, 0.5, 2.0, 7.3):
        second = (eval_map(REF, x + h) - 2 * eval_map(REF, x) + eval_map(REF, x - h)) / h**2
        assert abs(second - (-2.0)) <= 1e-6


def test_minimization_flip_recorded():
    flipped = MapParams.create(hessian=2.0, optimizer=1.0, optimum=3.0)
    assert flipped.flipped_for_minimization
    assert flipped.hessian == -2.0
    # negated objective: optimum output flips sign, optimizer location does not
    assert flipped.optimum == -3.0
    assert eval_map(flipped, 1.0) == -3.0
    assert not REF.flipped_for_minimization


def test_zero_curvature_rejected():
    with pytest.raises(ValidationError):
        MapParams.create(hessian=0.0, optimizer=0.0, optimum=0.0)


def test_evaluator_is_opaque():
    handle = REF.evaluator()
    assert handle(3.0) == 4.0
    for attr in ("hessian", "optimizer", "optimum"):
        assert not hasattr(handle, attr)


def test_params_immutable():
    with pytest.raises(Exception):
        REF.hessian = -1.0  # type: ignore[misc]
