import math

import numpy as np
import pytest

import pressgap as pg
from pressgap.errors import ConvergenceError, ValidationError
from pressgap.orbits import FullCollection
from pressgap.pressure import pressure_at_scale
from pressgap.transfer import (apply_operator, build_operator,
                               check_equilibrium, leading_eigen)


def test_operator_action_examples(doubling_map):
    op = build_operator(doubling_map, pg.zero_potential(), 256)
    ones = np.ones(256)
    assert np.allclose(apply_operator(op, ones), 2.0)
    op_c = build_operator(doubling_map, pg.constant_potential(0.4), 256)
    assert np.allclose(apply_operator(op_c, ones), 2.0 * math.exp(0.4))
    op_g = build_operator(doubling_map, pg.constant_potential(-math.log(2.0)), 256)
    assert np.allclose(apply_operator(op_g, ones), 1.0)


def test_grid_size_validation(doubling_map):
    with pytest.raises(ValidationError):
        build_operator(doubling_map, pg.zero_potential(), 8)


def test_doubling_leading_eigen(doubling_map):
    op = build_operator(doubling_map, pg.zero_potential(), 1024)
    eigen = leading_eigen(op)
    assert eigen.lam == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(eigen.eigenfunction, 1.0)
    assert np.allclose(eigen.eigenmeasure, 1.0 / 1024)
    assert eigen.residual < 1e-10


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_constant_weight_family(doubling_map, t):
    phi = pg.constant_potential(-t * math.log(2.0))
    op = build_operator(doubling_map, phi, 1024)
    eigen = leading_eigen(op)
    assert abs(eigen.lam - 2.0 ** (1.0 - t)) < 1e-10


def test_lambda_scaling_under_constant_shift(perturbed_map):
    phi = pg.geometric_potential(perturbed_map, 0.5)
    shifted = pg.Potential(lambda x: phi(x) + 0.3, phi.holder_constant,
                           phi.holder_exponent)
    lam0 = leading_eigen(build_operator(perturbed_map, phi, 512)).lam
    lam1 = leading_eigen(build_operator(perturbed_map, shifted, 512)).lam
    assert lam1 == pytest.approx(math.exp(0.3) * lam0, rel=1e-9)


def test_positivity_and_convergence_error(perturbed_map):
    op = build_operator(perturbed_map, pg.geometric_potential(perturbed_map, 1.0), 256)
    eigen = leading_eigen(op)
    assert np.all(eigen.eigenfunction > 0.0)
    assert np.all(eigen.eigenmeasure >= 0.0)
    with pytest.raises(ConvergenceError):
        leading_eigen(op, tol=1e-15, max_iters=2)


def test_grid_refinement_shrinks(perturbed_map):
    phi = pg.geometric_potential(perturbed_map, 0.7)
    lams = [leading_eigen(build_operator(perturbed_map, phi, 2**k)).lam
            for k in (8, 9, 10, 11, 12)]
    diffs = [abs(b - a) for a, b in zip(lams, lams[1:])]
    assert all(d2 <= d1 for d1, d2 in zip(diffs, diffs[1:]))


def test_equilibrium_invariance(doubling_map):
    op = build_operator(doubling_map, pg.zero_potential(), 4096)
    eigen = leading_eigen(op)
    rep = check_equilibrium(
        op, eigen,
        [lambda x: np.sin(2 * np.pi * x), lambda x: np.full_like(x, 3.0)],
        pressure_rate=math.log(2.0))
    assert rep.invariance_defect < 1e-6
    assert rep.pressure_match < 1e-12


def test_constant_test_function_zero_defect(doubling_map):
    op = build_operator(doubling_map, pg.zero_potential(), 512)
    eigen = leading_eigen(op)
    rep = check_equilibrium(op, eigen, [lambda x: np.full_like(x, 1.0)])
    assert rep.invariance_defect == 0.0


def test_mp_pressure_cross_check(mp_map):
    op = build_operator(mp_map, pg.zero_potential(), 2048)
    eigen = leading_eigen(op)
    est = pressure_at_scale(mp_map, pg.zero_potential(), FullCollection(),
                            1.0 / 32.0, 10)
    assert abs(eigen.log_lam - est.rate) <= 0.1
