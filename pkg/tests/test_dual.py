import numpy as np

from asvplan import dual
from asvplan.dual import Dual


def _fd(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_elementary_derivatives():
    x0 = np.array([0.3, 1.1, 2.5])
    (x,) = Dual.seed(x0[:, None])
    cases = [
        (lambda a: dual.sin(a) * dual.cos(a), lambda a: np.sin(a) * np.cos(a)),
        (lambda a: dual.exp(-a * a) / (1.0 + a), lambda a: np.exp(-a * a) / (1.0 + a)),
        (lambda a: dual.log(a) + dual.sqrt(a), lambda a: np.log(a) + np.sqrt(a)),
        (lambda a: 2.0 / a - a**3, lambda a: 2.0 / a - a**3),
        (lambda a: 1.0 - a, lambda a: 1.0 - a),
    ]
    for fd_, fn in cases:
        d = fd_(x)
        np.testing.assert_allclose(d.val, fn(x0), rtol=1e-14)
        np.testing.assert_allclose(d.der[:, 0], _fd(fn, x0), rtol=1e-7)


def test_seed_multiple_directions():
    a, b = Dual.seed(np.array([[2.0, 3.0]]))
    f = a * b + dual.sin(b)
    np.testing.assert_allclose(f.der[0], [3.0, 2.0 + np.cos(3.0)])


def test_plain_inputs_pass_through():
    assert dual.sin(0.5) == np.sin(0.5)
    assert np.array_equal(dual.tangent(1.0, 3), np.zeros(3))
    assert dual.value(2.0) == 2.0


def test_abs_derivative_at_zero():
    (x,) = Dual.seed(np.array([[0.0]]))
    y = dual.absolute(x) * x
    assert y.der[0, 0] == 0.0
