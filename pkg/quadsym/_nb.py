import math

import numpy as np
from numba import jit, prange


@jit(nopython=True, nogil=True, fastmath=True, cache=True)
def _qseries(coef, m, x, y):
    """f(z) = Σ_{n<=m} a_n q^n, q = e^{2πiz}"""
    r = math.exp(-2.0 * math.pi * y)
    t = 2.0 * math.pi * x
    q = r * math.cos(t) + 1j * r * math.sin(t)
    qn = 1.0 + 0.0j
    acc = 0.0 + 0.0j
    for n in range(1, m + 1):
        qn = qn * q
        acc += coef[n] * qn
    return acc


@jit(nopython=True, nogil=True, fastmath=True, cache=True)
def _qseries_antiderivative(coef, m, x, y):
    """F(z) = Σ_{n<=m} a_n/(2πin) q^n，F' = f"""
    r = math.exp(-2.0 * math.pi * y)
    t = 2.0 * math.pi * x
    q = r * math.cos(t) + 1j * r * math.sin(t)
    qn = 1.0 + 0.0j
    acc = 0.0 + 0.0j
    for n in range(1, m + 1):
        qn = qn * q
        acc += coef[n] / n * qn
    return acc / (2j * math.pi)


@jit(nopython=True, nogil=True, fastmath=True, cache=True, parallel=True)
def _qseries_antiderivative_many(coef, m, xs, ys):
    """批量求F(z)。各点截断长度相同"""
    out = np.empty(len(xs), dtype=np.complex128)
    for i in prange(len(xs)):
        out[i] = _qseries_antiderivative(coef, m, xs[i], ys[i])
    return out
