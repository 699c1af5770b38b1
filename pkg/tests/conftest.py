import numpy as np
import pytest
from loguru import logger
from sympy import primerange

from quadsym.modsym import build_space, rational_eigenforms
from quadsym.periods import extend_coefficients

# 11a 的 q 展开长度
M_ORACLE = 3000


def point_count_ap(p: int) -> int:
    """y^2 + y = x^3 - x^2 - 10x - 20：a_p = p - 仿射点数"""
    x = np.arange(p, dtype=np.int64)
    rhs = (x ** 3 - x ** 2 - 10 * x - 20) % p
    lhs = (x * x + x) % p
    counts = np.bincount(lhs, minlength=p)
    return int(p - counts[rhs].sum())


@pytest.fixture(scope='session')
def oracle11():
    return {p: point_count_ap(p) for p in primerange(2, M_ORACLE + 1)}


@pytest.fixture(scope='session')
def space11():
    return build_space(11)


@pytest.fixture(scope='session')
def system11(space11):
    return rational_eigenforms(space11)[0]


@pytest.fixture(scope='session')
def qexp11(oracle11):
    return extend_coefficients(oracle11, 11, M_ORACLE)


@pytest.fixture
def log_messages():
    """收集loguru消息"""
    messages = []
    handler = logger.add(lambda m: messages.append(m.record), level='DEBUG')
    yield messages
    logger.remove(handler)
