import os
import re
from fractions import Fraction
from typing import Any, Dict, List, Sequence

import numpy as np
import polars as pl
from loguru import logger
from sympy.combinatorics import Permutation

from quadsym import _MAX_TERMS_, _MAX_TERMS_ENV_, _FLOAT_FORMAT_
from quadsym.errors import InvalidArgumentError


def max_terms() -> int:
    """q展开截断上限。环境变量优先"""
    text = os.environ.get(_MAX_TERMS_ENV_)
    if text is None or text.strip() == '':
        return _MAX_TERMS_
    try:
        value = int(text)
    except ValueError:
        raise InvalidArgumentError(f'{_MAX_TERMS_ENV_}={text!r} is not an integer')
    if value <= 0:
        raise InvalidArgumentError(f'{_MAX_TERMS_ENV_} must be positive, got {value}')
    return value


def as_fraction(x: Any) -> Fraction:
    """int/str/Fraction转Fraction。拒绝浮点，避免悄悄丢精度"""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidArgumentError(f'not a rational number: {x!r}')
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            raise InvalidArgumentError(f'not a rational number: {x!r}')
    # sympy.Rational
    if hasattr(x, 'p') and hasattr(x, 'q'):
        return Fraction(int(x.p), int(x.q))
    raise InvalidArgumentError(f'not a rational number: {x!r}')


def smallest_prime_factors(m: int) -> np.ndarray:
    """最小素因子筛。spf[0]=spf[1]=0"""
    spf = np.zeros(m + 1, dtype=np.int64)
    for i in range(2, m + 1):
        if spf[i] == 0:
            spf[i::i][spf[i::i] == 0] = i
    return spf


def fmt_float(x: float) -> float:
    """统一保留12位有效数字，保证输出字节稳定"""
    return float(format(x, _FLOAT_FORMAT_))


def to_jsonable(obj: Any) -> Any:
    """递归转换为可JSON序列化对象。字典键排序由json.dumps负责"""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': fmt_float(obj.real), 'im': fmt_float(obj.imag)}
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, 'to_dict'):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def rows_to_frame(rows: Sequence[Dict[str, Any]]) -> pl.DataFrame:
    """报表行转DataFrame。列表类字段拼成字符串，方便输出CSV"""
    flat = []
    for row in rows:
        r = {}
        for k, v in to_jsonable(dict(row)).items():
            if isinstance(v, (list, dict)):
                v = ' '.join(map(str, v)) if isinstance(v, list) else str(v)
            r[k] = v
        flat.append(r)
    return pl.DataFrame(flat)


def parse_sigma(text: str, p: int) -> Permutation:
    """解析轮换记号，如 '(1 2)(3 4)'。σ作用在{0,...,p-1}上且固定0"""
    if text is None or text.strip() in ('', '()', 'id', 'identity'):
        return Permutation(list(range(p)))
    cycles: List[List[int]] = []
    for body in re.findall(r'\(([^()]*)\)', text):
        items = [int(t) for t in re.split(r'[\s,]+', body.strip()) if t]
        if items:
            cycles.append(items)
    if not cycles:
        raise InvalidArgumentError(f'cannot parse permutation {text!r}')
    for c in cycles:
        for x in c:
            if not 0 <= x < p:
                raise InvalidArgumentError(f'sigma entry {x} outside 0..{p - 1}')
        if len(set(c)) != len(c):
            raise InvalidArgumentError(f'repeated entry in cycle {c}')
    sigma = Permutation(cycles, size=p)
    check_sigma(sigma, p)
    logger.debug('sigma {} -> {}', text, sigma.array_form)
    return sigma


def check_sigma(sigma: Permutation, p: int) -> Permutation:
    """σ必须是{0..p-1}上的双射且σ(0)=0"""
    if not isinstance(sigma, Permutation):
        arr = list(sigma)
        if sorted(arr) != list(range(len(arr))):
            raise InvalidArgumentError(f'sigma {arr} is not a bijection')
        sigma = Permutation(arr)
    if sigma.size != p:
        raise InvalidArgumentError(f'sigma acts on {sigma.size} points, expected {p}')
    if sigma(0) != 0:
        raise InvalidArgumentError('sigma must fix 0')
    return sigma
