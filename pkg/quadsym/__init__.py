from ._version import __version__

# 实位 / 尖点无穷远
_INF_ = 'inf'
# 数值积分默认容差
_TOL_ = 1e-8
# p进默认精度(位数)
_PRECISION_ = 12
# q展开最大截断长度
_MAX_TERMS_ = 20000
_MAX_TERMS_ENV_ = 'QUADSYM_MAX_TERMS'
# 输出浮点有效位数
_FLOAT_FORMAT_ = '.12g'
