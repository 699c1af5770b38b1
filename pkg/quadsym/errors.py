"""异常类型

每类异常带 ``exit_code``，命令行据此返回退出码
"""


class QuadsymError(Exception):
    exit_code = 2


class InvalidArgumentError(QuadsymError, ValueError):
    """参数不满足前置条件"""


class DomainError(QuadsymError, ValueError):
    """自变量不在收敛域/定义域内"""


class PrecisionError(QuadsymError, ArithmeticError):
    """截断长度或p进精度不足

    Parameters
    ----------
    message: str
    required: int
        达到要求所需的截断长度
    """

    def __init__(self, message: str, required: int = None):
        super().__init__(message)
        self.required = required


class NotAvailableError(QuadsymError, LookupError):
    """数据或构造不可用"""


class NotApplicableError(QuadsymError, ValueError):
    """情形不适用"""


class InternalError(QuadsymError, RuntimeError):
    exit_code = 1


class VerificationError(QuadsymError):
    """恒等式校验失败"""
    exit_code = 3
