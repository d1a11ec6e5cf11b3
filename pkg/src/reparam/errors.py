"""Exception hierarchy shared by all modules."""


class ReparamError(Exception):
    """Base class for every error raised by this package."""


class DimMismatch(ReparamError, ValueError):
    pass


class IndexOutOfRange(ReparamError, IndexError):
    pass


class RankUnderflow(ReparamError, ValueError):
    pass


class SignDomain(ReparamError, ValueError):
    """A root of a non-positive radicand was requested."""


class ZeroLagrangian(ReparamError, ValueError):
    pass


class GaugeInvalid(ReparamError, ValueError):
    pass


class SingularSystem(ReparamError, ArithmeticError):
    """The (gauge-fixed) acceleration system cannot be solved reliably."""


class ZeroVelocity(SingularSystem):
    """Radial speed vanished in a pure S_n (n > 2) ansatz."""


class ZeroProfile(ReparamError, ValueError):
    pass


class NonFinite(ReparamError, ArithmeticError):
    pass


class NoConvergence(ReparamError, ArithmeticError):
    pass


class NonMonotone(ReparamError, ValueError):
    pass


class NonOrientation(ReparamError, ValueError):
    pass


class DegeneratePath(ReparamError, ValueError):
    pass


class DegenerateJacobian(ReparamError, ValueError):
    pass


class NullWorldvolume(ReparamError, ValueError):
    pass


class SingularMetric(ReparamError, ArithmeticError):
    pass


class UnknownPreset(ReparamError, KeyError):
    pass


class MissingParam(ReparamError, KeyError):
    pass


class ConfigError(ReparamError):
    pass


class UnknownParam(ReparamError, KeyError):
    pass
