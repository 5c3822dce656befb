## Exceptions raised by lingan.
##
## Every error is raised as Kind("where()", "[ERROR] what went wrong"),
## the first argument naming the operation that refused its input.


class LinganError(Exception):
    """
    Base class of all the errors raised by the package.
    """
    def __str__(self):
        return " ".join(str(a) for a in self.args)


class InvalidInput(LinganError, ValueError):
    pass


class NotPSD(LinganError, ValueError):
    pass


class UnsupportedDimension(LinganError, ValueError):
    pass


class NumericalFailure(LinganError, ArithmeticError):
    pass


class SingularCovariance(LinganError, ArithmeticError):
    pass


class DegenerateOperand(LinganError, ValueError):
    pass


class ConfigError(LinganError, ValueError):
    """
    A bad configuration value. 

    Args:
        key:
            the configuration key that was rejected.

        message:
            the diagnostic.
    """
    def __init__(self, key, message):
        super().__init__(key, message)
        self.key = key

    def __str__(self):
        return "[%s] %s" % (self.key, self.args[1])


class TrialFailure(LinganError, RuntimeError):
    """
    A single trial of a sweep failed. The sweep coordinates are kept so the
    caller can report them.
    """
    def __init__(self, variant, k, n_ps, trial_index, reason):
        super().__init__(variant, k, n_ps, trial_index, reason)
        self.variant = variant
        self.k = k
        self.n_ps = n_ps
        self.trial_index = trial_index
        self.reason = reason

    def __str__(self):
        return "trial failed at variant=%s k=%d n_ps=%d trial=%d: %s" % (
            self.variant, self.k, self.n_ps, self.trial_index, self.reason)
