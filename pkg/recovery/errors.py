class RecoveryError(Exception):
    """
    Base class for every error raised by the recovery toolkit.
    Each subclass carries the process exit code used by the command line.
    """
    exit_code = 3


class UsageError(RecoveryError):
    """
    Invalid command line usage or invalid option values
    """
    exit_code = 1


class DataError(RecoveryError):
    """
    Input data that cannot be turned into a valid series
    """
    exit_code = 2


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        location = []
        if row is not None:
            location.append(f'row {row}')
        if column is not None:
            location.append(f'column {column!r}')
        if location:
            message = f'{message} ({", ".join(location)})'
        super().__init__(message)
        self.row = row
        self.column = column


class GapError(DataError):
    def __init__(self, missing_period):
        super().__init__(f'Missing period {missing_period} in series')
        self.missing_period = missing_period


class NonPositiveValue(DataError):
    pass


class FitFailed(RecoveryError):
    """
    A least-squares fit did not produce a usable result
    """
    exit_code = 3


class NonConvergence(FitFailed):
    pass


class DegenerateSegment(FitFailed):
    exit_code = 2


class DegenerateRates(RecoveryError):
    """
    Equal intrinsic rates: the closed-form eigen formulas do not apply
    """
    pass


class NonFiniteState(RecoveryError):
    pass


class InadmissibleState(RecoveryError):
    pass


class InequalityDivergence(RecoveryError, ZeroDivisionError):
    pass
