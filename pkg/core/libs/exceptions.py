class CookieWalkError(Exception):
    """
    Base class for every error raised by cookiewalk
    """


class DistributionError(CookieWalkError, ValueError):
    """
    An atom list that cannot be turned into a jump distribution
    """


class AssumptionError(CookieWalkError):
    """
    A law failed one of the model assumptions where the caller required it to pass
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StateBudgetError(CookieWalkError):
    """
    The exact chain for an instance has more transient states than the configured budget
    """

    def __init__(self, count: int, budget: int):
        super().__init__("instance needs {0} transient states, budget is {1}".format(count, budget))
        self.count = count
        self.budget = budget


class SingularSystemError(CookieWalkError):
    pass


class CensoringError(CookieWalkError):
    """
    Raised when a computation that guarantees finite runs still hit its horizon
    """

    def __init__(self, message, censored: int = 0):
        super().__init__(message)
        self.censored = censored


class ConfigError(CookieWalkError):
    """
    A config file or flag that could not be parsed
    :param field: dotted path of the offending field, if known
    :param line: line number for syntax errors
    :param column: column number for syntax errors
    """

    def __init__(self, message, field: str = None, line: int = None, column: int = None):
        self.field = field
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = " (line {0}, column {1})".format(line, column)
        elif field:
            location = " (field '{0}')".format(field)
        super().__init__(message + location)
