"""Exception hierarchy; the CLI maps these onto exit codes."""


class ShellEntropyError(Exception):
    exit_code = 1


class DomainError(ShellEntropyError, ValueError):
    """Inputs outside an operation's domain."""

    exit_code = 4


class EmptyShellError(DomainError):
    pass


class DegenerateWindowError(DomainError):
    pass


class NumericalError(ShellEntropyError, ArithmeticError):
    exit_code = 3
