from typing import Any


class SalpeterError(Exception):
    """Base class for every error raised by the library. `exit_code` is what the CLI returns."""

    exit_code: int = 2


class ConfigurationError(SalpeterError):
    """Invalid grid, potential, packet or scenario parameters.

    `problems` holds (field_path, message) pairs so scenario validation can report
    every failure at once.
    """

    def __init__(self, message: str, problems: list[tuple[str, str]] | None = None) -> None:
        self.problems: list[tuple[str, str]] = problems or []
        if self.problems:
            details = "\n".join(f"  {path}: {msg}" for path, msg in self.problems)
            message = f"{message}\n{details}"
        super().__init__(message)


class ShapeError(SalpeterError):
    """Amplitude arrays that do not fit the grid they are used with."""


class UnsupportedOperationError(SalpeterError):
    """Operation that is not defined for a potential variant."""


class ArgumentError(SalpeterError):
    """Bad argument to an observable helper (e.g. an empty series)."""


class NumericalError(SalpeterError):
    exit_code = 3

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None) -> None:
        self.diagnostics: dict[str, Any] = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class SingularityError(NumericalError):
    """An energy collides with a grid pole E(p_i)."""

    def __init__(self, message: str, node: int, momentum: float) -> None:
        self.node = node
        self.momentum = momentum
        super().__init__(message, {"node": node, "p": momentum})


class UndefinedObservableError(NumericalError):
    """Observable with a vanishing denominator (e.g. no transmitted mass)."""
