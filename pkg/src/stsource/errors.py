# SPDX-FileCopyrightText: 2026 stsource contributors
# SPDX-License-Identifier: MIT
"""Exception hierarchy shared by every stsource module."""


class StsourceError(Exception):
    pass


class ValidationError(StsourceError, ValueError):
    """A precondition or a type invariant does not hold."""


class SpectrumError(ValidationError):
    """The spectrum cannot be split into a slow part and a stable fast part."""


class NumericalError(StsourceError, RuntimeError):
    pass


class DivergenceError(NumericalError):
    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class InfeasibleDesignError(NumericalError):
    def __init__(self, message: str, margins: dict | None = None):
        details = ""
        if margins:
            details = " [" + ", ".join(f"{k}={v:.3e}" for k, v in margins.items()) + "]"
        super().__init__(message + details)
        self.margins = dict(margins or {})
