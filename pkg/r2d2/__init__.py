"""R2-D2: Android malware detection on colour images - Public Interface"""

from .exceptions import (
    R2D2Error,
    InputError,
    NumericError
)

__version__ = "0.1.0"
__all__ = [
    "R2D2Error",
    "InputError",
    "NumericError"
]
