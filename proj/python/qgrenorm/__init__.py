"""Python access to the renormalization fixed-point and blow-up code."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
